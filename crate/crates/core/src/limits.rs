//! Size guards shared across modules.
//!
//! The dense cap can be overridden at process start through the
//! `GAPFORGE_NMAX` environment variable.

use std::sync::OnceLock;

/// Default largest qubit count handled by dense diagonalization (dimension 4096).
pub const DEFAULT_N_MAX: usize = 12;

/// Largest number of invalid queries enumerated exhaustively (16384 replays).
pub const ADVERSARY_CAP: usize = 14;

/// Policies drawn when exhaustive enumeration is out of reach.
pub const DEFAULT_SAMPLE_COUNT: usize = 1000;

/// Deepest adaptive machine the path enumerator will expand.
pub const Q_MAX_GUARD: usize = 20;

pub const ENV_N_MAX: &str = "GAPFORGE_NMAX";

/// Current dense cap: `GAPFORGE_NMAX` if set to a positive integer, else 12.
pub fn n_max() -> usize {
    static CAP: OnceLock<usize> = OnceLock::new();
    *CAP.get_or_init(|| {
        std::env::var(ENV_N_MAX)
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .filter(|&v| v > 0)
            .unwrap_or(DEFAULT_N_MAX)
    })
}
