//! Reference routines for tests, coded without the library's embedding or eigensolver.
#![allow(dead_code, clippy::needless_range_loop)]

use gapforge::hamiltonian::CMatrix;
use gapforge::Hamiltonian;
use num_complex::Complex64;

/// Frozen reference spectra (computed independently with LAPACK `eigvalsh`).
pub mod frozen {
    /// `random_instance(4, 2, 6, 7)`: ground energy inside the promise window.
    pub const SEED7_LAMBDA1: f64 = 0.5998444805443895;
    pub const SEED7_LAMBDA2: f64 = 0.9365488189357034;
    pub const SEED7_GAP: f64 = 0.33670433839131386;
    pub const SEED7_LAMBDA_MAX: f64 = 2.4562673194997506;
    /// `random_instance(4, 2, 6, 6)`: a NO instance.
    pub const SEED6_LAMBDA1: f64 = 1.1382078925641803;
    pub const SEED6_LAMBDA2: f64 = 1.2100164668048472;
    /// `random_instance(4, 2, 3, 1)`: a YES instance.
    pub const SEED1_M3_LAMBDA1: f64 = 0.21049334127884145;
    pub const SEED1_M3_LAMBDA2: f64 = 0.34782238348394573;
}

fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    CMatrix::from_fn(ar * br, ac * bc, |i, j| {
        a[(i / br, j / bc)] * b[(i % br, j % bc)]
    })
}

fn outer(row: usize, col: usize) -> CMatrix {
    let mut m = CMatrix::zeros(2, 2);
    m[(row, col)] = Complex64::new(1.0, 0.0);
    m
}

/// Dense matrix by expanding every term into `|x⟩⟨y|` single-qubit factors and
/// taking Kronecker products `q_{n-1} ⊗ … ⊗ q_0` (qubit 0 least significant).
pub fn kron_dense(h: &Hamiltonian) -> CMatrix {
    let n = h.n();
    let dim = 1usize << n;
    let mut out = CMatrix::zeros(dim, dim);
    for term in h.terms() {
        let m = term.matrix();
        let support = term.support();
        for li in 0..m.nrows() {
            for lj in 0..m.ncols() {
                let v = m[(li, lj)];
                if v == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let mut acc = CMatrix::identity(1, 1);
                for q in (0..n).rev() {
                    let factor = match support.iter().position(|&s| s == q) {
                        Some(t) => outer((li >> t) & 1, (lj >> t) & 1),
                        None => CMatrix::identity(2, 2),
                    };
                    acc = kron(&acc, &factor);
                }
                out += acc * v;
            }
        }
    }
    out
}

/// Eigenvalues of a Hermitian matrix by cyclic Jacobi rotations on its real
/// symmetric embedding `[[Re, −Im], [Im, Re]]`, whose spectrum is that of the
/// input with every eigenvalue doubled.
pub fn jacobi_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let n = m.nrows();
    let size = 2 * n;
    let mut a = vec![vec![0.0f64; size]; size];
    for i in 0..n {
        for j in 0..n {
            let z = m[(i, j)];
            a[i][j] = z.re;
            a[i + n][j + n] = z.re;
            a[i][j + n] = -z.im;
            a[i + n][j] = z.im;
        }
    }
    for _sweep in 0..100 {
        let off: f64 = (0..size)
            .flat_map(|i| (0..size).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-26 {
            break;
        }
        for p in 0..size {
            for q in p + 1..size {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..size {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..size {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut doubled: Vec<f64> = (0..size).map(|i| a[i][i]).collect();
    doubled.sort_by(f64::total_cmp);
    doubled.into_iter().step_by(2).collect()
}

pub fn max_entry_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .fold(0.0f64, |acc, (x, y)| acc.max((x - y).norm()))
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .fold(0.0f64, |acc, (x, y)| acc.max((x - y).abs()))
}

/// One qubit with eigenvalues `{value, 1}` (or `{1, 1}` when `value = 1`).
pub fn planted(value: f64) -> Hamiltonian {
    Hamiltonian::new(
        1,
        vec![gapforge::LocalTerm::diagonal(vec![0], &[value, 1.0]).unwrap()],
    )
    .unwrap()
}
