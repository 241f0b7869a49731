//! Instance files.
//!
//! ```json
//! {"n": 2, "c": 2, "a": 0.333, "b": 0.667,
//!  "terms": [{"qubits": [0, 1], "re": [[...], ...], "im": [[...], ...]}],
//!  "meta": {"variant": "global", "ancilla_index": 1}}
//! ```
//!
//! Matrices are row-major; a missing `"im"` means a real matrix. `"meta"`
//! appears only on instances produced by the reduction.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::hamiltonian::{CMatrix, Hamiltonian, KlhInstance, LocalTerm, SpectralGapInstance};
use crate::reduction::{ReductionOutput, ReductionVariant};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ReductionMeta {
    pub variant: ReductionVariant,
    pub ancilla_index: usize,
}

/// Contents of an instance file, before choosing which problem it poses.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceFile {
    pub hamiltonian: Hamiltonian,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub meta: Option<ReductionMeta>,
}

impl InstanceFile {
    pub fn from_klh(inst: &KlhInstance) -> Self {
        Self {
            hamiltonian: inst.hamiltonian.as_ref().clone(),
            a: inst.a,
            b: inst.b,
            c: inst.c,
            meta: None,
        }
    }

    pub fn from_gap(inst: &SpectralGapInstance) -> Self {
        Self {
            hamiltonian: inst.hamiltonian.as_ref().clone(),
            a: inst.a,
            b: inst.b,
            c: inst.c,
            meta: None,
        }
    }

    pub fn from_reduction(out: &ReductionOutput) -> Self {
        Self {
            meta: Some(ReductionMeta {
                variant: out.variant,
                ancilla_index: out.ancilla_index,
            }),
            ..Self::from_gap(&out.instance)
        }
    }

    pub fn klh(&self) -> Result<KlhInstance> {
        KlhInstance::new(self.hamiltonian.clone(), self.a, self.b, self.c)
    }

    pub fn gap(&self) -> Result<SpectralGapInstance> {
        SpectralGapInstance::new(self.hamiltonian.clone(), self.a, self.b, self.c)
    }
}

#[derive(Serialize)]
struct RawTerm {
    qubits: Vec<usize>,
    re: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    im: Option<Vec<Vec<f64>>>,
}

#[derive(Serialize)]
struct RawInstance {
    n: usize,
    c: f64,
    a: f64,
    b: f64,
    terms: Vec<RawTerm>,
    #[serde(skip_serializing_if = "Option::is_none")]
    meta: Option<ReductionMeta>,
}

/// Serializes to one line of JSON (plus newline). Floats use the shortest
/// representation that parses back to the same bits.
pub fn render_instance(file: &InstanceFile) -> String {
    let terms = file
        .hamiltonian
        .terms()
        .iter()
        .map(|t| {
            let m = t.matrix();
            let rows = |f: fn(&Complex64) -> f64| -> Vec<Vec<f64>> {
                (0..m.nrows())
                    .map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect())
                    .collect()
            };
            let has_imag = m.iter().any(|z| z.im != 0.0);
            RawTerm {
                qubits: t.support().to_vec(),
                re: rows(|z| z.re),
                im: has_imag.then(|| rows(|z| z.im)),
            }
        })
        .collect();
    let raw = RawInstance {
        n: file.hamiltonian.n(),
        c: file.c,
        a: file.a,
        b: file.b,
        terms,
        meta: file.meta,
    };
    let mut text = serde_json::to_string(&raw).expect("instance serializes");
    text.push('\n');
    text
}

pub fn write_instance(file: &InstanceFile, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, render_instance(file))?;
    Ok(())
}

pub fn read_instance(path: impl AsRef<Path>) -> Result<InstanceFile> {
    parse_instance(&fs::read_to_string(path)?)
}

pub fn read_klh(path: impl AsRef<Path>) -> Result<KlhInstance> {
    read_instance(path)?.klh()
}

pub fn read_gap(path: impl AsRef<Path>) -> Result<SpectralGapInstance> {
    read_instance(path)?.gap()
}

pub fn parse_instance(text: &str) -> Result<InstanceFile> {
    let root: Value =
        serde_json::from_str(text).map_err(|e| Error::parse("<root>", e.to_string()))?;
    let obj = root
        .as_object()
        .ok_or_else(|| Error::parse("<root>", "expected a JSON object"))?;
    let field = |name: &str| obj.get(name).ok_or_else(|| Error::parse(name, "missing"));

    let n = as_index(field("n")?, "n")?;
    let c = as_number(field("c")?, "c")?;
    let a = as_number(field("a")?, "a")?;
    let b = as_number(field("b")?, "b")?;
    let raw_terms = field("terms")?
        .as_array()
        .ok_or_else(|| Error::parse("terms", "expected an array"))?;

    let mut terms = Vec::with_capacity(raw_terms.len());
    for (i, raw) in raw_terms.iter().enumerate() {
        let path = format!("terms[{i}]");
        let t = raw
            .as_object()
            .ok_or_else(|| Error::parse(&path, "expected an object"))?;
        let qubits_path = format!("{path}.qubits");
        let qubits = t
            .get("qubits")
            .ok_or_else(|| Error::parse(&qubits_path, "missing"))?
            .as_array()
            .ok_or_else(|| Error::parse(&qubits_path, "expected an array"))?
            .iter()
            .map(|q| as_index(q, &qubits_path))
            .collect::<Result<Vec<_>>>()?;
        if let Some(&q) = qubits.iter().find(|&&q| q >= n) {
            return Err(Error::parse(
                qubits_path,
                format!("qubit {q} out of range for n={n}"),
            ));
        }
        let re_path = format!("{path}.re");
        let re = as_matrix(
            t.get("re")
                .ok_or_else(|| Error::parse(&re_path, "missing"))?,
            &re_path,
        )?;
        let dim = re.len();
        let im = match t.get("im") {
            Some(v) => {
                let im_path = format!("{path}.im");
                let im = as_matrix(v, &im_path)?;
                if im.len() != dim || im.iter().zip(&re).any(|(x, y)| x.len() != y.len()) {
                    return Err(Error::parse(im_path, "shape differs from \"re\""));
                }
                Some(im)
            }
            None => None,
        };
        let cols = re.first().map_or(0, Vec::len);
        if re.iter().any(|row| row.len() != cols) || cols != dim {
            return Err(Error::parse(re_path, "matrix must be square"));
        }
        let matrix = CMatrix::from_fn(dim, dim, |r, col| {
            Complex64::new(re[r][col], im.as_ref().map_or(0.0, |m| m[r][col]))
        });
        terms.push(LocalTerm::new(qubits, matrix).map_err(|e| Error::parse(&path, e.to_string()))?);
    }
    let hamiltonian =
        Hamiltonian::new(n, terms).map_err(|e| Error::parse("terms", e.to_string()))?;

    let meta = match obj.get("meta") {
        None | Some(Value::Null) => None,
        Some(m) => {
            let variant = m
                .get("variant")
                .and_then(Value::as_str)
                .ok_or_else(|| Error::parse("meta.variant", "expected a string"))?
                .parse::<ReductionVariant>()
                .map_err(|e| Error::parse("meta.variant", e.to_string()))?;
            let ancilla_index = as_index(
                m.get("ancilla_index")
                    .ok_or_else(|| Error::parse("meta.ancilla_index", "missing"))?,
                "meta.ancilla_index",
            )?;
            Some(ReductionMeta {
                variant,
                ancilla_index,
            })
        }
    };

    if !(b > a) {
        return Err(Error::parse("b", format!("need b > a, got a={a}, b={b}")));
    }
    if !(c > 0.0) {
        return Err(Error::parse("c", format!("need c > 0, got {c}")));
    }
    Ok(InstanceFile {
        hamiltonian,
        a,
        b,
        c,
        meta,
    })
}

fn as_number(v: &Value, field: &str) -> Result<f64> {
    v.as_f64()
        .filter(|x| x.is_finite())
        .ok_or_else(|| Error::parse(field, format!("expected a finite number, got {v}")))
}

fn as_index(v: &Value, field: &str) -> Result<usize> {
    v.as_u64()
        .and_then(|x| usize::try_from(x).ok())
        .ok_or_else(|| Error::parse(field, format!("expected a non-negative integer, got {v}")))
}

fn as_matrix(v: &Value, field: &str) -> Result<Vec<Vec<f64>>> {
    v.as_array()
        .ok_or_else(|| Error::parse(field, "expected an array of rows"))?
        .iter()
        .map(|row| {
            row.as_array()
                .ok_or_else(|| Error::parse(field, "expected an array of rows"))?
                .iter()
                .map(|x| as_number(x, field))
                .collect()
        })
        .collect()
}
