//! Zadoff-Chu root sequences, cyclically shifted random-access codes and the
//! code matrix that collects them.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::Path;

use crate::error::{Error, Result};

/// A ZC root `u` of length `M`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ZcRoot {
    pub u: usize,
    pub m: usize,
}

impl ZcRoot {
    pub fn new(u: usize, m: usize) -> Result<Self> {
        if u == 0 || u >= m {
            return Err(Error::InvalidRoot { u, m });
        }
        Ok(ZcRoot { u, m })
    }

    /// Whether `gcd(u, M) = 1`, the condition for ideal cyclic autocorrelation.
    pub fn is_coprime(&self) -> bool {
        gcd(self.u, self.m) == 1
    }

    /// Element `k` of the root sequence, `exp(-i pi u k (k+1) / M)`.
    ///
    /// The exponent is reduced modulo `2M` in integer arithmetic so that large
    /// `k` does not lose phase precision.
    pub fn element(&self, k: usize) -> Complex64 {
        let m = self.m as u128;
        // k(k+1) is even, so the exponent is 2*pi * (u k(k+1)/2) / M
        let half = (k as u128 * (k as u128 + 1) / 2) % m;
        let r = (self.u as u128 % m) * half % m;
        Complex64::from_polar(1.0, -2.0 * PI * r as f64 / self.m as f64)
    }

    pub fn sequence(&self) -> Vec<Complex64> {
        (0..self.m).map(|k| self.element(k)).collect()
    }
}

pub(crate) fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// The `u`-th root ZC sequence of length `m`.
pub fn zc_root_sequence(u: usize, m: usize) -> Result<Vec<Complex64>> {
    Ok(ZcRoot::new(u, m)?.sequence())
}

/// Code obtained by cyclically shifting root `u` by `ell * n_cs` places:
/// element `k` is `Z^u((k + ell*n_cs) mod M)`.
pub fn cyclic_shift_code(u: usize, ell: usize, n_cs: usize, m: usize) -> Result<Vec<Complex64>> {
    let root = ZcRoot::new(u, m)?;
    let shift = ell * n_cs;
    if shift >= m {
        return Err(Error::ShiftOverflow { u, count: ell + 1, n_cs, m });
    }
    Ok((0..m).map(|k| root.element((k + shift) % m)).collect())
}

/// A group of codes generated from one root with a common shift step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RootFamily {
    pub u: usize,
    pub count: usize,
    pub n_cs: usize,
}

/// One column of the code matrix with its provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeColumn {
    pub u: usize,
    /// Shift index within the root family; the sample shift is `shift * n_cs`.
    #[serde(rename = "shift")]
    pub shift_index: usize,
    pub n_cs: usize,
    #[serde(with = "complex_pairs")]
    pub values: Vec<Complex64>,
}

/// The `M x G` random-access code matrix.
///
/// Columns are stored in code order; each carries the root and shift that
/// generated it so dictionary blocks can be rebuilt without re-deriving them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeMatrix {
    #[serde(rename = "M")]
    pub m: usize,
    /// Shift step of the first root family. Columns carry their own step when
    /// several families with different steps are present.
    pub n_cs: usize,
    pub columns: Vec<CodeColumn>,
}

impl CodeMatrix {
    pub fn g(&self) -> usize {
        self.columns.len()
    }

    pub fn roots(&self) -> Vec<usize> {
        self.columns.iter().map(|c| c.u).collect()
    }

    pub fn shift_indices(&self) -> Vec<usize> {
        self.columns.iter().map(|c| c.shift_index).collect()
    }

    /// Consecutive runs of columns that share `(u, n_cs)`, in code order.
    pub fn families(&self) -> Vec<RootFamily> {
        let mut out: Vec<RootFamily> = Vec::new();
        for c in &self.columns {
            match out.last_mut() {
                Some(f) if f.u == c.u && f.n_cs == c.n_cs => f.count += 1,
                _ => out.push(RootFamily { u: c.u, count: 1, n_cs: c.n_cs }),
            }
        }
        out
    }

    /// Check the structural invariants: unit modulus and that every column is
    /// the declared cyclic shift of its root.
    pub fn verify(&self, tol: f64) -> Result<()> {
        for (i, c) in self.columns.iter().enumerate() {
            if c.values.len() != self.m {
                return Err(Error::DimensionMismatch(format!(
                    "column {i} has {} entries, expected {}",
                    c.values.len(),
                    self.m
                )));
            }
            let expected = cyclic_shift_code(c.u, c.shift_index, c.n_cs, self.m)?;
            let err = c
                .values
                .iter()
                .zip(&expected)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            if err > tol {
                return Err(Error::Numeric(format!("column {i} deviates from its ZC shift by {err:e}")));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let cm: CodeMatrix = serde_json::from_str(text)?;
        cm.verify(1e-9)?;
        Ok(cm)
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }
}

/// Build a code matrix from `(u, count)` pairs sharing one shift step.
pub fn build_code_matrix(root_plan: &[(usize, usize)], n_cs: usize, m: usize) -> Result<CodeMatrix> {
    let families: Vec<RootFamily> = root_plan
        .iter()
        .map(|&(u, count)| RootFamily { u, count, n_cs })
        .collect();
    build_code_matrix_families(&families, m)
}

/// Build a code matrix from root families that may use different shift steps.
/// Within a family the shift index runs `0..count`.
pub fn build_code_matrix_families(families: &[RootFamily], m: usize) -> Result<CodeMatrix> {
    let total: usize = families.iter().map(|f| f.count).sum();
    if total == 0 {
        return Err(Error::InvalidConfig("code matrix needs at least one code".into()));
    }
    let mut columns = Vec::with_capacity(total);
    for f in families {
        if f.n_cs == 0 && f.count > 1 {
            return Err(Error::InvalidConfig(format!(
                "root {} requests {} codes with n_cs = 0",
                f.u, f.count
            )));
        }
        if f.count * f.n_cs > m {
            return Err(Error::ShiftOverflow { u: f.u, count: f.count, n_cs: f.n_cs, m });
        }
        let root = ZcRoot::new(f.u, m)?;
        let base = root.sequence();
        for s in 0..f.count {
            let shift = s * f.n_cs;
            let values = (0..m).map(|k| base[(k + shift) % m]).collect();
            columns.push(CodeColumn { u: f.u, shift_index: s, n_cs: f.n_cs, values });
        }
    }
    Ok(CodeMatrix { m, n_cs: families[0].n_cs, columns })
}

pub(crate) mod complex_pairs {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = v.iter().map(|c| [c.re, c.im]).collect();
        pairs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex64>, D::Error> {
        let pairs: Vec<[f64; 2]> = Vec::deserialize(d)?;
        Ok(pairs.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
    }
}
