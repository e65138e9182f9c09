//! Mutual and block coherence of PRACH dictionaries.
//!
//! Every column of the dictionary has norm `sqrt(M)`, and the normalized
//! correlation between two columns of the same root family is the sinc ratio
//! `S(r) = |sin(pi M r / N) / (M sin(pi r / N))|` evaluated at a lattice
//! offset `r`. Across roots the correlation is a generalized quadratic Gauss
//! sum which this module evaluates either term by term or with one FFT per
//! column offset.

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::codebook::ZcRoot;
use crate::config::SystemConfig;
use crate::dictionary::{block_entries, BlockFamily, Dictionary};
use crate::error::{Error, Result};
use crate::linalg::{dot_conj, norm, CMatrix};

/// Relative slack under which two correlation values count as a tie.
const TIE_TOL: f64 = 1e-12;

/// Absolute slack of the `<= S(1)` admission test.
pub const ADMISSION_SLACK: f64 = 1e-12;

/// How a [`CoherenceReport`] was computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoherenceMethod {
    /// Every column pair of the dense matrix.
    BruteForce,
    /// Exact, using shift invariance within and across root families.
    Structured,
    /// Sinc-ratio formula for a single root with consecutive shifts.
    ClosedForm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherenceReport {
    pub mu: f64,
    /// Lowest flat column pair `(i, j)`, `i < j`, attaining `mu`.
    pub argmax_pair: (usize, usize),
    pub method: CoherenceMethod,
    /// Coherence among the columns of each block.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_block_mu: Option<Vec<f64>>,
    /// Largest correlation between columns of two different blocks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cross_block_max: Option<f64>,
}

/// Value of the sinc ratio together with a flag for the removable
/// singularity at integer `r / N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SincValue {
    pub value: f64,
    /// `r / N` was an integer, where numerator and denominator both vanish;
    /// `value` is then the limit 1.
    pub singular: bool,
}

/// `S(r) = |sinc(r M / N) / sinc(r / N)|`.
pub fn sinc_ratio(r: f64, m: usize, n: usize) -> f64 {
    sinc_ratio_checked(r, m, n).value
}

pub fn sinc_ratio_checked(r: f64, m: usize, n: usize) -> SincValue {
    let x = r / n as f64;
    // |S| is 1-periodic in x, so reduce to [-1/2, 1/2] before dividing
    let f = x - x.round();
    let den = (PI * f).sin();
    if den.abs() < 1e-15 {
        return SincValue { value: 1.0, singular: r != 0.0 };
    }
    let value = ((PI * m as f64 * f).sin() / (m as f64 * den)).abs();
    SincValue { value: value.min(1.0), singular: false }
}

fn check_columns(a: &CMatrix) -> Result<Vec<f64>> {
    (0..a.cols())
        .map(|c| {
            let nc = a.col_norm(c);
            if nc == 0.0 {
                Err(Error::DegenerateColumn(c))
            } else {
                Ok(nc)
            }
        })
        .collect()
}

/// Exact mutual coherence of an arbitrary matrix over all column pairs.
pub fn mutual_coherence_brute(matrix: &CMatrix) -> Result<CoherenceReport> {
    let t = matrix.cols();
    if t < 2 {
        return Err(Error::DimensionMismatch(format!("coherence needs at least two columns, got {t}")));
    }
    let norms = check_columns(matrix)?;
    let corr = |i: usize, j: usize| dot_conj(matrix.col(i), matrix.col(j)).norm() / (norms[i] * norms[j]);

    let row_max: Vec<f64> = (0..t - 1)
        .into_par_iter()
        .map(|i| (i + 1..t).map(|j| corr(i, j)).fold(0.0, f64::max))
        .collect();
    let mu = row_max.iter().cloned().fold(0.0, f64::max);
    let thr = mu * (1.0 - TIE_TOL);
    let i = row_max.iter().position(|&v| v >= thr).unwrap_or(0);
    let j = (i + 1..t).find(|&j| corr(i, j) >= thr).unwrap_or(i + 1);
    Ok(CoherenceReport {
        mu: mu.min(1.0),
        argmax_pair: (i, j),
        method: CoherenceMethod::BruteForce,
        per_block_mu: None,
        cross_block_max: None,
    })
}

/// Largest normalized correlation between a column of `b` and a column of `d`.
pub fn block_coherence(b: &CMatrix, d: &CMatrix) -> Result<f64> {
    if b.rows() != d.rows() {
        return Err(Error::DimensionMismatch(format!("{} rows vs {} rows", b.rows(), d.rows())));
    }
    let nb = check_columns(b)?;
    let nd = check_columns(d)?;
    let mut best = 0.0f64;
    for i in 0..b.cols() {
        for j in 0..d.cols() {
            best = best.max(dot_conj(b.col(i), d.col(j)).norm() / (nb[i] * nd[j]));
        }
    }
    Ok(best.min(1.0))
}

/// Smallest wrapped lattice offset between columns of distinct blocks of a
/// single-root dictionary with consecutive shifts,
/// `min (n_cs u N / M (l - m) + (p - k)) mod N` over `l != m` and column
/// offsets `|p - k| < N1`.
///
/// With fewer than two blocks there is no such pair and the result is infinite.
pub fn zeta(u: usize, n_cs: usize, g: usize, n1: usize, m: usize, n: usize) -> f64 {
    if g < 2 {
        return f64::INFINITY;
    }
    let step = (n_cs * u) as f64 * n as f64 / m as f64;
    let nf = n as f64;
    let dk = n1 as i64 - 1;
    let mut best = f64::INFINITY;
    for dl in 1..g as i64 {
        for sign in [-1.0, 1.0] {
            let base = sign * step * dl as f64;
            for d in -dk..=dk {
                let v = (base + d as f64).rem_euclid(nf);
                best = best.min(v);
            }
        }
    }
    best
}

/// Closed-form coherence with a flag when `pi sqrt(2) <= M <= N/2` fails.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedForm {
    pub mu: f64,
    pub zeta: f64,
    pub assumption_violated: bool,
}

/// `S(min(1, zeta))` for a single-root dictionary.
pub fn coherence_closed_form(u: usize, n_cs: usize, g: usize, n1: usize, m: usize, n: usize) -> Result<f64> {
    let cf = coherence_closed_form_unchecked(u, n_cs, g, n1, m, n);
    if cf.assumption_violated {
        return Err(Error::ClosedFormAssumption { m, n });
    }
    Ok(cf.mu)
}

/// Same as [`coherence_closed_form`] but always computes the value.
pub fn coherence_closed_form_unchecked(u: usize, n_cs: usize, g: usize, n1: usize, m: usize, n: usize) -> ClosedForm {
    let z = zeta(u, n_cs, g, n1, m, n);
    let violated = (m as f64) < PI * 2f64.sqrt() || 2 * m > n;
    ClosedForm { mu: sinc_ratio(z.min(1.0), m, n), zeta: z, assumption_violated: violated }
}

/// Cross-root correlation `(1/M) |[E_l]_k^* [E_m]_p|` between column `k` of
/// code `ell` of root `u1` and column `p` of code `m_idx` of root `u2`, all
/// indices 1-based, both roots using the configured shift step `n_cs`.
pub fn cross_root_magnitude(
    u1: usize,
    u2: usize,
    ell: usize,
    m_idx: usize,
    p: usize,
    k: usize,
    n_cs: usize,
    config: &SystemConfig,
) -> Result<f64> {
    if ell == 0 || m_idx == 0 || p == 0 || k == 0 {
        return Err(Error::InvalidConfig("code and column indices are 1-based".into()));
    }
    cross_root_magnitude_mixed(u1, ell - 1, n_cs, u2, m_idx - 1, n_cs, p as i64 - k as i64, config.m, config.n)
}

/// Offset `theta` of the quadratic Gauss sum for shift indices `s1`, `s2`
/// (0-based) with per-root shift steps.
pub fn gauss_sum_offset(u1: usize, s1: usize, ncs1: usize, u2: usize, s2: usize, ncs2: usize, dpk: i64, m: usize, n: usize) -> f64 {
    let du = u2 as f64 - u1 as f64;
    let bracket = (ncs2 * u2 * s2) as f64 - (ncs1 * u1 * s1) as f64 + dpk as f64 * m as f64 / n as f64;
    0.5 + bracket / du
}

/// `(1/M) |sum_n exp(-i pi (u2-u1) (n + theta)^2 / M)|` with `theta` from
/// [`gauss_sum_offset`]; `dpk = p - k`.
pub fn cross_root_magnitude_mixed(
    u1: usize,
    s1: usize,
    ncs1: usize,
    u2: usize,
    s2: usize,
    ncs2: usize,
    dpk: i64,
    m: usize,
    n: usize,
) -> Result<f64> {
    if u1 == u2 {
        return Err(Error::SameRoot(u1));
    }
    let du = u2 as f64 - u1 as f64;
    let theta = gauss_sum_offset(u1, s1, ncs1, u2, s2, ncs2, dpk, m, n);
    let mf = m as f64;
    // (n+theta)^2 = n^2 + 2 n theta + theta^2; the constant term drops out of
    // the modulus and n^2 du / M is reduced exactly in integers
    let du_i = u2 as i128 - u1 as i128;
    let two_m = 2 * m as i128;
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..m {
        let quad = (du_i * (k as i128 * k as i128 % two_m)).rem_euclid(two_m) as f64;
        let lin = (2.0 * k as f64 * theta * du).rem_euclid(2.0 * mf);
        acc += Complex64::from_polar(1.0, -PI * (quad + lin) / mf);
    }
    Ok(acc.norm() / mf)
}

/// Shift indices of one root family.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyShifts {
    pub u: usize,
    pub n_cs: usize,
    /// Shift indices (0-based) of the codes in the family.
    pub shifts: Vec<usize>,
}

impl FamilyShifts {
    pub fn consecutive(u: usize, n_cs: usize, count: usize) -> Self {
        FamilyShifts { u, n_cs, shifts: (0..count).collect() }
    }

    fn residues(&self, m: usize) -> Vec<usize> {
        self.shifts
            .iter()
            .map(|&s| (self.u as u128 * s as u128 * self.n_cs as u128 % m as u128) as usize)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Admission {
    pub admissible: bool,
    /// Largest cross-root correlation found against any existing family.
    pub max_magnitude: f64,
}

/// How the cross-root scan of [`multi_root_admissible_with`] is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdmissionPath {
    /// Explicit blocks and inner products for every column pair.
    Direct,
    /// One `M`-point FFT per column offset `p - k`.
    Fft,
    /// `Direct` for small scans, `Fft` otherwise.
    Auto,
}

/// Number of `(l, m, p, k)` tuples up to which [`AdmissionPath::Auto`] scans directly.
const DIRECT_SCAN_LIMIT: usize = 10_000;

/// Whether adding `candidate` keeps every cross-root correlation at or below `S(1)`.
pub fn multi_root_admissible(candidate: &FamilyShifts, existing: &[FamilyShifts], config: &SystemConfig) -> Result<Admission> {
    multi_root_admissible_with(candidate, existing, config, AdmissionPath::Auto)
}

pub fn multi_root_admissible_with(
    candidate: &FamilyShifts,
    existing: &[FamilyShifts],
    config: &SystemConfig,
    path: AdmissionPath,
) -> Result<Admission> {
    config.ensure_valid()?;
    let threshold = sinc_ratio(1.0, config.m, config.n) + ADMISSION_SLACK;
    let mut worst = 0.0f64;
    for fam in existing {
        if fam.u == candidate.u {
            return Err(Error::SameRoot(fam.u));
        }
        let tuples = fam.shifts.len() * candidate.shifts.len() * config.n1 * config.n1;
        let use_direct = match path {
            AdmissionPath::Direct => true,
            AdmissionPath::Fft => false,
            AdmissionPath::Auto => tuples <= DIRECT_SCAN_LIMIT,
        };
        let v = if use_direct {
            cross_family_direct(fam, candidate, config)?
        } else {
            let table = PairTable::new(fam.u, candidate.u, config)?;
            let r1 = fam.residues(config.m);
            let r2 = candidate.residues(config.m);
            let mut present = vec![false; config.m];
            for &a in &r1 {
                for &b in &r2 {
                    present[(b + config.m - a) % config.m] = true;
                }
            }
            table.max_over(&present)
        };
        worst = worst.max(v);
    }
    Ok(Admission { admissible: worst <= threshold, max_magnitude: worst })
}

/// Exact coherence of the dictionary built from `families`, without forming it.
///
/// Uses one lookup table per pair of families, so the cost is independent of
/// the number of codes apart from the residue bookkeeping.
pub fn family_set_coherence(families: &[FamilyShifts], config: &SystemConfig) -> Result<f64> {
    config.ensure_valid()?;
    let m = config.m;
    let mut best = 0.0f64;
    for (a, fa) in families.iter().enumerate() {
        let ra = fa.residues(m);
        for fb in &families[a..] {
            let same = std::ptr::eq(fa, fb);
            let rb = fb.residues(m);
            let table = PairTable::new(fa.u, fb.u, config)?;
            let mut present = vec![false; m];
            for (i, &x) in ra.iter().enumerate() {
                for (j, &y) in rb.iter().enumerate() {
                    if !(same && i == j) {
                        present[(y + m - x) % m] = true;
                    }
                }
            }
            best = best.max(table.max_over(&present));
            if same && config.n1 >= 2 && !fa.shifts.is_empty() {
                // column pairs inside one block
                for d in 1..config.n1 as i64 {
                    best = best.max(table.get(d, 0)).max(table.get(-d, 0));
                }
            }
        }
    }
    Ok(best)
}

fn cross_family_direct(a: &FamilyShifts, b: &FamilyShifts, config: &SystemConfig) -> Result<f64> {
    let ea: Vec<CMatrix> = a.shifts.iter().map(|&s| block_entries(a.u, s, a.n_cs, config)).collect::<Result<_>>()?;
    let eb: Vec<CMatrix> = b.shifts.iter().map(|&s| block_entries(b.u, s, b.n_cs, config)).collect::<Result<_>>()?;
    let mut best = 0.0f64;
    for x in &ea {
        for y in &eb {
            best = best.max(block_coherence(x, y)?);
        }
    }
    Ok(best)
}

/// Normalized correlations between two root families as a function of the
/// column offset `d = p - k` and the shift residue difference
/// `I = r_b - r_a (mod M)`, where `r = u s n_cs mod M`.
struct PairTable {
    m: usize,
    n1: usize,
    /// Row `d + N1 - 1`, column `I`.
    values: Vec<f64>,
}

impl PairTable {
    fn new(ua: usize, ub: usize, config: &SystemConfig) -> Result<Self> {
        let (m, n, n1) = (config.m, config.n, config.n1);
        let za = ZcRoot::new(ua, m)?.sequence();
        let zb = ZcRoot::new(ub, m)?.sequence();
        let fft = FftPlanner::new().plan_fft_forward(m);
        let rows = 2 * n1 - 1;
        let mut values = vec![0.0; rows * m];
        let mut buf = vec![Complex64::new(0.0, 0.0); m];
        for (row, d) in (-(n1 as i64 - 1)..n1 as i64).enumerate() {
            for q in 0..m {
                let lin = (q as i128 * d as i128).rem_euclid(n as i128) as f64;
                buf[q] = za[q].conj() * zb[q] * Complex64::from_polar(1.0, -2.0 * PI * lin / n as f64);
            }
            fft.process(&mut buf);
            for (dst, v) in values[row * m..(row + 1) * m].iter_mut().zip(&buf) {
                *dst = (v.norm() / m as f64).min(1.0);
            }
        }
        Ok(PairTable { m, n1, values })
    }

    #[inline]
    fn get(&self, d: i64, i: usize) -> f64 {
        self.values[(d + self.n1 as i64 - 1) as usize * self.m + i]
    }

    /// Max over all offsets and the residues flagged in `present`.
    fn max_over(&self, present: &[bool]) -> f64 {
        let mut best = 0.0f64;
        for row in self.values.chunks(self.m) {
            for (v, &p) in row.iter().zip(present) {
                if p {
                    best = best.max(*v);
                }
            }
        }
        best
    }
}

/// Exact column correlations of a dictionary through per-family lookup tables.
struct StructuredCoherence<'a> {
    dict: &'a Dictionary,
    /// Family index of each block.
    family_of: Vec<usize>,
    /// Shift residue of each block.
    residue: Vec<usize>,
    /// Tables for family pairs `(a, b)` with `a <= b`, indexed `a * F + b`.
    tables: Vec<Option<PairTable>>,
    n_families: usize,
}

impl<'a> StructuredCoherence<'a> {
    fn new(dict: &'a Dictionary) -> Result<Self> {
        let cfg = dict.config();
        let fams: Vec<BlockFamily> = dict.families();
        let f = fams.len();
        let mut family_of = vec![0; dict.g()];
        let mut residue = vec![0; dict.g()];
        for (fi, fam) in fams.iter().enumerate() {
            for (&b, &s) in fam.blocks.iter().zip(&fam.shifts) {
                family_of[b] = fi;
                residue[b] = (fam.u as u128 * s as u128 * fam.n_cs as u128 % cfg.m as u128) as usize;
            }
        }
        let pairs: Vec<(usize, usize)> = (0..f).flat_map(|a| (a..f).map(move |b| (a, b))).collect();
        let built: Vec<PairTable> = pairs
            .par_iter()
            .map(|&(a, b)| PairTable::new(fams[a].u, fams[b].u, cfg))
            .collect::<Result<_>>()?;
        let mut tables: Vec<Option<PairTable>> = (0..f * f).map(|_| None).collect();
        for ((a, b), t) in pairs.into_iter().zip(built) {
            tables[a * f + b] = Some(t);
        }
        Ok(StructuredCoherence { dict, family_of, residue, tables, n_families: f })
    }

    /// Normalized correlation of column `k` of block `b1` with column `p` of block `b2`.
    #[inline]
    fn corr(&self, b1: usize, k: usize, b2: usize, p: usize) -> f64 {
        let (fa, fb) = (self.family_of[b1], self.family_of[b2]);
        let m = self.dict.m();
        let (t, d, i) = if fa <= fb {
            (&self.tables[fa * self.n_families + fb], p as i64 - k as i64, (self.residue[b2] + m - self.residue[b1]) % m)
        } else {
            (&self.tables[fb * self.n_families + fa], k as i64 - p as i64, (self.residue[b1] + m - self.residue[b2]) % m)
        };
        t.as_ref().expect("table for every family pair").get(d, i)
    }

    fn block_pair_max(&self, b1: usize, b2: usize) -> f64 {
        let n1 = self.dict.n1();
        let mut best = 0.0f64;
        for k in 0..n1 {
            for p in 0..n1 {
                if b1 == b2 && p == k {
                    continue;
                }
                best = best.max(self.corr(b1, k, b2, p));
            }
        }
        best
    }

    fn report(&self) -> CoherenceReport {
        let g = self.dict.g();
        let n1 = self.dict.n1();
        let per_block: Vec<f64> = (0..g).map(|b| self.block_pair_max(b, b)).collect();
        let cross = (0..g)
            .into_par_iter()
            .map(|b1| (b1 + 1..g).map(|b2| self.block_pair_max(b1, b2)).fold(0.0, f64::max))
            .collect::<Vec<_>>()
            .into_iter()
            .fold(0.0, f64::max);
        let intra = per_block.iter().cloned().fold(0.0, f64::max);
        let mu = intra.max(cross);
        let thr = mu * (1.0 - TIE_TOL);
        let width = g * n1;
        let mut pair = (0, 1);
        'outer: for i in 0..width {
            let (b1, k) = (i / n1, i % n1);
            for j in i + 1..width {
                if self.corr(b1, k, j / n1, j % n1) >= thr {
                    pair = (i, j);
                    break 'outer;
                }
            }
        }
        CoherenceReport {
            mu,
            argmax_pair: pair,
            method: CoherenceMethod::Structured,
            per_block_mu: if n1 >= 2 { Some(per_block) } else { None },
            cross_block_max: if g >= 2 { Some(cross) } else { None },
        }
    }
}

/// Coherence of an assembled dictionary by the requested method.
///
/// `ClosedForm` needs a single root family with shift indices `0..G`.
pub fn full_dictionary_coherence(dict: &Dictionary, method: CoherenceMethod) -> Result<CoherenceReport> {
    if dict.width() < 2 {
        return Err(Error::DimensionMismatch("coherence needs at least two columns".into()));
    }
    match method {
        CoherenceMethod::BruteForce => {
            let mut report = mutual_coherence_brute(dict.dense())?;
            let n1 = dict.n1();
            let g = dict.g();
            if n1 >= 2 {
                let per_block = (0..g)
                    .into_par_iter()
                    .map(|b| mutual_coherence_brute(&dict.block_matrix(b)).map(|r| r.mu))
                    .collect::<Result<Vec<_>>>()?;
                report.per_block_mu = Some(per_block);
            }
            if g >= 2 {
                let cross = (0..g)
                    .into_par_iter()
                    .map(|b1| {
                        let e1 = dict.block_matrix(b1);
                        let mut best = 0.0f64;
                        for b2 in b1 + 1..g {
                            best = best.max(block_coherence(&e1, &dict.block_matrix(b2))?);
                        }
                        Ok(best)
                    })
                    .collect::<Result<Vec<_>>>()?;
                report.cross_block_max = Some(cross.into_iter().fold(0.0, f64::max));
            }
            Ok(report)
        }
        CoherenceMethod::Structured => Ok(StructuredCoherence::new(dict)?.report()),
        CoherenceMethod::ClosedForm => {
            let fams = dict.families();
            if fams.len() != 1 || fams[0].shifts.iter().enumerate().any(|(i, &s)| i != s) {
                return Err(Error::InvalidConfig(
                    "closed-form coherence applies to a single root with consecutive shifts".into(),
                ));
            }
            let cfg = dict.config();
            let fam = &fams[0];
            let mu = coherence_closed_form(fam.u, fam.n_cs, dict.g(), cfg.n1, cfg.m, cfg.n)?;
            let step = (fam.n_cs * fam.u) as f64 * cfg.n as f64 / cfg.m as f64;
            let n1 = cfg.n1;
            let width = dict.width();
            let corr = |i: usize, j: usize| {
                let dl = (j / n1) as f64 - (i / n1) as f64;
                let dk = (j % n1) as f64 - (i % n1) as f64;
                sinc_ratio(step * dl + dk, cfg.m, cfg.n)
            };
            let thr = mu * (1.0 - TIE_TOL) - 1e-12;
            let pair = (0..width)
                .find_map(|i| (i + 1..width).find(|&j| corr(i, j) >= thr).map(|j| (i, j)))
                .unwrap_or((0, 1));
            Ok(CoherenceReport {
                mu,
                argmax_pair: pair,
                method: CoherenceMethod::ClosedForm,
                per_block_mu: None,
                cross_block_max: None,
            })
        }
    }
}

/// Normalized correlation of two explicit columns.
pub fn column_correlation(a: &[Complex64], b: &[Complex64]) -> f64 {
    dot_conj(a, b).norm() / (norm(a) * norm(b))
}
