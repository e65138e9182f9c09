//! Per-code sensing blocks and the stacked PRACH dictionary `A = [E_1 ... E_G]`.
//!
//! Block `l` maps the (delayed, truncated) channel of code `l` onto the `M`
//! PRACH observations:
//!
//! ```text
//! E_l = diag(Z^u) diag(p_l) Theta F(:, 1:N1)
//! ```
//!
//! where `Theta` selects DFT rows `j_1 .. j_M` and `p_l` carries the phase
//! ramp induced by the cyclic shift. The constant phase `phi_l` of the shift is
//! kept as metadata and not folded into the block.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::sync::Arc;

use crate::codebook::{CodeColumn, CodeMatrix, ZcRoot};
use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, LinearOperator};

/// `exp(-i 2 pi num / den)` with the numerator already reduced modulo `den`.
#[inline]
fn unit_phase(num: u128, den: u128) -> Complex64 {
    Complex64::from_polar(1.0, -2.0 * PI * (num % den) as f64 / den as f64)
}

/// Phase ramp `p_l` for the `ell`-th code (1-based) of root `u`:
/// element `m` is `exp(-i 2 pi j_m u (ell-1) n_cs / M)`.
pub fn phase_vector(u: usize, ell: usize, n_cs: usize, config: &SystemConfig) -> Vec<Complex64> {
    assert!(ell >= 1, "code index is 1-based");
    let m = config.m as u128;
    let step = (u as u128 * (ell as u128 - 1) * n_cs as u128) % m;
    config.prach_bins().map(|j| unit_phase(j as u128 * step, m)).collect()
}

/// Constant phase `phi` of a shifted code,
/// `pi u s n_cs (s n_cs + 1 - 2 j1) / M` with `s` the shift index, wrapped to `[0, 2 pi)`.
pub fn shift_phase(u: usize, shift_index: usize, n_cs: usize, j1: usize, m: usize) -> f64 {
    let shift = (shift_index * n_cs) as i128;
    // the product shift*(shift+1-2 j1) is taken modulo 2M before scaling by pi/M
    let two_m = 2 * m as i128;
    let num = (u as i128 * shift % two_m) * ((shift + 1 - 2 * j1 as i128).rem_euclid(two_m)) % two_m;
    PI * num.rem_euclid(two_m) as f64 / m as f64
}

/// One `M x N1` sensing block with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct DictionaryBlock {
    /// 0-based position of the code in the code matrix.
    pub code_index: usize,
    pub root: usize,
    pub shift_index: usize,
    pub n_cs: usize,
    pub phi: f64,
    pub entries: CMatrix,
}

/// The `M x N1` block of root `u` at shift index `shift_index` (0-based).
pub fn block_entries(u: usize, shift_index: usize, n_cs: usize, config: &SystemConfig) -> Result<CMatrix> {
    let root = ZcRoot::new(u, config.m)?;
    let (m, n, n1) = (config.m, config.n, config.n1);
    let p = phase_vector(u, shift_index + 1, n_cs, config);
    let mut entries = CMatrix::zeros(m, n1);
    for q in 0..m {
        let j = (config.j1 + q) as u128;
        let row_gain = root.element(q) * p[q];
        for k in 0..n1 {
            entries.set(q, k, row_gain * unit_phase(j * k as u128, n as u128));
        }
    }
    Ok(entries)
}

/// Build the block of one code column.
pub fn build_block(code_index: usize, code: &CodeColumn, config: &SystemConfig) -> Result<DictionaryBlock> {
    config.ensure_valid()?;
    Ok(DictionaryBlock {
        code_index,
        root: code.u,
        shift_index: code.shift_index,
        n_cs: code.n_cs,
        phi: shift_phase(code.u, code.shift_index, code.n_cs, config.j1, config.m),
        entries: block_entries(code.u, code.shift_index, code.n_cs, config)?,
    })
}

/// Provenance of one block inside a [`Dictionary`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockMeta {
    pub code_index: usize,
    pub root: usize,
    pub shift_index: usize,
    pub n_cs: usize,
    pub phi: f64,
}

/// Blocks of a dictionary that share one root and shift step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockFamily {
    pub u: usize,
    pub n_cs: usize,
    /// Block indices (0-based) in dictionary order.
    pub blocks: Vec<usize>,
    /// Shift index of each block, parallel to `blocks`.
    pub shifts: Vec<usize>,
}

/// The stacked dictionary with dense storage and a structured fast operator.
#[derive(Clone)]
pub struct Dictionary {
    config: SystemConfig,
    blocks: Vec<BlockMeta>,
    dense: CMatrix,
    fast: FastOperator,
}

impl std::fmt::Debug for Dictionary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Dictionary")
            .field("m", &self.m())
            .field("g", &self.g())
            .field("n1", &self.n1())
            .finish()
    }
}

/// Assemble `A = [E_1 ... E_G]` in code order.
pub fn assemble(code_matrix: &CodeMatrix, config: &SystemConfig) -> Result<Dictionary> {
    Dictionary::new(code_matrix, config)
}

impl Dictionary {
    pub fn new(code_matrix: &CodeMatrix, config: &SystemConfig) -> Result<Self> {
        config.ensure_valid()?;
        if code_matrix.m != config.m {
            return Err(Error::DimensionMismatch(format!(
                "code length {} differs from M={}",
                code_matrix.m, config.m
            )));
        }
        let (m, n1) = (config.m, config.n1);
        let mut data = Vec::with_capacity(m * n1 * code_matrix.g());
        let mut blocks = Vec::with_capacity(code_matrix.g());
        for (i, col) in code_matrix.columns.iter().enumerate() {
            let b = build_block(i, col, config)?;
            data.extend_from_slice(b.entries.as_slice());
            blocks.push(BlockMeta {
                code_index: i,
                root: b.root,
                shift_index: b.shift_index,
                n_cs: b.n_cs,
                phi: b.phi,
            });
        }
        let dense = CMatrix::from_col_major(m, n1 * blocks.len(), data);
        let fast = FastOperator::new(config, &blocks);
        Ok(Dictionary { config: config.clone(), blocks, dense, fast })
    }

    pub fn config(&self) -> &SystemConfig {
        &self.config
    }

    pub fn m(&self) -> usize {
        self.config.m
    }

    pub fn n1(&self) -> usize {
        self.config.n1
    }

    pub fn g(&self) -> usize {
        self.blocks.len()
    }

    /// Flat column count `G * N1`.
    pub fn width(&self) -> usize {
        self.g() * self.n1()
    }

    pub fn blocks(&self) -> &[BlockMeta] {
        &self.blocks
    }

    /// The flat `M x (G N1)` matrix.
    pub fn dense(&self) -> &CMatrix {
        &self.dense
    }

    /// Block (0-based) containing flat column `t`.
    pub fn block_of_column(&self, t: usize) -> usize {
        t / self.n1()
    }

    /// Owned copy of block `i` (0-based).
    pub fn block(&self, i: usize) -> DictionaryBlock {
        let meta = self.blocks[i];
        DictionaryBlock {
            code_index: meta.code_index,
            root: meta.root,
            shift_index: meta.shift_index,
            n_cs: meta.n_cs,
            phi: meta.phi,
            entries: self.block_matrix(i),
        }
    }

    pub fn block_matrix(&self, i: usize) -> CMatrix {
        self.dense.columns(i * self.n1(), (i + 1) * self.n1())
    }

    /// Column `k` (0-based) of block `i`.
    pub fn block_column(&self, i: usize, k: usize) -> &[Complex64] {
        self.dense.col(i * self.n1() + k)
    }

    /// Blocks grouped by `(root, n_cs)` in order of first appearance.
    pub fn families(&self) -> Vec<BlockFamily> {
        let mut out: Vec<BlockFamily> = Vec::new();
        for (b, meta) in self.blocks.iter().enumerate() {
            match out.iter_mut().find(|f| f.u == meta.root && f.n_cs == meta.n_cs) {
                Some(f) => {
                    f.blocks.push(b);
                    f.shifts.push(meta.shift_index);
                }
                None => out.push(BlockFamily {
                    u: meta.root,
                    n_cs: meta.n_cs,
                    blocks: vec![b],
                    shifts: vec![meta.shift_index],
                }),
            }
        }
        out
    }

    /// Dense matrix-vector product, for cross-checking the fast operator.
    pub fn apply_dense(&self, x: &[Complex64], out: &mut [Complex64]) {
        self.dense.apply(x, out)
    }

    pub fn apply_adjoint_dense(&self, y: &[Complex64], out: &mut [Complex64]) {
        self.dense.apply_adjoint(y, out)
    }

    /// Write the flat matrix as little-endian binary: eight `i64` header words
    /// `(M, G, N1, N, j1, n_cs, 0, 0)` followed by row-major interleaved
    /// `(re, im)` `f64` pairs.
    pub fn write_binary(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        let n_cs = self.blocks.first().map_or(0, |b| b.n_cs);
        let header = [self.m(), self.g(), self.n1(), self.config.n, self.config.j1, n_cs, 0, 0];
        for h in header {
            w.write_all(&(h as i64).to_le_bytes())?;
        }
        for r in 0..self.m() {
            for c in 0..self.width() {
                let v = self.dense.get(r, c);
                w.write_all(&v.re.to_le_bytes())?;
                w.write_all(&v.im.to_le_bytes())?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Read a matrix written by [`Dictionary::write_binary`]; returns the header and the matrix.
pub fn read_binary(path: impl AsRef<Path>) -> Result<([i64; 8], CMatrix)> {
    let mut r = BufReader::new(File::open(path)?);
    let mut header = [0i64; 8];
    let mut word = [0u8; 8];
    for h in header.iter_mut() {
        r.read_exact(&mut word)?;
        *h = i64::from_le_bytes(word);
    }
    let (m, g, n1) = (header[0] as usize, header[1] as usize, header[2] as usize);
    let cols = g * n1;
    let mut mat = CMatrix::zeros(m, cols);
    for row in 0..m {
        for col in 0..cols {
            r.read_exact(&mut word)?;
            let re = f64::from_le_bytes(word);
            r.read_exact(&mut word)?;
            let im = f64::from_le_bytes(word);
            mat.set(row, col, Complex64::new(re, im));
        }
    }
    Ok((header, mat))
}

impl LinearOperator for Dictionary {
    fn rows(&self) -> usize {
        self.m()
    }

    fn cols(&self) -> usize {
        self.width()
    }

    fn apply(&self, x: &[Complex64], out: &mut [Complex64]) {
        self.fast.apply(x, out)
    }

    fn apply_adjoint(&self, y: &[Complex64], out: &mut [Complex64]) {
        self.fast.apply_adjoint(y, out)
    }
}

/// Codes that share a root and shift step.
#[derive(Clone)]
struct Family {
    z: Vec<Complex64>,
    /// `(block index, (u * s * n_cs) mod M)` for each member block.
    members: Vec<(usize, usize)>,
}

/// Matrix-free evaluation of `A x` and `A^* y`.
///
/// Within a family, `A[q, (s,k)] = Z(q) w_M^{j_q r_s} w_N^{j_q k}` with
/// `r_s = u s n_cs mod M`. Summing over `s` first is an `M`-point DFT of a
/// sparse vector, so each product costs `N1` FFTs of length `M` plus an
/// `M x N1` contraction instead of the full `M x G N1` dense product.
#[derive(Clone)]
struct FastOperator {
    m: usize,
    n1: usize,
    width: usize,
    /// `w_N^{j_q k}`, row-major over `q`.
    twiddle: Vec<Complex64>,
    /// `j_q mod M`
    bin_mod_m: Vec<usize>,
    /// `exp(+i 2 pi j1 r / M)` for `r = 0..M`
    j1_phase: Vec<Complex64>,
    families: Vec<Family>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl FastOperator {
    fn new(config: &SystemConfig, blocks: &[BlockMeta]) -> Self {
        let (m, n, n1) = (config.m, config.n, config.n1);
        let mut twiddle = Vec::with_capacity(m * n1);
        for q in 0..m {
            let j = (config.j1 + q) as u128;
            for k in 0..n1 {
                twiddle.push(unit_phase(j * k as u128, n as u128));
            }
        }
        let bin_mod_m = (0..m).map(|q| (config.j1 + q) % m).collect();
        let j1_phase = (0..m)
            .map(|r| unit_phase(config.j1 as u128 * r as u128, m as u128).conj())
            .collect();

        let mut keys: Vec<(usize, usize)> = Vec::new();
        let mut families: Vec<Family> = Vec::new();
        for (b, meta) in blocks.iter().enumerate() {
            let key = (meta.root, meta.n_cs);
            let idx = match keys.iter().position(|&k| k == key) {
                Some(i) => i,
                None => {
                    keys.push(key);
                    let root = ZcRoot { u: meta.root, m };
                    families.push(Family { z: root.sequence(), members: Vec::new() });
                    keys.len() - 1
                }
            };
            let r = (meta.root as u128 * meta.shift_index as u128 * meta.n_cs as u128 % m as u128) as usize;
            families[idx].members.push((b, r));
        }
        let mut planner = FftPlanner::new();
        FastOperator {
            m,
            n1,
            width: blocks.len() * n1,
            twiddle,
            bin_mod_m,
            j1_phase,
            families,
            forward: planner.plan_fft_forward(m),
            inverse: planner.plan_fft_inverse(m),
        }
    }

    fn apply(&self, x: &[Complex64], out: &mut [Complex64]) {
        assert_eq!(x.len(), self.width);
        assert_eq!(out.len(), self.m);
        let (m, n1) = (self.m, self.n1);
        let zero = Complex64::new(0.0, 0.0);
        out.iter_mut().for_each(|v| *v = zero);
        let mut buf = vec![zero; m * n1];
        let mut scratch = vec![zero; self.forward.get_inplace_scratch_len()];
        for fam in &self.families {
            buf.iter_mut().for_each(|v| *v = zero);
            let mut any = false;
            for &(b, r) in &fam.members {
                let xb = &x[b * n1..(b + 1) * n1];
                for (k, &v) in xb.iter().enumerate() {
                    if v != zero {
                        buf[k * m + r] += v;
                        any = true;
                    }
                }
            }
            if !any {
                continue;
            }
            self.forward.process_with_scratch(&mut buf, &mut scratch);
            for q in 0..m {
                let t = self.bin_mod_m[q];
                let tw = &self.twiddle[q * n1..(q + 1) * n1];
                let mut acc = zero;
                for k in 0..n1 {
                    acc += tw[k] * buf[k * m + t];
                }
                out[q] += fam.z[q] * acc;
            }
        }
    }

    fn apply_adjoint(&self, y: &[Complex64], out: &mut [Complex64]) {
        assert_eq!(y.len(), self.m);
        assert_eq!(out.len(), self.width);
        let (m, n1) = (self.m, self.n1);
        let zero = Complex64::new(0.0, 0.0);
        let mut buf = vec![zero; m * n1];
        let mut scratch = vec![zero; self.inverse.get_inplace_scratch_len()];
        for fam in &self.families {
            for q in 0..m {
                let g = fam.z[q].conj() * y[q];
                let tw = &self.twiddle[q * n1..(q + 1) * n1];
                for k in 0..n1 {
                    buf[k * m + q] = tw[k].conj() * g;
                }
            }
            self.inverse.process_with_scratch(&mut buf, &mut scratch);
            for &(b, r) in &fam.members {
                let ph = self.j1_phase[r];
                for k in 0..n1 {
                    out[b * n1 + k] = ph * buf[k * m + r];
                }
            }
        }
    }
}
