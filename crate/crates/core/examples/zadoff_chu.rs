//! Zadoff-Chu roots and cyclically shifted random-access codes.
//!
//! Prints the constant-amplitude and ideal periodic autocorrelation
//! properties of a root, and the cross-correlation between two roots.

use num_complex::Complex64;
use zc_prach::codebook::{build_code_matrix, cyclic_shift_code, ZcRoot};

fn periodic_corr(a: &[Complex64], b: &[Complex64], lag: usize) -> f64 {
    let m = a.len();
    (0..m).map(|k| a[k] * b[(k + lag) % m].conj()).sum::<Complex64>().norm()
}

fn main() -> zc_prach::Result<()> {
    let m = 839;
    let root = ZcRoot::new(1, m)?;
    let z = root.sequence();
    let amp_spread = z.iter().map(|v| (v.norm() - 1.0).abs()).fold(0.0, f64::max);
    println!("root u=1, M={m}: max | |z_k| - 1 | = {amp_spread:.2e}");

    let off_peak = (1..m).map(|lag| periodic_corr(&z, &z, lag)).fold(0.0, f64::max);
    println!("autocorrelation: peak {:.1}, largest off-peak {off_peak:.2e}", periodic_corr(&z, &z, 0));

    let z2 = ZcRoot::new(2, m)?.sequence();
    let cross = (0..m).map(|lag| periodic_corr(&z, &z2, lag)).fold(0.0, f64::max);
    println!("cross-correlation u=1 vs u=2: max {cross:.4} (sqrt(M) = {:.4})", (m as f64).sqrt());

    let c3 = cyclic_shift_code(1, 3, 13, m)?;
    println!("code 3 with n_cs=13 starts at root element 39: {}", (c3[0] - root.element(39)).norm() < 1e-12);

    let codes = build_code_matrix(&[(1, 40), (2, 10)], 13, m)?;
    codes.verify(1e-9)?;
    println!("code matrix: {} codes in families {:?}", codes.g(), codes.families());
    Ok(())
}
