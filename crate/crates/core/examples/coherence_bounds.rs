//! The sinc-ratio envelope, the lattice distance zeta and the closed-form
//! coherence, checked against brute force on a small configuration, plus the
//! flat cross-correlation of roots with an even difference.

use zc_prach::coherence::{
    coherence_closed_form, cross_root_magnitude, full_dictionary_coherence, sinc_ratio, zeta, CoherenceMethod,
};
use zc_prach::codebook::build_code_matrix;
use zc_prach::config::SystemConfig;
use zc_prach::dictionary::Dictionary;

fn main() -> zc_prach::Result<()> {
    let lte = SystemConfig::lte();
    println!("S(r) for M={}, N={}:", lte.m, lte.n);
    for r in [0.25, 0.5, 1.0, 2.0, 6.0, 7.3, 20.0] {
        println!("  S({r:>5}) = {:.5}", sinc_ratio(r, lte.m, lte.n));
    }
    println!("zeta(u=1, n_cs=13, G=50) = {:.4}", zeta(1, 13, 50, lte.n1, lte.m, lte.n));
    println!("closed form mu(u=1, n_cs=13, G=50) = {:.5}", coherence_closed_form(1, 13, 50, lte.n1, lte.m, lte.n)?);

    let mut cfg = SystemConfig::small();
    cfg.m = 13;
    let codes = build_code_matrix(&[(1, 3)], 4, cfg.m)?;
    let dict = Dictionary::new(&codes, &cfg)?;
    let brute = full_dictionary_coherence(&dict, CoherenceMethod::BruteForce)?;
    let closed = full_dictionary_coherence(&dict, CoherenceMethod::ClosedForm)?;
    println!(
        "M={} N={} N1={} G=3: brute force {:.12}, closed form {:.12}, pair {:?}",
        cfg.m, cfg.n, cfg.n1, brute.mu, closed.mu, brute.argmax_pair
    );

    let flat = cross_root_magnitude(1, 3, 1, 2, 5, 5, 13, &lte)?;
    println!("cross-root magnitude u=1 vs u=3: {flat:.9} (1/sqrt(M) = {:.9})", 1.0 / (lte.m as f64).sqrt());
    Ok(())
}
