//! Mutual coherence of conventional and coherence-based code designs on the
//! LTE-like numerology, for a range of shift steps and roots.

use zc_prach::coherence::{full_dictionary_coherence, zeta, CoherenceMethod};
use zc_prach::config::SystemConfig;
use zc_prach::design::{design_ccg_single, design_cra_multi};
use zc_prach::dictionary::assemble;

fn main() -> zc_prach::Result<()> {
    let cfg = SystemConfig::lte();
    let g = 50;
    println!("{:>3} {:>5} {:>10} {:>10}  roots", "u", "n_cs", "zeta", "mu");
    for (u, n_cs) in [(1, 11), (1, 13), (1, 15), (1, 17), (1, 19), (2, 11), (2, 13), (2, 17)] {
        let design = design_cra_multi(u, n_cs, g, &cfg)?;
        let dict = assemble(&design.code_matrix, &cfg)?;
        let report = full_dictionary_coherence(&dict, CoherenceMethod::Structured)?;
        let roots: Vec<String> = design
            .plan
            .roots_used
            .iter()
            .map(|r| format!("{}x{}", r.u, r.codes_generated))
            .collect();
        println!(
            "{u:>3} {n_cs:>5} {:>10.4} {:>10.5}  {}",
            if design.plan.roots_used.len() == 1 { zeta(u, n_cs, g, cfg.n1, cfg.m, cfg.n) } else { f64::NAN },
            report.mu,
            roots.join(" ")
        );
    }

    let ccg = design_ccg_single(1, cfg.ncs_lower_bound()?, &cfg)?;
    let dict = assemble(&ccg.code_matrix, &cfg)?;
    let report = full_dictionary_coherence(&dict, CoherenceMethod::Structured)?;
    println!(
        "coherence-based single root: n_cs = {}, G = {}, mu = {:.5}",
        ccg.plan.n_cs_used, ccg.plan.g_delivered, report.mu
    );
    Ok(())
}
