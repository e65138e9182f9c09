//! Conventional and coherence-based code-matrix design on the LTE numerology.
//!
//! Run with `--json` to dump every plan as JSON.

use zc_prach::config::SystemConfig;
use zc_prach::design::{design_ccg_multi, design_ccg_single, design_cra, design_cra_multi, min_ncs_for_root, Design};

fn show(name: &str, d: &Design, json: bool) {
    if json {
        println!("{}", serde_json::to_string_pretty(&d.plan).unwrap());
        return;
    }
    let roots: Vec<String> = d.plan.roots_used.iter().map(|r| format!("u={} x{} (n_cs={})", r.u, r.codes_generated, r.n_cs)).collect();
    println!("{name:<32} G={:<3} mu={:.5}  {}", d.plan.g_delivered, d.plan.predicted_mu, roots.join(", "));
}

fn main() -> zc_prach::Result<()> {
    let json = std::env::args().any(|a| a == "--json");
    let cfg = SystemConfig::lte();
    let n_hat = cfg.ncs_lower_bound()?;
    println!("cell geometry bound n_hat = {n_hat}; coherence bound for u=1 gives n_cs >= {}", min_ncs_for_root(1, n_hat, &cfg)?);

    show("conventional u=1, n_cs=11", &design_cra(1, 11, 50, &cfg)?, json);
    show("conventional u=2, n_cs=11", &design_cra(2, 11, 50, &cfg)?, json);
    show("conventional multi-root n_cs=17", &design_cra_multi(1, 17, 64, &cfg)?, json);
    show("coherence-based single root", &design_ccg_single(1, n_hat, &cfg)?, json);
    show("coherence-based, 64 codes", &design_ccg_multi(64, n_hat, &cfg)?, json);
    Ok(())
}
