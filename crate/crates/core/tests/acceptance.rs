//! End-to-end checks of the headline numbers: coherence of the standard code
//! designs, the closed forms against brute force, the simulator against the
//! dictionary model, and Monte-Carlo detection rates.
//!
//! Each test prints one `PASS` / `FAIL` line (written straight to stdout so
//! it shows without `--nocapture`) and then asserts.

use std::collections::BTreeMap;
use std::io::Write;
use std::sync::OnceLock;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use zc_prach::codebook::build_code_matrix;
use zc_prach::coherence::{
    coherence_closed_form, cross_root_magnitude, cross_root_magnitude_mixed, full_dictionary_coherence,
    gauss_sum_offset, sinc_ratio, zeta, CoherenceMethod,
};
use zc_prach::config::SystemConfig;
use zc_prach::design::{design_ccg_single, design_cra_multi, Design};
use zc_prach::dictionary::{block_entries, Dictionary};
use zc_prach::experiment::{run_cell, Cell, DesignSpec, MethodName, MetricRow, SolverOptions};
use zc_prach::linalg::{dot_conj, norm};
use zc_prach::simulator::{extract_prach_observation, sample_scenario, synthesize_frequency_domain, synthesize_time_domain};

const TRIALS: usize = 200;
const SEED: u64 = 20_190_601;

fn report(id: u32, name: &str, pass: bool, detail: &str) {
    let line = format!("criterion {id} [{}] {name}: {detail}\n", if pass { "PASS" } else { "FAIL" });
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(line.as_bytes());
    let _ = out.flush();
}

const TABLE: [(usize, usize, f64); 8] = [
    (1, 11, 0.994),
    (1, 13, 0.998),
    (1, 15, 0.969),
    (1, 17, 0.969),
    (1, 19, 0.969),
    (2, 11, 1.000),
    (2, 13, 0.998),
    (2, 17, 0.993),
];

fn table_design(u: usize, n_cs: usize, cfg: &SystemConfig) -> Design {
    // shift steps above M / 50 cannot place 50 codes on one root; the
    // remaining codes continue on the next roots
    design_cra_multi(u, n_cs, 50, cfg).unwrap()
}

/// Brute-force coherence of every table entry, computed once per test binary.
fn brute_table() -> &'static BTreeMap<(usize, usize), f64> {
    static CELL: OnceLock<BTreeMap<(usize, usize), f64>> = OnceLock::new();
    CELL.get_or_init(|| {
        let cfg = SystemConfig::lte();
        TABLE
            .iter()
            .map(|&(u, n_cs, _)| {
                let dict = Dictionary::new(&table_design(u, n_cs, &cfg).code_matrix, &cfg).unwrap();
                let mu = zc_prach::coherence::mutual_coherence_brute(dict.dense()).unwrap().mu;
                ((u, n_cs), mu)
            })
            .collect()
    })
}

#[test]
fn criterion_1_coherence_table() {
    let table = brute_table();
    let mut worst: f64 = 0.0;
    let mut cells = Vec::new();
    for &(u, n_cs, target) in &TABLE {
        let mu = table[&(u, n_cs)];
        worst = worst.max((mu - target).abs());
        cells.push(format!("u{u}/{n_cs}={mu:.4}"));
    }
    let pass = worst <= 1e-3;
    report(1, "coherence table", pass, &format!("{} (max deviation {worst:.5})", cells.join(" ")));
    assert!(pass);
}

#[test]
fn criterion_2_worked_example() {
    let cfg = SystemConfig::lte();
    let z = zeta(1, 13, 50, cfg.n1, cfg.m, cfg.n);
    let mu = brute_table()[&(1, 13)];
    let pass = (z - 0.199).abs() <= 1e-3 && (mu - 0.9988).abs() <= 5e-4;
    report(2, "worked example u=1 n_cs=13", pass, &format!("zeta = {z:.4}, mu = {mu:.5}"));
    assert!(pass);
}

#[test]
fn criterion_3_closed_forms_match_brute_force() {
    let base = SystemConfig::small();
    let mut wide = base.clone();
    wide.n = 128;
    wide.m = 31;
    // (config, root, shift step, codes)
    let configs = [
        (base.clone(), 1, 1, 3),
        (base.clone(), 2, 2, 3),
        (base.clone(), 1, 3, 4),
        (base.clone(), 5, 1, 3),
        (base.clone(), 3, 4, 3),
        (wide.clone(), 1, 5, 6),
        (wide.clone(), 4, 3, 5),
    ];
    let mut worst_cf: f64 = 0.0;
    for (cfg, u, n_cs, g) in &configs {
        let codes = build_code_matrix(&[(*u, *g)], *n_cs, cfg.m).unwrap();
        let dict = Dictionary::new(&codes, cfg).unwrap();
        let brute = full_dictionary_coherence(&dict, CoherenceMethod::BruteForce).unwrap().mu;
        let cf = coherence_closed_form(*u, *n_cs, *g, cfg.n1, cfg.m, cfg.n).unwrap();
        worst_cf = worst_cf.max((brute - cf).abs());
    }

    let mut worst_cross: f64 = 0.0;
    let mut count = 0;
    for (cfg, n_cs, (u1, u2)) in [(&base, 2, (1, 3)), (&base, 3, (2, 7)), (&wide, 4, (1, 4)), (&wide, 3, (5, 2))] {
        let mut cfg = cfg.clone();
        cfg.j1 = 5;
        for ell in 1..=3 {
            for mi in 1..=3 {
                let e1 = block_entries(u1, ell - 1, n_cs, &cfg).unwrap();
                let e2 = block_entries(u2, mi - 1, n_cs, &cfg).unwrap();
                for k in 1..=cfg.n1 {
                    for p in 1..=cfg.n1 {
                        let direct = dot_conj(e1.col(k - 1), e2.col(p - 1)).norm() / cfg.m as f64;
                        let formula = cross_root_magnitude(u1, u2, ell, mi, p, k, n_cs, &cfg).unwrap();
                        worst_cross = worst_cross.max((direct - formula).abs());
                        count += 1;
                    }
                }
            }
        }
    }
    let pass = worst_cf <= 1e-9 && worst_cross <= 1e-10;
    report(
        3,
        "closed form and cross-root formula",
        pass,
        &format!(
            "{} configs, closed-form max error {worst_cf:.2e}; {count} cross-root pairs, max error {worst_cross:.2e}",
            configs.len()
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_4_ccg_single_design() {
    let cfg = SystemConfig::lte();
    let d = design_ccg_single(1, 11, &cfg).unwrap();
    let dict = Dictionary::new(&d.code_matrix, &cfg).unwrap();
    let brute = zc_prach::coherence::mutual_coherence_brute(dict.dense()).unwrap().mu;
    let pass = d.plan.n_cs_used == 15
        && d.plan.g_delivered == 55
        && (d.plan.predicted_mu - 0.9696).abs() <= 5e-4
        && (brute - d.plan.predicted_mu).abs() <= 1e-9;
    report(
        4,
        "coherence-based single-root design",
        pass,
        &format!(
            "n_cs = {}, G = {}, predicted mu = {:.5}, brute force {brute:.5}",
            d.plan.n_cs_used, d.plan.g_delivered, d.plan.predicted_mu
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_5_path_equivalence() {
    let cfg = SystemConfig::lte();
    let d = design_ccg_single(1, 11, &cfg).unwrap();
    let dict = Dictionary::new(&d.code_matrix, &cfg).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let k = rng.gen_range(1..=10);
        let scenario = sample_scenario(k, &d.code_matrix, &cfg, 0.0, &mut rng).unwrap();
        let obs = synthesize_frequency_domain(&scenario, &dict, &mut rng).unwrap();
        let time = synthesize_time_domain::<ChaCha8Rng>(&scenario, &d.code_matrix, &cfg, None).unwrap();
        let v = extract_prach_observation(&time, &cfg).unwrap();
        let diff: Vec<Complex64> = v.iter().zip(&obs.y).map(|(a, b)| a - b).collect();
        worst = worst.max(norm(&diff) / norm(&obs.y));
    }
    let pass = worst <= 1e-9;
    report(5, "time-domain chain equals A x", pass, &format!("100 scenarios, max relative error {worst:.2e}"));
    assert!(pass);
}

fn monte_carlo(spec: DesignSpec, k: usize) -> MetricRow {
    let cfg = SystemConfig::lte();
    let design = spec.build(&cfg).unwrap();
    let dict = Dictionary::new(&design.code_matrix, &cfg).unwrap();
    let solver = SolverOptions::default();
    let cell = Cell { dictionary: &dict, design: &design, k, snr_db: 10.0, seed: SEED, solver: &solver };
    let start = std::time::Instant::now();
    let records = run_cell(&cell, TRIALS);
    MetricRow::from_records(k, 10.0, &spec.label_for(&design), &records, start.elapsed().as_secs_f64())
}

fn ccg() -> DesignSpec {
    DesignSpec { method: MethodName::CcgSingle, u: 1, n_cs: Some(15), g: Some(50), label: None }
}

fn cra(u: usize) -> DesignSpec {
    DesignSpec { method: MethodName::Cra, u, n_cs: Some(11), g: Some(50), label: None }
}

#[test]
fn criterion_6_detection_probability() {
    let cases = [(ccg(), 0.99, 0.05), (cra(1), 0.71, 0.10), (cra(2), 0.27, 0.10)];
    let mut pass = true;
    let mut parts = Vec::new();
    for (spec, target, tol) in cases {
        let row = monte_carlo(spec, 3);
        let ok = (row.p_s - target).abs() <= tol && row.failed_trials == 0;
        pass &= ok;
        parts.push(format!(
            "{} P_s = {:.3} (target {target} +/- {tol}{})",
            row.design,
            row.p_s,
            if ok { "" } else { ", off" }
        ));
    }
    report(6, "Lasso P_s at 10 dB, K = 3", pass, &parts.join("; "));
    assert!(pass);
}

#[test]
fn criterion_7_false_detection() {
    let cases = [(cra(3), 6, 0.08, 0.05), (ccg(), 6, 0.03, 0.05), (cra(3), 9, 0.23, 0.07), (ccg(), 9, 0.10, 0.07)];
    let mut pass = true;
    let mut parts = Vec::new();
    for (spec, k, target, tol) in cases {
        let row = monte_carlo(spec, k);
        let ok = (row.p_md - target).abs() <= tol && row.failed_trials == 0;
        pass &= ok;
        parts.push(format!(
            "{} K={k} P_md = {:.3} (target {target} +/- {tol}{})",
            row.design,
            row.p_md,
            if ok { "" } else { ", off" }
        ));
    }
    report(7, "Lasso P_md at 10 dB", pass, &parts.join("; "));
    assert!(pass);
}

#[test]
fn criterion_8_flat_cross_correlation() {
    let m = 839;
    let n = 6144;
    let target = 1.0 / (m as f64).sqrt();
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for u1 in [1, 2, 5, 11] {
        for du in [2, 4, 6, 10] {
            let u2 = u1 + du;
            for n_cs in [11, 13, 15] {
                for s1 in 0..6 {
                    for s2 in 0..6 {
                        let theta = gauss_sum_offset(u1, s1, n_cs, u2, s2, n_cs, 0, m, n);
                        if (theta - theta.round()).abs() > 1e-12 {
                            continue;
                        }
                        let v = cross_root_magnitude_mixed(u1, s1, n_cs, u2, s2, n_cs, 0, m, n).unwrap();
                        worst = worst.max((v - target).abs());
                        count += 1;
                    }
                }
            }
        }
    }
    let pass = count >= 100 && worst <= 1e-9;
    report(8, "flat cross-root magnitude", pass, &format!("{count} tuples with integer offset, max |value - 1/sqrt(M)| = {worst:.2e}"));
    assert!(pass);
}

#[test]
fn criterion_9_sinc_properties() {
    let pairs = [(839usize, 6144usize), (13, 64), (31, 128), (139, 1024)];
    let mut pass = true;
    let mut parts = Vec::new();
    for (m, n) in pairs {
        assert!(std::f64::consts::PI * 2f64.sqrt() <= m as f64 && 2 * m <= n);
        let nf = n as f64;
        let mut sym: f64 = 0.0;
        let mut per: f64 = 0.0;
        for i in 1..400 {
            let r = i as f64 * nf / 400.0 + 0.37;
            sym = sym.max((sinc_ratio(r, m, n) - sinc_ratio(nf - r, m, n)).abs());
            per = per.max((sinc_ratio(r, m, n) - sinc_ratio(r + 3.0 * nf, m, n)).abs());
            per = per.max((sinc_ratio(r, m, n) - sinc_ratio(r - 2.0 * nf, m, n)).abs());
        }
        let grid: Vec<f64> = (0..=1000).map(|i| sinc_ratio(i as f64 / 1000.0, m, n)).collect();
        let monotone = grid.windows(2).all(|w| w[1] < w[0]);
        let argmax = (1..n - 1)
            .map(|r| (r, sinc_ratio(r as f64, m, n)))
            .fold((0, f64::NEG_INFINITY), |best, (r, v)| if v > best.1 { (r, v) } else { best });
        let ok = sym <= 1e-9 && per <= 1e-9 && monotone && argmax.0 == 1;
        pass &= ok;
        parts.push(format!("M={m} N={n} {}", if ok { "ok" } else { "broken" }));
    }
    report(9, "sinc-ratio properties", pass, &parts.join(", "));
    assert!(pass);
}
