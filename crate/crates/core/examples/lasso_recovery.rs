//! Joint code detection, delay and power estimation with the Lasso.
//!
//! Usage: `lasso_recovery [K] [SNR dB] [seed]`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use zc_prach::config::SystemConfig;
use zc_prach::design::design_ccg_single;
use zc_prach::dictionary::Dictionary;
use zc_prach::recovery::{default_lambda, recover_lasso, LassoOptions, Thresholds};
use zc_prach::simulator::{sample_scenario, snr_to_noise_variance, synthesize_frequency_domain};

fn main() -> zc_prach::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let k: usize = args.first().and_then(|s| s.parse().ok()).unwrap_or(3);
    let snr_db: f64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(10.0);
    let seed: u64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(1);

    let cfg = SystemConfig::lte();
    let design = design_ccg_single(1, 11, &cfg)?.truncate(50, &cfg)?;
    let dict = Dictionary::new(&design.code_matrix, &cfg)?;
    let sigma = snr_to_noise_variance(snr_db, 1.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scenario = sample_scenario(k, &design.code_matrix, &cfg, sigma, &mut rng)?;
    let obs = synthesize_frequency_domain(&scenario, &dict, &mut rng)?;

    let lambda = default_lambda(sigma, dict.g(), cfg.n1, 4.0);
    let res = recover_lasso(&dict, &obs.y, lambda, &LassoOptions::default(), &Thresholds::for_lasso(lambda, cfg.m))?;
    println!("lambda = {lambda:.3}, {} iterations, converged: {}", res.solver_iterations, res.converged);

    println!("active:");
    for (u, (_, p)) in scenario.users.iter().zip(&obs.true_powers) {
        println!("  code {:>2}  delay {:>2}  power {:.4}", u.code, u.delay, p);
    }
    println!("detected:");
    for d in &res.detections {
        println!("  code {:>2}  delay {:>2}  power {:.4}", d.code, d.delay, d.power);
    }
    println!("exact set recovered: {}", res.detected_set() == scenario.active_set());
    Ok(())
}
