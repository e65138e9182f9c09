//! Block orthogonal matching pursuit on the same problem as the Lasso example.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use zc_prach::config::SystemConfig;
use zc_prach::design::design_ccg_single;
use zc_prach::dictionary::Dictionary;
use zc_prach::recovery::{omp_baseline, OmpOptions};
use zc_prach::simulator::{sample_scenario, snr_to_noise_variance, synthesize_frequency_domain};

fn main() -> zc_prach::Result<()> {
    let cfg = SystemConfig::lte();
    let design = design_ccg_single(1, 11, &cfg)?.truncate(50, &cfg)?;
    let dict = Dictionary::new(&design.code_matrix, &cfg)?;
    let sigma = snr_to_noise_variance(10.0, 1.0)?;

    for seed in 0..5 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scenario = sample_scenario(3, &design.code_matrix, &cfg, sigma, &mut rng)?;
        let obs = synthesize_frequency_domain(&scenario, &dict, &mut rng)?;
        let res = omp_baseline(&dict, &obs.y, &OmpOptions::for_noise(dict.g(), sigma, cfg.n1))?;
        let truth: Vec<String> = obs.true_powers.iter().map(|(_, p)| format!("{p:.3}")).collect();
        let powers: Vec<String> = res.detections.iter().map(|d| format!("{:.3}", d.power)).collect();
        println!(
            "seed {seed}: active {:?} [{}] detected {:?} [{}]{}",
            scenario.active_set(),
            truth.join(", "),
            res.detected_set(),
            powers.join(", "),
            if res.rank_deficient { " (rank deficient)" } else { "" }
        );
    }
    Ok(())
}
