//! ITU tapped-delay-line models quantized to the PRACH sample interval.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use zc_prach::channel::ChannelKind;
use zc_prach::config::SystemConfig;

fn main() -> zc_prach::Result<()> {
    let cfg = SystemConfig::lte();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for kind in ChannelKind::ALL {
        let model = kind.model();
        let profile = model.quantized_profile(cfg.sample_interval);
        let support: Vec<usize> = profile.iter().enumerate().filter(|(_, &p)| p > 0.0).map(|(i, _)| i).collect();
        let draws = 2000;
        let mut energy = 0.0;
        for _ in 0..draws {
            let h = model.sample(cfg.sample_interval, cfg.p_max, &mut rng)?;
            energy += h.taps.iter().map(|t| t.norm_sqr()).sum::<f64>();
        }
        println!(
            "{kind:?}: taps at samples {support:?}, speeds {:?} km/h, mean energy over {draws} draws {:.3}",
            model.speed_range,
            energy / draws as f64
        );
    }
    Ok(())
}
