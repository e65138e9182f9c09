//! Multi-user PRACH observations, synthesized either through the full OFDM
//! time-domain chain or directly as `y = A x + e`.
//!
//! Both paths use a unitary DFT convention: the transmitter scales its
//! inverse DFT by `1/sqrt(N)` and the receiver scales its DFT by `1/sqrt(N)`,
//! so a noiseless time-domain observation equals `A x` exactly and white
//! noise of variance `sigma_e^2` per sample has variance `sigma_e^2` per
//! PRACH bin.

use num_complex::Complex64;
use rand::seq::index::sample as sample_indices;
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::channel::ChannelKind;
use crate::codebook::{complex_pairs, CodeMatrix};
use crate::config::SystemConfig;
use crate::dictionary::Dictionary;
use crate::error::{Error, Result};
use crate::linalg::LinearOperator;

/// One active terminal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct User {
    /// 0-based code index into the code matrix.
    pub code: usize,
    /// Round-trip delay in samples, `0..=D`.
    pub delay: usize,
    pub channel_model: ChannelKind,
    /// Terminal speed in m/s; metadata only.
    pub speed: f64,
    #[serde(with = "complex_pairs")]
    pub taps: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    /// Active users sorted by code index; codes are distinct.
    pub users: Vec<User>,
    pub noise_variance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl Scenario {
    pub fn k(&self) -> usize {
        self.users.len()
    }

    /// Active code indices in ascending order.
    pub fn active_set(&self) -> Vec<usize> {
        self.users.iter().map(|u| u.code).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Check distinct codes, delay and channel-order limits against a configuration.
    pub fn validate(&self, g: usize, config: &SystemConfig) -> Result<()> {
        for (i, u) in self.users.iter().enumerate() {
            if u.code >= g {
                return Err(Error::Infeasible(format!("code {} out of range for G = {g}", u.code)));
            }
            if i > 0 && self.users[i - 1].code >= u.code {
                return Err(Error::Infeasible("users must have distinct codes in ascending order".into()));
            }
            if u.delay > config.max_delay {
                return Err(Error::Infeasible(format!("delay {} exceeds D = {}", u.delay, config.max_delay)));
            }
            if u.taps.len() > config.p_max {
                return Err(Error::Infeasible(format!("{} taps exceed P_max = {}", u.taps.len(), config.p_max)));
            }
            if u.delay + u.taps.len() > config.n1 {
                return Err(Error::Truncation { code: u.code, delay: u.delay, taps: u.taps.len(), n1: config.n1 });
            }
        }
        Ok(())
    }
}

/// `sigma_e^2 = sigma_h^2 / 10^(snr_db / 10)`.
pub fn snr_to_noise_variance(snr_db: f64, sigma_h_sq: f64) -> Result<f64> {
    if !(sigma_h_sq > 0.0) {
        return Err(Error::InvalidConfig(format!("channel variance {sigma_h_sq} must be positive")));
    }
    Ok(sigma_h_sq / 10f64.powf(snr_db / 10.0))
}

/// `K` distinct codes drawn uniformly from the `G` codes of `codebook`, each
/// with a uniformly chosen ITU channel model and a uniform delay in `0..=D`.
pub fn sample_scenario<R: Rng + ?Sized>(
    k: usize,
    codebook: &CodeMatrix,
    config: &SystemConfig,
    noise_variance: f64,
    rng: &mut R,
) -> Result<Scenario> {
    let g = codebook.g();
    if k > g {
        return Err(Error::Infeasible(format!("K = {k} exceeds G = {g}")));
    }
    let mut codes = sample_indices(rng, g, k).into_vec();
    codes.sort_unstable();
    let mut users = Vec::with_capacity(k);
    for code in codes {
        let kind = ChannelKind::ALL[rng.gen_range(0..ChannelKind::ALL.len())];
        let delay = rng.gen_range(0..=config.max_delay);
        let draw = kind.model().sample(config.sample_interval, config.p_max, rng)?;
        users.push(User { code, delay, channel_model: kind, speed: draw.speed, taps: draw.taps });
    }
    Ok(Scenario { users, noise_variance, seed: None })
}

/// Circularly-symmetric complex Gaussian samples of variance `var`.
pub fn complex_noise<R: Rng + ?Sized>(len: usize, var: f64, rng: &mut R) -> Vec<Complex64> {
    let s = (var / 2.0).sqrt();
    (0..len)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re * s, im * s)
        })
        .collect()
}

/// Received window of `N` samples after cyclic-prefix removal.
///
/// Each user's code is mapped to subcarriers `j1..j1+M`, brought to the time
/// domain by a `1/sqrt(N)`-scaled inverse DFT, delayed by `d` samples and
/// circularly convolved with its taps. With `noise = Some(rng)`, white noise
/// of the scenario's variance is added to every sample.
pub fn synthesize_time_domain<R: Rng + ?Sized>(
    scenario: &Scenario,
    codebook: &CodeMatrix,
    config: &SystemConfig,
    noise: Option<&mut R>,
) -> Result<Vec<Complex64>> {
    config.ensure_valid()?;
    let n = config.n;
    let ifft = FftPlanner::new().plan_fft_inverse(n);
    let scale = 1.0 / (n as f64).sqrt();
    let mut v = vec![Complex64::new(0.0, 0.0); n];
    for user in &scenario.users {
        let code = codebook
            .columns
            .get(user.code)
            .ok_or_else(|| Error::Infeasible(format!("code {} not in codebook", user.code)))?;
        let mut s = vec![Complex64::new(0.0, 0.0); n];
        for (m, &c) in code.values.iter().enumerate() {
            s[config.j1 + m] = c;
        }
        ifft.process(&mut s);
        s.iter_mut().for_each(|x| *x *= scale);
        for (p, &h) in user.taps.iter().enumerate() {
            if h == Complex64::new(0.0, 0.0) {
                continue;
            }
            let lag = (p + user.delay) % n;
            for k in 0..n {
                v[k] += h * s[(k + n - lag) % n];
            }
        }
    }
    if let Some(rng) = noise {
        for (x, e) in v.iter_mut().zip(complex_noise(n, scenario.noise_variance, rng)) {
            *x += e;
        }
    }
    Ok(v)
}

/// `1/sqrt(N)`-scaled `N`-point DFT of the window, restricted to the PRACH bins.
pub fn extract_prach_observation(time_signal: &[Complex64], config: &SystemConfig) -> Result<Vec<Complex64>> {
    if time_signal.len() != config.n {
        return Err(Error::DimensionMismatch(format!(
            "time window has {} samples, expected N = {}",
            time_signal.len(),
            config.n
        )));
    }
    let mut buf = time_signal.to_vec();
    FftPlanner::new().plan_fft_forward(config.n).process(&mut buf);
    let scale = 1.0 / (config.n as f64).sqrt();
    Ok(config.prach_bins().map(|j| buf[j] * scale).collect())
}

/// Average received power over the PRACH bins,
/// `(1/M) sum_m |sum_p h(p) exp(-i 2 pi p j_m / N)|^2`.
pub fn received_power(taps: &[Complex64], config: &SystemConfig) -> f64 {
    let n = config.n as u128;
    let total: f64 = config
        .prach_bins()
        .map(|j| {
            taps.iter()
                .enumerate()
                .map(|(p, &h)| h * Complex64::from_polar(1.0, -2.0 * PI * ((p as u128 * j as u128) % n) as f64 / n as f64))
                .sum::<Complex64>()
                .norm_sqr()
        })
        .sum();
    total / config.m as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub y: Vec<Complex64>,
    pub scenario: Scenario,
    /// Stacked per-code vectors, length `G N1`.
    pub true_x: Vec<Complex64>,
    /// `(code, received power)` per active user.
    pub true_powers: Vec<(usize, f64)>,
}

/// Stacked vector whose block `l` holds `exp(-i phi_l)` times the taps of the
/// user on code `l`, starting at offset `d_l`.
pub fn build_true_x(scenario: &Scenario, dictionary: &Dictionary) -> Result<Vec<Complex64>> {
    let cfg = dictionary.config();
    scenario.validate(dictionary.g(), cfg)?;
    let n1 = cfg.n1;
    let mut x = vec![Complex64::new(0.0, 0.0); dictionary.width()];
    for user in &scenario.users {
        let rot = Complex64::from_polar(1.0, -dictionary.blocks()[user.code].phi);
        for (p, &h) in user.taps.iter().enumerate() {
            x[user.code * n1 + user.delay + p] = rot * h;
        }
    }
    Ok(x)
}

/// `y = A x + e` with `e` white of the scenario's variance.
pub fn synthesize_frequency_domain<R: Rng + ?Sized>(scenario: &Scenario, dictionary: &Dictionary, rng: &mut R) -> Result<Observation> {
    let true_x = build_true_x(scenario, dictionary)?;
    let mut y = vec![Complex64::new(0.0, 0.0); dictionary.m()];
    dictionary.apply(&true_x, &mut y);
    if scenario.noise_variance > 0.0 {
        for (v, e) in y.iter_mut().zip(complex_noise(dictionary.m(), scenario.noise_variance, rng)) {
            *v += e;
        }
    }
    let true_powers = scenario
        .users
        .iter()
        .map(|u| (u.code, received_power(&u.taps, dictionary.config())))
        .collect();
    Ok(Observation { y, scenario: scenario.clone(), true_x, true_powers })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codebook::build_code_matrix;
    use crate::dictionary::assemble;
    use crate::linalg::norm;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn single_user(code: usize, delay: usize, taps: Vec<Complex64>) -> Scenario {
        Scenario {
            users: vec![User { code, delay, channel_model: ChannelKind::PedA, speed: 0.0, taps }],
            noise_variance: 0.0,
            seed: None,
        }
    }

    fn rel_err(a: &[Complex64], b: &[Complex64]) -> f64 {
        let d: Vec<Complex64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        norm(&d) / norm(b).max(1e-300)
    }

    #[test]
    fn snr_examples() {
        assert_eq!(snr_to_noise_variance(0.0, 1.0).unwrap(), 1.0);
        assert!((snr_to_noise_variance(10.0, 1.0).unwrap() - 0.1).abs() < 1e-15);
        assert!((snr_to_noise_variance(-10.0, 2.0).unwrap() - 20.0).abs() < 1e-12);
        assert!(snr_to_noise_variance(3.0, 0.0).is_err());
    }

    #[test]
    fn scenario_sampling() {
        let cfg = SystemConfig::lte();
        let cm = build_code_matrix(&[(1, 50)], 15, cfg.m).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(sample_scenario(0, &cm, &cfg, 0.1, &mut rng).unwrap().k(), 0);
        let all = sample_scenario(50, &cm, &cfg, 0.1, &mut rng).unwrap();
        assert_eq!(all.active_set(), (0..50).collect::<Vec<_>>());
        assert!(all.validate(50, &cfg).is_ok());
        assert!(sample_scenario(51, &cm, &cfg, 0.1, &mut rng).is_err());
        let a = sample_scenario(5, &cm, &cfg, 0.1, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        let b = sample_scenario(5, &cm, &cfg, 0.1, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        assert_eq!(a, b);
        let back = Scenario::from_json_str(&a.to_json().unwrap()).unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn time_domain_trivial_cases() {
        let cfg = SystemConfig::small();
        let cm = build_code_matrix(&[(1, 3)], 2, cfg.m).unwrap();
        let none: Option<&mut ChaCha8Rng> = None;
        let zero = synthesize_time_domain(&single_user(0, 0, vec![Complex64::new(0.0, 0.0)]), &cm, &cfg, none).unwrap();
        assert!(zero.iter().all(|v| v.norm() == 0.0));

        // identity channel returns the transmitted symbols s(k)
        let v = synthesize_time_domain(&single_user(1, 0, vec![Complex64::new(1.0, 0.0)]), &cm, &cfg, None::<&mut ChaCha8Rng>).unwrap();
        for (k, vk) in v.iter().enumerate() {
            let s: Complex64 = cm.columns[1]
                .values
                .iter()
                .enumerate()
                .map(|(m, &c)| c * Complex64::from_polar(1.0, 2.0 * PI * ((cfg.j1 + m) * k) as f64 / cfg.n as f64))
                .sum::<Complex64>()
                / (cfg.n as f64).sqrt();
            assert!((vk - s).norm() < 1e-12);
        }
    }

    #[test]
    fn delay_gives_phase_ramp() {
        let mut cfg = SystemConfig::small();
        cfg.j1 = 5;
        let cm = build_code_matrix(&[(2, 2)], 3, cfg.m).unwrap();
        let h = vec![Complex64::new(0.7, -0.2), Complex64::new(0.1, 0.3)];
        let d = 2;
        let v0 = extract_prach_observation(
            &synthesize_time_domain(&single_user(1, 0, h.clone()), &cm, &cfg, None::<&mut ChaCha8Rng>).unwrap(),
            &cfg,
        )
        .unwrap();
        let vd = extract_prach_observation(
            &synthesize_time_domain(&single_user(1, d, h), &cm, &cfg, None::<&mut ChaCha8Rng>).unwrap(),
            &cfg,
        )
        .unwrap();
        for (m, j) in cfg.prach_bins().enumerate() {
            let ramp = Complex64::from_polar(1.0, -2.0 * PI * (d * j) as f64 / cfg.n as f64);
            assert!((vd[m] - v0[m] * ramp).norm() < 1e-12);
        }
    }

    #[test]
    fn extraction_trivial_cases() {
        let cfg = SystemConfig::small();
        let out = extract_prach_observation(&vec![Complex64::new(0.0, 0.0); cfg.n], &cfg).unwrap();
        assert!(out.iter().all(|v| v.norm() == 0.0));
        let tone: Vec<Complex64> = (0..cfg.n)
            .map(|k| Complex64::from_polar(1.0, 2.0 * PI * (cfg.j1 * k) as f64 / cfg.n as f64))
            .collect();
        let out = extract_prach_observation(&tone, &cfg).unwrap();
        assert!((out[0] - Complex64::new((cfg.n as f64).sqrt(), 0.0)).norm() < 1e-9);
        assert!(out[1..].iter().all(|v| v.norm() < 1e-9));
        assert!(extract_prach_observation(&tone[1..], &cfg).is_err());
    }

    #[test]
    fn paths_agree_single_user() {
        let mut cfg = SystemConfig::small();
        cfg.j1 = 11;
        let cm = build_code_matrix(&[(3, 4)], 3, cfg.m).unwrap();
        let dict = assemble(&cm, &cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for code in 0..4 {
            let sc = single_user(code, 1, vec![Complex64::new(0.4, 0.9), Complex64::new(-0.3, 0.2)]);
            let td = extract_prach_observation(&synthesize_time_domain(&sc, &cm, &cfg, None::<&mut ChaCha8Rng>).unwrap(), &cfg).unwrap();
            let fd = synthesize_frequency_domain(&sc, &dict, &mut rng).unwrap();
            assert!(rel_err(&td, &fd.y) < 1e-9);
            // the observation is the block times its slice of x
            let mut blk = vec![Complex64::new(0.0, 0.0); cfg.m];
            dict.block_matrix(code).apply(&fd.true_x[code * cfg.n1..(code + 1) * cfg.n1], &mut blk);
            assert!(rel_err(&blk, &fd.y) < 1e-9);
        }
    }

    #[test]
    fn true_x_support_and_powers() {
        let cfg = SystemConfig::lte();
        let cm = build_code_matrix(&[(1, 50)], 15, cfg.m).unwrap();
        let dict = assemble(&cm, &cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let sc = sample_scenario(4, &cm, &cfg, 0.0, &mut rng).unwrap();
        let obs = synthesize_frequency_domain(&sc, &dict, &mut rng).unwrap();
        for b in 0..50 {
            let blk = &obs.true_x[b * cfg.n1..(b + 1) * cfg.n1];
            match sc.users.iter().find(|u| u.code == b) {
                None => assert!(blk.iter().all(|v| v.norm() == 0.0)),
                Some(u) => {
                    let first = blk.iter().position(|v| v.norm() > 0.0).unwrap();
                    assert_eq!(first, u.delay);
                }
            }
        }
        let unit = received_power(&[Complex64::new(1.0, 0.0)], &cfg);
        assert!((unit - 1.0).abs() < 1e-12);
        assert_eq!(received_power(&[Complex64::new(0.0, 0.0); 3], &cfg), 0.0);
    }

    #[test]
    fn truncation_is_rejected() {
        let cfg = SystemConfig::small();
        let cm = build_code_matrix(&[(1, 3)], 2, cfg.m).unwrap();
        let dict = assemble(&cm, &cfg).unwrap();
        let sc = single_user(0, 2, vec![Complex64::new(1.0, 0.0); 3]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(synthesize_frequency_domain(&sc, &dict, &mut rng), Err(Error::Infeasible(_)) | Err(Error::Truncation { .. })));
    }

    #[test]
    fn noise_is_reproducible_and_scaled() {
        let mut a = ChaCha8Rng::seed_from_u64(5);
        let mut b = ChaCha8Rng::seed_from_u64(5);
        assert_eq!(complex_noise(16, 0.3, &mut a), complex_noise(16, 0.3, &mut b));
        let e = complex_noise(200_000, 0.3, &mut a);
        let var = e.iter().map(|v| v.norm_sqr()).sum::<f64>() / e.len() as f64;
        assert!((var - 0.3).abs() < 0.01);
    }
}
