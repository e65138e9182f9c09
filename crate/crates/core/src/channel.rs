//! ITU IMT-2000 tapped-delay-line channel profiles (Ped-A, Ped-B, Veh-A)
//! quantized to the receiver sample grid.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ChannelKind {
    PedA,
    PedB,
    VehA,
}

impl ChannelKind {
    pub const ALL: [ChannelKind; 3] = [ChannelKind::PedA, ChannelKind::PedB, ChannelKind::VehA];

    pub fn model(self) -> ChannelModel {
        match self {
            ChannelKind::PedA => ChannelModel {
                kind: self,
                tap_delays: vec![0.0, 110e-9, 190e-9, 410e-9],
                tap_powers_db: vec![0.0, -9.7, -19.2, -22.8],
                speed_range: (0.0, 5.0),
            },
            ChannelKind::PedB => ChannelModel {
                kind: self,
                tap_delays: vec![0.0, 200e-9, 800e-9, 1200e-9, 2300e-9, 3700e-9],
                tap_powers_db: vec![0.0, -0.9, -4.9, -8.0, -7.8, -23.9],
                speed_range: (0.0, 5.0),
            },
            ChannelKind::VehA => ChannelModel {
                kind: self,
                tap_delays: vec![0.0, 310e-9, 710e-9, 1090e-9, 1730e-9, 2510e-9],
                tap_powers_db: vec![0.0, -1.0, -9.0, -10.0, -15.0, -20.0],
                speed_range: (5.0, 20.0),
            },
        }
    }
}

/// Power-delay profile of one channel model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelModel {
    pub kind: ChannelKind,
    /// Tap delays in seconds, ascending, starting at 0.
    pub tap_delays: Vec<f64>,
    /// Relative tap powers in dB.
    pub tap_powers_db: Vec<f64>,
    /// Terminal speed interval in m/s.
    pub speed_range: (f64, f64),
}

/// One channel draw.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    /// Taps `h(0), h(1), ...` on the sample grid.
    pub taps: Vec<Complex64>,
    /// Terminal speed in m/s. Recorded only: carrier offsets are not modelled.
    pub speed: f64,
}

impl ChannelModel {
    /// Linear tap powers on the sample grid `t_s`, summing taps that fall on
    /// the same sample and normalized to total power 1.
    pub fn quantized_profile(&self, t_s: f64) -> Vec<f64> {
        let idx: Vec<usize> = self.tap_delays.iter().map(|d| (d / t_s).round() as usize).collect();
        let len = idx.iter().max().map_or(0, |m| m + 1);
        let mut profile = vec![0.0; len];
        for (&i, &db) in idx.iter().zip(&self.tap_powers_db) {
            profile[i] += 10f64.powf(db / 10.0);
        }
        let total: f64 = profile.iter().sum();
        profile.iter_mut().for_each(|p| *p /= total);
        profile
    }

    /// Draw circularly-symmetric Gaussian taps with the quantized profile as
    /// per-tap variance, so that the expected total power is 1.
    pub fn sample<R: Rng + ?Sized>(&self, t_s: f64, p_max: usize, rng: &mut R) -> Result<ChannelRealization> {
        let profile = self.quantized_profile(t_s);
        if profile.len() > p_max {
            return Err(Error::InvalidConfig(format!(
                "{:?} spans {} taps at T_s = {t_s:e}, more than P_max = {p_max}",
                self.kind,
                profile.len()
            )));
        }
        let taps = profile
            .iter()
            .map(|&p| {
                if p == 0.0 {
                    return Complex64::new(0.0, 0.0);
                }
                let s = (p / 2.0).sqrt();
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(re * s, im * s)
            })
            .collect();
        let speed = rng.gen_range(self.speed_range.0..=self.speed_range.1);
        Ok(ChannelRealization { taps, speed })
    }
}

/// Draw taps for `model` on the sample grid `t_s`.
pub fn sample_channel<R: Rng + ?Sized>(model: &ChannelModel, t_s: f64, p_max: usize, rng: &mut R) -> Result<ChannelRealization> {
    model.sample(t_s, p_max, rng)
}
