//! Received-signal-strength model for a VHF tag seen from the observer.
//!
//! Received power in dBm is a log-distance path loss plus a directional
//! receive-antenna gain plus a two-ray ground-reflection term:
//!
//! ```text
//! h = P0 - 10 n log10(d) + G(azimuth) + 10 n log10 |1 + Γ(ψ) exp(-j Δφ)|
//! ```
//!
//! `d` is the line-of-sight distance, `Δφ = 2π (d_reflected - d) / λ` with the
//! reflected path taken from the image of the observer below the ground
//! plane, and `ψ` is the grazing angle of the reflected ray. Measurements are
//! `h` plus Gaussian noise of variance `noise_var` (dB²).

use std::cell::Cell;
use std::f64::consts::TAU;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::ConfigError;
use crate::world::{normalize_angle, ObjectState, UavState};

/// Speed of light, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum RfError {
    #[error("transmitter and receiver are coincident")]
    Coincident,
}

thread_local! {
    static LIKELIHOOD_CALLS: Cell<u64> = const { Cell::new(0) };
}

/// Number of measurement-likelihood evaluations made on the current thread.
pub fn likelihood_calls() -> u64 {
    LIKELIHOOD_CALLS.with(Cell::get)
}

pub fn reset_likelihood_calls() {
    LIKELIHOOD_CALLS.with(|c| c.set(0));
}

/// Ground reflection coefficient model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Reflection {
    Constant { coefficient: f64 },
    /// Horizontally polarised Fresnel coefficient over a lossless ground of
    /// the given relative permittivity.
    Fresnel { permittivity: f64 },
}

impl Reflection {
    /// Coefficient for a ray hitting the ground at `grazing` radians.
    pub fn coefficient(&self, grazing: f64) -> f64 {
        match *self {
            Reflection::Constant { coefficient } => coefficient,
            Reflection::Fresnel { permittivity } => {
                let (s, c) = grazing.sin_cos();
                let root = (permittivity - c * c).sqrt();
                (s - root) / (s + root)
            }
        }
    }
}

impl Default for Reflection {
    fn default() -> Self {
        Reflection::Constant { coefficient: -0.8 }
    }
}

/// Azimuth-only receive antenna gain, relative to the observer heading.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AntennaPattern {
    Isotropic {
        gain_db: f64,
    },
    /// Two-element Yagi: `max_gain_db + 10 log10(max(floor, ((1 + cos φ) / 2)²))`.
    Yagi { max_gain_db: f64, floor: f64 },
    /// Piecewise-linear table over azimuth in degrees, wrapping at 360.
    Table { azimuth_deg: Vec<f64>, gain_db: Vec<f64> },
}

impl Default for AntennaPattern {
    fn default() -> Self {
        AntennaPattern::Yagi {
            max_gain_db: 4.0,
            floor: 1e-2,
        }
    }
}

impl AntennaPattern {
    /// Gain in dB at `azimuth` radians off boresight.
    pub fn gain(&self, azimuth: f64) -> f64 {
        match self {
            AntennaPattern::Isotropic { gain_db } => *gain_db,
            AntennaPattern::Yagi { max_gain_db, floor } => yagi_gain(*max_gain_db, *floor, azimuth.cos()),
            AntennaPattern::Table { azimuth_deg, gain_db } => {
                table_gain(azimuth_deg, gain_db, normalize_angle(azimuth).to_degrees())
            }
        }
    }

    /// Gain towards the horizontal offset `(dx, dy)` from an observer with
    /// the given heading.
    fn gain_towards(&self, dx: f64, dy: f64, heading: f64) -> f64 {
        match self {
            AntennaPattern::Isotropic { gain_db } => *gain_db,
            AntennaPattern::Yagi { max_gain_db, floor } => {
                let r = dx.hypot(dy);
                // Directly below: treat as boresight.
                let cos = if r > 0.0 {
                    (dx * heading.cos() + dy * heading.sin()) / r
                } else {
                    1.0
                };
                yagi_gain(*max_gain_db, *floor, cos)
            }
            AntennaPattern::Table { .. } => self.gain(dy.atan2(dx) - heading),
        }
    }

    fn validate(&self) -> Result<(), ConfigError> {
        match self {
            AntennaPattern::Isotropic { gain_db } if !gain_db.is_finite() => {
                Err(ConfigError::invalid("propagation.antenna", "gain must be finite"))
            }
            AntennaPattern::Yagi { floor, .. } if !(*floor > 0.0 && *floor <= 1.0) => {
                Err(ConfigError::invalid("propagation.antenna", "floor must be in (0, 1]"))
            }
            AntennaPattern::Table { azimuth_deg, gain_db } => {
                if azimuth_deg.is_empty() || azimuth_deg.len() != gain_db.len() {
                    return Err(ConfigError::invalid(
                        "propagation.antenna",
                        "table needs equal, non-empty azimuth and gain columns",
                    ));
                }
                let sorted = azimuth_deg.windows(2).all(|w| w[0] < w[1]);
                let in_range = azimuth_deg.iter().all(|a| (0.0..360.0).contains(a));
                if !sorted || !in_range {
                    return Err(ConfigError::invalid(
                        "propagation.antenna",
                        "table azimuths must be strictly increasing within [0, 360)",
                    ));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

fn yagi_gain(max_gain_db: f64, floor: f64, cos: f64) -> f64 {
    let lobe = 0.5 * (1.0 + cos);
    max_gain_db + 10.0 * (lobe * lobe).max(floor).log10()
}

fn table_gain(azimuth_deg: &[f64], gain_db: &[f64], az: f64) -> f64 {
    let n = azimuth_deg.len();
    if n == 1 {
        return gain_db[0];
    }
    // Index of the first entry strictly greater than `az`.
    let hi = azimuth_deg.partition_point(|a| *a <= az);
    let (a0, g0, a1, g1) = if hi == 0 {
        (azimuth_deg[n - 1] - 360.0, gain_db[n - 1], azimuth_deg[0], gain_db[0])
    } else if hi == n {
        (azimuth_deg[n - 1], gain_db[n - 1], azimuth_deg[0] + 360.0, gain_db[0])
    } else {
        (azimuth_deg[hi - 1], gain_db[hi - 1], azimuth_deg[hi], gain_db[hi])
    };
    g0 + (g1 - g0) * (az - a0) / (a1 - a0)
}

/// RF constants for one tag/receiver pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PropagationConfig {
    /// P0, dBm.
    pub reference_power_dbm: f64,
    /// Path-loss exponent n, in [2, 4].
    pub path_loss_exponent: f64,
    /// Carrier wavelength λ, meters.
    pub wavelength: f64,
    pub reflection: Reflection,
    pub antenna: AntennaPattern,
    /// Measurement noise variance Q, dB².
    pub noise_var: f64,
}

impl Default for PropagationConfig {
    fn default() -> Self {
        Self {
            reference_power_dbm: -40.0,
            path_loss_exponent: 3.0,
            wavelength: SPEED_OF_LIGHT / 151.0e6,
            reflection: Reflection::default(),
            antenna: AntennaPattern::default(),
            noise_var: 25.0,
        }
    }
}

impl PropagationConfig {
    /// Same constants with λ set from a carrier frequency in MHz.
    pub fn with_frequency_mhz(&self, mhz: f64) -> Self {
        Self {
            wavelength: SPEED_OF_LIGHT / (mhz * 1e6),
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(2.0..=4.0).contains(&self.path_loss_exponent) {
            return Err(ConfigError::invalid("propagation.path_loss_exponent", "must be in [2, 4]"));
        }
        if !(self.noise_var > 0.0 && self.noise_var.is_finite()) {
            return Err(ConfigError::invalid("propagation.noise_var", "must be > 0"));
        }
        if !(self.wavelength > 0.0 && self.wavelength.is_finite()) {
            return Err(ConfigError::invalid("propagation.wavelength", "must be > 0"));
        }
        if !self.reference_power_dbm.is_finite() {
            return Err(ConfigError::invalid("propagation.reference_power_dbm", "must be finite"));
        }
        match self.reflection {
            Reflection::Constant { coefficient } if !(coefficient.abs() <= 1.0) => {
                return Err(ConfigError::invalid("propagation.reflection", "|Γ| must be <= 1"));
            }
            Reflection::Fresnel { permittivity } if !(permittivity >= 1.0) => {
                return Err(ConfigError::invalid("propagation.reflection", "permittivity must be >= 1"));
            }
            _ => {}
        }
        self.antenna.validate()
    }
}

/// One RSSI sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub tag_id: usize,
    /// dBm
    pub rssi: f64,
    pub step: u64,
}

/// Noise-free received power (dBm) at `uav` from a transmitter at `tag`.
pub(crate) fn power_at(tag: &[f64; 3], uav: &UavState, cfg: &PropagationConfig) -> Result<f64, RfError> {
    let dx = tag[0] - uav.position[0];
    let dy = tag[1] - uav.position[1];
    let ground2 = dx * dx + dy * dy;
    let rise = uav.position[2] - tag[2];
    let d2 = ground2 + rise * rise;
    if d2 == 0.0 {
        return Err(RfError::Coincident);
    }
    let d = d2.sqrt();
    let image_rise = uav.position[2] + tag[2];
    let d_reflected = (ground2 + image_rise * image_rise).sqrt();
    let phase = TAU * (d_reflected - d) / cfg.wavelength;
    let grazing = image_rise.atan2(ground2.sqrt());
    let gamma = cfg.reflection.coefficient(grazing);
    // |1 + Γ e^{-jΔφ}|² for real Γ.
    let multipath2 = 1.0 + 2.0 * gamma * phase.cos() + gamma * gamma;
    let n = cfg.path_loss_exponent;
    // -10n log10(d) + 10n log10(sqrt(m²)) folded into one logarithm.
    Ok(cfg.reference_power_dbm
        + 5.0 * n * (multipath2 / d2).log10()
        + cfg.antenna.gain_towards(dx, dy, uav.heading))
}

/// Noise-free received power (dBm) of `object` at the observer pose `uav`.
pub fn received_power(object: &ObjectState, uav: &UavState, cfg: &PropagationConfig) -> Result<f64, RfError> {
    power_at(&object.position, uav, cfg)
}

/// Draws one noisy RSSI measurement.
pub fn sample_measurement<R: Rng + ?Sized>(
    object: &ObjectState,
    uav: &UavState,
    cfg: &PropagationConfig,
    step: u64,
    rng: &mut R,
) -> Result<Measurement, RfError> {
    let mean = received_power(object, uav, cfg)?;
    let n: f64 = rng.sample(StandardNormal);
    Ok(Measurement {
        tag_id: object.tag_id,
        rssi: mean + cfg.noise_var.sqrt() * n,
        step,
    })
}

/// Gaussian log-density of observing `rssi` from a tag at `tag`.
pub(crate) fn log_likelihood_at(rssi: f64, tag: &[f64; 3], uav: &UavState, cfg: &PropagationConfig) -> f64 {
    LIKELIHOOD_CALLS.with(|c| c.set(c.get() + 1));
    match power_at(tag, uav, cfg) {
        Ok(mean) => {
            let r = rssi - mean;
            -0.5 * ((TAU * cfg.noise_var).ln() + r * r / cfg.noise_var)
        }
        Err(RfError::Coincident) => f64::NEG_INFINITY,
    }
}

/// `ln g(z | particle)`; `-inf` for a particle coincident with the observer.
pub fn log_likelihood(z: &Measurement, particle: &ObjectState, uav: &UavState, cfg: &PropagationConfig) -> f64 {
    log_likelihood_at(z.rssi, &particle.position, uav, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use std::f64::consts::PI;
    use rand_chacha::ChaCha8Rng;

    fn free_space(n: f64) -> PropagationConfig {
        PropagationConfig {
            reference_power_dbm: -40.0,
            path_loss_exponent: n,
            reflection: Reflection::Constant { coefficient: 0.0 },
            antenna: AntennaPattern::Isotropic { gain_db: 0.0 },
            ..Default::default()
        }
    }

    fn uav_at(x: f64, y: f64, z: f64) -> UavState {
        UavState::new([x, y, z], 0.0)
    }

    #[test]
    fn free_space_reference_values() {
        let cfg = free_space(2.0);
        let tag = ObjectState::new(1, [0.0, 0.0, 0.0]);
        let p1 = received_power(&tag, &uav_at(1.0, 0.0, 0.0), &cfg).unwrap();
        let p10 = received_power(&tag, &uav_at(10.0, 0.0, 0.0), &cfg).unwrap();
        assert!((p1 + 40.0).abs() < 1e-12);
        assert!((p10 + 60.0).abs() < 1e-12);
    }

    #[test]
    fn coincident_is_an_error() {
        let tag = ObjectState::new(1, [5.0, 5.0, 30.0]);
        assert_eq!(
            received_power(&tag, &uav_at(5.0, 5.0, 30.0), &PropagationConfig::default()),
            Err(RfError::Coincident)
        );
        let z = Measurement {
            tag_id: 1,
            rssi: -50.0,
            step: 0,
        };
        assert_eq!(
            log_likelihood(&z, &tag, &uav_at(5.0, 5.0, 30.0), &PropagationConfig::default()),
            f64::NEG_INFINITY
        );
    }

    #[test]
    fn free_space_monotone_in_distance() {
        let cfg = free_space(3.0);
        let tag = ObjectState::new(1, [0.0, 0.0, 1.0]);
        let mut last = f64::INFINITY;
        for i in 1..200 {
            let p = received_power(&tag, &uav_at(i as f64 * 5.0, 0.0, 30.0), &cfg).unwrap();
            assert!(p < last);
            last = p;
        }
    }

    #[test]
    fn noiseless_measurement_equals_mean() {
        let cfg = PropagationConfig {
            noise_var: 0.0,
            ..Default::default()
        };
        let tag = ObjectState::new(2, [100.0, 40.0, 1.0]);
        let uav = uav_at(0.0, 0.0, 30.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let z = sample_measurement(&tag, &uav, &cfg, 7, &mut rng).unwrap();
        assert_eq!(z.rssi, received_power(&tag, &uav, &cfg).unwrap());
        assert_eq!(z.tag_id, 2);
        assert_eq!(z.step, 7);
    }

    #[test]
    fn measurement_is_seed_deterministic() {
        let cfg = PropagationConfig::default();
        let tag = ObjectState::new(1, [100.0, 40.0, 1.0]);
        let uav = uav_at(0.0, 0.0, 30.0);
        let a = sample_measurement(&tag, &uav, &cfg, 0, &mut ChaCha8Rng::seed_from_u64(11)).unwrap();
        let b = sample_measurement(&tag, &uav, &cfg, 0, &mut ChaCha8Rng::seed_from_u64(11)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn measurement_noise_variance() {
        let cfg = PropagationConfig::default();
        let tag = ObjectState::new(1, [100.0, 40.0, 1.0]);
        let uav = uav_at(0.0, 0.0, 30.0);
        let mean = received_power(&tag, &uav, &cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let n = 100_000;
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let r = sample_measurement(&tag, &uav, &cfg, 0, &mut rng).unwrap().rssi - mean;
            s += r;
            s2 += r * r;
        }
        let m = s / n as f64;
        let var = s2 / n as f64 - m * m;
        assert!((var - 25.0).abs() < 0.03 * 25.0, "var {var}");
    }

    #[test]
    fn likelihood_peak_and_symmetry() {
        let cfg = PropagationConfig::default();
        let tag = ObjectState::new(1, [100.0, 40.0, 1.0]);
        let uav = uav_at(0.0, 0.0, 30.0);
        let mean = received_power(&tag, &uav, &cfg).unwrap();
        let at = |rssi| {
            log_likelihood(
                &Measurement {
                    tag_id: 1,
                    rssi,
                    step: 0,
                },
                &tag,
                &uav,
                &cfg,
            )
        };
        assert!((at(mean) + 0.5 * (TAU * 25.0).ln()).abs() < 1e-12);
        assert_eq!(at(mean + 3.7), at(mean - 3.7));
    }

    #[test]
    fn likelihood_counter_counts() {
        reset_likelihood_calls();
        let cfg = PropagationConfig::default();
        let tag = ObjectState::new(1, [100.0, 40.0, 1.0]);
        let z = Measurement {
            tag_id: 1,
            rssi: -80.0,
            step: 0,
        };
        for _ in 0..5 {
            log_likelihood(&z, &tag, &uav_at(0.0, 0.0, 30.0), &cfg);
        }
        assert_eq!(likelihood_calls(), 5);
        received_power(&tag, &uav_at(0.0, 0.0, 30.0), &cfg).unwrap();
        assert_eq!(likelihood_calls(), 5);
    }

    #[test]
    fn yagi_front_back() {
        let pat = AntennaPattern::default();
        assert!((pat.gain(0.0) - 4.0).abs() < 1e-12);
        assert!((pat.gain(PI) - (4.0 - 20.0)).abs() < 1e-12);
        assert!(pat.gain(0.3) > pat.gain(1.3));
    }

    #[test]
    fn table_pattern_interpolates_and_wraps() {
        let pat = AntennaPattern::Table {
            azimuth_deg: vec![0.0, 90.0, 180.0, 270.0],
            gain_db: vec![6.0, 0.0, -10.0, 0.0],
        };
        assert!((pat.gain(0.0) - 6.0).abs() < 1e-12);
        assert!((pat.gain(45f64.to_radians()) - 3.0).abs() < 1e-9);
        assert!((pat.gain(315f64.to_radians()) - 3.0).abs() < 1e-9);
        assert!((pat.gain(-45f64.to_radians()) - 3.0).abs() < 1e-9);
        assert!(pat.validate().is_ok());
    }

    #[test]
    fn fresnel_coefficient_limits() {
        let r = Reflection::Fresnel { permittivity: 15.0 };
        // Grazing incidence reflects fully with phase reversal.
        assert!((r.coefficient(0.0) + 1.0).abs() < 1e-12);
        let normal = r.coefficient(PI / 2.0);
        let expected = (1.0 - 15f64.sqrt()) / (1.0 + 15f64.sqrt());
        assert!((normal - expected).abs() < 1e-12);
        for i in 0..=90 {
            assert!(r.coefficient((i as f64).to_radians()).abs() <= 1.0);
        }
    }

    #[test]
    fn config_validation() {
        assert!(PropagationConfig::default().validate().is_ok());
        let bad_n = PropagationConfig {
            path_loss_exponent: 5.0,
            ..Default::default()
        };
        assert!(bad_n.validate().is_err());
        let bad_gamma = PropagationConfig {
            reflection: Reflection::Constant { coefficient: 1.5 },
            ..Default::default()
        };
        assert!(bad_gamma.validate().is_err());
        let freq = PropagationConfig::default().with_frequency_mhz(150.0);
        assert!((freq.wavelength - 1.998_616_386_666_666_7).abs() < 1e-12);
    }
}
