//! Sequential importance resampling particle filter, one instance per tag.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::ConfigError;
use crate::rf::{self, Measurement, PropagationConfig};
use crate::world::{jitter_position, Area, TargetDynamics, UavState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrackerConfig {
    pub particle_count: usize,
    /// Resample when the effective sample size drops below this fraction of
    /// the particle count.
    pub resample_threshold: f64,
    /// A tag is localized once its belief spread falls below this, meters.
    pub sigma_min: f64,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        Self {
            particle_count: 10_000,
            resample_threshold: 0.5,
            sigma_min: 35.0,
        }
    }
}

impl TrackerConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.particle_count == 0 {
            return Err(ConfigError::invalid("tracker.particle_count", "must be >= 1"));
        }
        if !(self.resample_threshold > 0.0 && self.resample_threshold <= 1.0) {
            return Err(ConfigError::invalid("tracker.resample_threshold", "must be in (0, 1]"));
        }
        if !(self.sigma_min > 0.0) {
            return Err(ConfigError::invalid("tracker.sigma_min", "must be > 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BeliefError {
    #[error("belief needs at least one particle")]
    Empty,
    #[error("{particles} particles but {weights} weights")]
    LengthMismatch { particles: usize, weights: usize },
    #[error("weights must be finite, non-negative and not all zero")]
    BadWeights,
}

/// Result of a measurement update.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpdateOutcome {
    Updated,
    /// Every particle had zero likelihood; weights were reset to uniform.
    Diverged,
}

/// Weighted particle approximation of one tag's position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectBelief {
    pub tag_id: usize,
    particles: Vec<[f64; 3]>,
    weights: Vec<f64>,
    /// Sticky: once set it is never cleared.
    pub localized: bool,
}

impl ObjectBelief {
    /// Particles i.i.d. uniform over `area` at `tag_height`, equal weights.
    pub fn uniform<R: Rng + ?Sized>(
        tag_id: usize,
        area: &Area,
        tag_height: f64,
        cfg: &TrackerConfig,
        rng: &mut R,
    ) -> Self {
        let n = cfg.particle_count.max(1);
        let particles = (0..n)
            .map(|_| {
                [
                    rng.random_range(area.x_min..=area.x_max),
                    rng.random_range(area.y_min..=area.y_max),
                    tag_height,
                ]
            })
            .collect();
        Self {
            tag_id,
            particles,
            weights: vec![1.0 / n as f64; n],
            localized: false,
        }
    }

    /// Builds a belief from explicit particles; weights are normalized.
    pub fn from_particles(tag_id: usize, particles: Vec<[f64; 3]>, weights: Vec<f64>) -> Result<Self, BeliefError> {
        if particles.is_empty() {
            return Err(BeliefError::Empty);
        }
        if particles.len() != weights.len() {
            return Err(BeliefError::LengthMismatch {
                particles: particles.len(),
                weights: weights.len(),
            });
        }
        let total: f64 = weights.iter().sum();
        if weights.iter().any(|w| !(*w >= 0.0 && w.is_finite())) || !(total > 0.0) {
            return Err(BeliefError::BadWeights);
        }
        let weights = weights.into_iter().map(|w| w / total).collect();
        Ok(Self {
            tag_id,
            particles,
            weights,
            localized: false,
        })
    }

    /// Equally weighted particles.
    pub fn from_points(tag_id: usize, particles: Vec<[f64; 3]>) -> Result<Self, BeliefError> {
        let n = particles.len();
        Self::from_particles(tag_id, particles, vec![1.0; n])
    }

    /// `count` copies of one position.
    pub fn point_mass(tag_id: usize, position: [f64; 3], count: usize) -> Self {
        let count = count.max(1);
        Self {
            tag_id,
            particles: vec![position; count],
            weights: vec![1.0 / count as f64; count],
            localized: false,
        }
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn particles(&self) -> &[[f64; 3]] {
        &self.particles
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Propagates every particle through the random-walk model.
    pub fn predict<R: Rng + ?Sized>(&mut self, dynamics: &TargetDynamics, area: &Area, rng: &mut R) {
        let sd = dynamics.std_devs();
        for p in &mut self.particles {
            jitter_position(p, &sd, area, rng);
        }
    }

    /// Multiplies weights by measurement likelihoods and renormalizes.
    ///
    /// # Panics
    /// If `z` belongs to a different tag.
    pub fn update(&mut self, z: &Measurement, uav: &UavState, cfg: &PropagationConfig) -> UpdateOutcome {
        assert_eq!(z.tag_id, self.tag_id, "measurement routed to the wrong belief");
        let log_likelihoods: Vec<f64> = self
            .particles
            .iter()
            .map(|p| rf::log_likelihood_at(z.rssi, p, uav, cfg))
            .collect();
        self.reweight(&log_likelihoods)
    }

    /// Bayes reweighting with per-particle log-likelihoods, stabilized by
    /// subtracting the largest log-weight before exponentiating.
    pub fn reweight(&mut self, log_likelihoods: &[f64]) -> UpdateOutcome {
        assert_eq!(log_likelihoods.len(), self.weights.len());
        let mut peak = f64::NEG_INFINITY;
        for (w, ll) in self.weights.iter_mut().zip(log_likelihoods) {
            *w = w.ln() + ll;
            if *w > peak {
                peak = *w;
            }
        }
        if !peak.is_finite() {
            self.reset_weights();
            return UpdateOutcome::Diverged;
        }
        let mut total = 0.0;
        for w in &mut self.weights {
            *w = (*w - peak).exp();
            total += *w;
        }
        for w in &mut self.weights {
            *w /= total;
        }
        UpdateOutcome::Updated
    }

    fn reset_weights(&mut self) {
        let u = 1.0 / self.weights.len() as f64;
        self.weights.fill(u);
    }

    /// `1 / Σ w²`
    pub fn effective_sample_size(&self) -> f64 {
        1.0 / self.weights.iter().map(|w| w * w).sum::<f64>()
    }

    /// Systematic resampling when the effective sample size falls below
    /// `resample_threshold · N`. Returns whether resampling happened.
    pub fn resample_if_needed<R: Rng + ?Sized>(&mut self, cfg: &TrackerConfig, rng: &mut R) -> bool {
        let n = self.weights.len();
        if self.effective_sample_size() >= cfg.resample_threshold * n as f64 {
            return false;
        }
        let offset: f64 = rng.random();
        let picks = systematic_indices(&self.weights, offset);
        self.particles = picks.iter().map(|&i| self.particles[i]).collect();
        self.reset_weights();
        true
    }

    /// Weighted mean position.
    pub fn estimate(&self) -> [f64; 3] {
        let mut mean = [0.0; 3];
        for (p, w) in self.particles.iter().zip(&self.weights) {
            for a in 0..3 {
                mean[a] += w * p[a];
            }
        }
        mean
    }

    /// Per-axis weighted standard deviations about the weighted mean.
    pub fn axis_std_devs(&self) -> [f64; 3] {
        let mean = self.estimate();
        let mut var = [0.0; 3];
        for (p, w) in self.particles.iter().zip(&self.weights) {
            for a in 0..3 {
                let d = p[a] - mean[a];
                var[a] += w * d * d;
            }
        }
        var.map(f64::sqrt)
    }

    /// Belief spread σ: the largest per-axis standard deviation.
    pub fn uncertainty(&self) -> f64 {
        let [sx, sy, sz] = self.axis_std_devs();
        sx.max(sy).max(sz)
    }

    /// Sets `localized` if the spread is below `sigma_min`; returns true only
    /// on the transition.
    pub fn mark_localized(&mut self, sigma_min: f64) -> bool {
        if !self.localized && self.uncertainty() < sigma_min {
            self.localized = true;
            return true;
        }
        false
    }
}

/// Systematic resampling: one uniform `offset` in `[0, 1)` places `N` evenly
/// spaced pointers on the cumulative weight line. Returns the selected
/// source index for each output slot.
pub fn systematic_indices(weights: &[f64], offset: f64) -> Vec<usize> {
    let n = weights.len();
    let step = 1.0 / n as f64;
    let mut picks = Vec::with_capacity(n);
    let mut cumulative = weights[0];
    let mut i = 0;
    for slot in 0..n {
        let pointer = (slot as f64 + offset) * step;
        while pointer > cumulative && i + 1 < n {
            i += 1;
            cumulative += weights[i];
        }
        picks.push(i);
    }
    picks
}
