//! Reference implementations shared by the oracle tests and the acceptance
//! run. Each `check_*` returns a one-line summary or the first mismatch.

#![allow(dead_code)]

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tagtrack_core::planner::{candidate_points_abc, trajectory_void_probability, void_probability, ActionLabel};
use tagtrack_core::rf::{received_power, AntennaPattern, PropagationConfig, Reflection};
use tagtrack_core::tracker::ObjectBelief;
use tagtrack_core::world::{ObjectState, UavState};

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_belief(r: &mut ChaCha8Rng, id: usize, extent: f64) -> ObjectBelief {
    let n = r.random_range(1..=20);
    let particles = (0..n)
        .map(|_| [r.random_range(0.0..extent), r.random_range(0.0..extent), 1.0])
        .collect();
    let weights = (0..n).map(|_| r.random_range(0.01..1.0)).collect();
    ObjectBelief::from_particles(id, particles, weights).unwrap()
}

pub fn brute_void(belief: &ObjectBelief, pose: &UavState, r_min: f64) -> f64 {
    let mut mass = 0.0;
    for (p, w) in belief.particles().iter().zip(belief.weights()) {
        let dx = p[0] - pose.position[0];
        let dy = p[1] - pose.position[1];
        if dx * dx + dy * dy < r_min * r_min {
            mass += w;
        }
    }
    1.0 - mass
}

/// Single-pose and trajectory void probability against a double loop,
/// compared for exact equality.
pub fn check_void(instances: usize) -> Result<String, String> {
    let mut r = rng(1);
    let mut pairs = 0;
    for i in 0..instances {
        let extent = 200.0;
        let beliefs: Vec<ObjectBelief> = (0..r.random_range(1..=4))
            .map(|j| random_belief(&mut r, j + 1, extent))
            .collect();
        let rollout: Vec<UavState> = (0..r.random_range(1..=11))
            .map(|_| UavState::new([r.random_range(0.0..extent), r.random_range(0.0..extent), 30.0], 0.0))
            .collect();
        let r_min = r.random_range(1.0..120.0);
        let mut lowest = 1.0_f64;
        for b in &beliefs {
            for pose in &rollout {
                let v = brute_void(b, pose, r_min);
                let got = void_probability(b, pose, r_min);
                ensure!(got == v, "instance {i}: void_probability {got} vs {v}");
                lowest = lowest.min(v);
                pairs += 1;
            }
        }
        let got = trajectory_void_probability(&beliefs, &rollout, r_min);
        ensure!(got == lowest, "instance {i}: trajectory {got} vs {lowest}");
    }
    Ok(format!("{instances} instances, {pairs} (belief, pose) pairs, exact"))
}

/// Two-ray power by direct complex arithmetic on image-method path lengths.
pub fn two_ray_oracle(tag: [f64; 3], uav: &UavState, cfg: &PropagationConfig) -> f64 {
    let h = ((tag[0] - uav.position[0]).powi(2) + (tag[1] - uav.position[1]).powi(2)).sqrt();
    let direct = (h * h + (uav.position[2] - tag[2]).powi(2)).sqrt();
    let image = [tag[0], tag[1], -tag[2]];
    let reflected = ((image[0] - uav.position[0]).powi(2)
        + (image[1] - uav.position[1]).powi(2)
        + (image[2] - uav.position[2]).powi(2))
    .sqrt();
    let psi = ((uav.position[2] + tag[2]) / reflected).asin();
    let gamma = match cfg.reflection {
        Reflection::Constant { coefficient } => Complex64::new(coefficient, 0.0),
        Reflection::Fresnel { permittivity } => {
            let eps = Complex64::new(permittivity, 0.0);
            let s = Complex64::new(psi.sin(), 0.0);
            let root = (eps - psi.cos().powi(2)).sqrt();
            (s - root) / (s + root)
        }
    };
    let dphi = 2.0 * std::f64::consts::PI * (reflected - direct) / cfg.wavelength;
    let field = Complex64::new(1.0, 0.0) + gamma * Complex64::from_polar(1.0, -dphi);
    let gain = match &cfg.antenna {
        AntennaPattern::Yagi { max_gain_db, floor } => {
            let phi = (tag[1] - uav.position[1]).atan2(tag[0] - uav.position[0]) - uav.heading;
            let lobe = ((1.0 + phi.cos()) / 2.0).powi(2);
            max_gain_db + 10.0 * lobe.max(*floor).log10()
        }
        AntennaPattern::Isotropic { gain_db } => *gain_db,
        AntennaPattern::Table { .. } => unreachable!(),
    };
    let n = cfg.path_loss_exponent;
    cfg.reference_power_dbm - 10.0 * n * direct.log10() + gain + 10.0 * n * field.norm().log10()
}

pub fn check_power(geometries: usize) -> Result<String, String> {
    let mut r = rng(2);
    let mut worst = 0.0_f64;
    for i in 0..geometries {
        let cfg = PropagationConfig {
            path_loss_exponent: r.random_range(2.0..4.0),
            reflection: if i % 2 == 0 {
                Reflection::Constant {
                    coefficient: r.random_range(-0.95..0.95),
                }
            } else {
                Reflection::Fresnel {
                    permittivity: r.random_range(2.0..30.0),
                }
            },
            ..PropagationConfig::default()
        }
        .with_frequency_mhz(r.random_range(150.0..152.0));
        let tag = [r.random_range(0.0..1000.0), r.random_range(0.0..1000.0), r.random_range(0.5..2.0)];
        let uav = UavState::new(
            [r.random_range(0.0..1000.0), r.random_range(0.0..1000.0), r.random_range(10.0..60.0)],
            r.random_range(0.0..std::f64::consts::TAU),
        );
        let got = received_power(&ObjectState::new(1, tag), &uav, &cfg).map_err(|e| e.to_string())?;
        let want = two_ray_oracle(tag, &uav, &cfg);
        worst = worst.max((got - want).abs());
        ensure!((got - want).abs() < 1e-9, "geometry {i}: {got} vs {want} dBm");
    }
    Ok(format!("{geometries} geometries, max |error| {worst:.1e} dB"))
}

/// Exact weighted variance for coordinates on a 1/8 m grid and integer
/// weights, in 128-bit integer arithmetic.
fn exact_sigma(points: &[[i64; 3]], weights: &[i64]) -> f64 {
    let w: i128 = weights.iter().map(|&w| w as i128).sum();
    (0..3)
        .map(|a| {
            let s1: i128 = points.iter().zip(weights).map(|(p, &k)| k as i128 * p[a] as i128).sum();
            let s2: i128 = points
                .iter()
                .zip(weights)
                .map(|(p, &k)| k as i128 * (p[a] as i128).pow(2))
                .sum();
            // var = (W·S2 - S1²) / W² in grid units²; grid is 1/8 m.
            let num = w * s2 - s1 * s1;
            (num as f64 / (w * w) as f64).sqrt() / 8.0
        })
        .fold(0.0, f64::max)
}

pub fn check_sigma(instances: usize) -> Result<String, String> {
    let mut r = rng(4);
    let mut checked = 0;
    let mut worst = 0.0_f64;
    while checked < instances {
        let n = r.random_range(2..=50);
        let pts: Vec<[i64; 3]> = (0..n)
            .map(|_| [r.random_range(0..8000), r.random_range(0..8000), r.random_range(0..16)])
            .collect();
        let ws: Vec<i64> = (0..n).map(|_| r.random_range(1..1000)).collect();
        let want = exact_sigma(&pts, &ws);
        if want == 0.0 {
            continue;
        }
        let belief = ObjectBelief::from_particles(
            1,
            pts.iter().map(|p| p.map(|c| c as f64 / 8.0)).collect(),
            ws.iter().map(|&w| w as f64).collect(),
        )
        .map_err(|e| e.to_string())?;
        let rel = ((belief.uncertainty() - want) / want).abs();
        worst = worst.max(rel);
        ensure!(rel < 1e-10, "instance {checked}: relative error {rel:e}");
        checked += 1;
    }
    Ok(format!("{instances} beliefs, max relative error {worst:.1e}"))
}

/// Circle membership of every point, collinearity of A, tangency of B and C.
pub fn check_abc(instances: usize) -> Result<String, String> {
    let mut r = rng(5);
    let mut worst = 0.0_f64;
    for i in 0..instances {
        let est: [f64; 2] = [r.random_range(0.0..1000.0), r.random_range(0.0..1000.0)];
        let r_min = r.random_range(1.0..100.0);
        let uav: [f64; 2] = [r.random_range(0.0..1000.0), r.random_range(0.0..1000.0)];
        let d = (uav[0] - est[0]).hypot(uav[1] - est[1]);
        let pts = candidate_points_abc(uav, est, r_min, 0.0);
        for (_, p) in &pts {
            let off = ((p[0] - est[0]).hypot(p[1] - est[1]) - r_min).abs();
            worst = worst.max(off);
            ensure!(off < 1e-9, "instance {i}: point off the circle by {off:e} m");
        }
        if d <= r_min {
            ensure!(pts.len() == 1 && pts[0].0 == ActionLabel::Escape, "instance {i}: expected escape");
            continue;
        }
        let labels: Vec<ActionLabel> = pts.iter().map(|p| p.0).collect();
        ensure!(labels == [ActionLabel::A, ActionLabel::B, ActionLabel::C], "instance {i}: labels {labels:?}");
        let a = pts[0].1;
        let cross = ((a[0] - est[0]) * (uav[1] - est[1]) - (a[1] - est[1]) * (uav[0] - est[0])).abs() / d;
        let facing = (a[0] - est[0]) * (uav[0] - est[0]) + (a[1] - est[1]) * (uav[1] - est[1]) > 0.0;
        ensure!(cross < 1e-9 && facing, "instance {i}: A off the sight line by {cross:e} m");
        for (_, t) in &pts[1..] {
            let sight = [t[0] - uav[0], t[1] - uav[1]];
            let radius = [t[0] - est[0], t[1] - est[1]];
            let along = ((sight[0] * radius[0] + sight[1] * radius[1]) / sight[0].hypot(sight[1])).abs();
            worst = worst.max(along);
            ensure!(along < 1e-9, "instance {i}: tangency off by {along:e} m");
        }
    }
    Ok(format!("{instances} geometries, max deviation {worst:.1e} m"))
}
