//! Independent reference implementations checked against the library.

mod common;

use rand::Rng;

use common::{rng, two_ray_oracle};
use tagtrack_core::rf::{log_likelihood, received_power, Measurement, PropagationConfig};
use tagtrack_core::tracker::ObjectBelief;
use tagtrack_core::world::{uav_rollout, Area, ObjectState, UavKinematics, UavState};

#[test]
fn void_functionals_equal_brute_force_exactly() {
    common::check_void(1000).unwrap();
}

#[test]
fn received_power_matches_complex_two_ray_oracle() {
    common::check_power(1000).unwrap();
}

#[test]
fn received_power_reference_geometry() {
    // Altitude 30 m, tag 1 m, range 100 m, lambda 2 m, constant -0.8.
    let cfg = PropagationConfig {
        wavelength: 2.0,
        ..PropagationConfig::default()
    };
    let uav = UavState::new([0.0, 0.0, 30.0], 0.0);
    let tag = [100.0, 0.0, 1.0];
    let got = received_power(&ObjectState::new(1, tag), &uav, &cfg).unwrap();
    assert!((got - two_ray_oracle(tag, &uav, &cfg)).abs() < 1e-9);
}

#[test]
fn uncertainty_matches_exact_oracle() {
    common::check_sigma(1000).unwrap();
}

#[test]
fn abc_points_on_circle_and_tangent() {
    common::check_abc(1000).unwrap();
}

#[test]
fn likelihood_integrates_to_one() {
    let cfg = PropagationConfig::default();
    let uav = UavState::new([0.0, 0.0, 30.0], 0.0);
    let tag = ObjectState::new(1, [120.0, 40.0, 1.0]);
    let mean = received_power(&tag, &uav, &cfg).unwrap();
    let dz = 1e-3;
    let total: f64 = (-100_000..=100_000)
        .map(|i| {
            let z = Measurement {
                tag_id: 1,
                rssi: mean + i as f64 * dz,
                step: 0,
            };
            log_likelihood(&z, &tag, &uav, &cfg).exp() * dz
        })
        .sum();
    assert!((total - 1.0).abs() < 1e-6, "{total}");
}

#[test]
fn log_likelihood_matches_gaussian_pdf() {
    let mut r = rng(3);
    let cfg = PropagationConfig::default();
    for _ in 0..1000 {
        let tag = [r.random_range(0.0..1000.0), r.random_range(0.0..1000.0), 1.0];
        let uav = UavState::new([r.random_range(0.0..1000.0), r.random_range(0.0..1000.0), 30.0], 0.3);
        let mean = received_power(&ObjectState::new(1, tag), &uav, &cfg).unwrap();
        let z = mean + r.random_range(-20.0..20.0);
        let pdf = (-(z - mean).powi(2) / (2.0 * cfg.noise_var)).exp() / (2.0 * std::f64::consts::PI * cfg.noise_var).sqrt();
        let got = log_likelihood(
            &Measurement {
                tag_id: 1,
                rssi: z,
                step: 0,
            },
            &ObjectState::new(1, tag),
            &uav,
            &cfg,
        );
        assert!((got - pdf.ln()).abs() <= 1e-12 * pdf.ln().abs().max(1.0), "{got} vs {}", pdf.ln());
    }
}

#[test]
fn five_particle_update_matches_direct_normalization() {
    let cfg = PropagationConfig::default();
    let uav = UavState::new([0.0, 0.0, 30.0], 0.7);
    let particles = vec![
        [50.0, 10.0, 1.0],
        [120.0, -40.0, 1.0],
        [80.0, 80.0, 1.0],
        [200.0, 30.0, 1.0],
        [65.0, -5.0, 1.0],
    ];
    let prior = vec![0.1, 0.3, 0.2, 0.15, 0.25];
    let z = -92.5;
    let mut belief = ObjectBelief::from_particles(1, particles.clone(), prior.clone()).unwrap();
    belief.update(
        &Measurement {
            tag_id: 1,
            rssi: z,
            step: 1,
        },
        &uav,
        &cfg,
    );
    let unnorm: Vec<f64> = particles
        .iter()
        .zip(&prior)
        .map(|(p, w)| w * (-(z - two_ray_oracle(*p, &uav, &cfg)).powi(2) / (2.0 * cfg.noise_var)).exp())
        .collect();
    let total: f64 = unnorm.iter().sum();
    for (got, u) in belief.weights().iter().zip(&unnorm) {
        assert!((got - u / total).abs() < 1e-12, "{got} vs {}", u / total);
    }
}

/// Closed-form trapezoidal (or triangular) profile from rest.
fn profile_distance(t: f64, total: f64, v: f64, a: f64) -> f64 {
    let (cruise_speed, t_acc) = if total >= v * v / a { (v, v / a) } else { ((a * total).sqrt(), (total / a).sqrt()) };
    let d_acc = 0.5 * a * t_acc * t_acc;
    let t_cruise = (total - 2.0 * d_acc) / cruise_speed;
    if t <= t_acc {
        0.5 * a * t * t
    } else if t <= t_acc + t_cruise {
        d_acc + cruise_speed * (t - t_acc)
    } else {
        let td = (t - t_acc - t_cruise).min(t_acc);
        (d_acc + cruise_speed * t_cruise + cruise_speed * td - 0.5 * a * td * td).min(total)
    }
}

#[test]
fn rollout_follows_trapezoidal_profile() {
    let mut r = rng(6);
    let kin = UavKinematics::default();
    let area = Area::square(1000.0);
    for _ in 0..200 {
        let start = UavState::new([r.random_range(100.0..900.0), r.random_range(100.0..900.0), 30.0], 0.0);
        let wp = [r.random_range(0.0..1000.0), r.random_range(0.0..1000.0)];
        let total = (wp[0] - start.position[0]).hypot(wp[1] - start.position[1]);
        let poses = uav_rollout(&start, wp, &kin, &area, 40, 1.0);
        for (i, pose) in poses.iter().enumerate() {
            let s = profile_distance((i + 1) as f64, total, kin.max_speed, kin.accel);
            let travelled = (pose.position[0] - start.position[0]).hypot(pose.position[1] - start.position[1]);
            assert!((travelled - s).abs() < 0.05, "step {i}: {travelled} vs {s}");
        }
    }
}
