use qs_cvqkd::mutual_info::QuadratureGrid;
use qs_cvqkd::optimize::{optimize_noqs_dm, optimize_qs, SweepConfig};
use qs_cvqkd::params::{transmissivity_from_length, ChannelParams};
use qs_cvqkd::rates::{correlation_curves, plob_thermal};

fn channel(length_km: f64, eps_tm: f64) -> ChannelParams {
    ChannelParams::from_length(length_km, 0.2, eps_tm).unwrap()
}

#[test]
fn hundred_km_at_standard_attenuation() {
    approx::assert_relative_eq!(transmissivity_from_length(100.0, 0.2).unwrap(), 0.01, max_relative = 1e-12);
}

#[test]
fn strong_noise_gives_no_key_anywhere() {
    let cfg = SweepConfig::default();
    let grid = QuadratureGrid::from_scheme(cfg.quadrature).unwrap();
    for l in [0.0, 5.0, 20.0, 50.0, 100.0, 150.0] {
        let (_, _, r) = optimize_qs(&channel(l, 0.10), 1.0, &cfg, &grid).unwrap();
        assert_eq!(r.key_rate, 0.0, "L = {l}");
    }
}

#[test]
fn discrete_baseline_has_short_reach_under_noise() {
    let cfg = SweepConfig::default();
    let grid = QuadratureGrid::from_scheme(cfg.quadrature).unwrap();
    let (_, r) = optimize_noqs_dm(&channel(140.0, 0.05), 1.0, &cfg, &grid).unwrap();
    assert_eq!(r, 0.0);
}

#[test]
fn capacity_bound_above_scissor_rate_at_long_range() {
    let ch = channel(150.0, 0.05);
    let plob = plob_thermal(&ch).unwrap();
    assert!(plob.is_finite() && plob > 0.0);
    let cfg = SweepConfig::default();
    let grid = QuadratureGrid::from_scheme(cfg.quadrature).unwrap();
    let (_, _, r) = optimize_qs(&ch, 1.0, &cfg, &grid).unwrap();
    assert!(plob > r.key_rate);
}

#[test]
fn amplified_gaussian_correlation_dominates_scissor() {
    for i in 1..=200 {
        let v = i as f64 * 1e-3;
        let c = correlation_curves(v, 2.0).unwrap();
        assert!(c.z_g_nla > c.z4_qs, "V_A = {v}");
    }
}
