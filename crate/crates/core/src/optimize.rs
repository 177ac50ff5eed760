//! Grid optimization over `(alpha, g)` and distance/noise sweeps.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::covariance::correlation_z_qs;
use crate::error::{Error, Result};
use crate::mutual_info::{QuadratureGrid, QuadratureScheme};
use crate::params::{ChannelParams, ScissorParams, DEFAULT_KAPPA_DB_PER_KM};
use crate::rates::{
    correlation_curves, gg02_optimal, key_rate_noqs_dm, key_rate_qs, plob_thermal, z4_correlation, z_gaussian,
    CorrelationPoint, QsRate, RatePoint,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Protocol {
    QsDm,
    NoqsDm,
    Gg02,
    Plob,
    Correlations,
}

impl std::str::FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "qs-dm" => Ok(Self::QsDm),
            "noqs-dm" => Ok(Self::NoqsDm),
            "gg02" => Ok(Self::Gg02),
            "plob" => Ok(Self::Plob),
            "correlations" => Ok(Self::Correlations),
            other => Err(Error::Config(format!(
                "unknown protocol '{other}' (expected qs-dm, noqs-dm, gg02, plob or correlations)"
            ))),
        }
    }
}

/// Linear amplitude grid with one refinement pass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
    pub refine_step: f64,
}

impl Default for AlphaGrid {
    fn default() -> Self {
        Self { start: 0.05, stop: 1.2, step: 0.05, refine_step: 0.01 }
    }
}

/// Log-spaced gain grid with one refinement pass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainGrid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    /// Points per refinement bracket.
    pub refine_points: usize,
}

impl Default for GainGrid {
    fn default() -> Self {
        Self { min: 1.0, max: 10.0, points: 20, refine_points: 11 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub lengths_km: Vec<f64>,
    pub eps_tm: Vec<f64>,
    pub beta: f64,
    pub kappa_db_per_km: f64,
    pub alpha_grid: AlphaGrid,
    pub gain_grid: GainGrid,
    pub alpha_cap: Option<f64>,
    pub protocol: Protocol,
    pub quadrature: QuadratureScheme,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            lengths_km: Vec::new(),
            eps_tm: vec![0.0],
            beta: 1.0,
            kappa_db_per_km: DEFAULT_KAPPA_DB_PER_KM,
            alpha_grid: AlphaGrid::default(),
            gain_grid: GainGrid::default(),
            alpha_cap: None,
            protocol: Protocol::QsDm,
            quadrature: QuadratureScheme::Simpson { half_width: 10.0, nodes: 4001 },
        }
    }
}

/// `start, start + step, ...` up to `stop` inclusive (with a small slack for rounding).
pub fn linear_range(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(stop >= start) || !start.is_finite() || !stop.is_finite() {
        return Err(Error::Config(format!("invalid range {start}..{stop} step {step}")));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| snap(start + i as f64 * step)).collect())
}

/// Rounds away accumulated step error so grid values print cleanly.
fn snap(x: f64) -> f64 {
    (x * 1e12).round() / 1e12
}

pub fn log_range(min: f64, max: f64, points: usize) -> Result<Vec<f64>> {
    if !(min > 0.0) || !(max >= min) || points == 0 {
        return Err(Error::Config(format!("invalid log grid {min}..{max} with {points} points")));
    }
    if points == 1 {
        return Ok(vec![min]);
    }
    let (a, b) = (min.ln(), max.ln());
    Ok((0..points).map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp()).collect())
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(Error::Config(format!("beta must lie in [0, 1], got {}", self.beta)));
        }
        if self.eps_tm.iter().any(|e| !(*e >= 0.0)) {
            return Err(Error::Config("excess noise values must be >= 0".into()));
        }
        if self.alpha_values()?.is_empty() {
            return Err(Error::Config("alpha grid is empty after applying the cap".into()));
        }
        self.gain_values()?;
        QuadratureGrid::from_scheme(self.quadrature)?;
        Ok(())
    }

    /// Coarse amplitude grid, truncated by the cap.
    pub fn alpha_values(&self) -> Result<Vec<f64>> {
        let g = self.alpha_grid;
        let mut v = linear_range(g.start, g.stop, g.step)?;
        if let Some(cap) = self.alpha_cap {
            v.retain(|&a| a <= cap + 1e-12);
        }
        Ok(v)
    }

    pub fn gain_values(&self) -> Result<Vec<f64>> {
        let g = self.gain_grid;
        if !(g.min >= 1.0) {
            return Err(Error::Config(format!("gain grid must start at >= 1, got {}", g.min)));
        }
        log_range(g.min, g.max, g.points)
    }

    fn alpha_max(&self) -> f64 {
        let top = self.alpha_grid.stop;
        self.alpha_cap.map_or(top, |c| c.min(top))
    }
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    alpha: f64,
    gain: f64,
    rate: Option<QsRate>,
}

impl Candidate {
    fn objective(&self) -> f64 {
        self.rate.map_or(f64::NEG_INFINITY, |r| r.objective)
    }
}

fn evaluate(points: &[(f64, f64)], ch: &ChannelParams, beta: f64, grid: &QuadratureGrid) -> Vec<Candidate> {
    points
        .par_iter()
        .map(|&(alpha, gain)| {
            let rate = ScissorParams::from_gain(gain)
                .and_then(|qs| key_rate_qs(alpha, ch, &qs, beta, grid))
                .ok();
            Candidate { alpha, gain, rate }
        })
        .collect()
}

/// First strictly-best candidate in grid order (alpha-major), which realizes
/// the smallest-alpha-then-smallest-g tie-break.
fn best(cands: &[Candidate]) -> Option<Candidate> {
    let mut out: Option<Candidate> = None;
    for c in cands {
        let better = match out {
            None => c.rate.is_some(),
            Some(b) => c.objective() > b.objective(),
        };
        if better {
            out = Some(*c);
        }
    }
    out
}

fn sorted_grid(mut pts: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    pts.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-12 && (a.1 - b.1).abs() < 1e-12);
    pts
}

/// Best `(alpha, g)` setting of the scissor protocol on the refined grid.
///
/// Returns `(alpha, g, rate)`. When nothing beats zero, the smallest grid
/// values are reported with a zero rate.
pub fn optimize_qs(ch: &ChannelParams, beta: f64, cfg: &SweepConfig, grid: &QuadratureGrid) -> Result<(f64, f64, QsRate)> {
    let alphas = cfg.alpha_values()?;
    let gains = cfg.gain_values()?;
    let coarse_pts: Vec<(f64, f64)> = alphas.iter().flat_map(|&a| gains.iter().map(move |&g| (a, g))).collect();
    let coarse = evaluate(&coarse_pts, ch, beta, grid);
    let coarse_best = best(&coarse);

    let chosen = match coarse_best {
        Some(b) if b.objective() > 0.0 => {
            let ag = cfg.alpha_grid;
            let half = (ag.step / ag.refine_step).round() as i64;
            let a_lo = alphas[0];
            let a_hi = cfg.alpha_max();
            let ref_alphas: Vec<f64> = (-half..=half)
                .map(|i| snap(b.alpha + i as f64 * ag.refine_step))
                .filter(|&a| a >= a_lo - 1e-12 && a <= a_hi + 1e-12)
                .collect();
            let gi = gains.iter().position(|&g| g == b.gain).unwrap_or(0);
            let g_lo = gains[gi.saturating_sub(1)];
            let g_hi = gains[(gi + 1).min(gains.len() - 1)];
            let mut ref_gains = log_range(g_lo, g_hi, cfg.gain_grid.refine_points.max(2))?;
            ref_gains.push(b.gain);
            let pts = sorted_grid(ref_alphas.iter().flat_map(|&a| ref_gains.iter().map(move |&g| (a, g))).collect());
            let refined = best(&evaluate(&pts, ch, beta, grid));
            match refined {
                Some(r) if r.objective() >= b.objective() => r,
                _ => b,
            }
        }
        _ => {
            let first = coarse.first().copied().ok_or_else(|| Error::Config("empty optimization grid".into()))?;
            match first.rate {
                Some(_) => first,
                None => {
                    // surface the underlying failure
                    let qs = ScissorParams::from_gain(first.gain)?;
                    key_rate_qs(first.alpha, ch, &qs, beta, grid)?;
                    first
                }
            }
        }
    };
    let rate = chosen.rate.expect("chosen candidate has a rate");
    Ok((chosen.alpha, chosen.gain, rate))
}

/// Best no-scissor QPSK rate over the amplitude grid (with refinement).
pub fn optimize_noqs_dm(ch: &ChannelParams, beta: f64, cfg: &SweepConfig, grid: &QuadratureGrid) -> Result<(f64, f64)> {
    let alphas = cfg.alpha_values()?;
    let rates: Vec<f64> = alphas
        .par_iter()
        .map(|&a| key_rate_noqs_dm(a, ch, beta, grid))
        .collect::<Result<_>>()?;
    let (mut bi, mut br) = (0, rates[0]);
    for (i, &r) in rates.iter().enumerate() {
        if r > br {
            bi = i;
            br = r;
        }
    }
    if br <= 0.0 {
        return Ok((alphas[0], 0.0));
    }
    let ag = cfg.alpha_grid;
    let half = (ag.step / ag.refine_step).round() as i64;
    let mut out = (alphas[bi], br);
    for i in -half..=half {
        let a = snap(alphas[bi] + i as f64 * ag.refine_step);
        if a < alphas[0] - 1e-12 || a > cfg.alpha_max() + 1e-12 {
            continue;
        }
        let r = key_rate_noqs_dm(a, ch, beta, grid)?;
        if r > out.1 {
            out = (a, r);
        }
    }
    Ok(out)
}

fn nan_point(ch: &ChannelParams, beta: f64) -> RatePoint {
    RatePoint {
        length_km: ch.length_km,
        transmissivity: ch.transmissivity,
        eps_tm: ch.eps_tm,
        beta,
        alpha_opt: f64::NAN,
        g_opt: f64::NAN,
        p_succ: f64::NAN,
        i_ab: f64::NAN,
        chi_eb: f64::NAN,
        key_rate: f64::NAN,
        baseline_noqs_dm: f64::NAN,
        baseline_gg02: f64::NAN,
        plob_bound: f64::NAN,
    }
}

fn plob_or_nan(ch: &ChannelParams) -> f64 {
    plob_thermal(ch).unwrap_or(f64::NAN)
}

/// Optimized rate and baselines at one channel setting.
pub fn optimize_point(ch: &ChannelParams, beta: f64, cfg: &SweepConfig) -> Result<RatePoint> {
    let grid = QuadratureGrid::from_scheme(cfg.quadrature)?;
    let mut p = nan_point(ch, beta);
    match cfg.protocol {
        Protocol::QsDm => {
            let (alpha, gain, r) = optimize_qs(ch, beta, cfg, &grid)?;
            p.alpha_opt = alpha;
            p.g_opt = gain;
            p.p_succ = r.p_succ;
            p.i_ab = r.i_ab;
            p.chi_eb = r.chi_eb;
            p.key_rate = r.key_rate;
            p.baseline_noqs_dm = optimize_noqs_dm(ch, beta, cfg, &grid)?.1;
            p.baseline_gg02 = gg02_optimal(ch, beta)?.1;
            p.plob_bound = plob_or_nan(ch);
        }
        Protocol::NoqsDm => {
            let (alpha, r) = optimize_noqs_dm(ch, beta, cfg, &grid)?;
            p.alpha_opt = alpha;
            p.baseline_noqs_dm = r;
        }
        Protocol::Gg02 => p.baseline_gg02 = gg02_optimal(ch, beta)?.1,
        Protocol::Plob => p.plob_bound = plob_thermal(ch)?,
        Protocol::Correlations => {
            return Err(Error::Config("correlations are produced by the correlation sweep, not per channel".into()))
        }
    }
    Ok(p)
}

/// One sweep row; failures keep their place in the output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    #[serde(flatten)]
    pub point: RatePoint,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Evaluates every `(eps_tm, length)` pair, eps-major, in parallel; output keeps input order.
pub fn sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let jobs: Vec<(f64, f64)> = cfg.eps_tm.iter().flat_map(|&e| cfg.lengths_km.iter().map(move |&l| (e, l))).collect();
    Ok(jobs
        .par_iter()
        .map(|&(eps, length)| {
            let result = ChannelParams::from_length(length, cfg.kappa_db_per_km, eps)
                .and_then(|ch| optimize_point(&ch, cfg.beta, cfg));
            match result {
                Ok(point) => SweepRow { point, error: None },
                Err(e) => {
                    let ch = ChannelParams {
                        length_km: length,
                        kappa_db_per_km: cfg.kappa_db_per_km,
                        transmissivity: f64::NAN,
                        eps_tm: eps,
                        noise_factor: f64::NAN,
                    };
                    SweepRow { point: nan_point(&ch, cfg.beta), error: Some(e.to_string()) }
                }
            }
        })
        .collect())
}

/// Correlation parameters on a `V_A` grid. Past the amplifier pole the
/// NLA curve is reported as NaN; the other three curves remain defined.
pub fn correlation_sweep(v_a: &[f64], gain: f64) -> Result<Vec<CorrelationPoint>> {
    let qs = ScissorParams::from_gain(gain)?;
    v_a.par_iter()
        .map(|&v| match correlation_curves(v, gain) {
            Err(Error::Domain(_)) if v.is_finite() && v >= 0.0 => {
                let alpha = (0.5 * v).sqrt();
                Ok(CorrelationPoint {
                    v_a: v,
                    z_g: z_gaussian(v),
                    z_g_nla: f64::NAN,
                    z4: z4_correlation(alpha),
                    z4_qs: correlation_z_qs(alpha, &ChannelParams::identity(), &qs)?,
                })
            }
            other => other,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick_cfg() -> SweepConfig {
        SweepConfig {
            alpha_grid: AlphaGrid { start: 0.1, stop: 1.0, step: 0.1, refine_step: 0.05 },
            gain_grid: GainGrid { min: 1.0, max: 4.0, points: 5, refine_points: 3 },
            quadrature: QuadratureScheme::Simpson { half_width: 10.0, nodes: 801 },
            ..SweepConfig::default()
        }
    }

    #[test]
    fn ranges() {
        assert_eq!(linear_range(0.05, 1.2, 0.05).unwrap().len(), 24);
        let g = log_range(1.0, 10.0, 20).unwrap();
        assert_eq!(g.len(), 20);
        assert!((g[19] - 10.0).abs() < 1e-12);
        assert!(linear_range(1.0, 0.0, 0.1).is_err());
    }

    #[test]
    fn cap_truncates_alpha_grid() {
        let cfg = SweepConfig { alpha_cap: Some(0.5), ..SweepConfig::default() };
        let v = cfg.alpha_values().unwrap();
        assert!(v.iter().all(|&a| a <= 0.5 + 1e-12));
        assert_eq!(v.len(), 10);
        let bad = SweepConfig { alpha_cap: Some(0.01), ..SweepConfig::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn lossless_point_has_positive_rate() {
        let ch = ChannelParams::from_length(0.0, 0.2, 0.0).unwrap();
        let p = optimize_point(&ch, 1.0, &quick_cfg());
        // T = 1 is outside the thermal-loss bound's domain, but the rate itself is fine
        let p = p.unwrap();
        assert!(p.key_rate > 0.0);
        assert!(p.plob_bound.is_nan());
    }

    #[test]
    fn zero_rate_reports_grid_minimum() {
        let ch = ChannelParams::from_length(50.0, 0.2, 0.3).unwrap();
        let p = optimize_point(&ch, 1.0, &quick_cfg()).unwrap();
        assert_eq!(p.key_rate, 0.0);
        assert_eq!(p.alpha_opt, 0.1);
        assert_eq!(p.g_opt, 1.0);
    }

    #[test]
    fn refinement_never_loses() {
        let cfg = quick_cfg();
        let grid = QuadratureGrid::from_scheme(cfg.quadrature).unwrap();
        let ch = ChannelParams::from_length(30.0, 0.2, 0.0).unwrap();
        let (_, _, refined) = optimize_qs(&ch, 1.0, &cfg, &grid).unwrap();
        let coarse_only = SweepConfig {
            alpha_grid: AlphaGrid { refine_step: cfg.alpha_grid.step, ..cfg.alpha_grid },
            gain_grid: GainGrid { refine_points: 2, ..cfg.gain_grid },
            ..cfg.clone()
        };
        let (_, _, coarse) = optimize_qs(&ch, 1.0, &coarse_only, &grid).unwrap();
        assert!(refined.objective >= coarse.objective);
    }

    #[test]
    fn sweep_order_and_empty_input() {
        let mut cfg = quick_cfg();
        assert!(sweep(&cfg).unwrap().is_empty());
        cfg.lengths_km = vec![40.0, 10.0];
        cfg.eps_tm = vec![0.0, 0.01];
        cfg.protocol = Protocol::Plob;
        let rows = sweep(&cfg).unwrap();
        let keys: Vec<(f64, f64)> = rows.iter().map(|r| (r.point.eps_tm, r.point.length_km)).collect();
        assert_eq!(keys, vec![(0.0, 40.0), (0.0, 10.0), (0.01, 40.0), (0.01, 10.0)]);
    }

    #[test]
    fn correlation_sweep_marks_pole() {
        let rows = correlation_sweep(&[0.1, 1.0], 2.0).unwrap();
        assert!(rows[0].z_g_nla.is_finite());
        assert!(rows[1].z_g_nla.is_nan());
        assert!(rows[1].z4_qs > 0.0);
        assert!(correlation_sweep(&[-1.0], 2.0).is_err());
    }

    #[test]
    fn protocol_names() {
        assert_eq!("gg02".parse::<Protocol>().unwrap(), Protocol::Gg02);
        assert!("bb84".parse::<Protocol>().is_err());
    }
}
