//! Key rates for the heralded protocol and its reference curves.

use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};

use crate::constellation::{lambdas, ladder_ratios};
use crate::covariance::{cm_triplet, correlation_z_qs, holevo_bound, CovarianceTriplet};
use crate::error::{domain, Result};
use crate::mutual_info::{binary_gaussian_mutual_information, mutual_information, QuadratureGrid};
use crate::params::{ChannelParams, ScissorParams};
use crate::scissor::heralded_state;

/// One row of a rate sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub length_km: f64,
    #[serde(rename = "T")]
    pub transmissivity: f64,
    pub eps_tm: f64,
    pub beta: f64,
    pub alpha_opt: f64,
    pub g_opt: f64,
    pub p_succ: f64,
    #[serde(rename = "i_ab_bits")]
    pub i_ab: f64,
    #[serde(rename = "chi_eb_bits")]
    pub chi_eb: f64,
    pub key_rate: f64,
    pub baseline_noqs_dm: f64,
    pub baseline_gg02: f64,
    pub plob_bound: f64,
}

/// Rate of the scissor protocol at one `(alpha, g)` setting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QsRate {
    pub p_succ: f64,
    pub i_ab: f64,
    pub chi_eb: f64,
    /// `p_succ (beta I_AB - chi_EB)` before clamping.
    pub objective: f64,
    pub key_rate: f64,
}

/// `K = P_succ (beta I_AB - chi_EB)`, clamped at zero.
pub fn key_rate_qs(
    alpha: f64,
    ch: &ChannelParams,
    qs: &ScissorParams,
    beta: f64,
    grid: &QuadratureGrid,
) -> Result<QsRate> {
    let (_, prob) = heralded_state(alpha, ch, qs)?;
    let i_ab = mutual_information(alpha, ch, qs, grid)?;
    let chi_eb = holevo_bound(&cm_triplet(alpha, ch, qs)?)?;
    let objective = prob.p_succ * (beta * i_ab - chi_eb);
    Ok(QsRate { p_succ: prob.p_succ, i_ab, chi_eb, objective, key_rate: objective.max(0.0) })
}

/// `Z_4 = <Psi| x_0 x_1 |Psi>` for the QPSK source state.
pub fn z4_correlation(alpha: f64) -> f64 {
    // 2 alpha^2 sum_m lambda_{m-1}^{3/2} lambda_m^{-1/2}, written with the bounded ratios
    let lam = lambdas(alpha);
    let r = ladder_ratios(alpha);
    2.0 * alpha * (0..4).map(|m| lam[(m + 3) % 4] * r[m].sqrt()).sum::<f64>()
}

/// Covariance triplet of the QPSK source sent through the channel without a scissor.
pub fn noqs_dm_triplet(alpha: f64, ch: &ChannelParams) -> CovarianceTriplet {
    let v_a = 2.0 * alpha * alpha;
    let t = ch.transmissivity;
    CovarianceTriplet {
        v_x: 1.0 + v_a,
        v_y: 1.0 + t * (v_a + ch.eps_tm),
        v_xy: t.sqrt() * z4_correlation(alpha),
    }
}

/// `beta I_AB - chi_EB` for the QPSK protocol without a scissor, clamped at zero.
pub fn key_rate_noqs_dm(alpha: f64, ch: &ChannelParams, beta: f64, grid: &QuadratureGrid) -> Result<f64> {
    if !(alpha >= 0.0) {
        return Err(domain(format!("alpha must be >= 0, got {alpha}")));
    }
    let t = ch.transmissivity;
    let mean = 2.0 * t.sqrt() * alpha * FRAC_1_SQRT_2;
    let i_ab = binary_gaussian_mutual_information(mean, 1.0 + t * ch.eps_tm, grid)?;
    let chi = holevo_bound(&noqs_dm_triplet(alpha, ch))?;
    Ok((beta * i_ab - chi).max(0.0))
}

/// `Z_G = sqrt(V_A^2 + 2 V_A)`.
pub fn z_gaussian(v_a: f64) -> f64 {
    (v_a * v_a + 2.0 * v_a).sqrt()
}

/// Gaussian-modulated homodyne protocol with reverse reconciliation, clamped at zero.
pub fn gg02_rate_noqs(v_a: f64, ch: &ChannelParams, beta: f64) -> Result<f64> {
    if !(v_a >= 0.0) || !v_a.is_finite() {
        return Err(domain(format!("modulation variance must be >= 0, got {v_a}")));
    }
    if v_a == 0.0 {
        return Ok(0.0);
    }
    let t = ch.transmissivity;
    let z = z_gaussian(v_a);
    let cm = CovarianceTriplet { v_x: v_a + 1.0, v_y: 1.0 + t * (v_a + ch.eps_tm), v_xy: t.sqrt() * z };
    let v_y_given_x = cm.v_y - t * z * z / (v_a + 1.0);
    let i_ab = 0.5 * (cm.v_y / v_y_given_x).log2();
    Ok((beta * i_ab - holevo_bound(&cm)?).max(0.0))
}

/// GG02 rate maximized over the modulation variance. Returns `(V_A, rate)`.
pub fn gg02_optimal(ch: &ChannelParams, beta: f64) -> Result<(f64, f64)> {
    // log-spaced scan over [1e-3, 1e3], then golden-section on the best bracket
    let n = 121;
    let xs: Vec<f64> = (0..n).map(|i| 10f64.powf(-3.0 + 6.0 * i as f64 / (n - 1) as f64)).collect();
    let mut best = (xs[0], gg02_rate_noqs(xs[0], ch, beta)?);
    let mut best_i = 0;
    for (i, &x) in xs.iter().enumerate().skip(1) {
        let r = gg02_rate_noqs(x, ch, beta)?;
        if r > best.1 {
            best = (x, r);
            best_i = i;
        }
    }
    if best.1 == 0.0 {
        return Ok(best);
    }
    let (mut lo, mut hi) = (xs[best_i.saturating_sub(1)].ln(), xs[(best_i + 1).min(n - 1)].ln());
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..60 {
        let a = hi - phi * (hi - lo);
        let b = lo + phi * (hi - lo);
        if gg02_rate_noqs(a.exp(), ch, beta)? >= gg02_rate_noqs(b.exp(), ch, beta)? {
            hi = b;
        } else {
            lo = a;
        }
    }
    let x = (0.5 * (lo + hi)).exp();
    let r = gg02_rate_noqs(x, ch, beta)?;
    Ok(if r > best.1 { (x, r) } else { best })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationPoint {
    pub v_a: f64,
    pub z_g: f64,
    pub z_g_nla: f64,
    pub z4: f64,
    pub z4_qs: f64,
}

/// Correlation parameters over a lossless, noiseless channel.
pub fn correlation_curves(v_a: f64, g: f64) -> Result<CorrelationPoint> {
    if !(v_a >= 0.0) || !v_a.is_finite() {
        return Err(domain(format!("modulation variance must be >= 0, got {v_a}")));
    }
    let qs = ScissorParams::from_gain(g)?;
    let lam2 = v_a / (v_a + 2.0);
    let gl = g * g * lam2;
    if gl >= 1.0 {
        return Err(domain(format!("amplified squeezing g^2 lambda^2 = {gl} reaches the pole")));
    }
    let v_a_nla = 2.0 * gl / (1.0 - gl);
    let alpha = (0.5 * v_a).sqrt();
    Ok(CorrelationPoint {
        v_a,
        z_g: z_gaussian(v_a),
        z_g_nla: z_gaussian(v_a_nla),
        z4: z4_correlation(alpha),
        z4_qs: correlation_z_qs(alpha, &ChannelParams::identity(), &qs)?,
    })
}

/// Repeaterless key capacity bound of the thermal-loss channel with
/// `n = eps_tm T / (2(1-T))` thermal photons.
pub fn plob_thermal(ch: &ChannelParams) -> Result<f64> {
    let t = ch.transmissivity;
    if !(t > 0.0 && t < 1.0) {
        return Err(domain(format!("thermal-loss bound needs 0 < T < 1, got {t}")));
    }
    let n = ch.eps_tm * t / (2.0 * (1.0 - t));
    if n >= t / (1.0 - t) {
        return Ok(0.0);
    }
    let h = |n: f64| if n > 0.0 { (n + 1.0) * (n + 1.0).log2() - n * n.log2() } else { 0.0 };
    Ok((-((1.0 - t) * t.powf(n)).log2() - h(n)).max(0.0))
}
