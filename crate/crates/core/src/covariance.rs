//! Heralded Alice-Bob covariance matrix and the Gaussian Holevo bound.
//!
//! The matrix is kept in standard form
//! `[[V_x 1, V_xy Z], [V_xy Z, V_y 1]]` in shot-noise units.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constellation::{amplitudes, ladder_ratios, psi_matrix_elements};
use crate::error::{domain, Error, Result};
use crate::params::{ChannelParams, ScissorParams};
use crate::scissor::{heralded_state, herald_kernel};

/// Symplectic eigenvalues in `[1 - SYMPLECTIC_SLACK, 1]` are snapped to 1.
pub const SYMPLECTIC_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovarianceTriplet {
    pub v_x: f64,
    pub v_y: f64,
    pub v_xy: f64,
}

impl CovarianceTriplet {
    pub fn identity() -> Self {
        Self { v_x: 1.0, v_y: 1.0, v_xy: 0.0 }
    }

    pub fn determinant(&self) -> f64 {
        self.v_x * self.v_y - self.v_xy * self.v_xy
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymplecticSpectrum {
    pub lambda1: f64,
    pub lambda2: f64,
    /// Eve's conditional eigenvalue after Bob's homodyne measurement.
    pub lambda3: f64,
}

/// Closed-form covariance triplet of the heralded two-mode state.
pub fn cm_triplet(alpha: f64, ch: &ChannelParams, qs: &ScissorParams) -> Result<CovarianceTriplet> {
    let (_, prob) = heralded_state(alpha, ch, qs)?;
    let p = prob.p_ps;
    let t = ch.transmissivity;
    let f = ch.noise_factor;
    let mu = qs.mu;
    let a2 = alpha * alpha;
    let f21 = 2.0 * f + 1.0;
    let u = t * a2 / f21;
    let v = t * a2 / (2.0 * f);
    let w = a2 - u;
    let wp = a2 - v;

    // alpha^2 lambda_{m-1}/lambda_m; finite as alpha -> 0
    let r = ladder_ratios(alpha);
    let e = (-a2).exp();

    let big_a = 2.0 * (f21 * f21 - mu * f21) / f21.powi(3);
    let big_b = 2.0 * mu * t * a2 / f21.powi(3);
    let big_c = (1.0 - mu) / (2.0 * f);
    let d1 = r[1] + r[3];
    let d2 = r[2] + r[0];
    let d3 = r[1] - r[3];
    let d4 = r[2] - r[0];
    let v_x = 1.0
        + e / p
            * (d1 * (big_a * w.sinh() + big_b * w.cosh() - big_c * wp.sinh())
                + d2 * (big_a * w.cosh() + big_b * w.sinh() - big_c * wp.cosh())
                + d3 * (big_a * w.sin() + big_b * w.cos() - big_c * wp.sin())
                - d4 * (big_a * w.cos() - big_b * w.sin() - big_c * wp.cos()));

    let b = 8.0 / f21.powi(3) * (f21 * f21 - mu * (2.0 * f * f + 3.0 * f + 1.0) + 0.5 * mu * t * a2);
    let v_y = (b * (-u).exp() - 2.0 * (1.0 - mu) / f * (-v).exp()) / p - 1.0;

    let s = [r[0].sqrt(), r[1].sqrt(), r[2].sqrt(), r[3].sqrt()];
    let om1 = s[1] + s[3];
    let om2 = s[2] + s[0];
    let om3 = s[1] - s[3];
    let om4 = s[2] - s[0];
    let v_xy = 2.0 * (mu * (1.0 - mu) * t).sqrt() * alpha * e / (p * f21 * f21)
        * (om1 * w.cosh() + om2 * w.sinh() + om3 * w.cos() + om4 * w.sin());

    Ok(CovarianceTriplet { v_x, v_y, v_xy })
}

/// Same triplet by contracting `<psi_l|x^2|psi_k>` and `<psi_l|x|psi_k>` with
/// the herald-block traces `H_kl = tr Omega^{kl}` and `S_kl = tr(Omega^{kl} x)`.
/// `V_y` comes from the diagonal heralded state, `1 + 2c`.
pub fn cm_triplet_contracted(alpha: f64, ch: &ChannelParams, qs: &ScissorParams) -> Result<CovarianceTriplet> {
    let (state, prob) = heralded_state(alpha, ch, qs)?;
    let p = prob.p_ps;
    let t = ch.transmissivity;
    let f = ch.noise_factor;
    let mu = qs.mu;
    let f21 = 2.0 * f + 1.0;
    let amps = amplitudes(alpha);
    let pm = psi_matrix_elements(alpha)?;
    let coupling = 2.0 * (mu * (1.0 - mu) * t).sqrt() / (f21 * f21);

    let mut vx = Complex64::new(0.0, 0.0);
    let mut vxy = Complex64::new(0.0, 0.0);
    for k in 0..4 {
        for l in 0..4 {
            let cross = amps[l].conj() * amps[k];
            let overlap = (cross - alpha * alpha).exp();
            let z = cross * t;
            let h = overlap * herald_kernel(z, f, mu);
            let s = overlap * coupling * (amps[k] + amps[l].conj()) * (-z / f21).exp();
            vx += pm.g[k][l] * h;
            vxy += pm.n[k][l] * s;
        }
    }
    Ok(CovarianceTriplet {
        v_x: vx.re / (4.0 * p),
        v_y: 1.0 + 2.0 * state.c,
        v_xy: vxy.re / (4.0 * p),
    })
}

/// `Z_4^(QS) = V_xy / sqrt(T)`.
pub fn correlation_z_qs(alpha: f64, ch: &ChannelParams, qs: &ScissorParams) -> Result<f64> {
    Ok(cm_triplet(alpha, ch, qs)?.v_xy / ch.transmissivity.sqrt())
}

/// `g(x) = ((x+1)/2) log2((x+1)/2) - ((x-1)/2) log2((x-1)/2)`, with `g(1) = 0`.
pub fn g_entropy(x: f64) -> f64 {
    if x <= 1.0 {
        return 0.0;
    }
    let p = 0.5 * (x + 1.0);
    let m = 0.5 * (x - 1.0);
    p * p.log2() - m * m.log2()
}

fn snap(x: f64, what: &str) -> Result<f64> {
    if x >= 1.0 {
        Ok(x)
    } else if x >= 1.0 - SYMPLECTIC_SLACK {
        Ok(1.0)
    } else {
        Err(domain(format!("{what} = {x} violates the uncertainty bound")))
    }
}

pub fn symplectic_spectrum(cm: &CovarianceTriplet) -> Result<SymplecticSpectrum> {
    let CovarianceTriplet { v_x, v_y, v_xy } = *cm;
    if !(v_x.is_finite() && v_y.is_finite() && v_xy.is_finite()) || v_y <= 0.0 {
        return Err(domain(format!("covariance triplet {cm:?} is not finite and positive")));
    }
    let w = v_x * v_x + v_y * v_y - 2.0 * v_xy * v_xy;
    let d = cm.determinant();
    let mut disc = w * w - 4.0 * d * d;
    if disc < 0.0 {
        if disc >= -SYMPLECTIC_SLACK * w * w.max(1.0) {
            disc = 0.0;
        } else {
            return Err(Error::Domain(format!("negative symplectic discriminant {disc:e} for {cm:?}")));
        }
    }
    let root = disc.sqrt();
    let l1 = (0.5 * (w + root)).sqrt();
    let l2 = (0.5 * (w - root)).max(0.0).sqrt();
    let l3 = (v_x * d / v_y).max(0.0).sqrt();
    Ok(SymplecticSpectrum {
        lambda1: snap(l1, "lambda1")?,
        lambda2: snap(l2, "lambda2")?,
        lambda3: snap(l3, "lambda3")?,
    })
}

/// `chi_EB = g(Lambda_1) + g(Lambda_2) - g(Lambda_3)` under a Gaussian attack.
pub fn holevo_bound(cm: &CovarianceTriplet) -> Result<f64> {
    let s = symplectic_spectrum(cm)?;
    Ok(g_entropy(s.lambda1) + g_entropy(s.lambda2) - g_entropy(s.lambda3))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn setup(t: f64, eps_tm: f64, g: f64) -> (ChannelParams, ScissorParams) {
        (
            ChannelParams::from_transmissivity(t, eps_tm).unwrap(),
            ScissorParams::from_gain(g).unwrap(),
        )
    }

    #[test]
    fn identity_at_zero_amplitude() {
        for &(t, eps, g) in &[(1.0, 0.0, 1.0), (0.1, 0.05, 2.0), (0.01, 0.0, 4.0)] {
            let (ch, qs) = setup(t, eps, g);
            let cm = cm_triplet(0.0, &ch, &qs).unwrap();
            assert_abs_diff_eq!(cm.v_x, 1.0, epsilon = 1e-14);
            assert_eq!(cm.v_xy, 0.0);
            if eps == 0.0 {
                assert_abs_diff_eq!(cm.v_y, 1.0, epsilon = 1e-14);
            }
        }
        assert_eq!(holevo_bound(&CovarianceTriplet::identity()).unwrap(), 0.0);
    }

    #[test]
    fn g_values() {
        assert_eq!(g_entropy(1.0), 0.0);
        assert_abs_diff_eq!(g_entropy(3.0), 2.0, epsilon = 1e-15);
    }

    #[test]
    fn closed_form_matches_contraction() {
        for &alpha in &[0.05, 0.3, 0.7, 1.2] {
            for &(t, eps, g) in &[(1.0, 0.0, 2.0), (0.1, 0.01, 2.0), (0.01, 0.05, 3.0), (0.5, 0.05, 1.0)] {
                let (ch, qs) = setup(t, eps, g);
                let a = cm_triplet(alpha, &ch, &qs).unwrap();
                let b = cm_triplet_contracted(alpha, &ch, &qs).unwrap();
                assert_abs_diff_eq!(a.v_x, b.v_x, epsilon = 1e-8);
                assert_abs_diff_eq!(a.v_y, b.v_y, epsilon = 1e-8);
                assert_abs_diff_eq!(a.v_xy, b.v_xy, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn spectrum_determinant_consistency() {
        let (ch, qs) = setup(0.01, 0.05, 2.0);
        let cm = cm_triplet(0.7, &ch, &qs).unwrap();
        let s = symplectic_spectrum(&cm).unwrap();
        // the full 4x4 determinant is D^2
        assert_abs_diff_eq!(s.lambda1 * s.lambda2, cm.determinant(), epsilon = 1e-9);
    }

    #[test]
    fn rejects_unphysical_matrix() {
        let cm = CovarianceTriplet { v_x: 1.0, v_y: 1.0, v_xy: 0.9 };
        assert!(holevo_bound(&cm).is_err());
    }

    proptest! {
        #[test]
        fn g_monotone(x in 1.0f64..50.0, dx in 1e-6f64..5.0) {
            prop_assert!(g_entropy(x + dx) > g_entropy(x));
        }

        #[test]
        fn heralded_cm_is_physical(
            alpha in 0.0f64..1.2,
            t in 1e-3f64..1.0,
            eps_tm in 0.0f64..0.1,
            g in 1.0f64..10.0,
        ) {
            let (ch, qs) = setup(t, eps_tm, g);
            let cm = cm_triplet(alpha, &ch, &qs).unwrap();
            prop_assert!(cm.determinant() >= 1.0 - 1e-9);
            let s = symplectic_spectrum(&cm).unwrap();
            prop_assert!(s.lambda1 >= 1.0 && s.lambda2 >= 1.0 && s.lambda3 >= 1.0);
        }
    }
}
