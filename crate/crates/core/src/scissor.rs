//! Heralded quantum-scissor output in the prepare-and-measure picture.
//!
//! Bob's mode after the thermal-loss channel is fed into a scissor with
//! transmittance `mu`. On a D1 click with D2 silent the output is a qubit
//! state in `{|0>, |1>}`. Homodyne densities use the convention
//! `<x|0> = pi^{-1/4} e^{-x^2/2}`.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constellation::amplitudes;
use crate::error::{domain, Error, Result};
use crate::params::{ChannelParams, ScissorParams};

/// Unconditional heralded state `a |0><0| + c |1><1|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeraldedState {
    pub a: f64,
    pub c: f64,
}

/// Heralded state conditioned on the transmitted symbol,
/// `a_c |0><0| + b_c (|0><1| + |1><0|) + c_c |1><1|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionalHeraldedState {
    pub a_c: f64,
    pub b_c: f64,
    pub c_c: f64,
}

impl ConditionalHeraldedState {
    pub fn vacuum() -> Self {
        Self { a_c: 1.0, b_c: 0.0, c_c: 0.0 }
    }

    /// Rejects states whose density would go negative somewhere.
    pub fn validate(&self) -> Result<()> {
        let slack = self.a_c * self.c_c - self.b_c * self.b_c;
        if self.a_c < -1e-12 || self.c_c < -1e-12 || slack < -1e-12 {
            return Err(Error::InvalidState(format!(
                "a_c = {}, b_c = {}, c_c = {} is not positive semidefinite",
                self.a_c, self.b_c, self.c_c
            )));
        }
        Ok(())
    }
}

impl From<HeraldedState> for ConditionalHeraldedState {
    fn from(s: HeraldedState) -> Self {
        Self { a_c: s.a, b_c: 0.0, c_c: s.c }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuccessProbability {
    /// Probability of the D1-click, D2-silent pattern.
    pub p_ps: f64,
    /// Either single-click pattern.
    pub p_succ: f64,
}

impl SuccessProbability {
    fn new(p_ps: f64) -> Result<Self> {
        if !(p_ps > 0.0) || !p_ps.is_finite() {
            return Err(Error::DegenerateHerald { p_ps });
        }
        Ok(Self { p_ps, p_succ: 2.0 * p_ps })
    }
}

/// `h(z) = a(z) e^{-z/(2F+1)} - (1-mu)/(2F) e^{-z/(2F)}`
/// with `a(z) = 2[(2F+1)^2 - mu(2F+1) + mu z] / (2F+1)^3`.
///
/// `h(T |alpha|^2)` is the herald probability for a coherent input `alpha`;
/// complex arguments `z = T alpha_k conj(alpha_l)` give the off-diagonal
/// herald amplitudes between constellation points.
pub fn herald_kernel(z: Complex64, noise_factor: f64, mu: f64) -> Complex64 {
    let f2 = 2.0 * noise_factor;
    let f21 = f2 + 1.0;
    let a = (f21 * f21 - mu * f21 + mu * z) * (2.0 / f21.powi(3));
    a * (-z / f21).exp() - (1.0 - mu) / f2 * (-z / f2).exp()
}

fn herald_probability_real(x: f64, noise_factor: f64, mu: f64) -> f64 {
    // e^{-u} [a - C e^{u-v}] with the near-cancellation routed through expm1
    let f2 = 2.0 * noise_factor;
    let f21 = f2 + 1.0;
    let a = 2.0 * (f21 * f21 - mu * f21 + mu * x) / f21.powi(3);
    let c = (1.0 - mu) / f2;
    let u = x / f21;
    let v = x / f2;
    (-u).exp() * ((a - c) - c * (u - v).exp_m1())
}

/// Heralded state and success probability for an `alpha`-amplitude QPSK input.
pub fn heralded_state(
    alpha: f64,
    ch: &ChannelParams,
    qs: &ScissorParams,
) -> Result<(HeraldedState, SuccessProbability)> {
    check_alpha(alpha)?;
    let t = ch.transmissivity;
    let f = ch.noise_factor;
    let mu = qs.mu;
    let ta2 = t * alpha * alpha;
    let prob = SuccessProbability::new(herald_probability_real(ta2, f, mu))?;
    let f21 = 2.0 * f + 1.0;
    let a = 2.0 * mu * (2.0 * f * f21 + ta2) * (-ta2 / f21).exp() / (f21.powi(3) * prob.p_ps);
    Ok((HeraldedState { a, c: 1.0 - a }, prob))
}

/// Heralded state given that Alice sent `alpha_k`, `k = 0..3`.
///
/// Returns the state and its own herald probability; by symmetry of the
/// constellation the latter coincides with the unconditional `p_ps`.
pub fn conditional_state(
    k: usize,
    alpha: f64,
    ch: &ChannelParams,
    qs: &ScissorParams,
) -> Result<(ConditionalHeraldedState, f64)> {
    check_alpha(alpha)?;
    if k > 3 {
        return Err(domain(format!("constellation index must be 0..3, got {k}")));
    }
    let t = ch.transmissivity;
    let f = ch.noise_factor;
    let mu = qs.mu;
    let x_k = amplitudes(alpha)[k].re;
    let f21 = 2.0 * f + 1.0;
    let s = t * (alpha * alpha + 2.0 * x_k * x_k);
    let p_c = SuccessProbability::new(herald_probability_real(t * alpha * alpha, f, mu))?.p_ps;
    let e = (-s / (2.0 * f21)).exp();
    let a_c = mu * (4.0 * f * f21 + s) * e / (f21.powi(3) * p_c);
    let b_c = 2.0 * (mu * (1.0 - mu) * t).sqrt() * x_k * e / (f21 * f21 * p_c);
    let state = ConditionalHeraldedState { a_c, b_c, c_c: 1.0 - a_c };
    state.validate()?;
    Ok((state, p_c))
}

/// All four conditional states in constellation order.
pub fn conditional_states(
    alpha: f64,
    ch: &ChannelParams,
    qs: &ScissorParams,
) -> Result<[ConditionalHeraldedState; 4]> {
    let mut out = [ConditionalHeraldedState::vacuum(); 4];
    for (k, slot) in out.iter_mut().enumerate() {
        *slot = conditional_state(k, alpha, ch, qs)?.0;
    }
    Ok(out)
}

/// `(a + 2 c x^2) e^{-x^2} / sqrt(pi)`.
pub fn output_density(x: f64, state: &HeraldedState) -> f64 {
    (state.a + 2.0 * state.c * x * x) * (-x * x).exp() / PI.sqrt()
}

/// `(a_c + 2 sqrt(2) b_c x + 2 c_c x^2) e^{-x^2} / sqrt(pi)`.
pub fn conditional_density(x: f64, state: &ConditionalHeraldedState) -> Result<f64> {
    state.validate()?;
    Ok(conditional_density_unchecked(x, state))
}

pub(crate) fn conditional_density_unchecked(x: f64, s: &ConditionalHeraldedState) -> f64 {
    let poly = s.a_c + 2.0 * SQRT_2 * s.b_c * x + 2.0 * s.c_c * x * x;
    (poly * (-x * x).exp() / PI.sqrt()).max(0.0)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha >= 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("alpha must be >= 0, got {alpha}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn setup(l_or_t: f64, eps_tm: f64, g: f64) -> (ChannelParams, ScissorParams) {
        (
            ChannelParams::from_transmissivity(l_or_t, eps_tm).unwrap(),
            ScissorParams::from_gain(g).unwrap(),
        )
    }

    #[test]
    fn vacuum_input() {
        for &(t, g) in &[(1.0, 1.0), (0.1, 2.0), (0.01, 5.0)] {
            let (ch, qs) = setup(t, 0.0, g);
            let (st, p) = heralded_state(0.0, &ch, &qs).unwrap();
            assert_abs_diff_eq!(st.a, 1.0, epsilon = 1e-14);
            assert_abs_diff_eq!(st.c, 0.0, epsilon = 1e-14);
            assert_abs_diff_eq!(p.p_succ, qs.mu, epsilon = 1e-14);
            let (cs, _) = conditional_state(1, 0.0, &ch, &qs).unwrap();
            assert_abs_diff_eq!(cs.a_c, 1.0, epsilon = 1e-14);
            assert_eq!(cs.b_c, 0.0);
        }
    }

    #[test]
    fn kernel_matches_real_evaluation() {
        for &(x, f, mu) in &[(0.0, 0.5, 0.5), (0.3, 0.51, 0.2), (2.0, 0.7, 0.1)] {
            let k = herald_kernel(Complex64::new(x, 0.0), f, mu);
            assert_abs_diff_eq!(k.re, herald_probability_real(x, f, mu), epsilon = 1e-15);
            assert_eq!(k.im, 0.0);
        }
    }

    #[test]
    fn mixture_reproduces_unconditional_state() {
        let (ch, qs) = setup(0.1, 0.01, 2.0);
        let alpha = 0.5;
        let (st, p) = heralded_state(alpha, &ch, &qs).unwrap();
        let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
        for k in 0..4 {
            let (cs, pc) = conditional_state(k, alpha, &ch, &qs).unwrap();
            a += 0.25 * pc * cs.a_c;
            b += 0.25 * pc * cs.b_c;
            c += 0.25 * pc * cs.c_c;
        }
        assert_abs_diff_eq!(a, p.p_ps * st.a, epsilon = 1e-10);
        assert_abs_diff_eq!(c, p.p_ps * st.c, epsilon = 1e-10);
        assert_abs_diff_eq!(b, 0.0, epsilon = 1e-10);
    }

    #[test]
    fn density_examples() {
        let vac = HeraldedState { a: 1.0, c: 0.0 };
        assert_abs_diff_eq!(output_density(0.0, &vac), 1.0 / PI.sqrt(), epsilon = 1e-15);
        assert_eq!(output_density(0.0, &HeraldedState { a: 0.0, c: 1.0 }), 0.0);
        let flat = ConditionalHeraldedState { a_c: 0.3, b_c: 0.0, c_c: 0.7 };
        let st = HeraldedState { a: 0.3, c: 0.7 };
        for x in [-1.3, 0.0, 0.4, 2.2] {
            assert_abs_diff_eq!(conditional_density(x, &flat).unwrap(), output_density(x, &st), epsilon = 1e-15);
        }
        let bad = ConditionalHeraldedState { a_c: 0.5, b_c: 0.6, c_c: 0.5 };
        assert!(matches!(conditional_density(0.0, &bad), Err(Error::InvalidState(_))));
    }

    #[test]
    fn success_probability_rises_from_vacuum_value() {
        // extra input photons add to the click rate at low transmissivity
        let (ch, qs) = setup(0.1, 0.05, 2.0);
        let mut prev = 0.0;
        for i in 0..=120 {
            let p = heralded_state(i as f64 * 0.01, &ch, &qs).unwrap().1.p_succ;
            assert!(p > prev, "p_succ not increasing at alpha = {}", i as f64 * 0.01);
            prev = p;
        }
    }

    proptest! {
        #[test]
        fn states_are_physical(
            alpha in 0.0f64..1.2,
            t in 1e-4f64..1.0,
            eps_tm in 0.0f64..0.2,
            g in 1.0f64..10.0,
            k in 0usize..4,
        ) {
            let (ch, qs) = setup(t, eps_tm, g);
            let (st, p) = heralded_state(alpha, &ch, &qs).unwrap();
            prop_assert!((0.0..=1.0).contains(&st.a));
            prop_assert!((st.a + st.c - 1.0).abs() < 1e-15);
            prop_assert!(p.p_succ > 0.0 && p.p_succ <= 1.0);
            let (cs, _) = conditional_state(k, alpha, &ch, &qs).unwrap();
            prop_assert!(cs.a_c * cs.c_c >= cs.b_c * cs.b_c - 1e-12);
            prop_assert!((0.0..=1.0).contains(&cs.a_c));
        }
    }
}
