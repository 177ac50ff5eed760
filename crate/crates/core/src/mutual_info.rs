//! Alice-Bob mutual information from homodyne differential entropies.
//!
//! Every density handled here has the form `f(x) = q(x) e^{-x^2} / sqrt(pi)`
//! with a nonnegative prefactor `q`. Entropy routines take `q` so that the
//! Gauss-Hermite scheme can absorb the Gaussian weight exactly.

use std::f64::consts::{LN_2, PI, SQRT_2};

use gauss_quad::GaussHermite;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{ChannelParams, ScissorParams};
use crate::scissor::{conditional_states, heralded_state, ConditionalHeraldedState, HeraldedState};

/// Normalization tolerance applied before an entropy is accepted.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-6;

/// Densities below this are treated as exactly zero.
const DENSITY_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum QuadratureScheme {
    /// Composite Simpson on `[-half_width, half_width]` with an odd node count.
    Simpson { half_width: f64, nodes: usize },
    GaussHermite { order: usize },
}

#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    scheme: QuadratureScheme,
    nodes: Vec<f64>,
    /// For Gauss-Hermite these multiply `e^{-x^2}`; for Simpson they are plain.
    weights: Vec<f64>,
}

impl QuadratureGrid {
    pub fn simpson(half_width: f64, nodes: usize) -> Result<Self> {
        if nodes < 3 || nodes % 2 == 0 {
            return Err(Error::Config(format!("Simpson node count must be odd and >= 3, got {nodes}")));
        }
        if !(half_width >= 6.0) || !half_width.is_finite() {
            return Err(Error::Config(format!("quadrature half-width must be >= 6, got {half_width}")));
        }
        let h = 2.0 * half_width / (nodes - 1) as f64;
        let xs = (0..nodes).map(|i| -half_width + i as f64 * h).collect();
        let ws = (0..nodes)
            .map(|i| {
                let m = if i == 0 || i == nodes - 1 {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                m * h / 3.0
            })
            .collect();
        Ok(Self { scheme: QuadratureScheme::Simpson { half_width, nodes }, nodes: xs, weights: ws })
    }

    pub fn gauss_hermite(order: usize) -> Result<Self> {
        let rule = GaussHermite::new(order)
            .map_err(|_| Error::Config(format!("Gauss-Hermite order must be >= 2, got {order}")))?;
        let (nodes, weights) = rule.as_node_weight_pairs().iter().copied().unzip();
        Ok(Self { scheme: QuadratureScheme::GaussHermite { order }, nodes, weights })
    }

    pub fn from_scheme(scheme: QuadratureScheme) -> Result<Self> {
        match scheme {
            QuadratureScheme::Simpson { half_width, nodes } => Self::simpson(half_width, nodes),
            QuadratureScheme::GaussHermite { order } => Self::gauss_hermite(order),
        }
    }

    pub fn scheme(&self) -> QuadratureScheme {
        self.scheme
    }

    /// Same scheme at twice the resolution.
    pub fn refined(&self) -> Result<Self> {
        match self.scheme {
            QuadratureScheme::Simpson { half_width, nodes } => Self::simpson(half_width, 2 * nodes - 1),
            QuadratureScheme::GaussHermite { order } => Self::gauss_hermite(2 * order),
        }
    }

    /// `integral of q(x) e^{-x^2} / sqrt(pi)`.
    pub fn integrate_density<Q: Fn(f64) -> f64>(&self, q: Q) -> f64 {
        match self.scheme {
            QuadratureScheme::Simpson { .. } => self
                .nodes
                .iter()
                .zip(&self.weights)
                .map(|(&x, &w)| w * q(x) * (-x * x).exp())
                .sum::<f64>()
                / PI.sqrt(),
            QuadratureScheme::GaussHermite { .. } => {
                self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * q(x)).sum::<f64>() / PI.sqrt()
            }
        }
    }
}

impl Default for QuadratureGrid {
    fn default() -> Self {
        Self::simpson(10.0, 4001).expect("default grid is valid")
    }
}

/// Differential entropy in bits of `f(x) = q(x) e^{-x^2} / sqrt(pi)`.
pub fn differential_entropy<Q: Fn(f64) -> f64>(q: Q, grid: &QuadratureGrid) -> Result<f64> {
    let integral = grid.integrate_density(&q);
    if (integral - 1.0).abs() > NORMALIZATION_TOLERANCE {
        return Err(Error::NotNormalized { integral, tolerance: NORMALIZATION_TOLERANCE });
    }
    // -f log2 f = e^{-x^2}/sqrt(pi) * q * (x^2/ln2 - log2(q/sqrt(pi)))
    let h = grid.integrate_density(|x| {
        let qx = q(x);
        if qx <= 0.0 || qx * (-x * x).exp() / PI.sqrt() < DENSITY_FLOOR {
            return 0.0;
        }
        qx * (x * x / LN_2 - (qx / PI.sqrt()).log2())
    });
    Ok(h)
}

/// `H(X_B)` of the unconditional heralded output.
pub fn entropy_xb(state: &HeraldedState, grid: &QuadratureGrid) -> Result<f64> {
    let (a, c) = (state.a, state.c);
    differential_entropy(|x| a + 2.0 * c * x * x, grid)
}

/// Differential entropy of one conditional homodyne density.
pub fn conditional_entropy(state: &ConditionalHeraldedState, grid: &QuadratureGrid) -> Result<f64> {
    state.validate()?;
    let s = *state;
    differential_entropy(|x| (s.a_c + 2.0 * SQRT_2 * s.b_c * x + 2.0 * s.c_c * x * x).max(0.0), grid)
}

/// `H(X_B|X_A)`: uniform average over the four symbols.
pub fn entropy_xb_given_xa(states: &[ConditionalHeraldedState; 4], grid: &QuadratureGrid) -> Result<f64> {
    let hs: Vec<f64> = states
        .par_iter()
        .map(|s| conditional_entropy(s, grid))
        .collect::<Result<_>>()?;
    Ok(0.25 * hs.iter().sum::<f64>())
}

/// `I_AB = H(X_B) - H(X_B|X_A)`, clamped at zero.
pub fn mutual_information(
    alpha: f64,
    ch: &ChannelParams,
    qs: &ScissorParams,
    grid: &QuadratureGrid,
) -> Result<f64> {
    let (state, _) = heralded_state(alpha, ch, qs)?;
    let conditionals = conditional_states(alpha, ch, qs)?;
    let i = entropy_xb(&state, grid)? - entropy_xb_given_xa(&conditionals, grid)?;
    Ok(i.max(0.0))
}

/// Mutual information of a binary-input Gaussian channel: equiprobable means
/// `+-mean`, common `variance`.
pub fn binary_gaussian_mutual_information(mean: f64, variance: f64, grid: &QuadratureGrid) -> Result<f64> {
    if !(variance > 0.0) {
        return Err(crate::error::domain(format!("variance must be > 0, got {variance}")));
    }
    // rescale to unit-1/2 variance, where N(y; m, 1/2) = e^{-m^2 + 2my} e^{-y^2}/sqrt(pi)
    let m = mean / (2.0 * variance).sqrt();
    let h_b = differential_entropy(|y| (-m * m).exp() * (2.0 * m * y).cosh(), grid)?;
    let h_c = differential_entropy(|y| (-m * m + 2.0 * m * y).exp(), grid)?;
    Ok((h_b - h_c).max(0.0))
}
