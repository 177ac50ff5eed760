//! Dense truncated-Fock primitives.
//!
//! Beam-splitter convention: `b1 = sqrt(t) a1 + sqrt(1-t) a2`,
//! `b2 = -sqrt(1-t) a1 + sqrt(t) a2`. A coherent pair `|a>|b>` leaves as
//! `|sqrt(t) a + sqrt(1-t) b>|-sqrt(1-t) a + sqrt(t) b>`.

use num_complex::Complex64;

pub(crate) type C = Complex64;

/// Coherent state `|gamma>` on `0..=n_cut`, with the norm lost above the cutoff.
pub fn coherent_state(gamma: C, n_cut: usize) -> (Vec<C>, f64) {
    let mut v = Vec::with_capacity(n_cut + 1);
    let mut c = C::new((-0.5 * gamma.norm_sqr()).exp(), 0.0);
    for n in 0..=n_cut {
        v.push(c);
        c = c * gamma / ((n + 1) as f64).sqrt();
    }
    let kept: f64 = v.iter().map(|c| c.norm_sqr()).sum();
    (v, (1.0 - kept).max(0.0))
}

/// Two-mode beam splitter of transmittance `t`, acting on row-major states
/// `psi[n1 * d2 + n2]`.
#[derive(Debug, Clone)]
pub struct BeamSplitter {
    /// `blocks[N][j][n1]`: amplitude of `|j, N-j>` produced by `|n1, N-n1>`.
    blocks: Vec<Vec<Vec<f64>>>,
}

impl BeamSplitter {
    /// Covers every input with at most `max_photons` photons in total.
    pub fn new(t: f64, max_photons: usize) -> Self {
        // U = exp(theta (a1^dag a2 - a1 a2^dag)), cos(theta) = sqrt(t)
        let theta = t.sqrt().clamp(0.0, 1.0).acos();
        let blocks = (0..=max_photons).map(|total| block_exponential(total, theta)).collect();
        Self { blocks }
    }

    pub fn max_photons(&self) -> usize {
        self.blocks.len() - 1
    }

    /// Applies the splitter to a `d1 x d2` state and truncates the output to
    /// `o1 x o2`. Returns the output and the norm mass dropped by the truncation.
    pub fn apply(&self, psi: &[C], d1: usize, d2: usize, o1: usize, o2: usize) -> (Vec<C>, f64) {
        assert_eq!(psi.len(), d1 * d2);
        assert!(d1 + d2 - 2 <= self.max_photons(), "beam splitter table too small");
        let mut out = vec![C::new(0.0, 0.0); o1 * o2];
        let mut dropped = 0.0;
        for total in 0..=(d1 + d2 - 2) {
            let n1_lo = total.saturating_sub(d2 - 1);
            let n1_hi = total.min(d1 - 1);
            if n1_lo > n1_hi {
                continue;
            }
            let block = &self.blocks[total];
            for (j, row) in block.iter().enumerate() {
                let mut acc = C::new(0.0, 0.0);
                for n1 in n1_lo..=n1_hi {
                    let amp = psi[n1 * d2 + (total - n1)];
                    if amp != C::new(0.0, 0.0) {
                        acc += amp * row[n1];
                    }
                }
                let k = total - j;
                if j < o1 && k < o2 {
                    out[j * o2 + k] += acc;
                } else {
                    dropped += acc.norm_sqr();
                }
            }
        }
        (out, dropped)
    }
}

/// `exp(theta G)` restricted to `total` photons, `G` the real antisymmetric
/// generator in the basis `|n1, total - n1>`. Taylor series after scaling,
/// then repeated squaring.
fn block_exponential(total: usize, theta: f64) -> Vec<Vec<f64>> {
    let n = total + 1;
    let mut g = vec![vec![0.0; n]; n];
    for n1 in 0..total {
        // a1^dag a2 |n1, n2> = sqrt((n1+1) n2) |n1+1, n2-1>
        let v = (((n1 + 1) * (total - n1)) as f64).sqrt();
        g[n1 + 1][n1] = v;
        g[n1][n1 + 1] = -v;
    }
    let mut squarings = 0;
    let mut scale = theta;
    while scale * 2.0 * total as f64 > 0.25 && squarings < 60 {
        scale *= 0.5;
        squarings += 1;
    }
    let m: Vec<Vec<f64>> = g.iter().map(|row| row.iter().map(|x| x * scale).collect()).collect();
    let mut result = identity(n);
    let mut term = identity(n);
    for k in 1..=16 {
        term = matmul(&term, &m);
        for row in term.iter_mut() {
            for x in row.iter_mut() {
                *x /= k as f64;
            }
        }
        for (r, t) in result.iter_mut().zip(&term) {
            for (x, y) in r.iter_mut().zip(t) {
                *x += y;
            }
        }
    }
    for _ in 0..squarings {
        result = matmul(&result, &result);
    }
    result
}

fn identity(n: usize) -> Vec<Vec<f64>> {
    (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect()
}

fn matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut out = vec![vec![0.0; n]; n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i][k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..n {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

/// `<i| x^2 |j>` with `x = a + a^dag`, exact on the untruncated space.
pub fn x_squared_element(i: usize, j: usize) -> f64 {
    if i == j {
        (2 * i + 1) as f64
    } else if j == i + 2 {
        ((j * (j - 1)) as f64).sqrt()
    } else if i == j + 2 {
        ((i * (i - 1)) as f64).sqrt()
    } else {
        0.0
    }
}

/// `<i| x |j>` with `x = a + a^dag`.
pub fn x_element(i: usize, j: usize) -> f64 {
    if j == i + 1 {
        (j as f64).sqrt()
    } else if i == j + 1 {
        (i as f64).sqrt()
    } else {
        0.0
    }
}

/// Position-space Hermite functions `<x|0>` and `<x|1>` with vacuum variance 1/2.
pub fn hermite_functions_01(x: f64) -> [f64; 2] {
    let g = std::f64::consts::PI.powf(-0.25) * (-0.5 * x * x).exp();
    [g, std::f64::consts::SQRT_2 * x * g]
}
