//! QPSK constellation algebra.
//!
//! The entangled source is `sum_k sqrt(lambda_k) |phi_k>|phi_k>`, where `|phi_k>`
//! collects the Fock components `n = k (mod 4)` of a coherent state of
//! amplitude `alpha`. Alice's projective basis is
//! `|psi_k> = 1/2 sum_m e^{-i(2k+1) m pi/4} |phi_m>`, for which
//! `<psi_k|Psi> = |alpha_k>/2` with `alpha_k = alpha e^{i(2k+1) pi/4}`.
//!
//! The annihilation operator maps `|phi_m>` onto `|phi_{m-1}>`, so every
//! quadrature moment of Alice's mode reduces to 4x4 algebra in the
//! `{|phi_m>}` basis. Ratios `lambda_{m-1}/lambda_m` are computed from the
//! reduced series `s_m = sum_n alpha^{8n} / (4n+m)!`, which keeps them finite
//! and exact down to `alpha = 0`.

use std::f64::consts::FRAC_PI_4;

use num_complex::Complex64;

use crate::error::{domain, Error, Result};

/// Tail mass above which a truncated Fock expansion is rejected.
pub const FOCK_TAIL_TOLERANCE: f64 = 1e-8;

/// `s_m(alpha) = sum_n alpha^{8n} / (4n+m)!` for `m = 0..3`.
fn reduced_series(alpha: f64) -> [f64; 4] {
    let a8 = alpha.powi(8);
    let mut out = [0.0; 4];
    for (m, slot) in out.iter_mut().enumerate() {
        let mut term = 1.0 / factorial(m);
        let mut sum = term;
        let mut n = 0usize;
        loop {
            let base = (4 * n + m) as f64;
            term *= a8 / ((base + 1.0) * (base + 2.0) * (base + 3.0) * (base + 4.0));
            sum += term;
            n += 1;
            if term <= 1e-17 * sum {
                break;
            }
        }
        *slot = sum;
    }
    out
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Schmidt weights `lambda_k = e^{-alpha^2} sum_n alpha^{2(4n+k)} / (4n+k)!`.
pub fn lambdas(alpha: f64) -> [f64; 4] {
    let s = reduced_series(alpha);
    let a2 = alpha * alpha;
    let pre = (-a2).exp();
    [pre * s[0], pre * a2 * s[1], pre * a2.powi(2) * s[2], pre * a2.powi(3) * s[3]]
}

/// `alpha^2 lambda_{m-1} / lambda_m` for `m = 0..3` (index wraps, `lambda_{-1} = lambda_3`).
///
/// Equal to `<phi_m| a^dag a |phi_m>`. At `alpha = 0` this is `(0, 1, 2, 3)`.
pub fn ladder_ratios(alpha: f64) -> [f64; 4] {
    let s = reduced_series(alpha);
    [alpha.powi(8) * s[3] / s[0], s[0] / s[1], s[1] / s[2], s[2] / s[3]]
}

/// Lowering operator restricted to `span{|phi_m>}`: `a |phi_m> = L[m-1][m] |phi_{m-1}>`.
pub fn lowering_matrix(alpha: f64) -> [[f64; 4]; 4] {
    let r = ladder_ratios(alpha);
    let mut l = [[0.0; 4]; 4];
    l[3][0] = -r[0].sqrt();
    for m in 1..4 {
        l[m - 1][m] = r[m].sqrt();
    }
    l
}

/// Amplitudes `alpha e^{i(2k+1) pi/4}`.
pub fn amplitudes(alpha: f64) -> [Complex64; 4] {
    std::array::from_fn(|k| Complex64::from_polar(alpha, (2 * k + 1) as f64 * FRAC_PI_4))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    pub alpha: f64,
    pub alphas: [Complex64; 4],
    pub lambdas: [f64; 4],
}

impl Constellation {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha >= 0.0) || !alpha.is_finite() {
            return Err(domain(format!("alpha must be >= 0, got {alpha}")));
        }
        Ok(Self { alpha, alphas: amplitudes(alpha), lambdas: lambdas(alpha) })
    }
}

/// Fock coefficients of `|phi_k>` up to and including `n_cut`.
pub fn phi_fock_coeffs(alpha: f64, k: usize, n_cut: usize) -> Result<Vec<f64>> {
    let (coeffs, tail) = phi_fock_coeffs_with_tail(alpha, k, n_cut)?;
    if tail > FOCK_TAIL_TOLERANCE {
        return Err(Error::Truncation { tail, tolerance: FOCK_TAIL_TOLERANCE });
    }
    Ok(coeffs)
}

/// As [`phi_fock_coeffs`], also returning the norm mass beyond `n_cut`.
pub fn phi_fock_coeffs_with_tail(alpha: f64, k: usize, n_cut: usize) -> Result<(Vec<f64>, f64)> {
    if k > 3 {
        return Err(domain(format!("constellation index must be 0..3, got {k}")));
    }
    if n_cut < k {
        return Err(domain(format!("Fock cutoff {n_cut} below sector index {k}")));
    }
    if !(alpha >= 0.0) {
        return Err(domain(format!("alpha must be >= 0, got {alpha}")));
    }
    let s_k = reduced_series(alpha)[k];
    let mut coeffs = vec![0.0; n_cut + 1];
    // c_{4j+k} = (-1)^j alpha^{4j} / (sqrt((4j+k)!) sqrt(s_k))
    let mut n = k;
    let mut inv_sqrt_fact = 1.0 / factorial(k).sqrt();
    let mut power = 1.0;
    let mut sign = 1.0;
    let mut mass = 0.0;
    while n <= n_cut {
        let c = sign * power * inv_sqrt_fact / s_k.sqrt();
        coeffs[n] = c;
        mass += c * c;
        for step in 1..=4 {
            inv_sqrt_fact /= ((n + step) as f64).sqrt();
        }
        power *= alpha.powi(4);
        sign = -sign;
        n += 4;
    }
    Ok((coeffs, (1.0 - mass).max(0.0)))
}

/// Fock vector of `|psi_k> = 1/2 sum_m e^{-i(2k+1) m pi/4} |phi_m>`.
pub fn psi_fock_vector(alpha: f64, k: usize, n_cut: usize) -> Result<Vec<Complex64>> {
    let mut out = vec![Complex64::new(0.0, 0.0); n_cut + 1];
    // At alpha = 0 the sectors degenerate to their limit states |phi_m> = |m>.
    for m in 0..4.min(n_cut + 1) {
        let phase = psi_phase(k, m) * 0.5;
        for (slot, c) in out.iter_mut().zip(phi_fock_coeffs(alpha, m, n_cut)?) {
            *slot += phase * c;
        }
    }
    Ok(out)
}

/// `e^{-i(2k+1) m pi/4}`.
pub fn psi_phase(k: usize, m: usize) -> Complex64 {
    Complex64::from_polar(1.0, -(((2 * k + 1) * m) as f64) * FRAC_PI_4)
}

/// Matrix elements `G[k][l] = <psi_l| x^2 |psi_k>` and `N[k][l] = <psi_l| x |psi_k>`
/// with `x = a + a^dag`.
#[derive(Debug, Clone, PartialEq)]
pub struct PsiMatrixElements {
    pub g: [[Complex64; 4]; 4],
    pub n: [[Complex64; 4]; 4],
}

/// Evaluates `G` and `N` from the ladder identities `a|phi_m> ~ |phi_{m-1}>`.
pub fn psi_matrix_elements(alpha: f64) -> Result<PsiMatrixElements> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(domain(format!("alpha must be >= 0, got {alpha}")));
    }
    let low = lowering_matrix(alpha);
    let psi: [[Complex64; 4]; 4] = std::array::from_fn(|k| std::array::from_fn(|m| psi_phase(k, m) * 0.5));
    let apply = |v: &[Complex64; 4]| -> [Complex64; 4] {
        std::array::from_fn(|i| (0..4).map(|j| v[j] * low[i][j]).sum())
    };
    let inner = |u: &[Complex64; 4], v: &[Complex64; 4]| -> Complex64 {
        u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
    };
    let a_psi: [[Complex64; 4]; 4] = std::array::from_fn(|k| apply(&psi[k]));
    let a2_psi: [[Complex64; 4]; 4] = std::array::from_fn(|k| apply(&a_psi[k]));

    let mut g = [[Complex64::new(0.0, 0.0); 4]; 4];
    let mut n = g;
    for k in 0..4 {
        for l in 0..4 {
            n[k][l] = inner(&psi[l], &a_psi[k]) + inner(&a_psi[l], &psi[k]);
            let delta = if k == l { 1.0 } else { 0.0 };
            g[k][l] = inner(&psi[l], &a2_psi[k])
                + inner(&a2_psi[l], &psi[k])
                + 2.0 * inner(&a_psi[l], &a_psi[k])
                + delta;
        }
    }
    Ok(PsiMatrixElements { g, n })
}
