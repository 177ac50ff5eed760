//! Brute-force Fock-space simulation of the entanglement-based scheme.
//!
//! Nothing here reuses the closed forms of the other modules. The source is
//! built from a numerically partitioned coherent state, the thermal-loss
//! channel is a Gauss-Hermite average over displaced noise modes, and the
//! scissor is a pair of explicit beam splitters with a heralding projection.
//!
//! Alice's mode is only a spectator, so the channel acts on the four Schmidt
//! vectors of the source one at a time.

pub mod fock;

use gauss_quad::GaussHermite;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::covariance::CovarianceTriplet;
use crate::error::{domain, Error, Result};
use crate::params::{ChannelParams, ScissorParams};
use fock::{coherent_state, hermite_functions_01, x_element, x_squared_element, BeamSplitter, C};

pub const DEFAULT_FOCK_CUTOFF: usize = 30;
pub const DEFAULT_NOISE_NODES: usize = 12;
/// Largest norm mass the oracle may lose to truncation.
pub const ORACLE_TAIL_TOLERANCE: f64 = 1e-8;
/// Channel-referred excess noise up to which the 12x12 noise quadrature is validated.
pub const MAX_ORACLE_NOISE: f64 = 1.0;

type Qubit = [[C; 2]; 2];
const ZERO: C = C::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleSettings {
    pub n_cut: usize,
    pub noise_nodes: usize,
}

impl Default for OracleSettings {
    fn default() -> Self {
        Self { n_cut: DEFAULT_FOCK_CUTOFF, noise_nodes: DEFAULT_NOISE_NODES }
    }
}

/// Which detector of the scissor's output beam splitter clicks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HeraldPattern {
    D1Click,
    D2Click,
}

/// Two-mode source state `sum_k sqrt(lambda_k) |phi_k>|phi_k>`.
#[derive(Debug, Clone)]
pub struct EbState {
    pub n_cut: usize,
    /// Row-major `(n_cut+1) x (n_cut+1)` amplitudes of modes 0 and 1.
    pub amplitudes: Vec<f64>,
    /// Schmidt weights and Fock vectors; zero-weight sectors are omitted.
    pub schmidt: Vec<(f64, Vec<f64>)>,
    pub tail: f64,
}

pub fn build_eb_state(alpha: f64, n_cut: usize) -> Result<EbState> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(domain(format!("alpha must be >= 0, got {alpha}")));
    }
    let phase0 = C::from_polar(1.0, std::f64::consts::FRAC_PI_4);
    let (coh, tail) = coherent_state(phase0 * alpha, n_cut);
    if tail > ORACLE_TAIL_TOLERANCE {
        return Err(Error::Truncation { tail, tolerance: ORACLE_TAIL_TOLERANCE });
    }
    let d = n_cut + 1;
    let mut schmidt: Vec<(f64, Vec<f64>)> = Vec::with_capacity(4);
    for m in 0..4 {
        // the n = m (mod 4) sector of |alpha_0>, with its common phase e^{i m pi/4} removed
        let strip = C::from_polar(1.0, -(m as f64) * std::f64::consts::FRAC_PI_4);
        let sector: Vec<f64> = (0..d).map(|n| if n % 4 == m { (coh[n] * strip).re } else { 0.0 }).collect();
        let weight: f64 = sector.iter().map(|c| c * c).sum();
        if weight > 0.0 {
            let norm = weight.sqrt();
            schmidt.push((weight, sector.into_iter().map(|c| c / norm).collect()));
        }
    }
    let total: f64 = schmidt.iter().map(|(w, _)| w).sum();
    for (w, _) in schmidt.iter_mut() {
        *w /= total;
    }
    let mut amplitudes = vec![0.0; d * d];
    for (w, v) in &schmidt {
        let s = w.sqrt();
        for i in 0..d {
            if v[i] == 0.0 {
                continue;
            }
            for j in 0..d {
                amplitudes[i * d + j] += s * v[i] * v[j];
            }
        }
    }
    Ok(EbState { n_cut, amplitudes, schmidt, tail })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseBranch {
    pub beta: C,
    pub weight: f64,
}

/// Gauss-Hermite discretization of the thermal P-function
/// `exp(-|beta|^2 / (eps/2)) / (pi eps/2)`, `eps` referred to the channel output.
pub fn thermal_noise_ensemble(ch: &ChannelParams, nodes: usize) -> Result<Vec<NoiseBranch>> {
    let eps = ch.eps_channel()?;
    if eps == 0.0 {
        return Ok(vec![NoiseBranch { beta: ZERO, weight: 1.0 }]);
    }
    if eps > MAX_ORACLE_NOISE {
        return Err(domain(format!(
            "channel-referred excess noise {eps} exceeds the oracle's validated range (<= {MAX_ORACLE_NOISE})"
        )));
    }
    let rule = GaussHermite::new(nodes)
        .map_err(|_| Error::Config(format!("noise quadrature needs at least 2 nodes, got {nodes}")))?;
    let pts = rule.as_node_weight_pairs();
    let scale = (0.5 * eps).sqrt();
    let mut out = Vec::with_capacity(nodes * nodes);
    for &(x, wx) in pts {
        for &(y, wy) in pts {
            out.push(NoiseBranch { beta: C::new(x, y) * scale, weight: wx * wy / std::f64::consts::PI });
        }
    }
    let total: f64 = out.iter().map(|b| b.weight).sum();
    if (total - 1.0).abs() > 1e-10 {
        return Err(Error::Config(format!("noise quadrature weights sum to {total}, not 1")));
    }
    Ok(out)
}

/// Signal and Eve modes after the channel, one entry per noise branch and input.
#[derive(Debug, Clone)]
pub struct ChannelOutput {
    pub n_cut: usize,
    /// `(weight, states)`; each state is row-major `(signal, eve)`.
    pub branches: Vec<(f64, Vec<Vec<C>>)>,
    pub tail: f64,
}

/// Mixes each input with a coherent noise mode on a beam splitter of transmittance `T`.
pub fn apply_thermal_loss(
    inputs: &[Vec<C>],
    ch: &ChannelParams,
    ensemble: &[NoiseBranch],
    n_cut: usize,
) -> Result<ChannelOutput> {
    let d = n_cut + 1;
    if inputs.iter().any(|v| v.len() != d) {
        return Err(domain("channel input does not match the Fock cutoff"));
    }
    let bs = BeamSplitter::new(ch.transmissivity, 2 * n_cut);
    let results: Vec<(f64, Vec<Vec<C>>, f64)> = ensemble
        .par_iter()
        .map(|b| {
            let (noise, noise_tail) = coherent_state(b.beta, n_cut);
            let mut tail: f64 = noise_tail;
            let states = inputs
                .iter()
                .map(|v| {
                    let psi: Vec<C> = v.iter().flat_map(|x| noise.iter().map(move |y| x * y)).collect();
                    let (out, dropped) = bs.apply(&psi, d, d, d, d);
                    tail = tail.max(dropped);
                    out
                })
                .collect();
            (b.weight, states, tail)
        })
        .collect();
    let tail = results.iter().map(|r| r.2).fold(0.0, f64::max);
    let branches = results.into_iter().map(|(w, s, _)| (w, s)).collect();
    Ok(ChannelOutput { n_cut, branches, tail })
}

/// Herald Kraus operators `K_m : signal -> mode 3`, `m >= 1` photons at the clicking detector.
///
/// The single photon is split by a `mu` beam splitter into modes `c` and 3;
/// the signal and `c` meet on a 50:50 splitter whose outputs feed D1 and D2.
fn scissor_kraus(mu: f64, n_cut: usize, pattern: HeraldPattern) -> Vec<[Vec<f64>; 2]> {
    let d = n_cut + 1;
    let o = n_cut + 2;
    let bs = BeamSplitter::new(0.5, n_cut + 1);
    // ancilla amplitudes indexed [c][b3]
    let anc = [[0.0, (1.0 - mu).sqrt()], [mu.sqrt(), 0.0]];
    let mut kraus = vec![[vec![0.0; d], vec![0.0; d]]; o];
    for s in 0..d {
        for (c, row) in anc.iter().enumerate() {
            let mut psi = vec![ZERO; d * 2];
            psi[s * 2 + c] = C::new(1.0, 0.0);
            let (out, _) = bs.apply(&psi, d, 2, o, o);
            for (m, k) in kraus.iter_mut().enumerate().skip(1) {
                let amp = match pattern {
                    HeraldPattern::D1Click => out[m * o],
                    HeraldPattern::D2Click => out[m],
                }
                .re;
                for b3 in 0..2 {
                    k[b3][s] += row[b3] * amp;
                }
            }
        }
    }
    kraus.remove(0);
    kraus
}

/// Unnormalized herald blocks `Omega^{kl} = sum_m tr_E (K_m chi_k)(K_m chi_l)^dag` on mode 3.
pub fn apply_scissor_and_herald(out: &ChannelOutput, qs: &ScissorParams, pattern: HeraldPattern) -> Vec<Vec<Qubit>> {
    let d = out.n_cut + 1;
    let kraus = scissor_kraus(qs.mu, out.n_cut, pattern);
    let n_in = out.branches.first().map_or(0, |b| b.1.len());
    let partial: Vec<Vec<Vec<Qubit>>> = out
        .branches
        .par_iter()
        .map(|(w, states)| {
            let mut omega = vec![vec![[[ZERO; 2]; 2]; n_in]; n_in];
            for k in &kraus {
                // xi[i][b3][e]
                let xi: Vec<[Vec<C>; 2]> = states
                    .iter()
                    .map(|chi| {
                        std::array::from_fn(|b3| {
                            (0..d)
                                .map(|e| (0..d).map(|s| chi[s * d + e] * k[b3][s]).sum())
                                .collect()
                        })
                    })
                    .collect();
                for i in 0..n_in {
                    for j in 0..n_in {
                        for b in 0..2 {
                            for bp in 0..2 {
                                let v: C = xi[i][b].iter().zip(&xi[j][bp]).map(|(x, y)| x * y.conj()).sum();
                                omega[i][j][b][bp] += v * *w;
                            }
                        }
                    }
                }
            }
            omega
        })
        .collect();
    let mut total = vec![vec![[[ZERO; 2]; 2]; n_in]; n_in];
    for omega in partial {
        for i in 0..n_in {
            for j in 0..n_in {
                for b in 0..2 {
                    for bp in 0..2 {
                        total[i][j][b][bp] += omega[i][j][b][bp];
                    }
                }
            }
        }
    }
    total
}

/// Heralded state of Alice's mode 0 and the scissor output mode 3.
#[derive(Debug, Clone)]
pub struct HeraldedEb {
    pub n_cut: usize,
    /// Row-major over the index `2 i + b`, `i` Alice's photon number, `b` mode 3.
    pub rho: Vec<C>,
    pub p_ps: f64,
    pub tail: f64,
}

impl HeraldedEb {
    fn dim(&self) -> usize {
        2 * (self.n_cut + 1)
    }

    fn at(&self, i: usize, b: usize, j: usize, bp: usize) -> C {
        self.rho[(2 * i + b) * self.dim() + 2 * j + bp]
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|r| self.rho[r * self.dim() + r].re).sum()
    }

    /// Reduced state of mode 3.
    pub fn bob_state(&self) -> Qubit {
        let mut q = [[ZERO; 2]; 2];
        for i in 0..=self.n_cut {
            for b in 0..2 {
                for bp in 0..2 {
                    q[b][bp] += self.at(i, b, i, bp);
                }
            }
        }
        q
    }
}

pub fn heralded_eb_state(
    alpha: f64,
    ch: &ChannelParams,
    qs: &ScissorParams,
    settings: &OracleSettings,
    pattern: HeraldPattern,
) -> Result<HeraldedEb> {
    let n_cut = settings.n_cut;
    let eb = build_eb_state(alpha, n_cut)?;
    let inputs: Vec<Vec<C>> = eb.schmidt.iter().map(|(_, v)| v.iter().map(|&x| C::new(x, 0.0)).collect()).collect();
    let ensemble = thermal_noise_ensemble(ch, settings.noise_nodes)?;
    let out = apply_thermal_loss(&inputs, ch, &ensemble, n_cut)?;
    let omega = apply_scissor_and_herald(&out, qs, pattern);

    let p_ps: f64 = eb.schmidt.iter().enumerate().map(|(k, (w, _))| w * (omega[k][k][0][0] + omega[k][k][1][1]).re).sum();
    if !(p_ps > 1e-300) {
        return Err(Error::DegenerateHerald { p_ps });
    }
    let d = n_cut + 1;
    let dim = 2 * d;
    let mut rho = vec![ZERO; dim * dim];
    for (k, (wk, vk)) in eb.schmidt.iter().enumerate() {
        for (l, (wl, vl)) in eb.schmidt.iter().enumerate() {
            let s = (wk * wl).sqrt() / p_ps;
            for i in (0..d).filter(|&i| vk[i] != 0.0) {
                for j in (0..d).filter(|&j| vl[j] != 0.0) {
                    let a = s * vk[i] * vl[j];
                    for b in 0..2 {
                        for bp in 0..2 {
                            rho[(2 * i + b) * dim + 2 * j + bp] += omega[k][l][b][bp] * a;
                        }
                    }
                }
            }
        }
    }
    Ok(HeraldedEb { n_cut, rho, p_ps, tail: eb.tail.max(out.tail) })
}

/// Normalized mode-3 state and herald probability for a coherent input `alpha_k`.
pub fn heralded_pm_state(
    k: usize,
    alpha: f64,
    ch: &ChannelParams,
    qs: &ScissorParams,
    settings: &OracleSettings,
    pattern: HeraldPattern,
) -> Result<(Qubit, f64)> {
    if k > 3 {
        return Err(domain(format!("constellation index must be 0..3, got {k}")));
    }
    let amp = C::from_polar(alpha, (2 * k + 1) as f64 * std::f64::consts::FRAC_PI_4);
    let (input, tail) = coherent_state(amp, settings.n_cut);
    if tail > ORACLE_TAIL_TOLERANCE {
        return Err(Error::Truncation { tail, tolerance: ORACLE_TAIL_TOLERANCE });
    }
    let ensemble = thermal_noise_ensemble(ch, settings.noise_nodes)?;
    let out = apply_thermal_loss(&[input], ch, &ensemble, settings.n_cut)?;
    let omega = apply_scissor_and_herald(&out, qs, pattern);
    let q = omega[0][0];
    let p = (q[0][0] + q[1][1]).re;
    if !(p > 1e-300) {
        return Err(Error::DegenerateHerald { p_ps: p });
    }
    Ok(([[q[0][0] / p, q[0][1] / p], [q[1][0] / p, q[1][1] / p]], p))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleMoments {
    pub cm: CovarianceTriplet,
    pub mean_x0: f64,
    pub mean_x3: f64,
}

/// Quadrature moments of `rho03`; mode 3 carries at most one photon, so
/// `x3^2 = diag(1, 3)` there.
pub fn extract_moments(state: &HeraldedEb) -> OracleMoments {
    let d = state.n_cut + 1;
    let (mut vx, mut vy, mut vxy, mut mx0, mut mx3) = (ZERO, ZERO, ZERO, ZERO, ZERO);
    let x3 = [[0.0, 1.0], [1.0, 0.0]];
    let x3sq = [1.0, 3.0];
    for i in 0..d {
        for b in 0..2 {
            vy += state.at(i, b, i, b) * x3sq[b];
            for bp in 0..2 {
                mx3 += state.at(i, b, i, bp) * x3[bp][b];
            }
            for j in i.saturating_sub(2)..(i + 3).min(d) {
                // tr(rho X) = sum rho[r][c] X[c][r]
                vx += state.at(i, b, j, b) * x_squared_element(j, i);
                let x1 = x_element(j, i);
                if x1 != 0.0 {
                    mx0 += state.at(i, b, j, b) * x1;
                    for bp in 0..2 {
                        vxy += state.at(i, b, j, bp) * (x1 * x3[bp][b]);
                    }
                }
            }
        }
    }
    OracleMoments {
        cm: CovarianceTriplet { v_x: vx.re, v_y: vy.re, v_xy: vxy.re },
        mean_x0: mx0.re,
        mean_x3: mx3.re,
    }
}

/// Homodyne density of a mode-3 state, vacuum variance 1/2.
pub fn homodyne_density(state: &Qubit, x: f64) -> f64 {
    let h = hermite_functions_01(x);
    let mut f = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            f += (state[i][j] * h[i] * h[j]).re;
        }
    }
    f
}

/// Points at which closed-form and oracle homodyne densities are compared.
pub fn density_check_points() -> Vec<f64> {
    (0..21).map(|i| -5.0 + 0.5 * i as f64).collect()
}

/// One line of the closed-form versus oracle comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleCheckRow {
    pub quantity: String,
    pub closed_form: f64,
    pub oracle: f64,
    pub abs_diff: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl OracleCheckRow {
    fn new(quantity: impl Into<String>, closed_form: f64, oracle: f64, tolerance: f64) -> Self {
        let abs_diff = (closed_form - oracle).abs();
        Self { quantity: quantity.into(), closed_form, oracle, abs_diff, tolerance, pass: abs_diff <= tolerance }
    }
}

/// Compares herald probability, heralded states, conditional densities and the
/// covariance triplet against the Fock simulation.
pub fn oracle_check(
    alpha: f64,
    ch: &ChannelParams,
    qs: &ScissorParams,
    settings: &OracleSettings,
    tolerance: f64,
) -> Result<Vec<OracleCheckRow>> {
    use crate::covariance::cm_triplet;
    use crate::scissor::{conditional_density, conditional_state, heralded_state};

    let (state, prob) = heralded_state(alpha, ch, qs)?;
    let cm = cm_triplet(alpha, ch, qs)?;
    let eb = heralded_eb_state(alpha, ch, qs, settings, HeraldPattern::D1Click)?;
    let moments = extract_moments(&eb);
    let bob = eb.bob_state();

    let mut rows = vec![
        OracleCheckRow::new("p_succ", prob.p_succ, 2.0 * eb.p_ps, tolerance),
        OracleCheckRow::new("a", state.a, bob[0][0].re, tolerance),
        OracleCheckRow::new("c", state.c, bob[1][1].re, tolerance),
        OracleCheckRow::new("v_x", cm.v_x, moments.cm.v_x, tolerance),
        OracleCheckRow::new("v_y", cm.v_y, moments.cm.v_y, tolerance),
        OracleCheckRow::new("v_xy", cm.v_xy, moments.cm.v_xy, tolerance),
    ];
    for k in 0..4 {
        let (cs, p_c) = conditional_state(k, alpha, ch, qs)?;
        let (q, p_o) = heralded_pm_state(k, alpha, ch, qs, settings, HeraldPattern::D1Click)?;
        rows.push(OracleCheckRow::new(format!("p_ps[{k}]"), p_c, p_o, tolerance));
        rows.push(OracleCheckRow::new(format!("a_c[{k}]"), cs.a_c, q[0][0].re, tolerance));
        rows.push(OracleCheckRow::new(format!("b_c[{k}]"), cs.b_c, q[0][1].re, tolerance));
        rows.push(OracleCheckRow::new(format!("c_c[{k}]"), cs.c_c, q[1][1].re, tolerance));
        let mut worst = (0.0f64, 0.0f64, 0.0f64);
        for x in density_check_points() {
            let f_c = conditional_density(x, &cs)?;
            let f_o = homodyne_density(&q, x);
            if (f_c - f_o).abs() >= (worst.0 - worst.1).abs() {
                worst = (f_c, f_o, x);
            }
        }
        rows.push(OracleCheckRow::new(format!("density[{k}] worst x={}", worst.2), worst.0, worst.1, tolerance));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::{amplitudes, psi_fock_vector};
    use approx::assert_abs_diff_eq;

    fn setup(t: f64, eps_tm: f64, g: f64) -> (ChannelParams, ScissorParams) {
        (
            ChannelParams::from_transmissivity(t, eps_tm).unwrap(),
            ScissorParams::from_gain(g).unwrap(),
        )
    }

    #[test]
    fn eb_state_vacuum_and_norm() {
        let s = build_eb_state(0.0, 10).unwrap();
        assert_eq!(s.amplitudes[0], 1.0);
        assert!(s.amplitudes[1..].iter().all(|&a| a == 0.0));
        let s = build_eb_state(0.5, 30).unwrap();
        let norm: f64 = s.amplitudes.iter().map(|a| a * a).sum();
        assert_abs_diff_eq!(norm, 1.0, epsilon = 1e-10);
        assert!(build_eb_state(4.0, 10).is_err());
    }

    #[test]
    fn eb_state_matches_constellation_form() {
        let alpha = 0.7;
        let n = 30;
        let eb = build_eb_state(alpha, n).unwrap();
        let psis: Vec<Vec<C>> = (0..4).map(|k| psi_fock_vector(alpha, k, n).unwrap()).collect();
        let cohs: Vec<Vec<C>> = amplitudes(alpha).iter().map(|&a| coherent_state(a, n).0).collect();
        let d = n + 1;
        let mut err: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                let rhs: C = (0..4).map(|k| psis[k][i] * cohs[k][j] * 0.5).sum();
                err = err.max((rhs - eb.amplitudes[i * d + j]).norm());
            }
        }
        assert!(err < 1e-9, "{err}");
        // reduced mean photon number of mode 1
        let mean: f64 = (0..d).map(|j| (0..d).map(|i| eb.amplitudes[i * d + j].powi(2)).sum::<f64>() * j as f64).sum();
        assert_abs_diff_eq!(mean, alpha * alpha, epsilon = 1e-8);
    }

    #[test]
    fn noise_outside_validated_range_is_refused() {
        let (ch, _) = setup(0.995, 0.025, 1.0);
        assert!(matches!(thermal_noise_ensemble(&ch, 12), Err(Error::Domain(_))));
    }

    #[test]
    fn noise_ensemble_properties() {
        let pure = ChannelParams::from_transmissivity(0.3, 0.0).unwrap();
        assert_eq!(thermal_noise_ensemble(&pure, 12).unwrap().len(), 1);
        let (ch, _) = setup(0.3, 0.2, 1.0);
        assert!(matches!(thermal_noise_ensemble(&ch, 1), Err(Error::Config(_))));
        // added photons on vacuum: (1 - T) eps / 2
        let n = 30;
        let ens = thermal_noise_ensemble(&ch, 12).unwrap();
        let vac = {
            let mut v = vec![ZERO; n + 1];
            v[0] = C::new(1.0, 0.0);
            v
        };
        let out = apply_thermal_loss(&[vac], &ch, &ens, n).unwrap();
        let d = n + 1;
        let mean: f64 = out
            .branches
            .iter()
            .map(|(w, s)| w * (0..d).map(|i| (0..d).map(|e| s[0][i * d + e].norm_sqr()).sum::<f64>() * i as f64).sum::<f64>())
            .sum();
        let eps = ch.eps_channel().unwrap();
        assert_abs_diff_eq!(mean, (1.0 - ch.transmissivity) * eps / 2.0, epsilon = 1e-8);
    }

    #[test]
    fn identity_channel_leaves_state_alone() {
        let n = 20;
        let (v, _) = coherent_state(C::new(0.3, 0.4), n);
        let out = apply_thermal_loss(&[v.clone()], &ChannelParams::identity(), &[NoiseBranch { beta: ZERO, weight: 1.0 }], n).unwrap();
        let d = n + 1;
        for i in 0..d {
            assert!((out.branches[0].1[0][i * d] - v[i]).norm() < 1e-14);
        }
    }

    #[test]
    fn vacuum_herald() {
        let (ch, qs) = setup(0.5, 0.0, 2.0);
        let st = heralded_eb_state(0.0, &ch, &qs, &OracleSettings::default(), HeraldPattern::D1Click).unwrap();
        assert_abs_diff_eq!(st.p_ps, qs.mu / 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(st.trace(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(st.rho[0].re, 1.0, epsilon = 1e-12);
        let m = extract_moments(&st);
        assert_abs_diff_eq!(m.cm.v_x, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(m.cm.v_y, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(m.cm.v_xy, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn herald_patterns_agree_and_moments_are_centered() {
        let (ch, qs) = setup(0.5, 0.05, 2.0);
        let s = OracleSettings { n_cut: 20, noise_nodes: 8 };
        let a = heralded_eb_state(0.5, &ch, &qs, &s, HeraldPattern::D1Click).unwrap();
        let b = heralded_eb_state(0.5, &ch, &qs, &s, HeraldPattern::D2Click).unwrap();
        assert_abs_diff_eq!(a.p_ps, b.p_ps, epsilon = 1e-12);
        assert_abs_diff_eq!(a.trace(), 1.0, epsilon = 1e-10);
        let m = extract_moments(&a);
        assert!(m.mean_x0.abs() < 1e-10 && m.mean_x3.abs() < 1e-10);
        let q = a.bob_state();
        for x in [-3.0, -0.5, 0.0, 1.2] {
            assert!(homodyne_density(&q, x) >= 0.0);
        }
    }
}
