//! Channel, scissor and protocol parameters.
//!
//! Excess noise is stored transmitter-referred (`eps_tm`); the channel-output
//! referred value is derived on demand.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Standard fiber attenuation in dB/km.
pub const DEFAULT_KAPPA_DB_PER_KM: f64 = 0.2;

/// `T = 10^(-kappa * L / 10)`.
pub fn transmissivity_from_length(length_km: f64, kappa: f64) -> Result<f64> {
    if !(length_km >= 0.0) || !length_km.is_finite() {
        return Err(domain(format!("fiber length must be >= 0 km, got {length_km}")));
    }
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(domain(format!("attenuation must be > 0 dB/km, got {kappa}")));
    }
    Ok(10f64.powf(-kappa * length_km / 10.0))
}

/// `F = 1/2 + T * eps_tm / 4`.
pub fn noise_factor(transmissivity: f64, eps_tm: f64) -> Result<f64> {
    check_transmissivity(transmissivity)?;
    check_eps(eps_tm)?;
    Ok(0.5 + 0.25 * transmissivity * eps_tm)
}

/// Scissor beam-splitter transmittance for gain `g`: `mu = 1/(1+g^2)`.
pub fn mu_from_gain(gain: f64) -> Result<f64> {
    if !(gain >= 1.0) || !gain.is_finite() {
        return Err(domain(format!("scissor gain must be >= 1, got {gain}")));
    }
    Ok(1.0 / (1.0 + gain * gain))
}

/// Inverse of [`mu_from_gain`]: `g = sqrt((1-mu)/mu)`.
pub fn gain_from_mu(mu: f64) -> Result<f64> {
    if !(mu > 0.0 && mu <= 0.5) {
        return Err(domain(format!("scissor transmittance must lie in (0, 1/2], got {mu}")));
    }
    Ok(((1.0 - mu) / mu).sqrt())
}

/// Channel-output referred excess noise -> transmitter referred.
pub fn eps_tm_from_channel(transmissivity: f64, eps: f64) -> Result<f64> {
    check_transmissivity(transmissivity)?;
    check_eps(eps)?;
    Ok((1.0 - transmissivity) * eps / transmissivity)
}

/// Transmitter referred excess noise -> channel-output referred.
///
/// Diverges as `T -> 1` for nonzero `eps_tm`; that case is rejected.
pub fn eps_channel_from_tm(transmissivity: f64, eps_tm: f64) -> Result<f64> {
    check_transmissivity(transmissivity)?;
    check_eps(eps_tm)?;
    if eps_tm == 0.0 {
        return Ok(0.0);
    }
    if transmissivity >= 1.0 {
        return Err(domain("channel-referred excess noise is unbounded at T = 1"));
    }
    Ok(transmissivity * eps_tm / (1.0 - transmissivity))
}

fn check_transmissivity(t: f64) -> Result<()> {
    if t > 0.0 && t <= 1.0 {
        Ok(())
    } else {
        Err(domain(format!("transmissivity must lie in (0, 1], got {t}")))
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if eps >= 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("excess noise must be >= 0, got {eps}")))
    }
}

/// Thermal-loss channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    pub length_km: f64,
    pub kappa_db_per_km: f64,
    pub transmissivity: f64,
    pub eps_tm: f64,
    pub noise_factor: f64,
}

impl ChannelParams {
    pub fn from_length(length_km: f64, kappa_db_per_km: f64, eps_tm: f64) -> Result<Self> {
        let transmissivity = transmissivity_from_length(length_km, kappa_db_per_km)?;
        Ok(Self {
            length_km,
            kappa_db_per_km,
            transmissivity,
            eps_tm,
            noise_factor: noise_factor(transmissivity, eps_tm)?,
        })
    }

    /// Channel given directly by its transmissivity. The length is back-filled
    /// assuming the default fiber attenuation.
    pub fn from_transmissivity(transmissivity: f64, eps_tm: f64) -> Result<Self> {
        let noise_factor = noise_factor(transmissivity, eps_tm)?;
        Ok(Self {
            length_km: -10.0 * transmissivity.log10() / DEFAULT_KAPPA_DB_PER_KM,
            kappa_db_per_km: DEFAULT_KAPPA_DB_PER_KM,
            transmissivity,
            eps_tm,
            noise_factor,
        })
    }

    /// Lossless, noiseless channel.
    pub fn identity() -> Self {
        Self {
            length_km: 0.0,
            kappa_db_per_km: DEFAULT_KAPPA_DB_PER_KM,
            transmissivity: 1.0,
            eps_tm: 0.0,
            noise_factor: 0.5,
        }
    }

    /// Excess noise referred to the channel output.
    pub fn eps_channel(&self) -> Result<f64> {
        eps_channel_from_tm(self.transmissivity, self.eps_tm)
    }

    /// Mean thermal photon number injected into the signal mode, `T * eps_tm / 2`.
    pub fn added_photons(&self) -> f64 {
        0.5 * self.transmissivity * self.eps_tm
    }
}

/// Quantum-scissor setting. Gain and transmittance are kept in sync.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScissorParams {
    pub gain: f64,
    pub mu: f64,
}

impl ScissorParams {
    pub fn from_gain(gain: f64) -> Result<Self> {
        Ok(Self { gain, mu: mu_from_gain(gain)? })
    }

    pub fn from_mu(mu: f64) -> Result<Self> {
        Ok(Self { gain: gain_from_mu(mu)?, mu })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolParams {
    /// Coherent amplitude of every constellation point.
    pub alpha: f64,
    /// Reconciliation efficiency.
    pub beta: f64,
    pub alpha_cap: Option<f64>,
}

impl ProtocolParams {
    pub fn new(alpha: f64, beta: f64, alpha_cap: Option<f64>) -> Result<Self> {
        if !(alpha >= 0.0) || !alpha.is_finite() {
            return Err(domain(format!("alpha must be >= 0, got {alpha}")));
        }
        if !(0.0..=1.0).contains(&beta) {
            return Err(domain(format!("beta must lie in [0, 1], got {beta}")));
        }
        if let Some(cap) = alpha_cap {
            if !(cap > 0.0) {
                return Err(domain(format!("alpha cap must be > 0, got {cap}")));
            }
        }
        Ok(Self { alpha, beta, alpha_cap })
    }

    /// Modulation variance `V_A = 2 alpha^2`.
    pub fn modulation_variance(&self) -> f64 {
        2.0 * self.alpha * self.alpha
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn transmissivity_examples() {
        assert_eq!(transmissivity_from_length(0.0, 0.2).unwrap(), 1.0);
        assert_abs_diff_eq!(transmissivity_from_length(100.0, 0.2).unwrap(), 0.01, epsilon = 1e-15);
        assert_abs_diff_eq!(transmissivity_from_length(50.0, 0.2).unwrap(), 0.1, epsilon = 1e-15);
        assert!(matches!(transmissivity_from_length(-1.0, 0.2), Err(crate::Error::Domain(_))));
    }

    #[test]
    fn noise_factor_examples() {
        assert_eq!(noise_factor(0.5, 0.0).unwrap(), 0.5);
        assert_abs_diff_eq!(noise_factor(1.0, 0.05).unwrap(), 0.5125, epsilon = 1e-15);
        assert_abs_diff_eq!(noise_factor(0.01, 0.05).unwrap(), 0.500125, epsilon = 1e-15);
    }

    #[test]
    fn mu_examples() {
        assert_eq!(mu_from_gain(1.0).unwrap(), 0.5);
        assert_abs_diff_eq!(mu_from_gain(2.0).unwrap(), 0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(mu_from_gain(3.0).unwrap(), 0.1, epsilon = 1e-15);
        assert!(mu_from_gain(0.9).is_err());
        assert_eq!(gain_from_mu(0.5).unwrap(), 1.0);
    }

    #[test]
    fn channel_from_length_caches_derived_values() {
        let ch = ChannelParams::from_length(100.0, 0.2, 0.05).unwrap();
        assert_abs_diff_eq!(ch.transmissivity, 0.01, epsilon = 1e-15);
        assert_abs_diff_eq!(ch.noise_factor, 0.500125, epsilon = 1e-15);
        let back = ChannelParams::from_transmissivity(ch.transmissivity, 0.05).unwrap();
        assert_abs_diff_eq!(back.length_km, 100.0, epsilon = 1e-9);
        assert!(ChannelParams::identity().eps_channel().unwrap() == 0.0);
        assert!(ChannelParams::from_transmissivity(1.0, 0.1).unwrap().eps_channel().is_err());
    }

    proptest! {
        #[test]
        fn gain_round_trip(g in 1.0f64..10.0) {
            let back = gain_from_mu(mu_from_gain(g).unwrap()).unwrap();
            prop_assert!((back - g).abs() < 1e-12);
        }

        #[test]
        fn eps_round_trip(t in 1e-6f64..0.999_999, eps_tm in 0.0f64..1.0) {
            let eps = eps_channel_from_tm(t, eps_tm).unwrap();
            let back = eps_tm_from_channel(t, eps).unwrap();
            prop_assert!((back - eps_tm).abs() < 1e-12 * (1.0 + eps_tm));
        }

        #[test]
        fn transmissivity_strictly_decreasing(l in 0.0f64..400.0, dl in 1e-3f64..50.0) {
            let a = transmissivity_from_length(l, 0.2).unwrap();
            let b = transmissivity_from_length(l + dl, 0.2).unwrap();
            prop_assert!(b < a);
        }
    }
}
