//! Harvest-then-transmit physical layer.
//!
//! A device harvests `eta * tau * P * |h|^2` joules from the H-AP beam, spends
//! `E_cir` on circuitry, and transmits the rest at a fixed rate `R` once the
//! uplink SNR reaches the threshold `phi = 2^R - 1`.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid_param, Error, Result};

/// Feasibility gain applied to `|h|^2 |g|^2`.
///
/// Obtained by bisecting until the median feature dimension at 10 m equals 8
/// under the default device distributions (10^4 draws, seed 20_240_601); see
/// [`crate::experiments::calibrate_budget_gain`].
pub const CALIBRATED_BUDGET_GAIN: f64 = 96.455_696_826_538_77;

/// Converts a level in dBm to watts.
pub fn to_watts(level_dbm: f64) -> f64 {
    10f64.powf((level_dbm - 30.0) / 10.0)
}

/// Physical-layer constants of the WPCN.
#[derive(Debug, Clone, PartialEq)]
pub struct WpcnParams {
    /// H-AP antenna count `K`.
    pub antennas: usize,
    /// Energy conversion efficiency `eta` in `[0, 1]`.
    pub eta: f64,
    /// Harvest duration `tau` in seconds.
    pub tau: f64,
    /// H-AP transmit power in dBm.
    pub power_dbm: f64,
    /// Receiver noise power in dBm.
    pub noise_dbm: f64,
    /// Circuit energy consumption `E_cir` in joules.
    pub circuit_energy: f64,
    /// Fixed data rate `R` in bits/s/Hz.
    pub rate: f64,
    /// Path-loss exponent.
    pub path_loss_exponent: f64,
    /// Linear attenuation at the 1 m reference distance.
    pub ref_loss: f64,
    /// Feasibility gain `G >= 1` on `|h|^2 |g|^2`.
    pub budget_gain: f64,
}

impl Default for WpcnParams {
    fn default() -> Self {
        Self {
            antennas: 10,
            eta: 0.8,
            tau: 1.0,
            power_dbm: 35.0,
            noise_dbm: -80.0,
            circuit_energy: 0.5e-3,
            rate: 2.0,
            path_loss_exponent: 2.0,
            ref_loss: 1e-3,
            budget_gain: CALIBRATED_BUDGET_GAIN,
        }
    }
}

impl WpcnParams {
    pub fn validate(&self) -> Result<()> {
        if self.antennas < 1 {
            return Err(invalid_param("K", "must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.eta) {
            return Err(invalid_param(
                "eta",
                format!("{} is outside [0, 1]", self.eta),
            ));
        }
        positive("tau", self.tau)?;
        positive("R", self.rate)?;
        positive("alpha", self.path_loss_exponent)?;
        positive("ref_loss", self.ref_loss)?;
        if !(self.circuit_energy >= 0.0 && self.circuit_energy.is_finite()) {
            return Err(invalid_param("E_cir", "must be finite and >= 0"));
        }
        if !(self.budget_gain >= 1.0 && self.budget_gain.is_finite()) {
            return Err(invalid_param("budget_gain", "must be finite and >= 1"));
        }
        if !self.power_dbm.is_finite() {
            return Err(invalid_param("P_dbm", "must be finite"));
        }
        if !self.noise_dbm.is_finite() {
            return Err(invalid_param("sigma2_dbm", "must be finite"));
        }
        Ok(())
    }

    pub fn power_watts(&self) -> f64 {
        to_watts(self.power_dbm)
    }

    pub fn noise_watts(&self) -> f64 {
        to_watts(self.noise_dbm)
    }

    /// SNR threshold `phi = 2^R - 1`.
    pub fn phi(&self) -> f64 {
        self.rate.exp2() - 1.0
    }

    /// `rho = eta * P / sigma^2`.
    pub fn rho(&self) -> f64 {
        self.eta * self.power_watts() / self.noise_watts()
    }

    /// `xi = E_cir / sigma^2`.
    pub fn xi(&self) -> f64 {
        self.circuit_energy / self.noise_watts()
    }

    /// Per-entry channel variance `Omega = ref_loss * d^-alpha`.
    pub fn omega(&self, distance: f64) -> f64 {
        self.ref_loss * distance.powf(-self.path_loss_exponent)
    }

    /// `tau*rho*G*|h|^2*|g|^2 - xi*|g|^2`, the shared numerator of the SNR,
    /// transmission time and bit budget.
    pub fn energy_surplus(&self, h_norm2: f64, g_norm2: f64) -> f64 {
        self.tau * self.rho() * self.budget_gain * h_norm2 * g_norm2 - self.xi() * g_norm2
    }
}

fn positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(invalid_param(
            name,
            format!("{value} must be finite and > 0"),
        ))
    }
}

/// Downlink and uplink channel vectors for one device.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    h: Vec<Complex64>,
    g: Vec<Complex64>,
    distance: f64,
    h_norm2: f64,
    g_norm2: f64,
}

impl ChannelRealization {
    pub fn new(h: Vec<Complex64>, g: Vec<Complex64>, distance: f64) -> Result<Self> {
        if h.len() != g.len() || h.is_empty() {
            return Err(Error::InvalidInput(format!(
                "channel vectors must have equal nonzero length (got {} and {})",
                h.len(),
                g.len()
            )));
        }
        let h_norm2 = h.iter().map(|c| c.norm_sqr()).sum();
        let g_norm2 = g.iter().map(|c| c.norm_sqr()).sum();
        Ok(Self {
            h,
            g,
            distance,
            h_norm2,
            g_norm2,
        })
    }

    /// Single-antenna realization with real amplitudes chosen so the squared
    /// norms equal the given gains.
    pub fn from_gains(h_norm2: f64, g_norm2: f64, distance: f64) -> Self {
        Self::new(
            vec![Complex64::new(h_norm2.sqrt(), 0.0)],
            vec![Complex64::new(g_norm2.sqrt(), 0.0)],
            distance,
        )
        .expect("single-entry vectors")
    }

    pub fn h(&self) -> &[Complex64] {
        &self.h
    }

    pub fn g(&self) -> &[Complex64] {
        &self.g
    }

    pub fn distance(&self) -> f64 {
        self.distance
    }

    pub fn h_norm2(&self) -> f64 {
        self.h_norm2
    }

    pub fn g_norm2(&self) -> f64 {
        self.g_norm2
    }
}

/// Draws i.i.d. Rayleigh downlink and uplink vectors at distance `distance`.
///
/// Every entry is circularly symmetric complex Gaussian with total variance
/// `Omega`, i.e. real and imaginary parts are each `N(0, Omega / 2)`.
pub fn sample_channel<R: Rng + ?Sized>(
    rng: &mut R,
    params: &WpcnParams,
    distance: f64,
) -> Result<ChannelRealization> {
    if !(distance > 0.0 && distance.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "device distance must be positive, got {distance}"
        )));
    }
    let scale = (params.omega(distance) / 2.0).sqrt();
    let draw = |rng: &mut R| {
        (0..params.antennas)
            .map(|_| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(scale * re, scale * im)
            })
            .collect::<Vec<_>>()
    };
    let h = draw(rng);
    let g = draw(rng);
    ChannelRealization::new(h, g, distance)
}

/// Raw harvested energy `eta * tau * P * |h|^2` (no budget gain).
pub fn harvested_energy(params: &WpcnParams, ch: &ChannelRealization) -> f64 {
    params.eta * params.tau * params.power_watts() * ch.h_norm2
}

/// Uplink SNR when the surplus energy is spread over `tau_tx` seconds.
/// Negative when harvested energy does not cover the circuit.
pub fn snr(params: &WpcnParams, ch: &ChannelRealization, tau_tx: f64) -> Result<f64> {
    if tau_tx.is_nan() || tau_tx <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "transmission time must be positive, got {tau_tx}"
        )));
    }
    Ok(params.energy_surplus(ch.h_norm2, ch.g_norm2) / tau_tx)
}

/// Time at which the SNR sits exactly at `phi`; 0 for infeasible devices.
pub fn transmission_time(params: &WpcnParams, ch: &ChannelRealization) -> f64 {
    (params.energy_surplus(ch.h_norm2, ch.g_norm2) / params.phi()).max(0.0)
}

/// Bits the device can push with its harvested energy: `R * tau'`.
pub fn bits_budget(params: &WpcnParams, ch: &ChannelRealization) -> f64 {
    params.rate * transmission_time(params, ch)
}
