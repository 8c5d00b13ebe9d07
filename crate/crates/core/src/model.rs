//! Configuration and realization types shared by the simulator and the
//! closed-form analysis.
//!
//! All durations are in seconds, frequencies in Hz, angles in radians and
//! SNRs in dB. The residual-CFO variance is in Hz².
//!
//! The reference OFDM numerology uses a useful symbol of 1/60000 s (about
//! 16.667 µs, sometimes misprinted as "1/60e3 µs") with a cyclic prefix of
//! one eighth of that, giving an 18.75 µs symbol and packet duration.

use std::f64::consts::TAU;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Relative tolerance for the `T_s = T_ofdm + T_cp` consistency check.
const SYMBOL_DUR_RTOL: f64 = 1e-9;

/// Converts an SNR in dB to the corresponding noise variance for unit
/// signal power.
pub fn snr_db_to_noise_var(snr_db: f64) -> f64 {
    10f64.powf(-snr_db / 10.0)
}

/// Node speed model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MobilityModel {
    Static,
    /// Every node moves at the same speed (m/s); only the path angle is random.
    FixedSpeed { speed: f64 },
    /// Per-node speed drawn from a Rayleigh law with the given mean (m/s).
    RayleighSpeed { mean_speed: f64 },
}

impl MobilityModel {
    /// Speed parameter (v or v̄); zero for a static channel.
    pub fn speed(&self) -> f64 {
        match *self {
            MobilityModel::Static => 0.0,
            MobilityModel::FixedSpeed { speed } => speed,
            MobilityModel::RayleighSpeed { mean_speed } => mean_speed,
        }
    }

    /// Same model family with a different speed parameter. `Static` becomes
    /// `FixedSpeed` when given a nonzero speed.
    pub fn with_speed(&self, speed: f64) -> Self {
        match self {
            MobilityModel::RayleighSpeed { .. } => MobilityModel::RayleighSpeed { mean_speed: speed },
            _ if speed == 0.0 => MobilityModel::Static,
            _ => MobilityModel::FixedSpeed { speed },
        }
    }

    /// `Static` and `FixedSpeed { speed: 0 }` describe the same channel.
    pub fn is_static(&self) -> bool {
        self.speed() == 0.0
    }
}

/// Per-node channel amplitude, constant over time.
#[derive(Debug, Clone, PartialEq)]
pub enum AmplitudeProfile {
    Uniform(f64),
    /// Index 0 holds node k = 1.
    PerNode(Vec<f64>),
}

impl AmplitudeProfile {
    /// Amplitude of node `k` (1-based).
    pub fn get(&self, k: usize) -> f64 {
        match self {
            AmplitudeProfile::Uniform(a) => *a,
            AmplitudeProfile::PerNode(v) => v[k - 1],
        }
    }

    fn check(&self, name: &'static str, num_nodes: usize, out: &mut Vec<ConfigViolation>) {
        match self {
            AmplitudeProfile::Uniform(a) => {
                if !(a.is_finite() && *a > 0.0) {
                    out.push(ConfigViolation::new(name, format!("amplitude must be positive and finite, got {a}")));
                }
            }
            AmplitudeProfile::PerNode(v) => {
                if v.len() != num_nodes {
                    out.push(ConfigViolation::new(
                        name,
                        format!("expected {num_nodes} per-node amplitudes, got {}", v.len()),
                    ));
                }
                if let Some((i, a)) = v.iter().enumerate().find(|(_, a)| !(a.is_finite() && **a > 0.0)) {
                    out.push(ConfigViolation::new(
                        name,
                        format!("amplitude of node {} must be positive and finite, got {a}", i + 1),
                    ));
                }
            }
        }
    }
}

impl Default for AmplitudeProfile {
    fn default() -> Self {
        AmplitudeProfile::Uniform(1.0)
    }
}

/// A single violated configuration invariant.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigViolation {
    pub field: &'static str,
    pub reason: String,
}

impl ConfigViolation {
    fn new(field: &'static str, reason: impl Into<String>) -> Self {
        Self { field, reason: reason.into() }
    }
}

impl fmt::Display for ConfigViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.reason)
    }
}

/// Every protocol, waveform and impairment parameter of one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    /// K
    pub num_nodes: usize,
    /// M
    pub num_oac_symbols: usize,
    pub carrier_freq: f64,
    /// Minimum node response time g_u.
    pub guard_ul: f64,
    /// Base-station response time g_d.
    pub guard_dl: f64,
    /// Duration of one handshake packet, T_p.
    pub packet_dur: f64,
    pub ofdm_dur: f64,
    pub cp_dur: f64,
    /// T_s; must equal `ofdm_dur + cp_dur`.
    pub symbol_dur: f64,
    pub theta_desired: f64,
    pub snr_ue_db: f64,
    pub snr_bs_db: f64,
    /// Residual CFO variance in Hz².
    pub cfo_var: f64,
    pub mobility: MobilityModel,
    pub amp_ul: AmplitudeProfile,
    pub amp_dl: AmplitudeProfile,
    pub speed_of_light: f64,
    /// Q, used only by the first-communicate-then-compute rate baseline.
    pub quantization_bits: u32,
    /// r_eff in bits/(s·Hz), same baseline.
    pub spectral_eff: f64,
}

impl SystemConfig {
    /// Reference scenario: K = 5, M = 100, 1.8 GHz carrier, 16 µs guards,
    /// 60 kHz subcarrier spacing with a 1/8 cyclic prefix, T_p = T_s,
    /// 30/30 dB SNRs, σ²_cfo = 100 Hz² and Rayleigh speeds with mean 0.1 m/s.
    pub fn baseline() -> Self {
        let ofdm_dur = 1.0 / 60_000.0;
        let cp_dur = ofdm_dur / 8.0;
        let symbol_dur = ofdm_dur + cp_dur;
        Self {
            num_nodes: 5,
            num_oac_symbols: 100,
            carrier_freq: 1.8e9,
            guard_ul: 16e-6,
            guard_dl: 16e-6,
            packet_dur: symbol_dur,
            ofdm_dur,
            cp_dur,
            symbol_dur,
            theta_desired: 0.0,
            snr_ue_db: 30.0,
            snr_bs_db: 30.0,
            cfo_var: 100.0,
            mobility: MobilityModel::RayleighSpeed { mean_speed: 0.1 },
            amp_ul: AmplitudeProfile::Uniform(1.0),
            amp_dl: AmplitudeProfile::Uniform(1.0),
            speed_of_light: SPEED_OF_LIGHT,
            quantization_bits: 8,
            spectral_eff: 4.0,
        }
    }

    /// Sets the OFDM and CP durations and derives T_s from them.
    pub fn with_ofdm_timing(mut self, ofdm_dur: f64, cp_dur: f64) -> Self {
        self.ofdm_dur = ofdm_dur;
        self.cp_dur = cp_dur;
        self.symbol_dur = ofdm_dur + cp_dur;
        self
    }

    /// λ = c / f_c.
    pub fn wavelength(&self) -> f64 {
        self.speed_of_light / self.carrier_freq
    }

    pub fn noise_var_ue(&self) -> f64 {
        snr_db_to_noise_var(self.snr_ue_db)
    }

    pub fn noise_var_bs(&self) -> f64 {
        snr_db_to_noise_var(self.snr_bs_db)
    }

    /// Collects every violated invariant.
    pub fn violations(&self) -> Vec<ConfigViolation> {
        let mut out = Vec::new();
        if self.num_nodes == 0 {
            out.push(ConfigViolation::new("num_nodes", "at least one node is required"));
        }
        if self.num_oac_symbols == 0 {
            out.push(ConfigViolation::new("num_oac_symbols", "at least one OAC symbol is required"));
        }
        let positive = [
            ("carrier_freq", self.carrier_freq),
            ("guard_ul", self.guard_ul),
            ("guard_dl", self.guard_dl),
            ("packet_dur", self.packet_dur),
            ("ofdm_dur", self.ofdm_dur),
            ("cp_dur", self.cp_dur),
            ("symbol_dur", self.symbol_dur),
            ("speed_of_light", self.speed_of_light),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                out.push(ConfigViolation::new(name, format!("must be positive and finite, got {value}")));
            }
        }
        let sum = self.ofdm_dur + self.cp_dur;
        if (self.symbol_dur - sum).abs() > SYMBOL_DUR_RTOL * sum.abs() {
            out.push(ConfigViolation::new(
                "symbol_dur",
                format!("symbol duration {} differs from ofdm_dur + cp_dur = {sum}", self.symbol_dur),
            ));
        }
        if !(self.cfo_var.is_finite() && self.cfo_var >= 0.0) {
            out.push(ConfigViolation::new("cfo_var", format!("must be non-negative, got {}", self.cfo_var)));
        }
        if !self.theta_desired.is_finite() {
            out.push(ConfigViolation::new("theta_desired", format!("must be finite, got {}", self.theta_desired)));
        }
        // +inf dB is a noiseless link (zero noise variance).
        for (name, value) in [("snr_ue", self.snr_ue_db), ("snr_bs", self.snr_bs_db)] {
            if value.is_nan() || value == f64::NEG_INFINITY {
                out.push(ConfigViolation::new(name, format!("must be a number or +inf, got {value}")));
            }
        }
        let speed = self.mobility.speed();
        if !(speed.is_finite() && speed >= 0.0) {
            out.push(ConfigViolation::new("mobility", format!("speed must be non-negative, got {speed}")));
        }
        self.amp_ul.check("amp_ul", self.num_nodes, &mut out);
        self.amp_dl.check("amp_dl", self.num_nodes, &mut out);
        if self.quantization_bits == 0 {
            out.push(ConfigViolation::new("quantization_bits", "must be at least 1"));
        }
        if !(self.spectral_eff.is_finite() && self.spectral_eff > 0.0) {
            out.push(ConfigViolation::new("spectral_eff", format!("must be positive, got {}", self.spectral_eff)));
        }
        let lambda = self.wavelength();
        if out.is_empty() && !(lambda.is_finite() && lambda > 0.0) {
            out.push(ConfigViolation::new("carrier_freq", format!("wavelength {lambda} is not finite and positive")));
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(v))
        }
    }
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self::baseline()
    }
}

/// One node's drawn impairments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeRealization {
    /// 1-based node id.
    pub index: usize,
    /// Residual CFO f_k in Hz.
    pub cfo: f64,
    /// Oscillator phase offset φ_k.
    pub phase_offset: f64,
    pub speed: f64,
    /// Path angle α_k relative to the BS.
    pub path_angle: f64,
    pub dl_init_phase: f64,
    pub ul_init_phase: f64,
}

impl NodeRealization {
    /// A node with no impairments at all.
    pub fn ideal(index: usize) -> Self {
        Self { index, cfo: 0.0, phase_offset: 0.0, speed: 0.0, path_angle: 0.0, dl_init_phase: 0.0, ul_init_phase: 0.0 }
    }

    /// Radial speed v_k cos(α_k).
    pub fn radial_speed(&self) -> f64 {
        self.speed * self.path_angle.cos()
    }

    pub fn is_well_formed(&self) -> bool {
        let in_circle = |x: f64| (0.0..TAU).contains(&x);
        self.index >= 1
            && in_circle(self.path_angle)
            && in_circle(self.phase_offset)
            && self.speed >= 0.0
            && self.cfo.is_finite()
            && self.dl_init_phase.is_finite()
            && self.ul_init_phase.is_finite()
    }
}

/// The M parameters s_{k,0..M} one node contributes to the aggregation.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterVector(Vec<Complex64>);

impl ParameterVector {
    pub fn new(symbols: Vec<Complex64>) -> Result<Self> {
        if let Some(m) = symbols.iter().position(|s| !(s.re.is_finite() && s.im.is_finite())) {
            return Err(Error::NonFiniteParameter(m));
        }
        Ok(Self(symbols))
    }

    /// `len` unit-valued symbols.
    pub fn ones(len: usize) -> Self {
        Self(vec![Complex64::new(1.0, 0.0); len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols(&self) -> &[Complex64] {
        &self.0
    }
}

const PILOT_MODULUS_TOL: f64 = 1e-12;

/// Unit-modulus pilot symbol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PilotSymbol(Complex64);

impl PilotSymbol {
    pub fn new(value: Complex64) -> Result<Self> {
        let modulus = value.norm();
        if (modulus - 1.0).abs() > PILOT_MODULUS_TOL {
            return Err(Error::NonUnitPilot(modulus));
        }
        Ok(Self(value))
    }

    pub fn from_phase(phase: f64) -> Self {
        Self(Complex64::from_polar(1.0, phase))
    }

    pub fn value(&self) -> Complex64 {
        self.0
    }
}

impl Default for PilotSymbol {
    fn default() -> Self {
        Self(Complex64::new(1.0, 0.0))
    }
}
