//! Flat UL/DL channel with Doppler, residual CFO and oscillator phase offset.
//!
//! One complex sample per packet or OFDM symbol. Phases are propagated
//! unwrapped; wrapping happens only where a phase is estimated or reported.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::model::NodeRealization;

pub type ComplexSample = Complex64;

/// θ^DL_{k,t} = θ^DL_{0,k} + 2π t v_k cos(α_k) / λ.
pub fn dl_phase(node: &NodeRealization, t: f64, wavelength: f64) -> f64 {
    node.dl_init_phase + doppler_phase(node, t, wavelength)
}

/// θ^UL_{k,t}; same Doppler term as the downlink, independent initial phase.
pub fn ul_phase(node: &NodeRealization, t: f64, wavelength: f64) -> f64 {
    node.ul_init_phase + doppler_phase(node, t, wavelength)
}

fn doppler_phase(node: &NodeRealization, t: f64, wavelength: f64) -> f64 {
    TAU * t * node.radial_speed() / wavelength
}

/// Rotation of the node oscillator relative to the BS at time `t`.
fn oscillator_phase(node: &NodeRealization, t: f64) -> f64 {
    TAU * node.cfo * t + node.phase_offset
}

/// Circularly-symmetric complex Gaussian sample with total variance `var`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, var: f64) -> ComplexSample {
    if var == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let s = (var / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}

/// Noiseless downlink: a^DL e^{j(θ^DL + 2π f_k t + φ_k)} x.
pub fn dl_propagate(node: &NodeRealization, t: f64, x: ComplexSample, wavelength: f64, amp: f64) -> ComplexSample {
    x * Complex64::from_polar(amp, dl_phase(node, t, wavelength) + oscillator_phase(node, t))
}

/// Noiseless uplink: a^UL e^{j(θ^UL − 2π f_k t − φ_k)} x.
pub fn ul_propagate(node: &NodeRealization, t: f64, x: ComplexSample, wavelength: f64, amp: f64) -> ComplexSample {
    x * Complex64::from_polar(amp, ul_phase(node, t, wavelength) - oscillator_phase(node, t))
}

/// Symbol received by node `node` for a BS transmission `x` at time `t`.
pub fn dl_receive<R: Rng + ?Sized>(
    node: &NodeRealization,
    t: f64,
    x: ComplexSample,
    noise_var: f64,
    rng: &mut R,
    wavelength: f64,
    amp: f64,
) -> ComplexSample {
    dl_propagate(node, t, x, wavelength, amp) + complex_gaussian(rng, noise_var)
}

/// Symbol received at the BS for a transmission `x` of `node` at time `t`.
pub fn ul_receive<R: Rng + ?Sized>(
    node: &NodeRealization,
    t: f64,
    x: ComplexSample,
    noise_var: f64,
    rng: &mut R,
    wavelength: f64,
    amp: f64,
) -> ComplexSample {
    ul_propagate(node, t, x, wavelength, amp) + complex_gaussian(rng, noise_var)
}

/// Reduces an angle to (−π, π].
pub fn wrap_phase(x: f64) -> f64 {
    let r = x - TAU * (x / TAU).round();
    if r <= -PI {
        r + TAU
    } else if r > PI {
        r - TAU
    } else {
        r
    }
}
