//! Closed-form statistics of the aggregation-phase phase deviation: the CFO,
//! noise and mobility variance components, the resulting RMSE, the CDF of
//! the absolute deviation, and the computation rates.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::model::{MobilityModel, SystemConfig};

/// E|ε_cfo|² = 4π² m² T_s² σ²_cfo.
pub fn var_cfo(m: usize, symbol_dur: f64, cfo_var: f64) -> f64 {
    let m = m as f64;
    4.0 * PI * PI * m * m * symbol_dur * symbol_dur * cfo_var
}

/// How the channel amplitude enters the small-noise phase variance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoiseVarianceForm {
    /// `σ²/(2a)`, amplitude to the first power as in the published
    /// derivation.
    #[default]
    Linear,
    /// `σ²/(2a²)`, the textbook small-noise phase variance. Identical to
    /// `Linear` for unit amplitudes.
    Squared,
}

/// E|ε_noise|² as the sum of the three per-step phase-noise variances
/// (BS reception at t2, node receptions at t3 and t1).
pub fn var_noise(noise_var_bs: f64, noise_var_ue: f64, amp_ul_t2: f64, amp_dl_t3: f64, amp_dl_t1: f64) -> f64 {
    var_noise_with(NoiseVarianceForm::Linear, noise_var_bs, noise_var_ue, amp_ul_t2, amp_dl_t3, amp_dl_t1)
}

pub fn var_noise_with(
    form: NoiseVarianceForm,
    noise_var_bs: f64,
    noise_var_ue: f64,
    amp_ul_t2: f64,
    amp_dl_t3: f64,
    amp_dl_t1: f64,
) -> f64 {
    let den = |a: f64| match form {
        NoiseVarianceForm::Linear => 2.0 * a,
        NoiseVarianceForm::Squared => 2.0 * a * a,
    };
    noise_var_bs / den(amp_ul_t2) + noise_var_ue / den(amp_dl_t3) + noise_var_ue / den(amp_dl_t1)
}

/// Timing parameters that set the mobility exposure of a node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Timing {
    pub guard_ul: f64,
    pub guard_dl: f64,
    pub packet_dur: f64,
    pub symbol_dur: f64,
}

impl From<&SystemConfig> for Timing {
    fn from(c: &SystemConfig) -> Self {
        Self { guard_ul: c.guard_ul, guard_dl: c.guard_dl, packet_dur: c.packet_dur, symbol_dur: c.symbol_dur }
    }
}

/// τ = 2(g_u + g_d + (2K + 1 − k) T_p) + m T_s, the total time over which
/// Doppler accumulates for node `k` on symbol `m`.
pub fn mobility_span(timing: Timing, k: usize, num_nodes: usize, m: usize) -> f64 {
    let steps = (2 * num_nodes + 1 - k) as f64;
    2.0 * (timing.guard_ul + timing.guard_dl + steps * timing.packet_dur) + m as f64 * timing.symbol_dur
}

/// Fixed speed with a uniform path angle (Jakes): (2π² v² / λ²) τ².
pub fn var_mob_fixed(speed: f64, wavelength: f64, k: usize, num_nodes: usize, m: usize, timing: Timing) -> f64 {
    let tau = mobility_span(timing, k, num_nodes, m);
    2.0 * PI * PI * speed * speed / (wavelength * wavelength) * tau * tau
}

/// Rayleigh speed with mean v̄ and a uniform path angle: the radial speed is
/// Gaussian with variance 2v̄²/π, giving (8π v̄² / λ²) τ².
pub fn var_mob_rayleigh(mean_speed: f64, wavelength: f64, k: usize, num_nodes: usize, m: usize, timing: Timing) -> f64 {
    let tau = mobility_span(timing, k, num_nodes, m);
    8.0 * PI * mean_speed * mean_speed / (wavelength * wavelength) * tau * tau
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceBreakdown {
    pub var_cfo: f64,
    pub var_noise: f64,
    pub var_mob: f64,
    /// σ_{k,m}, the predicted RMSE.
    pub sigma: f64,
}

impl VarianceBreakdown {
    fn from_parts(var_cfo: f64, var_noise: f64, var_mob: f64) -> Self {
        Self { var_cfo, var_noise, var_mob, sigma: (var_cfo + var_noise + var_mob).sqrt() }
    }

    pub fn total(&self) -> f64 {
        self.var_cfo + self.var_noise + self.var_mob
    }
}

/// Predicted RMSE of node `k` (1-based) on symbol `m`.
pub fn rmse_theory(k: usize, m: usize, config: &SystemConfig) -> VarianceBreakdown {
    rmse_theory_with(NoiseVarianceForm::Linear, k, m, config)
}

pub fn rmse_theory_with(form: NoiseVarianceForm, k: usize, m: usize, config: &SystemConfig) -> VarianceBreakdown {
    let timing = Timing::from(config);
    let lambda = config.wavelength();
    let kk = config.num_nodes;
    let vc = var_cfo(m, config.symbol_dur, config.cfo_var);
    let vn = var_noise_with(
        form,
        config.noise_var_bs(),
        config.noise_var_ue(),
        config.amp_ul.get(k),
        config.amp_dl.get(k),
        config.amp_dl.get(k),
    );
    let vm = match config.mobility {
        MobilityModel::Static => 0.0,
        MobilityModel::FixedSpeed { speed } => var_mob_fixed(speed, lambda, k, kk, m, timing),
        MobilityModel::RayleighSpeed { mean_speed } => var_mob_rayleigh(mean_speed, lambda, k, kk, m, timing),
    };
    VarianceBreakdown::from_parts(vc, vn, vm)
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// P(|deviation| ≤ θ) = 2Φ(θ/σ) − 1 for a zero-mean Gaussian deviation.
///
/// With σ = 0 the deviation is identically zero and the CDF is a step.
pub fn cdf_abs_deviation(theta: f64, sigma: f64) -> f64 {
    if theta <= 0.0 {
        return 0.0;
    }
    if sigma == 0.0 {
        return 1.0;
    }
    // 2Φ(x) − 1 = erf(x/√2), written through erfc to keep the tail accurate.
    1.0 - libm::erfc(theta / sigma * FRAC_1_SQRT_2)
}

/// OAC computation rate in functions/(s·Hz):
/// `M T_ofdm / (2g_u + g_d + 2(K + 1) T_p + (M − 1) T_s)`.
pub fn rate_oac(num_symbols: usize, num_nodes: usize, ofdm_dur: f64, timing: Timing) -> f64 {
    let m = num_symbols as f64;
    let busy = 2.0 * timing.guard_ul
        + timing.guard_dl
        + 2.0 * (num_nodes as f64 + 1.0) * timing.packet_dur
        + (m - 1.0) * timing.symbol_dur;
    m * ofdm_dur / busy
}

/// First-communicate-then-compute baseline, r_eff / (Q K).
pub fn rate_traditional(spectral_eff: f64, quantization_bits: u32, num_nodes: usize) -> f64 {
    spectral_eff / (quantization_bits as f64 * num_nodes as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SPEED_OF_LIGHT;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    fn timing() -> Timing {
        Timing::from(&SystemConfig::baseline())
    }

    fn fig3(num_nodes: usize, cfo_var: f64, mean_speed: f64) -> SystemConfig {
        SystemConfig {
            num_nodes,
            cfo_var,
            mobility: MobilityModel::RayleighSpeed { mean_speed },
            ..SystemConfig::baseline()
        }
    }

    #[test]
    fn cfo_examples() {
        let ts = 18.75e-6;
        assert_eq!(var_cfo(0, ts, 1000.0), 0.0);
        assert!(rel(var_cfo(100, ts, 1000.0), 0.138_791_311_890_319_1) < 1e-9);
        assert!(rel(var_cfo(20, ts, 1000.0), 5.551_652_475_612_765e-3) < 1e-9);
    }

    #[test]
    fn noise_examples() {
        assert!(rel(var_noise(1e-3, 1e-3, 1.0, 1.0, 1.0), 1.5e-3) < 1e-12);
        assert!(rel(var_noise(0.1, 0.01, 1.0, 1.0, 1.0), 0.06) < 1e-12);
        assert_eq!(var_noise(0.0, 0.0, 1.0, 1.0, 1.0), 0.0);
        // The two forms agree at unit amplitude and diverge otherwise.
        let a = var_noise_with(NoiseVarianceForm::Linear, 0.1, 0.1, 0.5, 0.5, 0.5);
        let b = var_noise_with(NoiseVarianceForm::Squared, 0.1, 0.1, 0.5, 0.5, 0.5);
        assert!(rel(a, 0.3) < 1e-12 && rel(b, 0.6) < 1e-12);
    }

    #[test]
    fn mobility_examples() {
        let t = timing();
        assert_eq!(var_mob_fixed(0.0, 1.0 / 6.0, 1, 20, 0, t), 0.0);
        assert_eq!(var_mob_rayleigh(0.0, 1.0 / 6.0, 1, 20, 0, t), 0.0);
        assert!(rel(mobility_span(t, 1, 20, 0), 1.564e-3) < 1e-12);
        assert!(rel(mobility_span(t, 1, 20, 20), 1.939e-3) < 1e-12);
        assert!(rel(var_mob_fixed(1.5, 1.0 / 6.0, 1, 20, 0, t), 3.911_003_975_228_106e-3) < 1e-9);
        assert!(rel(var_mob_rayleigh(1.5, 1.0 / 6.0, 1, 20, 20, t), 7.653_859_693_799_432e-3) < 1e-9);

        let (v, lambda) = (0.7, 0.2);
        let tau = mobility_span(t, 3, 9, 17);
        let jakes = 0.5 * (std::f64::consts::TAU * v * tau / lambda).powi(2);
        assert!(rel(var_mob_fixed(v, lambda, 3, 9, 17, t), jakes) < 1e-12);
        let ratio = var_mob_rayleigh(v, lambda, 3, 9, 17, t) / var_mob_fixed(v, lambda, 3, 9, 17, t);
        assert!(rel(ratio, 4.0 / PI) < 1e-12);
    }

    #[test]
    fn rmse_examples() {
        let zero = SystemConfig {
            cfo_var: 0.0,
            mobility: MobilityModel::Static,
            snr_ue_db: f64::INFINITY,
            snr_bs_db: f64::INFINITY,
            ..SystemConfig::baseline()
        };
        assert!(rmse_theory(1, 50, &zero).sigma < 1e-15);

        let c = fig3(20, 1000.0, 1.5);
        let b = rmse_theory(1, 20, &c);
        assert!(rel(b.sigma, 0.121_309_987_846_063_14) < 1e-9, "{b:?}");
        assert!(rel(b.var_mob, 7.664_460_675_599_222e-3) < 1e-9);
        let b = rmse_theory(1, 100, &c);
        assert!(rel(b.sigma, 0.405_463_845_660_086_64) < 1e-9, "{b:?}");
        assert!((b.sigma.to_degrees() - 23.23).abs() < 0.01);
        assert!(rel(b.sigma * b.sigma, b.total()) < 1e-12);

        // With c = 3e8 the same numbers move by well under 0.1 %.
        let c3 = SystemConfig { speed_of_light: 3e8, ..c.clone() };
        assert!(rel(rmse_theory(1, 100, &c3).sigma, rmse_theory(1, 100, &c).sigma) < 1e-3);
        assert_eq!(c.speed_of_light, SPEED_OF_LIGHT);
    }

    #[test]
    fn cdf_examples() {
        assert_eq!(cdf_abs_deviation(0.0, 0.3), 0.0);
        assert!(cdf_abs_deviation(1e3, 0.3) > 1.0 - 1e-15);
        // 2Φ(0.2618/0.4054) − 1
        assert!((cdf_abs_deviation(0.261_80, 0.405_4) - 0.481_579_416_803_422_2).abs() < 1e-9);
        assert_eq!(cdf_abs_deviation(0.0, 0.0), 0.0);
        assert_eq!(cdf_abs_deviation(0.1, 0.0), 1.0);
    }

    #[test]
    fn normal_cdf_reference_values() {
        // Values of Φ from standard tables (scipy.stats.norm.cdf).
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-15);
        assert!((normal_cdf(1.0) - 0.841_344_746_068_542_9).abs() < 1e-12);
        assert!((normal_cdf(-2.0) - 0.022_750_131_948_179_2).abs() < 1e-12);
        assert!((normal_cdf(-8.0) - 6.220_960_574_271_785e-16).abs() < 1e-20);
    }

    #[test]
    fn rate_examples() {
        let t = timing();
        let ofdm = SystemConfig::baseline().ofdm_dur;
        assert!(rel(rate_oac(1, 5, ofdm, t), 0.061_050_061_050_061_05) < 1e-9);
        assert!(rel(rate_oac(100, 5, ofdm, t), 0.782_748_229_032_131_8) < 1e-9);
        assert!(rate_oac(100_000, 5, ofdm, t) < 8.0 / 9.0);
        assert!(rel(rate_traditional(4.0, 8, 5), 0.1) < 1e-15);
        assert!(rel(rate_traditional(4.0, 8, 20), 0.025) < 1e-15);
        assert_eq!(rate_traditional(4.0, 8, 10), 2.0 * rate_traditional(4.0, 8, 20));
        assert!(rate_oac(100, 5, ofdm, t) > rate_traditional(4.0, 8, 5));
    }

    #[test]
    fn oac_rate_monotone_in_m() {
        let t = timing();
        let ofdm = SystemConfig::baseline().ofdm_dur;
        let rates: Vec<_> = (1..=1000).map(|m| rate_oac(m, 5, ofdm, t)).collect();
        assert!(rates.windows(2).all(|w| w[1] > w[0]));
        assert!(rates.iter().all(|&r| r < ofdm / t.symbol_dur));
    }

    proptest! {
        #[test]
        fn rmse_monotone(
            k_total in 1usize..40,
            cfo_var in 0.0f64..2000.0,
            speed in 0.0f64..3.0,
            snr in 0.0f64..40.0,
            fixed in any::<bool>(),
        ) {
            let mobility = if fixed { MobilityModel::FixedSpeed { speed } } else { MobilityModel::RayleighSpeed { mean_speed: speed } };
            let c = SystemConfig { num_nodes: k_total, cfo_var, mobility, snr_ue_db: snr, snr_bs_db: snr, ..SystemConfig::baseline() };
            for k in 1..=k_total {
                for m in 0..60 {
                    let s = rmse_theory(k, m, &c).sigma;
                    prop_assert!(rmse_theory(k, m + 1, &c).sigma >= s);
                    if k < k_total {
                        prop_assert!(rmse_theory(k + 1, m, &c).sigma <= s);
                    }
                }
            }
        }

        #[test]
        fn cfo_variance_ignores_k(k1 in 1usize..200, k2 in 1usize..200, m in 0usize..500, cfo_var in 0.0f64..5000.0) {
            let a = SystemConfig { num_nodes: k1, cfo_var, ..SystemConfig::baseline() };
            let b = SystemConfig { num_nodes: k2, cfo_var, ..SystemConfig::baseline() };
            prop_assert_eq!(rmse_theory(1, m, &a).var_cfo, rmse_theory(1, m, &b).var_cfo);
        }

        #[test]
        fn cdf_monotone(x in 1e-3f64..5.0, dx in 1e-3f64..1.0, sigma in 0.02f64..1.0, ds in 1e-3f64..1.0) {
            // Keep θ/σ away from the range where the CDF rounds to 1.
            let (theta, dt) = (x * sigma, dx * sigma);
            prop_assert!(cdf_abs_deviation(theta + dt, sigma) > cdf_abs_deviation(theta, sigma));
            prop_assert!(cdf_abs_deviation(theta, sigma + ds) < cdf_abs_deviation(theta, sigma));
            let p = cdf_abs_deviation(theta, sigma);
            prop_assert!((0.0..=1.0).contains(&p));
        }
    }
}
