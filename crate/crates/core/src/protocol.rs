//! The four-step phase-coded-pilot handshake and the aggregation phase.
//!
//! Step 1: the BS broadcasts an uncoded pilot; every node estimates ψ¹.
//! Step 2: nodes answer in ascending order with the pilot rotated by ψ¹;
//! the BS estimates the round-trip phase ψ². Step 3: the BS feeds back
//! `p·e^{j(θ_desired − ψ²)}` in descending order and each node estimates ψ³.
//! Step 4: all nodes transmit `s_{k,m}·e^{jψ³}` simultaneously.
//!
//! Reversing the feedback order makes `t2 − t1 = t4 − t3` for every node,
//! so the residual CFO cancels exactly on the first aggregation symbol.

use num_complex::Complex64;
use rand::Rng;

use crate::channel::{self, ComplexSample};
use crate::error::{Error, Result};
use crate::model::{NodeRealization, ParameterVector, PilotSymbol, SystemConfig};

/// Reception instants of one node, relative to the request packet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeTiming {
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
    /// Reception of aggregation symbol m = 0.
    pub t4: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    timings: Vec<NodeTiming>,
    symbol_dur: f64,
}

impl Schedule {
    pub fn num_nodes(&self) -> usize {
        self.timings.len()
    }

    /// Timing of node `k` (1-based).
    pub fn node(&self, k: usize) -> Result<&NodeTiming> {
        k.checked_sub(1)
            .and_then(|i| self.timings.get(i))
            .ok_or(Error::NodeOutOfRange(k, self.timings.len()))
    }

    pub fn iter(&self) -> impl Iterator<Item = &NodeTiming> {
        self.timings.iter()
    }

    /// Instant at which aggregation symbol `m` of node `k` reaches the BS.
    pub fn oac_instant(&self, k: usize, m: usize) -> Result<f64> {
        Ok(self.node(k)?.t4 + m as f64 * self.symbol_dur)
    }
}

/// CFO-resilient multi-user schedule:
/// `t2 = g_u + k T_p`, `t3 = g_u + g_d + (2K + 1 − k) T_p`,
/// `t4 = 2 g_u + g_d + (2K + 1) T_p`.
pub fn build_schedule(config: &SystemConfig) -> Result<Schedule> {
    config.validate()?;
    let kk = config.num_nodes as f64;
    let (gu, gd, tp) = (config.guard_ul, config.guard_dl, config.packet_dur);
    let t4 = 2.0 * gu + gd + (2.0 * kk + 1.0) * tp;
    let timings = (1..=config.num_nodes)
        .map(|k| {
            let k = k as f64;
            NodeTiming { t1: 0.0, t2: gu + k * tp, t3: gu + gd + (2.0 * kk + 1.0 - k) * tp, t4 }
        })
        .collect();
    Ok(Schedule { timings, symbol_dur: config.symbol_dur })
}

/// ∠(p* r), wrapped to (−π, π].
pub fn estimate_phase(pilot: PilotSymbol, r: ComplexSample) -> Result<f64> {
    if r.re == 0.0 && r.im == 0.0 {
        return Err(Error::UndefinedPhase);
    }
    Ok(channel::wrap_phase((pilot.value().conj() * r).arg()))
}

/// Estimates of one node, with the phase perturbation each noise sample
/// caused (δ¹ at the node, δ² at the BS, δ³ at the node).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeEstimates {
    pub psi1: f64,
    pub psi2: f64,
    pub psi3: f64,
    pub noise_phase: [f64; 3],
}

impl NodeEstimates {
    /// ε_noise = δ³ − δ² − δ¹.
    pub fn noise_error(&self) -> f64 {
        let [d1, d2, d3] = self.noise_phase;
        d3 - d2 - d1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseEstimates {
    nodes: Vec<NodeEstimates>,
}

impl PhaseEstimates {
    pub fn node(&self, k: usize) -> Result<&NodeEstimates> {
        k.checked_sub(1)
            .and_then(|i| self.nodes.get(i))
            .ok_or(Error::NodeOutOfRange(k, self.nodes.len()))
    }

    pub fn iter(&self) -> impl Iterator<Item = &NodeEstimates> {
        self.nodes.iter()
    }
}

fn check_nodes(config: &SystemConfig, nodes: &[NodeRealization], schedule: &Schedule) -> Result<()> {
    if nodes.len() != config.num_nodes {
        return Err(Error::NodeCount { expected: config.num_nodes, got: nodes.len() });
    }
    if schedule.num_nodes() != config.num_nodes {
        return Err(Error::NodeCount { expected: config.num_nodes, got: schedule.num_nodes() });
    }
    if let Some(n) = nodes.iter().enumerate().find_map(|(i, n)| (n.index != i + 1).then_some(n)) {
        return Err(Error::NodeOutOfRange(n.index, config.num_nodes));
    }
    Ok(())
}

/// Phase offset between a noisy reception and its noiseless counterpart.
fn noise_phase(noisy: ComplexSample, clean: ComplexSample) -> f64 {
    (noisy * clean.conj()).arg()
}

/// Executes Steps 1–3 for every node with the default pilot `p = 1`.
pub fn run_sync_phase<R: Rng + ?Sized>(
    config: &SystemConfig,
    nodes: &[NodeRealization],
    schedule: &Schedule,
    rng: &mut R,
) -> Result<PhaseEstimates> {
    run_sync_phase_with_pilot(config, nodes, schedule, PilotSymbol::default(), rng)
}

pub fn run_sync_phase_with_pilot<R: Rng + ?Sized>(
    config: &SystemConfig,
    nodes: &[NodeRealization],
    schedule: &Schedule,
    pilot: PilotSymbol,
    rng: &mut R,
) -> Result<PhaseEstimates> {
    check_nodes(config, nodes, schedule)?;
    let lambda = config.wavelength();
    let (var_ue, var_bs) = (config.noise_var_ue(), config.noise_var_bs());
    let p = pilot.value();
    let mut est = vec![NodeEstimates { psi1: 0.0, psi2: 0.0, psi3: 0.0, noise_phase: [0.0; 3] }; nodes.len()];

    // Step 1: one broadcast request, received by every node.
    for (node, e) in nodes.iter().zip(est.iter_mut()) {
        let t = schedule.node(node.index)?.t1;
        let amp = config.amp_dl.get(node.index);
        let clean = channel::dl_propagate(node, t, p, lambda, amp);
        let r = clean + channel::complex_gaussian(rng, var_ue);
        e.psi1 = estimate_phase(pilot, r)?;
        e.noise_phase[0] = noise_phase(r, clean);
    }

    // Step 2: responses in ascending k.
    for (node, e) in nodes.iter().zip(est.iter_mut()) {
        let t = schedule.node(node.index)?.t2;
        let amp = config.amp_ul.get(node.index);
        let x = p * Complex64::from_polar(1.0, e.psi1);
        let clean = channel::ul_propagate(node, t, x, lambda, amp);
        let r = clean + channel::complex_gaussian(rng, var_bs);
        e.psi2 = estimate_phase(pilot, r)?;
        e.noise_phase[1] = noise_phase(r, clean);
    }

    // Step 3: feedback in descending k.
    for (node, e) in nodes.iter().zip(est.iter_mut()).rev() {
        let t = schedule.node(node.index)?.t3;
        let amp = config.amp_dl.get(node.index);
        let x = p * Complex64::from_polar(1.0, config.theta_desired - e.psi2);
        let clean = channel::dl_propagate(node, t, x, lambda, amp);
        let r = clean + channel::complex_gaussian(rng, var_ue);
        e.psi3 = estimate_phase(pilot, r)?;
        e.noise_phase[2] = noise_phase(r, clean);
    }

    Ok(PhaseEstimates { nodes: est })
}

/// Closed-form error components of one node and symbol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorBreakdown {
    pub cfo: f64,
    pub mobility: f64,
    pub noise: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OacOutcome {
    /// Superposed symbol ṽ_m at the BS, including BS noise.
    pub superposed: Vec<ComplexSample>,
    /// `per_node_dev[k - 1][m]`: wrapped φ⁴_{k,m} − θ_desired − ∠s_{k,m}.
    pub per_node_dev: Vec<Vec<f64>>,
    /// Same indexing as `per_node_dev`.
    pub breakdown: Option<Vec<Vec<ErrorBreakdown>>>,
}

impl OacOutcome {
    pub fn deviation(&self, k: usize, m: usize) -> f64 {
        self.per_node_dev[k - 1][m]
    }
}

/// Executes Step 4 for every symbol in `params` (one vector per node, all of
/// the same length).
///
/// The per-node deviation is measured on the noiseless per-node component;
/// BS noise only enters the superposed symbol. The deviation does not depend
/// on `s_{k,m}`, so it is well defined for zero-valued parameters too.
pub fn run_oac_phase<R: Rng + ?Sized>(
    config: &SystemConfig,
    nodes: &[NodeRealization],
    schedule: &Schedule,
    estimates: &PhaseEstimates,
    params: &[ParameterVector],
    rng: &mut R,
    record_breakdown: bool,
) -> Result<OacOutcome> {
    check_nodes(config, nodes, schedule)?;
    let num_symbols = params.first().map_or(0, ParameterVector::len);
    if params.len() != nodes.len() || params.iter().any(|p| p.len() != num_symbols) {
        return Err(Error::ParameterShape { nodes: nodes.len(), symbols: num_symbols });
    }
    let lambda = config.wavelength();
    let var_bs = config.noise_var_bs();

    let mut superposed = vec![Complex64::new(0.0, 0.0); num_symbols];
    let mut per_node_dev = Vec::with_capacity(nodes.len());
    let mut breakdown = record_breakdown.then(|| Vec::with_capacity(nodes.len()));

    for (node, s) in nodes.iter().zip(params) {
        let est = estimates.node(node.index)?;
        let amp = config.amp_ul.get(node.index);
        let precoder = Complex64::from_polar(1.0, est.psi3);
        let mut devs = Vec::with_capacity(num_symbols);
        for (m, (&sym, acc)) in s.symbols().iter().zip(superposed.iter_mut()).enumerate() {
            let t = schedule.oac_instant(node.index, m)?;
            let gain = channel::ul_propagate(node, t, precoder, lambda, amp);
            *acc += gain * sym;
            devs.push(channel::wrap_phase(gain.arg() - config.theta_desired));
        }
        per_node_dev.push(devs);
        if let Some(b) = breakdown.as_mut() {
            let noise = est.noise_error();
            let row = (0..num_symbols)
                .map(|m| decompose_error(config, node, schedule, m).map(|(cfo, mobility)| ErrorBreakdown { cfo, mobility, noise }))
                .collect::<Result<Vec<_>>>()?;
            b.push(row);
        }
    }
    for v in superposed.iter_mut() {
        *v += channel::complex_gaussian(rng, var_bs);
    }

    Ok(OacOutcome { superposed, per_node_dev, breakdown })
}

/// Unwrapped CFO and mobility components of the deviation of node `node` on
/// symbol `m`, derived from the step sequence:
///
/// `ε_cfo = 2π f_k (t3 − t4,m + t2 − t1)` with `t4,m = t4 + m T_s`, and
/// `ε_mob = 2π v_k cos(α_k) (t3 − t1 + t4,m − t2) / λ`.
///
/// Under [`build_schedule`] the CFO term reduces to `−2π f_k m T_s`: the
/// uplink rotates by `−2π f_k t`, so a node whose oscillator runs fast lags
/// the desired phase on later symbols.
pub fn decompose_error(config: &SystemConfig, node: &NodeRealization, schedule: &Schedule, m: usize) -> Result<(f64, f64)> {
    let NodeTiming { t1, t2, t3, .. } = *schedule.node(node.index)?;
    let t4m = schedule.oac_instant(node.index, m)?;
    let cfo_span = (t3 - t4m) + (t2 - t1);
    let mob_span = (t3 - t1) + (t4m - t2);
    let cfo = std::f64::consts::TAU * node.cfo * cfo_span;
    let mobility = std::f64::consts::TAU * node.radial_speed() * mob_span / config.wavelength();
    Ok((cfo, mobility))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::wrap_phase;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{PI, TAU};

    fn noiseless(k: usize) -> SystemConfig {
        SystemConfig { num_nodes: k, snr_ue_db: f64::INFINITY, snr_bs_db: f64::INFINITY, ..SystemConfig::baseline() }
    }

    fn ideal_nodes(k: usize) -> Vec<NodeRealization> {
        (1..=k).map(NodeRealization::ideal).collect()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn schedule_k5_first_node() {
        let c = SystemConfig { num_nodes: 5, ..SystemConfig::baseline() };
        let s = build_schedule(&c).unwrap();
        let n = s.node(1).unwrap();
        assert_eq!(n.t1, 0.0);
        assert!(close(n.t2, 34.75e-6, 1e-15));
        assert!(close(n.t3, 219.5e-6, 1e-15));
        assert!(close(n.t4, 254.25e-6, 1e-15));
        assert!(close(n.t4 - n.t3, 34.75e-6, 1e-15));
    }

    #[test]
    fn schedule_single_node() {
        let c = SystemConfig { num_nodes: 1, ..SystemConfig::baseline() };
        let s = build_schedule(&c).unwrap();
        let n = s.node(1).unwrap();
        let (gu, gd, tp) = (c.guard_ul, c.guard_dl, c.packet_dur);
        assert!(close(n.t2, gu + tp, 1e-18));
        assert!(close(n.t3, gu + gd + 2.0 * tp, 1e-18));
        assert!(close(n.t4, 2.0 * gu + gd + 3.0 * tp, 1e-18));
    }

    #[test]
    fn schedule_invariants() {
        for k in [1, 2, 5, 20, 100] {
            let c = SystemConfig { num_nodes: k, ..SystemConfig::baseline() };
            let s = build_schedule(&c).unwrap();
            let t4 = s.node(1).unwrap().t4;
            for n in s.iter() {
                assert_eq!(n.t1, 0.0);
                assert!(n.t1 < n.t2 && n.t2 < n.t3 && n.t3 < n.t4);
                assert_eq!(n.t4, t4);
                assert!(close(n.t2 - n.t1, n.t4 - n.t3, 1e-15));
            }
            // Feedback order is the reverse of the response order.
            assert!(s.node(k).unwrap().t3 <= s.node(1).unwrap().t3);
            if k > 1 {
                assert!(s.node(k).unwrap().t3 < s.node(1).unwrap().t3);
            }
        }
        assert!(matches!(build_schedule(&SystemConfig { num_nodes: 0, ..SystemConfig::baseline() }), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn estimate_phase_examples() {
        let p = PilotSymbol::default();
        assert!(close(estimate_phase(p, Complex64::new(0.0, 1.0)).unwrap(), PI / 2.0, 1e-15));
        let q = PilotSymbol::from_phase(PI / 4.0);
        assert!(close(estimate_phase(q, Complex64::from_polar(1.0, PI / 4.0)).unwrap(), 0.0, 1e-15));
        assert_eq!(estimate_phase(p, Complex64::new(0.0, 0.0)), Err(Error::UndefinedPhase));

        // First-order expansion: ∠(1 + w) ≈ Im(w).
        let w = Complex64::new(3e-5, -2e-5);
        let got = estimate_phase(p, Complex64::new(1.0, 0.0) + w).unwrap();
        assert!(close(got, w.im, 1e-9));
    }

    #[test]
    fn sync_without_impairments() {
        let c = noiseless(4);
        let s = build_schedule(&c).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let e = run_sync_phase(&c, &ideal_nodes(4), &s, &mut rng).unwrap();
        for n in e.iter() {
            assert!(close(n.psi3, 0.0, 1e-12));
        }
    }

    #[test]
    fn sync_cancels_phase_offset() {
        let c = SystemConfig { theta_desired: 0.4, ..noiseless(3) };
        let s = build_schedule(&c).unwrap();
        let nodes: Vec<_> = (1..=3)
            .map(|k| NodeRealization { phase_offset: 1.3 * k as f64, dl_init_phase: 0.5 + k as f64, ul_init_phase: -2.0, ..NodeRealization::ideal(k) })
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let e = run_sync_phase(&c, &nodes, &s, &mut rng).unwrap();
        for (n, est) in nodes.iter().zip(e.iter()) {
            // θ^DL_0 cancels; φ_k survives until the uplink of Step 4 removes it.
            let want = wrap_phase(c.theta_desired - n.ul_init_phase + n.phase_offset);
            assert!(close(wrap_phase(est.psi3 - want), 0.0, 1e-9), "{} vs {want}", est.psi3);
        }
    }

    #[test]
    fn round_trip_estimate_under_cfo() {
        let c = noiseless(5);
        let s = build_schedule(&c).unwrap();
        let nodes: Vec<_> = (1..=5)
            .map(|k| NodeRealization { cfo: 40.0 * k as f64 - 90.0, dl_init_phase: 0.3, ul_init_phase: 1.7, phase_offset: 2.2, ..NodeRealization::ideal(k) })
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let e = run_sync_phase(&c, &nodes, &s, &mut rng).unwrap();
        for (n, est) in nodes.iter().zip(e.iter()) {
            let t = s.node(n.index).unwrap();
            let want = wrap_phase(TAU * n.cfo * (t.t1 - t.t2) + n.dl_init_phase + n.ul_init_phase);
            assert!(close(wrap_phase(est.psi2 - want), 0.0, 1e-9));
        }
    }

    #[test]
    fn perfect_coherence() {
        let k = 6;
        let c = noiseless(k);
        let s = build_schedule(&c).unwrap();
        let nodes = ideal_nodes(k);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let e = run_sync_phase(&c, &nodes, &s, &mut rng).unwrap();
        let params = vec![ParameterVector::ones(10); k];
        let out = run_oac_phase(&c, &nodes, &s, &e, &params, &mut rng, false).unwrap();
        for row in &out.per_node_dev {
            assert!(row.iter().all(|d| d.abs() < 1e-12));
        }
        for v in &out.superposed {
            assert!(close(v.norm(), k as f64, 1e-9));
        }
        assert!(out.breakdown.is_none());
    }

    fn cfo_nodes(k: usize) -> Vec<NodeRealization> {
        (1..=k)
            .map(|i| NodeRealization { cfo: 31.622_8 * (i as f64 - 2.5), phase_offset: 0.1 * i as f64, dl_init_phase: 2.0, ul_init_phase: 4.0, ..NodeRealization::ideal(i) })
            .collect()
    }

    #[test]
    fn cfo_cancels_on_first_symbol_and_grows_linearly() {
        let k = 5;
        let c = noiseless(k);
        let s = build_schedule(&c).unwrap();
        let nodes = cfo_nodes(k);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let e = run_sync_phase(&c, &nodes, &s, &mut rng).unwrap();
        let params = vec![ParameterVector::ones(120); k];
        let out = run_oac_phase(&c, &nodes, &s, &e, &params, &mut rng, false).unwrap();
        for n in &nodes {
            assert!(out.deviation(n.index, 0).abs() < 1e-9);
            for m in [1, 20, 100, 119] {
                // Uplink rotates by −2π f t: the deviation is −2π f m T_s.
                let want = wrap_phase(-TAU * n.cfo * m as f64 * c.symbol_dur);
                assert!(close(wrap_phase(out.deviation(n.index, m) - want), 0.0, 1e-9));
            }
        }
    }

    #[test]
    fn decompose_examples() {
        let c = SystemConfig { num_nodes: 5, ..SystemConfig::baseline() };
        let s = build_schedule(&c).unwrap();
        let n = NodeRealization { cfo: 31.622_8, speed: 0.0, ..NodeRealization::ideal(1) };
        let (cfo0, mob0) = decompose_error(&c, &n, &s, 0).unwrap();
        assert!(cfo0.abs() < 1e-12);
        assert_eq!(mob0, 0.0);
        let (cfo, _) = decompose_error(&c, &n, &s, 100).unwrap();
        assert!(close(cfo, -0.372_547, 1e-5), "{cfo}");
    }

    #[test]
    fn cfo_term_independent_of_k() {
        let n = NodeRealization { cfo: 17.0, ..NodeRealization::ideal(1) };
        let small = SystemConfig { num_nodes: 1, ..SystemConfig::baseline() };
        let large = SystemConfig { num_nodes: 100, ..SystemConfig::baseline() };
        let (s1, s100) = (build_schedule(&small).unwrap(), build_schedule(&large).unwrap());
        for m in [0, 1, 37, 200] {
            let a = decompose_error(&small, &n, &s1, m).unwrap().0;
            let b = decompose_error(&large, &n, &s100, m).unwrap().0;
            assert!(close(a, b, 1e-12 + 1e-9 * a.abs()), "{a} vs {b}");
        }
    }

    #[test]
    fn shape_errors() {
        let c = noiseless(3);
        let s = build_schedule(&c).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(run_sync_phase(&c, &ideal_nodes(2), &s, &mut rng), Err(Error::NodeCount { .. })));
        let nodes = ideal_nodes(3);
        let e = run_sync_phase(&c, &nodes, &s, &mut rng).unwrap();
        let params = vec![ParameterVector::ones(4), ParameterVector::ones(4), ParameterVector::ones(5)];
        assert!(matches!(run_oac_phase(&c, &nodes, &s, &e, &params, &mut rng, false), Err(Error::ParameterShape { .. })));
    }

    fn random_nodes(k: usize, seed: u64, cfo_scale: f64, max_speed: f64) -> Vec<NodeRealization> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (1..=k)
            .map(|i| NodeRealization {
                index: i,
                cfo: cfo_scale * rng.random_range(-1.0..1.0),
                phase_offset: rng.random_range(0.0..TAU),
                speed: max_speed * rng.random::<f64>(),
                path_angle: rng.random_range(0.0..TAU),
                dl_init_phase: rng.random_range(0.0..TAU),
                ul_init_phase: rng.random_range(0.0..TAU),
            })
            .collect()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn initial_phases_cancel(k in 1usize..12, seed in any::<u64>()) {
            let c = noiseless(k);
            let s = build_schedule(&c).unwrap();
            let nodes = random_nodes(k, seed, 0.0, 0.0);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let e = run_sync_phase(&c, &nodes, &s, &mut rng).unwrap();
            let out = run_oac_phase(&c, &nodes, &s, &e, &vec![ParameterVector::ones(8); k], &mut rng, false).unwrap();
            for row in &out.per_node_dev {
                for d in row {
                    prop_assert!(d.abs() < 1e-9);
                }
            }
        }

        #[test]
        fn first_symbol_is_cfo_free(k in 1usize..30, seed in any::<u64>(), scale in 0.0f64..2000.0) {
            let c = noiseless(k);
            let s = build_schedule(&c).unwrap();
            let nodes = random_nodes(k, seed, scale, 0.0);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let e = run_sync_phase(&c, &nodes, &s, &mut rng).unwrap();
            let out = run_oac_phase(&c, &nodes, &s, &e, &vec![ParameterVector::ones(1); k], &mut rng, false).unwrap();
            for row in &out.per_node_dev {
                prop_assert!(row[0].abs() < 1e-9, "{}", row[0]);
            }
        }

        #[test]
        fn noisy_deviation_decomposes_exactly(k in 1usize..8, seed in any::<u64>(), snr in 0.0f64..40.0) {
            let c = SystemConfig { num_nodes: k, snr_ue_db: snr, snr_bs_db: snr, ..SystemConfig::baseline() };
            let s = build_schedule(&c).unwrap();
            let nodes = random_nodes(k, seed, 100.0, 3.0);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let e = run_sync_phase(&c, &nodes, &s, &mut rng).unwrap();
            let out = run_oac_phase(&c, &nodes, &s, &e, &vec![ParameterVector::ones(30); k], &mut rng, true).unwrap();
            let b = out.breakdown.as_ref().unwrap();
            for (i, row) in out.per_node_dev.iter().enumerate() {
                for (m, d) in row.iter().enumerate() {
                    let parts = b[i][m];
                    let want = wrap_phase(parts.cfo + parts.mobility + parts.noise);
                    prop_assert!(wrap_phase(d - want).abs() < 1e-9);
                }
            }
        }
    }
}
