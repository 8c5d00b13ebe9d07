//! TOML experiment files.
//!
//! Every key is optional; omitted keys take the reference-scenario values
//! (see [`SystemConfig::baseline`]). Durations are seconds, frequencies Hz,
//! SNRs dB, the CFO variance Hz², and angles degrees.
//!
//! ```toml
//! num_nodes = 20
//! cfo_var = 1000
//! mobility = { kind = "rayleigh", v_mean = 1.5 }
//!
//! [plan]
//! trials = 100000
//! seed = 7
//! symbols = [0, 20, 80]
//!
//! [sweep]
//! snr = [[30, 30], [20, 10]]
//! ```

use std::path::{Path, PathBuf};

use pcp_core::montecarlo::{TrialPlan, SMOKE_TRIALS};
use pcp_core::{AmplitudeProfile, MobilityModel, SystemConfig};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum MobilityEntry {
    Static,
    Fixed { v: f64 },
    Rayleigh { v_mean: f64 },
}

impl From<MobilityEntry> for MobilityModel {
    fn from(m: MobilityEntry) -> Self {
        match m {
            MobilityEntry::Static => MobilityModel::Static,
            MobilityEntry::Fixed { v } => MobilityModel::FixedSpeed { speed: v },
            MobilityEntry::Rayleigh { v_mean } => MobilityModel::RayleighSpeed { mean_speed: v_mean },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AmplitudeEntry {
    Uniform(f64),
    PerNode(Vec<f64>),
}

impl From<AmplitudeEntry> for AmplitudeProfile {
    fn from(a: AmplitudeEntry) -> Self {
        match a {
            AmplitudeEntry::Uniform(x) => AmplitudeProfile::Uniform(x),
            AmplitudeEntry::PerNode(v) => AmplitudeProfile::PerNode(v),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanEntry {
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub nodes: Option<Vec<usize>>,
    /// Defaults to every symbol 0..M of each sweep point.
    pub symbols: Option<Vec<usize>>,
    pub record_breakdown: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepEntry {
    pub cfo_var: Option<Vec<f64>>,
    /// v or v̄, depending on the mobility model.
    pub speed: Option<Vec<f64>>,
    /// `[snr_ue, snr_bs]` pairs.
    pub snr: Option<Vec<[f64; 2]>>,
    pub num_nodes: Option<Vec<usize>>,
    pub num_oac_symbols: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputEntry {
    pub dir: Option<PathBuf>,
    pub cdf_theta_deg: Option<Vec<f64>>,
    /// Emit the analytic CDF in `theory`; refused for fixed-speed mobility.
    pub analytic_cdf: Option<bool>,
}

/// On-disk experiment description. After [`FileConfig::resolved`] every
/// field is populated, and serializing it reproduces the experiment.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub num_nodes: Option<usize>,
    pub num_oac_symbols: Option<usize>,
    pub carrier_freq: Option<f64>,
    pub guard_ul: Option<f64>,
    pub guard_dl: Option<f64>,
    pub packet_dur: Option<f64>,
    pub ofdm_dur: Option<f64>,
    pub cp_dur: Option<f64>,
    pub symbol_dur: Option<f64>,
    pub theta_desired_deg: Option<f64>,
    pub snr_ue: Option<f64>,
    pub snr_bs: Option<f64>,
    pub cfo_var: Option<f64>,
    pub amp_ul: Option<AmplitudeEntry>,
    pub amp_dl: Option<AmplitudeEntry>,
    pub speed_of_light: Option<f64>,
    pub quantization_bits: Option<u32>,
    pub spectral_eff: Option<f64>,
    pub mobility: Option<MobilityEntry>,
    pub plan: Option<PlanEntry>,
    pub sweep: Option<SweepEntry>,
    pub output: Option<OutputEntry>,
}

const DEFAULT_SEED: u64 = 1;
const DEFAULT_OUT_DIR: &str = "out";

fn default_theta_grid() -> Vec<f64> {
    (0..=60).map(f64::from).collect()
}

impl FileConfig {
    pub fn from_toml(text: &str, path: &Path) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::Parse { path: path.to_owned(), message: e.to_string() })
    }

    /// Fills every omitted field with its default.
    pub fn resolved(&self) -> FileConfig {
        let b = SystemConfig::baseline();
        let ofdm_dur = self.ofdm_dur.unwrap_or(b.ofdm_dur);
        let cp_dur = self.cp_dur.unwrap_or(ofdm_dur / 8.0);
        let symbol_dur = self.symbol_dur.unwrap_or(ofdm_dur + cp_dur);
        let plan = self.plan.clone().unwrap_or_default();
        let output = self.output.clone().unwrap_or_default();
        FileConfig {
            num_nodes: Some(self.num_nodes.unwrap_or(b.num_nodes)),
            num_oac_symbols: Some(self.num_oac_symbols.unwrap_or(b.num_oac_symbols)),
            carrier_freq: Some(self.carrier_freq.unwrap_or(b.carrier_freq)),
            guard_ul: Some(self.guard_ul.unwrap_or(b.guard_ul)),
            guard_dl: Some(self.guard_dl.unwrap_or(b.guard_dl)),
            packet_dur: Some(self.packet_dur.unwrap_or(symbol_dur)),
            ofdm_dur: Some(ofdm_dur),
            cp_dur: Some(cp_dur),
            symbol_dur: Some(symbol_dur),
            theta_desired_deg: Some(self.theta_desired_deg.unwrap_or(0.0)),
            snr_ue: Some(self.snr_ue.unwrap_or(b.snr_ue_db)),
            snr_bs: Some(self.snr_bs.unwrap_or(b.snr_bs_db)),
            cfo_var: Some(self.cfo_var.unwrap_or(b.cfo_var)),
            amp_ul: Some(self.amp_ul.clone().unwrap_or(AmplitudeEntry::Uniform(1.0))),
            amp_dl: Some(self.amp_dl.clone().unwrap_or(AmplitudeEntry::Uniform(1.0))),
            speed_of_light: Some(self.speed_of_light.unwrap_or(b.speed_of_light)),
            quantization_bits: Some(self.quantization_bits.unwrap_or(b.quantization_bits)),
            spectral_eff: Some(self.spectral_eff.unwrap_or(b.spectral_eff)),
            mobility: Some(self.mobility.clone().unwrap_or(MobilityEntry::Rayleigh { v_mean: b.mobility.speed() })),
            plan: Some(PlanEntry {
                trials: Some(plan.trials.unwrap_or(SMOKE_TRIALS)),
                seed: Some(plan.seed.unwrap_or(DEFAULT_SEED)),
                nodes: Some(plan.nodes.unwrap_or_else(|| vec![1])),
                symbols: plan.symbols,
                record_breakdown: Some(plan.record_breakdown.unwrap_or(false)),
            }),
            sweep: self.sweep.clone(),
            output: Some(OutputEntry {
                dir: Some(output.dir.unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))),
                cdf_theta_deg: Some(output.cdf_theta_deg.unwrap_or_else(default_theta_grid)),
                analytic_cdf: Some(output.analytic_cdf.unwrap_or(true)),
            }),
        }
    }

    fn system_config(&self) -> SystemConfig {
        let r = self.resolved();
        SystemConfig {
            num_nodes: r.num_nodes.unwrap(),
            num_oac_symbols: r.num_oac_symbols.unwrap(),
            carrier_freq: r.carrier_freq.unwrap(),
            guard_ul: r.guard_ul.unwrap(),
            guard_dl: r.guard_dl.unwrap(),
            packet_dur: r.packet_dur.unwrap(),
            ofdm_dur: r.ofdm_dur.unwrap(),
            cp_dur: r.cp_dur.unwrap(),
            symbol_dur: r.symbol_dur.unwrap(),
            theta_desired: r.theta_desired_deg.unwrap().to_radians(),
            snr_ue_db: r.snr_ue.unwrap(),
            snr_bs_db: r.snr_bs.unwrap(),
            cfo_var: r.cfo_var.unwrap(),
            mobility: r.mobility.unwrap().into(),
            amp_ul: r.amp_ul.unwrap().into(),
            amp_dl: r.amp_dl.unwrap().into(),
            speed_of_light: r.speed_of_light.unwrap(),
            quantization_bits: r.quantization_bits.unwrap(),
            spectral_eff: r.spectral_eff.unwrap(),
        }
    }
}

/// One resolved scenario of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub index: usize,
    pub config: SystemConfig,
    pub plan: TrialPlan,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    /// Fully resolved file form; echoed into every CSV header.
    pub file: FileConfig,
    pub config: SystemConfig,
    pub plan: TrialPlan,
    pub sweep: Option<SweepEntry>,
    pub out_dir: PathBuf,
    pub cdf_theta_deg: Vec<f64>,
    pub analytic_cdf: bool,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

/// Reads and validates an experiment file.
pub fn parse_config(path: &Path) -> Result<ExperimentSpec> {
    parse_config_with(path, &Overrides::default())
}

pub fn parse_config_with(path: &Path, overrides: &Overrides) -> Result<ExperimentSpec> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read { path: path.to_owned(), source })?;
    let file = FileConfig::from_toml(&text, path)?;
    ExperimentSpec::from_file(file, overrides)
}

impl ExperimentSpec {
    pub fn from_file(mut file: FileConfig, overrides: &Overrides) -> Result<Self> {
        {
            let plan = file.plan.get_or_insert_with(PlanEntry::default);
            if let Some(t) = overrides.trials {
                plan.trials = Some(t);
            }
            if let Some(s) = overrides.seed {
                plan.seed = Some(s);
            }
        }
        if let Some(dir) = &overrides.out {
            file.output.get_or_insert_with(OutputEntry::default).dir = Some(dir.clone());
        }
        let file = file.resolved();
        let config = file.system_config();
        config.validate()?;

        let plan_entry = file.plan.clone().unwrap();
        let plan = TrialPlan {
            n_trials: plan_entry.trials.unwrap(),
            base_seed: plan_entry.seed.unwrap(),
            record_breakdown: plan_entry.record_breakdown.unwrap(),
            nodes_of_interest: plan_entry.nodes.unwrap(),
            symbols_of_interest: plan_entry.symbols.unwrap_or_else(|| (0..config.num_oac_symbols).collect()),
        };
        let output = file.output.clone().unwrap();
        let spec = ExperimentSpec {
            sweep: file.sweep.clone(),
            config,
            plan,
            out_dir: output.dir.unwrap(),
            cdf_theta_deg: output.cdf_theta_deg.unwrap(),
            analytic_cdf: output.analytic_cdf.unwrap(),
            file,
        };
        spec.check()?;
        Ok(spec)
    }

    fn check(&self) -> Result<()> {
        if let Some(s) = &self.sweep {
            let lens = [
                ("cfo_var", s.cfo_var.as_ref().map(Vec::len)),
                ("speed", s.speed.as_ref().map(Vec::len)),
                ("snr", s.snr.as_ref().map(Vec::len)),
                ("num_nodes", s.num_nodes.as_ref().map(Vec::len)),
                ("num_oac_symbols", s.num_oac_symbols.as_ref().map(Vec::len)),
            ];
            if let Some((name, _)) = lens.iter().find(|(_, l)| *l == Some(0)) {
                return Err(CliError::Invalid(format!("sweep.{name} must not be empty")));
            }
        }
        if self.cdf_theta_deg.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(CliError::Invalid("output.cdf_theta_deg must hold non-negative angles".into()));
        }
        for p in self.points() {
            p.config.validate()?;
            p.plan.validate(&p.config)?;
        }
        Ok(())
    }

    /// Cartesian product of the sweep lists, in the order
    /// num_nodes, num_oac_symbols, snr, cfo_var, speed (last varies fastest).
    pub fn points(&self) -> Vec<SweepPoint> {
        let base = &self.config;
        let sweep = self.sweep.clone().unwrap_or_default();
        let ks = sweep.num_nodes.unwrap_or_else(|| vec![base.num_nodes]);
        let ms = sweep.num_oac_symbols.unwrap_or_else(|| vec![base.num_oac_symbols]);
        let snrs = sweep.snr.unwrap_or_else(|| vec![[base.snr_ue_db, base.snr_bs_db]]);
        let cfos = sweep.cfo_var.unwrap_or_else(|| vec![base.cfo_var]);
        let speeds = sweep.speed.unwrap_or_else(|| vec![base.mobility.speed()]);
        let explicit_symbols = self.file.plan.as_ref().and_then(|p| p.symbols.clone());

        let mut out = Vec::new();
        for &k in &ks {
            for &m in &ms {
                for &[ue, bs] in &snrs {
                    for &cfo in &cfos {
                        for &v in &speeds {
                            let config = SystemConfig {
                                num_nodes: k,
                                num_oac_symbols: m,
                                snr_ue_db: ue,
                                snr_bs_db: bs,
                                cfo_var: cfo,
                                mobility: base.mobility.with_speed(v),
                                ..base.clone()
                            };
                            let plan = TrialPlan {
                                symbols_of_interest: explicit_symbols.clone().unwrap_or_else(|| (0..m).collect()),
                                ..self.plan.clone()
                            };
                            out.push(SweepPoint { index: out.len(), config, plan });
                        }
                    }
                }
            }
        }
        out
    }

    /// The resolved experiment as TOML.
    pub fn to_toml(&self) -> String {
        toml::to_string(&self.file).expect("resolved config is serializable")
    }
}
