//! Experiment configuration in TOML. Unknown keys are rejected, and every
//! value is validated before any computation starts.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::correlators::ShiftTimes;
use crate::error::{Error, Result};
use crate::evolution::{EvolutionBackend, Evolver, TrotterOrder};
use crate::noise::NoiseModel;
use crate::pauli::PauliSum;
use crate::qite::{default_tau_minus, default_tau_plus, QiteVariant};
use crate::spectral::WindowKind;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    SchwingerSpectrum,
    SshSpectrum,
    TimOtoc,
    BracketSelftest,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::SchwingerSpectrum => "schwinger_spectrum",
            ExperimentKind::SshSpectrum => "ssh_spectrum",
            ExperimentKind::TimOtoc => "tim_otoc",
            ExperimentKind::BracketSelftest => "bracket_selftest",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    Trotter,
    Exact,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionSection {
    pub backend: BackendKind,
    pub order: u32,
    /// Trotter step and sample spacing.
    pub dt: f64,
    pub t_max: f64,
}

impl EvolutionSection {
    pub fn sample_count(&self) -> usize {
        (self.t_max / self.dt).round() as usize + 1
    }

    pub fn sample_times(&self) -> Vec<f64> {
        (0..self.sample_count()).map(|i| i as f64 * self.dt).collect()
    }

    pub fn evolver(&self, h: PauliSum) -> Result<Evolver> {
        let backend = match self.backend {
            BackendKind::Trotter => EvolutionBackend::trotter(h, TrotterOrder::from_int(self.order)?, self.dt),
            BackendKind::Exact => EvolutionBackend::exact(h),
        };
        Evolver::new(backend)
    }

    fn validate(&self) -> std::result::Result<(), Issue> {
        TrotterOrder::from_int(self.order).map_err(|e| Issue::new("evolution", "order", e))?;
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Issue::msg("evolution", "dt", format!("must be positive, got {}", self.dt)));
        }
        if !(self.t_max >= 0.0 && self.t_max.is_finite()) {
            return Err(Issue::msg("evolution", "t_max", format!("must be non-negative, got {}", self.t_max)));
        }
        let steps = self.t_max / self.dt;
        if (steps - steps.round()).abs() > 1e-9 {
            return Err(Issue::msg(
                "evolution",
                "t_max",
                format!("{} is not a multiple of dt = {}", self.t_max, self.dt),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QiteKind {
    Oracle,
    Analytic,
    Unitary,
    Projective,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QiteSection {
    pub variant: QiteKind,
    #[serde(default = "default_tau_plus")]
    pub tau_plus: f64,
    #[serde(default = "default_tau_minus")]
    pub tau_minus: f64,
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default)]
    pub domain_radius: usize,
}

fn default_steps() -> usize {
    50
}

impl QiteSection {
    pub fn variant(&self) -> QiteVariant {
        match self.variant {
            QiteKind::Oracle => QiteVariant::Oracle,
            QiteKind::Analytic => QiteVariant::Analytic,
            QiteKind::Unitary => QiteVariant::Unitary {
                steps: self.steps,
                domain_radius: self.domain_radius,
            },
            QiteKind::Projective => QiteVariant::Projective,
        }
    }

    pub fn shifts(&self) -> ShiftTimes {
        ShiftTimes {
            tau_plus: self.tau_plus,
            tau_minus: self.tau_minus,
        }
    }

    fn validate(&self) -> std::result::Result<(), Issue> {
        let s = self.shifts();
        if (2.0 * s.tau_plus).sinh().abs() < 1e-12 {
            return Err(Issue::msg("qite", "tau_plus", "sinh(2 tau_plus) vanishes".into()));
        }
        if (2.0 * s.tau_minus).sin().abs() < 1e-12 {
            return Err(Issue::msg("qite", "tau_minus", "sin(2 tau_minus) vanishes".into()));
        }
        if self.variant == QiteKind::Unitary && self.steps == 0 {
            return Err(Issue::msg("qite", "steps", "must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    /// Depolarizing probability per Trotter layer.
    #[serde(default)]
    pub p: f64,
    /// Shots per Pauli term; absent means exact expectations.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shots: Option<u32>,
}

impl NoiseSection {
    pub fn model(&self, dt: f64, seed: u64) -> NoiseModel {
        NoiseModel {
            p: self.p,
            dt,
            shots: self.shots,
            seed,
        }
    }

    fn validate(&self) -> std::result::Result<(), Issue> {
        if !(0.0..1.0).contains(&self.p) {
            return Err(Issue::msg("noise", "p", format!("must be in [0, 1), got {}", self.p)));
        }
        if self.shots == Some(0) {
            return Err(Issue::msg("noise", "shots", "must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcessingSection {
    #[serde(default = "default_window")]
    pub window: WindowKind,
    /// Independent runs combined by correlation analysis: 1 or 2.
    #[serde(default = "default_ca_runs")]
    pub ca_runs: usize,
    #[serde(default = "default_threshold")]
    pub peak_threshold: f64,
    /// Zero-padding factor for the transform.
    #[serde(default = "default_padding")]
    pub padding: usize,
    /// Peaks at or below this frequency are ignored when picking energies.
    #[serde(default = "default_min_omega")]
    pub min_omega: f64,
}

fn default_window() -> WindowKind {
    WindowKind::Rectangular
}
fn default_ca_runs() -> usize {
    1
}
fn default_threshold() -> f64 {
    0.05
}
fn default_padding() -> usize {
    1
}
fn default_min_omega() -> f64 {
    0.5
}

impl Default for ProcessingSection {
    fn default() -> Self {
        ProcessingSection {
            window: default_window(),
            ca_runs: default_ca_runs(),
            peak_threshold: default_threshold(),
            padding: default_padding(),
            min_omega: default_min_omega(),
        }
    }
}

impl ProcessingSection {
    fn validate(&self) -> std::result::Result<(), Issue> {
        if !(1..=2).contains(&self.ca_runs) {
            return Err(Issue::msg("processing", "ca_runs", format!("must be 1 or 2, got {}", self.ca_runs)));
        }
        if !(self.peak_threshold > 0.0 && self.peak_threshold < 1.0) {
            return Err(Issue::msg(
                "processing",
                "peak_threshold",
                format!("must be in (0, 1), got {}", self.peak_threshold),
            ));
        }
        if self.padding == 0 || self.padding > 64 {
            return Err(Issue::msg("processing", "padding", format!("must be in 1..=64, got {}", self.padding)));
        }
        if !(self.min_omega >= 0.0) {
            return Err(Issue::msg("processing", "min_omega", "must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchwingerSection {
    pub l: usize,
    pub m: f64,
    pub g: f64,
    /// Momentum indices `n` of `k = 2 pi n / L`; default `0..=L/2`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub momenta: Option<Vec<i64>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SshMode {
    /// One imaginary-time gate for the whole momentum sum.
    Collective,
    /// One exact bracket per site.
    Expanded,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SshSection {
    pub l: usize,
    pub v: f64,
    pub delta: f64,
    pub mu: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub momenta: Option<Vec<i64>>,
    #[serde(default = "default_ssh_mode")]
    pub mode: SshMode,
}

fn default_ssh_mode() -> SshMode {
    SshMode::Collective
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimSection {
    pub l: usize,
    /// Site of the `Z` probe; default 0.
    #[serde(default)]
    pub probe_site: usize,
    /// Site of the `X` butterfly; default `L - 1`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub butterfly_site: Option<usize>,
}

impl TimSection {
    pub fn butterfly(&self) -> usize {
        self.butterfly_site.unwrap_or(self.l.saturating_sub(1))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelftestSection {
    #[serde(default = "default_cases")]
    pub cases: usize,
    #[serde(default = "default_selftest_qubits")]
    pub max_qubits: usize,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    /// `(tau_plus, tau_minus)` pairs; every case is evaluated at each.
    #[serde(default = "default_shift_pairs")]
    pub shift_pairs: Vec<[f64; 2]>,
}

fn default_cases() -> usize {
    200
}
fn default_selftest_qubits() -> usize {
    4
}
fn default_tolerance() -> f64 {
    1e-7
}
fn default_shift_pairs() -> Vec<[f64; 2]> {
    vec![[default_tau_plus(), default_tau_minus()], [0.3, 0.5], [0.7, 0.2]]
}

impl Default for SelftestSection {
    fn default() -> Self {
        SelftestSection {
            cases: default_cases(),
            max_qubits: default_selftest_qubits(),
            tolerance: default_tolerance(),
            shift_pairs: default_shift_pairs(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub evolution: EvolutionSection,
    pub qite: QiteSection,
    #[serde(default)]
    pub noise: NoiseSection,
    #[serde(default)]
    pub processing: ProcessingSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schwinger: Option<SchwingerSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ssh: Option<SshSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tim: Option<TimSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub selftest: Option<SelftestSection>,
}

/// A validation failure tied to a key.
struct Issue {
    section: &'static str,
    key: &'static str,
    message: String,
}

impl Issue {
    fn msg(section: &'static str, key: &'static str, message: String) -> Issue {
        Issue { section, key, message }
    }

    fn new(section: &'static str, key: &'static str, e: Error) -> Issue {
        Issue::msg(section, key, e.to_string())
    }
}

/// One-based line of `key` inside `[section]` (or at top level for an empty section).
fn locate(text: &str, section: &str, key: &str) -> Option<usize> {
    let mut current = String::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if let Some(rest) = line.strip_prefix('[') {
            current = rest.trim_end_matches(']').trim().to_string();
            if key.is_empty() && current == section {
                return Some(i + 1);
            }
            continue;
        }
        if current == section {
            if let Some((k, _)) = line.split_once('=') {
                if k.trim() == key {
                    return Some(i + 1);
                }
            }
        }
    }
    None
}

fn line_of_offset(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

impl ExperimentConfig {
    /// Parses and validates. Errors carry the offending line.
    pub fn from_toml_str(text: &str) -> Result<ExperimentConfig> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Parse {
            line: e.span().map_or(0, |s| line_of_offset(text, s.start)),
            message: e.message().to_string(),
        })?;
        cfg.check().map_err(|issue| {
            let line = locate(text, issue.section, issue.key)
                .or_else(|| locate(text, issue.section, ""))
                .unwrap_or(0);
            let key = if issue.section.is_empty() {
                issue.key.to_string()
            } else {
                format!("{}.{}", issue.section, issue.key)
            };
            Error::Parse {
                line,
                message: format!("{key}: {}", issue.message),
            }
        })?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Internal(format!("serializing config: {e}")))
    }

    pub fn validate(&self) -> Result<()> {
        self.check().map_err(|i| Error::Config(format!("{}.{}: {}", i.section, i.key, i.message)))
    }

    fn check(&self) -> std::result::Result<(), Issue> {
        self.evolution.validate()?;
        self.qite.validate()?;
        self.noise.validate()?;
        self.processing.validate()?;
        let present = [
            ("schwinger", self.schwinger.is_some(), ExperimentKind::SchwingerSpectrum),
            ("ssh", self.ssh.is_some(), ExperimentKind::SshSpectrum),
            ("tim", self.tim.is_some(), ExperimentKind::TimOtoc),
            ("selftest", self.selftest.is_some(), ExperimentKind::BracketSelftest),
        ];
        for (name, there, kind) in present {
            if there && kind != self.experiment {
                return Err(Issue::msg(
                    name,
                    "",
                    format!("section does not apply to experiment {}", self.experiment.name()),
                ));
            }
            if !there && kind == self.experiment && kind != ExperimentKind::BracketSelftest {
                return Err(Issue::msg(
                    "",
                    "experiment",
                    format!("experiment {} needs a [{name}] section", self.experiment.name()),
                ));
            }
        }
        let momenta = |l: usize, m: &Option<Vec<i64>>, section: &'static str| {
            let half = (l / 2) as i64;
            match m {
                Some(v) if v.is_empty() => Err(Issue::msg(section, "momenta", "must not be empty".into())),
                Some(v) => match v.iter().find(|n| n.abs() > half) {
                    Some(n) => Err(Issue::msg(section, "momenta", format!("index {n} outside [-{half}, {half}]"))),
                    None => Ok(()),
                },
                None => Ok(()),
            }
        };
        match self.experiment {
            ExperimentKind::SchwingerSpectrum => {
                let s = self.schwinger.as_ref().expect("checked above");
                if s.l < 2 || s.l % 2 != 0 {
                    return Err(Issue::msg("schwinger", "l", format!("must be even and at least 2, got {}", s.l)));
                }
                if 2 * s.l > crate::state::MAX_QUBITS {
                    return Err(Issue::msg("schwinger", "l", format!("{} qubits exceed the register limit", 2 * s.l)));
                }
                momenta(s.l, &s.momenta, "schwinger")?;
                if self.qite.variant == QiteKind::Projective {
                    return Err(Issue::msg("qite", "variant", "commutator-only experiment has no imaginary-time gate to project".into()));
                }
            }
            ExperimentKind::SshSpectrum => {
                let s = self.ssh.as_ref().expect("checked above");
                if s.l < 2 || s.l > crate::state::MAX_QUBITS {
                    return Err(Issue::msg("ssh", "l", format!("must be in 2..={}, got {}", crate::state::MAX_QUBITS, s.l)));
                }
                momenta(s.l, &s.momenta, "ssh")?;
                if s.mode == SshMode::Collective && self.qite.variant == QiteKind::Projective {
                    return Err(Issue::msg("qite", "variant", "projective QITE needs the expanded mode".into()));
                }
            }
            ExperimentKind::TimOtoc => {
                let s = self.tim.as_ref().expect("checked above");
                if s.l < 2 || s.l > crate::state::MAX_QUBITS {
                    return Err(Issue::msg("tim", "l", format!("must be in 2..={}, got {}", crate::state::MAX_QUBITS, s.l)));
                }
                if s.probe_site >= s.l {
                    return Err(Issue::msg("tim", "probe_site", format!("outside chain of {}", s.l)));
                }
                if s.butterfly() >= s.l {
                    return Err(Issue::msg("tim", "butterfly_site", format!("outside chain of {}", s.l)));
                }
            }
            ExperimentKind::BracketSelftest => {
                let s = self.selftest.clone().unwrap_or_default();
                if s.cases == 0 {
                    return Err(Issue::msg("selftest", "cases", "must be positive".into()));
                }
                if s.max_qubits == 0 || s.max_qubits > crate::oracle::DEFAULT_ORACLE_CAP {
                    return Err(Issue::msg("selftest", "max_qubits", format!("must be in 1..={}", crate::oracle::DEFAULT_ORACLE_CAP)));
                }
                if !(s.tolerance > 0.0) {
                    return Err(Issue::msg("selftest", "tolerance", "must be positive".into()));
                }
                for pair in &s.shift_pairs {
                    if (2.0 * pair[0]).sinh().abs() < 1e-12 || (2.0 * pair[1]).sin().abs() < 1e-12 {
                        return Err(Issue::msg("selftest", "shift_pairs", format!("degenerate shift pair {pair:?}")));
                    }
                }
                if self.evolution.backend != BackendKind::Exact {
                    return Err(Issue::msg("evolution", "backend", "the oracle comparison needs the exact backend".into()));
                }
            }
        }
        Ok(())
    }
}
