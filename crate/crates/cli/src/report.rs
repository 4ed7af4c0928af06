//! The JSON report. Rationals are exact strings (`"1.5"`, `"1/3"`); counts,
//! indices and integer bounds are plain JSON integers. Per-sample data is a
//! list ordered like the configuration's samples.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use strec_core::{format_rational, FiniteCyclicSystem, Rational, State, StateLattice};

use crate::config::ModelConfig;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    /// The configuration after command-line overrides.
    pub config: ModelConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice: Option<LatticeReport>,
    /// Cardinal of the limit set `H`, when the backwards scheme was run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub analysis: Option<AnalysisReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loss: Option<LossSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub impatience: Option<ImpatienceSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flipo: Option<FlipoSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loynes: Option<LoynesSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cftp: Option<CftpReport>,
    pub verdicts: Vec<Verdict>,
}

impl RunReport {
    pub fn new(command: &str, config: ModelConfig) -> Self {
        Self {
            command: command.to_string(),
            config,
            lattice: None,
            c: None,
            analysis: None,
            loss: None,
            impatience: None,
            flipo: None,
            loynes: None,
            cftp: None,
            verdicts: Vec::new(),
        }
    }

    pub fn verdict(&mut self, name: &str, holds: bool, detail: impl Into<String>) {
        self.verdicts.push(Verdict {
            name: name.to_string(),
            holds,
            detail: detail.into(),
        });
    }

    pub fn verdict_holds(&self, name: &str) -> Option<bool> {
        self.verdicts.iter().find(|v| v.name == name).map(|v| v.holds)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeReport {
    pub step: String,
    pub x_max: String,
    pub states: usize,
}

impl LatticeReport {
    pub fn of(lattice: &StateLattice) -> Self {
        Self {
            step: format_rational(&lattice.step()),
            x_max: format_rational(&lattice.x_max()),
            states: lattice.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub holds: bool,
    pub detail: String,
}

/// A set of values at one sample.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleSet {
    pub sample: String,
    pub values: Vec<String>,
}

/// One value at one sample.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleValue {
    pub sample: String,
    pub value: String,
}

/// Integer data at one sample (index sets, counts).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleIndices {
    pub sample: String,
    pub indices: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleCount {
    pub sample: String,
    pub count: usize,
}

pub fn state_sets(system: &FiniteCyclicSystem, lattice: &StateLattice, sets: &[BTreeSet<State>]) -> Vec<SampleSet> {
    sets.iter()
        .enumerate()
        .map(|(i, set)| SampleSet {
            sample: system.labels()[i].clone(),
            values: set.iter().map(|s| lattice.format_state(*s)).collect(),
        })
        .collect()
}

pub fn rational_sets<'a>(
    system: &FiniteCyclicSystem,
    sets: impl IntoIterator<Item = &'a BTreeSet<Rational>>,
) -> Vec<SampleSet> {
    sets.into_iter()
        .zip(system.labels())
        .map(|(set, label)| SampleSet {
            sample: label.clone(),
            values: set.iter().map(format_rational).collect(),
        })
        .collect()
}

pub fn state_values(system: &FiniteCyclicSystem, lattice: &StateLattice, values: &[State]) -> Vec<SampleValue> {
    values
        .iter()
        .zip(system.labels())
        .map(|(s, label)| SampleValue {
            sample: label.clone(),
            value: lattice.format_state(*s),
        })
        .collect()
}

pub fn rational_values(system: &FiniteCyclicSystem, values: &[Rational]) -> Vec<SampleValue> {
    values
        .iter()
        .zip(system.labels())
        .map(|(v, label)| SampleValue {
            sample: label.clone(),
            value: format_rational(v),
        })
        .collect()
}

pub fn index_sets(system: &FiniteCyclicSystem, sets: &[Vec<usize>]) -> Vec<SampleIndices> {
    sets.iter()
        .zip(system.labels())
        .map(|(set, label)| SampleIndices {
            sample: label.clone(),
            indices: set.clone(),
        })
        .collect()
}

pub fn counts(system: &FiniteCyclicSystem, values: &[usize]) -> Vec<SampleCount> {
    values
        .iter()
        .zip(system.labels())
        .map(|(c, label)| SampleCount {
            sample: label.clone(),
            count: *c,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub max_sweeps: usize,
    pub g: Vec<SampleSet>,
    /// `H^1, …, H^{N'}`.
    pub history: Vec<Vec<SampleSet>>,
    pub h: Vec<SampleSet>,
    pub cardinals: Vec<SampleCount>,
    pub stabilization_index: usize,
    /// Sample on which the period permutation acts.
    pub permutation_base: String,
    /// Cycles of the period permutation, as states of `H` at the base sample.
    pub cycles: Vec<Vec<String>>,
    pub ergodic: bool,
    /// `None` when there are too many cycles to enumerate.
    pub invariant_families: Option<Vec<Vec<SampleSet>>>,
    pub solutions: Vec<Vec<SampleValue>>,
    pub atoms: Vec<AtomReport>,
    pub total_mass: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AtomReport {
    pub sample: String,
    pub state: String,
    pub weight: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LossSection {
    pub step: String,
    /// `A_ω`.
    pub busy: Vec<SampleIndices>,
    pub gamma: Vec<SampleCount>,
    pub g: usize,
    /// `B_ω`.
    pub busy_values: Vec<SampleSet>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundEntry {
    pub name: String,
    /// `None` when the bound's event is empty.
    pub value: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CargoReport {
    pub expected_patience: String,
    pub weighted_waiting: String,
    pub holds: bool,
    pub etoile: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImpatienceSection {
    pub step: String,
    pub y: Vec<SampleValue>,
    pub z: Vec<SampleValue>,
    /// `A_ω`, customers possibly waiting.
    pub waiting: Vec<SampleIndices>,
    pub tau_minus: Vec<SampleCount>,
    pub tau_plus: Vec<SampleCount>,
    /// `B_ω`, customers possibly present.
    pub present: Vec<SampleIndices>,
    pub rho: Vec<SampleCount>,
    pub p: usize,
    pub t: usize,
    pub s_under: i64,
    pub s_bar: i64,
    pub d_bar: i64,
    pub m: Vec<SampleValue>,
    pub max_workload: Vec<SampleValue>,
    pub bounds: Vec<BoundEntry>,
    pub cargo: CargoReport,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlipoPair {
    pub index: usize,
    pub workload: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlipoSample {
    pub sample: String,
    /// `Ĥ_ω`.
    pub indices: Vec<usize>,
    pub projection: Vec<FlipoPair>,
    pub surjective: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlipoSection {
    pub index_stabilization: usize,
    pub samples: Vec<FlipoSample>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoynesSection {
    pub lattice: LatticeReport,
    pub runs: Vec<LoynesRun>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoynesRun {
    /// `exact`, `lower` (χ) or `upper` (ψ).
    pub map: String,
    pub monotone: bool,
    /// `[sample, x, y]` with `x < y` and `φ(x) > φ(y)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<[String; 3]>,
    /// `proper`, `escaped`, `not_stabilized` or `not_monotone`.
    pub outcome: String,
    pub iterations: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limit: Option<Vec<SampleValue>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CftpAtomCount {
    pub value: String,
    pub count: usize,
    pub frequency: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CftpReport {
    pub step: String,
    pub replications: usize,
    pub coupled: usize,
    pub seed: u64,
    pub horizon_cap: usize,
    pub max_horizon: usize,
    /// `min σ < max ξ`.
    pub condition_holds: bool,
    pub distribution: Vec<CftpAtomCount>,
}
