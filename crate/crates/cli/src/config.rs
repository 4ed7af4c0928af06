//! JSON model configuration. Every number is a decimal (or `p/q`) string and
//! is parsed as an exact rational; JSON numbers are rejected so that values
//! such as `2.01` never pass through binary floating point.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use strec_core::queueing::{
    build_impatience, build_loss, CftpConfig, DiscreteDistribution, ImpatienceModel, ImpatienceParams, LossModel,
    LossParams,
};
use strec_core::{parse_rational, DrivingMap, Error, FiniteCyclicSystem, RandomSet, Rational, State, StateLattice};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Loss,
    Impatience,
    Abstract,
    Cftp,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleConfig {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub service: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interarrival: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub patience: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomConfig {
    pub value: String,
    pub probability: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CftpSection {
    pub service: Vec<AtomConfig>,
    pub interarrival: Vec<AtomConfig>,
    /// Defaults to patience `0`, the loss queue.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub patience: Vec<AtomConfig>,
    pub replications: usize,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon_cap: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub model: ModelKind,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub samples: Vec<SampleConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_max: Option<String>,
    /// Lattice step of an abstract model.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<String>,
    /// Abstract model: per sample label, the image of every lattice state in increasing order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tables: Option<BTreeMap<String, Vec<String>>>,
    /// Overrides the default starting set `G`, per sample label.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<BTreeMap<String, Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_sweeps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cftp: Option<CftpSection>,
}

pub const DEFAULT_HORIZON_CAP: usize = 1 << 20;

impl ModelConfig {
    pub fn from_json(text: &str) -> Result<Self, Error> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// A validated configuration, ready for analysis.
#[derive(Debug, Clone)]
pub enum Model {
    Loss {
        system: FiniteCyclicSystem,
        params: LossParams,
        model: Box<LossModel>,
        g: RandomSet,
    },
    Impatience {
        system: FiniteCyclicSystem,
        params: ImpatienceParams,
        model: Box<ImpatienceModel>,
        g: RandomSet,
    },
    Abstract {
        lattice: StateLattice,
        map: DrivingMap,
        g: RandomSet,
    },
    Cftp {
        config: CftpConfig,
        replications: usize,
        seed: u64,
    },
}

impl Model {
    /// The driving map and starting set of the backwards scheme, if any.
    pub fn scheme(&self) -> Option<(&StateLattice, &DrivingMap, &RandomSet)> {
        match self {
            Model::Loss { model, g, .. } => Some((&model.lattice, &model.map, g)),
            Model::Impatience { model, g, .. } => Some((&model.lattice, &model.map, g)),
            Model::Abstract { lattice, map, g } => Some((lattice, map, g)),
            Model::Cftp { .. } => None,
        }
    }
}

fn number(text: &str, field: &str) -> Result<Rational, Error> {
    parse_rational(text).map_err(|e| Error::Parse(format!("{field}: {e}")))
}

fn required(value: &Option<String>, field: &str, label: &str) -> Result<Rational, Error> {
    match value {
        Some(text) => number(text, &format!("{field} of {label}")),
        None => Err(Error::Parse(format!("sample {label} is missing {field}"))),
    }
}

fn system_of(samples: &[SampleConfig]) -> Result<FiniteCyclicSystem, Error> {
    FiniteCyclicSystem::new(samples.iter().map(|s| s.label.clone()).collect())
}

fn column(samples: &[SampleConfig], field: &str, pick: fn(&SampleConfig) -> &Option<String>) -> Result<Vec<Rational>, Error> {
    samples.iter().map(|s| required(pick(s), field, &s.label)).collect()
}

fn state_set(lattice: &StateLattice, values: &[String], label: &str) -> Result<BTreeSet<State>, Error> {
    values
        .iter()
        .map(|text| {
            let x = number(text, &format!("g of {label}"))?;
            lattice
                .state_of(&x)
                .ok_or_else(|| Error::InvalidLattice(format!("g value {text} of {label} is not a lattice state")))
        })
        .collect()
}

fn starting_set(
    system: &FiniteCyclicSystem,
    lattice: &StateLattice,
    overrides: &Option<BTreeMap<String, Vec<String>>>,
    default: impl FnOnce() -> RandomSet,
) -> Result<RandomSet, Error> {
    let Some(map) = overrides else {
        return Ok(default());
    };
    if let Some(unknown) = map.keys().find(|l| system.sample(l).is_err()) {
        return Err(Error::UnknownSample(unknown.clone()));
    }
    let sets = system
        .labels()
        .iter()
        .map(|label| match map.get(label) {
            Some(values) => state_set(lattice, values, label),
            None => Err(Error::InvalidParams(format!("g override has no entry for sample {label}"))),
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(RandomSet::new(sets))
}

fn distribution(atoms: &[AtomConfig], field: &str) -> Result<DiscreteDistribution, Error> {
    let parsed = atoms
        .iter()
        .map(|a| Ok((number(&a.value, field)?, number(&a.probability, field)?)))
        .collect::<Result<Vec<_>, Error>>()?;
    DiscreteDistribution::new(parsed).map_err(|e| Error::InvalidParams(format!("{field}: {e}")))
}

/// Parses numbers and builds the model; no analysis is run.
pub fn build(config: &ModelConfig) -> Result<Model, Error> {
    let x_max = config.x_max.as_deref().map(|t| number(t, "x_max")).transpose()?;
    match config.model {
        ModelKind::Loss => {
            let system = system_of(&config.samples)?;
            let params = LossParams::new(
                column(&config.samples, "service", |s| &s.service)?,
                column(&config.samples, "interarrival", |s| &s.interarrival)?,
            )?;
            let model = build_loss(&system, &params, x_max)?;
            let g = starting_set(&system, &model.lattice, &config.g, || model.default_g.clone())?;
            g.check_stable(&model.map)?;
            Ok(Model::Loss {
                system,
                params,
                model: Box::new(model),
                g,
            })
        }
        ModelKind::Impatience => {
            let system = system_of(&config.samples)?;
            let params = ImpatienceParams::new(
                column(&config.samples, "service", |s| &s.service)?,
                column(&config.samples, "interarrival", |s| &s.interarrival)?,
                column(&config.samples, "patience", |s| &s.patience)?,
            )?;
            let model = build_impatience(&system, &params, x_max)?;
            let g = starting_set(&system, &model.lattice, &config.g, || model.default_g.clone())?;
            g.check_stable(&model.map)?;
            Ok(Model::Impatience {
                system,
                params,
                model: Box::new(model),
                g,
            })
        }
        ModelKind::Abstract => {
            let system = system_of(&config.samples)?;
            let step = number(config.step.as_deref().ok_or_else(|| Error::Parse("abstract model needs step".into()))?, "step")?;
            let x_max = x_max.ok_or_else(|| Error::Parse("abstract model needs x_max".into()))?;
            let lattice = StateLattice::new(step, x_max)?;
            let tables = config
                .tables
                .as_ref()
                .ok_or_else(|| Error::Parse("abstract model needs tables".into()))?;
            if let Some(unknown) = tables.keys().find(|l| system.sample(l).is_err()) {
                return Err(Error::UnknownSample(unknown.clone()));
            }
            let rows = system
                .labels()
                .iter()
                .map(|label| {
                    let row = tables
                        .get(label)
                        .ok_or_else(|| Error::InvalidParams(format!("no table for sample {label}")))?;
                    if row.len() != lattice.len() {
                        return Err(Error::InvalidParams(format!(
                            "table of {label} has {} entries for {} lattice states",
                            row.len(),
                            lattice.len()
                        )));
                    }
                    row.iter()
                        .enumerate()
                        .map(|(i, text)| {
                            let y = number(text, &format!("table of {label}"))?;
                            lattice.state_of(&y).ok_or_else(|| Error::OffLattice {
                                sample: label.clone(),
                                state: lattice.format_state(State(i)),
                                value: text.clone(),
                            })
                        })
                        .collect::<Result<Vec<_>, _>>()
                })
                .collect::<Result<Vec<_>, _>>()?;
            let map = DrivingMap::from_tables(&system, &lattice, rows)?;
            let g = starting_set(&system, &lattice, &config.g, || RandomSet::full(&map))?;
            g.check_stable(&map)?;
            Ok(Model::Abstract { lattice, map, g })
        }
        ModelKind::Cftp => {
            let section = config
                .cftp
                .as_ref()
                .ok_or_else(|| Error::Parse("cftp model needs a cftp section".into()))?;
            let patience = if section.patience.is_empty() {
                DiscreteDistribution::point(Rational::from_integer(0))
            } else {
                distribution(&section.patience, "patience")?
            };
            Ok(Model::Cftp {
                config: CftpConfig {
                    service: distribution(&section.service, "service")?,
                    interarrival: distribution(&section.interarrival, "interarrival")?,
                    patience,
                    horizon_cap: section.horizon_cap.unwrap_or(DEFAULT_HORIZON_CAP),
                },
                replications: section.replications,
                seed: section.seed,
            })
        }
    }
}
