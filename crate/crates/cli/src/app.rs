//! Command dispatch: configuration in, [`RunReport`] out.

use std::fmt;
use std::path::Path;

use strec_core::queueing::{
    cftp_estimate, envelopes, flipo_compare, FlipoRun, ImpatienceModel, LossModel,
};
use strec_core::rational::rational_gcd;
use strec_core::{
    backwards_run, default_max_sweeps, extension_measure, format_rational, invariant_sets, loynes_solve,
    order_checks, period_permutation, stationary_solutions, verify_structure, BackwardsRun, DrivingMap, Error,
    FiniteCyclicSystem, ImproperReason, LoynesOutcome, RandomSet, Rational,
};

use crate::config::{build, Model, ModelConfig};
use crate::report::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Analyze,
    Loynes,
    Bounds,
    Cftp,
    Validate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Analyze => "analyze",
            Command::Loynes => "loynes",
            Command::Bounds => "bounds",
            Command::Cftp => "cftp",
            Command::Validate => "validate",
        }
    }
}

/// Command-line overrides shared by every subcommand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Overrides {
    pub max_sweeps: Option<usize>,
    pub seed: Option<u64>,
    pub jobs: usize,
}

impl Default for Overrides {
    fn default() -> Self {
        Self {
            max_sweeps: None,
            seed: None,
            jobs: 1,
        }
    }
}

pub mod exit {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 2;
    pub const IO: i32 = 3;
    pub const PARSE: i32 = 4;
    pub const MODEL: i32 = 5;
    pub const NOT_STABILIZED: i32 = 6;
    pub const INTERNAL: i32 = 70;
}

/// A failure with its exit code and machine-readable reason.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: i32,
    pub reason: String,
    pub message: String,
}

impl CliError {
    pub fn new(code: i32, reason: &str, message: impl Into<String>) -> Self {
        Self {
            code,
            reason: reason.to_string(),
            message: message.into(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": { "reason": self.reason, "message": self.message, "exit_code": self.code } })
            .to_string()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.reason, self.message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse(_) => exit::PARSE,
            Error::NotStabilized(_) => exit::NOT_STABILIZED,
            Error::Internal(_) => exit::INTERNAL,
            _ => exit::MODEL,
        };
        CliError::new(code, e.reason(), e.to_string())
    }
}

pub fn load(path: &Path) -> Result<ModelConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::new(exit::IO, "io_error", format!("{}: {e}", path.display())))?;
    ModelConfig::from_json(&text).map_err(|e| {
        let mut err = CliError::from(e);
        err.message = format!("{}: {}", path.display(), err.message);
        err
    })
}

pub fn apply_overrides(config: &mut ModelConfig, overrides: &Overrides) {
    if let Some(n) = overrides.max_sweeps {
        config.max_sweeps = Some(n);
    }
    if let (Some(seed), Some(section)) = (overrides.seed, config.cftp.as_mut()) {
        section.seed = seed;
    }
}

/// Runs one command on one configuration.
pub fn run(command: Command, mut config: ModelConfig, overrides: &Overrides) -> Result<RunReport, CliError> {
    apply_overrides(&mut config, overrides);
    let model = build(&config)?;
    let mut report = RunReport::new(command.name(), config);
    if let Some((lattice, _, _)) = model.scheme() {
        report.lattice = Some(LatticeReport::of(lattice));
    }
    match command {
        Command::Validate => {}
        Command::Analyze => match &model {
            Model::Cftp { .. } => cftp(&model, &mut report, overrides.jobs)?,
            _ => {
                let run = scheme(&model, report.config.max_sweeps)?;
                analysis(&run, &mut report)?;
                queue_sections(&model, &run, &mut report)?;
            }
        },
        Command::Bounds => match &model {
            Model::Loss { .. } | Model::Impatience { .. } => {
                let run = scheme(&model, report.config.max_sweeps)?;
                report.c = run.cardinal().constant();
                queue_sections(&model, &run, &mut report)?;
            }
            _ => return Err(model_kind_error("bounds", "a loss or impatience model")),
        },
        Command::Loynes => loynes(&model, &mut report)?,
        Command::Cftp => match &model {
            Model::Cftp { .. } => cftp(&model, &mut report, overrides.jobs)?,
            _ => return Err(model_kind_error("cftp", "a cftp model")),
        },
    }
    Ok(report)
}

fn model_kind_error(command: &str, needs: &str) -> CliError {
    CliError::new(exit::MODEL, "unsupported_model", format!("{command} needs {needs}"))
}

fn scheme(model: &Model, max_sweeps: Option<usize>) -> Result<BackwardsRun, CliError> {
    let (_, map, g) = model.scheme().expect("scheme models only");
    let sweeps = max_sweeps.unwrap_or_else(|| default_max_sweeps(map, g));
    Ok(backwards_run(map, g, sweeps)?)
}

fn analysis(run: &BackwardsRun, report: &mut RunReport) -> Result<(), CliError> {
    let map = run.map();
    let system = map.system();
    let lattice = map.lattice();
    let structure = verify_structure(run)?;
    let perm = period_permutation(run)?;
    let invariant = invariant_sets(&perm);
    let solutions = stationary_solutions(run)?;
    let measure = extension_measure(run)?;
    let sets = |r: &RandomSet| state_sets(system, lattice, r.sets());

    report.c = Some(structure.c);
    report.analysis = Some(AnalysisReport {
        max_sweeps: report.config.max_sweeps.unwrap_or_else(|| default_max_sweeps(map, run.g())),
        g: sets(run.g()),
        history: run.history().iter().map(sets).collect(),
        h: sets(run.limit()),
        cardinals: counts(system, &run.limit().cardinals()),
        stabilization_index: run.stabilization_index(),
        permutation_base: system.label(perm.base()).to_string(),
        cycles: perm
            .cycles()
            .iter()
            .map(|c| c.iter().map(|s| lattice.format_state(*s)).collect())
            .collect(),
        ergodic: invariant.ergodic,
        invariant_families: invariant
            .families
            .as_ref()
            .map(|fs| fs.iter().map(|f| state_sets(system, lattice, &f.sets)).collect()),
        solutions: solutions.iter().map(|s| state_values(system, lattice, &s.values)).collect(),
        atoms: measure
            .atoms
            .iter()
            .map(|a| AtomReport {
                sample: system.label(a.sample).to_string(),
                state: lattice.format_state(a.state),
                weight: format_rational(&a.weight),
            })
            .collect(),
        total_mass: format_rational(&measure.total_mass),
    });
    report.verdict("h_bijective", structure.bijective, "phi maps H onto H at the next sample one-to-one");
    report.verdict(
        "constant_cardinal",
        structure.constant_cardinal,
        format!("Card H = {} at every sample", structure.c),
    );
    report.verdict(
        "extension_invariant",
        measure.shift_invariant && measure.marginal_uniform,
        format!("weight 1/{} per atom, total mass {}", system.period() * structure.c, format_rational(&measure.total_mass)),
    );
    Ok(())
}

fn queue_sections(model: &Model, run: &BackwardsRun, report: &mut RunReport) -> Result<(), CliError> {
    match model {
        Model::Loss { system, params, model, .. } => {
            report.loss = Some(loss_section(system, model));
            let flipo = flipo_compare(system, params)?;
            let surjective = flipo.is_surjective();
            report.flipo = Some(flipo_section(system, &flipo));
            report.verdict("flipo_projection", surjective, "F(H-hat) = H at every sample");
        }
        Model::Impatience { system, model, .. } => {
            let section = impatience_section(system, model);
            if let Some(c) = run.cardinal().constant() {
                for bound in &section.bounds {
                    if let Some(b) = bound.value {
                        report.verdict(
                            &format!("bound_{}", bound.name),
                            c as i64 <= b,
                            format!("c = {c}, bound = {b}"),
                        );
                    }
                }
            }
            let cargo = &model.report.cargo;
            report.verdict(
                "cargo",
                cargo.holds,
                format!(
                    "E[D] = {} against E[xi Card A] = {}",
                    format_rational(&cargo.expected_patience),
                    format_rational(&cargo.weighted_waiting)
                ),
            );
            report.impatience = Some(section);
        }
        _ => {}
    }
    Ok(())
}

fn loss_section(system: &FiniteCyclicSystem, model: &LossModel) -> LossSection {
    let r = &model.report;
    LossSection {
        step: format_rational(&r.step),
        busy: index_sets(system, &r.busy),
        gamma: counts(system, &r.gamma),
        g: r.g,
        busy_values: rational_sets(system, &r.busy_values),
    }
}

fn flipo_section(system: &FiniteCyclicSystem, run: &FlipoRun) -> FlipoSection {
    let lattice = &run.loss.lattice;
    FlipoSection {
        index_stabilization: run.index_run.stabilization_index(),
        samples: system
            .samples()
            .map(|w| FlipoSample {
                sample: system.label(w).to_string(),
                indices: run.index_limit(w),
                projection: run.projection[w.0]
                    .iter()
                    .map(|(i, x)| FlipoPair {
                        index: *i,
                        workload: lattice.format_state(*x),
                    })
                    .collect(),
                surjective: run.surjective[w.0],
            })
            .collect(),
    }
}

fn impatience_section(system: &FiniteCyclicSystem, model: &ImpatienceModel) -> ImpatienceSection {
    let r = &model.report;
    ImpatienceSection {
        step: format_rational(&r.step),
        y: rational_values(system, &r.y),
        z: rational_values(system, &r.z),
        waiting: index_sets(system, &r.waiting),
        tau_minus: counts(system, &r.tau_minus),
        tau_plus: counts(system, &r.tau_plus),
        present: index_sets(system, &r.present),
        rho: counts(system, &r.rho),
        p: r.p,
        t: r.t,
        s_under: r.s_under,
        s_bar: r.s_bar,
        d_bar: r.d_bar,
        m: rational_values(system, &r.m),
        max_workload: rational_values(system, &r.max_workload),
        bounds: r
            .bounds
            .labeled()
            .into_iter()
            .map(|(name, value)| BoundEntry {
                name: name.to_string(),
                value,
            })
            .collect(),
        cargo: CargoReport {
            expected_patience: format_rational(&r.cargo.expected_patience),
            weighted_waiting: format_rational(&r.cargo.weighted_waiting),
            holds: r.cargo.holds,
            etoile: r.cargo.etoile,
        },
    }
}

fn loynes_iterations(config: &ModelConfig, map: &DrivingMap) -> usize {
    config
        .max_sweeps
        .unwrap_or_else(|| 10 * (map.system().period() + map.lattice().len()))
}

fn loynes_run(name: &str, map: &DrivingMap, max_iter: usize) -> Result<LoynesRun, CliError> {
    let system = map.system();
    let lattice = map.lattice();
    let order = order_checks(map);
    let counterexample = order.counterexample.map(|(w, x, y)| {
        [system.label(w).to_string(), lattice.format_state(x), lattice.format_state(y)]
    });
    if !order.monotone {
        return Ok(LoynesRun {
            map: name.to_string(),
            monotone: false,
            counterexample,
            outcome: "not_monotone".into(),
            iterations: 0,
            limit: None,
        });
    }
    let result = loynes_solve(map, max_iter)?;
    let (outcome, limit) = match &result.outcome {
        LoynesOutcome::Proper(y) => ("proper", Some(state_values(system, lattice, y))),
        LoynesOutcome::Improper(ImproperReason::Escaped { .. }) => ("escaped", None),
        LoynesOutcome::Improper(ImproperReason::NotStabilized { .. }) => ("not_stabilized", None),
    };
    Ok(LoynesRun {
        map: name.to_string(),
        monotone: true,
        counterexample,
        outcome: outcome.into(),
        iterations: result.iterations,
        limit,
    })
}

fn loynes_limit_matches(run: &LoynesRun, expected: &[Rational]) -> bool {
    run.limit.as_ref().is_some_and(|limit| {
        limit.len() == expected.len() && limit.iter().zip(expected).all(|(v, e)| v.value == format_rational(e))
    })
}

fn loynes(model: &Model, report: &mut RunReport) -> Result<(), CliError> {
    match model {
        Model::Impatience { system, params, model, .. } => {
            let env = envelopes(system, params, Some(model.lattice.x_max()))?;
            let max_iter = loynes_iterations(&report.config, &env.upper);
            let exact = loynes_run("exact", &env.exact, max_iter)?;
            let lower = loynes_run("lower", &env.lower, max_iter)?;
            let upper = loynes_run("upper", &env.upper, max_iter)?;
            let r = &model.report;
            report.verdict(
                "lower_limit_is_y",
                loynes_limit_matches(&lower, &r.y),
                "Loynes limit of chi equals Y",
            );
            report.verdict(
                "upper_limit_is_z",
                loynes_limit_matches(&upper, &r.z),
                "Loynes limit of psi equals Z",
            );
            upper_singleton(system, &env.upper, &r.z, report)?;
            report.loynes = Some(LoynesSection {
                lattice: LatticeReport::of(&env.lattice),
                runs: vec![exact, lower, upper],
            });
        }
        Model::Loss { model: m, .. } => {
            let max_iter = loynes_iterations(&report.config, &m.map);
            report.loynes = Some(LoynesSection {
                lattice: LatticeReport::of(&m.lattice),
                runs: vec![loynes_run("exact", &m.map, max_iter)?],
            });
        }
        Model::Abstract { lattice, map, .. } => {
            let max_iter = loynes_iterations(&report.config, map);
            report.loynes = Some(LoynesSection {
                lattice: LatticeReport::of(lattice),
                runs: vec![loynes_run("exact", map, max_iter)?],
            });
        }
        Model::Cftp { .. } => return Err(model_kind_error("loynes", "a loss, impatience or abstract model")),
    }
    Ok(())
}

/// The backwards scheme on `ψ` from `G = [0, Z]` collapses to `{Z}`.
fn upper_singleton(
    system: &FiniteCyclicSystem,
    upper: &DrivingMap,
    z: &[Rational],
    report: &mut RunReport,
) -> Result<(), CliError> {
    let lattice = upper.lattice();
    let g = RandomSet::new(z.iter().map(|zw| lattice.range(&Rational::default(), zw)).collect());
    let run = backwards_run(upper, &g, default_max_sweeps(upper, &g))?;
    let expected: Vec<_> = z.iter().map(|zw| lattice.state_of(zw)).collect();
    let holds = run.cardinal().constant() == Some(1)
        && system
            .samples()
            .all(|w| run.limit().get(w).iter().next().copied() == expected[w.0]);
    report.verdict("upper_backwards_singleton", holds, "backwards scheme on psi from [0, Z] gives H = {Z}");
    Ok(())
}

fn cftp(model: &Model, report: &mut RunReport, jobs: usize) -> Result<(), CliError> {
    let Model::Cftp {
        config,
        replications,
        seed,
    } = model
    else {
        unreachable!("cftp on a non-cftp model")
    };
    let est = cftp_estimate(config, *replications, *seed, jobs.max(1))?;
    let step = rational_gcd(config.service.atoms().iter().chain(config.interarrival.atoms()).map(|(v, _)| v))
        .unwrap_or_default();
    let freqs = est.frequencies();
    report.cftp = Some(CftpReport {
        step: format_rational(&step),
        replications: est.replications,
        coupled: est.coupled,
        seed: *seed,
        horizon_cap: config.horizon_cap,
        max_horizon: est.max_horizon,
        condition_holds: est.condition_holds,
        distribution: est
            .distribution
            .iter()
            .zip(&freqs)
            .map(|((v, n), (_, f))| CftpAtomCount {
                value: format_rational(v),
                count: *n,
                frequency: format_rational(f),
            })
            .collect(),
    });
    report.verdict(
        "all_coupled",
        est.coupled == est.replications,
        format!("{} of {} replications coupled", est.coupled, est.replications),
    );
    report.verdict(
        "idle_condition",
        est.condition_holds,
        format!("min service {} < max inter-arrival {}", format_rational(&config.service.min()), format_rational(&config.interarrival.max())),
    );
    Ok(())
}

/// Runs every configuration on a pool of `jobs` threads; results keep input order.
pub fn run_batch(
    command: Command,
    configs: Vec<ModelConfig>,
    overrides: &Overrides,
) -> Result<Vec<Result<RunReport, CliError>>, CliError> {
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(overrides.jobs.max(1))
        .build()
        .map_err(|e| CliError::new(exit::INTERNAL, "internal", format!("thread pool: {e}")))?;
    Ok(pool.install(|| configs.into_par_iter().map(|c| run(command, c, overrides)).collect()))
}

