//! The backwards scheme on sets, for maps that need not be monotone.
//!
//! Starting from a random set `G` that is stable under the driving map
//! (`φ_ω(G_ω) ⊆ G_{θω}`), the image sets
//!
//! ```text
//! H^n_ω = Φ^n_ω(G_{θ^{-n}ω}),     H^{n+1}_ω = φ_{θ^{-1}ω}(H^n_{θ^{-1}ω})
//! ```
//!
//! decrease for inclusion. Their limit `H` has a sample-independent cardinal
//! `c`, `φ_ω` is a bijection `H_ω → H_{θω}`, and the weights `1/(k·c)` on the
//! pairs `(ω, x ∈ H_ω)` define a stationary extension of the base on which the
//! recursion always has a solution. On a finite cyclic base the whole
//! structure is captured by one permutation of `H_{ω0}`: its fixed points are
//! the stationary solutions on the original space, unions of its cycles are
//! the invariant events, and a single cycle means the extension is ergodic.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::system::{DrivingMap, Sample, State};

/// Per-sample finite set of lattice states.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RandomSet {
    sets: Vec<BTreeSet<State>>,
}

impl RandomSet {
    pub fn new(sets: Vec<BTreeSet<State>>) -> Self {
        Self { sets }
    }

    /// The whole lattice at every sample.
    pub fn full(map: &DrivingMap) -> Self {
        let all: BTreeSet<State> = map.lattice().states().collect();
        Self::new(vec![all; map.system().period()])
    }

    pub fn get(&self, sample: Sample) -> &BTreeSet<State> {
        &self.sets[sample.0]
    }

    pub fn sets(&self) -> &[BTreeSet<State>] {
        &self.sets
    }

    pub fn cardinals(&self) -> Vec<usize> {
        self.sets.iter().map(BTreeSet::len).collect()
    }

    pub fn max_cardinal(&self) -> usize {
        self.sets.iter().map(BTreeSet::len).max().unwrap_or(0)
    }

    pub fn is_subset(&self, other: &RandomSet) -> bool {
        self.sets.len() == other.sets.len()
            && self.sets.iter().zip(&other.sets).all(|(a, b)| a.is_subset(b))
    }

    fn validate(&self, map: &DrivingMap) -> Result<()> {
        let system = map.system();
        if self.sets.len() != system.period() {
            return Err(Error::Mismatch(format!(
                "random set has {} components for a period of {}",
                self.sets.len(),
                system.period()
            )));
        }
        for w in system.samples() {
            let set = self.get(w);
            if set.is_empty() {
                return Err(Error::EmptyRandomSet(system.label(w).to_string()));
            }
            if let Some(x) = set.iter().find(|x| !map.lattice().contains(**x)) {
                return Err(Error::StateOutOfRange(x.0));
            }
        }
        Ok(())
    }

    /// Checks `φ_ω(G_ω) ⊆ G_{θω}` for every sample.
    pub fn check_stable(&self, map: &DrivingMap) -> Result<()> {
        let system = map.system();
        for w in system.samples() {
            let next = self.get(system.shift(w, 1));
            for &x in self.get(w) {
                let y = map.evaluate(w, x)?;
                if !next.contains(&y) {
                    return Err(Error::NotStable {
                        sample: system.label(w).to_string(),
                        state: map.lattice().format_state(x),
                        image: map.lattice().format_state(y),
                    });
                }
            }
        }
        Ok(())
    }

    /// The random set `ω ↦ φ_{θ^{-1}ω}(S_{θ^{-1}ω})`.
    pub fn push_forward(&self, map: &DrivingMap) -> Result<RandomSet> {
        let system = map.system();
        let sets = system
            .samples()
            .map(|w| {
                let prev = system.shift(w, -1);
                map.image_set(prev, self.get(prev))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(RandomSet::new(sets))
    }
}

/// `Card H`: constant across samples, or the per-sample cardinals when not.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Cardinal {
    Constant(usize),
    NotConstant(Vec<usize>),
}

impl Cardinal {
    pub fn constant(&self) -> Option<usize> {
        match self {
            Cardinal::Constant(c) => Some(*c),
            Cardinal::NotConstant(_) => None,
        }
    }
}

/// A stabilized run of the backwards scheme.
#[derive(Debug, Clone)]
pub struct BackwardsRun {
    map: DrivingMap,
    g: RandomSet,
    history: Vec<RandomSet>,
    stabilization_index: usize,
    cardinal: Cardinal,
}

/// `10·(k + Card(largest G))`.
pub fn default_max_sweeps(map: &DrivingMap, g: &RandomSet) -> usize {
    10 * (map.system().period() + g.max_cardinal())
}

/// Computes `H^1, H^2, …` until one full sweep leaves every `H^n_ω` unchanged.
///
/// Because `H^{n+1}_ω = φ_{θ^{-1}ω}(H^n_{θ^{-1}ω})`, a sweep with
/// `H^{n+1} = H^n` at every sample is a fixed point of the recursion, so the
/// sequence is constant from there on and equals its limit `H`.
pub fn backwards_run(map: &DrivingMap, g: &RandomSet, max_sweeps: usize) -> Result<BackwardsRun> {
    g.validate(map)?;
    g.check_stable(map)?;
    let first = g.push_forward(map)?;
    if !first.is_subset(g) {
        return Err(Error::Internal("H^1 is not contained in G".into()));
    }
    let mut history = vec![first];
    loop {
        let current = history.last().expect("history is never empty");
        let next = current.push_forward(map)?;
        if !next.is_subset(current) {
            return Err(Error::Internal(format!(
                "H^{} is not contained in H^{}",
                history.len() + 1,
                history.len()
            )));
        }
        if &next == current {
            break;
        }
        if history.len() >= max_sweeps {
            return Err(Error::NotStabilized(max_sweeps));
        }
        history.push(next);
    }
    let stabilization_index = history.len();
    let limit = history.last().expect("history is never empty");
    let cards = limit.cardinals();
    let cardinal = if cards.windows(2).all(|w| w[0] == w[1]) {
        Cardinal::Constant(cards[0])
    } else {
        Cardinal::NotConstant(cards)
    };
    Ok(BackwardsRun {
        map: map.clone(),
        g: g.clone(),
        history,
        stabilization_index,
        cardinal,
    })
}

impl BackwardsRun {
    pub fn map(&self) -> &DrivingMap {
        &self.map
    }

    pub fn g(&self) -> &RandomSet {
        &self.g
    }

    /// `H^1, …, H^{N'}`; the last entry equals the limit.
    pub fn history(&self) -> &[RandomSet] {
        &self.history
    }

    /// `H^n` for any `n ≥ 1` (constant past the stabilization index).
    pub fn h(&self, n: usize) -> &RandomSet {
        assert!(n >= 1, "H^n is defined for n >= 1");
        &self.history[n.min(self.history.len()) - 1]
    }

    /// The limit `H = ⋂ H^n`.
    pub fn limit(&self) -> &RandomSet {
        self.history.last().expect("history is never empty")
    }

    /// Smallest `N'` with `H^{N'+1} = H^{N'}`; the strong backwards coupling time.
    pub fn stabilization_index(&self) -> usize {
        self.stabilization_index
    }

    pub fn cardinal(&self) -> &Cardinal {
        &self.cardinal
    }
}

/// `Φ^n_ω(G_{θ^{-n}ω})` evaluated point by point, without the sweep recursion.
pub fn image_at_horizon(map: &DrivingMap, g: &RandomSet, sample: Sample, n: usize) -> Result<BTreeSet<State>> {
    let start = map.system().shift(sample, -(n as i64));
    g.get(start).iter().map(|&x| map.backward_value(sample, x, n)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StructureReport {
    pub c: usize,
    pub bijective: bool,
    pub constant_cardinal: bool,
}

/// Confirms that every `φ_ω` restricted to `H_ω` is a bijection onto `H_{θω}`
/// and that `Card H_ω` does not depend on `ω`.
pub fn verify_structure(run: &BackwardsRun) -> Result<StructureReport> {
    let map = run.map();
    let system = map.system();
    let h = run.limit();
    for w in system.samples() {
        let here = h.get(w);
        let image = map.image_set(w, here)?;
        let there = h.get(system.shift(w, 1));
        if image != *there || image.len() != here.len() {
            return Err(Error::Internal(format!(
                "phi at sample {} is not a bijection from H onto H at the next sample",
                system.label(w)
            )));
        }
    }
    match run.cardinal() {
        Cardinal::Constant(c) => Ok(StructureReport {
            c: *c,
            bijective: true,
            constant_cardinal: true,
        }),
        Cardinal::NotConstant(cards) => Err(Error::Internal(format!(
            "Card H is not constant across samples: {cards:?}"
        ))),
    }
}

/// One atom `(ω, x)` of the extended space with its weight.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atom {
    pub sample: Sample,
    pub state: State,
    pub weight: Rational,
}

/// The stationary measure `Q` on `{(ω, x) : x ∈ H_ω}` and the checks run on it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtensionMeasure {
    pub atoms: Vec<Atom>,
    pub total_mass: Rational,
    /// Push-forward through `θ̃(ω, x) = (θω, φ_ω(x))` reproduces every weight.
    pub shift_invariant: bool,
    /// Each sample carries total weight `1/k`.
    pub marginal_uniform: bool,
}

impl ExtensionMeasure {
    pub fn weight_of(&self, sample: Sample, state: State) -> Rational {
        self.atoms
            .iter()
            .find(|a| a.sample == sample && a.state == state)
            .map(|a| a.weight)
            .unwrap_or_default()
    }
}

/// Builds `Q` with weight `1/(k·c)` per atom and verifies invariance and the
/// base marginal by explicit push-forward.
pub fn extension_measure(run: &BackwardsRun) -> Result<ExtensionMeasure> {
    let structure = verify_structure(run)?;
    let map = run.map();
    let system = map.system();
    let k = system.period() as i64;
    let weight = Rational::new(1, k * structure.c as i64);

    let mut atoms = Vec::new();
    for w in system.samples() {
        for &x in run.limit().get(w) {
            atoms.push(Atom {
                sample: w,
                state: x,
                weight,
            });
        }
    }
    let original: BTreeMap<(Sample, State), Rational> =
        atoms.iter().map(|a| ((a.sample, a.state), a.weight)).collect();
    let mut pushed: BTreeMap<(Sample, State), Rational> = BTreeMap::new();
    for a in &atoms {
        let target = (system.shift(a.sample, 1), map.evaluate(a.sample, a.state)?);
        *pushed.entry(target).or_default() += a.weight;
    }
    let shift_invariant = pushed == original;

    let mut marginal: BTreeMap<Sample, Rational> = BTreeMap::new();
    for a in &atoms {
        *marginal.entry(a.sample).or_default() += a.weight;
    }
    let marginal_uniform = system
        .samples()
        .all(|w| marginal.get(&w).copied().unwrap_or_default() == system.probability());
    let total_mass: Rational = atoms.iter().map(|a| a.weight).sum();

    if !shift_invariant || !marginal_uniform || total_mass != Rational::from_integer(1) {
        return Err(Error::Internal("extension measure failed its invariance checks".into()));
    }
    Ok(ExtensionMeasure {
        atoms,
        total_mass,
        shift_invariant,
        marginal_uniform,
    })
}

/// The bijection of `H_{ω0}` obtained by composing `φ` over one full period.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeriodPermutation {
    base: Sample,
    period: usize,
    /// For each `x ∈ H_{ω0}`: `[x, φ_{ω0}(x), φ_{θω0}φ_{ω0}(x), …]`, `k + 1` entries.
    orbits: BTreeMap<State, Vec<State>>,
    cycles: Vec<Vec<State>>,
}

impl PeriodPermutation {
    pub fn base(&self) -> Sample {
        self.base
    }

    pub fn domain(&self) -> impl Iterator<Item = State> + '_ {
        self.orbits.keys().copied()
    }

    /// `π(x)`, or `None` when `x ∉ H_{ω0}`.
    pub fn apply(&self, x: State) -> Option<State> {
        self.orbits.get(&x).map(|orbit| orbit[self.period])
    }

    /// Cycles, each starting at its smallest state, ordered by that state.
    pub fn cycles(&self) -> &[Vec<State>] {
        &self.cycles
    }

    pub fn fixed_points(&self) -> impl Iterator<Item = State> + '_ {
        self.cycles.iter().filter(|c| c.len() == 1).map(|c| c[0])
    }

    /// Value at `θ^j ω0` of the trajectory started from `x` at `ω0`.
    fn orbit_value(&self, x: State, j: usize) -> State {
        self.orbits[&x][j]
    }

    /// Lifts a subset of `H_{ω0}` along the period: component `θ^j ω0` is the
    /// image of the subset after `j` steps.
    fn lift(&self, subset: &BTreeSet<State>) -> Vec<BTreeSet<State>> {
        let mut sets = vec![BTreeSet::new(); self.period];
        for j in 0..self.period {
            let w = (self.base.0 + j) % self.period;
            sets[w] = subset.iter().map(|&x| self.orbit_value(x, j)).collect();
        }
        sets
    }
}

pub fn period_permutation(run: &BackwardsRun) -> Result<PeriodPermutation> {
    verify_structure(run)?;
    let map = run.map();
    let system = map.system();
    let base = Sample(0);
    let k = system.period();
    let domain = run.limit().get(base);

    let mut orbits = BTreeMap::new();
    for &x in domain {
        let mut orbit = Vec::with_capacity(k + 1);
        orbit.push(x);
        let mut y = x;
        for j in 0..k {
            y = map.evaluate(system.shift(base, j as i64), y)?;
            orbit.push(y);
        }
        orbits.insert(x, orbit);
    }
    let images: BTreeSet<State> = orbits.values().map(|o| o[k]).collect();
    if images != *domain {
        return Err(Error::Internal("period map is not a permutation of H".into()));
    }

    let mut seen = BTreeSet::new();
    let mut cycles = Vec::new();
    for &start in domain {
        if seen.contains(&start) {
            continue;
        }
        let mut cycle = vec![start];
        seen.insert(start);
        let mut x = orbits[&start][k];
        while x != start {
            cycle.push(x);
            seen.insert(x);
            x = orbits[&x][k];
        }
        cycles.push(cycle);
    }
    Ok(PeriodPermutation {
        base,
        period: k,
        orbits,
        cycles,
    })
}

/// One invariant family `{I_ω}` with `I_{θω} = φ_ω(I_ω)`, indexed by sample.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvariantFamily {
    pub sets: Vec<BTreeSet<State>>,
}

/// Invariant events of the extension.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvariantSets {
    /// Only the trivial events are invariant.
    pub ergodic: bool,
    pub cycle_lengths: Vec<usize>,
    /// Every nonempty union of cycles, lifted along the period; `None` when
    /// the number of cycles exceeds [`MAX_ENUMERATED_CYCLES`].
    pub families: Option<Vec<InvariantFamily>>,
}

/// Above this many cycles only the cycle structure is reported.
pub const MAX_ENUMERATED_CYCLES: usize = 12;

pub fn invariant_sets(perm: &PeriodPermutation) -> InvariantSets {
    let cycles = perm.cycles();
    let cycle_lengths = cycles.iter().map(Vec::len).collect();
    let families = (cycles.len() <= MAX_ENUMERATED_CYCLES).then(|| {
        (1u32..(1u32 << cycles.len()))
            .map(|mask| {
                let subset: BTreeSet<State> = cycles
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask & (1 << i) != 0)
                    .flat_map(|(_, c)| c.iter().copied())
                    .collect();
                InvariantFamily {
                    sets: perm.lift(&subset),
                }
            })
            .collect()
    });
    InvariantSets {
        ergodic: cycles.len() == 1,
        cycle_lengths,
        families,
    }
}

/// A selection `ω ↦ x(ω)` solving `x(θω) = φ_ω(x(ω))`, indexed by sample.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Selection {
    pub values: Vec<State>,
}

/// All stationary solutions on the original space taking values in `G`:
/// one per fixed point of the period permutation, each re-verified against
/// the recursion.
pub fn stationary_solutions(run: &BackwardsRun) -> Result<Vec<Selection>> {
    let perm = period_permutation(run)?;
    let map = run.map();
    let mut out = Vec::new();
    for x in perm.fixed_points() {
        let single: BTreeSet<State> = [x].into_iter().collect();
        let values: Vec<State> = perm
            .lift(&single)
            .into_iter()
            .map(|s| *s.iter().next().expect("singleton lift"))
            .collect();
        let selection = Selection { values };
        if !solves_recursion(map, &selection)? {
            return Err(Error::Internal("fixed point does not solve the recursion".into()));
        }
        out.push(selection);
    }
    out.sort_by_key(|s| s.values[perm.base().0]);
    Ok(out)
}

/// `x(θω) = φ_ω(x(ω))` at every sample.
pub fn solves_recursion(map: &DrivingMap, selection: &Selection) -> Result<bool> {
    let system = map.system();
    if selection.values.len() != system.period() {
        return Ok(false);
    }
    for w in system.samples() {
        let next = selection.values[system.shift(w, 1).0];
        if map.evaluate(w, selection.values[w.0])? != next {
            return Ok(false);
        }
    }
    Ok(true)
}
