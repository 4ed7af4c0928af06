//! Finite ergodic base systems, lattice state spaces and driving maps.
//!
//! The base `(Ω, θ, P)` is a single cycle of `k` samples with uniform weight,
//! the state space is the lattice `{0, α, 2α, …} ∩ [0, x_max]`, and a
//! [`DrivingMap`] assigns to every sample a state-to-state function `φ_ω`.
//!
//! Two compositions are provided:
//!
//! ```text
//! forward   X_{x,n}(ω) = φ_{θ^{n-1}ω} ∘ … ∘ φ_ω (x)
//! backward  Φ^n_ω(x)   = φ_{θ^{-1}ω} ∘ … ∘ φ_{θ^{-n}ω} (x) = X_{x,n}(θ^{-n}ω)
//! ```

use std::collections::BTreeSet;
use std::fmt;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rational::{format_rational, Rational};

/// Index of a sample in a [`FiniteCyclicSystem`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Sample(pub usize);

/// A lattice state, stored as the integer `n` of the value `n·α`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct State(pub usize);

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Uniform single-cycle shift on `k` labelled samples; `θ` sends sample `i`
/// to sample `i+1 mod k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteCyclicSystem {
    labels: Vec<String>,
}

impl FiniteCyclicSystem {
    pub fn new(labels: Vec<String>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::InvalidSystem("period must be at least 1".into()));
        }
        let unique: BTreeSet<&str> = labels.iter().map(String::as_str).collect();
        if unique.len() != labels.len() {
            return Err(Error::InvalidSystem("sample labels must be distinct".into()));
        }
        Ok(Self { labels })
    }

    /// System with labels `w1, …, wk`.
    pub fn with_period(k: usize) -> Result<Self> {
        Self::new((1..=k).map(|i| format!("w{i}")).collect())
    }

    pub fn period(&self) -> usize {
        self.labels.len()
    }

    pub fn samples(&self) -> impl Iterator<Item = Sample> + Clone {
        (0..self.labels.len()).map(Sample)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, sample: Sample) -> &str {
        &self.labels[sample.0]
    }

    pub fn sample(&self, label: &str) -> Result<Sample> {
        self.labels
            .iter()
            .position(|l| l == label)
            .map(Sample)
            .ok_or_else(|| Error::UnknownSample(label.to_string()))
    }

    /// `θ^n ω`; `n` may be negative.
    pub fn shift(&self, sample: Sample, n: i64) -> Sample {
        let k = self.period() as i64;
        Sample((sample.0 as i64 + n).rem_euclid(k) as usize)
    }

    /// Label-level shift, failing on unknown labels.
    pub fn shift_label(&self, label: &str, n: i64) -> Result<&str> {
        let s = self.sample(label)?;
        Ok(self.label(self.shift(s, n)))
    }

    /// Uniform probability `1/k` of each sample.
    pub fn probability(&self) -> Rational {
        Rational::new(1, self.period() as i64)
    }
}

/// Totally ordered state lattice `L_α ∩ [0, x_max]`, with minimal point `0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateLattice {
    step: Rational,
    x_max: Rational,
    top: usize,
}

impl StateLattice {
    pub fn new(step: Rational, x_max: Rational) -> Result<Self> {
        if step <= Rational::zero() {
            return Err(Error::InvalidLattice(format!(
                "step must be positive, got {}",
                format_rational(&step)
            )));
        }
        if x_max < Rational::zero() {
            return Err(Error::InvalidLattice(format!(
                "x_max must be nonnegative, got {}",
                format_rational(&x_max)
            )));
        }
        let top = (x_max / step).floor().to_integer();
        let top = usize::try_from(top)
            .map_err(|_| Error::InvalidLattice("lattice too large".into()))?;
        if top > 50_000_000 {
            return Err(Error::InvalidLattice(format!(
                "lattice with {} states is too large",
                top + 1
            )));
        }
        Ok(Self { step, x_max, top })
    }

    pub fn step(&self) -> Rational {
        self.step
    }

    pub fn x_max(&self) -> Rational {
        self.x_max
    }

    /// Number of states.
    pub fn len(&self) -> usize {
        self.top + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn top(&self) -> State {
        State(self.top)
    }

    pub fn states(&self) -> impl DoubleEndedIterator<Item = State> + ExactSizeIterator + Clone {
        (0..self.top + 1).map(State)
    }

    pub fn contains(&self, state: State) -> bool {
        state.0 <= self.top
    }

    pub fn value(&self, state: State) -> Rational {
        self.step * Rational::from_integer(state.0 as i64)
    }

    /// The state with value exactly `x`, if `x` is a lattice point in range.
    pub fn state_of(&self, x: &Rational) -> Option<State> {
        let q = x / self.step;
        if !q.is_integer() || q < Rational::zero() {
            return None;
        }
        let n = q.to_integer() as usize;
        (n <= self.top).then_some(State(n))
    }

    /// All lattice states with `lo ≤ value ≤ hi`.
    pub fn range(&self, lo: &Rational, hi: &Rational) -> BTreeSet<State> {
        let first = (lo / self.step).ceil().to_integer().max(0);
        let last = (hi / self.step).floor().to_integer().min(self.top as i64);
        (first..=last).map(|n| State(n as usize)).collect()
    }

    /// Lattice with step `α/factor` over the same `[0, x_max]`.
    pub fn refine(&self, factor: u32) -> Result<Self> {
        if factor == 0 {
            return Err(Error::InvalidLattice("refinement factor must be positive".into()));
        }
        Self::new(self.step / Rational::from_integer(factor as i64), self.x_max)
    }

    pub fn format_state(&self, state: State) -> String {
        format_rational(&self.value(state))
    }
}

/// Per-sample state transition `φ_ω`, tabulated on the lattice.
///
/// A table entry is `None` when the image lies above `x_max`; evaluating such
/// an entry is a closure violation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DrivingMap {
    system: FiniteCyclicSystem,
    lattice: StateLattice,
    images: Vec<Vec<Option<State>>>,
}

impl DrivingMap {
    /// Tabulates `rule(ω, x)` for every sample and lattice value.
    ///
    /// Images must be lattice multiples; images above `x_max` are recorded as
    /// escapes and surface as errors when evaluated.
    pub fn from_rule<F>(system: &FiniteCyclicSystem, lattice: &StateLattice, rule: F) -> Result<Self>
    where
        F: Fn(Sample, Rational) -> Rational,
    {
        let mut images = Vec::with_capacity(system.period());
        for w in system.samples() {
            let mut row = Vec::with_capacity(lattice.len());
            for x in lattice.states() {
                let y = rule(w, lattice.value(x));
                let q = y / lattice.step();
                if !q.is_integer() || y < Rational::zero() {
                    return Err(Error::OffLattice {
                        sample: system.label(w).to_string(),
                        state: lattice.format_state(x),
                        value: format_rational(&y),
                    });
                }
                let n = q.to_integer() as usize;
                row.push((n < lattice.len()).then_some(State(n)));
            }
            images.push(row);
        }
        Ok(Self {
            system: system.clone(),
            lattice: lattice.clone(),
            images,
        })
    }

    /// Builds a map from explicit image tables, one row per sample.
    pub fn from_tables(
        system: &FiniteCyclicSystem,
        lattice: &StateLattice,
        tables: Vec<Vec<State>>,
    ) -> Result<Self> {
        if tables.len() != system.period() {
            return Err(Error::Mismatch(format!(
                "{} tables for a period of {}",
                tables.len(),
                system.period()
            )));
        }
        let mut images = Vec::with_capacity(tables.len());
        for (w, row) in system.samples().zip(tables) {
            if row.len() != lattice.len() {
                return Err(Error::Mismatch(format!(
                    "table for sample {} has {} entries, lattice has {}",
                    system.label(w),
                    row.len(),
                    lattice.len()
                )));
            }
            images.push(row.into_iter().map(|y| lattice.contains(y).then_some(y)).collect());
        }
        Ok(Self {
            system: system.clone(),
            lattice: lattice.clone(),
            images,
        })
    }

    pub fn system(&self) -> &FiniteCyclicSystem {
        &self.system
    }

    pub fn lattice(&self) -> &StateLattice {
        &self.lattice
    }

    /// True when no table entry escapes the lattice.
    pub fn is_closed(&self) -> bool {
        self.images.iter().all(|row| row.iter().all(Option::is_some))
    }

    /// Raw table entry; `None` marks an escape.
    pub fn image(&self, sample: Sample, x: State) -> Option<State> {
        self.images[sample.0].get(x.0).copied().flatten()
    }

    /// `φ_ω(x)`.
    pub fn evaluate(&self, sample: Sample, x: State) -> Result<State> {
        let row = &self.images[sample.0];
        match row.get(x.0) {
            None => Err(Error::StateOutOfRange(x.0)),
            Some(Some(y)) => Ok(*y),
            Some(None) => Err(Error::Escape {
                sample: self.system.label(sample).to_string(),
                state: self.lattice.format_state(x),
            }),
        }
    }

    /// `Φ^n_ω(x) = φ_{θ^{-1}ω} ∘ … ∘ φ_{θ^{-n}ω}(x)`; `n = 0` returns `x`.
    pub fn backward_value(&self, sample: Sample, x: State, n: usize) -> Result<State> {
        let start = self.system.shift(sample, -(n as i64));
        self.forward_value(start, x, n)
    }

    /// `X_{x,n}(ω) = φ_{θ^{n-1}ω} ∘ … ∘ φ_ω(x)`.
    pub fn forward_value(&self, sample: Sample, x: State, n: usize) -> Result<State> {
        let mut w = sample;
        let mut x = x;
        for _ in 0..n {
            x = self.evaluate(w, x)?;
            w = self.system.shift(w, 1);
        }
        Ok(x)
    }

    /// `φ_ω(S)`.
    pub fn image_set(&self, sample: Sample, set: &BTreeSet<State>) -> Result<BTreeSet<State>> {
        set.iter().map(|&x| self.evaluate(sample, x)).collect()
    }

    /// True when both maps share the same base system and lattice.
    pub fn compatible_with(&self, other: &DrivingMap) -> bool {
        self.system == other.system && self.lattice == other.lattice
    }

    /// Identity map on a lattice.
    pub fn identity(system: &FiniteCyclicSystem, lattice: &StateLattice) -> Self {
        let row: Vec<Option<State>> = lattice.states().map(Some).collect();
        Self {
            system: system.clone(),
            lattice: lattice.clone(),
            images: vec![row; system.period()],
        }
    }
}

/// Exact value of `n` lattice steps.
pub fn steps(lattice: &StateLattice, n: i64) -> Rational {
    lattice.step() * Rational::from_integer(n)
}

/// `[x]⁺`.
pub fn positive_part(x: Rational) -> Rational {
    if x < Rational::zero() {
        Rational::zero()
    } else {
        x
    }
}

/// `1` if `cond` else `0`, as a rational.
pub fn indicator(cond: bool) -> Rational {
    if cond {
        Rational::one()
    } else {
        Rational::zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn two_cycle() -> FiniteCyclicSystem {
        FiniteCyclicSystem::with_period(2).unwrap()
    }

    #[test]
    fn shift_on_two_cycle() {
        let sys = two_cycle();
        assert_eq!(sys.shift_label("w1", 1).unwrap(), "w2");
        assert_eq!(sys.shift_label("w1", -1).unwrap(), "w2");
        assert_eq!(sys.shift_label("w2", 4).unwrap(), "w2");
        assert!(matches!(sys.shift_label("w9", 1), Err(Error::UnknownSample(_))));
    }

    #[test]
    fn shift_period_is_identity() {
        let sys = FiniteCyclicSystem::with_period(5).unwrap();
        for w in sys.samples() {
            assert_eq!(sys.shift(w, 5), w);
            assert_eq!(sys.shift(sys.shift(w, 3), -3), w);
        }
    }

    #[test]
    fn rejects_degenerate_systems() {
        assert!(FiniteCyclicSystem::new(vec![]).is_err());
        assert!(FiniteCyclicSystem::new(vec!["a".into(), "a".into()]).is_err());
    }

    #[test]
    fn lattice_membership() {
        let lat = StateLattice::new(r(1, 2), r(51, 20)).unwrap();
        assert_eq!(lat.len(), 6);
        assert_eq!(lat.state_of(&r(3, 2)), Some(State(3)));
        assert_eq!(lat.state_of(&r(3, 4)), None);
        assert_eq!(lat.state_of(&r(3, 1)), None);
        assert_eq!(lat.value(State(5)), r(5, 2));
        let g: Vec<_> = lat.range(&r(1, 2), &r(251, 100)).into_iter().collect();
        assert_eq!(g, vec![State(1), State(2), State(3), State(4), State(5)]);
        assert!(StateLattice::new(r(0, 1), r(1, 1)).is_err());
    }

    fn impatience_example3() -> DrivingMap {
        let sys = two_cycle();
        let lat = StateLattice::new(r(1, 2), r(7, 2)).unwrap();
        let sigma = [r(1, 2), r(3, 2)];
        let patience = [r(151, 100), r(201, 100)];
        DrivingMap::from_rule(&sys, &lat, |w, x| {
            positive_part(x + sigma[w.0] * indicator(x <= patience[w.0]) - Rational::one())
        })
        .unwrap()
    }

    #[test]
    fn evaluate_matches_hand_values() {
        let map = impatience_example3();
        let lat = map.lattice().clone();
        let at = |v: Rational| lat.state_of(&v).unwrap();
        assert_eq!(map.evaluate(Sample(1), at(r(3, 2))).unwrap(), at(r(2, 1)));
        assert_eq!(map.evaluate(Sample(0), at(r(1, 1))).unwrap(), at(r(1, 2)));

        let sys = two_cycle();
        let loss = DrivingMap::from_rule(&sys, &lat, |_, x| {
            positive_part(x + indicator(x.is_zero()) - Rational::one())
        })
        .unwrap();
        assert_eq!(loss.evaluate(Sample(0), State(0)).unwrap(), State(0));
    }

    #[test]
    fn backward_value_composes_in_reverse_time() {
        let map = impatience_example3();
        let lat = map.lattice().clone();
        let at = |v: Rational| lat.state_of(&v).unwrap();
        // φ_{ω1}(1.5) = 1, then φ_{ω2}(1) = 1.5.
        assert_eq!(map.backward_value(Sample(0), at(r(3, 2)), 2).unwrap(), at(r(3, 2)));
        for x in lat.states() {
            assert_eq!(
                map.backward_value(Sample(0), x, 1).unwrap(),
                map.evaluate(Sample(1), x).unwrap()
            );
        }
    }

    #[test]
    fn escapes_and_off_lattice_images() {
        let sys = two_cycle();
        let lat = StateLattice::new(r(1, 1), r(2, 1)).unwrap();
        let up = DrivingMap::from_rule(&sys, &lat, |_, x| x + Rational::one()).unwrap();
        assert!(!up.is_closed());
        assert!(matches!(up.evaluate(Sample(0), State(2)), Err(Error::Escape { .. })));
        assert!(matches!(up.evaluate(Sample(0), State(7)), Err(Error::StateOutOfRange(7))));
        let half = DrivingMap::from_rule(&sys, &lat, |_, x| x / Rational::from_integer(2));
        assert!(matches!(half, Err(Error::OffLattice { .. })));
    }
}
