//! Monotone-case machinery: order and domination checks, Loynes' scheme and
//! the finite-window regeneration (condition (v)) verifier.
//!
//! Continuity of the maps is vacuous on a finite lattice; reports say so
//! explicitly rather than claiming a property that was never tested.

use crate::backwards::RandomSet;
use crate::error::{Error, Result};
use crate::system::{DrivingMap, Sample, State};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Continuity {
    /// Every map on a finite discrete lattice is continuous.
    VacuousOnFiniteLattice,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderReport {
    pub monotone: bool,
    pub continuity: Continuity,
    /// First `(ω, x, y)` with `x < y` but `φ_ω(x) > φ_ω(y)`.
    pub counterexample: Option<(Sample, State, State)>,
}

/// Exhaustive scan for `x ≤ y ⇒ φ_ω(x) ≤ φ_ω(y)`.
///
/// On a total order it suffices to compare neighbours; escaping entries are
/// treated as larger than every lattice state.
pub fn order_checks(map: &DrivingMap) -> OrderReport {
    let key = |img: Option<State>| img.map_or(usize::MAX, |s| s.0);
    for w in map.system().samples() {
        let states: Vec<State> = map.lattice().states().collect();
        for pair in states.windows(2) {
            if key(map.image(w, pair[0])) > key(map.image(w, pair[1])) {
                return OrderReport {
                    monotone: false,
                    continuity: Continuity::VacuousOnFiniteLattice,
                    counterexample: Some((w, pair[0], pair[1])),
                };
            }
        }
    }
    OrderReport {
        monotone: true,
        continuity: Continuity::VacuousOnFiniteLattice,
        counterexample: None,
    }
}

/// `lower_ω(x) ≤ upper_ω(x)` for every sample and state.
pub fn dominates(lower: &DrivingMap, upper: &DrivingMap) -> Result<bool> {
    if !lower.compatible_with(upper) {
        return Err(Error::Mismatch("maps live on different systems or lattices".into()));
    }
    for w in lower.system().samples() {
        for x in lower.lattice().states() {
            match (lower.image(w, x), upper.image(w, x)) {
                (_, None) => {}
                (None, Some(_)) => return Ok(false),
                (Some(a), Some(b)) if a > b => return Ok(false),
                _ => {}
            }
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ImproperReason {
    /// `Φ^n_ω(0)` left `[0, x_max]` at this iteration.
    Escaped { sample: Sample, iteration: usize },
    NotStabilized { iterations: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LoynesOutcome {
    /// The limit `Y(ω)`, indexed by sample.
    Proper(Vec<State>),
    Improper(ImproperReason),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonotoneSolveResult {
    pub outcome: LoynesOutcome,
    /// Index `n` at which `Φ^{n+1}(0) = Φ^n(0)` was observed.
    pub iterations: usize,
}

impl MonotoneSolveResult {
    pub fn limit(&self) -> Option<&[State]> {
        match &self.outcome {
            LoynesOutcome::Proper(y) => Some(y),
            LoynesOutcome::Improper(_) => None,
        }
    }
}

/// Loynes' sequence `Φ^n(0)`, iterated until it stops increasing.
pub fn loynes_solve(map: &DrivingMap, max_iter: usize) -> Result<MonotoneSolveResult> {
    let order = order_checks(map);
    if let Some((w, lo, hi)) = order.counterexample {
        return Err(Error::NotMonotone {
            sample: map.system().label(w).to_string(),
            low: map.lattice().format_state(lo),
            high: map.lattice().format_state(hi),
        });
    }
    let system = map.system();
    let mut current = vec![State(0); system.period()];
    for n in 0..max_iter {
        let mut next = Vec::with_capacity(current.len());
        for w in system.samples() {
            let prev = system.shift(w, -1);
            match map.image(prev, current[prev.0]) {
                Some(y) => next.push(y),
                None => {
                    return Ok(MonotoneSolveResult {
                        outcome: LoynesOutcome::Improper(ImproperReason::Escaped {
                            sample: w,
                            iteration: n + 1,
                        }),
                        iterations: n + 1,
                    })
                }
            }
        }
        if next.iter().zip(&current).any(|(a, b)| a < b) {
            return Err(Error::Internal("Loynes sequence decreased on a monotone map".into()));
        }
        if next == current {
            for w in system.samples() {
                if map.evaluate(w, current[w.0])? != current[system.shift(w, 1).0] {
                    return Err(Error::Internal("Loynes limit does not solve the recursion".into()));
                }
            }
            return Ok(MonotoneSolveResult {
                outcome: LoynesOutcome::Proper(current),
                iterations: n,
            });
        }
        current = next;
    }
    Ok(MonotoneSolveResult {
        outcome: LoynesOutcome::Improper(ImproperReason::NotStabilized { iterations: max_iter }),
        iterations: max_iter,
    })
}

/// Last horizon inspected by [`verify_condition_v`]: `p + k·⌈x_max/α⌉ + k`.
///
/// Per-sample image sets of a finite map on a `k`-periodic base are
/// eventually periodic with period dividing `k` once they stop shrinking,
/// which takes at most one sweep per lattice state.
pub fn condition_v_horizon(map: &DrivingMap, p: usize) -> usize {
    let k = map.system().period();
    p + k * (map.lattice().len() - 1) + k
}

/// A start value and horizon violating condition (v).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConditionVViolation {
    pub sample: Sample,
    pub horizon: usize,
    pub value: State,
}

/// Searches for `n ∈ [p, n_check]`, `ω` in the event and `x ∈ S_{θ^{-n}ω}`
/// with `Φ^n_ω(x) ∉ B_ω`.
pub fn condition_v_violation(
    map: &DrivingMap,
    start: &RandomSet,
    p: usize,
    b: &RandomSet,
    event: &[Sample],
) -> Result<Option<ConditionVViolation>> {
    if event.is_empty() {
        return Err(Error::InvalidParams("condition (v) needs a nonempty event".into()));
    }
    if p == 0 {
        return Err(Error::InvalidParams("condition (v) needs p >= 1".into()));
    }
    let k = map.system().period();
    if start.sets().len() != k || b.sets().len() != k {
        return Err(Error::Mismatch("random sets do not match the period".into()));
    }
    let n_check = condition_v_horizon(map, p);
    let mut images = start.clone();
    for n in 1..=n_check {
        images = images.push_forward(map)?;
        if n < p {
            continue;
        }
        for &w in event {
            if let Some(&x) = images.get(w).iter().find(|x| !b.get(w).contains(x)) {
                return Ok(Some(ConditionVViolation {
                    sample: w,
                    horizon: n,
                    value: x,
                }));
            }
        }
    }
    Ok(None)
}

/// True iff `Φ^n_ω(x) ∈ B_ω` for every `ω` in the event, every
/// `x ∈ S_{θ^{-n}ω}` and every `n ≥ p`.
pub fn verify_condition_v(
    map: &DrivingMap,
    start: &RandomSet,
    p: usize,
    b: &RandomSet,
    event: &[Sample],
) -> Result<bool> {
    Ok(condition_v_violation(map, start, p, b, event)?.is_none())
}
