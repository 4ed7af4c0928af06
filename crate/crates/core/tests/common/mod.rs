//! Independent oracles shared by the integration tests. Nothing here calls
//! into the algorithms under test except for plain data types.
#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use strec_core::{parse_rational, FiniteCyclicSystem, Rational, Sample, State, StateLattice};

pub fn q(s: &str) -> Rational {
    parse_rational(s).unwrap()
}

pub fn qs(values: &[&str]) -> Vec<Rational> {
    values.iter().map(|s| q(s)).collect()
}

pub fn two_samples() -> FiniteCyclicSystem {
    FiniteCyclicSystem::with_period(2).unwrap()
}

pub fn values(lattice: &StateLattice, set: &BTreeSet<State>) -> Vec<Rational> {
    set.iter().map(|x| lattice.value(*x)).collect()
}

fn pos(x: Rational) -> Rational {
    if x > Rational::from_integer(0) {
        x
    } else {
        Rational::from_integer(0)
    }
}

/// `[max_{1 ≤ i ≤ horizon} (v(θ^{-i}ω) − Σ_{j ≤ i} ξ(θ^{-j}ω))]⁺` by brute force.
pub fn direct_sup(values: &[Rational], xi: &[Rational], w: usize, horizon: usize) -> Rational {
    let k = values.len();
    let mut best = Rational::from_integer(0);
    let mut total = Rational::from_integer(0);
    for i in 1..=horizon {
        let v = (w + k * horizon - i) % k;
        total += xi[v];
        best = best.max(values[v] - total);
    }
    pos(best)
}

/// Closed-form `Y` and `Z` of the impatience envelopes, long horizon.
pub fn direct_y_z(sigma: &[Rational], xi: &[Rational], d: &[Rational]) -> (Vec<Rational>, Vec<Rational>) {
    let lower: Vec<Rational> = sigma.iter().zip(d).map(|(s, d)| (*s).min(*d)).collect();
    let upper: Vec<Rational> = sigma.iter().zip(d).map(|(s, d)| s + d).collect();
    let k = sigma.len();
    (
        (0..k).map(|w| direct_sup(&lower, xi, w, 400)).collect(),
        (0..k).map(|w| direct_sup(&upper, xi, w, 400)).collect(),
    )
}

/// `[x + σ·1{x ≤ D} − ξ]⁺` on rationals.
pub fn impatience_step(x: Rational, sigma: Rational, xi: Rational, d: Rational) -> Rational {
    let load = if x <= d { sigma } else { Rational::from_integer(0) };
    pos(x + load - xi)
}

/// `Φ^n_ω(G_{θ^{-n}ω})` for raw tables `f[ω][x]`, composed point by point.
pub fn raw_image(tables: &[Vec<usize>], g: &[BTreeSet<usize>], w: usize, n: usize) -> BTreeSet<usize> {
    let k = tables.len();
    let start = (w + k * n - n) % k;
    g[start]
        .iter()
        .map(|&x0| {
            let mut x = x0;
            for step in 0..n {
                x = tables[(start + step) % k][x];
            }
            x
        })
        .collect()
}

/// Solutions with values in `G`, found by following every start in
/// `G_{ω0}` for one period.
pub fn raw_solutions(tables: &[Vec<usize>], g: &[BTreeSet<usize>]) -> BTreeSet<Vec<usize>> {
    let k = tables.len();
    let mut out = BTreeSet::new();
    for &x0 in &g[0] {
        let mut path = vec![x0];
        let mut x = x0;
        for (j, table) in tables.iter().enumerate() {
            x = table[x];
            if j + 1 < k {
                path.push(x);
            }
        }
        if x == x0 && path.iter().enumerate().all(|(w, v)| g[w].contains(v)) {
            out.insert(path);
        }
    }
    out
}

/// Random tables on `n` states; monotone (sorted) when `monotone`.
pub fn random_tables(rng: &mut ChaCha8Rng, k: usize, n: usize, monotone: bool) -> Vec<Vec<usize>> {
    (0..k)
        .map(|_| {
            let mut t: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            if monotone {
                t.sort_unstable();
            }
            t
        })
        .collect()
}

/// Smallest enlargement of random seeds that satisfies `f_ω(G_ω) ⊆ G_{θω}`.
pub fn random_stable_g(rng: &mut ChaCha8Rng, tables: &[Vec<usize>]) -> Vec<BTreeSet<usize>> {
    let k = tables.len();
    let n = tables[0].len();
    let mut g: Vec<BTreeSet<usize>> = (0..k)
        .map(|_| {
            let size = rng.random_range(1..=n.min(6));
            (0..size).map(|_| rng.random_range(0..n)).collect()
        })
        .collect();
    loop {
        let mut changed = false;
        for w in 0..k {
            let images: Vec<usize> = g[w].iter().map(|&x| tables[w][x]).collect();
            for y in images {
                changed |= g[(w + 1) % k].insert(y);
            }
        }
        if !changed {
            return g;
        }
    }
}

pub fn to_states(set: &BTreeSet<usize>) -> BTreeSet<State> {
    set.iter().map(|&x| State(x)).collect()
}

pub fn sample(i: usize) -> Sample {
    Sample(i)
}

/// Forward simulation of the i.i.d. loss queue (patience 0) with service
/// uniform on `service_halves` (in half time units) and `ξ ≡ 1`. Returns
/// the visit frequency of each workload in half units after a burn-in.
pub fn forward_loss_frequencies(service_halves: &[i64], steps: usize, seed: u64) -> Vec<(i64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let burn_in = 1000;
    let mut x = 0i64;
    let mut counts = std::collections::BTreeMap::new();
    for t in 0..steps + burn_in {
        let s = service_halves[rng.random_range(0..service_halves.len())];
        let load = if x == 0 { s } else { 0 };
        x = (x + load - 2).max(0);
        if t >= burn_in {
            *counts.entry(x).or_insert(0usize) += 1;
        }
    }
    counts.into_iter().map(|(v, c)| (v, c as f64 / steps as f64)).collect()
}

/// Kolmogorov–Smirnov distance between two discrete laws on the reals.
pub fn ks_distance(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    let mut points: Vec<f64> = a.iter().chain(b).map(|(v, _)| *v).collect();
    points.sort_by(|x, y| x.partial_cmp(y).unwrap());
    points.dedup();
    let cdf = |law: &[(f64, f64)], t: f64| law.iter().filter(|(v, _)| *v <= t).map(|(_, p)| p).sum::<f64>();
    points.iter().map(|&t| (cdf(a, t) - cdf(b, t)).abs()).fold(0.0, f64::max)
}
