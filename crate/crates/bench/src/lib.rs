//! Fixtures shared by the benchmarks in `benches/`.

use strec_core::queueing::{build_impatience, build_loss, ImpatienceParams, LossParams};
use strec_core::{parse_rational, DrivingMap, FiniteCyclicSystem, RandomSet, Rational};

fn qs(values: &[&str]) -> Vec<Rational> {
    values.iter().map(|v| parse_rational(v).expect("valid decimal")).collect()
}

/// A named map with its default starting set.
pub struct Fixture {
    pub name: String,
    pub map: DrivingMap,
    pub g: RandomSet,
}

/// The four worked examples: two loss queues and two queues with impatience.
pub fn examples() -> Vec<Fixture> {
    let sys = FiniteCyclicSystem::with_period(2).expect("period 2");
    let loss = |name: &str, sigma: &[&str]| {
        let m = build_loss(&sys, &LossParams::new(qs(sigma), qs(&["1", "1"])).unwrap(), None).unwrap();
        Fixture {
            name: name.into(),
            map: m.map,
            g: m.default_g,
        }
    };
    let impatience = |name: &str, sigma: &[&str], d: &[&str]| {
        let params = ImpatienceParams::new(qs(sigma), qs(&["1", "1"]), qs(d)).unwrap();
        let m = build_impatience(&sys, &params, None).unwrap();
        Fixture {
            name: name.into(),
            map: m.map,
            g: m.default_g,
        }
    };
    vec![
        loss("example1", &["1", "5.5"]),
        loss("example2", &["1.2", "1.7"]),
        impatience("example3", &["0.5", "1.5"], &["1.51", "2.01"]),
        impatience("example4", &["3", "2"], &["3.01", "1.99"]),
    ]
}

/// Impatience queue on `k` samples with service cycling through
/// `0.5, 1, …, 3`, unit inter-arrivals and patience cycling through `0, 0.5, …, 2.5`.
pub fn cyclic_impatience(k: usize) -> Fixture {
    let sys = FiniteCyclicSystem::with_period(k).expect("k >= 1");
    let sigma = (0..k).map(|i| Rational::new(1 + (i * 5 % 6) as i64, 2)).collect();
    let xi = vec![Rational::from_integer(1); k];
    let d = (0..k).map(|i| Rational::new((i * 7 % 6) as i64, 2)).collect();
    let params = ImpatienceParams::new(sigma, xi, d).expect("valid parameters");
    let m = build_impatience(&sys, &params, None).expect("model builds");
    Fixture {
        name: format!("cyclic_impatience_{k}"),
        map: m.map,
        g: m.default_g,
    }
}
