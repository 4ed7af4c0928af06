//! Plain-text rendering of a [`RunReport`] for terminals.

use std::fmt::Write;

use crate::report::{RunReport, SampleSet, SampleValue};

fn sets(out: &mut String, title: &str, sets: &[SampleSet]) {
    let _ = writeln!(out, "{title}");
    for s in sets {
        let _ = writeln!(out, "  {:<12} {{{}}}", s.sample, s.values.join(", "));
    }
}

fn values(out: &mut String, title: &str, values: &[SampleValue]) {
    let row: Vec<String> = values.iter().map(|v| format!("{}={}", v.sample, v.value)).collect();
    let _ = writeln!(out, "{title:<14} {}", row.join("  "));
}

pub fn render(report: &RunReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "command        {}", report.command);
    let _ = writeln!(out, "model          {:?}", report.config.model);
    if let Some(l) = &report.lattice {
        let _ = writeln!(out, "lattice        step {} on [0, {}], {} states", l.step, l.x_max, l.states);
    }
    if let Some(c) = report.c {
        let _ = writeln!(out, "c              {c}");
    }
    if let Some(a) = &report.analysis {
        let _ = writeln!(out, "N'             {}", a.stabilization_index);
        sets(&mut out, "G", &a.g);
        sets(&mut out, "H", &a.h);
        let cycles: Vec<String> = a.cycles.iter().map(|c| format!("({})", c.join(" "))).collect();
        let _ = writeln!(out, "cycles at {:<4} {}", a.permutation_base, cycles.join(" "));
        let _ = writeln!(out, "ergodic        {}", a.ergodic);
        match &a.invariant_families {
            Some(f) => {
                let _ = writeln!(out, "families       {}", f.len());
            }
            None => {
                let _ = writeln!(out, "families       not enumerated");
            }
        }
        let _ = writeln!(out, "solutions      {}", a.solutions.len());
        for s in &a.solutions {
            values(&mut out, "", s);
        }
    }
    if let Some(l) = &report.loss {
        let _ = writeln!(out, "loss g         {}", l.g);
        sets(&mut out, "loss B", &l.busy_values);
    }
    if let Some(f) = &report.flipo {
        let _ = writeln!(out, "flipo indices");
        for s in &f.samples {
            let pairs: Vec<String> = s.projection.iter().map(|p| format!("{}->{}", p.index, p.workload)).collect();
            let _ = writeln!(out, "  {:<12} {}", s.sample, pairs.join(", "));
        }
    }
    if let Some(i) = &report.impatience {
        values(&mut out, "Y", &i.y);
        values(&mut out, "Z", &i.z);
        values(&mut out, "W", &i.max_workload);
        let _ = writeln!(out, "p, t           {}, {}", i.p, i.t);
        let _ = writeln!(out, "s, s-bar, d    {}, {}, {}", i.s_under, i.s_bar, i.d_bar);
        let _ = writeln!(out, "bounds");
        for b in &i.bounds {
            let v = b.value.map_or_else(|| "-".to_string(), |v| v.to_string());
            let _ = writeln!(out, "  {:<14} {v}", b.name);
        }
        let _ = writeln!(
            out,
            "cargo          E[D]={} E[xi Card A]={} holds={}",
            i.cargo.expected_patience, i.cargo.weighted_waiting, i.cargo.holds
        );
    }
    if let Some(l) = &report.loynes {
        let _ = writeln!(out, "loynes lattice step {} on [0, {}]", l.lattice.step, l.lattice.x_max);
        for r in &l.runs {
            let _ = writeln!(out, "  {:<8} monotone={} outcome={} iterations={}", r.map, r.monotone, r.outcome, r.iterations);
            if let Some(limit) = &r.limit {
                values(&mut out, "    limit", limit);
            }
        }
    }
    if let Some(c) = &report.cftp {
        let _ = writeln!(
            out,
            "cftp           {} of {} coupled, max horizon {}, seed {}",
            c.coupled, c.replications, c.max_horizon, c.seed
        );
        for a in &c.distribution {
            let _ = writeln!(out, "  {:<12} {:>8}  {}", a.value, a.count, a.frequency);
        }
    }
    if !report.verdicts.is_empty() {
        let _ = writeln!(out, "verdicts");
        for v in &report.verdicts {
            let mark = if v.holds { "ok  " } else { "FAIL" };
            let _ = writeln!(out, "  {mark} {:<26} {}", v.name, v.detail);
        }
    }
    out
}
