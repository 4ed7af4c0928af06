use std::path::{Path, PathBuf};
use std::process::{Command as Process, Output};

use proptest::prelude::*;
use strec_cli::config::{CftpSection, SampleConfig};
use strec_cli::{exit, load, run, Command, ModelConfig, ModelKind, Overrides, RunReport};

fn repo() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn config_path(name: &str) -> PathBuf {
    repo().join("configs").join(name)
}

fn strec(args: &[&str]) -> Output {
    Process::new(env!("CARGO_BIN_EXE_strec"))
        .args(args)
        .current_dir(repo())
        .output()
        .expect("binary runs")
}

fn report_of(out: &Output) -> RunReport {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is a RunReport")
}

fn analyze(name: &str) -> RunReport {
    run(Command::Analyze, load(&config_path(name)).unwrap(), &Overrides::default()).unwrap()
}

fn values(sets: &[strec_cli::report::SampleSet]) -> Vec<Vec<&str>> {
    sets.iter().map(|s| s.values.iter().map(String::as_str).collect()).collect()
}

#[test]
fn example_one_end_to_end() {
    let r = report_of(&strec(&["analyze", "configs/example1.json"]));
    let a = r.analysis.as_ref().unwrap();
    assert_eq!(r.c, Some(3));
    assert_eq!(values(&a.h), vec![vec!["0.5", "2.5", "4.5"], vec!["0", "1.5", "3.5"]]);
    assert!(a.solutions.is_empty());
    assert!(a.ergodic);
    assert_eq!(r.verdict_holds("flipo_projection"), Some(true));
}

#[test]
fn example_two_end_to_end() {
    let r = report_of(&strec(&["run", "configs/example2.json"]));
    let a = r.analysis.as_ref().unwrap();
    assert_eq!(r.c, Some(2));
    assert_eq!(values(&a.h), vec![vec!["0", "0.7"], vec!["0", "0.2"]]);
    let sols: Vec<Vec<&str>> = a
        .solutions
        .iter()
        .map(|s| s.iter().map(|v| v.value.as_str()).collect())
        .collect();
    assert_eq!(sols, vec![vec!["0", "0.2"], vec!["0.7", "0"]]);
    assert!(!a.ergodic);
}

#[test]
fn example_three_has_three_solutions() {
    let r = report_of(&strec(&["run", "configs/example3.json"]));
    let a = r.analysis.as_ref().unwrap();
    assert_eq!(r.c, Some(3));
    assert_eq!(a.solutions.len(), 3);
    assert_eq!(a.cycles.len(), 3);
    assert_eq!(a.invariant_families.as_ref().unwrap().len(), 7);
    let imp = r.impatience.as_ref().unwrap();
    assert_eq!(imp.z.iter().map(|v| v.value.as_str()).collect::<Vec<_>>(), vec!["2.51", "1.51"]);
    assert_eq!(imp.cargo.expected_patience, "1.76");
}

#[test]
fn example_four_is_ergodic_without_solutions() {
    let r = report_of(&strec(&["run", "configs/example4.json"]));
    let a = r.analysis.as_ref().unwrap();
    assert_eq!(r.c, Some(3));
    assert!(a.solutions.is_empty());
    assert!(a.ergodic);
    assert_eq!(a.atoms.len(), 6);
    assert!(a.atoms.iter().all(|x| x.weight == "1/6"));
}

#[test]
fn validate_rejects_numbers_with_the_parse_code() {
    for args in [
        &["run", "--validate", "crates/cli/tests/fixtures/bad.json"][..],
        &["validate", "crates/cli/tests/fixtures/bad.json"][..],
    ] {
        let out = strec(args);
        assert_eq!(out.status.code(), Some(exit::PARSE));
        assert!(out.stdout.is_empty());
        let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
        assert_eq!(err["error"]["reason"], "parse_error");
    }
}

#[test]
fn validate_reports_without_analysis() {
    let r = report_of(&strec(&["validate", "configs/example3.json"]));
    assert!(r.analysis.is_none() && r.impatience.is_none());
    assert_eq!(r.lattice.unwrap().step, "0.5");
}

#[test]
fn exit_codes_are_distinct() {
    assert_eq!(strec(&["analyze", "missing.json"]).status.code(), Some(exit::IO));
    assert_eq!(strec(&["cftp", "configs/example1.json"]).status.code(), Some(exit::MODEL));
    let out = strec(&["analyze", "configs/example1.json", "--max-sweeps", "2"]);
    assert_eq!(out.status.code(), Some(exit::NOT_STABILIZED));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["reason"], "not_stabilized");
    assert_eq!(strec(&["frobnicate"]).status.code(), Some(exit::USAGE));
    assert_eq!(strec(&["--help"]).status.code(), Some(exit::OK));
}

#[test]
fn output_is_byte_identical() {
    let a = strec(&["analyze", "configs/example3.json", "configs/cftp_loss.json"]);
    let b = strec(&["analyze", "configs/example3.json", "configs/cftp_loss.json", "--jobs", "4"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn output_file_matches_stdout() {
    let dir = std::env::temp_dir().join(format!("strec-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("report.json");
    let out = strec(&["bounds", "configs/example4.json", "--output", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(std::fs::read(&path).unwrap(), out.stdout);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn batch_output_is_an_array_in_input_order() {
    let out = strec(&["analyze", "configs/example2.json", "configs/example1.json", "--jobs", "2"]);
    let reports: Vec<RunReport> = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(reports.iter().map(|r| r.c).collect::<Vec<_>>(), vec![Some(2), Some(3)]);
}

#[test]
fn every_committed_config_round_trips() {
    for name in ["example1.json", "example2.json", "example3.json", "example4.json", "abstract_swap.json", "cftp_loss.json"] {
        let report = analyze(name);
        let text = serde_json::to_string(&report).unwrap();
        let back: RunReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, report, "{name}");
        assert_eq!(serde_json::to_string(&back).unwrap(), text);
    }
}

#[test]
fn loynes_on_the_envelopes() {
    let r = report_of(&strec(&["loynes", "configs/example4.json"]));
    let l = r.loynes.as_ref().unwrap();
    assert_eq!(l.lattice.step, "0.01");
    let outcomes: Vec<(&str, &str)> = l.runs.iter().map(|x| (x.map.as_str(), x.outcome.as_str())).collect();
    assert_eq!(outcomes, vec![("exact", "not_monotone"), ("lower", "proper"), ("upper", "proper")]);
    for name in ["lower_limit_is_y", "upper_limit_is_z", "upper_backwards_singleton"] {
        assert_eq!(r.verdict_holds(name), Some(true), "{name}");
    }
}

#[test]
fn cftp_seed_flag_overrides_the_config() {
    let a = report_of(&strec(&["cftp", "configs/cftp_loss.json", "--seed", "5"]));
    let b = report_of(&strec(&["cftp", "configs/cftp_loss.json", "--seed", "5", "--jobs", "3"]));
    assert_eq!(a, b);
    let c = a.cftp.as_ref().unwrap();
    assert_eq!(c.seed, 5);
    assert_eq!(a.config.cftp.as_ref().unwrap().seed, 5);
    assert_eq!(c.coupled, c.replications);
    let total: usize = c.distribution.iter().map(|a| a.count).sum();
    assert_eq!(total, c.replications);
    // X = 0.5 exactly when the previous customer found 0 and drew σ = 1.5, so P(X = 0) = 2/3
    let idle = c.distribution.iter().find(|a| a.value == "0").unwrap().count as f64 / total as f64;
    assert!((idle - 2.0 / 3.0).abs() < 0.04, "P(X = 0) = {idle}");
}

#[test]
fn table_format_renders() {
    let out = strec(&["analyze", "configs/example2.json", "--format", "table"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("c              2"));
    assert!(text.contains("solutions      2"));
}

fn decimal() -> impl Strategy<Value = String> {
    (0u32..8, 0u32..4).prop_map(|(i, f)| if f == 0 { i.to_string() } else { format!("{i}.{}", f * 25) })
}

prop_compose! {
    fn impatience_config()(rows in prop::collection::vec((decimal(), 1u32..4, decimal()), 1..4)) -> ModelConfig {
        ModelConfig {
            model: ModelKind::Impatience,
            samples: rows
                .into_iter()
                .enumerate()
                .map(|(i, (s, xi, d))| SampleConfig {
                    label: format!("s{i}"),
                    service: Some(s),
                    interarrival: Some(xi.to_string()),
                    patience: Some(d),
                })
                .collect(),
            x_max: None,
            step: None,
            tables: None,
            g: None,
            max_sweeps: None,
            cftp: None,
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn reports_round_trip_and_repeat(config in impatience_config()) {
        let a = run(Command::Analyze, config.clone(), &Overrides::default()).unwrap();
        let b = run(Command::Analyze, config, &Overrides::default()).unwrap();
        let text = serde_json::to_string_pretty(&a).unwrap();
        prop_assert_eq!(&text, &serde_json::to_string_pretty(&b).unwrap());
        let back: RunReport = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(&back, &a);
        let c = a.c.unwrap();
        let solutions = a.analysis.as_ref().unwrap().solutions.len();
        prop_assert!(solutions <= c);
    }

    #[test]
    fn config_round_trips(config in impatience_config()) {
        let text = serde_json::to_string(&config).unwrap();
        prop_assert_eq!(ModelConfig::from_json(&text).unwrap(), config);
    }
}

#[test]
fn cftp_section_defaults_to_loss_patience() {
    let cfg = load(&config_path("cftp_loss.json")).unwrap();
    let section: &CftpSection = cfg.cftp.as_ref().unwrap();
    assert!(section.patience.is_empty());
    assert_eq!(section.horizon_cap, None);
}
