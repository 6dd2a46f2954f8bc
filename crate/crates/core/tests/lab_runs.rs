use kslab::lab::{self, preset, ExperimentConfig, ExperimentKind, InitialData, SCHEMA_VERSION};

fn small_evolve() -> ExperimentConfig {
    let mut cfg = preset(ExperimentKind::Evolve);
    cfg.grid.points = 256;
    cfg.grid.extent = Some(100.0);
    cfg.solver.horizon = 5.0;
    cfg.fit.t_min = 1.0;
    cfg.seed = 17;
    cfg
}

#[test]
fn same_seed_gives_identical_outputs() {
    let cfg = small_evolve();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    lab::run(&cfg, Some(a.path())).unwrap();
    lab::run(&cfg, Some(b.path())).unwrap();
    let read = |d: &std::path::Path| std::fs::read_to_string(d.join("series.csv")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));

    let mut other = cfg.clone();
    other.seed = 18;
    let c = tempfile::tempdir().unwrap();
    lab::run(&other, Some(c.path())).unwrap();
    assert_ne!(read(a.path()), read(c.path()));
}

#[test]
fn outputs_have_expected_shape() {
    let dir = tempfile::tempdir().unwrap();
    let report = lab::run(&small_evolve(), Some(dir.path())).unwrap();
    let csv = std::fs::read_to_string(dir.path().join("series.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("time,l1,l2,linf,min"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row.len(), 5);
    assert!(row.iter().all(|v| v.contains('e') && v.parse::<f64>().is_ok()));

    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(json["schema_version"], SCHEMA_VERSION);
    assert_eq!(json["pass"], report.pass);
    assert_eq!(json["kind"], "evolve");
}

#[test]
fn invalid_configs_list_every_problem() {
    let mut cfg = small_evolve();
    cfg.grid.points = 3;
    cfg.solver.horizon = -1.0;
    cfg.initial = InitialData::Random {
        amplitude: 0.1,
        width: -2.0,
        modes: 4,
    };
    let problems = cfg.validate();
    assert!(problems.len() >= 3, "{problems:?}");
    assert!(matches!(lab::run(&cfg, None), Err(lab::LabError::Invalid(_))));
}

#[test]
fn unknown_toml_keys_are_rejected() {
    let text = small_evolve().to_toml_string().replace("seed = 17", "seed = 17\nsede = 3");
    assert!(ExperimentConfig::from_toml_str(&text).is_err());
}

#[test]
fn oversized_step_is_rejected() {
    let mut cfg = small_evolve();
    cfg.solver.dt = Some(10.0);
    assert!(!cfg.validate().is_empty());
}
