use std::fs;
use std::path::PathBuf;
use std::process::Command;

use aoi_mec_cli::config::db_to_linear;
use aoi_mec_cli::{run_and_write, run_experiment, Cell, Experiment, ExperimentConfig};
use aoi_mec_core::analytic::maoi_for_ratio;
use aoi_mec_core::optimizer::Objective;
use aoi_mec_core::stp::{stp_closed_form, RadioConfig};

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli").join(name);
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn small_config(extra: &str) -> ExperimentConfig {
    let text = format!("seed = 7\n{extra}\n[mc_stp]\niterations = 2000\n[sim]\nn_tasks = 4000\n");
    ExperimentConfig::parse(&text).unwrap()
}

#[test]
fn repeated_runs_write_identical_tables() {
    let mut cfg = small_config("[sweep]\nvariable = \"beta\"\nstart = 0.0\nstop = 1.0\npoints = 6");
    cfg.output = scratch("det_a");
    let a = run_and_write(Experiment::Fig4, &cfg).unwrap();
    cfg.output = scratch("det_b");
    let b = run_and_write(Experiment::Fig4, &cfg).unwrap();
    let (a, b) = (fs::read(a.table).unwrap(), fs::read(b.table).unwrap());
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn different_seeds_change_simulated_columns() {
    let extra = "[radio]\nepsilon = 1.0\n[sweep]\nvariable = \"beta\"\nstart = 0.4\nstop = 0.4\npoints = 1";
    let mut cfg = small_config(extra);
    let a = run_experiment(Experiment::Fig4, &cfg).unwrap();
    cfg.seed = 8;
    let b = run_experiment(Experiment::Fig4, &cfg).unwrap();
    assert_ne!(a.rows[0][4], b.rows[0][4]);
    assert_eq!(a.rows[0][3], b.rows[0][3]);
}

#[test]
fn single_point_sweep_matches_direct_call() {
    let cfg = small_config(
        "stp_source = \"closed_form\"\n[radio]\nepsilon = 1.0\ntau_db = 2.0\n\
         [sweep]\nvariable = \"xi\"\nstart = 0.3\nstop = 0.3\npoints = 1",
    );
    let table = run_experiment(Experiment::Sweep, &cfg).unwrap();
    assert_eq!(table.rows.len(), 1);

    let radio = RadioConfig {
        tau_linear: db_to_linear(2.0),
        epsilon: 1.0,
        ..RadioConfig::default()
    };
    let theta = stp_closed_form(&radio).unwrap().theta;
    let mut task = cfg.task.to_core();
    task.tgr = 0.3;
    let obj = Objective::from_profiles(&task, &cfg.platform.to_core(), radio.tau_linear, theta).unwrap();
    let direct = maoi_for_ratio(&obj.rates(task.cor).unwrap(), 0.3).unwrap().maoi;

    let Cell::Num(theta_col) = table.rows[0][1] else {
        panic!("theta column")
    };
    let Cell::Num(maoi_col) = table.rows[0][4] else {
        panic!("maoi column")
    };
    assert_eq!(theta_col, theta);
    assert_eq!(maoi_col, direct);
}

#[test]
fn manifest_records_seed_and_config() {
    let mut cfg = small_config("");
    cfg.output = scratch("manifest");
    let out = run_and_write(Experiment::Optimize, &cfg).unwrap();
    let text = fs::read_to_string(out.manifest).unwrap();
    let doc: toml::Table = text.parse().unwrap();
    assert_eq!(doc["experiment"].as_str(), Some("optimize"));
    assert_eq!(doc["seed"].as_integer(), Some(7));
    assert!(doc["config"].get("radio").is_some());
    let csv = fs::read_to_string(out.table).unwrap();
    assert_eq!(csv.lines().count(), 2);
}

#[test]
fn sim_experiment_writes_traces() {
    let mut cfg = small_config("");
    cfg.sim.trace = true;
    cfg.output = scratch("trace");
    let out = run_and_write(Experiment::Sim, &cfg).unwrap();
    assert_eq!(out.attachments.len(), 2);
    let trace = fs::read_to_string(&out.attachments[0]).unwrap();
    assert!(trace.starts_with("gen_time,local_done,edge_done,complete_time,interarrival"));
}

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_aoi-mec"))
}

#[test]
fn binary_exit_codes() {
    let dir = scratch("exit");
    let bad = dir.join("bad.toml");
    fs::write(&bad, "[radio]\nno_such_key = 1\n").unwrap();
    let status = binary()
        .args(["sweep", "--config"])
        .arg(&bad)
        .arg("--out")
        .arg(&dir)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));

    let unstable = dir.join("unstable.toml");
    fs::write(
        &unstable,
        "[mc_stp]\niterations = 2000\n[sweep]\nvariable = \"xi\"\nstart = 50.0\nstop = 50.0\npoints = 1\n",
    )
    .unwrap();
    let out = binary()
        .args(["sweep", "--config"])
        .arg(&unstable)
        .arg("--out")
        .arg(&dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("xi=50"));

    let closed = dir.join("closed.toml");
    fs::write(
        &closed,
        "stp_source = \"closed_form\"\n[radio]\nepsilon = 0.5\n[mc_stp]\niterations = 2000\n",
    )
    .unwrap();
    let out = binary()
        .args(["optimize", "--config"])
        .arg(&closed)
        .arg("--out")
        .arg(&dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));

    let missing = binary()
        .args(["optimize", "--config"])
        .arg(dir.join("missing.toml"))
        .status()
        .unwrap();
    assert_eq!(missing.code(), Some(2));

    let ok = binary()
        .args(["optimize", "--stp-source", "monte_carlo", "--seed", "3", "--config"])
        .arg(&closed)
        .arg("--out")
        .arg(&dir)
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0));
    assert!(dir.join("optimize.csv").exists());
}
