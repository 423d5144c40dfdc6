use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use aoi_mec_core::analytic::{maoi_for_ratio, maoi_partial};
use aoi_mec_core::optimizer::{
    optimize_beta_given_xi, optimize_joint, optimize_xi_given_beta, Objective, OptimumReport,
};
use aoi_mec_core::rates::{PlatformProfile, TaskProfile};
use aoi_mec_core::rng::derive_seed;
use aoi_mec_core::sim::{simulate_mm1, simulate_partial, simulate_tandem, write_trace, SimConfig, SimRun, SplitMode};
use aoi_mec_core::stp::{stp_closed_form, stp_lower_gamma_variant, stp_monte_carlo, McStpResult, RadioConfig};
use aoi_mec_core::Error as CoreError;

use crate::config::{db_to_linear, ExperimentConfig, StpSource, SweepAxis, SweepVar};
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Fig7,
    Fig8,
    Sweep,
    Optimize,
    Stp,
    Sim,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Fig3 => "fig3",
            Experiment::Fig4 => "fig4",
            Experiment::Fig5 => "fig5",
            Experiment::Fig6 => "fig6",
            Experiment::Fig7 => "fig7",
            Experiment::Fig8 => "fig8",
            Experiment::Sweep => "sweep",
            Experiment::Optimize => "optimize",
            Experiment::Stp => "stp",
            Experiment::Sim => "sim",
        }
    }

    fn default_axis(&self) -> Option<SweepAxis> {
        let axis = match self {
            Experiment::Fig3 => SweepAxis::new(SweepVar::TauDb, -10.0, 10.0, 11),
            Experiment::Fig4 => SweepAxis::new(SweepVar::Beta, 0.0, 1.0, 21),
            Experiment::Fig5 | Experiment::Fig7 => SweepAxis::new(SweepVar::NUes, 10.0, 40.0, 7),
            Experiment::Fig6 => SweepAxis::new(SweepVar::Xi, 0.02, 1.0, 50),
            Experiment::Fig8 => SweepAxis::new(SweepVar::FUe, 0.5e9, 3e9, 11),
            Experiment::Stp => SweepAxis::new(SweepVar::TauDb, -10.0, 10.0, 21),
            Experiment::Sweep | Experiment::Optimize | Experiment::Sim => return None,
        };
        Some(axis)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
    Flag(bool),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map(Cell::Num).unwrap_or(Cell::Empty)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Flag(v)
    }
}

/// Formats with ten significant digits; NaN becomes an empty field.
pub fn format_sig(x: f64) -> String {
    if x.is_nan() {
        return String::new();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.9e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let e: i32 = exp.parse().expect("exponent");
    if (-5..10).contains(&e) {
        trim_zeros(format!("{:.*}", (9 - e).max(0) as usize, x))
    } else {
        format!("{}e{e}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

impl Cell {
    pub fn render(&self) -> String {
        match self {
            Cell::Num(v) => format_sig(*v),
            Cell::Text(s) => s.clone(),
            Cell::Flag(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// Extra files (name, contents) written next to the table.
    pub attachments: Vec<(String, Vec<u8>)>,
}

impl Table {
    fn new(header: &[&str], rows: Vec<Vec<Cell>>) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows,
            attachments: Vec::new(),
        }
    }
}

/// STP lookup by threshold. Monte Carlo realizations do not depend on the
/// threshold, so one run serves every sweep point.
pub struct ThetaSource {
    source: StpSource,
    radio: RadioConfig,
    mc: Option<McStpResult>,
}

impl ThetaSource {
    pub fn new(cfg: &ExperimentConfig) -> Result<Self, CliError> {
        let radio = cfg.radio.to_core();
        radio.validate().map_err(|e| CliError::core("radio configuration", e))?;
        let source = cfg.stp_source();
        let mc = match source {
            StpSource::MonteCarlo => {
                Some(stp_monte_carlo(&radio, &cfg.mc_config()).map_err(|e| CliError::core("Monte Carlo STP", e))?)
            }
            StpSource::ClosedForm => None,
        };
        Ok(ThetaSource { source, radio, mc })
    }

    pub fn theta(&self, tau_db: f64) -> Result<f64, CliError> {
        let tau = db_to_linear(tau_db);
        match (&self.mc, self.source) {
            (Some(mc), _) => Ok(mc.at_threshold(tau).0),
            (None, _) => {
                let r = stp_closed_form(&RadioConfig {
                    tau_linear: tau,
                    ..self.radio
                })
                .map_err(|e| CliError::core(format!("tau_db={tau_db}"), e))?;
                if r.valid {
                    Ok(r.theta)
                } else {
                    Err(CliError::core(
                        format!("tau_db={tau_db}"),
                        CoreError::Domain(format!(
                            "closed-form STP {} lies outside [0, 1]; use stp_source = \"monte_carlo\"",
                            r.theta
                        )),
                    ))
                }
            }
        }
    }
}

/// Scenario after applying one sweep coordinate.
#[derive(Debug, Clone, Copy)]
struct Point {
    task: TaskProfile,
    plat: PlatformProfile,
    tau_db: f64,
}

fn point_at(cfg: &ExperimentConfig, var: Option<SweepVar>, v: f64) -> Point {
    let mut p = Point {
        task: cfg.task.to_core(),
        plat: cfg.platform.to_core(),
        tau_db: cfg.radio.tau_db,
    };
    match var {
        Some(SweepVar::TauDb) => p.tau_db = v,
        Some(SweepVar::Beta) => p.task.cor = v,
        Some(SweepVar::Xi) => p.task.tgr = v,
        Some(SweepVar::NUes) => p.plat.ues_per_bs = v.round() as u32,
        Some(SweepVar::FUe) => p.plat.ue_cpu_hz = v,
        Some(SweepVar::TaskSize) => p.task.mean_size_bits = v,
        None => {}
    }
    p
}

fn coordinate(var: SweepVar, v: f64) -> String {
    format!("{}={}", var.column(), format_sig(v))
}

fn objective(p: &Point, theta: &ThetaSource, at: &str) -> Result<(Objective, f64), CliError> {
    let th = theta.theta(p.tau_db)?;
    let obj =
        Objective::from_profiles(&p.task, &p.plat, db_to_linear(p.tau_db), th).map_err(|e| CliError::core(at, e))?;
    Ok((obj, th))
}

fn maoi(obj: &Objective, beta: f64, xi: f64) -> Result<f64, CoreError> {
    maoi_for_ratio(&obj.rates(beta)?, xi).map(|r| r.maoi)
}

fn simulate(
    obj: &Objective,
    beta: f64,
    xi: f64,
    cfg: &ExperimentConfig,
    mode: SplitMode,
    seed: u64,
) -> Result<SimRun, CoreError> {
    let settings = cfg.sim.settings(seed);
    let rates = obj.rates(beta)?;
    if beta == 0.0 {
        simulate_mm1(rates.pure_local(), xi, &settings)
    } else if beta == 1.0 {
        let (mu_t, mu_e) = rates.pure_remote();
        simulate_tandem(mu_t, mu_e, xi, &settings)
    } else {
        simulate_partial(&SimConfig {
            settings,
            split_mode: mode,
            rates: rates.partial()?,
            xi,
            beta,
        })
    }
}

fn axis_for(exp: Experiment, cfg: &ExperimentConfig) -> Result<SweepAxis, CliError> {
    let default = exp.default_axis();
    let axis = match (cfg.sweep, default) {
        (Some(a), Some(d)) if a.variable != d.variable => {
            return Err(CliError::Config(format!(
                "{} sweeps `{}`, not `{}`",
                exp.name(),
                d.variable.column(),
                a.variable.column()
            )))
        }
        (Some(a), _) => a,
        (None, Some(d)) => d,
        (None, None) => return Err(CliError::Config(format!("{} needs a [sweep] section", exp.name()))),
    };
    axis.validate()?;
    Ok(axis)
}

fn reduction(best: f64, reference: f64) -> f64 {
    1.0 - best / reference
}

fn opt_value(r: Result<OptimumReport, CoreError>) -> Option<f64> {
    r.ok().map(|r| r.maoi_star)
}

/// Runs the points of an axis in parallel, keeping sweep order.
fn per_point<F>(axis: &SweepAxis, f: F) -> Result<Vec<Vec<Cell>>, CliError>
where
    F: Fn(usize, f64) -> Result<Vec<Cell>, CliError> + Sync,
{
    axis.values()
        .into_par_iter()
        .enumerate()
        .map(|(k, v)| f(k, v))
        .collect()
}

pub fn run_experiment(exp: Experiment, cfg: &ExperimentConfig) -> Result<Table, CliError> {
    cfg.sim
        .settings(cfg.seed)
        .validate()
        .map_err(|e| CliError::core("[sim]", e))?;
    cfg.opt.to_core().validate().map_err(|e| CliError::core("[opt]", e))?;
    match exp {
        Experiment::Stp => return stp_table(cfg),
        Experiment::Sim => return sim_table(cfg),
        _ => {}
    }
    let theta = ThetaSource::new(cfg)?;
    let opt = cfg.opt.to_core();
    match exp {
        Experiment::Fig3 | Experiment::Fig4 => {
            let axis = axis_for(exp, cfg)?;
            let var = axis.variable;
            let rows = per_point(&axis, |k, v| {
                let p = point_at(cfg, Some(var), v);
                let at = coordinate(var, v);
                let (obj, th) = objective(&p, &theta, &at)?;
                let (beta, xi) = (p.task.cor, p.task.tgr);
                let (sim, err) = if cfg.sim.enabled {
                    match simulate(&obj, beta, xi, cfg, cfg.sim.split_mode, derive_seed(cfg.seed, k as u64)) {
                        Ok(run) => (Some(run.sawtooth.maoi_hat), Some(run.sawtooth.stderr)),
                        Err(_) => (None, None),
                    }
                } else {
                    (None, None)
                };
                let mut row = vec![Cell::Num(v)];
                if var == SweepVar::TauDb {
                    row.push(th.into());
                }
                row.extend([
                    maoi(&obj, 0.0, xi).ok().into(),
                    maoi(&obj, 1.0, xi).ok().into(),
                    maoi(&obj, beta, xi).ok().into(),
                    sim.into(),
                    err.into(),
                ]);
                Ok(row)
            })?;
            let mut header = vec![var.column()];
            if var == SweepVar::TauDb {
                header.push("theta");
            }
            header.extend([
                "maoi_local",
                "maoi_remote",
                "maoi_partial_analytic",
                "maoi_partial_sim",
                "sim_stderr",
            ]);
            Ok(Table::new(&header, rows))
        }
        Experiment::Fig5 => {
            let axis = axis_for(exp, cfg)?;
            let rows = per_point(&axis, |_, v| {
                let p = point_at(cfg, Some(axis.variable), v);
                let (obj, _) = objective(&p, &theta, &coordinate(axis.variable, v))?;
                let r = optimize_beta_given_xi(&obj, p.task.tgr, &opt);
                Ok(vec![
                    Cell::Num(v),
                    Cell::Num(p.task.tgr),
                    r.as_ref().ok().map(|r| r.beta_star).into(),
                    r.as_ref().ok().map(|r| r.maoi_star).into(),
                    r.as_ref().map(|r| Cell::Flag(r.boundary_flag)).unwrap_or(Cell::Empty),
                ])
            })?;
            Ok(Table::new(
                &[axis.variable.column(), "xi", "beta_star", "maoi_star", "boundary_flag"],
                rows,
            ))
        }
        Experiment::Fig6 => {
            let axis = axis_for(exp, cfg)?;
            let p0 = point_at(cfg, None, 0.0);
            let (obj, _) = objective(&p0, &theta, "baseline")?;
            let rows = per_point(&axis, |_, xi| {
                let best = optimize_beta_given_xi(&obj, xi, &opt).ok();
                Ok(vec![
                    Cell::Num(xi),
                    maoi(&obj, 0.0, xi).ok().into(),
                    maoi(&obj, 0.3, xi).ok().into(),
                    maoi(&obj, 0.7, xi).ok().into(),
                    maoi(&obj, 1.0, xi).ok().into(),
                    best.map(|b| b.beta_star).into(),
                    best.map(|b| b.maoi_star).into(),
                ])
            })?;
            Ok(Table::new(
                &[
                    "xi",
                    "maoi_beta_0",
                    "maoi_beta_0.3",
                    "maoi_beta_0.7",
                    "maoi_beta_1",
                    "beta_star",
                    "maoi_optimal_beta",
                ],
                rows,
            ))
        }
        Experiment::Fig7 => {
            let axis = axis_for(exp, cfg)?;
            let rows = per_point(&axis, |_, v| {
                let p = point_at(cfg, Some(axis.variable), v);
                let at = coordinate(axis.variable, v);
                let (obj, _) = objective(&p, &theta, &at)?;
                let (beta, xi) = (p.task.cor, p.task.tgr);
                let best_beta = optimize_beta_given_xi(&obj, xi, &opt).ok();
                let local = opt_value(optimize_xi_given_beta(&obj, 0.0, &opt));
                let remote = opt_value(optimize_xi_given_beta(&obj, 1.0, &opt));
                let joint = optimize_joint(&obj, &opt).map_err(|e| CliError::core(&at, e))?;
                Ok(vec![
                    Cell::Num(v),
                    maoi(&obj, 0.0, xi).ok().into(),
                    maoi(&obj, 1.0, xi).ok().into(),
                    maoi(&obj, beta, xi).ok().into(),
                    best_beta.map(|b| b.maoi_star).into(),
                    local.into(),
                    remote.into(),
                    Cell::Num(joint.maoi_star),
                    Cell::Num(joint.beta_star),
                    Cell::Num(joint.xi_star),
                    local.map(|l| reduction(joint.maoi_star, l)).into(),
                    remote.map(|r| reduction(joint.maoi_star, r)).into(),
                ])
            })?;
            Ok(Table::new(
                &[
                    axis.variable.column(),
                    "maoi_local",
                    "maoi_remote",
                    "maoi_partial",
                    "maoi_partial_opt_beta",
                    "maoi_local_opt_xi",
                    "maoi_remote_opt_xi",
                    "maoi_joint",
                    "beta_star",
                    "xi_star",
                    "reduction_vs_local",
                    "reduction_vs_remote",
                ],
                rows,
            ))
        }
        Experiment::Fig8 => {
            let axis = axis_for(exp, cfg)?;
            let rows = per_point(&axis, |_, v| {
                let p = point_at(cfg, Some(axis.variable), v);
                let (obj, _) = objective(&p, &theta, &coordinate(axis.variable, v))?;
                let (beta, xi) = (p.task.cor, p.task.tgr);
                let best = optimize_beta_given_xi(&obj, xi, &opt).ok();
                Ok(vec![
                    Cell::Num(v),
                    maoi(&obj, 0.0, xi).ok().into(),
                    maoi(&obj, 1.0, xi).ok().into(),
                    maoi(&obj, beta, xi).ok().into(),
                    best.map(|b| b.maoi_star).into(),
                    best.map(|b| b.beta_star).into(),
                ])
            })?;
            Ok(Table::new(
                &[
                    axis.variable.column(),
                    "maoi_local",
                    "maoi_remote",
                    "maoi_partial",
                    "maoi_partial_opt_beta",
                    "beta_star",
                ],
                rows,
            ))
        }
        Experiment::Sweep => {
            let axis = axis_for(exp, cfg)?;
            let rows = per_point(&axis, |_, v| {
                let p = point_at(cfg, Some(axis.variable), v);
                let at = coordinate(axis.variable, v);
                let (obj, th) = objective(&p, &theta, &at)?;
                let (beta, xi) = (p.task.cor, p.task.tgr);
                let value = maoi(&obj, beta, xi).map_err(|e| CliError::core(&at, e))?;
                Ok(vec![
                    Cell::Num(v),
                    Cell::Num(th),
                    maoi(&obj, 0.0, xi).ok().into(),
                    maoi(&obj, 1.0, xi).ok().into(),
                    Cell::Num(value),
                ])
            })?;
            Ok(Table::new(
                &[axis.variable.column(), "theta", "maoi_local", "maoi_remote", "maoi"],
                rows,
            ))
        }
        Experiment::Optimize => {
            let p = point_at(cfg, None, 0.0);
            let (obj, th) = objective(&p, &theta, "baseline")?;
            let joint = optimize_joint(&obj, &opt).map_err(|e| CliError::core("joint optimisation", e))?;
            let local = opt_value(optimize_xi_given_beta(&obj, 0.0, &opt));
            let remote = opt_value(optimize_xi_given_beta(&obj, 1.0, &opt));
            let row = vec![
                Cell::Num(th),
                Cell::Num(joint.beta_star),
                Cell::Num(joint.xi_star),
                Cell::Num(joint.maoi_star),
                Cell::Num(joint.evaluations as f64),
                Cell::Num(joint.feasible_fraction),
                Cell::Flag(joint.boundary_flag),
                local.into(),
                remote.into(),
                local.map(|l| reduction(joint.maoi_star, l)).into(),
                remote.map(|r| reduction(joint.maoi_star, r)).into(),
            ];
            Ok(Table::new(
                &[
                    "theta",
                    "beta_star",
                    "xi_star",
                    "maoi_star",
                    "evaluations",
                    "feasible_fraction",
                    "boundary_flag",
                    "maoi_local_opt_xi",
                    "maoi_remote_opt_xi",
                    "reduction_vs_local",
                    "reduction_vs_remote",
                ],
                vec![row],
            ))
        }
        Experiment::Stp | Experiment::Sim => unreachable!("handled above"),
    }
}

fn stp_table(cfg: &ExperimentConfig) -> Result<Table, CliError> {
    let axis = axis_for(Experiment::Stp, cfg)?;
    let radio = cfg.radio.to_core();
    let mc = stp_monte_carlo(&radio, &cfg.mc_config()).map_err(|e| CliError::core("Monte Carlo STP", e))?;
    let rows = axis
        .values()
        .into_iter()
        .map(|tau_db| {
            let r = RadioConfig {
                tau_linear: db_to_linear(tau_db),
                ..radio
            };
            let at = coordinate(SweepVar::TauDb, tau_db);
            let closed = stp_closed_form(&r).map_err(|e| CliError::core(&at, e))?;
            let variant = if r.epsilon < 1.0 {
                stp_lower_gamma_variant(&r).ok().map(|v| v.theta)
            } else {
                None
            };
            let (hat, hw) = mc.at_threshold(r.tau_linear);
            Ok(vec![
                Cell::Num(tau_db),
                Cell::Num(closed.theta),
                Cell::Flag(closed.valid),
                variant.into(),
                Cell::Num(hat),
                Cell::Num(hw),
            ])
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(Table::new(
        &[
            "tau_db",
            "theta_closed_form",
            "closed_form_valid",
            "theta_lower_gamma_variant",
            "theta_monte_carlo",
            "mc_ci_halfwidth",
        ],
        rows,
    ))
}

fn sim_table(cfg: &ExperimentConfig) -> Result<Table, CliError> {
    let theta = ThetaSource::new(cfg)?;
    let p = point_at(cfg, None, 0.0);
    let (obj, _) = objective(&p, &theta, "baseline")?;
    let (beta, xi) = (p.task.cor, p.task.tgr);
    let partial = obj
        .rates(beta)
        .and_then(|r| r.partial())
        .map_err(|e| CliError::core("sim", e))?;
    let analytic = maoi_partial(&partial, xi, beta)
        .map_err(|e| CliError::core("sim", e))?
        .maoi;
    let seed = derive_seed(cfg.seed, 0);
    let mut rows = Vec::new();
    let mut attachments = Vec::new();
    for mode in [SplitMode::Replicate, SplitMode::Thin] {
        let label = match mode {
            SplitMode::Replicate => "replicate",
            SplitMode::Thin => "thin",
        };
        let run = simulate(&obj, beta, xi, cfg, mode, seed)
            .map_err(|e| CliError::core(format!("sim split_mode={label}"), e))?;
        let s = run.sawtooth;
        rows.push(vec![
            Cell::Text(label.into()),
            Cell::Num(cfg.sim.n_tasks as f64),
            Cell::Num(s.maoi_hat),
            Cell::Num(s.stderr),
            Cell::Num(analytic),
            Cell::Num((s.maoi_hat - analytic) / analytic),
        ]);
        if cfg.sim.trace {
            let mut buf = Vec::new();
            write_trace(&run.records, &mut buf)?;
            attachments.push((format!("sim_trace_{label}.csv"), buf));
        }
    }
    let mut table = Table::new(
        &[
            "split_mode",
            "n_tasks",
            "maoi_sim",
            "sim_stderr",
            "maoi_analytic",
            "relative_error",
        ],
        rows,
    );
    table.attachments = attachments;
    Ok(table)
}
