use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use elastoinverse_core::experiments::{InverseOutcome, LoadKind};
use elastoinverse_core::nalgebra::{DMatrix, DVector};
use elastoinverse_core::{
    build_square_plate, reference_scenarios, run_inverse_with, ForwardResponse, PlateSetup, Quantity,
    Regularization, Scenario,
};
use rayon::prelude::*;

use crate::config::{FilterMethod, LoadKindName, RunConfig};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Mesh,
    Forward,
    Estimate,
    Lcurve,
    Sweep,
}

/// What a command wrote and what it has to say about it.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub files: Vec<PathBuf>,
    pub lines: Vec<String>,
    pub warnings: Vec<String>,
}

impl Report {
    fn write(&mut self, dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
        let path = dir.join(name);
        write_file(&path, contents)?;
        self.files.push(path);
        Ok(())
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|source| CliError::Io {
            path: parent.to_path_buf(),
            source,
        })?;
    }
    fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Runs `command` with the resolved configuration, writing under
/// `cfg.output.dir`.
pub fn run_command(command: Command, cfg: &RunConfig) -> Result<Report, CliError> {
    cfg.validate()?;
    let mut report = Report::default();
    let out = cfg.output.dir.clone();
    match command {
        Command::Mesh => cmd_mesh(cfg, &out, &mut report)?,
        Command::Forward => cmd_forward(cfg, &out, &mut report)?,
        Command::Estimate => cmd_estimate(cfg, &out, &mut report, false)?,
        Command::Lcurve => cmd_estimate(cfg, &out, &mut report, true)?,
        Command::Sweep => cmd_sweep(cfg, &out, &mut report)?,
    }
    report.write(&out, "manifest.toml", &cfg.to_toml())?;
    Ok(report)
}

/// Dense matrix, row-major, one row per line.
pub fn matrix_text(m: &DMatrix<f64>) -> String {
    let mut out = String::new();
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format!("{:.16e}", m[(i, j)])).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

fn vector_text(v: &DVector<f64>) -> String {
    matrix_text(&DMatrix::from_column_slice(v.len(), 1, v.as_slice()))
}

fn cmd_mesh(cfg: &RunConfig, out: &Path, report: &mut Report) -> Result<(), CliError> {
    let mc = cfg.model_config();
    let mesh = build_square_plate(mc.element_length, &mc.internal_points)?;
    report.write(out, "mesh.txt", &mesh.to_text())?;
    report.lines.push(format!(
        "mesh: {} boundary nodes, {} internal points, {} elements",
        mesh.n_boundary,
        mesh.n_internal,
        mesh.elements.len()
    ));
    if cfg.output.matrices {
        let setup = PlateSetup::new(mc)?;
        let m = &setup.model;
        report.write(out, "H.txt", &matrix_text(&m.influence.h))?;
        report.write(out, "G.txt", &matrix_text(&m.influence.g))?;
        report.write(out, "F.txt", &matrix_text(&m.basis.f))?;
        report.write(out, "M.txt", &matrix_text(&m.basis.mass))?;
        report.write(out, "m_reduced.txt", &matrix_text(&m.reduced.m))?;
        report.write(out, "k_reduced.txt", &matrix_text(&m.reduced.k))?;
        report.write(out, "load_map.txt", &vector_text(&m.reduced.load_map))?;
        report.lines.push(format!(
            "condition numbers: F {:.3e}, A {:.3e}",
            m.basis.f_condition, setup.transition.a_condition
        ));
    }
    Ok(())
}

/// Long-format response table `t,node,x1,x2,quantity,value`.
pub fn response_csv(setup: &PlateSetup, resp: &ForwardResponse) -> String {
    let mut out = String::from("t,node,x1,x2,quantity,value\n");
    let nodes = &setup.state_space.nodes;
    for (j, t) in resp.times.iter().enumerate() {
        for (series, q) in [(&resp.displacement, Quantity::Displacement), (&resp.velocity, Quantity::Velocity)] {
            for (dof, &node) in nodes.iter().enumerate() {
                let p = setup.model.mesh.nodes[node];
                writeln!(
                    out,
                    "{:.16e},{node},{:.16e},{:.16e},{},{:.16e}",
                    t,
                    p.x,
                    p.y,
                    q.as_str(),
                    series[j][dof]
                )
                .unwrap();
            }
        }
    }
    out
}

fn cmd_forward(cfg: &RunConfig, out: &Path, report: &mut Report) -> Result<(), CliError> {
    let setup = PlateSetup::new(cfg.model_config())?;
    let resp = match cfg.load_signal() {
        Some(load) => setup.run_forward(&load)?,
        None => setup.run_forward_samples(vec![0.0; setup.config.n_samples()])?,
    };
    report.write(out, "response.csv", &response_csv(&setup, &resp))?;
    report.lines.push(format!(
        "forward: {} degrees of freedom, {} time samples",
        setup.n_dof(),
        resp.times.len()
    ));
    Ok(())
}

fn scenario_from_config(cfg: &RunConfig) -> Result<Scenario, CliError> {
    let load = cfg
        .load_signal()
        .ok_or_else(|| CliError::Config("load.kind: \"zero\" is only valid for forward runs".into()))?;
    Ok(Scenario {
        name: "config".into(),
        load,
        sensors: cfg.sensor_specs(),
        noise: cfg.noise_spec(),
        regularization: cfg.regularization(),
    })
}

fn write_outcome(out: &Path, outcome: &InverseOutcome, report: &mut Report) -> Result<(), CliError> {
    report.write(out, "measurements.csv", &outcome.measurements.to_csv())?;
    report.write(out, "load.csv", &outcome.load_csv())?;
    if let Some(lc) = &outcome.lcurve {
        report.write(out, "lcurve.csv", &lc.to_csv())?;
        if lc.flat {
            report.warnings.push(format!(
                "FLAT_CURVE: the L-curve has no corner; using the median grid value B = {:e}",
                lc.chosen_b
            ));
        }
    }
    Ok(())
}

fn cmd_estimate(cfg: &RunConfig, out: &Path, report: &mut Report, force_lcurve: bool) -> Result<(), CliError> {
    let mut scenario = scenario_from_config(cfg)?;
    if force_lcurve {
        scenario.regularization = Regularization::LCurve(cfg.b_grid());
    }
    let setup = PlateSetup::new(cfg.model_config())?;
    let solver = setup.solver(&scenario.sensors)?;
    let outcome = run_inverse_with(&setup, &solver, &scenario)?;
    write_outcome(out, &outcome, report)?;
    let m = &outcome.metrics;
    report.lines.push(format!("chosen B: {:e}", outcome.b));
    report.lines.push(format!("relative L2 error (full): {:.6}", m.rel_l2_full));
    report.lines.push(format!("relative L2 error (truncated): {:.6}", m.rel_l2_trunc));
    report.lines.push(format!("sum of absolute errors: {:.6}", m.sum_abs_error));
    report.lines.push(format!("correlation: {:.6}", m.correlation));
    Ok(())
}

/// Header of the aggregate sweep table.
pub const SWEEP_HEADER: &str =
    "scenario,seed,load,sensors,noise,B,rel_l2_full,rel_l2_trunc,end_ratio,sum_abs_error,correlation";

fn sweep_scenarios(cfg: &RunConfig, seed: u64) -> Result<Vec<Scenario>, CliError> {
    let mut all = reference_scenarios(seed, cfg.load.omega, &cfg.b_grid());
    if cfg.filter.method == FilterMethod::Fixed {
        for s in &mut all {
            s.regularization = Regularization::Fixed(cfg.filter.b);
        }
    }
    if cfg.sweep.scenarios.is_empty() {
        return Ok(all);
    }
    cfg.sweep
        .scenarios
        .iter()
        .map(|name| {
            all.iter()
                .find(|s| &s.name == name)
                .cloned()
                .ok_or_else(|| CliError::Config(format!("sweep.scenarios: unknown scenario \"{name}\"")))
        })
        .collect()
}

fn cmd_sweep(cfg: &RunConfig, out: &Path, report: &mut Report) -> Result<(), CliError> {
    if cfg.load.kind == LoadKindName::Zero {
        return Err(CliError::Config("load.kind: \"zero\" is only valid for forward runs".into()));
    }
    let seeds = if cfg.sweep.seeds.is_empty() {
        vec![cfg.noise.seed]
    } else {
        cfg.sweep.seeds.clone()
    };
    let setup = PlateSetup::new(cfg.model_config())?;
    let names = sweep_scenarios(cfg, seeds[0])?;

    // One solver per scenario, reused over seeds; scenarios run concurrently.
    let results = names
        .par_iter()
        .map(|template| {
            let solver = setup.solver(&template.sensors)?;
            seeds
                .iter()
                .map(|&seed| {
                    let mut sc = template.clone();
                    sc.noise.seed = seed;
                    let outcome = run_inverse_with(&setup, &solver, &sc)?;
                    let mut sub = Report::default();
                    let dir = out.join(&sc.name).join(format!("seed_{seed}"));
                    write_outcome(&dir, &outcome, &mut sub)?;
                    Ok((sc, outcome, sub))
                })
                .collect::<Result<Vec<_>, CliError>>()
        })
        .collect::<Result<Vec<_>, CliError>>()?;

    let mut table = String::from(SWEEP_HEADER);
    table.push('\n');
    for (sc, outcome, sub) in results.into_iter().flatten() {
        let sensors: Vec<String> = sc
            .sensors
            .iter()
            .map(|s| format!("{}_{}", s.label, s.quantity.as_str()))
            .collect();
        let m = &outcome.metrics;
        let load = match sc.load.kind {
            LoadKind::Heaviside => "heaviside",
            LoadKind::Periodic { .. } => "periodic",
        };
        writeln!(
            table,
            "{},{},{load},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            sc.name,
            sc.noise.seed,
            sensors.join("+"),
            sc.noise.level,
            outcome.b,
            m.rel_l2_full,
            m.rel_l2_trunc,
            m.end_ratio,
            m.sum_abs_error,
            m.correlation
        )
        .unwrap();
        report.files.extend(sub.files);
        report.warnings.extend(sub.warnings.into_iter().map(|w| format!("{} seed {}: {w}", sc.name, sc.noise.seed)));
        report.lines.push(format!(
            "{:<20} seed {:<4} B = {:.3e}  truncated error {:.4}",
            sc.name, sc.noise.seed, outcome.b, m.rel_l2_trunc
        ));
    }
    report.write(out, "sweep.csv", &table)?;
    Ok(())
}
