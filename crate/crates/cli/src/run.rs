//! Command execution. Every command writes only into `RunConfig::out`.

use crate::config::{Command, RunConfig};
use crate::plot::gnuplot_script;
use levy_fpe::bifurcation::SweepAxes;
use levy_fpe::io::{format_real, write_alpha_star_csv, write_density_csv, write_diagram_csv, ErrorReport, Report};
use levy_fpe::{
    count_modes, empirical_density, excess_kurtosis, find_alpha_star, simulate_ensemble, solve_stationary, sweep,
    symmetry_check, AlphaStar, Density, DriftSpec, Error, McSummary, NoiseSpec, PointOutcome, SimConfig, SolverMethod,
    SymmetryCheck,
};
use serde::Serialize;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

/// Batches used for the Monte Carlo symmetry noise estimate, capped at the path count.
pub const SYMMETRY_BATCHES: usize = 20;

/// What a successful run produced.
#[derive(Debug, Default)]
pub struct RunOutput {
    pub files: Vec<PathBuf>,
    /// Per-item failures that did not abort the run.
    pub failures: Vec<PointFailure>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PointFailure {
    pub b: f64,
    pub alpha: Option<f64>,
    pub epsilon: f64,
    pub kind: String,
    pub message: String,
}

pub fn run(cfg: &RunConfig) -> Result<RunOutput, Error> {
    fs::create_dir_all(&cfg.out)?;
    match cfg.command {
        Command::Solve => run_solve(cfg),
        Command::Sweep => run_sweep(cfg),
        Command::Bifurcate => run_bifurcate(cfg),
        Command::McCheck => run_mc_check(cfg),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, Error> {
    Ok(BufWriter::new(File::create(path)?))
}

fn save_density(path: &Path, d: &Density) -> Result<(), Error> {
    let mut w = create(path)?;
    write_density_csv(&mut w, d)?;
    w.flush()?;
    Ok(())
}

fn write_report<T: Serialize>(path: &Path, body: T) -> Result<(), Error> {
    let mut w = create(path)?;
    Report::new(body).write_json(&mut w)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct GridReport {
    half_width: f64,
    n_interior: usize,
    spacing: f64,
}

#[derive(Serialize)]
struct SolveReport {
    b: f64,
    noise: NoiseSpec,
    grid: GridReport,
    solver: &'static str,
    scheme: String,
    prominence: f64,
    modality: usize,
    mode_locations: Vec<f64>,
    peak_height: f64,
    excess_kurtosis: f64,
    residual_inf: f64,
    clipped_mass: f64,
    leak_rate: f64,
    condition_estimate: Option<f64>,
    steps: Option<usize>,
}

fn solver_name(cfg: &RunConfig) -> &'static str {
    match cfg.solver.method {
        SolverMethod::Direct => "direct",
        SolverMethod::Transient(_) => "transient",
    }
}

fn grid_report(cfg: &RunConfig) -> GridReport {
    GridReport {
        half_width: cfg.grid.half_width(),
        n_interior: cfg.grid.n_interior(),
        spacing: cfg.grid.spacing(),
    }
}

fn run_solve(cfg: &RunConfig) -> Result<RunOutput, Error> {
    let noise = cfg.noise();
    let drift = DriftSpec::new(cfg.b[0])?;
    let sol = solve_stationary(&cfg.grid, drift, noise, &cfg.solver)?;
    let modes = count_modes(&sol.density, cfg.prominence);
    let report = SolveReport {
        b: cfg.b[0],
        noise,
        grid: grid_report(cfg),
        solver: solver_name(cfg),
        scheme: format!("{:?}", cfg.solver.scheme.resolve(&noise)).to_lowercase(),
        prominence: cfg.prominence,
        modality: modes.modality,
        mode_locations: modes.mode_locations,
        peak_height: sol.density.max(),
        excess_kurtosis: excess_kurtosis(&sol.density)?,
        residual_inf: sol.residual_inf,
        clipped_mass: sol.clipped_mass,
        leak_rate: sol.leak_rate,
        condition_estimate: sol.condition_estimate,
        steps: sol.steps,
    };
    let density_path = cfg.out.join("density.csv");
    let report_path = cfg.out.join("report.json");
    save_density(&density_path, &sol.density)?;
    write_report(&report_path, report)?;
    Ok(RunOutput {
        files: vec![density_path, report_path],
        failures: Vec::new(),
    })
}

/// File name of one sweep density, e.g. `density_b-1_alpha0.5_eps0.1.csv`.
pub fn density_file_name(b: f64, alpha: f64, epsilon: f64) -> String {
    format!("density_b{b}_alpha{alpha}_eps{epsilon}.csv")
}

fn run_sweep(cfg: &RunConfig) -> Result<RunOutput, Error> {
    let axes = SweepAxes {
        b: cfg.b.clone(),
        alpha: cfg.alpha.clone(),
        epsilon: cfg.epsilon.clone(),
    };
    let diagram = sweep(&axes, &cfg.grid, &cfg.solver, cfg.prominence, true)?;
    let mut out = RunOutput::default();

    let diagram_path = cfg.out.join("diagram.csv");
    let mut w = create(&diagram_path)?;
    write_diagram_csv(&mut w, &diagram)?;
    w.flush()?;
    out.files.push(diagram_path);

    let dir = cfg.out.join("densities");
    fs::create_dir_all(&dir)?;
    for point in &diagram.points {
        match point {
            PointOutcome::Solved {
                record,
                density: Some(d),
            } => {
                let p = &record.params;
                let (alpha, epsilon) = (p.noise.alpha().unwrap_or(2.0), p.noise.epsilon().unwrap_or(0.0));
                let path = dir.join(density_file_name(p.b, alpha, epsilon));
                save_density(&path, d)?;
                out.files.push(path);
            }
            PointOutcome::Solved { density: None, .. } => {}
            PointOutcome::Failed {
                b,
                alpha,
                epsilon,
                kind,
                message,
            } => out.failures.push(PointFailure {
                b: *b,
                alpha: Some(*alpha),
                epsilon: *epsilon,
                kind: kind.to_string(),
                message: message.clone(),
            }),
        }
    }

    let plot_path = cfg.out.join("plot.gp");
    fs::write(&plot_path, gnuplot_script(&diagram))?;
    out.files.push(plot_path);
    Ok(out)
}

fn run_bifurcate(cfg: &RunConfig) -> Result<RunOutput, Error> {
    let mut curve: Vec<AlphaStar> = Vec::new();
    let mut out = RunOutput::default();
    for &b in &cfg.b {
        for &epsilon in &cfg.epsilon {
            match find_alpha_star(
                b,
                epsilon,
                cfg.bracket,
                cfg.tol_alpha,
                &cfg.grid,
                &cfg.solver,
                cfg.prominence,
            ) {
                Ok(a) => curve.push(a),
                Err(e) => out.failures.push(PointFailure {
                    b,
                    alpha: None,
                    epsilon,
                    kind: e.kind().to_string(),
                    message: e.to_string(),
                }),
            }
        }
    }
    if curve.is_empty() {
        let first = out.failures.first().map(|f| f.message.clone()).unwrap_or_default();
        return Err(Error::SweepFailed { first });
    }
    let path = cfg.out.join("alpha_star.csv");
    let mut w = create(&path)?;
    write_alpha_star_csv(&mut w, &curve)?;
    w.flush()?;
    out.files.push(path);
    Ok(out)
}

#[derive(Serialize)]
struct ExteriorFractions {
    /// Fraction of recorded states outside the binned domain.
    mc: f64,
    /// Stationary exit rate of the solver's re-entry closure.
    pde_leak_rate: f64,
}

#[derive(Serialize)]
struct Comparison {
    b: f64,
    noise: NoiseSpec,
    grid: GridReport,
    l1_distance: f64,
    exterior_fractions: ExteriorFractions,
    summary: McSummary,
    /// Absent when fewer than two paths were run.
    symmetry: Option<SymmetryCheck>,
}

fn run_mc_check(cfg: &RunConfig) -> Result<RunOutput, Error> {
    let noise = cfg.noise();
    let drift = DriftSpec::new(cfg.b[0])?;
    let sim = SimConfig::new(
        drift,
        noise,
        &cfg.grid,
        cfg.mc.dt,
        cfg.mc.t_burn,
        cfg.mc.t_sample,
        cfg.mc.n_paths,
        cfg.mc.seed,
    );
    let set = simulate_ensemble(&sim)?;
    let empirical = empirical_density(&set, &cfg.grid)?;
    let sol = solve_stationary(&cfg.grid, drift, noise, &cfg.solver)?;
    let l1 = empirical.density.l1_distance(&sol.density)?;
    let batches = SYMMETRY_BATCHES.min(cfg.mc.n_paths);
    let symmetry = if batches >= 2 {
        Some(symmetry_check(&set, &cfg.grid, batches)?)
    } else {
        None
    };

    let hist_path = cfg.out.join("mc_histogram.csv");
    let mut w = create(&hist_path)?;
    writeln!(w, "x,p_mc,p_pde")?;
    for ((x, m), p) in cfg
        .grid
        .nodes()
        .iter()
        .zip(empirical.density.values())
        .zip(sol.density.values())
    {
        writeln!(w, "{},{},{}", format_real(*x), format_real(*m), format_real(*p))?;
    }
    w.flush()?;

    let json_path = cfg.out.join("comparison.json");
    write_report(
        &json_path,
        Comparison {
            b: cfg.b[0],
            noise,
            grid: grid_report(cfg),
            l1_distance: l1,
            exterior_fractions: ExteriorFractions {
                mc: empirical.exterior_fraction,
                pde_leak_rate: sol.leak_rate,
            },
            summary: set.summary(&cfg.grid),
            symmetry,
        },
    )?;
    Ok(RunOutput {
        files: vec![hist_path, json_path],
        failures: Vec::new(),
    })
}

/// The `{"error": {...}}` body printed on stderr.
pub fn error_json(report: &ErrorReport) -> String {
    serde_json::json!({ "error": report }).to_string()
}
