//! Stationary densities of `dX = (bX − X³)dt + ε dL^α` under symmetric α-stable
//! Lévy noise, and their phenomenological bifurcations.
//!
//! The crate solves the stationary nonlocal Fokker–Planck equation on a truncated
//! interval, checks it against an exact Brownian-noise density and an independent
//! Monte Carlo simulation, and classifies the shape of the resulting densities
//! (number of modes, peak height, kurtosis) across the parameters `(b, α, ε)`.
//!
//! ```
//! use levy_fpe::{Grid, DriftSpec, NoiseSpec, SolverOptions, solve_stationary, count_modes};
//!
//! let grid = Grid::new(6.0, 301).unwrap();
//! let noise = NoiseSpec::stable(1.0, 0.1).unwrap();
//! let sol = solve_stationary(&grid, DriftSpec::new(1.0).unwrap(), noise, &SolverOptions::default()).unwrap();
//! let modes = count_modes(&sol.density, 0.01);
//! assert_eq!(modes.modality, 2);
//! ```

pub mod bifurcation;
pub mod error;
pub mod fpe;
pub mod grid;
pub mod io;
pub mod levy;
mod linalg;
pub mod mc;
pub mod quad;
pub mod special;

pub use bifurcation::{
    classify, classify_with_density, count_modes, excess_kurtosis, find_alpha_star, sweep, AlphaStar,
    BifurcationDiagram, BifurcationRecord, ModeSummary, ModelParams, PointOutcome, SweepAxes, DEFAULT_PROMINENCE,
};
pub use error::{Error, Result};
pub use fpe::{
    deterministic_equilibria, drift, gaussian_stationary_analytic, solve_stationary, solve_stationary_direct,
    solve_stationary_transient, DriftScheme, DriftSpec, Equilibrium, GeneratorMatrix, SolverMethod, SolverOptions,
    Stability, StationarySolution, TransientOptions,
};
pub use grid::{trapezoid_mass, Density, Grid};
pub use levy::{
    check_levy_condition, jump_measure_density, stable_scale_constant, stable_scale_constant_closed_form, JumpStencil,
    NoiseSpec,
};
pub use mc::{
    drift_flow, empirical_density, increment_scale, sample_standard_stable, simulate_ensemble, symmetry_check,
    EmpiricalDensity, McSummary, SampleSet, SimConfig, Stepper, SymmetryCheck,
};
