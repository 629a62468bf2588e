//! Stationary nonlocal Fokker–Planck problem for `dX = (bX − X³)dt + noise`.
//!
//! The adjoint generator is discretized as `M = D + N`, where `D` is the
//! conservative flux difference for `−∂ₓ[f(b,x)p]` and `N` is either
//! `ε·J` (the [`JumpStencil`]) or `(σ²/2)` times the second central difference.
//!
//! # Re-entry closure
//!
//! On the truncated domain the Dirichlet operator `M` loses mass: jumps that land
//! outside `(−l, l)` vanish. The true process returns from the exterior, pushed by
//! the cubic drift, and passes back through `±l`. [`GeneratorMatrix`] records the
//! per-node exit rates through each end and the closed operator `M̃` feeds that
//! mass back into the first and last node on the side it left through, where the
//! inward drift carries it towards the attractors. Columns of `M̃` sum to zero, so
//! `M̃` has a one-dimensional kernel and both solvers target the same density.

use crate::error::{Error, Result};
use crate::grid::{Density, Grid};
use crate::levy::{JumpStencil, NoiseSpec};
use crate::linalg::{condition_estimate, DenseLu};
use faer::Mat;
use serde::{Deserialize, Serialize};

/// `f(b, x) = bx − x³`.
pub fn drift(b: f64, x: f64) -> f64 {
    b * x - x * x * x
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftSpec {
    pub b: f64,
}

impl DriftSpec {
    pub fn new(b: f64) -> Result<Self> {
        if !b.is_finite() {
            return Err(Error::invalid("b", format!("b must be finite, got {b}")));
        }
        Ok(Self { b })
    }

    pub fn eval(&self, x: f64) -> f64 {
        drift(self.b, x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stability {
    Stable,
    Unstable,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub location: f64,
    pub stability: Stability,
    /// Linearization vanishes (`b = 0`); stability comes from the cubic term.
    pub degenerate: bool,
}

/// Fixed points of `ẋ = bx − x³`, sorted by location.
pub fn deterministic_equilibria(b: f64) -> Vec<Equilibrium> {
    if b <= 0.0 {
        return vec![Equilibrium {
            location: 0.0,
            stability: Stability::Stable,
            degenerate: b == 0.0,
        }];
    }
    let r = b.sqrt();
    let stable = |location| Equilibrium {
        location,
        stability: Stability::Stable,
        degenerate: false,
    };
    vec![
        stable(-r),
        Equilibrium {
            location: 0.0,
            stability: Stability::Unstable,
            degenerate: false,
        },
        stable(r),
    ]
}

/// Flux discretization of the drift term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriftScheme {
    /// Upwind for stable noise, central for Gaussian noise.
    Auto,
    /// First-order upwind; monotone.
    Upwind,
    /// Second-order central flux.
    Central,
}

impl DriftScheme {
    pub fn resolve(self, noise: &NoiseSpec) -> DriftScheme {
        match (self, noise) {
            (DriftScheme::Auto, NoiseSpec::Stable { .. }) => DriftScheme::Upwind,
            (DriftScheme::Auto, NoiseSpec::Gaussian { .. }) => DriftScheme::Central,
            (s, _) => s,
        }
    }
}

#[derive(Debug, Clone)]
enum NoiseOperator {
    Jump { stencil: JumpStencil, epsilon: f64 },
    Diffusion { coeff: f64 },
}

/// Discretized adjoint generator together with its exit-rate bookkeeping.
#[derive(Debug, Clone)]
pub struct GeneratorMatrix {
    grid: Grid,
    drift: DriftSpec,
    noise: NoiseSpec,
    scheme: DriftScheme,
    // tridiagonal drift part D: sub, diag, super
    drift_sub: Vec<f64>,
    drift_diag: Vec<f64>,
    drift_sup: Vec<f64>,
    noise_op: NoiseOperator,
    exit_left: Vec<f64>,
    exit_right: Vec<f64>,
}

impl GeneratorMatrix {
    /// Assembles `M = D + N` on `grid`.
    pub fn assemble(grid: &Grid, drift: DriftSpec, noise: NoiseSpec, scheme: DriftScheme) -> Result<Self> {
        noise.validate()?;
        let scheme = scheme.resolve(&noise);
        let n = grid.len();
        let dx = grid.spacing();
        let c = grid.center_index() as f64;

        let mut drift_sub = vec![0.0; n];
        let mut drift_diag = vec![0.0; n];
        let mut drift_sup = vec![0.0; n];
        let mut exit_left = vec![0.0; n];
        let mut exit_right = vec![0.0; n];

        // face k sits between node k-1 and node k
        for k in 0..=n {
            let v = drift.eval((k as f64 - c - 0.5) * dx);
            let (from_left, from_right) = match scheme {
                DriftScheme::Upwind => {
                    if v > 0.0 {
                        (v, 0.0)
                    } else {
                        (0.0, v)
                    }
                }
                DriftScheme::Central | DriftScheme::Auto => (0.5 * v, 0.5 * v),
            };
            // row k-1 loses F/Δx, row k gains F/Δx
            if k >= 1 {
                let l = k - 1;
                drift_diag[l] -= from_left / dx;
                if k < n {
                    drift_sup[l] -= from_right / dx;
                }
            }
            if k < n {
                drift_diag[k] += from_right / dx;
                if k >= 1 {
                    drift_sub[k] += from_left / dx;
                }
            }
            if k == 0 {
                exit_left[0] -= from_right / dx;
            }
            if k == n {
                exit_right[n - 1] += from_left / dx;
            }
        }

        let noise_op = match noise {
            NoiseSpec::Stable { alpha, epsilon } => {
                let stencil = JumpStencil::build(grid, alpha)?;
                for j in 0..n {
                    let (r, l) = stencil.exit_coefficients(j);
                    exit_right[j] += epsilon * r;
                    exit_left[j] += epsilon * l;
                }
                NoiseOperator::Jump { stencil, epsilon }
            }
            NoiseSpec::Gaussian { sigma } => {
                let coeff = 0.5 * sigma * sigma;
                exit_left[0] += coeff / (dx * dx);
                exit_right[n - 1] += coeff / (dx * dx);
                NoiseOperator::Diffusion { coeff }
            }
        };

        Ok(Self {
            grid: *grid,
            drift,
            noise,
            scheme,
            drift_sub,
            drift_diag,
            drift_sup,
            noise_op,
            exit_left,
            exit_right,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn drift_spec(&self) -> DriftSpec {
        self.drift
    }

    pub fn noise(&self) -> NoiseSpec {
        self.noise
    }

    pub fn scheme(&self) -> DriftScheme {
        self.scheme
    }

    pub fn jump_stencil(&self) -> Option<&JumpStencil> {
        match &self.noise_op {
            NoiseOperator::Jump { stencil, .. } => Some(stencil),
            NoiseOperator::Diffusion { .. } => None,
        }
    }

    /// Exit-rate coefficients through the left and right ends, per node.
    pub fn exit_coefficients(&self) -> (&[f64], &[f64]) {
        (&self.exit_left, &self.exit_right)
    }

    /// Mass per unit time leaving `(−l, l)` under the open (Dirichlet) dynamics.
    pub fn exit_rate(&self, values: &[f64]) -> f64 {
        self.grid.spacing()
            * values
                .iter()
                .zip(self.exit_left.iter().zip(&self.exit_right))
                .map(|(p, (l, r))| p * (l + r))
                .sum::<f64>()
    }

    /// `M p` for the open Dirichlet operator.
    pub fn apply_open(&self, values: &[f64]) -> Vec<f64> {
        let n = self.grid.len();
        assert_eq!(values.len(), n, "values must match the grid");
        let mut out = match &self.noise_op {
            NoiseOperator::Jump { stencil, epsilon } => {
                let mut v = stencil.apply_values(values, 0.0);
                v.iter_mut().for_each(|x| *x *= epsilon);
                v
            }
            NoiseOperator::Diffusion { coeff } => {
                let dx2 = self.grid.spacing().powi(2);
                (0..n)
                    .map(|i| {
                        let left = if i > 0 { values[i - 1] } else { 0.0 };
                        let right = if i + 1 < n { values[i + 1] } else { 0.0 };
                        coeff * (left - 2.0 * values[i] + right) / dx2
                    })
                    .collect()
            }
        };
        for i in 0..n {
            out[i] += self.drift_diag[i] * values[i];
            if i > 0 {
                out[i] += self.drift_sub[i] * values[i - 1];
            }
            if i + 1 < n {
                out[i] += self.drift_sup[i] * values[i + 1];
            }
        }
        out
    }

    /// `M̃ p` for the closed operator (open operator plus re-entry).
    pub fn apply_closed(&self, values: &[f64]) -> Vec<f64> {
        let mut out = self.apply_open(values);
        let n = out.len();
        out[0] += dot(&self.exit_left, values);
        out[n - 1] += dot(&self.exit_right, values);
        out
    }

    /// Dense noise part `N` (row-major), `ε·J` or the scaled Laplacian.
    pub fn noise_dense(&self) -> Mat<f64> {
        let n = self.grid.len();
        match &self.noise_op {
            NoiseOperator::Jump { stencil, epsilon } => {
                let diag = stencil.diagonal();
                let coupling: Vec<f64> = (1..n).map(|k| stencil.coupling(k)).collect();
                Mat::from_fn(n, n, |i, j| {
                    epsilon * if i == j { diag } else { coupling[i.abs_diff(j) - 1] }
                })
            }
            NoiseOperator::Diffusion { coeff } => {
                let s = coeff / self.grid.spacing().powi(2);
                Mat::from_fn(n, n, |i, j| match i.abs_diff(j) {
                    0 => -2.0 * s,
                    1 => s,
                    _ => 0.0,
                })
            }
        }
    }

    /// Dense open operator `M = D + N`.
    pub fn dense_open(&self) -> Mat<f64> {
        let mut m = self.noise_dense();
        let n = self.grid.len();
        for i in 0..n {
            m[(i, i)] += self.drift_diag[i];
            if i > 0 {
                m[(i, i - 1)] += self.drift_sub[i];
            }
            if i + 1 < n {
                m[(i, i + 1)] += self.drift_sup[i];
            }
        }
        m
    }

    /// Dense closed operator `M̃`; its columns sum to zero.
    pub fn dense_closed(&self) -> Mat<f64> {
        let mut m = self.dense_open();
        let n = self.grid.len();
        for j in 0..n {
            m[(0, j)] += self.exit_left[j];
            m[(n - 1, j)] += self.exit_right[j];
        }
        m
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn linf(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

/// Options for the implicit-Euler relaxation solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransientOptions {
    pub dt: f64,
    pub tol: f64,
    pub max_steps: usize,
}

impl Default for TransientOptions {
    fn default() -> Self {
        Self {
            dt: 0.5,
            tol: 1e-10,
            max_steps: 100_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum SolverMethod {
    Direct,
    Transient(TransientOptions),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub method: SolverMethod,
    pub scheme: DriftScheme,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            method: SolverMethod::Direct,
            scheme: DriftScheme::Auto,
        }
    }
}

/// A solved stationary density and its diagnostics.
#[derive(Debug, Clone)]
pub struct StationarySolution {
    pub density: Density,
    /// `‖M̃ p‖_∞` of the returned density.
    pub residual_inf: f64,
    /// Mass removed by clipping small negative values before renormalizing.
    pub clipped_mass: f64,
    /// Fraction of mass per unit time that leaves `(−l, l)` and re-enters.
    pub leak_rate: f64,
    pub condition_estimate: Option<f64>,
    pub steps: Option<usize>,
}

const CONDITION_LIMIT: f64 = 1e14;
const NEGATIVE_RELATIVE_LIMIT: f64 = 1e-6;
const NEGATIVE_MASS_LIMIT: f64 = 0.01;

/// Applies the negativity policy and normalizes.
fn finalize(grid: &Grid, mut values: Vec<f64>) -> Result<(Density, f64)> {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if !(max.is_finite() && min.is_finite()) || max <= 0.0 {
        return Err(Error::NonPositiveMass { mass: max });
    }
    let negative: f64 = values.iter().filter(|v| **v < 0.0).map(|v| -v).sum();
    let total: f64 = values.iter().map(|v| v.abs()).sum();
    let fraction = negative / total;
    if min < -NEGATIVE_RELATIVE_LIMIT * max || fraction > NEGATIVE_MASS_LIMIT {
        return Err(Error::NegativeDensity {
            fraction,
            min_value: min,
        });
    }
    let clipped = grid.spacing() * negative;
    values.iter_mut().for_each(|v| *v = v.max(0.0));
    let density = Density::new(*grid, values)?;
    let mass = density.mass();
    Ok((density.normalize()?, clipped / mass))
}

/// Solves `M̃ p = 0` with `∫p = 1` by replacing the center row with the
/// trapezoid weights.
pub fn solve_stationary_direct(m: &GeneratorMatrix) -> Result<StationarySolution> {
    let grid = *m.grid();
    let n = grid.len();
    let center = grid.center_index();
    let mut a = m.dense_closed();
    for j in 0..n {
        a[(center, j)] = grid.quadrature_weight();
    }
    let lu = DenseLu::new(&a);
    let cond = condition_estimate(&a, &lu);
    if !(cond.is_finite() && cond <= CONDITION_LIMIT) {
        return Err(Error::IllConditioned { estimate: cond });
    }
    let mut rhs = vec![0.0; n];
    rhs[center] = 1.0;
    let raw = lu.solve(&rhs);
    let (density, clipped_mass) = finalize(&grid, raw)?;
    let residual_inf = linf(&m.apply_closed(density.values()));
    let leak_rate = m.exit_rate(density.values());
    Ok(StationarySolution {
        density,
        residual_inf,
        clipped_mass,
        leak_rate,
        condition_estimate: Some(cond),
        steps: None,
    })
}

/// Truncated standard normal on the grid, normalized.
fn gaussian_start(grid: &Grid) -> Vec<f64> {
    let mut p: Vec<f64> = grid.nodes().iter().map(|x| (-0.5 * x * x).exp()).collect();
    let mass = crate::grid::trapezoid_mass(grid, &p);
    p.iter_mut().for_each(|v| *v /= mass);
    p
}

/// Relaxes `∂ₜp = M̃p` by implicit Euler from a standard Gaussian until
/// `‖p^{k+1} − p^k‖_∞ / dt ≤ tol`.
pub fn solve_stationary_transient(m: &GeneratorMatrix, opts: &TransientOptions) -> Result<StationarySolution> {
    if !(opts.dt.is_finite() && opts.dt > 0.0) {
        return Err(Error::invalid("dt", format!("dt must be positive, got {}", opts.dt)));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::invalid("tol", format!("tol must be positive, got {}", opts.tol)));
    }
    let grid = *m.grid();
    let n = grid.len();
    let mut a = m.dense_closed();
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] *= -opts.dt;
        }
        a[(i, i)] += 1.0;
    }
    let lu = DenseLu::new(&a);
    let mut p = gaussian_start(&grid);
    let mut change = f64::INFINITY;
    for step in 1..=opts.max_steps {
        let mut q = lu.solve(&p);
        let mass = crate::grid::trapezoid_mass(&grid, &q);
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::NonPositiveMass { mass });
        }
        q.iter_mut().for_each(|v| *v /= mass);
        change = q.iter().zip(&p).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / opts.dt;
        p = q;
        if change <= opts.tol {
            let (density, clipped_mass) = finalize(&grid, p)?;
            let residual_inf = linf(&m.apply_closed(density.values()));
            let leak_rate = m.exit_rate(density.values());
            return Ok(StationarySolution {
                density,
                residual_inf,
                clipped_mass,
                leak_rate,
                condition_estimate: None,
                steps: Some(step),
            });
        }
    }
    Err(Error::NotConverged {
        steps: opts.max_steps,
        residual: change,
    })
}

/// Assembles and solves in one call.
pub fn solve_stationary(
    grid: &Grid,
    drift: DriftSpec,
    noise: NoiseSpec,
    opts: &SolverOptions,
) -> Result<StationarySolution> {
    let m = GeneratorMatrix::assemble(grid, drift, noise, opts.scheme)?;
    match &opts.method {
        SolverMethod::Direct => solve_stationary_direct(&m),
        SolverMethod::Transient(t) => solve_stationary_transient(&m, t),
    }
}

/// Exact stationary density `N exp[(bx² − x⁴/2)/σ²]` for Brownian forcing, normalized on the grid.
pub fn gaussian_stationary_analytic(b: f64, sigma: f64, grid: &Grid) -> Result<Density> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::invalid("sigma", format!("sigma must be positive, got {sigma}")));
    }
    let s2 = sigma * sigma;
    let exponent: Vec<f64> = grid
        .nodes()
        .iter()
        .map(|x| {
            let x2 = x * x;
            (b * x2 - 0.5 * x2 * x2) / s2
        })
        .collect();
    let top = exponent.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let values = exponent.iter().map(|e| (e - top).exp()).collect();
    Density::new(*grid, values)?.normalize()
}
