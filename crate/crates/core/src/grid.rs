//! Uniform grids on the truncated domain `(-l, l)` and densities on them.
//!
//! Nodes are `x_i = -l + i·Δx` for `i = 1..=n` with `Δx = 2l/(n+1)`, so the
//! boundary points `±l` are not stored. Every grid function is implicitly
//! zero at `±l` and outside the interval (homogeneous Dirichlet).

use crate::error::{Error, Result};

/// Default half-width `l`.
pub const DEFAULT_HALF_WIDTH: f64 = 10.0;
/// Default number of interior nodes (`Δx = 0.02` with the default `l`).
pub const DEFAULT_N_INTERIOR: usize = 999;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    half_width: f64,
    n_interior: usize,
    spacing: f64,
}

impl Grid {
    /// Builds the grid on `(-half_width, half_width)` with `n_interior` nodes.
    ///
    /// The node count must be odd and at least 3 so that `x = 0` is a node.
    pub fn new(half_width: f64, n_interior: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::invalid(
                "half_width",
                format!("must be a positive finite number, got {half_width}"),
            ));
        }
        if n_interior < 3 {
            return Err(Error::invalid(
                "n_interior",
                format!("need at least 3 interior nodes, got {n_interior}"),
            ));
        }
        if n_interior % 2 == 0 {
            return Err(Error::invalid(
                "n_interior",
                format!("must be odd so that x = 0 is a node, got {n_interior}"),
            ));
        }
        Ok(Self {
            half_width,
            n_interior,
            spacing: 2.0 * half_width / (n_interior + 1) as f64,
        })
    }

    /// Grid with the default `l = 10`, `n = 999`.
    pub fn default_grid() -> Self {
        Self::new(DEFAULT_HALF_WIDTH, DEFAULT_N_INTERIOR).expect("default grid is valid")
    }

    /// Grid on `(-2l, 2l)` with the same spacing.
    pub fn doubled(&self) -> Self {
        Self::new(2.0 * self.half_width, 2 * self.n_interior + 1).expect("doubling keeps validity")
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn n_interior(&self) -> usize {
        self.n_interior
    }

    pub fn len(&self) -> usize {
        self.n_interior
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Zero-based index of the node at `x = 0`.
    pub fn center_index(&self) -> usize {
        self.n_interior / 2
    }

    /// Location of node `i` (zero-based).
    ///
    /// Computed from the center outwards so that mirrored nodes are exact negatives.
    pub fn node(&self, i: usize) -> f64 {
        let offset = i as i64 - self.center_index() as i64;
        offset as f64 * self.spacing
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_interior).map(|i| self.node(i)).collect()
    }

    /// Index of the node mirrored through the origin.
    pub fn mirror_index(&self, i: usize) -> usize {
        self.n_interior - 1 - i
    }

    /// Trapezoid weight of an interior node (boundary values vanish).
    pub fn quadrature_weight(&self) -> f64 {
        self.spacing
    }

    pub(crate) fn same_as(&self, other: &Grid) -> bool {
        self.n_interior == other.n_interior && (self.half_width - other.half_width).abs() <= 1e-12 * self.half_width
    }
}

/// Trapezoid mass `Δx Σ p_i` of nodal values on `grid`.
const NORMALIZED_TOLERANCE: f64 = 1e-13;

pub fn trapezoid_mass(grid: &Grid, values: &[f64]) -> f64 {
    grid.spacing() * values.iter().sum::<f64>()
}

/// Nonnegative grid function, usually with unit trapezoid mass.
#[derive(Debug, Clone, PartialEq)]
pub struct Density {
    grid: Grid,
    values: Vec<f64>,
}

impl Density {
    /// Wraps nodal values; rejects wrong lengths, non-finite and negative entries.
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::invalid(
                "density",
                format!("expected {} values, got {}", grid.len(), values.len()),
            ));
        }
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite() || **v < 0.0) {
            return Err(Error::invalid(
                "density",
                format!("value at node {i} is {v}; densities must be finite and nonnegative"),
            ));
        }
        Ok(Self { grid, values })
    }

    /// Samples `f` at the nodes. Negative samples are rejected.
    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = (0..grid.len()).map(|i| f(grid.node(i))).collect();
        Self::new(grid, values)
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn mass(&self) -> f64 {
        trapezoid_mass(&self.grid, &self.values)
    }

    /// Rescales to unit trapezoid mass.
    ///
    /// A density whose mass is already 1 up to summation rounding is returned
    /// unchanged, so `normalize` is idempotent.
    pub fn normalize(&self) -> Result<Density> {
        let mass = self.mass();
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::NonPositiveMass { mass });
        }
        if (mass - 1.0).abs() <= NORMALIZED_TOLERANCE {
            return Ok(self.clone());
        }
        let scale = 1.0 / mass;
        Ok(Density {
            grid: self.grid,
            values: self.values.iter().map(|v| v * scale).collect(),
        })
    }

    /// `p_i ↦ p_{n+1-i}`.
    pub fn reflect(&self) -> Density {
        let mut values = self.values.clone();
        values.reverse();
        Density {
            grid: self.grid,
            values,
        }
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, v) in self.values.iter().enumerate() {
            if *v > self.values[best] {
                best = i;
            }
        }
        best
    }

    /// `max_i |p_i - q_i|`.
    pub fn linf_distance(&self, other: &Density) -> Result<f64> {
        self.check_grid(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    /// Trapezoid L1 distance `Δx Σ |p_i - q_i|`.
    pub fn l1_distance(&self, other: &Density) -> Result<f64> {
        self.check_grid(other)?;
        Ok(self.grid.spacing()
            * self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| (a - b).abs())
                .sum::<f64>())
    }

    /// `max_i |p_i - p_{n+1-i}|`.
    pub fn asymmetry(&self) -> f64 {
        let n = self.values.len();
        (0..n / 2)
            .map(|i| (self.values[i] - self.values[n - 1 - i]).abs())
            .fold(0.0, f64::max)
    }

    pub(crate) fn check_grid(&self, other: &Density) -> Result<()> {
        if self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }
}
