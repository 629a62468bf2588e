//! Shape classification of stationary densities and P-bifurcation search.
//!
//! A mode is a strict local maximum of the node sequence whose topographic
//! prominence exceeds `prominence · max(p)`. The sequence is padded with zeros at
//! both ends. Equal peaks (within `1e-9·max(p)`) are ranked left to right: the
//! leftmost of a tied pair is the parent, so in a symmetric bimodal density both
//! peaks survive and the right one carries prominence `h − saddle`.

use crate::error::{Error, Result};
use crate::fpe::{solve_stationary, DriftSpec, SolverOptions};
use crate::grid::{Density, Grid};
use crate::levy::{check_alpha, NoiseSpec};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub const DEFAULT_PROMINENCE: f64 = 0.01;

const TIE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSummary {
    pub modality: usize,
    /// Node indices of the modes, ascending.
    pub mode_indices: Vec<usize>,
    pub mode_locations: Vec<f64>,
}

/// Counts prominent modes. Never fails; an all-zero density has no modes.
pub fn count_modes(d: &Density, prominence: f64) -> ModeSummary {
    let p = d.values();
    let max = d.max();
    let mut q = Vec::with_capacity(p.len() + 2);
    q.push(0.0);
    q.extend_from_slice(p);
    q.push(0.0);
    let tol = TIE_TOLERANCE * max;
    let floor = prominence * max;
    let mut mode_indices = Vec::new();
    for i in 1..q.len() - 1 {
        let h = q[i];
        if !(h > q[i - 1] && h > q[i + 1]) {
            continue;
        }
        let mut left_min = h;
        for &v in q[..i].iter().rev() {
            if v >= h - tol {
                break;
            }
            left_min = left_min.min(v);
        }
        let mut right_min = h;
        for &v in &q[i + 1..] {
            if v > h + tol {
                break;
            }
            right_min = right_min.min(v);
        }
        if h - left_min.max(right_min) > floor {
            mode_indices.push(i - 1);
        }
    }
    let grid = d.grid();
    ModeSummary {
        modality: mode_indices.len(),
        mode_locations: mode_indices.iter().map(|&i| grid.node(i)).collect(),
        mode_indices,
    }
}

/// `m₄/m₂² − 3` from trapezoid moments about the trapezoid mean on the truncated domain.
pub fn excess_kurtosis(d: &Density) -> Result<f64> {
    let grid = d.grid();
    let nodes = grid.nodes();
    let p = d.values();
    let mass: f64 = p.iter().sum();
    if !(mass > 0.0) {
        return Err(Error::NonPositiveMass { mass });
    }
    let mean = nodes.iter().zip(p).map(|(x, w)| x * w).sum::<f64>() / mass;
    let (mut m2, mut m4) = (0.0, 0.0);
    for (x, w) in nodes.iter().zip(p) {
        let d2 = (x - mean).powi(2);
        m2 += w * d2;
        m4 += w * d2 * d2;
    }
    m2 /= mass;
    m4 /= mass;
    if m2 <= 1e-20 * grid.spacing().powi(2) {
        return Err(Error::DegenerateVariance);
    }
    Ok(m4 / (m2 * m2) - 3.0)
}

/// Drift parameter plus noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub b: f64,
    pub noise: NoiseSpec,
}

impl ModelParams {
    pub fn stable(b: f64, alpha: f64, epsilon: f64) -> Result<Self> {
        DriftSpec::new(b)?;
        Ok(Self {
            b,
            noise: NoiseSpec::stable(alpha, epsilon)?,
        })
    }

    pub fn gaussian(b: f64, sigma: f64) -> Result<Self> {
        DriftSpec::new(b)?;
        Ok(Self {
            b,
            noise: NoiseSpec::gaussian(sigma)?,
        })
    }
}

/// Shape descriptors of one solved point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BifurcationRecord {
    pub params: ModelParams,
    pub modality: usize,
    pub mode_locations: Vec<f64>,
    pub peak_height: f64,
    /// Excess kurtosis of the density restricted to `(−l, l)`.
    pub excess_kurtosis: f64,
    pub residual_inf: f64,
    pub clipped_mass: f64,
    pub leak_rate: f64,
    pub prominence: f64,
    pub half_width: f64,
    pub n_interior: usize,
}

/// Solves the stationary problem at `params` and describes its shape.
pub fn classify(params: &ModelParams, grid: &Grid, opts: &SolverOptions, prominence: f64) -> Result<BifurcationRecord> {
    classify_with_density(params, grid, opts, prominence).map(|(r, _)| r)
}

/// [`classify`], also returning the solved density.
pub fn classify_with_density(
    params: &ModelParams,
    grid: &Grid,
    opts: &SolverOptions,
    prominence: f64,
) -> Result<(BifurcationRecord, Density)> {
    check_prominence(prominence)?;
    let sol = solve_stationary(grid, DriftSpec::new(params.b)?, params.noise, opts)?;
    let modes = count_modes(&sol.density, prominence);
    let record = BifurcationRecord {
        params: *params,
        modality: modes.modality,
        mode_locations: modes.mode_locations,
        peak_height: sol.density.max(),
        excess_kurtosis: excess_kurtosis(&sol.density)?,
        residual_inf: sol.residual_inf,
        clipped_mass: sol.clipped_mass,
        leak_rate: sol.leak_rate,
        prominence,
        half_width: grid.half_width(),
        n_interior: grid.n_interior(),
    };
    Ok((record, sol.density))
}

fn check_prominence(prominence: f64) -> Result<()> {
    if !(prominence > 0.0 && prominence < 1.0) {
        return Err(Error::invalid(
            "prominence",
            format!("prominence must lie in (0,1), got {prominence}"),
        ));
    }
    Ok(())
}

/// Modality-change point in α at fixed `(b, ε)`, relative to the grid it was computed on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaStar {
    pub b: f64,
    pub epsilon: f64,
    pub alpha_star: f64,
    pub bracket_lo: f64,
    pub bracket_hi: f64,
    pub modality_lo: usize,
    pub modality_hi: usize,
}

/// Bisects on α until the bracket is no wider than `tol_alpha`.
pub fn find_alpha_star(
    b: f64,
    epsilon: f64,
    bracket: (f64, f64),
    tol_alpha: f64,
    grid: &Grid,
    opts: &SolverOptions,
    prominence: f64,
) -> Result<AlphaStar> {
    let (mut lo, mut hi) = bracket;
    check_alpha(lo)?;
    check_alpha(hi)?;
    if !(lo < hi) {
        return Err(Error::invalid(
            "bracket",
            format!("bracket must satisfy alpha_lo < alpha_hi, got ({lo}, {hi})"),
        ));
    }
    if !(tol_alpha > 0.0) {
        return Err(Error::invalid(
            "tol_alpha",
            format!("tol_alpha must be positive, got {tol_alpha}"),
        ));
    }
    let modality = |alpha: f64, lo: f64, hi: f64| -> Result<usize> {
        ModelParams::stable(b, alpha, epsilon)
            .and_then(|p| classify(&p, grid, opts, prominence))
            .map(|r| r.modality)
            .map_err(|e| Error::Bisection {
                lo,
                hi,
                source: Box::new(e),
            })
    };
    let m_lo = modality(lo, lo, hi)?;
    let mut m_hi = modality(hi, lo, hi)?;
    if m_lo == m_hi {
        return Err(Error::Bracket { lo, hi, modality: m_lo });
    }
    while hi - lo > tol_alpha {
        let mid = 0.5 * (lo + hi);
        let m = modality(mid, lo, hi)?;
        if m == m_lo {
            lo = mid;
        } else {
            hi = mid;
            m_hi = m;
        }
    }
    Ok(AlphaStar {
        b,
        epsilon,
        alpha_star: 0.5 * (lo + hi),
        bracket_lo: lo,
        bracket_hi: hi,
        modality_lo: m_lo,
        modality_hi: m_hi,
    })
}

/// Cartesian parameter axes of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepAxes {
    pub b: Vec<f64>,
    pub alpha: Vec<f64>,
    pub epsilon: Vec<f64>,
}

impl SweepAxes {
    /// Points in axis order: `b` outermost, then `α`, then `ε`.
    pub fn points(&self) -> Vec<(f64, f64, f64)> {
        let mut out = Vec::with_capacity(self.b.len() * self.alpha.len() * self.epsilon.len());
        for &b in &self.b {
            for &a in &self.alpha {
                for &e in &self.epsilon {
                    out.push((b, a, e));
                }
            }
        }
        out
    }
}

/// Outcome of one sweep point; failures do not abort the sweep.
#[derive(Debug, Clone)]
pub enum PointOutcome {
    Solved {
        record: BifurcationRecord,
        density: Option<Density>,
    },
    Failed {
        b: f64,
        alpha: f64,
        epsilon: f64,
        kind: &'static str,
        message: String,
    },
}

impl PointOutcome {
    pub fn record(&self) -> Option<&BifurcationRecord> {
        match self {
            PointOutcome::Solved { record, .. } => Some(record),
            PointOutcome::Failed { .. } => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BifurcationDiagram {
    pub axes: SweepAxes,
    pub prominence: f64,
    pub half_width: f64,
    pub n_interior: usize,
    /// One outcome per point of [`SweepAxes::points`], in that order.
    pub points: Vec<PointOutcome>,
    pub alpha_star_curve: Vec<AlphaStar>,
}

impl BifurcationDiagram {
    pub fn records(&self) -> impl Iterator<Item = &BifurcationRecord> {
        self.points.iter().filter_map(PointOutcome::record)
    }

    /// Modalities along α at fixed `(b, ε)`, `None` where the point failed.
    pub fn modality_row(&self, b: f64, epsilon: f64) -> Vec<Option<usize>> {
        self.axes
            .points()
            .iter()
            .zip(&self.points)
            .filter(|((pb, _, pe), _)| *pb == b && *pe == epsilon)
            .map(|(_, o)| o.record().map(|r| r.modality))
            .collect()
    }
}

/// Classifies every point of the axes concurrently.
///
/// Fails only if the axes are empty or invalid, or every point fails.
pub fn sweep(
    axes: &SweepAxes,
    grid: &Grid,
    opts: &SolverOptions,
    prominence: f64,
    keep_densities: bool,
) -> Result<BifurcationDiagram> {
    check_prominence(prominence)?;
    if axes.b.is_empty() || axes.alpha.is_empty() || axes.epsilon.is_empty() {
        return Err(Error::invalid("axes", "every sweep axis needs at least one value"));
    }
    for &a in &axes.alpha {
        check_alpha(a)?;
    }
    let points: Vec<PointOutcome> = axes
        .points()
        .into_par_iter()
        .map(|(b, alpha, epsilon)| {
            match ModelParams::stable(b, alpha, epsilon).and_then(|p| classify_with_density(&p, grid, opts, prominence))
            {
                Ok((record, density)) => PointOutcome::Solved {
                    record,
                    density: keep_densities.then_some(density),
                },
                Err(e) => PointOutcome::Failed {
                    b,
                    alpha,
                    epsilon,
                    kind: e.kind(),
                    message: e.to_string(),
                },
            }
        })
        .collect();
    if points.iter().all(|p| p.record().is_none()) {
        let first = match &points[0] {
            PointOutcome::Failed { message, .. } => message.clone(),
            PointOutcome::Solved { .. } => unreachable!(),
        };
        return Err(Error::SweepFailed { first });
    }
    Ok(BifurcationDiagram {
        axes: axes.clone(),
        prominence,
        half_width: grid.half_width(),
        n_interior: grid.n_interior(),
        points,
        alpha_star_curve: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gauss(x: f64, m: f64, s: f64) -> f64 {
        (-(x - m).powi(2) / (2.0 * s * s)).exp()
    }

    #[test]
    fn two_gaussians_are_bimodal() {
        let grid = Grid::new(4.0, 401).unwrap();
        let d = Density::from_fn(grid, |x| gauss(x, -1.0, 0.3) + gauss(x, 1.0, 0.3))
            .unwrap()
            .normalize()
            .unwrap();
        let m = count_modes(&d, 0.01);
        assert_eq!(m.modality, 2);
        assert!((m.mode_locations[0] + 1.0).abs() <= grid.spacing());
        assert!((m.mode_locations[1] - 1.0).abs() <= grid.spacing());
    }

    #[test]
    fn single_gaussian_is_unimodal() {
        let grid = Grid::new(4.0, 401).unwrap();
        let d = Density::from_fn(grid, |x| gauss(x, 0.0, 0.5)).unwrap();
        let m = count_modes(&d, 0.01);
        assert_eq!(m.modality, 1);
        assert!(m.mode_locations[0].abs() <= grid.spacing());
    }

    #[test]
    fn shallow_dip_is_below_the_floor() {
        let grid = Grid::new(1.0, 7).unwrap();
        let d = Density::new(grid, vec![0.1, 0.5, 1.0, 0.995, 1.0, 0.5, 0.1]).unwrap();
        assert_eq!(count_modes(&d, 0.01).modality, 1);
        assert_eq!(count_modes(&d, 0.001).modality, 2);
    }

    #[test]
    fn boundary_peak_uses_zero_padding() {
        let grid = Grid::new(1.0, 5).unwrap();
        let d = Density::new(grid, vec![1.0, 0.5, 0.2, 0.1, 0.05]).unwrap();
        assert_eq!(count_modes(&d, 0.01).mode_indices, vec![0]);
    }

    #[test]
    fn kurtosis_reference_values() {
        let grid = Grid::new(10.0, 2001).unwrap();
        let g = Density::from_fn(grid, |x| gauss(x, 0.0, 1.0))
            .unwrap()
            .normalize()
            .unwrap();
        assert!(excess_kurtosis(&g).unwrap().abs() < 0.01);

        let u = Density::from_fn(grid, |_| 1.0).unwrap();
        assert!((excess_kurtosis(&u).unwrap() + 1.2).abs() < 0.01);

        // two narrow Gaussians at ±1: m₂ = 1+σ², m₄ = 1+6σ²+3σ⁴
        let s: f64 = 0.05;
        let two = Density::from_fn(grid, |x| gauss(x, -1.0, s) + gauss(x, 1.0, s)).unwrap();
        let expected = (1.0 + 6.0 * s * s + 3.0 * s.powi(4)) / (1.0 + s * s).powi(2) - 3.0;
        assert!((excess_kurtosis(&two).unwrap() - expected).abs() < 1e-6);
    }

    #[test]
    fn spike_has_degenerate_variance() {
        let grid = Grid::new(1.0, 9).unwrap();
        let mut v = vec![0.0; 9];
        v[2] = 3.0;
        let d = Density::new(grid, v).unwrap();
        assert!(matches!(excess_kurtosis(&d), Err(Error::DegenerateVariance)));
    }

    #[test]
    fn brownian_classification() {
        let grid = Grid::new(6.0, 301).unwrap();
        let opts = SolverOptions::default();
        let r = classify(&ModelParams::gaussian(-1.0, 1.0).unwrap(), &grid, &opts, 0.01).unwrap();
        assert_eq!(r.modality, 1);
        let r = classify(&ModelParams::gaussian(1.0, 1.0).unwrap(), &grid, &opts, 0.01).unwrap();
        assert_eq!(r.modality, 2);
        assert!((r.mode_locations[0] + r.mode_locations[1]).abs() <= grid.spacing());
    }

    #[test]
    fn alpha_star_argument_errors() {
        let grid = Grid::new(4.0, 101).unwrap();
        let opts = SolverOptions::default();
        assert!(find_alpha_star(-1.0, 0.1, (1.0, 1.0), 0.01, &grid, &opts, 0.01).is_err());
        assert!(find_alpha_star(-1.0, 0.1, (0.5, 2.5), 0.01, &grid, &opts, 0.01).is_err());
        assert!(find_alpha_star(-1.0, 0.1, (0.5, 1.5), 0.0, &grid, &opts, 0.01).is_err());
    }

    #[test]
    fn sweep_axis_order_and_validation() {
        let axes = SweepAxes {
            b: vec![1.0, 2.0],
            alpha: vec![0.5],
            epsilon: vec![0.1, 0.2],
        };
        assert_eq!(
            axes.points(),
            vec![(1.0, 0.5, 0.1), (1.0, 0.5, 0.2), (2.0, 0.5, 0.1), (2.0, 0.5, 0.2)]
        );
        let grid = Grid::new(4.0, 101).unwrap();
        let bad = SweepAxes {
            alpha: vec![],
            ..axes.clone()
        };
        assert!(sweep(&bad, &grid, &SolverOptions::default(), 0.01, false).is_err());
        let bad = SweepAxes {
            alpha: vec![2.0],
            ..axes
        };
        assert!(sweep(&bad, &grid, &SolverOptions::default(), 0.01, false).is_err());
    }
}
