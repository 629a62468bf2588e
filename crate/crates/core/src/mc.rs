//! Monte Carlo simulation of `dX = f(b,X)dt + noise` with exact stable increments.
//!
//! The jump part of the PDE generator is `ε·J` with the unnormalized measure
//! `dy/|y|^{1+α}`, whose increments over `dt` have characteristic function
//! `exp(−dt·ε·c_α|λ|^α)`. A path therefore moves by `increment_scale(α, ε^{1/α}, dt)·S`
//! per step with `S` standard symmetric α-stable.
//!
//! The drift is integrated with its exact flow by default. The explicit Euler
//! step is available as [`Stepper::Euler`] and diverges when a large jump meets
//! the cubic restoring force with too large a `dt`.

use crate::error::{Error, Result};
use crate::fpe::DriftSpec;
use crate::grid::{Density, Grid};
use crate::levy::{check_alpha, stable_scale_constant, NoiseSpec};
use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// One draw with characteristic function `exp(−|λ|^α)` (Chambers–Mallows–Stuck).
///
/// `α = 2` gives `N(0, 2)`.
pub fn sample_standard_stable<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    let u: f64 = rng.sample(Open01);
    let w: f64 = -rng.sample::<f64, _>(Open01).ln();
    let v = PI * (u - 0.5);
    if alpha == 1.0 {
        return v.tan();
    }
    let a = (alpha * v).sin() / v.cos().powf(1.0 / alpha);
    let b = (((1.0 - alpha) * v).cos() / w).powf((1.0 - alpha) / alpha);
    a * b
}

/// `ε·(c_α dt)^{1/α}`: the scale of `ε·ΔL` over a step `dt`.
pub fn increment_scale(alpha: f64, epsilon: f64, dt: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::invalid(
            "epsilon",
            format!("epsilon must be positive, got {epsilon}"),
        ));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::invalid("dt", format!("dt must be positive, got {dt}")));
    }
    Ok(epsilon * (stable_scale_constant(alpha)? * dt).powf(1.0 / alpha))
}

/// Drift integration within one step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stepper {
    /// Exact flow of `ẋ = bx − x³`, then the noise increment.
    #[default]
    ExactDrift,
    /// `x + f(b,x)dt + increment`.
    Euler,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub drift: DriftSpec,
    pub noise: NoiseSpec,
    pub dt: f64,
    pub t_burn: f64,
    pub t_sample: f64,
    pub n_paths: usize,
    pub seed: u64,
    /// States with `|x|` beyond this are tallied as exterior, not recorded.
    pub clamp_radius: f64,
    pub stepper: Stepper,
}

impl SimConfig {
    /// Config with `clamp_radius = 10·l` for the given grid and the exact-drift stepper.
    pub fn new(
        drift: DriftSpec,
        noise: NoiseSpec,
        grid: &Grid,
        dt: f64,
        t_burn: f64,
        t_sample: f64,
        n_paths: usize,
        seed: u64,
    ) -> Self {
        Self {
            drift,
            noise,
            dt,
            t_burn,
            t_sample,
            n_paths,
            seed,
            clamp_radius: 10.0 * grid.half_width(),
            stepper: Stepper::ExactDrift,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.noise.validate()?;
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::invalid("dt", format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_burn >= 0.0 && self.t_burn.is_finite()) {
            return Err(Error::invalid(
                "t_burn",
                format!("t_burn must be non-negative, got {}", self.t_burn),
            ));
        }
        if !(self.t_sample >= 0.0 && self.t_sample.is_finite()) {
            return Err(Error::invalid(
                "t_sample",
                format!("t_sample must be non-negative, got {}", self.t_sample),
            ));
        }
        if self.n_paths == 0 {
            return Err(Error::invalid("n_paths", "n_paths must be at least 1"));
        }
        if !(self.clamp_radius > 0.0) {
            return Err(Error::invalid(
                "clamp_radius",
                format!("clamp_radius must be positive, got {}", self.clamp_radius),
            ));
        }
        Ok(())
    }

    pub fn burn_steps(&self) -> usize {
        (self.t_burn / self.dt).round() as usize
    }

    pub fn sample_steps(&self) -> usize {
        (self.t_sample / self.dt).round() as usize
    }

    /// Per-step scale multiplying a standard stable draw.
    fn noise_scale(&self) -> Result<(f64, f64)> {
        match self.noise {
            NoiseSpec::Stable { alpha, epsilon } => {
                Ok((alpha, increment_scale(alpha, epsilon.powf(1.0 / alpha), self.dt)?))
            }
            // N(0,2) draws scaled to variance σ²dt
            NoiseSpec::Gaussian { sigma } => Ok((2.0, sigma * (0.5 * self.dt).sqrt())),
        }
    }
}

/// `expm1(2bh)/b`, continuous at `b = 0`.
fn growth(b: f64, h: f64) -> f64 {
    if b == 0.0 {
        2.0 * h
    } else {
        (2.0 * b * h).exp_m1() / b
    }
}

/// Exact solution of `ẋ = bx − x³` after time `h`.
pub fn drift_flow(b: f64, x0: f64, h: f64) -> f64 {
    if x0 == 0.0 {
        return 0.0;
    }
    if x0.abs() <= 1.0 {
        x0 * (b * h).exp() / (1.0 + x0 * x0 * growth(b, h)).sqrt()
    } else {
        // u = 1/x² obeys u' = 2 − 2bu
        let u0 = 1.0 / (x0 * x0);
        let u = u0 * (-2.0 * b * h).exp() + growth(-b, h);
        x0.signum() / u.sqrt()
    }
}

/// States recorded after burn-in, pooled over paths in path order.
#[derive(Debug, Clone)]
pub struct SampleSet {
    /// Recorded states with `|x| ≤ clamp_radius`.
    pub samples: Vec<f64>,
    /// `samples[path_offsets[k]..path_offsets[k+1]]` belong to path `k`.
    pub path_offsets: Vec<usize>,
    /// Recorded states beyond `clamp_radius`.
    pub n_exterior: usize,
    pub config: SimConfig,
}

impl SampleSet {
    pub fn n_recorded(&self) -> usize {
        self.samples.len() + self.n_exterior
    }

    pub fn n_paths(&self) -> usize {
        self.path_offsets.len() - 1
    }

    pub fn path(&self, k: usize) -> &[f64] {
        &self.samples[self.path_offsets[k]..self.path_offsets[k + 1]]
    }

    pub fn summary(&self, grid: &Grid) -> McSummary {
        let (n_retained, outside) = count_in_grid(&self.samples, grid);
        let n_exterior = outside + self.n_exterior;
        McSummary {
            n_retained,
            n_exterior,
            exterior_fraction: n_exterior as f64 / (n_retained + n_exterior).max(1) as f64,
            seed: self.config.seed,
            dt: self.config.dt,
            t_burn: self.config.t_burn,
            t_sample: self.config.t_sample,
        }
    }
}

/// JSON summary of an ensemble relative to a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McSummary {
    pub n_retained: usize,
    pub n_exterior: usize,
    pub exterior_fraction: f64,
    pub seed: u64,
    pub dt: f64,
    pub t_burn: f64,
    pub t_sample: f64,
}

fn simulate_path(cfg: &SimConfig, alpha: f64, scale: f64, path: usize) -> Result<(Vec<f64>, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(path as u64);
    let b = cfg.drift.b;
    let burn = cfg.burn_steps();
    let total = burn + cfg.sample_steps();
    let mut kept = Vec::with_capacity(total - burn);
    let mut exterior = 0;
    let mut x = 0.0f64;
    for step in 0..total {
        let jump = scale * sample_standard_stable(alpha, &mut rng);
        x = match cfg.stepper {
            Stepper::ExactDrift => drift_flow(b, x, cfg.dt) + jump,
            Stepper::Euler => x + cfg.drift.eval(x) * cfg.dt + jump,
        };
        if !x.is_finite() {
            return Err(Error::NonFiniteState { path, step });
        }
        if step >= burn {
            if x.abs() <= cfg.clamp_radius {
                kept.push(x);
            } else {
                exterior += 1;
            }
        }
    }
    Ok((kept, exterior))
}

/// Runs `n_paths` independent paths from `X₀ = 0`.
///
/// Path `k` draws from ChaCha8 stream `k` of the master seed, so the result does
/// not depend on the number of worker threads.
pub fn simulate_ensemble(cfg: &SimConfig) -> Result<SampleSet> {
    cfg.validate()?;
    let (alpha, scale) = cfg.noise_scale()?;
    let paths: Vec<(Vec<f64>, usize)> = (0..cfg.n_paths)
        .into_par_iter()
        .map(|k| simulate_path(cfg, alpha, scale, k))
        .collect::<Result<_>>()?;
    let mut samples = Vec::with_capacity(paths.iter().map(|p| p.0.len()).sum());
    let mut path_offsets = vec![0];
    let mut n_exterior = 0;
    for (kept, ext) in paths {
        samples.extend_from_slice(&kept);
        path_offsets.push(samples.len());
        n_exterior += ext;
    }
    Ok(SampleSet {
        samples,
        path_offsets,
        n_exterior,
        config: *cfg,
    })
}

/// Bin of `x`: bins have width `Δx` and are centered on the grid nodes.
fn bin_of(grid: &Grid, x: f64) -> Option<usize> {
    let k = (x / grid.spacing()).round();
    let c = grid.center_index() as f64;
    if k.abs() > c {
        None
    } else {
        Some((k + c) as usize)
    }
}

fn count_in_grid(samples: &[f64], grid: &Grid) -> (usize, usize) {
    let inside = samples.iter().filter(|x| bin_of(grid, **x).is_some()).count();
    (inside, samples.len() - inside)
}

fn histogram(samples: &[f64], grid: &Grid) -> (Vec<f64>, usize) {
    let mut counts = vec![0.0; grid.len()];
    let mut inside = 0;
    for x in samples {
        if let Some(i) = bin_of(grid, *x) {
            counts[i] += 1.0;
            inside += 1;
        }
    }
    (counts, inside)
}

/// Histogram estimate on the grid nodes plus the fraction of recorded mass that fell outside it.
#[derive(Debug, Clone)]
pub struct EmpiricalDensity {
    pub density: Density,
    /// Outside the grid bins or beyond `clamp_radius`, over all recorded states.
    pub exterior_fraction: f64,
    pub n_in_domain: usize,
}

/// Histogram of in-domain samples, normalized to unit trapezoid mass.
pub fn empirical_density(set: &SampleSet, grid: &Grid) -> Result<EmpiricalDensity> {
    let (counts, inside) = histogram(&set.samples, grid);
    if inside == 0 {
        return Err(Error::NoInDomainSamples);
    }
    let scale = 1.0 / (inside as f64 * grid.spacing());
    let density = Density::new(*grid, counts.into_iter().map(|c| c * scale).collect())?.normalize()?;
    let exterior = set.n_recorded() - inside;
    Ok(EmpiricalDensity {
        density,
        exterior_fraction: exterior as f64 / set.n_recorded() as f64,
        n_in_domain: inside,
    })
}

/// Sign-flip statistic and its sampling-noise scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetryCheck {
    /// `‖p − reflect(p)‖₁` of the pooled histogram.
    pub l1_asymmetry: f64,
    /// Expected value of that statistic under exact symmetry.
    pub noise_estimate: f64,
    pub batches: usize,
}

/// Compares the pooled histogram with its reflection.
///
/// Paths are split into `batches` contiguous groups. The per-bin variance across
/// batch histograms sets the noise scale, which accounts for the time correlation
/// along each path.
pub fn symmetry_check(set: &SampleSet, grid: &Grid, batches: usize) -> Result<SymmetryCheck> {
    let paths = set.n_paths();
    if batches < 2 || batches > paths {
        return Err(Error::invalid(
            "batches",
            format!("batches must lie in [2, {paths}], got {batches}"),
        ));
    }
    let n = grid.len();
    let dx = grid.spacing();
    let mut batch_densities = Vec::with_capacity(batches);
    for k in 0..batches {
        let lo = set.path_offsets[k * paths / batches];
        let hi = set.path_offsets[(k + 1) * paths / batches];
        let (counts, inside) = histogram(&set.samples[lo..hi], grid);
        if inside == 0 {
            return Err(Error::NoInDomainSamples);
        }
        let scale = 1.0 / (inside as f64 * dx);
        batch_densities.push(counts.into_iter().map(|c| c * scale).collect::<Vec<_>>());
    }
    let bf = batches as f64;
    let mean: Vec<f64> = (0..n)
        .map(|i| batch_densities.iter().map(|d| d[i]).sum::<f64>() / bf)
        .collect();
    let var: Vec<f64> = (0..n)
        .map(|i| batch_densities.iter().map(|d| (d[i] - mean[i]).powi(2)).sum::<f64>() / (bf - 1.0))
        .collect();
    let pooled = empirical_density(set, grid)?.density;
    let l1_asymmetry = pooled.l1_distance(&pooled.reflect())?;
    // p_i − p_m(i) ~ N(0, (var_i + var_m)/B); E|N(0,s²)| = s√(2/π)
    let noise_estimate = dx
        * (0..n)
            .map(|i| ((var[i] + var[grid.mirror_index(i)]) / bf).sqrt() * (2.0 / PI).sqrt())
            .sum::<f64>();
    Ok(SymmetryCheck {
        l1_asymmetry,
        noise_estimate,
        batches,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(b: f64, noise: NoiseSpec, t_burn: f64, t_sample: f64, n_paths: usize) -> SimConfig {
        SimConfig::new(
            DriftSpec::new(b).unwrap(),
            noise,
            &Grid::default_grid(),
            1e-3,
            t_burn,
            t_sample,
            n_paths,
            7,
        )
    }

    #[test]
    fn increment_scale_examples() {
        let s = increment_scale(1.0, 1.0, 1.0).unwrap();
        assert!((s - PI).abs() < 1e-9);
        let a = increment_scale(0.5, 0.3, 0.01).unwrap();
        let b = increment_scale(0.5, 0.3, 0.02).unwrap();
        assert!((b / a - 4.0).abs() < 1e-12);
        let c = increment_scale(1.3, 0.6, 0.01).unwrap();
        assert!((c / increment_scale(1.3, 0.3, 0.01).unwrap() - 2.0).abs() < 1e-12);
        assert!(increment_scale(2.0, 1.0, 1.0).is_err());
        assert!(increment_scale(1.0, 0.0, 1.0).is_err());
        assert!(increment_scale(1.0, 1.0, -1.0).is_err());
    }

    #[test]
    fn gaussian_limit_variance() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 1_000_000;
        let var = (0..n)
            .map(|_| sample_standard_stable(2.0, &mut rng).powi(2))
            .sum::<f64>()
            / n as f64;
        assert!((1.99..=2.01).contains(&var), "{var}");
    }

    #[test]
    fn drift_flow_matches_fine_integration() {
        for &(b, x0) in &[(1.0, 0.3), (-5.0, 2.0), (0.0, -4.0), (3.0, 50.0), (0.0, 0.5)] {
            let h = 0.05;
            let mut x: f64 = x0;
            let steps = 200_000;
            let dt = h / steps as f64;
            for _ in 0..steps {
                // RK2
                let k1 = b * x - x.powi(3);
                let xm = x + 0.5 * dt * k1;
                x += dt * (b * xm - xm.powi(3));
            }
            let exact = drift_flow(b, x0, h);
            assert!(
                (exact - x).abs() < 1e-6 * x.abs().max(1.0),
                "b={b} x0={x0}: {exact} vs {x}"
            );
        }
        assert_eq!(drift_flow(2.0, 0.0, 1.0), 0.0);
        assert!((drift_flow(1.0, 1.0, 3.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn tiny_noise_contracts_to_origin() {
        let set = simulate_ensemble(&cfg(-1.0, NoiseSpec::stable(1.0, 1e-12).unwrap(), 10.0, 1.0, 4)).unwrap();
        let mean_abs = set.samples.iter().map(|x| x.abs()).sum::<f64>() / set.samples.len() as f64;
        assert!(mean_abs <= 0.05);
    }

    #[test]
    fn tiny_noise_settles_on_pitchfork_branches() {
        // X₀ = 0 is a fixed point of the drift; the noise moves it off
        let set = simulate_ensemble(&cfg(1.0, NoiseSpec::stable(1.5, 1e-6).unwrap(), 30.0, 1.0, 8)).unwrap();
        let near = set.samples.iter().filter(|x| (x.abs() - 1.0).abs() < 0.2).count();
        assert!(near as f64 >= 0.95 * set.samples.len() as f64);
    }

    #[test]
    fn fixed_seed_is_reproducible() {
        let c = cfg(-1.0, NoiseSpec::stable(0.8, 0.5).unwrap(), 0.5, 0.5, 6);
        let a = simulate_ensemble(&c).unwrap();
        let b = simulate_ensemble(&c).unwrap();
        assert_eq!(a.samples, b.samples);
        assert_eq!(a.path_offsets, b.path_offsets);
        assert_eq!(a.n_exterior, b.n_exterior);
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let c = cfg(-1.0, NoiseSpec::stable(1.2, 0.5).unwrap(), 0.2, 0.2, 9);
        let one = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| simulate_ensemble(&c).unwrap());
        let many = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(|| simulate_ensemble(&c).unwrap());
        assert_eq!(one.samples, many.samples);
    }

    #[test]
    fn sample_counts() {
        let c = cfg(-1.0, NoiseSpec::stable(1.2, 0.5).unwrap(), 0.1, 0.25, 3);
        let set = simulate_ensemble(&c).unwrap();
        assert_eq!(set.n_recorded(), 3 * 250);
        assert_eq!(set.n_paths(), 3);
    }

    #[test]
    fn config_validation() {
        let mut c = cfg(-1.0, NoiseSpec::stable(1.0, 0.5).unwrap(), 1.0, 1.0, 1);
        c.dt = 0.0;
        assert!(simulate_ensemble(&c).is_err());
        c.dt = 1e-3;
        c.n_paths = 0;
        assert!(simulate_ensemble(&c).is_err());
    }

    fn set_from(samples: Vec<f64>) -> SampleSet {
        SampleSet {
            path_offsets: vec![0, samples.len()],
            samples,
            n_exterior: 0,
            config: cfg(0.0, NoiseSpec::gaussian(1.0).unwrap(), 0.0, 0.0, 1),
        }
    }

    #[test]
    fn all_samples_at_origin_give_a_center_spike() {
        let grid = Grid::new(1.0, 9).unwrap();
        let e = empirical_density(&set_from(vec![0.0; 100]), &grid).unwrap();
        let c = grid.center_index();
        assert!((e.density.values()[c] - 1.0 / grid.spacing()).abs() < 1e-12);
        assert_eq!(e.density.values().iter().filter(|v| **v > 0.0).count(), 1);
        assert_eq!(e.exterior_fraction, 0.0);
    }

    #[test]
    fn outside_samples_count_as_exterior() {
        let grid = Grid::new(1.0, 9).unwrap();
        let e = empirical_density(&set_from(vec![0.0, 0.0, 5.0, -0.99]), &grid).unwrap();
        assert!((e.exterior_fraction - 0.5).abs() < 1e-15);
        assert!(matches!(
            empirical_density(&set_from(vec![5.0]), &grid),
            Err(Error::NoInDomainSamples)
        ));
    }

    #[test]
    fn symmetry_check_rejects_bad_batches() {
        let grid = Grid::new(1.0, 9).unwrap();
        assert!(symmetry_check(&set_from(vec![0.0]), &grid, 2).is_err());
    }
}
