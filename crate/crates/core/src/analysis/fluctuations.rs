//! Height fluctuations along a thread.
//!
//! Along thread 0 the height drops by one at every bead, so the height
//! difference between faces `d` apart is minus the number of occupied
//! transverse edges among `d` consecutive ones. Under the infinite-volume
//! measure the occupied edges form a determinantal process whose kernel
//! comes from `K⁻¹`; the number of points of such a process is a sum of
//! independent Bernoulli variables with the kernel eigenvalues as means,
//! which gives exact samples of the count.

use super::Fit;
use crate::dynamics::{run, ChainState, DynamicsKind};
use crate::error::{Error, Result};
use crate::exact::{build_torus_kasteleyn, edge_kernel, TorusEdge, TorusKasteleyn};
use crate::lattice::{build_lattice, carve_free, LatticeKind, Region, Slot};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt::Write as _;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FluctuationSource {
    /// Exact samples from the infinite-volume measure.
    Exact,
    /// Samples from a long run of the asynchronous fast dynamics on a
    /// square region with uniform weights.
    Mcmc,
}

impl std::str::FromStr for FluctuationSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(FluctuationSource::Exact),
            "mcmc" => Ok(FluctuationSource::Mcmc),
            _ => Err(Error::Parse(format!("unknown fluctuation source '{s}'"))),
        }
    }
}

/// `E[N^p]` for a standard Gaussian: `(p-1)!!` for even `p`, 0 for odd.
pub fn gaussian_moment(p: u32) -> f64 {
    if p % 2 == 1 {
        return 0.0;
    }
    (1..p).step_by(2).map(f64::from).product()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentRow {
    pub order: u32,
    pub moment: f64,
    pub se: f64,
    pub gaussian_ref: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MomentReport {
    pub distance: u32,
    pub samples: usize,
    pub mean: f64,
    pub variance: f64,
    pub rows: Vec<MomentRow>,
}

impl MomentReport {
    /// Normalized centred moments of orders `2..=max_order`, with the
    /// standard error of each sample mean.
    pub fn from_samples(xs: &[i64], distance: u32, max_order: u32) -> Result<MomentReport> {
        let n = xs.len();
        if n < 2 {
            return Err(Error::InsufficientSamples { se: f64::INFINITY, tol: 0.0 });
        }
        let mean = xs.iter().sum::<i64>() as f64 / n as f64;
        let variance = xs.iter().map(|&x| (x as f64 - mean).powi(2)).sum::<f64>() / n as f64;
        if variance <= 0.0 {
            return Err(Error::InsufficientSamples { se: f64::INFINITY, tol: 0.0 });
        }
        let s = variance.sqrt();
        let z: Vec<f64> = xs.iter().map(|&x| (x as f64 - mean) / s).collect();
        let rows = (2..=max_order.max(2))
            .map(|p| {
                let v: Vec<f64> = z.iter().map(|z| z.powi(p as i32)).collect();
                let m = v.iter().sum::<f64>() / n as f64;
                let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64;
                MomentRow {
                    order: p,
                    moment: m,
                    se: (var / n as f64).sqrt(),
                    gaussian_ref: gaussian_moment(p),
                }
            })
            .collect();
        Ok(MomentReport {
            distance,
            samples: n,
            mean,
            variance,
            rows,
        })
    }

    pub fn row(&self, order: u32) -> Option<&MomentRow> {
        self.rows.iter().find(|r| r.order == order)
    }

    /// Whether the moment of `order` is within `k` standard errors of the
    /// Gaussian value.
    pub fn within(&self, order: u32, k: f64) -> bool {
        self.row(order)
            .is_some_and(|r| (r.moment - r.gaussian_ref).abs() <= k * r.se)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("order,moment,se,gaussian_ref\n");
        for r in &self.rows {
            writeln!(out, "{},{},{},{}", r.order, r.moment, r.se, r.gaussian_ref).unwrap();
        }
        out
    }
}

/// The transverse edges `e^0_0 .. e^0_{d-1}` of thread 0 as torus edges.
pub fn thread_edges(lattice: LatticeKind, d: u32) -> Vec<TorusEdge> {
    let spec = build_lattice(lattice);
    (0..d as i64)
        .map(|pos| {
            let id = spec.edge_id(Slot::Transverse { thread: 0, pos });
            TorusEdge {
                fd_edge: id.idx,
                translation: (id.tx, id.ty),
            }
        })
        .collect()
}

/// Kernel of the occupied edges among `d` consecutive transverse edges.
pub fn thread_kernel(tk: &TorusKasteleyn, d: u32, grid_n: usize) -> Result<DMatrix<Complex64>> {
    Ok(edge_kernel(tk, &thread_edges(tk.kind, d), grid_n)?.0)
}

/// Eigenvalues of a counting kernel, which must be real and in `[0, 1]`
/// up to quadrature error.
pub fn count_spectrum(kernel: &DMatrix<Complex64>) -> Result<Vec<f64>> {
    let re = kernel.map(|c| c.re);
    let eig = re.complex_eigenvalues();
    let tol = 1e-6;
    if kernel.iter().any(|c| c.im.abs() > tol) || eig.iter().any(|e| e.im.abs() > tol) {
        return Err(Error::DegenerateZero);
    }
    if eig.iter().any(|e| e.re < -tol || e.re > 1.0 + tol) {
        return Err(Error::DegenerateZero);
    }
    Ok(eig.iter().map(|e| e.re.clamp(0.0, 1.0)).collect())
}

/// Variance of the count as `tr L - tr L²`, without eigenvalues.
pub fn count_variance(kernel: &DMatrix<Complex64>) -> f64 {
    (kernel.trace() - (kernel * kernel).trace()).re
}

/// Inputs of `fluctuation_moments`.
#[derive(Clone, Debug, PartialEq)]
pub struct FluctuationConfig {
    pub lattice: LatticeKind,
    pub weights: (f64, f64),
    pub distance: u32,
    pub samples: usize,
    pub source: FluctuationSource,
    pub seed: u64,
    pub max_order: u32,
    /// Largest acceptable standard error over the reported orders.
    pub tol: Option<f64>,
    pub grid_n: usize,
    /// Region size for the dynamics source.
    pub window: u32,
}

impl FluctuationConfig {
    pub fn new(lattice: LatticeKind, distance: u32, samples: usize) -> Self {
        FluctuationConfig {
            lattice,
            weights: (1.0, 1.0),
            distance,
            samples,
            source: FluctuationSource::Exact,
            seed: 0,
            max_order: 6,
            tol: None,
            grid_n: 128,
            window: 4 * distance,
        }
    }
}

/// Samples of `h(f^0_d) - h(f^0_0)`.
pub fn height_difference_samples(cfg: &FluctuationConfig) -> Result<Vec<i64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    match cfg.source {
        FluctuationSource::Exact => {
            let tk = build_torus_kasteleyn(cfg.lattice, cfg.weights)?;
            let lambdas = count_spectrum(&thread_kernel(&tk, cfg.distance, cfg.grid_n)?)?;
            Ok((0..cfg.samples)
                .map(|_| -(lambdas.iter().filter(|&&l| rng.gen::<f64>() < l).count() as i64))
                .collect())
        }
        FluctuationSource::Mcmc => mcmc_samples(cfg, &mut rng),
    }
}

fn mcmc_samples(cfg: &FluctuationConfig, rng: &mut ChaCha8Rng) -> Result<Vec<i64>> {
    if cfg.weights != (1.0, 1.0) {
        return Err(Error::Parse("the dynamics source supports uniform weights only".into()));
    }
    let d = carve_free(&build_lattice(cfg.lattice), &Region::Square, cfg.window)?;
    let w = d.window();
    let half = cfg.distance as i64 / 2;
    let centre = w.face_index(0, 0).ok_or(Error::EmptyDomain)?;
    let (_, c) = (w.faces[centre].thread, w.faces[centre].pos);
    let f = w.face_index(0, c - half).filter(|&f| d.is_interior_face(f));
    let g = w.face_index(0, c - half + cfg.distance as i64).filter(|&g| d.is_interior_face(g));
    let (Some(f), Some(g)) = (f, g) else {
        return Err(Error::WindowTooSmall);
    };
    let mut state = ChainState::new(d.boundary().clone(), &d, rng.gen())?;
    let sweep = (cfg.window as f64).powi(2);
    state = run(state, DynamicsKind::SyncFast, sweep, &d, None)?;
    let mut out = Vec::with_capacity(cfg.samples);
    for _ in 0..cfg.samples {
        let t = state.time + cfg.window as f64;
        state = run(state, DynamicsKind::SyncFast, t, &d, None)?;
        out.push(state.surface.heights[g] - state.surface.heights[f]);
    }
    Ok(out)
}

pub fn fluctuation_moments(cfg: &FluctuationConfig) -> Result<MomentReport> {
    let xs = height_difference_samples(cfg)?;
    let report = MomentReport::from_samples(&xs, cfg.distance, cfg.max_order)?;
    if let Some(tol) = cfg.tol {
        if let Some(r) = report.rows.iter().find(|r| r.se > tol) {
            return Err(Error::InsufficientSamples { se: r.se, tol });
        }
    }
    Ok(report)
}

/// Exact variance of the height difference at each distance, and the
/// least-squares line of variance against `ln d`.
pub fn variance_profile(lattice: LatticeKind, weights: (f64, f64), distances: &[u32], grid_n: usize) -> Result<(Vec<(u32, f64)>, Fit)> {
    let tk = build_torus_kasteleyn(lattice, weights)?;
    let dmax = distances.iter().copied().max().unwrap_or(0);
    let full = thread_kernel(&tk, dmax, grid_n)?;
    let profile: Vec<(u32, f64)> = distances
        .iter()
        .map(|&d| {
            let n = d as usize;
            (d, count_variance(&full.view((0, 0), (n, n)).into_owned()))
        })
        .collect();
    let fit = Fit::linear(&profile.iter().map(|&(d, v)| ((d as f64).ln(), v)).collect::<Vec<_>>());
    Ok((profile, fit))
}
