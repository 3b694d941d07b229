//! Experiments on top of the dynamics and the exact oracles: volume and its
//! exact drift, coalescence and mixing estimates, exact total-variation
//! curves, pyramid erosion, height fluctuations and the `F_k` sums.

mod drift;
mod fk;
mod fluctuations;
mod mixing;
mod tv;

pub use drift::{
    direct_drift, discrepancy_report, exact_update_drift, face_depths, pyramid_drift_report, rotation_chain,
    rotation_drift, surface_drift,
    DriftCase, DriftReport,
};

pub use fk::{f1_closed_form, fk_csv, fk_sums, FkRow, FK_MAX_K, FK_MAX_L};
pub use fluctuations::{
    count_spectrum, count_variance, fluctuation_moments, gaussian_moment, height_difference_samples, thread_edges,
    thread_kernel, variance_profile, FluctuationConfig, FluctuationSource, MomentReport, MomentRow,
};
pub use mixing::{
    apex_drop, coalescence_time, erosion_scaling, mixing_scaling, pyramid_erosion, scaling_domain, volume_trace,
    Coalescence, ErosionTrace, ScalingReport, ScalingRow, VolumeTrace,
};
pub use tv::{tv_curve_exact, tv_threshold, ExactChain, TvCurve, TRUNCATION, TV_STATE_CAP};

use crate::error::{Error, Result};
use crate::matching::HeightField;

/// `Σ_f (h2(f) - h1(f))`, flagged when the two fields are not ordered.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Volume {
    pub value: i64,
    pub ordered: bool,
}

pub fn volume(h1: &HeightField, h2: &HeightField) -> Result<Volume> {
    if h1.values.len() != h2.values.len() || h1.reference != h2.reference || h1.reference_face != h2.reference_face {
        return Err(Error::DomainMismatch);
    }
    Ok(Volume {
        value: h1.values.iter().zip(&h2.values).map(|(a, b)| b - a).sum(),
        ordered: h1.le(h2),
    })
}

/// Least-squares line through a set of points.
#[derive(Clone, Debug, PartialEq)]
pub struct Fit {
    pub slope: f64,
    pub intercept: f64,
    /// The points as given, before any transform.
    pub points: Vec<(f64, f64)>,
}

impl Fit {
    pub fn linear(points: &[(f64, f64)]) -> Fit {
        let n = points.len() as f64;
        let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
        let my = points.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let slope = sxy / sxx;
        Fit {
            slope,
            intercept: my - slope * mx,
            points: points.to_vec(),
        }
    }

    /// Line through `(ln x, ln y)`.
    pub fn loglog(points: &[(f64, f64)]) -> Fit {
        let logs: Vec<(f64, f64)> = points.iter().map(|p| (p.0.ln(), p.1.ln())).collect();
        Fit {
            points: points.to_vec(),
            ..Fit::linear(&logs)
        }
    }
}

/// Maps `f` over `items` on up to `jobs` threads; results keep the input
/// order, so the output does not depend on `jobs`.
pub fn par_map<T: Send, R: Send>(jobs: usize, items: Vec<T>, f: impl Fn(T) -> R + Sync) -> Vec<R> {
    let jobs = jobs.max(1);
    if jobs == 1 || items.len() <= 1 {
        return items.into_iter().map(f).collect();
    }
    let n = items.len();
    let mut slots: Vec<Option<R>> = (0..n).map(|_| None).collect();
    let mut buckets: Vec<Vec<(usize, T)>> = (0..jobs).map(|_| Vec::new()).collect();
    for (i, x) in items.into_iter().enumerate() {
        buckets[i % jobs].push((i, x));
    }
    let f = &f;
    std::thread::scope(|s| {
        let handles: Vec<_> = buckets
            .into_iter()
            .map(|b| s.spawn(move || b.into_iter().map(|(i, x)| (i, f(x))).collect::<Vec<_>>()))
            .collect();
        for h in handles {
            for (i, r) in h.join().expect("worker panicked") {
                slots[i] = Some(r);
            }
        }
    });
    slots.into_iter().map(|r| r.expect("every item mapped")).collect()
}
