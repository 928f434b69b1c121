//! Attractor estimates from trajectory tails.

mod cluster;
mod li_yorke;
mod lyapunov;
mod sweep;

pub use cluster::{
    calibrated_epsilon, component_labels, count_components, hair_count, hausdorff, median, median_nearest_neighbour,
    nearest_neighbour_distances, ComponentReport, EPSILON_FACTOR, EPSILON_LADDER, MIN_EPSILON,
};
pub use li_yorke::{li_yorke_scan, li_yorke_scan_pairs, LiYorkeOptions, LiYorkeReport, PairEstimate};
pub use lyapunov::{top_lyapunov, top_lyapunov_of, TangentMap};
pub use sweep::{sweep, SweepBudget, SweepFamily, SweepRow};

use serde::Serialize;

use crate::dynamics::{Arithmetic, Orbit};
use crate::error::{QsoError, Result};
use crate::operators::OperatorSpec;
use crate::simplex::SimplexPoint;

/// Default number of discarded steps.
pub const DEFAULT_BURN_IN: usize = 100_000;
/// Default number of kept samples.
pub const DEFAULT_SAMPLES: usize = 100_000;
/// Default lag (in steps) between the two points whose angle around C is
/// accumulated for the orientation.
pub const DEFAULT_ORIENTATION_LAG: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Orientation {
    Clockwise,
    Anticlockwise,
    Undetermined,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SampleOptions {
    pub arithmetic: Arithmetic,
    pub orientation_lag: usize,
}

impl Default for SampleOptions {
    fn default() -> Self {
        SampleOptions { arithmetic: Arithmetic::Linear, orientation_lag: DEFAULT_ORIENTATION_LAG }
    }
}

/// Trajectory points `x⁽ᵏ⁾` with `burn_in < k ≤ burn_in + n_samples`.
#[derive(Debug, Clone, Serialize)]
pub struct AttractorCloud {
    pub operator: OperatorSpec,
    pub start: SimplexPoint,
    pub burn_in: usize,
    #[serde(skip)]
    pub samples: Vec<SimplexPoint>,
    pub min_coordinate_seen: f64,
    /// Sum of signed angles `∠(x⁽ᵏ⁾ - C, x⁽ᵏ⁺ˡᵃᵍ⁾ - C)` over the samples,
    /// anticlockwise positive in the planar chart.
    pub angle_sum: f64,
    pub orientation_lag: usize,
    pub orientation: Orientation,
}

impl AttractorCloud {
    pub fn diameter(&self) -> f64 {
        crate::simplex::diameter(&self.samples)
    }
}

pub fn sample_attractor(
    spec: &OperatorSpec,
    x0: &SimplexPoint,
    burn_in: usize,
    n_samples: usize,
) -> Result<AttractorCloud> {
    sample_attractor_with(spec, x0, burn_in, n_samples, SampleOptions::default())
}

pub fn sample_attractor_with(
    spec: &OperatorSpec,
    x0: &SimplexPoint,
    burn_in: usize,
    n_samples: usize,
    opts: SampleOptions,
) -> Result<AttractorCloud> {
    if n_samples == 0 {
        return Err(QsoError::SamplesEmpty { burn_in, total: burn_in });
    }
    let mut orbit = Orbit::new(spec, x0, opts.arithmetic)?;
    orbit.advance_by(burn_in + 1);
    let samples: Vec<SimplexPoint> = orbit.take(n_samples).collect();
    let min_coordinate_seen = samples.iter().map(SimplexPoint::min_coordinate).fold(f64::INFINITY, f64::min);
    let angle_sum = if spec.dim() == 3 { angle_sum(&samples, opts.orientation_lag) } else { 0.0 };
    let orientation = if angle_sum.abs() < n_samples as f64 * 1e-6 {
        Orientation::Undetermined
    } else if angle_sum > 0.0 {
        Orientation::Anticlockwise
    } else {
        Orientation::Clockwise
    };
    Ok(AttractorCloud {
        operator: spec.clone(),
        start: *x0,
        burn_in,
        samples,
        min_coordinate_seen,
        angle_sum,
        orientation_lag: opts.orientation_lag,
        orientation,
    })
}

/// Polar angle around C in the planar chart; `None` at C itself.
fn angle_about_center(x: &SimplexPoint) -> Option<f64> {
    let (u, v) = x.planar();
    let (du, dv) = (u - 0.5, v - 0.288_675_134_594_812_9);
    (du != 0.0 || dv != 0.0).then(|| dv.atan2(du))
}

fn angle_sum(samples: &[SimplexPoint], lag: usize) -> f64 {
    use std::f64::consts::{PI, TAU};
    if lag == 0 || samples.len() <= lag {
        return 0.0;
    }
    let theta: Vec<Option<f64>> = samples.iter().map(angle_about_center).collect();
    let mut sum = 0.0;
    for k in 0..samples.len() - lag {
        if let (Some(a), Some(b)) = (theta[k], theta[k + lag]) {
            sum += (b - a + PI).rem_euclid(TAU) - PI;
        }
    }
    sum
}
