//! Parameter sweeps over the mutation families.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::{calibrated_epsilon, count_components, sample_attractor_with, top_lyapunov, SampleOptions};
use crate::dynamics::{verdict, Arithmetic, VerdictOptions, VerdictStatus};
use crate::error::{QsoError, Result};
use crate::operators::OperatorSpec;
use crate::simplex::SimplexPoint;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepFamily {
    V,
    W,
}

impl SweepFamily {
    pub fn operator(self, alpha: f64) -> Result<OperatorSpec> {
        match self {
            SweepFamily::V => OperatorSpec::v_alpha(alpha),
            SweepFamily::W => OperatorSpec::w_alpha(alpha),
        }
    }
}

/// Work done per parameter value. Every row starts from `start`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepBudget {
    pub start: SimplexPoint,
    pub burn_in: usize,
    pub samples: usize,
    pub lyapunov_steps: usize,
    pub renorm_every: usize,
    pub arithmetic: Arithmetic,
}

impl Default for SweepBudget {
    fn default() -> Self {
        SweepBudget {
            start: SimplexPoint::from_array_unchecked([0.2, 0.3, 0.5], 3),
            burn_in: super::DEFAULT_BURN_IN,
            samples: super::DEFAULT_SAMPLES,
            lyapunov_steps: 10_000,
            renorm_every: 10,
            arithmetic: Arithmetic::Linear,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub components: usize,
    pub lyapunov: f64,
    pub min_coord: f64,
    pub diameter: f64,
    pub verdict: VerdictSummary,
}

/// Verdict name without the payload, e.g. `PERIODIC(3)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerdictSummary {
    Converged,
    Periodic(usize),
    Oscillating,
    Undecided,
}

impl From<&VerdictStatus> for VerdictSummary {
    fn from(s: &VerdictStatus) -> Self {
        match s {
            VerdictStatus::Converged { .. } => VerdictSummary::Converged,
            VerdictStatus::Periodic { period, .. } => VerdictSummary::Periodic(*period),
            VerdictStatus::Oscillating { .. } => VerdictSummary::Oscillating,
            VerdictStatus::Undecided => VerdictSummary::Undecided,
        }
    }
}

impl fmt::Display for VerdictSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VerdictSummary::Converged => f.write_str("CONVERGED"),
            VerdictSummary::Periodic(p) => write!(f, "PERIODIC({p})"),
            VerdictSummary::Oscillating => f.write_str("OSCILLATING"),
            VerdictSummary::Undecided => f.write_str("UNDECIDED"),
        }
    }
}

impl Serialize for VerdictSummary {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// One row per grid value, in grid order.
pub fn sweep(family: SweepFamily, grid: &[f64], budget: &SweepBudget) -> Result<Vec<SweepRow>> {
    if let Some(a) = grid.iter().find(|&&a| !(a > 0.0 && a < 1.0)) {
        return Err(QsoError::ParamRange(format!("sweep values must lie in (0, 1), got {a}")));
    }
    grid.iter().map(|&a| sweep_row(family, a, budget)).collect()
}

fn sweep_row(family: SweepFamily, alpha: f64, budget: &SweepBudget) -> Result<SweepRow> {
    let spec = family.operator(alpha)?;
    let opts = SampleOptions { arithmetic: budget.arithmetic, ..Default::default() };
    let cloud = sample_attractor_with(&spec, &budget.start, budget.burn_in, budget.samples, opts)?;
    let components = count_components(&cloud.samples, calibrated_epsilon(&cloud.samples))?;
    let lyapunov = top_lyapunov(&spec, &budget.start, budget.lyapunov_steps, budget.renorm_every)?;
    let v = verdict(&cloud.samples, VerdictOptions::default())?;
    Ok(SweepRow {
        alpha,
        components: components.component_count,
        lyapunov,
        min_coord: cloud.min_coordinate_seen,
        diameter: components.diameter,
        verdict: VerdictSummary::from(&v.status),
    })
}
