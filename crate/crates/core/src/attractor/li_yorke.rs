//! Heuristic scan for Li-Yorke scrambled pairs.
//!
//! For each pair of starts the distance between the two orbits is tracked
//! after a burn-in of `horizon / 10` steps. A pair whose minimum distance
//! falls below `delta_low` while its maximum exceeds `delta_high` is a
//! candidate. This is numerical evidence only.

use serde::Serialize;

use crate::dynamics::{Arithmetic, Orbit};
use crate::error::{QsoError, Result};
use crate::operators::OperatorSpec;
use crate::simplex::{dist, SimplexPoint};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LiYorkeOptions {
    pub horizon: usize,
    pub delta_low: f64,
    pub delta_high: f64,
}

impl Default for LiYorkeOptions {
    fn default() -> Self {
        LiYorkeOptions { horizon: 10_000, delta_low: 1e-3, delta_high: 0.1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairEstimate {
    pub first: SimplexPoint,
    pub second: SimplexPoint,
    pub liminf_estimate: f64,
    pub limsup_estimate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LiYorkeReport {
    pub kind: &'static str,
    pub horizon: usize,
    pub burn_in: usize,
    pub delta_low: f64,
    pub delta_high: f64,
    pub pairs_examined: usize,
    pub pairs: Vec<PairEstimate>,
    /// Indices into `pairs`.
    pub scrambled_candidates: Vec<usize>,
}

fn check(opts: &LiYorkeOptions) -> Result<()> {
    if opts.horizon < 1000 {
        return Err(QsoError::Invalid(format!("horizon must be at least 1000, got {}", opts.horizon)));
    }
    if !(opts.delta_low >= 0.0 && opts.delta_low <= opts.delta_high) {
        return Err(QsoError::Invalid("need 0 <= delta_low <= delta_high".into()));
    }
    Ok(())
}

fn report(opts: LiYorkeOptions, pairs: Vec<PairEstimate>) -> LiYorkeReport {
    let scrambled_candidates = pairs
        .iter()
        .enumerate()
        .filter(|(_, p)| p.liminf_estimate < opts.delta_low && p.limsup_estimate > opts.delta_high)
        .map(|(i, _)| i)
        .collect();
    LiYorkeReport {
        kind: "evidence",
        horizon: opts.horizon,
        burn_in: opts.horizon / 10,
        delta_low: opts.delta_low,
        delta_high: opts.delta_high,
        pairs_examined: pairs.len(),
        pairs,
        scrambled_candidates,
    }
}

/// Examines every unordered pair of `seeds`.
pub fn li_yorke_scan(spec: &OperatorSpec, seeds: &[SimplexPoint], opts: LiYorkeOptions) -> Result<LiYorkeReport> {
    check(&opts)?;
    if seeds.len() < 2 {
        return Err(QsoError::Invalid("a Li-Yorke scan needs at least two seeds".into()));
    }
    let mut orbits = seeds.iter().map(|s| Orbit::new(spec, s, Arithmetic::Linear)).collect::<Result<Vec<_>>>()?;
    let s = seeds.len();
    let burn = opts.horizon / 10;
    let mut lo = vec![f64::INFINITY; s * s];
    let mut hi = vec![0.0f64; s * s];
    for o in orbits.iter_mut() {
        o.advance_by(burn);
    }
    let mut pts: Vec<SimplexPoint> = orbits.iter().map(Orbit::point).collect();
    for step in burn..=opts.horizon {
        if step > burn {
            for (o, p) in orbits.iter_mut().zip(pts.iter_mut()) {
                o.advance();
                *p = o.point();
            }
        }
        for i in 0..s {
            for j in i + 1..s {
                let d = dist(&pts[i], &pts[j]);
                let k = i * s + j;
                lo[k] = lo[k].min(d);
                hi[k] = hi[k].max(d);
            }
        }
    }
    let mut pairs = Vec::new();
    for i in 0..s {
        for j in i + 1..s {
            pairs.push(PairEstimate {
                first: seeds[i],
                second: seeds[j],
                liminf_estimate: lo[i * s + j],
                limsup_estimate: hi[i * s + j],
            });
        }
    }
    Ok(report(opts, pairs))
}

/// Examines the given pairs only.
pub fn li_yorke_scan_pairs(
    spec: &OperatorSpec,
    pairs: &[(SimplexPoint, SimplexPoint)],
    opts: LiYorkeOptions,
) -> Result<LiYorkeReport> {
    check(&opts)?;
    if pairs.is_empty() {
        return Err(QsoError::Invalid("no pairs to scan".into()));
    }
    let burn = opts.horizon / 10;
    let mut out = Vec::with_capacity(pairs.len());
    for (a, b) in pairs {
        let mut oa = Orbit::new(spec, a, Arithmetic::Linear)?;
        let mut ob = Orbit::new(spec, b, Arithmetic::Linear)?;
        oa.advance_by(burn);
        ob.advance_by(burn);
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for (x, y) in oa.zip(ob).take(opts.horizon - burn + 1) {
            let d = dist(&x, &y);
            lo = lo.min(d);
            hi = hi.max(d);
        }
        out.push(PairEstimate { first: *a, second: *b, liminf_estimate: lo, limsup_estimate: hi });
    }
    Ok(report(opts, out))
}
