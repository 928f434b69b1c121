//! Trajectories, Cesàro means, convergence verdicts, Lyapunov-function
//! monitors and the line/sector cycle tracer.

use serde::Serialize;

use crate::error::{QsoError, Result};
use crate::operators::OperatorSpec;
use crate::simplex::{classify_region, diameter, dist, Region, RegionLabel, SimplexPoint, REGION_TOL};

/// Default convergence tolerance for [`verdict`].
pub const TOL_CONV: f64 = 1e-9;
/// Default largest period tried by [`verdict`].
pub const P_MAX: usize = 12;
/// Highest Cesàro order kept in memory.
pub const MAX_CESARO_ORDER: usize = 5;

/// How orbits are computed.
///
/// `Log` carries `ln x_i` instead of `x_i`. Orbits that linger near a vertex
/// (`V_0` is the standard example) drive coordinates far
/// below the smallest positive double; in linear arithmetic they flush to zero
/// and the orbit gets stuck on the boundary, while the log form keeps their
/// relative precision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arithmetic {
    #[default]
    Linear,
    Log,
}

/// Streaming orbit `x, V(x), V²(x), …` (the start point is yielded first).
#[derive(Debug, Clone)]
pub struct Orbit<'a> {
    spec: &'a OperatorSpec,
    state: State,
}

#[derive(Debug, Clone)]
enum State {
    Linear(SimplexPoint),
    Log([f64; 3]),
}

impl<'a> Orbit<'a> {
    pub fn new(spec: &'a OperatorSpec, x0: &SimplexPoint, arithmetic: Arithmetic) -> Result<Self> {
        spec.check_point(x0)?;
        let state = match arithmetic {
            Arithmetic::Linear => State::Linear(*x0),
            Arithmetic::Log => {
                let mut l = [f64::NEG_INFINITY; 3];
                for (i, &c) in x0.coords().iter().enumerate() {
                    l[i] = c.ln();
                }
                State::Log(l)
            }
        };
        Ok(Orbit { spec, state })
    }

    /// The current point.
    pub fn point(&self) -> SimplexPoint {
        match &self.state {
            State::Linear(x) => *x,
            State::Log(l) => {
                let m = self.spec.dim();
                let mut c = [0.0; 3];
                for i in 0..m {
                    c[i] = l[i].exp();
                }
                SimplexPoint::normalized(c, m)
            }
        }
    }

    /// Natural logs of the current coordinates (`-inf` for exact zeros).
    pub fn log_coords(&self) -> [f64; 3] {
        match &self.state {
            State::Linear(x) => x.array().map(f64::ln),
            State::Log(l) => *l,
        }
    }

    /// Advances one step.
    #[inline]
    pub fn advance(&mut self) {
        match &mut self.state {
            State::Linear(x) => *x = self.spec.step(x),
            State::Log(l) => *l = self.spec.log_step(l),
        }
    }

    pub fn advance_by(&mut self, n: usize) {
        for _ in 0..n {
            self.advance();
        }
    }
}

impl Iterator for Orbit<'_> {
    type Item = SimplexPoint;

    fn next(&mut self) -> Option<SimplexPoint> {
        let p = self.point();
        self.advance();
        Some(p)
    }
}

/// The points `x⁽⁰⁾ … x⁽ⁿ⁾` of an orbit.
#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    operator: OperatorSpec,
    start: SimplexPoint,
    points: Vec<SimplexPoint>,
}

impl Trajectory {
    pub fn operator(&self) -> &OperatorSpec {
        &self.operator
    }

    pub fn start(&self) -> &SimplexPoint {
        &self.start
    }

    pub fn points(&self) -> &[SimplexPoint] {
        &self.points
    }

    pub fn last(&self) -> &SimplexPoint {
        self.points.last().expect("trajectories are never empty")
    }

    /// Number of steps taken (one less than the number of points).
    pub fn steps(&self) -> usize {
        self.points.len() - 1
    }
}

/// `n` steps of `spec` from `x0` in linear arithmetic.
pub fn iterate(spec: &OperatorSpec, x0: &SimplexPoint, n: usize) -> Result<Trajectory> {
    iterate_with(spec, x0, n, Arithmetic::Linear)
}

pub fn iterate_with(spec: &OperatorSpec, x0: &SimplexPoint, n: usize, arithmetic: Arithmetic) -> Result<Trajectory> {
    if n == 0 {
        return Err(QsoError::Invalid("number of steps must be at least 1".into()));
    }
    let points: Vec<_> = Orbit::new(spec, x0, arithmetic)?.take(n + 1).collect();
    Ok(Trajectory { operator: spec.clone(), start: *x0, points })
}

/// Cesàro means of orders `0..=order` of one trajectory.
///
/// Row `n` of order `k ≥ 1` is the mean of rows `0..n` (exclusive) of order
/// `k - 1`. That mean is undefined for `n = 0`; row 0 of every order is set to
/// the start point so that all orders have the same length.
#[derive(Debug, Clone, Serialize)]
pub struct CesaroTable {
    orders: Vec<Vec<SimplexPoint>>,
}

impl CesaroTable {
    /// Builds the higher orders from an order-0 sequence.
    pub fn from_rows(rows: Vec<SimplexPoint>, order: usize) -> Result<Self> {
        if order > MAX_CESARO_ORDER {
            return Err(QsoError::OrderTooLarge(order));
        }
        if rows.is_empty() {
            return Err(QsoError::Invalid("Cesaro table needs at least one row".into()));
        }
        let mut orders = vec![rows];
        for _ in 0..order {
            let next = running_means(orders.last().unwrap());
            orders.push(next);
        }
        Ok(CesaroTable { orders })
    }

    /// Highest order stored.
    pub fn order(&self) -> usize {
        self.orders.len() - 1
    }

    /// Rows of order `k`.
    pub fn rows(&self, k: usize) -> &[SimplexPoint] {
        &self.orders[k]
    }

    pub fn len(&self) -> usize {
        self.orders[0].len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

fn running_means(prev: &[SimplexPoint]) -> Vec<SimplexPoint> {
    let m = prev[0].dim();
    let mut out = Vec::with_capacity(prev.len());
    out.push(prev[0]);
    // Neumaier-compensated running sums
    let mut sum = [0.0f64; 3];
    let mut comp = [0.0f64; 3];
    for n in 1..prev.len() {
        let x = prev[n - 1].array();
        for i in 0..3 {
            let t = sum[i] + x[i];
            if sum[i].abs() >= x[i].abs() {
                comp[i] += (sum[i] - t) + x[i];
            } else {
                comp[i] += (x[i] - t) + sum[i];
            }
            sum[i] = t;
        }
        let inv = 1.0 / n as f64;
        let row = std::array::from_fn(|i| (sum[i] + comp[i]) * inv);
        out.push(SimplexPoint::from_array_unchecked(row, m));
    }
    out
}

/// Cesàro table of orders `0..=k` over `n` steps of `spec` from `x0`.
pub fn cesaro(spec: &OperatorSpec, x0: &SimplexPoint, k: usize, n: usize) -> Result<CesaroTable> {
    cesaro_with(spec, x0, k, n, Arithmetic::Linear)
}

pub fn cesaro_with(
    spec: &OperatorSpec,
    x0: &SimplexPoint,
    k: usize,
    n: usize,
    arithmetic: Arithmetic,
) -> Result<CesaroTable> {
    if k > MAX_CESARO_ORDER {
        return Err(QsoError::OrderTooLarge(k));
    }
    let t = iterate_with(spec, x0, n, arithmetic)?;
    CesaroTable::from_rows(t.points, k)
}

/// Settings for [`verdict`]. `window: None` means the last 10% of rows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerdictOptions {
    pub window: Option<usize>,
    pub tol_conv: f64,
    pub p_max: usize,
}

impl Default for VerdictOptions {
    fn default() -> Self {
        VerdictOptions { window: None, tol_conv: TOL_CONV, p_max: P_MAX }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum VerdictStatus {
    Converged { limit: SimplexPoint },
    Oscillating { diameter: f64 },
    Periodic { period: usize, orbit: Vec<SimplexPoint> },
    Undecided,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceVerdict {
    #[serde(flatten)]
    pub status: VerdictStatus,
    pub window: usize,
    pub tol_conv: f64,
    pub p_max: usize,
}

/// Default window: the last 10% of `len` rows, at least one.
pub fn default_window(len: usize) -> usize {
    (len / 10).max(1).min(len)
}

/// Classifies the tail of a sequence of points.
///
/// The last `window` rows are CONVERGED if their diameter is below
/// `tol_conv`, otherwise PERIODIC with the smallest `p ≤ p_max` such that
/// every row of the window is within `tol_conv` of the row `p` later, and
/// OSCILLATING with the window diameter if no period fits. Windows with fewer
/// than three rows are UNDECIDED.
pub fn verdict(rows: &[SimplexPoint], opts: VerdictOptions) -> Result<ConvergenceVerdict> {
    let window = opts.window.unwrap_or_else(|| default_window(rows.len()));
    if window > rows.len() {
        return Err(QsoError::WindowTooLarge { window, available: rows.len() });
    }
    let done = |status| ConvergenceVerdict { status, window, tol_conv: opts.tol_conv, p_max: opts.p_max };
    if window < 3 {
        return Ok(done(VerdictStatus::Undecided));
    }
    let tail = &rows[rows.len() - window..];
    let diam = diameter(tail);
    if diam < opts.tol_conv {
        return Ok(done(VerdictStatus::Converged { limit: *tail.last().unwrap() }));
    }
    for p in 2..=opts.p_max.min(window - 1) {
        if (0..window - p).all(|i| dist(&tail[i], &tail[i + p]) < opts.tol_conv) {
            let orbit = tail[window - p..].to_vec();
            return Ok(done(VerdictStatus::Periodic { period: p, orbit }));
        }
    }
    Ok(done(VerdictStatus::Oscillating { diameter: diam }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum LyapunovKind {
    /// `|x1 - x2| |x1 - x3| |x2 - x3|`
    PhiProduct,
    /// `x1² + x2² + x3² - 1/3`
    PhiQuadratic,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LyapunovTrace {
    pub which: LyapunovKind,
    pub values: Vec<f64>,
    /// For `V_{1/2}` and the product function: `φ(Vx) - φ(x) Π(1 + 3x_i)/2`
    /// at every point but the last.
    pub multiplier_residuals: Option<Vec<f64>>,
}

impl LyapunovTrace {
    /// Largest increase between consecutive values (negative if strictly decreasing).
    pub fn max_increase(&self) -> f64 {
        self.values.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max)
    }
}

pub fn phi_product(x: &SimplexPoint) -> f64 {
    let [a, b, c] = x.array();
    (a - b).abs() * (a - c).abs() * (b - c).abs()
}

pub fn phi_quadratic(x: &SimplexPoint) -> f64 {
    let [a, b, c] = x.array();
    a * a + b * b + c * c - 1.0 / 3.0
}

/// `Π(1 + 3x_i)/2`, the factor by which `V_{1/2}` scales [`phi_product`].
pub fn product_multiplier(x: &SimplexPoint) -> f64 {
    x.array().iter().map(|&c| 0.5 * (1.0 + 3.0 * c)).product()
}

pub fn lyapunov_trace(spec: &OperatorSpec, t: &Trajectory, which: LyapunovKind) -> Result<LyapunovTrace> {
    if spec.dim() != 3 {
        return Err(QsoError::Dimension("Lyapunov functions are defined on S^2 only".into()));
    }
    let f = match which {
        LyapunovKind::PhiProduct => phi_product,
        LyapunovKind::PhiQuadratic => |x: &SimplexPoint| phi_quadratic(x).max(0.0),
    };
    let values = t.points.iter().map(f).collect();
    let multiplier_residuals = (which == LyapunovKind::PhiProduct && spec.is_symmetric_mutation()).then(|| {
        t.points[..t.points.len() - 1]
            .iter()
            .map(|x| phi_product(&spec.step(x)) - phi_product(x) * product_multiplier(x))
            .collect()
    });
    Ok(LyapunovTrace { which, values, multiplier_residuals })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CycleTrace {
    pub labels: Vec<RegionLabel>,
    /// Indices `k` where the label of point `k + 1` is not the successor of
    /// the label of point `k`.
    pub violations: Vec<usize>,
    /// Transitions skipped because one end lies within the region tolerance
    /// of a line while the other does not.
    pub exempt: Vec<usize>,
}

/// Labels every point and checks the rotation `l1 → l2 → l3 → l1`,
/// `S1 → S2 → … → S6 → S1` that `V_{1/2}` follows.
pub fn cycle_trace(spec: &OperatorSpec, t: &Trajectory) -> Result<CycleTrace> {
    if spec.dim() != 3 {
        return Err(QsoError::Dimension("regions are defined on S^2 only".into()));
    }
    let labels = t.points.iter().map(classify_region).collect::<Result<Vec<_>>>()?;
    let mut violations = Vec::new();
    let mut exempt = Vec::new();
    for k in 0..labels.len().saturating_sub(1) {
        let (a, b) = (labels[k].region, labels[k + 1].region);
        if a.cycle_successor() == b {
            continue;
        }
        let on_line = |r: Region| !matches!(r, Region::Sector(_));
        if on_line(a) != on_line(b) && near_line(&t.points[k]) != near_line(&t.points[k + 1]) {
            exempt.push(k);
        } else {
            violations.push(k);
        }
    }
    Ok(CycleTrace { labels, violations, exempt })
}

fn near_line(x: &SimplexPoint) -> bool {
    let [a, b, c] = x.array();
    (a - b).abs().min((a - c).abs()).min((b - c).abs()) <= REGION_TOL
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;

    fn pt(v: &[f64]) -> SimplexPoint {
        SimplexPoint::new(v).unwrap()
    }

    fn c() -> SimplexPoint {
        SimplexPoint::center(3)
    }

    #[test]
    fn center_is_stationary() {
        for a in [0.0, 0.3, 0.5, 1.0] {
            let t = iterate(&OperatorSpec::v_alpha(a).unwrap(), &c(), 50).unwrap();
            assert_eq!(t.points().len(), 51);
            assert!(t.points().iter().all(|p| dist(p, &c()) < 1e-15));
        }
    }

    #[test]
    fn one_step_of_symmetric_mutation() {
        // x1' = x1²/2 + 2x1x2 + x2²/2 etc. at (3/5, 3/10, 1/10):
        // (9/50 + 9/25 + 9/200, 9/200 + 3/50 + 1/200, 1/200 + 3/25 + 9/50)
        let t = iterate(&OperatorSpec::v_alpha(0.5).unwrap(), &pt(&[0.6, 0.3, 0.1]), 1).unwrap();
        let expect = [117.0 / 200.0, 22.0 / 200.0, 61.0 / 200.0];
        for (a, b) in t.last().coords().iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(expect, [0.585, 0.11, 0.305]);
    }

    #[test]
    fn vertices_of_w1_are_three_periodic() {
        let spec = OperatorSpec::w_alpha(1.0).unwrap();
        for i in 0..3 {
            let e = SimplexPoint::vertex(3, i);
            let t = iterate(&spec, &e, 3).unwrap();
            assert_eq!(t.last(), &e);
            assert_ne!(t.points()[1], e);
        }
    }

    #[test]
    fn iterate_rejects_zero_steps_and_wrong_dimension() {
        let spec = OperatorSpec::v_alpha(0.5).unwrap();
        assert!(iterate(&spec, &c(), 0).is_err());
        assert!(matches!(iterate(&spec, &pt(&[0.5, 0.5]), 3), Err(QsoError::Dimension(_))));
    }

    #[test]
    fn trajectory_reconstructs() {
        let spec = OperatorSpec::w_alpha(0.2).unwrap();
        let t = iterate(&spec, &pt(&[0.2, 0.7, 0.1]), 500).unwrap();
        for w in t.points().windows(2) {
            assert!(dist(&crate::apply(&spec, &w[0]).unwrap(), &w[1]) <= 1e-12);
        }
    }

    #[test]
    fn log_orbit_matches_linear_where_both_are_representable() {
        let spec = OperatorSpec::v_alpha(0.2).unwrap();
        let x0 = pt(&[0.2, 0.5, 0.3]);
        let lin = iterate(&spec, &x0, 200).unwrap();
        let log = iterate_with(&spec, &x0, 200, Arithmetic::Log).unwrap();
        for (a, b) in lin.points().iter().zip(log.points()) {
            assert!(dist(a, b) < 1e-10);
        }
    }

    #[test]
    fn log_orbit_keeps_v_zero_off_the_boundary() {
        let spec = OperatorSpec::v_alpha(0.0).unwrap();
        let x0 = pt(&[0.3, 0.3, 0.4]);
        let mut lin = Orbit::new(&spec, &x0, Arithmetic::Linear).unwrap();
        lin.advance_by(2000);
        assert_eq!(lin.point().min_coordinate(), 0.0);
        let mut log = Orbit::new(&spec, &x0, Arithmetic::Log).unwrap();
        log.advance_by(2000);
        assert!(log.log_coords().iter().all(|l| l.is_finite()));
    }

    #[test]
    fn cesaro_examples() {
        let spec = OperatorSpec::v_alpha(0.7).unwrap();
        let tab = cesaro(&spec, &c(), 5, 100).unwrap();
        for k in 0..=5 {
            assert!(tab.rows(k).iter().all(|p| dist(p, &c()) < 1e-15));
        }
        let x0 = pt(&[0.1, 0.2, 0.7]);
        let tab = cesaro(&spec, &x0, 0, 100).unwrap();
        assert_eq!(tab.rows(0), iterate(&spec, &x0, 100).unwrap().points());
        assert!(matches!(cesaro(&spec, &x0, 6, 10), Err(QsoError::OrderTooLarge(6))));
    }

    #[test]
    fn v_zero_mean_keeps_oscillating() {
        // regression values from the first run
        let spec = OperatorSpec::v_alpha(0.0).unwrap();
        let x0 = pt(&[0.3, 0.3, 0.4]);
        for (n, frozen) in
            [(1_000, 0.011179023620729055), (10_000, 0.020463688525507267), (100_000, 0.00204841724706061)]
        {
            let tab = cesaro_with(&spec, &x0, 1, n, Arithmetic::Log).unwrap();
            match verdict(tab.rows(1), VerdictOptions::default()).unwrap().status {
                VerdictStatus::Oscillating { diameter } => {
                    assert!((diameter - frozen).abs() < 1e-9 * frozen.max(1.0), "n={n}: {diameter}")
                }
                other => panic!("n={n}: {other:?}"),
            }
        }
    }

    #[test]
    fn cesaro_recursion_consistency() {
        let spec = OperatorSpec::v_alpha(0.1).unwrap();
        let tab = cesaro(&spec, &pt(&[0.5, 0.3, 0.2]), 3, 10_000).unwrap();
        for k in 1..=3 {
            let prev = tab.rows(k - 1);
            let mut sum = [0.0; 3];
            for n in 1..=10_000 {
                let x = prev[n - 1].array();
                for i in 0..3 {
                    sum[i] += x[i];
                }
                let row = tab.rows(k)[n].array();
                for i in 0..3 {
                    assert!((row[i] - sum[i] / n as f64).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn first_order_mean_is_plain_average() {
        let spec = OperatorSpec::v_alpha(0.3).unwrap();
        let x0 = pt(&[0.5, 0.25, 0.25]);
        let tab = cesaro(&spec, &x0, 1, 20).unwrap();
        let t = iterate(&spec, &x0, 20).unwrap();
        let mean: Vec<f64> =
            (0..3).map(|i| t.points()[..20].iter().map(|p| p.array()[i]).sum::<f64>() / 20.0).collect();
        for i in 0..3 {
            assert!((tab.rows(1)[20].array()[i] - mean[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn verdict_trivial_cases() {
        let a = pt(&[0.2, 0.3, 0.5]);
        let b = pt(&[0.5, 0.3, 0.2]);
        let v = verdict(&vec![a; 50], VerdictOptions::default()).unwrap();
        assert!(matches!(v.status, VerdictStatus::Converged { .. }));
        let alt: Vec<_> = (0..50).map(|i| if i % 2 == 0 { a } else { b }).collect();
        let v = verdict(&alt, VerdictOptions { window: Some(20), ..Default::default() }).unwrap();
        assert!(matches!(v.status, VerdictStatus::Periodic { period: 2, .. }));
        let three: Vec<_> = (0..60).map(|i| [a, b, c()][i % 3]).collect();
        let v = verdict(&three, VerdictOptions { window: Some(30), ..Default::default() }).unwrap();
        assert!(matches!(v.status, VerdictStatus::Periodic { period: 3, .. }));
        let v = verdict(&alt, VerdictOptions { window: Some(2), ..Default::default() }).unwrap();
        assert_eq!(v.status, VerdictStatus::Undecided);
        let err = verdict(&alt, VerdictOptions { window: Some(51), ..Default::default() }).unwrap_err();
        assert!(matches!(err, QsoError::WindowTooLarge { window: 51, available: 50 }));
    }

    #[test]
    fn verdict_reports_oscillation_diameter() {
        let mut rng = SeededRng::new(5);
        let rows: Vec<_> = (0..100).map(|_| rng.simplex_point(3)).collect();
        let v = verdict(&rows, VerdictOptions::default()).unwrap();
        match v.status {
            VerdictStatus::Oscillating { diameter: d } => {
                assert!((d - diameter(&rows[90..])).abs() < 1e-15)
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(v.window, 10);
    }

    #[test]
    fn two_allele_is_regular_or_two_periodic() {
        let spec = OperatorSpec::two_allele(0.1, 0.2, 0.5).unwrap();
        let mut rng = SeededRng::new(21);
        for _ in 0..1000 {
            let t = iterate(&spec, &rng.simplex_point(2), 1000).unwrap();
            let v = verdict(t.points(), VerdictOptions::default()).unwrap();
            assert!(
                matches!(v.status, VerdictStatus::Converged { .. } | VerdictStatus::Periodic { period: 2, .. }),
                "{:?}",
                v.status
            );
        }
    }

    #[test]
    fn lyapunov_examples() {
        let x = pt(&[0.6, 0.3, 0.1]);
        assert!((phi_product(&x) - 0.03).abs() < 1e-15);
        assert!((product_multiplier(&x) - 0.8645).abs() < 1e-15);
        let spec = OperatorSpec::v_alpha(0.5).unwrap();
        let t = iterate(&spec, &x, 1).unwrap();
        assert!((phi_product(t.last()) - 0.025935).abs() < 1e-15);
        let tr = lyapunov_trace(&spec, &t, LyapunovKind::PhiProduct).unwrap();
        assert!(tr.multiplier_residuals.unwrap()[0].abs() < 1e-15);
        assert_eq!(phi_product(&pt(&[0.5, 0.25, 0.25])), 0.0);
        assert!(phi_quadratic(&c()).abs() < 1e-16);
        let two = OperatorSpec::two_allele(0.1, 0.2, 0.5).unwrap();
        let t2 = iterate(&two, &pt(&[0.4, 0.6]), 2).unwrap();
        assert!(matches!(lyapunov_trace(&two, &t2, LyapunovKind::PhiQuadratic), Err(QsoError::Dimension(_))));
    }

    #[test]
    fn product_function_decreases_under_symmetric_mutation() {
        let spec = OperatorSpec::v_alpha(0.5).unwrap();
        let mut rng = SeededRng::new(8);
        for _ in 0..1000 {
            let t = iterate(&spec, &rng.simplex_point(3), 200).unwrap();
            let tr = lyapunov_trace(&spec, &t, LyapunovKind::PhiProduct).unwrap();
            assert!(tr.values.iter().all(|&v| v >= 0.0));
            assert!(tr.max_increase() <= 1e-12);
            assert!(tr.multiplier_residuals.unwrap().iter().all(|r| r.abs() <= 1e-12));
        }
    }

    #[test]
    fn quadratic_function_decreases_under_w1() {
        let spec = OperatorSpec::w_alpha(1.0).unwrap();
        let mut rng = SeededRng::new(9);
        for _ in 0..1000 {
            let t = iterate(&spec, &rng.interior_point(3, 1e-6), 200).unwrap();
            let tr = lyapunov_trace(&spec, &t, LyapunovKind::PhiQuadratic).unwrap();
            assert!(tr.multiplier_residuals.is_none());
            assert!(tr.max_increase() <= 1e-12);
        }
    }

    #[test]
    fn w1_is_regular_in_the_interior() {
        let spec = OperatorSpec::w_alpha(1.0).unwrap();
        let mut rng = SeededRng::new(10);
        for _ in 0..1000 {
            let t = iterate(&spec, &rng.interior_point(3, 1e-6), 2000).unwrap();
            match verdict(t.points(), VerdictOptions::default()).unwrap().status {
                VerdictStatus::Converged { limit } => assert!(dist(&limit, &c()) < 1e-8),
                other => panic!("{other:?}"),
            }
        }
    }

    #[test]
    fn difference_identities_of_symmetric_mutation() {
        let spec = OperatorSpec::v_alpha(0.5).unwrap();
        let mut rng = SeededRng::new(12);
        for _ in 0..10_000 {
            let x = rng.simplex_point(3).array();
            let y = spec.eval_raw(&x);
            let r1 = (y[0] - y[1]) - (x[0] - x[2]) * (1.0 + 3.0 * x[1]) / 2.0;
            let r2 = (y[0] - y[2]) - (x[1] - x[2]) * (1.0 + 3.0 * x[0]) / 2.0;
            let r3 = (y[1] - y[2]) - (x[1] - x[0]) * (1.0 + 3.0 * x[2]) / 2.0;
            for r in [r1, r2, r3] {
                assert!(r.abs() <= 1e-14, "{r}");
            }
        }
    }

    #[test]
    fn cycle_examples() {
        let spec = OperatorSpec::v_alpha(0.5).unwrap();
        let t = iterate(&spec, &pt(&[0.6, 0.2, 0.2]), 9).unwrap();
        let tr = cycle_trace(&spec, &t).unwrap();
        let expected = [1, 2, 3].repeat(4);
        for (l, e) in tr.labels.iter().zip(expected) {
            assert_eq!(l.region, Region::Line(e));
        }
        assert!(tr.violations.is_empty());

        let t = iterate(&spec, &pt(&[0.6, 0.3, 0.1]), 1).unwrap();
        let tr = cycle_trace(&spec, &t).unwrap();
        assert_eq!(tr.labels[0].region, Region::Sector(1));
        assert_eq!(tr.labels[1].region, Region::Sector(2));

        let t = iterate(&spec, &c(), 5).unwrap();
        let tr = cycle_trace(&spec, &t).unwrap();
        assert!(tr.labels.iter().all(|l| l.region == Region::Center));
        assert!(tr.violations.is_empty());
    }

    #[test]
    fn sector_cycle_law() {
        let spec = OperatorSpec::v_alpha(0.5).unwrap();
        let mut rng = SeededRng::new(13);
        let mut runs = 0;
        while runs < 100 {
            let x = rng.simplex_point(3);
            if near_line(&x) {
                continue;
            }
            runs += 1;
            let t = iterate(&spec, &x, 10_000).unwrap();
            let tr = cycle_trace(&spec, &t).unwrap();
            assert!(tr.violations.is_empty(), "{:?}", &tr.violations[..]);
        }
    }
}
