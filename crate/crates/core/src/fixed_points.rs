//! Fixed points on S² and their local stability.
//!
//! Roots of `V(x) = x` are found by Newton's method in the chart
//! `(x1, x2) ↦ (x1, x2, 1 - x1 - x2)`. A quadratic stochastic operator is
//! homogeneous of degree two and preserves the coordinate sum, so the all-ones
//! row vector is a left eigenvector of every Jacobian with eigenvalue 2. That
//! direction is transverse to the simplex and is excluded from the
//! classification.

use nalgebra::{Complex, Matrix3};
use serde::Serialize;

use crate::error::{QsoError, Result};
use crate::operators::OperatorSpec;
use crate::simplex::{dist, SimplexPoint};

/// Maximum residual `d(V(x), x)` of a reported fixed point.
pub const TOL_FIXED_POINT: f64 = 1e-10;
/// Eigenvalue moduli within this distance of 1 count as non-hyperbolic.
pub const TOL_SPECTRAL: f64 = 1e-9;
/// Roots closer than this are the same fixed point.
pub const DEDUP_RADIUS: f64 = 1e-8;
/// `classify` refuses points whose residual exceeds this.
pub const CLASSIFY_RESIDUAL: f64 = 1e-8;

const SINGULAR_DET: f64 = 1e-14;
const OUTSIDE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Stability {
    Attracting,
    Repelling,
    NonHyperbolic,
    Saddle,
}

impl Stability {
    /// Stability class of a fixed point from its in-simplex eigenvalue moduli.
    pub fn from_moduli(moduli: &[f64], tol: f64) -> Stability {
        if moduli.iter().any(|&r| (r - 1.0).abs() <= tol) {
            Stability::NonHyperbolic
        } else if moduli.iter().all(|&r| r < 1.0 - tol) {
            Stability::Attracting
        } else if moduli.iter().all(|&r| r > 1.0 + tol) {
            Stability::Repelling
        } else {
            Stability::Saddle
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Eigenvalue {
    pub re: f64,
    pub im: f64,
}

impl Eigenvalue {
    pub fn modulus(&self) -> f64 {
        self.re.hypot(self.im)
    }
}

impl From<Complex<f64>> for Eigenvalue {
    fn from(c: Complex<f64>) -> Self {
        Eigenvalue { re: c.re, im: c.im }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedPointReport {
    pub location: SimplexPoint,
    pub residual: f64,
    pub nondegeneracy: f64,
    pub spectrum: Vec<Eigenvalue>,
    pub in_simplex_moduli: [f64; 2],
    pub stability: Stability,
}

impl FixedPointReport {
    /// The eigenvalue transverse to the simplex.
    pub fn off_simplex(&self) -> Eigenvalue {
        self.spectrum[0]
    }
}

/// Why a Newton seed did not produce a fixed point.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SeedFailure {
    NoConvergence {
        seed: usize,
        residual: f64,
    },
    SingularNewton {
        seed: usize,
    },
    /// Converged to a root of `V(x) = x` outside the simplex.
    OutsideSimplex {
        seed: usize,
        root: [f64; 3],
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedPointSearch {
    pub fixed_points: Vec<FixedPointReport>,
    pub failures: Vec<SeedFailure>,
}

fn require_plane(spec: &OperatorSpec) -> Result<()> {
    if spec.dim() != 3 {
        return Err(QsoError::Dimension(format!(
            "fixed-point analysis needs an operator on 3 coordinates, got {}",
            spec.dim()
        )));
    }
    Ok(())
}

fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Determinant of `[J_1 - e_1; J_2 - e_2; (1, 1, 1)]` at `x`, where `J_k` is
/// row `k` of the Jacobian. Non-zero at a fixed point means the fixed point
/// is isolated and non-degenerate.
pub fn nondegeneracy_det(spec: &OperatorSpec, x: &SimplexPoint) -> Result<f64> {
    require_plane(spec)?;
    spec.check_point(x)?;
    let j = spec.jacobian_array(&x.array());
    let mut m = [j[0], j[1], [1.0; 3]];
    m[0][0] -= 1.0;
    m[1][1] -= 1.0;
    Ok(det3(&m))
}

/// Residual `d(V(x), x)`.
pub fn residual(spec: &OperatorSpec, x: &SimplexPoint) -> Result<f64> {
    spec.check_point(x)?;
    Ok(dist(&spec.step(x), x))
}

/// Full stability report for a fixed point, using [`TOL_SPECTRAL`].
pub fn classify(spec: &OperatorSpec, x: &SimplexPoint) -> Result<FixedPointReport> {
    classify_with(spec, x, TOL_SPECTRAL)
}

pub fn classify_with(spec: &OperatorSpec, x: &SimplexPoint, tol_spec: f64) -> Result<FixedPointReport> {
    require_plane(spec)?;
    let res = residual(spec, x)?;
    if res > CLASSIFY_RESIDUAL {
        return Err(QsoError::NotAFixedPoint(res));
    }
    let j = spec.jacobian_array(&x.array());
    let (spectrum, moduli) = split_spectrum(&j);
    Ok(FixedPointReport {
        location: *x,
        residual: res,
        nondegeneracy: nondegeneracy_det(spec, x)?,
        spectrum,
        in_simplex_moduli: moduli,
        stability: Stability::from_moduli(&moduli, tol_spec),
    })
}

/// Eigenvalues of `j` with the off-simplex one first, plus the moduli of the
/// other two.
///
/// The off-simplex eigenvalue is the `λ` minimizing `‖1ᵀ(J - λI)‖`, i.e. the
/// one whose left eigenvector is best aligned with `(1, 1, 1)`.
fn split_spectrum(j: &[[f64; 3]; 3]) -> (Vec<Eigenvalue>, [f64; 2]) {
    let mat = Matrix3::from_fn(|r, c| j[r][c]);
    let eig = mat.complex_eigenvalues();
    let colsum: [f64; 3] = std::array::from_fn(|c| j[0][c] + j[1][c] + j[2][c]);
    let misalignment =
        |l: &Complex<f64>| -> f64 { colsum.iter().map(|&s| (Complex::new(s, 0.0) - l).norm_sqr()).sum::<f64>() };
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&a, &b| misalignment(&eig[a]).total_cmp(&misalignment(&eig[b])));
    let spectrum: Vec<Eigenvalue> = idx.iter().map(|&i| Eigenvalue::from(eig[i])).collect();
    let moduli = [spectrum[1].modulus(), spectrum[2].modulus()];
    (spectrum, moduli)
}

/// Largest in-simplex eigenvalue modulus of the Jacobian at `x`.
pub fn in_simplex_radius(spec: &OperatorSpec, x: &SimplexPoint) -> Result<f64> {
    require_plane(spec)?;
    spec.check_point(x)?;
    let (_, m) = split_spectrum(&spec.jacobian_array(&x.array()));
    Ok(m[0].max(m[1]))
}

/// Newton settings for [`find_fixed_points`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    pub max_iter: usize,
    /// Stop once `max |V(x) - x|` in the chart is at most this.
    pub tol: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions { max_iter: 100, tol: 1e-13 }
    }
}

/// Triangular lattice with `side` points per edge, plus the vertices and C.
pub fn lattice_seeds(side: usize) -> Vec<SimplexPoint> {
    let n = side.max(2) - 1;
    let mut seeds = Vec::new();
    for i in 0..=n {
        for j in 0..=n - i {
            let a = i as f64 / n as f64;
            let b = j as f64 / n as f64;
            seeds.push(SimplexPoint::normalized([a, b, 1.0 - a - b], 3));
        }
    }
    for i in 0..3 {
        seeds.push(SimplexPoint::vertex(3, i));
    }
    seeds.push(SimplexPoint::center(3));
    seeds
}

/// The default seed set: a 15-point-per-side lattice, the vertices and C.
pub fn default_seeds() -> Vec<SimplexPoint> {
    lattice_seeds(15)
}

enum NewtonOutcome {
    Root([f64; 2]),
    NoConvergence(f64),
    Singular,
}

fn chart_residual(spec: &OperatorSpec, y: [f64; 2]) -> ([f64; 2], [f64; 3]) {
    let x = [y[0], y[1], 1.0 - y[0] - y[1]];
    let v = spec.eval_raw(&x);
    ([v[0] - x[0], v[1] - x[1]], x)
}

fn newton(spec: &OperatorSpec, seed: &SimplexPoint, opts: NewtonOptions) -> NewtonOutcome {
    let s = seed.array();
    let mut y = [s[0], s[1]];
    let (mut f, mut x) = chart_residual(spec, y);
    for _ in 0..opts.max_iter {
        if f[0].abs().max(f[1].abs()) <= opts.tol {
            return NewtonOutcome::Root(y);
        }
        let j = spec.jacobian_array(&x);
        // derivative of (V_i - x_i) along the chart directions e_j - e_3
        let a = j[0][0] - j[0][2] - 1.0;
        let b = j[0][1] - j[0][2];
        let c = j[1][0] - j[1][2];
        let d = j[1][1] - j[1][2] - 1.0;
        let det = a * d - b * c;
        if det.abs() < SINGULAR_DET {
            return NewtonOutcome::Singular;
        }
        y[0] -= (d * f[0] - b * f[1]) / det;
        y[1] -= (a * f[1] - c * f[0]) / det;
        if !(y[0].is_finite() && y[1].is_finite()) {
            return NewtonOutcome::NoConvergence(f64::INFINITY);
        }
        (f, x) = chart_residual(spec, y);
    }
    let r = f[0].abs().max(f[1].abs());
    if r <= opts.tol {
        NewtonOutcome::Root(y)
    } else {
        NewtonOutcome::NoConvergence(r)
    }
}

/// Runs Newton from every seed and returns the distinct fixed points found
/// inside the simplex, sorted lexicographically, with per-seed failures.
pub fn find_fixed_points(spec: &OperatorSpec, seeds: &[SimplexPoint], opts: NewtonOptions) -> Result<FixedPointSearch> {
    require_plane(spec)?;
    if seeds.is_empty() {
        return Err(QsoError::Invalid("at least one seed is required".into()));
    }
    if !(opts.tol >= 1e-14) {
        return Err(QsoError::Invalid(format!("Newton tolerance {} is below 1e-14", opts.tol)));
    }
    if opts.max_iter == 0 {
        return Err(QsoError::Invalid("max_iter must be positive".into()));
    }
    let mut roots: Vec<SimplexPoint> = Vec::new();
    let mut failures = Vec::new();
    for (idx, seed) in seeds.iter().enumerate() {
        spec.check_point(seed)?;
        match newton(spec, seed, opts) {
            NewtonOutcome::Singular => failures.push(SeedFailure::SingularNewton { seed: idx }),
            NewtonOutcome::NoConvergence(r) => failures.push(SeedFailure::NoConvergence { seed: idx, residual: r }),
            NewtonOutcome::Root(y) => {
                let raw = [y[0], y[1], 1.0 - y[0] - y[1]];
                if raw.iter().any(|&c| c < -OUTSIDE_TOL) {
                    failures.push(SeedFailure::OutsideSimplex { seed: idx, root: raw });
                    continue;
                }
                let p = SimplexPoint::normalized(raw.map(|c| c.max(0.0)), 3);
                if !roots.iter().any(|r| dist(r, &p) <= DEDUP_RADIUS) {
                    roots.push(p);
                }
            }
        }
    }
    roots.sort_by(|a, b| {
        let (a, b) = (a.array(), b.array());
        a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1]))
    });
    let fixed_points = roots.iter().map(|p| classify(spec, p)).collect::<Result<Vec<_>>>()?;
    Ok(FixedPointSearch { fixed_points, failures })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ThresholdKind {
    /// The radius passes through 1.
    Crossing,
    /// The radius reaches 1 and turns back.
    Tangency,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralThreshold {
    pub alpha: f64,
    pub kind: ThresholdKind,
    /// In-simplex spectral radius minus one at `alpha`.
    pub excess: f64,
}

/// Parameters at which the in-simplex spectral radius at C equals one.
///
/// `make` builds the operator for a parameter value. The radius is sampled on
/// `grid` (increasing); sign changes of `radius - 1` are refined by bisection
/// and local minima of `|radius - 1|` without a sign change are refined by
/// bisecting on the sign of a central difference of the squared radius. Only
/// tangencies where the radius comes within `1e-12` of one are reported.
pub fn spectral_thresholds<F>(make: F, grid: &[f64], xtol: f64) -> Result<Vec<SpectralThreshold>>
where
    F: Fn(f64) -> Result<OperatorSpec>,
{
    const BAND: f64 = 1e-12;
    const NEAR: f64 = 1e-6;
    let c = SimplexPoint::center(3);
    let excess = |a: f64| -> Result<f64> { Ok(in_simplex_radius(&make(a)?, &c)? - 1.0) };
    let sign = |g: f64| {
        if g > BAND {
            1
        } else if g < -BAND {
            -1
        } else {
            0
        }
    };
    let g: Vec<f64> = grid.iter().map(|&a| excess(a)).collect::<Result<_>>()?;
    let lo = grid.first().copied().unwrap_or(0.0);
    let hi = grid.last().copied().unwrap_or(0.0);

    let bisect_crossing = |mut a: f64, mut b: f64, sa: i32| -> Result<f64> {
        while b - a > xtol {
            let mid = 0.5 * (a + b);
            let s = sign(excess(mid)?);
            if s == 0 {
                return Ok(mid);
            }
            if s == sa {
                a = mid;
            } else {
                b = mid;
            }
        }
        Ok(0.5 * (a + b))
    };

    let h = 0.01 * (hi - lo).max(f64::EPSILON);
    let slope = |a: f64| -> Result<f64> {
        let up = (excess((a + h).min(hi))? + 1.0).powi(2);
        let down = (excess((a - h).max(lo))? + 1.0).powi(2);
        Ok(up - down)
    };

    let mut out = Vec::new();
    for k in 0..grid.len().saturating_sub(1) {
        let (s0, s1) = (sign(g[k]), sign(g[k + 1]));
        if s0 != 0 && s1 != 0 && s0 != s1 {
            let a = bisect_crossing(grid[k], grid[k + 1], s0)?;
            out.push(SpectralThreshold { alpha: a, kind: ThresholdKind::Crossing, excess: excess(a)? });
        }
    }
    for k in 1..grid.len().saturating_sub(1) {
        let (gl, gk, gr) = (g[k - 1], g[k], g[k + 1]);
        if gk.abs() > NEAR || gk.abs() > gl.abs() || gk.abs() > gr.abs() {
            continue;
        }
        let (sl, sr) = (sign(gl), sign(gr));
        if sl == 0 || sr == 0 {
            continue;
        }
        if sl != sr {
            if sign(gk) == 0 {
                let a = bisect_crossing(grid[k - 1], grid[k + 1], sl)?;
                out.push(SpectralThreshold { alpha: a, kind: ThresholdKind::Crossing, excess: excess(a)? });
            }
            continue;
        }
        // no crossing around k: look for a turning point of the radius
        let (mut a, mut b) = (grid[k - 1], grid[k + 1]);
        let sa = slope(a)?.signum();
        if sa == slope(b)?.signum() {
            continue;
        }
        while b - a > xtol {
            let mid = 0.5 * (a + b);
            if slope(mid)?.signum() == sa {
                a = mid;
            } else {
                b = mid;
            }
        }
        let t = 0.5 * (a + b);
        let e = excess(t)?;
        if e.abs() <= BAND && !out.iter().any(|s: &SpectralThreshold| (s.alpha - t).abs() < xtol * 10.0) {
            out.push(SpectralThreshold { alpha: t, kind: ThresholdKind::Tangency, excess: e });
        }
    }
    out.sort_by(|a, b| a.alpha.total_cmp(&b.alpha));
    Ok(out)
}
