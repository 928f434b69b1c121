//! Top Lyapunov exponent by tangent-vector propagation.

use crate::error::{QsoError, Result};
use crate::operators::OperatorSpec;
use crate::simplex::SimplexPoint;

/// A map of the simplex together with its derivative on tangent vectors
/// (vectors with zero coordinate sum).
pub trait TangentMap {
    fn advance(&self, x: &[f64; 3]) -> [f64; 3];
    /// Derivative at `x` applied to the tangent vector `v`.
    fn push_forward(&self, x: &[f64; 3], v: &[f64; 3]) -> [f64; 3];
}

impl TangentMap for OperatorSpec {
    fn advance(&self, x: &[f64; 3]) -> [f64; 3] {
        self.step(&SimplexPoint::from_array_unchecked(*x, self.dim())).array()
    }

    // On the simplex the renormalizing denominator has zero derivative along
    // tangent vectors (every Jacobian column sums to 2), so the push-forward
    // is the Jacobian product. Rounding leaves a small component off the
    // tangent plane that the transverse eigenvalue 2 would amplify, so it is
    // projected out.
    fn push_forward(&self, x: &[f64; 3], v: &[f64; 3]) -> [f64; 3] {
        let m = self.dim();
        let j = self.jacobian_array(x);
        let mut w: [f64; 3] = std::array::from_fn(|k| j[k][0] * v[0] + j[k][1] * v[1] + j[k][2] * v[2]);
        let mean = w[..m].iter().sum::<f64>() / m as f64;
        for c in w.iter_mut().take(m) {
            *c -= mean;
        }
        w
    }
}

fn norm(v: &[f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// Average logarithmic growth per step of a tangent vector over `n` steps.
///
/// The first `n / 10` steps align the tangent vector with the dominant
/// direction and are not counted. The vector is renormalized every
/// `renorm_every` steps; if its norm overflows in between the result is
/// [`QsoError::NumericOverflow`].
pub fn top_lyapunov_of<M: TangentMap>(
    map: &M,
    x0: [f64; 3],
    v0: [f64; 3],
    n: usize,
    renorm_every: usize,
) -> Result<f64> {
    if n < 1000 {
        return Err(QsoError::Invalid(format!("Lyapunov estimates need at least 1000 steps, got {n}")));
    }
    if renorm_every == 0 {
        return Err(QsoError::Invalid("renorm_every must be positive".into()));
    }
    let warm = n / 10;
    let mut x = x0;
    let nv = norm(&v0);
    if !(nv > 0.0) {
        return Err(QsoError::Invalid("initial tangent vector must be non-zero".into()));
    }
    let mut v = v0.map(|c| c / nv);
    let mut log_growth = 0.0;
    for k in 1..=warm + n {
        v = map.push_forward(&x, &v);
        x = map.advance(&x);
        if k % renorm_every == 0 || k == warm || k == warm + n {
            let s = norm(&v);
            if !s.is_finite() {
                return Err(QsoError::NumericOverflow(format!(
                    "tangent vector overflowed after {k} steps; renormalize more often than every {renorm_every}"
                )));
            }
            if s == 0.0 {
                return Ok(f64::NEG_INFINITY);
            }
            if k > warm {
                log_growth += s.ln();
            }
            v = v.map(|c| c / s);
        }
    }
    Ok(log_growth / n as f64)
}

/// Top Lyapunov exponent of `spec` along the orbit of `x0`.
pub fn top_lyapunov(spec: &OperatorSpec, x0: &SimplexPoint, n: usize, renorm_every: usize) -> Result<f64> {
    spec.check_point(x0)?;
    let v0 = if spec.dim() == 3 { [2.0, -0.5, -1.5] } else { [1.0, -1.0, 0.0] };
    top_lyapunov_of(spec, x0.array(), v0, n, renorm_every)
}
