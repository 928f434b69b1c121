//! Quadratic stochastic operators: heredity tensors, the named mutation
//! families and their Jacobians.
//!
//! An operator acts by `x'_k = Σ_{i,j} P[i][j][k] x_i x_j`. Every family is
//! expanded once into a [`HeredityTensor`] and evaluated through the same
//! quadratic form, so all families share identical numerics.
//!
//! The mutation families on S² are
//!
//! ```text
//! V_α: x'_1 = (1-α)x_1² + 2x_1x_2 + αx_2²     W_α: x'_1 = (1-α)x_1² + 2x_1x_2 + αx_3²
//!      x'_2 = (1-α)x_2² + 2x_2x_3 + αx_3²          x'_2 = (1-α)x_2² + 2x_2x_3 + αx_1²
//!      x'_3 = (1-α)x_3² + 2x_3x_1 + αx_1²          x'_3 = (1-α)x_3² + 2x_3x_1 + αx_2²
//! ```
//!
//! and on S¹ the two-allele model
//! `x'_1 = (1-α)x_1² + 2p x_1x_2 + βx_2²`, `x'_2 = αx_1² + 2(1-p)x_1x_2 + (1-β)x_2²`
//! where `p` is the probability that a heterozygous pair passes on the first allele.
//!
//! `W_1` is always the `α = 1` member of the `W_α` family.

use std::fmt;

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::error::{QsoError, Result};
use crate::simplex::{Permutation, SimplexPoint};

const TENSOR_TOL: f64 = 1e-12;

/// Index pairs `(i, j)` with `i <= j` in the order used by [`QuadraticForm`].
const PAIRS: [(usize, usize); 6] = [(0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2)];

/// Symmetric, stochastic heredity coefficients `P[i][j][k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct HeredityTensor {
    m: usize,
    p: [[[f64; 3]; 3]; 3],
}

#[derive(Serialize, Deserialize)]
struct TensorJson {
    m: usize,
    #[serde(rename = "P")]
    p: Vec<Vec<Vec<f64>>>,
}

impl HeredityTensor {
    /// Validates entries, symmetry and stochasticity.
    pub fn new(m: usize, entries: &[Vec<Vec<f64>>]) -> Result<Self> {
        if !(2..=3).contains(&m) {
            return Err(QsoError::Dimension(format!("tensor dimension must be 2 or 3, got {m}")));
        }
        if entries.len() != m || entries.iter().any(|row| row.len() != m || row.iter().any(|c| c.len() != m)) {
            return Err(QsoError::Dimension(format!("tensor entries must have shape {m}x{m}x{m}")));
        }
        let mut p = [[[0.0; 3]; 3]; 3];
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    p[i][j][k] = entries[i][j][k];
                }
            }
        }
        let t = HeredityTensor { m, p };
        t.validate()?;
        Ok(t)
    }

    fn validate(&self) -> Result<()> {
        let m = self.m;
        for i in 0..m {
            for j in 0..m {
                let mut row_sum = 0.0;
                for k in 0..m {
                    let v = self.p[i][j][k];
                    if !v.is_finite() || !(-TENSOR_TOL..=1.0 + TENSOR_TOL).contains(&v) {
                        return Err(QsoError::InvalidTensor(format!("P[{i}][{j}][{k}] = {v} is not a probability")));
                    }
                    if (v - self.p[j][i][k]).abs() > TENSOR_TOL {
                        return Err(QsoError::InvalidTensor(format!("P[{i}][{j}][{k}] != P[{j}][{i}][{k}]")));
                    }
                    row_sum += v;
                }
                if (row_sum - 1.0).abs() > TENSOR_TOL {
                    return Err(QsoError::InvalidTensor(format!(
                        "coefficients of parent pair ({i}, {j}) sum to {row_sum}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.p[i][j][k]
    }

    pub fn entries(&self) -> Vec<Vec<Vec<f64>>> {
        (0..self.m).map(|i| (0..self.m).map(|j| self.p[i][j][..self.m].to_vec()).collect()).collect()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: TensorJson = serde_json::from_str(text)?;
        HeredityTensor::new(raw.m, &raw.p)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&TensorJson { m: self.m, p: self.entries() })?)
    }

    fn zero(m: usize) -> Self {
        HeredityTensor { m, p: [[[0.0; 3]; 3]; 3] }
    }

    /// Sets the coefficient of `x_i x_j` (counted once per ordered pair) in `x'_k`.
    fn set_sym(&mut self, i: usize, j: usize, k: usize, v: f64) {
        self.p[i][j][k] = v;
        self.p[j][i][k] = v;
    }
}

/// Operator family with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family")]
pub enum Family {
    #[serde(rename = "V")]
    VAlpha { alpha: f64 },
    #[serde(rename = "W")]
    WAlpha { alpha: f64 },
    #[serde(rename = "two-allele")]
    TwoAllele { alpha: f64, beta: f64, p_het: f64 },
    #[serde(rename = "generic")]
    Generic,
}

impl Family {
    pub fn dim(&self) -> Option<usize> {
        match self {
            Family::VAlpha { .. } | Family::WAlpha { .. } => Some(3),
            Family::TwoAllele { .. } => Some(2),
            Family::Generic => None,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::VAlpha { alpha } => write!(f, "V({alpha})"),
            Family::WAlpha { alpha } => write!(f, "W({alpha})"),
            Family::TwoAllele { alpha, beta, p_het } => {
                write!(f, "two-allele(alpha={alpha}, beta={beta}, p_het={p_het})")
            }
            Family::Generic => write!(f, "generic"),
        }
    }
}

fn check_probability(name: &str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(QsoError::ParamRange(format!("{name} = {v} is outside [0, 1]")));
    }
    Ok(())
}

/// Heredity tensor of a named family. `Family::Generic` has no expansion.
pub fn expand_family(family: &Family) -> Result<HeredityTensor> {
    match *family {
        Family::VAlpha { alpha } | Family::WAlpha { alpha } => {
            check_probability("alpha", alpha)?;
            // V_α: α·x_{i+1}² feeds x'_i. W_α: α·x_{i-1}² feeds x'_i.
            let shift = if matches!(family, Family::VAlpha { .. }) { 2 } else { 1 };
            let mut t = HeredityTensor::zero(3);
            for i in 0..3 {
                t.p[i][i][i] = 1.0 - alpha;
                t.p[i][i][(i + shift) % 3] = alpha;
                t.set_sym(i, (i + 1) % 3, i, 1.0);
            }
            Ok(t)
        }
        Family::TwoAllele { alpha, beta, p_het } => {
            check_probability("alpha", alpha)?;
            check_probability("beta", beta)?;
            check_probability("p_het", p_het)?;
            let mut t = HeredityTensor::zero(2);
            t.p[0][0][0] = 1.0 - alpha;
            t.p[0][0][1] = alpha;
            t.p[1][1][0] = beta;
            t.p[1][1][1] = 1.0 - beta;
            t.set_sym(0, 1, 0, p_het);
            t.set_sym(0, 1, 1, 1.0 - p_het);
            Ok(t)
        }
        Family::Generic => {
            Err(QsoError::Invalid("a generic operator is defined by its tensor, not by a family".into()))
        }
    }
}

/// `x'_k = Σ_pairs c[k][pair] · x_i x_j` over the six unordered pairs.
#[derive(Debug, Clone, PartialEq)]
struct QuadraticForm {
    coef: [[f64; 6]; 3],
    log_coef: [[f64; 6]; 3],
}

impl QuadraticForm {
    fn from_tensor(t: &HeredityTensor) -> Self {
        let mut coef = [[0.0; 6]; 3];
        for (k, row) in coef.iter_mut().enumerate().take(t.m) {
            for (slot, &(i, j)) in row.iter_mut().zip(PAIRS.iter()) {
                if i < t.m && j < t.m {
                    *slot = if i == j { t.p[i][i][k] } else { t.p[i][j][k] + t.p[j][i][k] };
                }
            }
        }
        let mut log_coef = [[f64::NEG_INFINITY; 6]; 3];
        for k in 0..3 {
            for q in 0..6 {
                if coef[k][q] > 0.0 {
                    log_coef[k][q] = coef[k][q].ln();
                }
            }
        }
        QuadraticForm { coef, log_coef }
    }

    #[inline]
    fn eval(&self, x: &[f64; 3]) -> [f64; 3] {
        let prods = [x[0] * x[0], x[1] * x[1], x[2] * x[2], x[0] * x[1], x[0] * x[2], x[1] * x[2]];
        let mut out = [0.0; 3];
        for (o, c) in out.iter_mut().zip(self.coef.iter()) {
            *o = c[0] * prods[0]
                + c[1] * prods[1]
                + c[2] * prods[2]
                + c[3] * prods[3]
                + c[4] * prods[4]
                + c[5] * prods[5];
        }
        out
    }
}

fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + terms.iter().map(|&t| (t - max).exp()).sum::<f64>().ln()
}

/// A quadratic stochastic operator ready for evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSpec {
    family: Family,
    tensor: HeredityTensor,
    form: QuadraticForm,
}

impl OperatorSpec {
    pub fn new(family: Family) -> Result<Self> {
        let tensor = expand_family(&family)?;
        Ok(Self::with_tensor(family, tensor))
    }

    pub fn generic(tensor: HeredityTensor) -> Self {
        Self::with_tensor(Family::Generic, tensor)
    }

    fn with_tensor(family: Family, tensor: HeredityTensor) -> Self {
        let form = QuadraticForm::from_tensor(&tensor);
        OperatorSpec { family, tensor, form }
    }

    pub fn v_alpha(alpha: f64) -> Result<Self> {
        Self::new(Family::VAlpha { alpha })
    }

    pub fn w_alpha(alpha: f64) -> Result<Self> {
        Self::new(Family::WAlpha { alpha })
    }

    pub fn two_allele(alpha: f64, beta: f64, p_het: f64) -> Result<Self> {
        Self::new(Family::TwoAllele { alpha, beta, p_het })
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn tensor(&self) -> &HeredityTensor {
        &self.tensor
    }

    pub fn dim(&self) -> usize {
        self.tensor.m
    }

    /// Whether this is `V_{1/2}`, the operator with the product Lyapunov function.
    pub fn is_symmetric_mutation(&self) -> bool {
        matches!(self.family, Family::VAlpha { alpha } if alpha == 0.5)
    }

    pub(crate) fn check_point(&self, x: &SimplexPoint) -> Result<()> {
        if x.dim() != self.dim() {
            return Err(QsoError::Dimension(format!(
                "operator acts on {} coordinates, point has {}",
                self.dim(),
                x.dim()
            )));
        }
        Ok(())
    }

    /// The quadratic polynomials before renormalization.
    #[inline]
    pub fn eval_raw(&self, x: &[f64; 3]) -> [f64; 3] {
        self.form.eval(x)
    }

    /// One application followed by renormalization onto the simplex.
    #[inline]
    pub fn step(&self, x: &SimplexPoint) -> SimplexPoint {
        SimplexPoint::normalized(self.form.eval(&x.array()), self.dim())
    }

    /// One application in log coordinates: takes and returns `ln x_i`.
    ///
    /// All terms of the quadratic form are non-negative, so the log-sum-exp
    /// evaluation keeps full relative precision for coordinates far below the
    /// smallest positive double.
    pub fn log_step(&self, lx: &[f64; 3]) -> [f64; 3] {
        let m = self.dim();
        let lprods = [lx[0] + lx[0], lx[1] + lx[1], lx[2] + lx[2], lx[0] + lx[1], lx[0] + lx[2], lx[1] + lx[2]];
        let mut out = [f64::NEG_INFINITY; 3];
        for k in 0..m {
            let mut terms = [f64::NEG_INFINITY; 6];
            for q in 0..6 {
                terms[q] = self.form.log_coef[k][q] + lprods[q];
            }
            out[k] = log_sum_exp(&terms);
        }
        let norm = log_sum_exp(&out[..m]);
        for v in out.iter_mut().take(m) {
            *v -= norm;
        }
        out
    }

    /// `J[k][j] = ∂x'_k/∂x_j = 2 Σ_i P[i][j][k] x_i`.
    pub fn jacobian_array(&self, x: &[f64; 3]) -> [[f64; 3]; 3] {
        let m = self.dim();
        let mut j = [[0.0; 3]; 3];
        for k in 0..m {
            for col in 0..m {
                let mut s = 0.0;
                for i in 0..m {
                    s += self.tensor.p[i][col][k] * x[i];
                }
                j[k][col] = 2.0 * s;
            }
        }
        j
    }
}

impl fmt::Display for OperatorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.family.fmt(f)
    }
}

impl Serialize for OperatorSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.family.serialize(s)
    }
}

/// Applies the operator and renormalizes through [`SimplexPoint`] construction.
pub fn apply(spec: &OperatorSpec, x: &SimplexPoint) -> Result<SimplexPoint> {
    spec.check_point(x)?;
    Ok(spec.step(x))
}

/// Matrix of partial derivatives `∂x'_i/∂x_j` of the unnormalized map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Jacobian {
    m: usize,
    entries: [[f64; 3]; 3],
}

impl Jacobian {
    pub fn from_entries(m: usize, entries: [[f64; 3]; 3]) -> Self {
        Jacobian { m, entries }
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i][j]
    }

    pub fn entries(&self) -> [[f64; 3]; 3] {
        self.entries
    }

    pub fn column_sums(&self) -> Vec<f64> {
        (0..self.m).map(|j| (0..self.m).map(|i| self.entries[i][j]).sum()).collect()
    }

    pub fn to_matrix3(&self) -> Matrix3<f64> {
        Matrix3::from_fn(|i, j| self.entries[i][j])
    }
}

pub fn jacobian(spec: &OperatorSpec, x: &SimplexPoint) -> Result<Jacobian> {
    spec.check_point(x)?;
    Ok(Jacobian { m: spec.dim(), entries: spec.jacobian_array(&x.array()) })
}

/// Entrywise `(1-α)·tensor(a) + α·tensor(b)`.
pub fn convex_combine(a: &OperatorSpec, b: &OperatorSpec, alpha: f64) -> Result<HeredityTensor> {
    check_probability("alpha", alpha)?;
    if a.dim() != b.dim() {
        return Err(QsoError::Dimension(format!(
            "cannot combine operators on {} and {} coordinates",
            a.dim(),
            b.dim()
        )));
    }
    let mut t = HeredityTensor::zero(a.dim());
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                t.p[i][j][k] = (1.0 - alpha) * a.tensor.p[i][j][k] + alpha * b.tensor.p[i][j][k];
            }
        }
    }
    t.validate()?;
    Ok(t)
}

/// Whether `spec` commutes with a coordinate permutation at `x`, returned as
/// the distance between `spec(Px)` and `P spec(x)`.
pub fn commutation_defect(spec: &OperatorSpec, p: &Permutation, x: &SimplexPoint) -> Result<f64> {
    let px = crate::simplex::permute(p, x)?;
    let lhs = apply(spec, &px)?;
    let rhs = crate::simplex::permute(p, &apply(spec, x)?)?;
    crate::simplex::distance(&lhs, &rhs)
}
