use nalgebra::SymmetricEigen;
use serde::{Deserialize, Serialize};

use super::check_dim;
use crate::config::Tolerances;
use crate::{Error, Matrix, Result, Vector};

/// `g(x) = a^T x - b`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearInequality {
    a: Vector,
    b: f64,
}

impl LinearInequality {
    /// A zero `a` is allowed; it gives the constant function `-b`.
    pub fn new(a: Vector, b: f64) -> Result<Self> {
        if a.iter().any(|v| !v.is_finite()) || !b.is_finite() {
            return Err(Error::InvalidInequality("linear data must be finite".into()));
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> &Vector {
        &self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }
}

/// `g(x) = x^T Q x + c^T x + d` with `Q` symmetric positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticInequality {
    q: Matrix,
    c: Vector,
    d: f64,
}

impl QuadraticInequality {
    pub fn new(q: Matrix, c: Vector, d: f64) -> Result<Self> {
        Self::with_tolerance(q, c, d, Tolerances::default().psd)
    }

    /// Accepts `Q` whose smallest eigenvalue is at least `-psd_tol * max(1, |Q|)`.
    pub fn with_tolerance(q: Matrix, c: Vector, d: f64, psd_tol: f64) -> Result<Self> {
        let m = c.len();
        if q.nrows() != m || q.ncols() != m {
            return Err(Error::InvalidInequality(format!(
                "Q is {}x{} but c has length {m}",
                q.nrows(),
                q.ncols()
            )));
        }
        if q.iter().chain(c.iter()).any(|v| !v.is_finite()) || !d.is_finite() {
            return Err(Error::InvalidInequality("quadratic data must be finite".into()));
        }
        let scale = q.amax().max(1.0);
        if (&q - q.transpose()).amax() > 1e-12 * scale {
            return Err(Error::InvalidInequality("Q must be symmetric".into()));
        }
        if m > 0 {
            let min_eig = SymmetricEigen::new(q.clone()).eigenvalues.min();
            if min_eig < -psd_tol * scale {
                return Err(Error::InvalidInequality(format!(
                    "Q must be positive semidefinite (smallest eigenvalue {min_eig:e})"
                )));
            }
        }
        Ok(Self { q, c, d })
    }

    pub fn q(&self) -> &Matrix {
        &self.q
    }

    pub fn c(&self) -> &Vector {
        &self.c
    }

    pub fn d(&self) -> f64 {
        self.d
    }
}

/// A block `A x <= b` of linear inequalities, handled through the penalty
/// `psi(A x - b) = |(A x - b)^+|^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearBlock {
    a: Matrix,
    b: Vector,
}

impl LinearBlock {
    pub fn new(a: Matrix, b: Vector) -> Result<Self> {
        if a.nrows() != b.len() {
            return Err(Error::InvalidInequality(format!(
                "A has {} rows but b has length {}",
                a.nrows(),
                b.len()
            )));
        }
        if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInequality("linear block data must be finite".into()));
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn b(&self) -> &Vector {
        &self.b
    }

    pub fn penalty(&self, x: &Vector, scale: PenaltyScale) -> Result<(f64, Vector)> {
        psi_value_and_grad(&self.a, &self.b, x, scale)
    }
}

/// Which multiple of `A^T (A x - b)^+` [`psi_value_and_grad`] returns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PenaltyScale {
    /// The true gradient `2 A^T (A x - b)^+`.
    Gradient,
    /// `A^T (A x - b)^+`, the direction used by the linear-inequality flow.
    HalfGradient,
}

/// `psi = |(A x - b)^+|^2` together with its gradient (or half of it).
pub fn psi_value_and_grad(
    a: &Matrix,
    b: &Vector,
    x: &Vector,
    scale: PenaltyScale,
) -> Result<(f64, Vector)> {
    check_dim(a.ncols(), x)?;
    if b.len() != a.nrows() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            found: b.len(),
        });
    }
    let violation = (a * x - b).map(|y| y.max(0.0));
    let value = violation.norm_squared();
    let factor = match scale {
        PenaltyScale::Gradient => 2.0,
        PenaltyScale::HalfGradient => 1.0,
    };
    Ok((value, a.transpose() * violation * factor))
}

/// A convex function `g` constraining an agent through `g(x) <= 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "InequalityRecord", into = "InequalityRecord")]
pub enum ConvexInequality {
    Linear(LinearInequality),
    Quadratic(QuadraticInequality),
    LinearBlock(LinearBlock),
}

impl ConvexInequality {
    pub fn linear(a: Vector, b: f64) -> Result<Self> {
        LinearInequality::new(a, b).map(Self::Linear)
    }

    pub fn quadratic(q: Matrix, c: Vector, d: f64) -> Result<Self> {
        QuadraticInequality::new(q, c, d).map(Self::Quadratic)
    }

    pub fn linear_block(a: Matrix, b: Vector) -> Result<Self> {
        LinearBlock::new(a, b).map(Self::LinearBlock)
    }

    /// The constant `g = -1`, satisfied everywhere.
    pub fn trivial(dim: usize) -> Self {
        Self::Linear(LinearInequality {
            a: Vector::zeros(dim),
            b: 1.0,
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexInequality::Linear(g) => g.a.len(),
            ConvexInequality::Quadratic(g) => g.c.len(),
            ConvexInequality::LinearBlock(g) => g.a.ncols(),
        }
    }

    /// `g(x)`. For a linear block this is `psi(A x - b)`.
    pub fn value(&self, x: &Vector) -> Result<f64> {
        check_dim(self.dim(), x)?;
        Ok(match self {
            ConvexInequality::Linear(g) => g.a.dot(x) - g.b,
            ConvexInequality::Quadratic(g) => x.dot(&(&g.q * x)) + g.c.dot(x) + g.d,
            ConvexInequality::LinearBlock(g) => g.penalty(x, PenaltyScale::Gradient)?.0,
        })
    }

    /// `g^+(x) = max(g(x), 0)`.
    pub fn plus_value(&self, x: &Vector) -> Result<f64> {
        Ok(self.value(x)?.max(0.0))
    }

    /// A subgradient of `g^+` at `x`: zero where `g(x) <= 0` (including the
    /// kink `g(x) = 0`), otherwise the gradient of `g`.
    pub fn subgradient_plus(&self, x: &Vector) -> Result<Vector> {
        if self.value(x)? <= 0.0 {
            return Ok(Vector::zeros(x.len()));
        }
        Ok(match self {
            ConvexInequality::Linear(g) => g.a.clone(),
            ConvexInequality::Quadratic(g) => &g.q * x * 2.0 + &g.c,
            ConvexInequality::LinearBlock(g) => g.penalty(x, PenaltyScale::Gradient)?.1,
        })
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
enum InequalityRecord {
    Linear { a: Vec<f64>, b: f64 },
    Quadratic { q: Vec<Vec<f64>>, c: Vec<f64>, d: f64 },
    LinearBlock { a: Vec<Vec<f64>>, b: Vec<f64> },
}

fn matrix_from_rows(rows: &[Vec<f64>], ncols: usize) -> Result<Matrix> {
    if let Some(bad) = rows.iter().position(|r| r.len() != ncols) {
        return Err(Error::InvalidInequality(format!(
            "matrix row {bad} has {} entries, expected {ncols}",
            rows[bad].len()
        )));
    }
    Ok(Matrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

fn matrix_rows(m: &Matrix) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

impl TryFrom<InequalityRecord> for ConvexInequality {
    type Error = Error;

    fn try_from(r: InequalityRecord) -> Result<Self> {
        match r {
            InequalityRecord::Linear { a, b } => Self::linear(Vector::from_vec(a), b),
            InequalityRecord::Quadratic { q, c, d } => {
                let q = matrix_from_rows(&q, c.len())?;
                Self::quadratic(q, Vector::from_vec(c), d)
            }
            InequalityRecord::LinearBlock { a, b } => {
                let ncols = a.first().map_or(0, Vec::len);
                Self::linear_block(matrix_from_rows(&a, ncols)?, Vector::from_vec(b))
            }
        }
    }
}

impl From<ConvexInequality> for InequalityRecord {
    fn from(g: ConvexInequality) -> Self {
        match g {
            ConvexInequality::Linear(g) => InequalityRecord::Linear {
                a: g.a.as_slice().to_vec(),
                b: g.b,
            },
            ConvexInequality::Quadratic(g) => InequalityRecord::Quadratic {
                q: matrix_rows(&g.q),
                c: g.c.as_slice().to_vec(),
                d: g.d,
            },
            ConvexInequality::LinearBlock(g) => InequalityRecord::LinearBlock {
                a: matrix_rows(&g.a),
                b: g.b.as_slice().to_vec(),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(x: &[f64]) -> Vector {
        Vector::from_row_slice(x)
    }

    /// c(z) = 2 z1 - 3 z2 - 2
    fn c_ineq() -> ConvexInequality {
        ConvexInequality::linear(v(&[2.0, -3.0]), 2.0).unwrap()
    }

    #[test]
    fn linear_plus_function() {
        let g = c_ineq();
        assert_eq!(g.plus_value(&v(&[2.58, 1.23])).unwrap(), 0.0);
        assert!((g.value(&v(&[2.58, 1.23])).unwrap() + 0.53).abs() < 1e-12);
        assert_eq!(g.plus_value(&v(&[4.0, 0.0])).unwrap(), 6.0);
    }

    #[test]
    fn linear_subgradient() {
        let g = c_ineq();
        assert_eq!(g.subgradient_plus(&v(&[2.58, 1.23])).unwrap(), v(&[0.0, 0.0]));
        assert_eq!(g.subgradient_plus(&v(&[4.0, 0.0])).unwrap(), v(&[2.0, -3.0]));
        // kink: g = 0 exactly at (1, 0)
        assert_eq!(g.subgradient_plus(&v(&[1.0, 0.0])).unwrap(), v(&[0.0, 0.0]));
    }

    #[test]
    fn trivial_is_always_satisfied() {
        let g = ConvexInequality::trivial(3);
        assert_eq!(g.value(&v(&[1e6, -4.0, 2.0])).unwrap(), -1.0);
        assert_eq!(g.subgradient_plus(&v(&[1.0, 2.0, 3.0])).unwrap(), Vector::zeros(3));
    }

    #[test]
    fn quadratic_validation() {
        let q = Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -0.5]);
        assert!(ConvexInequality::quadratic(q, v(&[0.0, 0.0]), 0.0).is_err());
        let asym = Matrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        assert!(ConvexInequality::quadratic(asym, v(&[0.0, 0.0]), 0.0).is_err());
        let g = ConvexInequality::quadratic(Matrix::identity(2, 2), v(&[-2.0, 0.0]), 0.0).unwrap();
        // |x|^2 - 2 x1 at (3, 1): 10 - 6 = 4, gradient 2x + c = (4, 2)
        assert_eq!(g.value(&v(&[3.0, 1.0])).unwrap(), 4.0);
        assert_eq!(g.subgradient_plus(&v(&[3.0, 1.0])).unwrap(), v(&[4.0, 2.0]));
    }

    #[test]
    fn psi_examples() {
        let a = Matrix::identity(2, 2);
        let b = Vector::zeros(2);
        let (val, grad) = psi_value_and_grad(&a, &b, &v(&[1.0, -1.0]), PenaltyScale::Gradient).unwrap();
        assert_eq!(val, 1.0);
        assert_eq!(grad, v(&[2.0, 0.0]));
        let (_, half) =
            psi_value_and_grad(&a, &b, &v(&[1.0, -1.0]), PenaltyScale::HalfGradient).unwrap();
        assert_eq!(half, v(&[1.0, 0.0]));
        let (val, grad) =
            psi_value_and_grad(&a, &b, &v(&[-1.0, -0.5]), PenaltyScale::Gradient).unwrap();
        assert_eq!(val, 0.0);
        assert_eq!(grad, Vector::zeros(2));
        assert!(psi_value_and_grad(&a, &b, &v(&[1.0]), PenaltyScale::Gradient).is_err());
    }

    #[test]
    fn serde_records() {
        let g: ConvexInequality =
            serde_json::from_str(r#"{"type":"linear","a":[2,-3],"b":2}"#).unwrap();
        assert_eq!(g, c_ineq());
        let block: ConvexInequality =
            serde_json::from_str(r#"{"type":"linear_block","a":[[1,0],[0,1]],"b":[0,0]}"#).unwrap();
        assert_eq!(block.dim(), 2);
        assert!(serde_json::from_str::<ConvexInequality>(
            r#"{"type":"quadratic","q":[[1,0]],"c":[0,0],"d":0}"#
        )
        .is_err());
        let back: ConvexInequality =
            serde_json::from_str(&serde_json::to_string(&block).unwrap()).unwrap();
        assert_eq!(back, block);
    }

    fn any_inequality() -> impl Strategy<Value = ConvexInequality> {
        let vec2 = || prop::collection::vec(-3.0..3.0f64, 2).prop_map(Vector::from_vec);
        prop_oneof![
            (vec2(), -2.0..2.0f64).prop_map(|(a, b)| ConvexInequality::linear(a, b).unwrap()),
            (prop::collection::vec(-1.5..1.5f64, 4), vec2(), -3.0..1.0f64).prop_map(|(r, c, d)| {
                let root = Matrix::from_row_slice(2, 2, &r);
                let q = root.transpose() * root;
                ConvexInequality::quadratic((&q + q.transpose()) * 0.5, c, d).unwrap()
            }),
            (prop::collection::vec(-2.0..2.0f64, 6), prop::collection::vec(-1.0..1.0f64, 3))
                .prop_map(|(a, b)| ConvexInequality::linear_block(
                    Matrix::from_row_slice(3, 2, &a),
                    Vector::from_vec(b)
                )
                .unwrap()),
        ]
    }

    fn point() -> impl Strategy<Value = Vector> {
        prop::collection::vec(-4.0..4.0f64, 2).prop_map(Vector::from_vec)
    }

    proptest! {
        #[test]
        fn subgradient_inequality(g in any_inequality(), x in point(), y in point()) {
            let lhs = g.plus_value(&y).unwrap() - g.plus_value(&x).unwrap();
            let rhs = g.subgradient_plus(&x).unwrap().dot(&(&y - &x));
            prop_assert!(lhs >= rhs - 1e-10 * (1.0 + lhs.abs()), "{lhs} < {rhs}");
        }

        #[test]
        fn psi_vanishes_exactly_on_feasible_side(y in prop::collection::vec(-2.0..2.0f64, 4)) {
            let y = Vector::from_vec(y);
            let a = Matrix::identity(4, 4);
            let (val, _) = psi_value_and_grad(&a, &Vector::zeros(4), &y, PenaltyScale::Gradient).unwrap();
            prop_assert_eq!(val == 0.0, y.iter().all(|&c| c <= 0.0));
        }
    }
}
