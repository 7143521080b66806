use serde::{Deserialize, Serialize};

use super::check_dim;
use crate::{Error, Result, Vector};

/// Axis-aligned box `lower <= x <= upper`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxSet {
    lower: Vector,
    upper: Vector,
}

impl BoxSet {
    pub fn new(lower: Vector, upper: Vector) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::InvalidSet(format!(
                "box bounds have lengths {} and {}",
                lower.len(),
                upper.len()
            )));
        }
        if let Some(k) = (0..lower.len()).find(|&k| lower[k].partial_cmp(&upper[k]).is_none_or(|o| o.is_gt())) {
            return Err(Error::InvalidSet(format!(
                "box bound {k}: lower {} exceeds upper {}",
                lower[k], upper[k]
            )));
        }
        Ok(Self { lower, upper })
    }

    pub fn lower(&self) -> &Vector {
        &self.lower
    }

    pub fn upper(&self) -> &Vector {
        &self.upper
    }
}

/// `{x : a^T x <= b}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Halfspace {
    normal: Vector,
    offset: f64,
}

impl Halfspace {
    pub fn new(normal: Vector, offset: f64) -> Result<Self> {
        validate_normal(&normal, offset, "halfspace")?;
        Ok(Self { normal, offset })
    }

    pub fn normal(&self) -> &Vector {
        &self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }
}

/// Closed Euclidean ball.
#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    center: Vector,
    radius: f64,
}

impl Ball {
    pub fn new(center: Vector, radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidSet(format!("ball radius must be positive, got {radius}")));
        }
        if center.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidSet("ball center must be finite".into()));
        }
        Ok(Self { center, radius })
    }

    pub fn center(&self) -> &Vector {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }
}

/// `{x : a^T x = b}`, the solution set of one linear equation.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperplane {
    normal: Vector,
    offset: f64,
}

impl Hyperplane {
    pub fn new(normal: Vector, offset: f64) -> Result<Self> {
        validate_normal(&normal, offset, "hyperplane")?;
        Ok(Self { normal, offset })
    }

    pub fn normal(&self) -> &Vector {
        &self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }
}

fn validate_normal(normal: &Vector, offset: f64, what: &str) -> Result<()> {
    if normal.iter().any(|a| !a.is_finite()) || !offset.is_finite() {
        return Err(Error::InvalidSet(format!("{what} data must be finite")));
    }
    if normal.norm() == 0.0 {
        return Err(Error::InvalidSet(format!("{what} normal must be nonzero")));
    }
    Ok(())
}

/// A nonempty closed convex set with a closed-form projection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SetRecord", into = "SetRecord")]
pub enum ConvexSet {
    Box(BoxSet),
    Halfspace(Halfspace),
    Ball(Ball),
    Hyperplane(Hyperplane),
    /// All of `R^m`; projection is the identity.
    WholeSpace,
}

impl ConvexSet {
    pub fn boxed(lower: Vector, upper: Vector) -> Result<Self> {
        BoxSet::new(lower, upper).map(Self::Box)
    }

    pub fn halfspace(normal: Vector, offset: f64) -> Result<Self> {
        Halfspace::new(normal, offset).map(Self::Halfspace)
    }

    pub fn ball(center: Vector, radius: f64) -> Result<Self> {
        Ball::new(center, radius).map(Self::Ball)
    }

    pub fn hyperplane(normal: Vector, offset: f64) -> Result<Self> {
        Hyperplane::new(normal, offset).map(Self::Hyperplane)
    }

    /// Solution set of `a^T x - b = 0`; same set as [`ConvexSet::hyperplane`].
    pub fn affine_from_equation(a: Vector, b: f64) -> Result<Self> {
        Self::hyperplane(a, b)
    }

    /// Ambient dimension, or `None` for the dimension-free whole space.
    pub fn dim(&self) -> Option<usize> {
        match self {
            ConvexSet::Box(s) => Some(s.lower.len()),
            ConvexSet::Halfspace(s) => Some(s.normal.len()),
            ConvexSet::Ball(s) => Some(s.center.len()),
            ConvexSet::Hyperplane(s) => Some(s.normal.len()),
            ConvexSet::WholeSpace => None,
        }
    }

    /// Nearest point of the set to `x`.
    pub fn project(&self, x: &Vector) -> Result<Vector> {
        if let Some(dim) = self.dim() {
            check_dim(dim, x)?;
        }
        Ok(match self {
            ConvexSet::Box(s) => Vector::from_fn(x.len(), |k, _| x[k].clamp(s.lower[k], s.upper[k])),
            ConvexSet::Halfspace(s) => {
                let excess = s.normal.dot(x) - s.offset;
                if excess <= 0.0 {
                    x.clone()
                } else {
                    x - &s.normal * (excess / s.normal.norm_squared())
                }
            }
            ConvexSet::Ball(s) => {
                let offset = x - &s.center;
                let dist = offset.norm();
                if dist <= s.radius {
                    x.clone()
                } else {
                    &s.center + offset * (s.radius / dist)
                }
            }
            ConvexSet::Hyperplane(s) => {
                let excess = s.normal.dot(x) - s.offset;
                x - &s.normal * (excess / s.normal.norm_squared())
            }
            ConvexSet::WholeSpace => x.clone(),
        })
    }

    /// Euclidean distance from `x` to the set.
    pub fn distance(&self, x: &Vector) -> Result<f64> {
        Ok((x - self.project(x)?).norm())
    }

    /// Membership up to a constraint violation of `tol`.
    pub fn contains(&self, x: &Vector, tol: f64) -> Result<bool> {
        if let Some(dim) = self.dim() {
            check_dim(dim, x)?;
        }
        Ok(match self {
            ConvexSet::Box(s) => {
                (0..x.len()).all(|k| x[k] >= s.lower[k] - tol && x[k] <= s.upper[k] + tol)
            }
            ConvexSet::Halfspace(s) => s.normal.dot(x) - s.offset <= tol,
            ConvexSet::Ball(s) => (x - &s.center).norm() <= s.radius + tol,
            ConvexSet::Hyperplane(s) => (s.normal.dot(x) - s.offset).abs() <= tol,
            ConvexSet::WholeSpace => true,
        })
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
enum SetRecord {
    Box {
        lower: Vec<f64>,
        upper: Vec<f64>,
    },
    Halfspace {
        a: Vec<f64>,
        b: f64,
    },
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    #[serde(alias = "affine")]
    Hyperplane {
        a: Vec<f64>,
        b: f64,
    },
    WholeSpace,
}

impl TryFrom<SetRecord> for ConvexSet {
    type Error = Error;

    fn try_from(r: SetRecord) -> Result<Self> {
        match r {
            SetRecord::Box { lower, upper } => {
                ConvexSet::boxed(Vector::from_vec(lower), Vector::from_vec(upper))
            }
            SetRecord::Halfspace { a, b } => ConvexSet::halfspace(Vector::from_vec(a), b),
            SetRecord::Ball { center, radius } => ConvexSet::ball(Vector::from_vec(center), radius),
            SetRecord::Hyperplane { a, b } => ConvexSet::hyperplane(Vector::from_vec(a), b),
            SetRecord::WholeSpace => Ok(ConvexSet::WholeSpace),
        }
    }
}

impl From<ConvexSet> for SetRecord {
    fn from(s: ConvexSet) -> Self {
        let v = |x: Vector| x.as_slice().to_vec();
        match s {
            ConvexSet::Box(s) => SetRecord::Box {
                lower: v(s.lower),
                upper: v(s.upper),
            },
            ConvexSet::Halfspace(s) => SetRecord::Halfspace {
                a: v(s.normal),
                b: s.offset,
            },
            ConvexSet::Ball(s) => SetRecord::Ball {
                center: v(s.center),
                radius: s.radius,
            },
            ConvexSet::Hyperplane(s) => SetRecord::Hyperplane {
                a: v(s.normal),
                b: s.offset,
            },
            ConvexSet::WholeSpace => SetRecord::WholeSpace,
        }
    }
}
