//! Projectable convex sets and convex inequalities.

mod inequality;
mod set;

pub use inequality::{
    psi_value_and_grad, ConvexInequality, LinearBlock, LinearInequality, PenaltyScale,
    QuadraticInequality,
};
pub use set::{Ball, BoxSet, ConvexSet, Halfspace, Hyperplane};

use crate::{Error, Result, Vector};

pub(crate) fn check_dim(expected: usize, x: &Vector) -> Result<()> {
    if x.len() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            found: x.len(),
        });
    }
    Ok(())
}
