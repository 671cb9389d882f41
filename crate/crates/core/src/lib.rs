//! Convex hulls in vertex and half-space form.
//!
//! The crate answers membership, extreme-point and optimization queries
//! directly on a point set (V-representation) by linear programming, and
//! provides a brute-force conversion to the half-space form
//! (H-representation) for comparison.

pub mod bench;
pub mod boundary;
pub mod error;
pub mod hull;
pub mod lp;
pub mod numeric;
pub mod optimize;
pub mod parallel;
pub mod polytope;

pub use error::{HullError, Result};
pub use numeric::{Hyperplane, Matrix};
pub use polytope::{HRep, VRep};
