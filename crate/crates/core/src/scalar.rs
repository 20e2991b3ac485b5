// SPDX-License-Identifier: Apache-2.0

//! Real scalar abstraction shared by every numerical module.

use std::fmt::{Debug, Display};
use std::str::FromStr;

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real floating-point type the toolkit can run on.
///
/// Validation tolerances depend on the precision, so they are supplied per
/// type rather than hard-coded at the call sites.
pub trait Real:
    RealField + Copy + FromPrimitive + ToPrimitive + Display + FromStr + Debug + Send + Sync + 'static
{
    /// Maximum elementwise deviation from Hermiticity accepted for a state.
    fn hermitian_tol() -> Self;
    /// Maximum deviation of a state's trace from one.
    fn trace_tol() -> Self;
    /// Lowest eigenvalue a state may have before it is rejected.
    fn eigenvalue_floor() -> Self;
    /// Normalization slack for pure states.
    fn norm_tol() -> Self;

    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite value")
    }
}

impl Real for f64 {
    fn hermitian_tol() -> Self {
        1e-10
    }
    fn trace_tol() -> Self {
        1e-10
    }
    fn eigenvalue_floor() -> Self {
        -1e-9
    }
    fn norm_tol() -> Self {
        1e-12
    }
}

impl Real for f32 {
    fn hermitian_tol() -> Self {
        1e-5
    }
    fn trace_tol() -> Self {
        1e-5
    }
    fn eigenvalue_floor() -> Self {
        -1e-4
    }
    fn norm_tol() -> Self {
        1e-6
    }
}
