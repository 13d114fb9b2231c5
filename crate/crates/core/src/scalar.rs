use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive};

/// Floating point type the bounds and estimators are computed in.
///
/// The tolerances are per type: `f32` cannot hold a simplex sum to `1e-9`.
pub trait Real: Float + FromPrimitive + Sum + Debug + Display + Send + Sync + 'static {
    /// Allowed deviation of a distribution's component sum from one.
    const SIMPLEX_TOL: f64;
    /// Values this far outside `[0, 1]` are snapped to the boundary instead of rejected.
    const SNAP_TOL: f64;

    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("literal representable in every Real")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("Real converts to f64")
    }
}

impl Real for f64 {
    const SIMPLEX_TOL: f64 = 1e-9;
    const SNAP_TOL: f64 = 1e-9;
}

impl Real for f32 {
    const SIMPLEX_TOL: f64 = 1e-5;
    const SNAP_TOL: f64 = 1e-6;
}

/// Validates a probability, snapping values within `T::SNAP_TOL` of the unit
/// interval onto its boundary.
pub(crate) fn checked_probability<T: Real>(what: &'static str, p: T) -> crate::Result<T> {
    let slack = T::lit(T::SNAP_TOL);
    if p.is_nan() || p < -slack || p > T::one() + slack {
        return Err(crate::Error::Domain {
            what,
            value: p.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(p.max(T::zero()).min(T::one()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snapping_and_rejection() {
        assert_eq!(checked_probability("p", 1.0 + 5e-10).unwrap(), 1.0);
        assert_eq!(checked_probability("p", -5e-10).unwrap(), 0.0);
        assert!(checked_probability("p", 1.0 + 1e-8).is_err());
        assert!(checked_probability("p", f64::NAN).is_err());
        assert_eq!(checked_probability("p", 0.25f32).unwrap(), 0.25f32);
    }
}
