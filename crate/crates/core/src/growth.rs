//! Logistic growth laws shared by every model variant.
//!
//! Three shapes appear: an independent logistic law per patch with its own
//! capacity, the shared-field law `r x (1 - z)` where growth of one
//! sub-population is limited by the total stock `z`, and the aggregate law
//! `r z (1 - z)` of the whole zone. The shared-field law sums exactly to the
//! aggregate law over any split of `z`.

use crate::error::{Error, Result};

/// Slack allowed on `z <= 1` before the shared-field and aggregate laws
/// reject their argument.
pub const CAPACITY_TOLERANCE: f64 = 1e-9;

/// A concave growth law of a single stock together with its slope.
///
/// The equilibrium conditions are written against this trait so that
/// alternative laws can be substituted where only concavity matters.
pub trait ConcaveLaw {
    fn value(&self, x: f64) -> f64;
    fn slope(&self, x: f64) -> f64;
}

/// `r x (1 - x/K)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Logistic {
    pub rate: f64,
    pub capacity: f64,
}

impl Logistic {
    pub fn new(rate: f64, capacity: f64) -> Result<Self> {
        if !(rate > 0.0) {
            return Err(Error::Invariant(format!(
                "growth rate must be > 0, got {rate}"
            )));
        }
        if !(capacity > 0.0) {
            return Err(Error::Invariant(format!(
                "capacity must be > 0, got {capacity}"
            )));
        }
        Ok(Logistic { rate, capacity })
    }
}

impl ConcaveLaw for Logistic {
    fn value(&self, x: f64) -> f64 {
        self.rate * x * (1.0 - x / self.capacity)
    }

    fn slope(&self, x: f64) -> f64 {
        self.rate * (1.0 - 2.0 * x / self.capacity)
    }
}

/// Which of the three logistic shapes a law takes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GrowthLaw {
    PatchLogistic { r: f64, k: f64 },
    SharedField { r: f64 },
    Aggregate { r: f64 },
}

impl GrowthLaw {
    /// Evaluates the law. `z` is the total stock and is ignored by the
    /// patch law; `x` is ignored by the aggregate law.
    pub fn eval(&self, x: f64, z: f64) -> Result<f64> {
        match *self {
            GrowthLaw::PatchLogistic { r, k } => patch_growth(x, r, k),
            GrowthLaw::SharedField { r } => shared_field_growth(x, z, r),
            GrowthLaw::Aggregate { r } => aggregate_growth(z, r),
        }
    }
}

fn check_patch(x: f64, k: f64) -> Result<()> {
    if !(k > 0.0) {
        return Err(Error::Domain(format!("capacity K must be > 0, got {k}")));
    }
    if !(x >= 0.0) {
        return Err(Error::Domain(format!("stock must be >= 0, got {x}")));
    }
    Ok(())
}

/// Per-patch logistic law `r x (1 - x/K)`.
pub fn patch_growth(x: f64, r: f64, k: f64) -> Result<f64> {
    check_patch(x, k)?;
    Ok(r * x * (1.0 - x / k))
}

/// Slope `r (1 - 2x/K)` of the per-patch law.
pub fn patch_growth_derivative(x: f64, r: f64, k: f64) -> Result<f64> {
    check_patch(x, k)?;
    Ok(r * (1.0 - 2.0 * x / k))
}

/// Shared-field law `r x (1 - z)`; zero iff `x = 0` or `z = 1`.
pub fn shared_field_growth(x: f64, z: f64, r: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::Domain(format!("stock must be >= 0, got {x}")));
    }
    if x > z + CAPACITY_TOLERANCE {
        return Err(Error::Domain(format!(
            "sub-stock {x} exceeds total stock {z}"
        )));
    }
    if z > 1.0 + CAPACITY_TOLERANCE {
        return Err(Error::Domain(format!("total stock {z} exceeds capacity 1")));
    }
    Ok(r * x * (1.0 - z))
}

/// Aggregate law `r z (1 - z)` of the undivided zone.
pub fn aggregate_growth(z: f64, r: f64) -> Result<f64> {
    if !(z >= 0.0) || z > 1.0 + CAPACITY_TOLERANCE {
        return Err(Error::Domain(format!("total stock {z} outside [0, 1]")));
    }
    Ok(r * z * (1.0 - z))
}

/// Slope `r (1 - 2z)` of the aggregate law.
pub fn aggregate_growth_derivative(z: f64, r: f64) -> f64 {
    r * (1.0 - 2.0 * z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn patch_law_vanishes_at_zero_and_capacity() {
        assert_eq!(patch_growth(0.0, 0.4, 0.5).unwrap(), 0.0);
        assert_eq!(patch_growth(0.5, 0.4, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn patch_law_at_reserve_golden_stock() {
        let (alpha, r1, delta) = (0.5, 0.4, 0.05);
        let v = patch_growth(0.21875, r1, alpha).unwrap();
        assert_abs_diff_eq!(v, 0.04921875, epsilon = 1e-15);
        let closed = alpha * (r1 - delta) * (r1 + delta) / (4.0 * r1);
        assert_abs_diff_eq!(v, closed, epsilon = 1e-15);
    }

    #[test]
    fn patch_slope_values() {
        assert_abs_diff_eq!(patch_growth_derivative(0.0, 0.4, 0.5).unwrap(), 0.4);
        assert_abs_diff_eq!(patch_growth_derivative(0.25, 0.4, 0.5).unwrap(), 0.0);
        assert_abs_diff_eq!(
            patch_growth_derivative(0.21875, 0.4, 0.5).unwrap(),
            0.05,
            epsilon = 1e-15
        );
    }

    #[test]
    fn patch_domain_errors() {
        assert!(matches!(patch_growth(0.1, 0.4, 0.0), Err(Error::Domain(_))));
        assert!(matches!(
            patch_growth(-0.1, 0.4, 0.5),
            Err(Error::Domain(_))
        ));
        assert!(patch_growth_derivative(0.1, 0.4, -1.0).is_err());
    }

    #[test]
    fn shared_field_zeros() {
        assert_eq!(shared_field_growth(0.3, 1.0, 0.28739).unwrap(), 0.0);
        assert_eq!(shared_field_growth(0.0, 0.4, 0.28739).unwrap(), 0.0);
        assert_eq!(shared_field_growth(0.875, 1.0, 0.28739).unwrap(), 0.0);
    }

    #[test]
    fn shared_field_domain() {
        assert!(shared_field_growth(0.5, 0.4, 0.3).is_err());
        assert!(shared_field_growth(0.5, 1.0 + 1e-6, 0.3).is_err());
        assert!(shared_field_growth(0.5, 1.0 + 1e-10, 0.3).is_ok());
        assert!(aggregate_growth(1.1, 0.3).is_err());
        assert!(aggregate_growth(-0.1, 0.3).is_err());
    }

    #[test]
    fn aggregate_values_and_split() {
        assert_eq!(aggregate_growth(1.0, 0.3).unwrap(), 0.0);
        assert_abs_diff_eq!(aggregate_growth(0.5, 0.3).unwrap(), 0.075, epsilon = 1e-15);
        let split = shared_field_growth(0.2, 0.5, 0.3).unwrap()
            + shared_field_growth(0.3, 0.5, 0.3).unwrap();
        assert_abs_diff_eq!(split, 0.075, epsilon = 1e-15);
    }

    #[test]
    fn growth_law_dispatch() {
        let law = GrowthLaw::PatchLogistic { r: 0.4, k: 0.5 };
        assert_eq!(law.eval(0.5, 0.0).unwrap(), 0.0);
        let law = GrowthLaw::Aggregate { r: 0.3 };
        assert_abs_diff_eq!(law.eval(0.0, 0.5).unwrap(), 0.075, epsilon = 1e-15);
        assert!(Logistic::new(0.0, 1.0).is_err());
        assert!(Logistic::new(0.1, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn aggregation_identity(x1 in 0.0..1.0f64, frac in 0.0..1.0f64, r in 0.01..4.0f64) {
            let x2 = (1.0 - x1) * frac;
            let z = x1 + x2;
            let split = shared_field_growth(x1, z, r).unwrap() + shared_field_growth(x2, z, r).unwrap();
            let agg = aggregate_growth(z, r).unwrap();
            // r x1 (1-z) + r x2 (1-z) and r z (1-z) differ only by rounding
            prop_assert!((split - agg).abs() <= 4.0 * f64::EPSILON * r);
        }

        #[test]
        fn patch_law_strictly_concave(a in 0.0..0.9f64, h in 1e-3..0.05f64, r in 0.01..2.0f64) {
            let k = 1.0;
            let f = |x| patch_growth(x, r, k).unwrap();
            prop_assert!(f(a) - 2.0 * f(a + h) + f(a + 2.0 * h) < 0.0);
        }

        #[test]
        fn slope_matches_central_difference(x in 0.0..1.0f64, r in 0.01..2.0f64, k in 0.1..2.0f64) {
            let h = 1e-6;
            let lo = (x - h).max(0.0);
            let hi = x + h;
            let fd = (patch_growth(hi, r, k).unwrap() - patch_growth(lo, r, k).unwrap()) / (hi - lo);
            let d = patch_growth_derivative(0.5 * (lo + hi), r, k).unwrap();
            // quadratic law: the central difference is exact up to rounding
            prop_assert!((fd - d).abs() <= 1e-8 * d.abs().max(r));
        }
    }
}
