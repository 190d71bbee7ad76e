//! Piecewise-linear fuzzy sets over one dimension, linguistic hedges,
//! t-norms, and angular (bearing) sets.

use serde::{Deserialize, Serialize};

use crate::geo::angular_separation_deg;

/// Piecewise-linear membership shape. Trapezoid membership is 1 exactly on
/// [b, c]; ramps are one-sided shoulders.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Shape {
    Trapezoid { a: f64, b: f64, c: f64, d: f64 },
    RampUp { lo: f64, hi: f64 },
    RampDown { lo: f64, hi: f64 },
}

impl Shape {
    /// Shorthand for a triangle with its peak at `peak`.
    pub fn triangle(a: f64, peak: f64, c: f64) -> Self {
        Shape::Trapezoid {
            a,
            b: peak,
            c: peak,
            d: c,
        }
    }

    pub fn is_valid(&self) -> bool {
        match *self {
            Shape::Trapezoid { a, b, c, d } => {
                a.is_finite() && b.is_finite() && c.is_finite() && d.is_finite()
                    && a <= b && b <= c && c <= d
            }
            Shape::RampUp { lo, hi } | Shape::RampDown { lo, hi } => {
                lo.is_finite() && hi.is_finite() && lo <= hi
            }
        }
    }

    fn membership(&self, x: f64) -> f64 {
        match *self {
            Shape::Trapezoid { a, b, c, d } => {
                if x < a || x > d {
                    0.0
                } else if x >= b && x <= c {
                    1.0
                } else if x < b {
                    // a < x < b implies a < b
                    (x - a) / (b - a)
                } else {
                    // c < x <= d implies c < d
                    (d - x) / (d - c)
                }
            }
            Shape::RampUp { lo, hi } => {
                if x <= lo {
                    0.0
                } else if x >= hi {
                    1.0
                } else {
                    (x - lo) / (hi - lo)
                }
            }
            Shape::RampDown { lo, hi } => {
                if x <= lo {
                    1.0
                } else if x >= hi {
                    0.0
                } else {
                    (hi - x) / (hi - lo)
                }
            }
        }
    }
}

/// Linguistic hedge: concentration ("very", μ²) or dilation
/// ("somewhat", √μ).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Hedge {
    Very,
    Somewhat,
}

impl Hedge {
    pub fn apply(self, mu: f64) -> f64 {
        match self {
            Hedge::Very => mu * mu,
            Hedge::Somewhat => mu.sqrt(),
        }
    }

    /// The base membership threshold equivalent to a hedged threshold:
    /// hedge(μ) >= alpha iff μ >= unapply(alpha).
    fn unapply(self, alpha: f64) -> f64 {
        match self {
            Hedge::Very => alpha.sqrt(),
            Hedge::Somewhat => alpha * alpha,
        }
    }
}

/// A fuzzy set over one dimension (km for distance sets, dimensionless for
/// rule-engine variables), optionally hedged.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FuzzySet1D {
    #[serde(flatten)]
    pub shape: Shape,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hedge: Option<Hedge>,
}

impl From<Shape> for FuzzySet1D {
    fn from(shape: Shape) -> Self {
        Self { shape, hedge: None }
    }
}

impl FuzzySet1D {
    pub fn new(shape: Shape) -> Self {
        shape.into()
    }

    /// Piecewise-linear membership with the hedge transform applied;
    /// exact at breakpoints, always in [0, 1].
    pub fn membership(&self, x: f64) -> f64 {
        let mu = self.shape.membership(x);
        match self.hedge {
            Some(h) => h.apply(mu),
            None => mu,
        }
    }

    /// Return the set with `hedge` applied. Replaces any existing hedge;
    /// mentions carry at most one.
    pub fn with_hedge(&self, hedge: Hedge) -> Self {
        Self {
            shape: self.shape,
            hedge: Some(hedge),
        }
    }

    /// Largest x with membership >= alpha, `None` when the alpha-cut is
    /// unbounded above (RampUp shapes). `alpha` must lie in (0, 1].
    pub fn cut_upper(&self, alpha: f64) -> Option<f64> {
        let a = match self.hedge {
            Some(h) => h.unapply(alpha),
            None => alpha,
        };
        match self.shape {
            Shape::Trapezoid { c, d, .. } => Some(d - a * (d - c)),
            Shape::RampDown { lo, hi } => Some(hi - a * (hi - lo)),
            Shape::RampUp { .. } => None,
        }
    }

    /// Smallest non-negative x with membership >= alpha.
    pub fn cut_lower(&self, alpha: f64) -> f64 {
        let a = match self.hedge {
            Some(h) => h.unapply(alpha),
            None => alpha,
        };
        let x = match self.shape {
            Shape::Trapezoid { a: lo, b, .. } => lo + a * (b - lo),
            Shape::RampUp { lo, hi } => lo + a * (hi - lo),
            Shape::RampDown { .. } => f64::NEG_INFINITY,
        };
        x.max(0.0)
    }

    /// Upper edge of the support, `None` when unbounded.
    pub fn support_upper(&self) -> Option<f64> {
        match self.shape {
            Shape::Trapezoid { d, .. } => Some(d),
            Shape::RampDown { hi, .. } => Some(hi),
            Shape::RampUp { .. } => None,
        }
    }

    /// Whether membership is 1 at x = 0 (distance sets whose core touches
    /// the anchor).
    pub fn core_includes_zero(&self) -> bool {
        self.membership(0.0) >= 1.0
    }
}

/// Angular fuzzy component: full membership within `core_half_deg` of the
/// preferred bearing, linear falloff to zero at `support_half_deg`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngularSet {
    pub bearing_deg: f64,
    pub core_half_deg: f64,
    pub support_half_deg: f64,
}

impl AngularSet {
    pub fn membership(&self, bearing_deg: f64) -> f64 {
        let sep = angular_separation_deg(bearing_deg, self.bearing_deg);
        if sep <= self.core_half_deg {
            1.0
        } else if sep >= self.support_half_deg {
            0.0
        } else {
            (self.support_half_deg - sep) / (self.support_half_deg - self.core_half_deg)
        }
    }
}

/// Conjunctive combiner for membership degrees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TNorm {
    Min,
    Product,
}

impl TNorm {
    pub fn apply(self, a: f64, b: f64) -> f64 {
        match self {
            TNorm::Min => a.min(b),
            TNorm::Product => a * b,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn near() -> FuzzySet1D {
        FuzzySet1D::new(Shape::Trapezoid {
            a: 0.0,
            b: 0.0,
            c: 2.0,
            d: 5.0,
        })
    }

    #[test]
    fn trapezoid_breakpoints() {
        let s = near();
        assert_eq!(s.membership(0.0), 1.0);
        assert_eq!(s.membership(1.0), 1.0);
        assert_eq!(s.membership(2.0), 1.0);
        assert!((s.membership(3.5) - 0.5).abs() < 1e-12);
        assert_eq!(s.membership(5.0), 0.0);
        assert_eq!(s.membership(6.0), 0.0);
    }

    #[test]
    fn ramps() {
        let up = FuzzySet1D::new(Shape::RampUp { lo: 10.0, hi: 25.0 });
        assert_eq!(up.membership(10.0), 0.0);
        assert!((up.membership(17.5) - 0.5).abs() < 1e-12);
        assert_eq!(up.membership(25.0), 1.0);
        assert_eq!(up.membership(100.0), 1.0);

        let down = FuzzySet1D::new(Shape::RampDown { lo: 0.2, hi: 0.5 });
        assert_eq!(down.membership(0.0), 1.0);
        assert!((down.membership(0.35) - 0.5).abs() < 1e-12);
        assert_eq!(down.membership(0.5), 0.0);
    }

    #[test]
    fn hedge_values() {
        assert_eq!(Hedge::Very.apply(0.5), 0.25);
        assert_eq!(Hedge::Very.apply(1.0), 1.0);
        assert_eq!(Hedge::Somewhat.apply(0.0), 0.0);
        assert!((Hedge::Somewhat.apply(0.25) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn hedge_ordering() {
        let s = near();
        let very = s.with_hedge(Hedge::Very);
        let somewhat = s.with_hedge(Hedge::Somewhat);
        for i in 0..=60 {
            let x = i as f64 * 0.1;
            let mu = s.membership(x);
            assert!(very.membership(x) <= mu + 1e-12);
            assert!(mu <= somewhat.membership(x) + 1e-12);
        }
    }

    #[test]
    fn alpha_cut_inverse() {
        let s = near();
        assert_eq!(s.cut_upper(1.0), Some(2.0));
        assert_eq!(s.cut_upper(0.5), Some(3.5));
        assert!((s.cut_upper(1e-9).unwrap() - 5.0).abs() < 1e-6);
        // Hedged cuts: very(mu) >= 0.25 iff mu >= 0.5 iff x <= 3.5.
        assert_eq!(s.with_hedge(Hedge::Very).cut_upper(0.25), Some(3.5));
        assert_eq!(
            FuzzySet1D::new(Shape::RampUp { lo: 10.0, hi: 25.0 }).cut_upper(0.5),
            None
        );
    }

    #[test]
    fn angular_set_membership() {
        let east = AngularSet {
            bearing_deg: 90.0,
            core_half_deg: 30.0,
            support_half_deg: 60.0,
        };
        assert_eq!(east.membership(90.0), 1.0);
        assert_eq!(east.membership(115.0), 1.0);
        assert!((east.membership(135.0) - 0.5).abs() < 1e-12);
        assert_eq!(east.membership(270.0), 0.0); // due west
    }

    #[test]
    fn tnorms() {
        assert_eq!(TNorm::Min.apply(0.8, 0.6), 0.6);
        assert_eq!(TNorm::Product.apply(0.5, 0.5), 0.25);
    }
}
