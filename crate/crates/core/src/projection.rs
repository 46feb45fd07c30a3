//! Euclidean projections onto the supported feasible regions.
//!
//! The `l2` radius bounds the norm `‖w‖₂ ≤ r`, not the squared norm. A
//! region written as `{w : ‖w‖₂² ≤ s}` corresponds to `radius = √s`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::types::{norm_sq, ParamVector};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum FeasibleRegion {
    #[default]
    Unconstrained,
    L2Ball { radius: f64 },
}

impl FeasibleRegion {
    pub fn l2_ball(radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::argument(format!("l2 radius must be positive and finite, got {radius}")));
        }
        Ok(FeasibleRegion::L2Ball { radius })
    }

    pub fn radius(&self) -> Option<f64> {
        match *self {
            FeasibleRegion::Unconstrained => None,
            FeasibleRegion::L2Ball { radius } => Some(radius),
        }
    }

    pub fn contains(&self, w: &[f64]) -> bool {
        match *self {
            FeasibleRegion::Unconstrained => true,
            FeasibleRegion::L2Ball { radius } => norm_sq(w).sqrt() <= radius,
        }
    }

    /// Euclidean distance from `w` to the region.
    pub fn distance(&self, w: &[f64]) -> f64 {
        match *self {
            FeasibleRegion::Unconstrained => 0.0,
            FeasibleRegion::L2Ball { radius } => (norm_sq(w).sqrt() - radius).max(0.0),
        }
    }

    /// Intersection of two regions. Both kinds are centred at the origin, so
    /// the intersection is again a region of the same family.
    pub fn intersect(&self, other: &FeasibleRegion) -> FeasibleRegion {
        match (self.radius(), other.radius()) {
            (None, None) => FeasibleRegion::Unconstrained,
            (Some(r), None) | (None, Some(r)) => FeasibleRegion::L2Ball { radius: r },
            (Some(a), Some(b)) => FeasibleRegion::L2Ball { radius: a.min(b) },
        }
    }

    pub fn project(&self, w: &ParamVector) -> ParamVector {
        let mut out = w.as_slice().to_vec();
        self.project_in_place(&mut out);
        ParamVector::from_finite(out)
    }

    pub fn project_in_place(&self, w: &mut [f64]) {
        if let FeasibleRegion::L2Ball { radius } = *self {
            let norm = norm_sq(w).sqrt();
            if norm > radius {
                let scale = radius / norm;
                w.iter_mut().for_each(|x| *x *= scale);
            }
        }
    }
}

pub fn project(region: &FeasibleRegion, w: &ParamVector) -> ParamVector {
    region.project(w)
}

impl fmt::Display for FeasibleRegion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeasibleRegion::Unconstrained => write!(f, "none"),
            FeasibleRegion::L2Ball { radius } => write!(f, "l2:{radius}"),
        }
    }
}

impl FromStr for FeasibleRegion {
    type Err = Error;

    /// Accepts `none` or `l2:<radius>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("none") {
            return Ok(FeasibleRegion::Unconstrained);
        }
        match s.split_once(':') {
            Some((kind, r)) if kind.eq_ignore_ascii_case("l2") => {
                let radius: f64 = r
                    .parse()
                    .map_err(|_| Error::argument(format!("bad l2 radius {r:?}")))?;
                FeasibleRegion::l2_ball(radius)
            }
            _ => Err(Error::argument(format!("unknown region {s:?}, expected none or l2:<r>"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pv(v: &[f64]) -> ParamVector {
        ParamVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn unconstrained_is_identity() {
        let w = pv(&[1e300, -3.0, 0.5]);
        assert_eq!(FeasibleRegion::Unconstrained.project(&w), w);
    }

    #[test]
    fn outside_point_is_rescaled() {
        let ball = FeasibleRegion::l2_ball(5.0).unwrap();
        let p = ball.project(&pv(&[6.0, 8.0]));
        assert_eq!(p.as_slice(), &[3.0, 4.0]);
    }

    #[test]
    fn inside_point_is_unchanged() {
        let ball = FeasibleRegion::l2_ball(5.0).unwrap();
        let w = pv(&[0.0, 3.0]);
        assert_eq!(ball.project(&w), w);
    }

    #[test]
    fn parse_and_display() {
        assert_eq!("none".parse::<FeasibleRegion>().unwrap(), FeasibleRegion::Unconstrained);
        assert_eq!(
            "l2:50".parse::<FeasibleRegion>().unwrap(),
            FeasibleRegion::L2Ball { radius: 50.0 }
        );
        assert!("l2:-1".parse::<FeasibleRegion>().is_err());
        assert!("box:1".parse::<FeasibleRegion>().is_err());
        let r = FeasibleRegion::l2_ball(2.5).unwrap();
        assert_eq!(r.to_string().parse::<FeasibleRegion>().unwrap(), r);
    }

    #[test]
    fn intersection_takes_smaller_ball() {
        let a = FeasibleRegion::l2_ball(3.0).unwrap();
        let b = FeasibleRegion::l2_ball(0.6).unwrap();
        assert_eq!(a.intersect(&b), b);
        assert_eq!(FeasibleRegion::Unconstrained.intersect(&a), a);
    }

    fn vec_strategy(dim: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-100.0f64..100.0, dim)
    }

    proptest! {
        #[test]
        fn projection_is_feasible_and_idempotent(w in vec_strategy(6), r in 0.1f64..50.0) {
            let ball = FeasibleRegion::l2_ball(r).unwrap();
            let p = ball.project(&pv(&w));
            prop_assert!(p.norm() <= r * (1.0 + 1e-15));
            let pp = ball.project(&p);
            for (a, b) in p.iter().zip(pp.iter()) {
                prop_assert!((a - b).abs() <= 1e-15 * a.abs().max(f64::MIN_POSITIVE));
            }
            let free = FeasibleRegion::Unconstrained;
            let q = free.project(&pv(&w));
            prop_assert_eq!(free.project(&q), q);
        }

        #[test]
        fn projection_is_non_expansive(u in vec_strategy(5), v in vec_strategy(5), r in 0.1f64..50.0) {
            let ball = FeasibleRegion::l2_ball(r).unwrap();
            let (u, v) = (pv(&u), pv(&v));
            let d_proj = ball.project(&u).dist_sq(&ball.project(&v)).sqrt();
            prop_assert!(d_proj <= u.dist_sq(&v).sqrt() * (1.0 + 1e-12) + 1e-12);
        }

        #[test]
        fn projection_is_closest_feasible_point(
            dir in vec_strategy(4),
            y in vec_strategy(4),
            r in 0.5f64..10.0,
        ) {
            let ball = FeasibleRegion::l2_ball(r).unwrap();
            let w = pv(&dir);
            prop_assume!(w.norm() > r);
            let y = ball.project(&pv(&y));
            let p = ball.project(&w);
            prop_assert!(p.dist_sq(&w).sqrt() <= y.dist_sq(&w).sqrt() * (1.0 + 1e-12));
        }
    }
}
