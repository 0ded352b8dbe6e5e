//! Critical orders `r*(b)` and `r**(b)` of the degree-four families.
//!
//! `P_{b,r} = Q_b − r R_b`, and `R_b > 0` on `(0, 1)` away from `y₀`, so `P_{b,r}`
//! has a root on a side of `y₀` exactly when `r` reaches the minimum of
//! `Q_b / R_b` on that side.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::criterion::{bracket_zeros, residual_at};
use crate::error::{Error, Result};
use crate::family::{invariants, minimal_parameter, Degree, IsoparametricFamily};
use crate::poly::{isolate_real_roots, refine_in_unit_interval, QPoly};
use crate::quartic::{q_part, r_part, y0};
use crate::rational::{ceil_to_u64, int, ratio as rat, to_f64};

/// `Q_b(y) / R_b(y)`, exactly.
pub fn ratio(b: &BigRational, y: &BigRational) -> Result<BigRational> {
    if !(y.is_positive() && *y < BigRational::one()) {
        return Err(Error::OutOfRange { value: to_f64(y), lower: 0.0, upper: 1.0 });
    }
    let den = r_part(b).eval(y);
    if den.is_zero() {
        return Err(Error::Pole(y.to_string()));
    }
    Ok(q_part(b).eval(y) / den)
}

/// Floating-point `Q_b(y) / R_b(y)` with `R_b` kept in factored form.
pub fn ratio_f64(b: f64, y: f64) -> Result<f64> {
    if !(y > 0.0 && y < 1.0) {
        return Err(Error::OutOfRange { value: y, lower: 0.0, upper: 1.0 });
    }
    let w = 1.0 - y;
    let lin = (1.0 + b) * y - b;
    if lin == 0.0 {
        return Err(Error::Pole(y.to_string()));
    }
    let q = 2.0 * (2.0 * b * b * w * w * w + b * y * w + 2.0 * y * y * y);
    Ok(q / (w * y * lin * lin))
}

/// `N = Q_b′ R_b − Q_b R_b′`, the numerator of the derivative of the ratio.
pub fn derivative_numerator(b: &BigRational) -> QPoly {
    let (q, r) = (q_part(b), r_part(b));
    &(&q.derivative() * &r) - &(&q * &r.derivative())
}

/// A critical point of the ratio inside one of the two subintervals.
#[derive(Clone, Debug, PartialEq)]
pub struct CriticalPoint {
    pub y: f64,
    /// `1 − y` at full relative accuracy.
    pub complement: f64,
    /// Exact isolating interval of the root of `N`.
    pub lo: BigRational,
    pub hi: BigRational,
    /// Ratio at the point.
    pub value: f64,
}

/// Closed-form bounds obtained by evaluating the ratio at `y₀/2` and `(1+y₀)/2`.
#[derive(Clone, Debug, PartialEq)]
pub struct UpperBounds {
    /// `8(b² + 6b + 10) / (b(b+2))`, the ratio at `y₀/2`.
    pub v_rstar: BigRational,
    /// `(8 + 48b + 80b²) / (1 + 2b)`, the ratio at `(1+y₀)/2`.
    pub v_rstarstar: BigRational,
    pub bound_rstar: u64,
    pub bound_rstarstar: u64,
    pub note: Option<String>,
}

impl UpperBounds {
    /// The bounds in the `1 + V` form.
    pub fn display_values(&self) -> (BigRational, BigRational) {
        (&self.v_rstar + int(1), &self.v_rstarstar + int(1))
    }
}

pub fn upper_bounds(b: &BigRational) -> Result<UpperBounds> {
    if *b < BigRational::one() {
        return Err(Error::Precondition(format!("upper bounds are stated for b >= 1, got {b}")));
    }
    let b2 = b * b;
    let v1 = int(8) * (&b2 + int(6) * b + int(10)) / (b * (b + int(2)));
    let v2 = (int(8) + int(48) * b + int(80) * &b2) / (int(1) + int(2) * b);
    let bound = |v: &BigRational| ceil_to_u64(v).expect("bounds are positive");
    Ok(UpperBounds {
        bound_rstar: bound(&v1),
        bound_rstarstar: bound(&v2),
        v_rstar: v1,
        v_rstarstar: v2,
        note: b.is_one().then(|| {
            "b = 1 is the equal-multiplicity family; both bounds coincide at the symmetric point".to_string()
        }),
    })
}

/// Minima of the ratio and the derived critical orders.
#[derive(Clone, Debug, PartialEq)]
pub struct ThresholdReport {
    pub b: BigRational,
    pub y0: BigRational,
    /// Minimizer on `(0, y₀)`.
    pub y1: CriticalPoint,
    /// Minimizer on `(y₀, 1)`.
    pub y2: CriticalPoint,
    pub r1: f64,
    pub r2: f64,
    pub rstar_value: f64,
    pub rstarstar_value: f64,
    pub rstar: u64,
    pub rstarstar: u64,
    pub bounds: UpperBounds,
    /// All critical points found, in ascending `y`.
    pub critical_points: Vec<CriticalPoint>,
    pub warnings: Vec<String>,
}

/// Distance to the nearest integer below which a value is treated as an integer.
pub const INTEGER_TOLERANCE: f64 = 1e-9;
/// Distance to the nearest integer that triggers a warning.
pub const INTEGER_WARNING: f64 = 1e-6;

/// Smallest integer order `r ≥ value`: the value itself when it is an integer,
/// otherwise `⌊value⌋ + 1`.
pub fn order_from_value(value: f64, label: &str) -> (u64, Option<String>) {
    let nearest = value.round();
    let gap = (value - nearest).abs();
    let order = if gap < INTEGER_TOLERANCE * value.abs().max(1.0) {
        nearest as u64
    } else {
        value.floor() as u64 + 1
    };
    let warning = (gap < INTEGER_WARNING).then(|| {
        format!("{label} = {value:.17e} is within {gap:.1e} of an integer; the order {order} depends on that decision")
    });
    (order, warning)
}

fn critical_points_in(n: &QPoly, b: &BigRational, lo: &BigRational, hi: &BigRational) -> Result<Vec<CriticalPoint>> {
    isolate_real_roots(n, lo, hi)
        .into_iter()
        .map(|mut br| {
            let (y, complement) = refine_in_unit_interval(&mut br);
            let value = to_f64(&ratio(b, &br.midpoint())?);
            Ok(CriticalPoint { y, complement, lo: br.lo, hi: br.hi, value })
        })
        .collect()
}

/// Minimizes the ratio on both sides of `y₀` through the exact roots of `N`.
pub fn minimize(b: &BigRational) -> Result<ThresholdReport> {
    if *b < BigRational::one() {
        return Err(Error::Precondition(format!("minimize expects b >= 1, got {b}")));
    }
    let n = derivative_numerator(b);
    let y0 = y0(b);
    let left = critical_points_in(&n, b, &BigRational::zero(), &y0)?;
    let right = critical_points_in(&n, b, &y0, &BigRational::one())?;
    let least = |pts: &[CriticalPoint], side: &str| {
        pts.iter()
            .min_by(|a, b| a.value.total_cmp(&b.value))
            .cloned()
            .ok_or_else(|| Error::Verification(format!("no critical point of the ratio on the {side} subinterval")))
    };
    let y1 = least(&left, "left")?;
    let y2 = least(&right, "right")?;
    let (r1, r2) = (y1.value, y2.value);
    let rstar_value = r1.min(r2);
    let rstarstar_value = r1.max(r2);
    let mut warnings = Vec::new();
    let (rstar, w1) = order_from_value(rstar_value, "R*");
    let (rstarstar, w2) = order_from_value(rstarstar_value, "R**");
    warnings.extend(w1);
    warnings.extend(w2);
    let bounds = upper_bounds(b)?;
    let mut critical_points = left;
    critical_points.extend(right);
    Ok(ThresholdReport {
        b: b.clone(),
        y0,
        y1,
        y2,
        r1,
        r2,
        rstar_value,
        rstarstar_value,
        rstar,
        rstarstar,
        bounds,
        critical_points,
        warnings,
    })
}

/// Orders found by scanning `T_r` directly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BruteForceThresholds {
    pub rstar: u64,
    pub rstarstar: u64,
    /// Zero count of `T_r` (with multiplicity) for `r = 2..=r_max`.
    pub counts: Vec<u32>,
}

/// Default number of uniform grid points used by [`brute_force_thresholds`].
pub const BRUTE_FORCE_GRID: usize = 200_000;

/// Scan grid on `(0, π/4)`: uniform points plus geometric clusters near both
/// endpoints and on both sides of the minimal member.
fn adaptive_grid(fam: &IsoparametricFamily, uniform: usize) -> Vec<f64> {
    let upper = fam.degree().period();
    let s_star = minimal_parameter(fam);
    let eps = 1e-7;
    let mut grid: Vec<f64> = (0..uniform)
        .map(|i| eps + i as f64 * (upper - 2.0 * eps) / (uniform - 1) as f64)
        .collect();
    let cluster = 400;
    for k in 0..cluster {
        let d = 10f64.powf(-9.0 + 7.0 * k as f64 / (cluster - 1) as f64);
        grid.extend([d, upper - d, s_star - d, s_star + d]);
    }
    grid.retain(|&s| s > 0.0 && s < upper);
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

/// Independent oracle for [`minimize`]: scans `T_r(s)` for every `r ≤ r_max`.
pub fn brute_force_thresholds(fam: &IsoparametricFamily, r_max: u64, grid_size: usize) -> Result<BruteForceThresholds> {
    if fam.degree() != Degree::Four {
        return Err(Error::Unsupported(format!("{fam}: critical orders are defined for degree 4")));
    }
    let b = rat(fam.m2() as i64, fam.m1() as i64);
    let bounds = upper_bounds(&b)?;
    if r_max < bounds.bound_rstarstar {
        return Err(Error::Precondition(format!(
            "r_max = {r_max} is below the closed-form bound {} for r**",
            bounds.bound_rstarstar
        )));
    }
    if grid_size < 16 {
        return Err(Error::Precondition(format!("grid size must be at least 16, got {grid_size}")));
    }
    let grid = adaptive_grid(fam, grid_size);
    let m = fam.hypersurface_dim() as f64;
    // T_r = (|A|⁴ − m|A|²) − (r−2) m² α²
    let base: Vec<(f64, f64, f64)> = grid
        .par_iter()
        .map(|&s| {
            let inv = invariants(fam, s).expect("grid stays inside the open interval");
            (s, inv.a2 * inv.a2 - m * inv.a2, m * m * inv.alpha2())
        })
        .collect();
    let counts: Vec<u32> = (2..=r_max)
        .into_par_iter()
        .map(|r| {
            let samples: Vec<(f64, f64)> =
                base.iter().map(|&(s, t2, w)| (s, t2 - (r - 2) as f64 * w)).collect();
            let f = |s: f64| residual_at(fam, r, s).expect("refinement stays inside the open interval");
            let scale = |s: f64| invariants(fam, s).map(|i| i.a2 * i.a2).unwrap_or(1.0);
            bracket_zeros(&samples, &f, &scale).iter().map(|b| b.multiplicity).sum()
        })
        .collect();
    let first = |k: u32| {
        counts
            .iter()
            .position(|&c| c >= k)
            .map(|i| i as u64 + 2)
            .ok_or_else(|| Error::Verification(format!("no r <= {r_max} with {k} zeros of T_r")))
    };
    Ok(BruteForceThresholds { rstar: first(1)?, rstarstar: first(4)?, counts })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_examples() {
        let one = int(1);
        assert!(matches!(ratio(&one, &rat(1, 2)), Err(Error::Pole(_))));
        assert_eq!(ratio(&one, &rat(1, 4)).unwrap(), rat(136, 3));
        assert_eq!(ratio(&int(2), &rat(5, 6)).unwrap(), rat(424, 5));
        assert!(ratio(&one, &int(0)).is_err());
        let v = ratio_f64(2.0, 5.0 / 6.0).unwrap();
        assert!((v - 84.8).abs() < 1e-12);
        assert!(matches!(ratio_f64(1.0, 0.5), Err(Error::Pole(_))));
    }

    #[test]
    fn ratio_at_bound_points_is_the_bound() {
        for b in [int(1), rat(8, 7), int(2), int(10000), rat(7, 3)] {
            let y = y0(&b);
            let ub = upper_bounds(&b).unwrap();
            assert_eq!(ratio(&b, &(&y / int(2))).unwrap(), ub.v_rstar);
            assert_eq!(ratio(&b, &((&y + int(1)) / int(2))).unwrap(), ub.v_rstarstar);
        }
    }

    #[test]
    fn bounds() {
        let ub = upper_bounds(&rat(8, 7)).unwrap();
        assert_eq!((ub.bound_rstar, ub.bound_rstarstar), (41, 51));
        let ub = upper_bounds(&int(10000)).unwrap();
        assert_eq!((ub.bound_rstar, ub.bound_rstarstar), (9, 400005));
        let ub = upper_bounds(&int(1)).unwrap();
        assert_eq!((ub.bound_rstar, ub.bound_rstarstar), (46, 46));
        assert!(ub.note.is_some());
        assert!(upper_bounds(&rat(1, 2)).is_err());
    }

    #[test]
    fn numerator_vanishes_at_y0() {
        for b in [int(1), rat(8, 7), int(10000)] {
            let n = derivative_numerator(&b);
            assert!(n.eval(&y0(&b)).is_zero());
            assert!(n.degree().unwrap() <= 6);
        }
    }

    #[test]
    fn integer_rule() {
        assert_eq!(order_from_value(37.57, "R").0, 38);
        assert_eq!(order_from_value(42.0, "R"), (42, order_from_value(42.0, "R").1));
        assert!(order_from_value(42.0, "R").1.is_some());
        assert_eq!(order_from_value(41.9999999, "R").0, 42);
        assert!(order_from_value(41.9999999, "R").1.is_some());
        assert!(order_from_value(41.6, "R").1.is_none());
    }

    #[test]
    fn minimize_examples() {
        let rep = minimize(&rat(8, 7)).unwrap();
        assert_eq!((rep.rstar, rep.rstarstar), (38, 47));
        assert!((rep.r1 - 37.569_685_989_367_6).abs() < 1e-9);
        assert!((rep.r2 - 46.173_926_319_444_9).abs() < 1e-9);
        let rep = minimize(&int(1)).unwrap();
        assert_eq!((rep.rstar, rep.rstarstar), (42, 42));
        assert!((rep.r1 - rep.r2).abs() < 1e-9);
        let rep = minimize(&int(10000)).unwrap();
        assert_eq!((rep.rstar, rep.rstarstar), (5, 312919));
        assert!((rep.rstarstar_value - 312_918.695_836_530).abs() < 1e-6);
        assert!(rep.warnings.is_empty());
        assert!(minimize(&rat(1, 2)).is_err());
    }

    #[test]
    fn brute_force_agrees() {
        let fam = IsoparametricFamily::new(Degree::Four, 7, 8).unwrap();
        let bf = brute_force_thresholds(&fam, 60, 50_000).unwrap();
        assert_eq!((bf.rstar, bf.rstarstar), (38, 47));
        assert!(brute_force_thresholds(&fam, 30, 50_000).is_err());
    }
}
