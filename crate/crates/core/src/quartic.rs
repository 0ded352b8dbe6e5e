//! The degree-four quartic `P_{b,r}(y)` in `y = cos² 2s`, built exactly from the
//! multiplicity ratio `b = m2/m1`.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::poly::{isolate_real_roots, refine_in_unit_interval, QPoly, RootBracket};
use crate::rational::{int, to_f64};

/// `P_{b,r}` together with its defining data.
#[derive(Clone, Debug, PartialEq)]
pub struct HarmonicQuartic {
    b: BigRational,
    r: u64,
    poly: QPoly,
}

/// `Q_b(y) = 2 [2b²(1−y)³ + b y (1−y) + 2y³]`.
pub fn q_part(b: &BigRational) -> QPoly {
    let y = QPoly::x();
    let one_minus = QPoly::from_ints(&[1, -1]);
    let t1 = one_minus.pow(3).scale(&(b * b * int(2)));
    let t2 = (&y * &one_minus).scale(b);
    let t3 = y.pow(3).scale(&int(2));
    (&(&t1 + &t2) + &t3).scale(&int(2))
}

/// `R_b(y) = (1−y) y (b(y−1) + y)²`; vanishes at `y₀ = b/(1+b)`.
pub fn r_part(b: &BigRational) -> QPoly {
    let inner = QPoly::linear(-b.clone(), b + int(1));
    &QPoly::from_ints(&[0, 1, -1]) * &inner.pow(2)
}

/// `y₀ = b/(1+b)`, the image of the minimal member.
pub fn y0(b: &BigRational) -> BigRational {
    b / (b + int(1))
}

impl HarmonicQuartic {
    pub fn build(b: &BigRational, r: u64) -> Result<Self> {
        if !b.is_positive() {
            return Err(Error::OutOfRange { value: to_f64(b), lower: 0.0, upper: f64::INFINITY });
        }
        let rr = BigRational::from_integer(r.into());
        let b2 = b * b;
        let one = BigRational::one();
        let c4 = &rr * (b + &one) * (b + &one);
        let c3 = -int(3) * &b2 * &rr - int(4) * &b2 - int(4) * b * &rr - &rr + int(4);
        let c2 = int(3) * &b2 * &rr + int(12) * &b2 + int(2) * b * &rr - int(2) * b;
        let c1 = -(&b2 * &rr) - int(12) * &b2 + int(2) * b;
        let c0 = int(4) * &b2;
        Ok(HarmonicQuartic { b: b.clone(), r, poly: QPoly::new(vec![c0, c1, c2, c3, c4]) })
    }

    pub fn b(&self) -> &BigRational {
        &self.b
    }

    pub fn r(&self) -> u64 {
        self.r
    }

    pub fn poly(&self) -> &QPoly {
        &self.poly
    }

    /// Coefficients from degree 4 down to degree 0.
    pub fn coeffs(&self) -> [BigRational; 5] {
        [4, 3, 2, 1, 0].map(|k| self.poly.coeff(k))
    }

    pub fn eval(&self, y: &BigRational) -> BigRational {
        self.poly.eval(y)
    }

    pub fn eval_f64(&self, y: f64) -> f64 {
        self.poly.eval_f64(y)
    }

    /// Roots in the open interval `(0, 1)`, with certified brackets.
    pub fn roots_in_unit_interval(&self) -> Vec<IsolatedRoot> {
        isolate_real_roots(&self.poly, &BigRational::zero(), &BigRational::one())
            .into_iter()
            .map(IsolatedRoot::from_bracket)
            .collect()
    }

    /// Number of roots in `(0, 1)` counted with multiplicity.
    pub fn root_count_with_multiplicity(&self) -> u32 {
        self.roots_in_unit_interval().iter().map(|r| r.multiplicity).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Odd,
    Even,
}

/// One root of `P_{b,r}` in `(0, 1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct IsolatedRoot {
    /// Exact isolating interval `[lo, hi] ⊂ (0, 1)`.
    pub lo: BigRational,
    pub hi: BigRational,
    /// Floating value of the root, inside `[lo, hi]`.
    pub refined: f64,
    /// `1 − y`, evaluated from the exact bracket so it keeps full relative accuracy near `y = 1`.
    pub complement: f64,
    pub multiplicity: u32,
    pub parity: Parity,
}

impl IsolatedRoot {
    fn from_bracket(mut br: RootBracket) -> Self {
        let (_, complement) = refine_in_unit_interval(&mut br);
        let refined = br.polish();
        IsolatedRoot {
            complement,
            refined,
            parity: if br.multiplicity % 2 == 1 { Parity::Odd } else { Parity::Even },
            multiplicity: br.multiplicity,
            lo: br.lo,
            hi: br.hi,
        }
    }

    pub fn midpoint(&self) -> BigRational {
        (&self.lo + &self.hi) / int(2)
    }

    /// The member `s = ½ arccos √y ∈ (0, π/4)` of the degree-4 family.
    pub fn parameter(&self) -> f64 {
        0.5 * self.complement.sqrt().atan2(self.refined.sqrt())
    }
}

/// Both sides of `b² P_{1/b,r}(1−y) = P_{b,r}(y)`, evaluated exactly.
pub fn symmetry_check(b: &BigRational, r: u64, y: &BigRational) -> Result<(BigRational, BigRational)> {
    let lhs = HarmonicQuartic::build(&b.recip(), r)?.eval(&(BigRational::one() - y)) * b * b;
    let rhs = HarmonicQuartic::build(b, r)?.eval(y);
    Ok((lhs, rhs))
}

/// Values attached to a point `x = cos 8s` under `y = (2 ± √(2(x+1)))/4`.
#[derive(Clone, Debug, PartialEq)]
pub struct EqualMultConsistency {
    pub y: [f64; 2],
    /// `P_{1,r}` at both `y` values.
    pub quartic_values: [f64; 2],
    /// `r x² + 20x + 44 − r`, exact.
    pub quadratic_value: BigRational,
}

pub fn equal_mult_consistency(r: u64, x: &BigRational) -> Result<EqualMultConsistency> {
    if x.abs() >= BigRational::one() {
        return Err(Error::OutOfRange { value: to_f64(x), lower: -1.0, upper: 1.0 });
    }
    let p = HarmonicQuartic::build(&BigRational::one(), r)?;
    let d = (2.0 * (to_f64(x) + 1.0)).sqrt();
    let y = [(2.0 + d) / 4.0, (2.0 - d) / 4.0];
    let rr = BigRational::from_integer(r.into());
    let quadratic_value = &rr * x * x + int(20) * x + int(44) - &rr;
    Ok(EqualMultConsistency { y, quartic_values: y.map(|v| p.eval_f64(v)), quadratic_value })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn endpoint_values_and_y0() {
        for b in [ratio(8, 7), int(1), int(10000), ratio(1, 3)] {
            for r in [2, 5, 47] {
                let p = HarmonicQuartic::build(&b, r).unwrap();
                assert_eq!(p.eval(&int(0)), int(4) * &b * &b);
                assert_eq!(p.eval(&int(1)), int(4));
                let bp1 = &b + int(1);
                assert_eq!(p.eval(&y0(&b)), int(6) * &b * &b / (&bp1 * &bp1));
            }
        }
    }

    #[test]
    fn decomposition() {
        let b = ratio(8, 7);
        let p = HarmonicQuartic::build(&b, 47).unwrap();
        let want = &q_part(&b) - &r_part(&b).scale(&int(47));
        assert_eq!(p.poly(), &want);
    }

    #[test]
    fn rejects_nonpositive_b() {
        assert!(HarmonicQuartic::build(&int(0), 3).is_err());
        assert!(HarmonicQuartic::build(&ratio(-1, 2), 3).is_err());
    }

    #[test]
    fn root_counts_at_the_thresholds() {
        let b = ratio(8, 7);
        assert!(HarmonicQuartic::build(&b, 37).unwrap().roots_in_unit_interval().is_empty());
        assert_eq!(HarmonicQuartic::build(&b, 38).unwrap().roots_in_unit_interval().len(), 2);
        assert_eq!(HarmonicQuartic::build(&b, 46).unwrap().roots_in_unit_interval().len(), 2);
        assert_eq!(HarmonicQuartic::build(&b, 47).unwrap().roots_in_unit_interval().len(), 4);
        assert!(HarmonicQuartic::build(&int(10000), 5).unwrap().roots_in_unit_interval().len() >= 2);
        assert!(HarmonicQuartic::build(&int(10000), 4).unwrap().roots_in_unit_interval().is_empty());
    }

    #[test]
    fn brackets_contain_refined_values() {
        let p = HarmonicQuartic::build(&int(10000), 312919).unwrap();
        let roots = p.roots_in_unit_interval();
        assert_eq!(roots.len(), 4);
        for r in &roots {
            assert!(to_f64(&r.lo) <= r.refined && r.refined <= to_f64(&r.hi));
            assert!((r.refined + r.complement - 1.0).abs() < 1e-15);
            assert_eq!(r.parity, Parity::Odd);
        }
    }

    #[test]
    fn symmetry_examples() {
        for (b, r, y) in [(int(2), 10, ratio(1, 3)), (int(1), 42, ratio(1, 2)), (ratio(8, 7), 47, int(0))] {
            let (l, rhs) = symmetry_check(&b, r, &y).unwrap();
            assert_eq!(l, rhs);
        }
    }

    #[test]
    fn change_of_variable() {
        let c = equal_mult_consistency(42, &ratio(-1, 3)).unwrap();
        assert!(c.quadratic_value.is_zero());
        assert!(c.quartic_values.iter().all(|v| v.abs() < 1e-10), "{:?}", c.quartic_values);
        let c = equal_mult_consistency(42, &int(0)).unwrap();
        assert_eq!(c.quadratic_value, int(2));
        assert!(c.quartic_values.iter().all(|v| v.abs() > 1e-3));
        assert!(equal_mult_consistency(42, &int(1)).is_err());
    }
}
