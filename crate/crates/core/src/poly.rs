//! Dense univariate polynomials over the rationals, with Sturm-certified real
//! root isolation.
//!
//! `QPoly` stores coefficients in ascending degree order. The representation
//! is canonical: no trailing zero coefficients, and the zero polynomial has an
//! empty coefficient vector.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::rational::{int, to_f64};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QPoly {
    coeffs: Vec<BigRational>,
}

impl QPoly {
    fn normalize(mut self) -> Self {
        while self.coeffs.last().is_some_and(Zero::is_zero) {
            self.coeffs.pop();
        }
        self
    }

    /// Builds from ascending coefficients; trailing zeros are dropped.
    pub fn new(coeffs: Vec<BigRational>) -> Self {
        QPoly { coeffs }.normalize()
    }

    pub fn from_ints(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| int(c)).collect())
    }

    pub fn zero() -> Self {
        QPoly { coeffs: Vec::new() }
    }

    pub fn constant(c: BigRational) -> Self {
        Self::new(vec![c])
    }

    /// The monomial `y`.
    pub fn x() -> Self {
        Self::from_ints(&[0, 1])
    }

    /// `a + b y`.
    pub fn linear(a: BigRational, b: BigRational) -> Self {
        Self::new(vec![a, b])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Ascending coefficients.
    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> BigRational {
        self.coeffs.get(i).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn leading(&self) -> Option<&BigRational> {
        self.coeffs.last()
    }

    pub fn eval(&self, y: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * y + c;
        }
        acc
    }

    /// Horner evaluation with coefficients rounded to `f64`.
    pub fn eval_f64(&self, y: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * y + to_f64(c))
    }

    /// Sum of `|c_k| |y|^k`, the natural scale for judging `|p(y)|` in floating point.
    pub fn magnitude_f64(&self, y: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * y.abs() + to_f64(c).abs())
    }

    pub fn sign_at(&self, y: &BigRational) -> Ordering {
        self.eval(y).cmp(&BigRational::zero())
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * int(k as i64))
                .collect(),
        )
    }

    pub fn scale(&self, k: &BigRational) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * k).collect())
    }

    /// `p(a + b y)`.
    pub fn compose_linear(&self, a: &BigRational, b: &BigRational) -> Self {
        let inner = Self::linear(a.clone(), b.clone());
        let mut acc = Self::zero();
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * &inner) + &Self::constant(c.clone());
        }
        acc
    }

    pub fn pow(&self, n: u32) -> Self {
        (0..n).fold(Self::constant(BigRational::one()), |acc, _| &acc * self)
    }

    /// Euclidean division; panics on a zero divisor.
    pub fn div_rem(&self, divisor: &Self) -> (Self, Self) {
        let dd = divisor.degree().expect("division by the zero polynomial");
        let lead = divisor.leading().unwrap().clone();
        let mut rem = self.coeffs.clone();
        let mut quot = vec![BigRational::zero(); self.coeffs.len().saturating_sub(dd)];
        while rem.len() > dd && !rem.is_empty() {
            let shift = rem.len() - 1 - dd;
            let factor = rem.last().unwrap() / &lead;
            for (i, c) in divisor.coeffs.iter().enumerate() {
                rem[shift + i] -= &factor * c;
            }
            quot[shift] = factor;
            rem.pop();
            while rem.last().is_some_and(Zero::is_zero) {
                rem.pop();
            }
        }
        (Self::new(quot), Self::new(rem))
    }

    /// Same polynomial divided by its leading coefficient.
    pub fn monic(&self) -> Self {
        match self.leading() {
            Some(l) => self.scale(&l.recip()),
            None => Self::zero(),
        }
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, other: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Yun's square-free decomposition: pairs `(f_i, i)` with `p = c * prod f_i^i`,
    /// each `f_i` square-free, monic, pairwise coprime and of positive degree.
    pub fn square_free_decomposition(&self) -> Vec<(QPoly, u32)> {
        let mut out = Vec::new();
        if self.degree().unwrap_or(0) == 0 {
            return out;
        }
        let dp = self.derivative();
        let a0 = self.gcd(&dp);
        let mut b = self.div_rem(&a0).0;
        let mut c = dp.div_rem(&a0).0;
        let mut d = &c - &b.derivative();
        let mut i = 1;
        loop {
            let a = b.gcd(&d);
            if a.degree().unwrap_or(0) > 0 {
                out.push((a.monic(), i));
            }
            b = b.div_rem(&a).0;
            if b.degree().unwrap_or(0) == 0 {
                break;
            }
            c = d.div_rem(&a).0;
            d = &c - &b.derivative();
            i += 1;
        }
        out
    }

    /// Product of the distinct irreducible factors (same real roots, all simple).
    pub fn square_free_part(&self) -> Self {
        self.div_rem(&self.gcd(&self.derivative())).0.monic()
    }
}

impl fmt::Display for QPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " {} ", if c.is_negative() { '-' } else { '+' })?;
            } else if c.is_negative() {
                write!(f, "-")?;
            }
            first = false;
            let a = c.abs();
            match k {
                0 => write!(f, "{a}")?,
                1 => write!(f, "({a})y")?,
                _ => write!(f, "({a})y^{k}")?,
            }
        }
        Ok(())
    }
}

impl Add for &QPoly {
    type Output = QPoly;
    fn add(self, rhs: &QPoly) -> QPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        QPoly::new((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl Sub for &QPoly {
    type Output = QPoly;
    fn sub(self, rhs: &QPoly) -> QPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        QPoly::new((0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl Mul for &QPoly {
    type Output = QPoly;
    fn mul(self, rhs: &QPoly) -> QPoly {
        if self.is_zero() || rhs.is_zero() {
            return QPoly::zero();
        }
        let mut out = vec![BigRational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        QPoly::new(out)
    }
}

impl Neg for &QPoly {
    type Output = QPoly;
    fn neg(self) -> QPoly {
        QPoly::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

/// Sturm sequence of a square-free polynomial.
#[derive(Clone, Debug)]
pub struct SturmChain {
    seq: Vec<QPoly>,
}

impl SturmChain {
    pub fn new(p: &QPoly) -> Self {
        let mut seq = vec![p.clone(), p.derivative()];
        while let Some(last) = seq.last() {
            if last.is_zero() {
                seq.pop();
                break;
            }
            let prev = &seq[seq.len() - 2];
            let (_, r) = prev.div_rem(last);
            // positive rescaling keeps sign patterns and coefficient sizes small
            let r = match r.leading() {
                Some(l) => r.scale(&(-l.abs().recip())),
                None => r,
            };
            seq.push(r);
        }
        SturmChain { seq }
    }

    pub fn len(&self) -> usize {
        self.seq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seq.is_empty()
    }

    /// Sign variations at `y`, zeros skipped.
    pub fn variations(&self, y: &BigRational) -> usize {
        let mut last = Ordering::Equal;
        let mut count = 0;
        for p in &self.seq {
            let s = p.sign_at(y);
            if s == Ordering::Equal {
                continue;
            }
            if last != Ordering::Equal && s != last {
                count += 1;
            }
            last = s;
        }
        count
    }

    /// Number of distinct real roots in the open interval `(a, b)`.
    pub fn count_open(&self, a: &BigRational, b: &BigRational) -> usize {
        if a >= b {
            return 0;
        }
        let at_b = usize::from(self.seq[0].eval(b).is_zero());
        (self.variations(a) - self.variations(b)).saturating_sub(at_b)
    }
}

/// A certified isolating interval for one real root.
#[derive(Clone, Debug, PartialEq)]
pub struct RootBracket {
    pub lo: BigRational,
    pub hi: BigRational,
    /// Multiplicity of the root in the original polynomial.
    pub multiplicity: u32,
    /// The square-free factor that has this root as a simple root.
    pub factor: QPoly,
}

impl RootBracket {
    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn midpoint(&self) -> BigRational {
        (&self.lo + &self.hi) / int(2)
    }

    /// Bisects with exact sign tests until the width is at most `tol`.
    pub fn refine(&mut self, tol: &BigRational) {
        let f = &self.factor;
        let mut s_lo = f.sign_at(&self.lo);
        while self.width() > *tol {
            let mid = self.midpoint();
            let s = f.sign_at(&mid);
            if s == Ordering::Equal {
                self.lo = mid.clone();
                self.hi = mid;
                return;
            }
            if s == s_lo {
                self.lo = mid;
                s_lo = s;
            } else {
                self.hi = mid;
            }
        }
    }

    /// Floating approximation of the root: safeguarded Newton on the
    /// square-free factor, confined to the certified bracket.
    pub fn polish(&self) -> f64 {
        let lo = to_f64(&self.lo);
        let hi = to_f64(&self.hi);
        if lo == hi {
            return lo;
        }
        newton_in_bracket(&self.factor, lo, hi)
    }
}

/// Refines a bracket inside `(0, 1)` until its width is below `2^-60` times the
/// distance to the nearer endpoint, then returns `(y, 1 − y)` in floating point,
/// both computed from the exact midpoint.
pub fn refine_in_unit_interval(br: &mut RootBracket) -> (f64, f64) {
    let rel = BigRational::new(1.into(), BigInt::from(2).pow(60));
    let floor = BigRational::new(1.into(), BigInt::from(2).pow(160));
    loop {
        let one_minus_hi = BigRational::one() - &br.hi;
        let near = if br.lo < one_minus_hi { br.lo.clone() } else { one_minus_hi };
        let tol = (&near * &rel).max(floor.clone());
        if br.width() <= tol {
            break;
        }
        br.refine(&tol);
    }
    let mid = br.midpoint();
    (to_f64(&mid), to_f64(&(BigRational::one() - &mid)))
}

/// Newton iteration on `p` that falls back to bisection whenever a step leaves
/// `[lo, hi]` or fails to reduce the bracket; the returned point is always inside.
pub fn newton_in_bracket(p: &QPoly, mut lo: f64, mut hi: f64) -> f64 {
    let dp = p.derivative();
    let f_lo = p.eval_f64(lo);
    let mut x = 0.5 * (lo + hi);
    for _ in 0..100 {
        let fx = p.eval_f64(x);
        if fx == 0.0 {
            return x;
        }
        if (fx > 0.0) == (f_lo > 0.0) {
            lo = x;
        } else {
            hi = x;
        }
        let d = dp.eval_f64(x);
        let mut next = if d != 0.0 { x - fx / d } else { f64::NAN };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 4.0 * f64::EPSILON * x.abs().max(f64::MIN_POSITIVE) || hi - lo <= f64::EPSILON * x.abs() {
            return next.clamp(lo, hi);
        }
        x = next;
    }
    x.clamp(lo, hi)
}

fn isolate_square_free(f: &QPoly, a: &BigRational, b: &BigRational, multiplicity: u32) -> Vec<RootBracket> {
    let chain = SturmChain::new(f);
    let mut out = Vec::new();
    let mut stack = vec![(a.clone(), b.clone(), chain.count_open(a, b))];
    let two = int(2);
    while let Some((lo, hi, n)) = stack.pop() {
        if n == 0 {
            continue;
        }
        if n == 1 {
            let s_lo = f.sign_at(&lo);
            let s_hi = f.sign_at(&hi);
            if s_lo != Ordering::Equal && s_hi != Ordering::Equal && s_lo != s_hi {
                out.push(RootBracket { lo, hi, multiplicity, factor: f.clone() });
                continue;
            }
        }
        let mid = (&lo + &hi) / &two;
        if f.eval(&mid).is_zero() {
            // exact rational root: widen to an isolating bracket with nonzero ends
            let mut delta = (&hi - &lo) / int(4);
            loop {
                let l = &mid - &delta;
                let h = &mid + &delta;
                if chain.count_open(&l, &h) == 1 && !f.eval(&l).is_zero() && !f.eval(&h).is_zero() {
                    let n_left = chain.count_open(&lo, &l);
                    let n_right = chain.count_open(&h, &hi);
                    out.push(RootBracket { lo: l.clone(), hi: h.clone(), multiplicity, factor: f.clone() });
                    stack.push((lo.clone(), l, n_left));
                    stack.push((h, hi.clone(), n_right));
                    break;
                }
                delta = delta / &two;
            }
            continue;
        }
        let n_left = chain.count_open(&lo, &mid);
        stack.push((mid.clone(), hi, n - n_left));
        stack.push((lo, mid, n_left));
    }
    out
}

/// All real roots of `p` in the open interval `(a, b)`, each with a certified
/// isolating bracket and its multiplicity, sorted and pairwise disjoint.
pub fn isolate_real_roots(p: &QPoly, a: &BigRational, b: &BigRational) -> Vec<RootBracket> {
    if p.degree().unwrap_or(0) == 0 || a >= b {
        return Vec::new();
    }
    let mut all: Vec<RootBracket> = p
        .square_free_decomposition()
        .iter()
        .flat_map(|(f, k)| isolate_square_free(f, a, b, *k))
        .collect();
    // roots of distinct square-free factors are distinct; shrink until disjoint
    loop {
        all.sort_by(|x, y| x.lo.cmp(&y.lo));
        let mut changed = false;
        for i in 1..all.len() {
            if all[i].lo < all[i - 1].hi {
                let tol0 = all[i - 1].width() / int(2);
                let tol1 = all[i].width() / int(2);
                all[i - 1].refine(&tol0);
                all[i].refine(&tol1);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    all
}

/// Number of distinct real roots of `p` in `(a, b)`.
pub fn count_distinct_roots(p: &QPoly, a: &BigRational, b: &BigRational) -> usize {
    if p.degree().unwrap_or(0) == 0 {
        return 0;
    }
    SturmChain::new(&p.square_free_part()).count_open(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn roots_f64(p: &QPoly, a: i64, b: i64) -> Vec<(f64, u32)> {
        isolate_real_roots(p, &int(a), &int(b))
            .into_iter()
            .map(|mut r| {
                r.refine(&ratio(1, 1 << 40));
                (r.polish(), r.multiplicity)
            })
            .collect()
    }

    #[test]
    fn arithmetic_and_division() {
        let p = QPoly::from_ints(&[-1, 0, 1]); // y^2 - 1
        let q = QPoly::from_ints(&[1, 1]);
        let (d, r) = p.div_rem(&q);
        assert_eq!(d, QPoly::from_ints(&[-1, 1]));
        assert!(r.is_zero());
        assert_eq!(&d * &q, p);
        assert_eq!(p.gcd(&QPoly::from_ints(&[-1, 1])), QPoly::from_ints(&[-1, 1]));
        assert_eq!(p.derivative(), QPoly::from_ints(&[0, 2]));
    }

    #[test]
    fn compose_and_power() {
        let p = QPoly::from_ints(&[0, 0, 1]);
        // (1 - y)^2
        assert_eq!(p.compose_linear(&int(1), &int(-1)), QPoly::from_ints(&[1, -2, 1]));
        assert_eq!(QPoly::from_ints(&[1, 1]).pow(3), QPoly::from_ints(&[1, 3, 3, 1]));
    }

    #[test]
    fn yun_decomposition() {
        // (y - 1/2)^2 (y - 1/3) (y^2 + 1)
        let a = QPoly::linear(ratio(-1, 2), int(1));
        let b = QPoly::linear(ratio(-1, 3), int(1));
        let c = QPoly::from_ints(&[1, 0, 1]);
        let p = &(&a.pow(2) * &b) * &c;
        let dec = p.square_free_decomposition();
        assert_eq!(dec.len(), 2);
        assert_eq!(dec[0], (&b * &c, 1));
        assert_eq!(dec[1], (a, 2));
    }

    #[test]
    fn sturm_counts_open_intervals() {
        // (y - 1/4)(y - 1/2)(y - 3/4)
        let p = &(&QPoly::linear(ratio(-1, 4), int(1)) * &QPoly::linear(ratio(-1, 2), int(1)))
            * &QPoly::linear(ratio(-3, 4), int(1));
        let chain = SturmChain::new(&p);
        assert_eq!(chain.count_open(&int(0), &int(1)), 3);
        assert_eq!(chain.count_open(&ratio(1, 4), &ratio(3, 4)), 1);
        assert_eq!(chain.count_open(&ratio(1, 4), &int(1)), 2);
        assert_eq!(chain.count_open(&int(0), &ratio(1, 2)), 1);
    }

    #[test]
    fn isolates_rational_and_irrational_roots() {
        // y^2 - 2 on (0, 2): sqrt 2; (2y - 1) on (0, 1): exact dyadic midpoint
        let r = roots_f64(&QPoly::from_ints(&[-2, 0, 1]), 0, 2);
        assert_eq!(r.len(), 1);
        assert!((r[0].0 - 2f64.sqrt()).abs() < 1e-15);
        let r = roots_f64(&QPoly::from_ints(&[-1, 2]), 0, 1);
        assert_eq!(r, vec![(0.5, 1)]);
    }

    #[test]
    fn reports_multiplicities_and_excludes_endpoints() {
        // y (y - 1/2)^2 (y - 1)^3 on (0, 1): only the double root is interior
        let half = QPoly::linear(ratio(-1, 2), int(1));
        let p = &(&QPoly::x() * &half.pow(2)) * &QPoly::from_ints(&[-1, 1]).pow(3);
        let r = roots_f64(&p, 0, 1);
        assert_eq!(r, vec![(0.5, 2)]);
    }

    #[test]
    fn close_roots_are_separated() {
        // roots 1/3 and 1/3 + 1e-9 (rational)
        let a = QPoly::linear(ratio(-1, 3), int(1));
        let b = QPoly::linear(-(ratio(1, 3) + ratio(1, 1_000_000_000)), int(1));
        let brackets = isolate_real_roots(&(&a * &b), &int(0), &int(1));
        assert_eq!(brackets.len(), 2);
        assert!(brackets[0].hi <= brackets[1].lo);
    }
}
