//! The CMC r-harmonicity criterion and its solution for isoparametric families.
//!
//! A non-minimal CMC hypersurface with constant `|A|²` in a space form of
//! curvature `c` is proper r-harmonic exactly when
//! `T = |A|⁴ − m c |A|² − (r−2) m² c α²` vanishes.

use std::cmp::Ordering;
use std::f64::consts::PI;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, One, Signed, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::family::{invariants, minimal_parameter, CurvatureInvariants, Degree, IsoparametricFamily};
use crate::poly::{isolate_real_roots, refine_in_unit_interval, QPoly};
use crate::quartic::HarmonicQuartic;
use crate::rational::{int, ratio};

/// Inputs of the criterion, generic over `f64` and exact rationals.
#[derive(Clone, Debug, PartialEq)]
pub struct HarmonicityQuery<T> {
    /// Sectional curvature of the ambient space form.
    pub c: T,
    pub m: u32,
    pub r: u64,
    pub a2: T,
    pub alpha2: T,
}

impl<T> HarmonicityQuery<T>
where
    T: Clone + Num + FromPrimitive,
{
    pub fn new(c: T, m: u32, r: u64, a2: T, alpha2: T) -> Self {
        HarmonicityQuery { c, m, r, a2, alpha2 }
    }

    /// `a2² − m c a2 − (r−2) m² c α²`.
    pub fn residual(&self) -> T {
        let m = T::from_u32(self.m).expect("m fits the scalar type");
        let rm2 = T::from_i128(self.r as i128 - 2).expect("r fits the scalar type");
        let a2 = self.a2.clone();
        a2.clone() * a2.clone()
            - m.clone() * self.c.clone() * a2
            - rm2 * m.clone() * m * self.c.clone() * self.alpha2.clone()
    }
}

pub fn residual<T: Clone + Num + FromPrimitive>(q: &HarmonicityQuery<T>) -> T {
    q.residual()
}

/// Decides whether a space form with `c ≤ 0` admits a proper solution.
///
/// On `a2 ≥ m α² ≥ 0` the criterion reads `a2² + (−c) m a2 + (r−2)(−c) m² α²`.
/// When every coefficient is nonnegative and the `a2²` coefficient is positive,
/// `T = 0` forces `a2 = 0` and then `α² ≤ a2/m = 0`, so only the minimal case
/// survives. The function checks those coefficient signs and returns `true`
/// when they certify non-existence.
pub fn nonexistence_flat_or_negative<T>(q: &HarmonicityQuery<T>) -> Result<bool>
where
    T: Clone + Num + FromPrimitive + std::ops::Neg<Output = T> + PartialOrd,
{
    if q.c > T::zero() {
        return Err(Error::Precondition("non-existence applies to c <= 0 only".into()));
    }
    if q.r < 2 || q.m == 0 {
        return Err(Error::Precondition(format!("need r >= 2 and m >= 1, got r={} m={}", q.r, q.m)));
    }
    let m = T::from_u32(q.m).unwrap();
    let rm2 = T::from_u64(q.r - 2).unwrap();
    let lead = T::one();
    let lin = -(m.clone() * q.c.clone());
    let quad = -(rm2 * m.clone() * m * q.c.clone());
    let zero = T::zero();
    Ok(lead > zero && lin >= zero && quad >= zero)
}

/// `T_r(s)` for the member `M_s` of an isoparametric family in the unit sphere.
pub fn residual_at(fam: &IsoparametricFamily, r: u64, s: f64) -> Result<f64> {
    Ok(residual_of(&invariants(fam, s)?, r))
}

pub fn residual_of(inv: &CurvatureInvariants, r: u64) -> f64 {
    HarmonicityQuery::new(1.0, inv.m, r, inv.a2, inv.alpha2()).residual()
}

/// Reduced quadratic `a x² + b x + c` in `x = cos(2ℓs)` for equal multiplicities.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReducedQuadratic {
    pub degree: Degree,
    pub r: u64,
    pub a: BigInt,
    pub b: BigInt,
    pub c: BigInt,
}

/// A root of the reduced quadratic.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticRoot {
    pub x: f64,
    /// Present when the discriminant is a perfect square.
    pub exact: Option<BigRational>,
    /// 2 for a double root.
    pub multiplicity: u32,
}

impl ReducedQuadratic {
    pub fn discriminant(&self) -> BigInt {
        &self.b * &self.b - BigInt::from(4) * &self.a * &self.c
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        let (a, b, c) = (
            BigRational::from_integer(self.a.clone()),
            BigRational::from_integer(self.b.clone()),
            BigRational::from_integer(self.c.clone()),
        );
        a * x * x + b * x + c
    }

    /// Real roots in the open interval `(−1, 1)`, ascending.
    pub fn roots(&self) -> Vec<QuadraticRoot> {
        degree_roots(self)
    }
}

/// Coefficients of the reduced quadratic: `(r, 14, 22−r)` for `ℓ = 3`,
/// `(r, 20, 44−r)` for `ℓ = 4` and `(r, 32, 112−r)` for `ℓ = 6`.
pub fn degree_quadratic(fam: &IsoparametricFamily, r: u64) -> Result<ReducedQuadratic> {
    if !fam.equal_multiplicities() {
        return Err(Error::Unsupported(format!("{fam}: the reduced quadratic needs m1 = m2")));
    }
    quadratic_for_degree(fam.degree(), r)
}

pub fn quadratic_for_degree(degree: Degree, r: u64) -> Result<ReducedQuadratic> {
    let (b, c0) = match degree {
        Degree::Three => (14, 22),
        Degree::Four => (20, 44),
        Degree::Six => (32, 112),
        _ => return Err(Error::Unsupported(format!("no reduced quadratic for degree {degree}"))),
    };
    let r_big = BigInt::from(r);
    Ok(ReducedQuadratic { degree, r, a: r_big.clone(), b: BigInt::from(b), c: BigInt::from(c0) - r_big })
}

/// Compares `sigma·√d` with `t` exactly.
fn cmp_signed_sqrt(sigma: i32, d: &BigInt, t: &BigInt) -> Ordering {
    let sq = t * t;
    if sigma > 0 {
        if t.is_negative() {
            Ordering::Greater
        } else {
            d.cmp(&sq)
        }
    } else if !t.is_negative() {
        if d.is_zero() && t.is_zero() {
            Ordering::Equal
        } else {
            Ordering::Less
        }
    } else {
        sq.cmp(d)
    }
}

/// Roots of the reduced quadratic strictly inside `(−1, 1)`.
///
/// The discriminant sign and the comparisons with `±1` are decided exactly;
/// irrational roots are then evaluated in floating point.
pub fn degree_roots(q: &ReducedQuadratic) -> Vec<QuadraticRoot> {
    let d = q.discriminant();
    if d.is_negative() || q.a.is_zero() {
        return Vec::new();
    }
    let sqrt_d = d.sqrt();
    let perfect = &sqrt_d * &sqrt_d == d;
    let two_a = BigInt::from(2) * &q.a;
    let signs: &[i32] = if d.is_zero() { &[1] } else { &[-1, 1] };
    let mut out = Vec::new();
    for &sigma in signs {
        // x > −1  ⟺  σ√d > b − 2a ;  x < 1  ⟺  σ√d < b + 2a   (a > 0)
        let above = cmp_signed_sqrt(sigma, &d, &(&q.b - &two_a)) == Ordering::Greater;
        let below = cmp_signed_sqrt(sigma, &d, &(&q.b + &two_a)) == Ordering::Less;
        if !(above && below) {
            continue;
        }
        let exact = perfect.then(|| {
            BigRational::new(-&q.b + BigInt::from(sigma) * &sqrt_d, two_a.clone())
        });
        let x = match &exact {
            Some(e) => crate::rational::to_f64(e),
            None => {
                let (a, b, c) = (big_f64(&q.a), big_f64(&q.b), big_f64(&q.c));
                let sd = big_f64(&d).sqrt();
                // cancellation-free pair of roots
                let qq = -0.5 * (b + b.signum() * sd);
                let (r1, r2) = (qq / a, c / qq);
                let (lo, hi) = if r1 < r2 { (r1, r2) } else { (r2, r1) };
                if sigma < 0 {
                    lo
                } else {
                    hi
                }
            }
        };
        out.push(QuadraticRoot { x, exact, multiplicity: if d.is_zero() { 2 } else { 1 } });
    }
    out
}

fn big_f64(x: &BigInt) -> f64 {
    crate::rational::to_f64(&BigRational::from_integer(x.clone()))
}

/// Parameters `s ∈ (0, π/ℓ)` solving `cos(2ℓ s) = x` for each admissible root.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct ParameterSet {
    /// `(s, index of the root it came from)`, ascending in `s`.
    pub values: Vec<(f64, usize)>,
    /// Roots that were dropped, with the reason.
    pub notes: Vec<String>,
}

pub fn roots_to_parameters(degree: Degree, roots: &[f64]) -> ParameterSet {
    let two_l = 2.0 * degree.get() as f64;
    let mut out = ParameterSet::default();
    for (i, &x) in roots.iter().enumerate() {
        if !(x > -1.0 && x < 1.0) {
            out.notes.push(format!(
                "root x = {x} excluded: cos(2ls) = +-1 is a focal variety or the minimal member, not a proper solution"
            ));
            continue;
        }
        let t = x.acos();
        out.values.push((t / two_l, i));
        out.values.push(((2.0 * PI - t) / two_l, i));
    }
    out.values.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

/// How a solution was obtained.
#[derive(Clone, Debug, PartialEq)]
pub enum SolutionSource {
    /// `cot² s = r − 1` for small spheres.
    Sphere,
    /// Root `u = sin² s` of the Clifford polynomial.
    Clifford { u: f64 },
    /// Root `x = cos(2ℓs)` of the reduced quadratic.
    Quadratic { x: f64, exact: Option<BigRational> },
    /// Root `y = cos² 2s` of `P_{b,r}`.
    Quartic { y: f64, lo: BigRational, hi: BigRational },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub s: f64,
    pub invariants: CurvatureInvariants,
    /// `T_r(s)` re-evaluated from the invariants.
    pub residual: f64,
    /// Multiplicity of `s` as a zero of `T_r`.
    pub multiplicity: u32,
    pub source: SolutionSource,
}

impl Solution {
    /// `|T_r(s)| / |A|⁴`.
    pub fn relative_residual(&self) -> f64 {
        self.residual.abs() / (self.invariants.a2 * self.invariants.a2)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    None,
    Some,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassificationResult {
    pub family: IsoparametricFamily,
    pub r: u64,
    pub solutions: Vec<Solution>,
    /// Sum of multiplicities.
    pub count: u32,
    pub regime: Regime,
    pub notes: Vec<String>,
}

/// Relative tolerance for re-verifying solutions through the invariants.
pub const CLASSIFY_TOLERANCE: f64 = 1e-9;

/// Exact polynomial in `u = sin² s` whose roots give r-harmonic generalized
/// Clifford tori: `T · u²(1−u)² = A² − m A u(1−u) − (r−2) B u(1−u)` with
/// `A = m1 (1−u)² + m2 u²` and `B = (m1 (1−u) − m2 u)²`.
pub fn clifford_polynomial(m1: u32, m2: u32, r: u64) -> QPoly {
    let (m1, m2) = (int(m1 as i64), int(m2 as i64));
    let m = &m1 + &m2;
    let one_minus = QPoly::from_ints(&[1, -1]);
    let u = QPoly::x();
    let a = &one_minus.pow(2).scale(&m1) + &u.pow(2).scale(&m2);
    let b = (&one_minus.scale(&m1) - &u.scale(&m2)).pow(2);
    let w = &u * &one_minus;
    let rm2 = BigRational::from_integer(BigInt::from(r) - 2);
    &(&(&a * &a) - &(&a * &w).scale(&m)) - &(&b * &w).scale(&rm2)
}

/// All proper r-harmonic members `M_s` of the family.
pub fn classify(fam: &IsoparametricFamily, r: u64) -> Result<ClassificationResult> {
    if r < 2 {
        return Err(Error::Precondition(format!("order r must be >= 2, got {r}")));
    }
    let mut notes = Vec::new();
    let mut found: Vec<(f64, u32, SolutionSource)> = Vec::new();
    match fam.degree() {
        Degree::One => {
            // m² cot² s (cot² s − (r−1)) = 0
            let s = (1.0 / ((r - 1) as f64).sqrt()).atan();
            found.push((s, 1, SolutionSource::Sphere));
            found.push((PI - s, 1, SolutionSource::Sphere));
            notes.push("the two members are the same small sphere with opposite orientations".into());
        }
        Degree::Two => {
            let p = clifford_polynomial(fam.m1(), fam.m2(), r);
            let u0 = ratio(fam.m1() as i64, (fam.m1() + fam.m2()) as i64);
            for mut br in isolate_real_roots(&p, &BigRational::zero(), &BigRational::one()) {
                if br.lo <= u0 && u0 <= br.hi && br.factor.eval(&u0).is_zero() {
                    notes.push(format!("root u = {u0} is the minimal Clifford torus and is not proper"));
                    continue;
                }
                let (u, v) = refine_in_unit_interval(&mut br);
                found.push((u.sqrt().atan2(v.sqrt()), br.multiplicity, SolutionSource::Clifford { u }));
            }
        }
        Degree::Four if !fam.equal_multiplicities() => {
            let b = ratio(fam.m2() as i64, fam.m1() as i64);
            for root in HarmonicQuartic::build(&b, r)?.roots_in_unit_interval() {
                found.push((
                    root.parameter(),
                    root.multiplicity,
                    SolutionSource::Quartic { y: root.refined, lo: root.lo.clone(), hi: root.hi.clone() },
                ));
            }
        }
        degree => {
            let roots = degree_roots(&degree_quadratic(fam, r)?);
            let xs: Vec<f64> = roots.iter().map(|q| q.x).collect();
            let params = roots_to_parameters(degree, &xs);
            notes.extend(params.notes);
            for (s, i) in params.values {
                let q = &roots[i];
                found.push((s, q.multiplicity, SolutionSource::Quadratic { x: q.x, exact: q.exact.clone() }));
            }
        }
    }
    let mut solutions = Vec::with_capacity(found.len());
    for (s, multiplicity, source) in found {
        let inv = invariants(fam, s)?;
        let residual = residual_of(&inv, r);
        let sol = Solution { s, invariants: inv, residual, multiplicity, source };
        if !(sol.relative_residual() < CLASSIFY_TOLERANCE) {
            return Err(Error::Verification(format!(
                "{fam}, r={r}: member s={s} has relative residual {:e}",
                sol.relative_residual()
            )));
        }
        solutions.push(sol);
    }
    solutions.sort_by(|a, b| a.s.total_cmp(&b.s));
    let count = solutions.iter().map(|s| s.multiplicity).sum();
    Ok(ClassificationResult {
        family: *fam,
        r,
        count,
        regime: if count > 0 { Regime::Some } else { Regime::None },
        solutions,
        notes,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BracketKind {
    SignChange,
    /// A zero of even order: a local extremum of `T_r` touching zero.
    Tangency,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanBracket {
    pub lo: f64,
    pub hi: f64,
    /// Refined location of the zero.
    pub s: f64,
    pub kind: BracketKind,
    pub multiplicity: u32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanReport {
    /// `(s, T_r(s))` on the uniform grid.
    pub samples: Vec<(f64, f64)>,
    /// Zeros at proper (non-minimal) members.
    pub brackets: Vec<ScanBracket>,
    /// Zeros at the minimal member, where `T_r = |A|²(|A|² − m)` vanishes for
    /// the minimal Clifford torus. Not counted.
    pub minimal: Vec<ScanBracket>,
}

impl ScanReport {
    /// Zeros counted with multiplicity.
    pub fn count(&self) -> u32 {
        self.brackets.iter().map(|b| b.multiplicity).sum()
    }

    pub fn has_negative_sample(&self) -> bool {
        self.samples.iter().any(|&(_, t)| t < 0.0)
    }
}

/// Default distance kept from the endpoints of `(0, π/ℓ)`.
pub const DEFAULT_EPS: f64 = 1e-4;

/// Relative size below which a local extremum of `T_r` counts as touching zero.
pub const TANGENCY_TOLERANCE: f64 = 1e-6;

/// Relative size `|T_r| / |A|⁴` treated as rounding noise around the minimal member.
pub const MINIMAL_NOISE: f64 = 1e-10;

/// Brute-force sign scan of `T_r` on a uniform grid of `[eps, π/ℓ − eps]`.
///
/// Sign changes are refined by bisection. Local minima on the positive side
/// (and maxima on the negative side) are refined by golden-section search; an
/// extremum that crosses zero yields two sign changes and one that comes within
/// `1e−6 |A|⁴` of zero is reported as a tangency of multiplicity 2. Zeros at
/// minimal members go to [`ScanReport::minimal`] and are not counted.
pub fn scan_residual(fam: &IsoparametricFamily, r: u64, grid_size: usize, eps: f64) -> Result<ScanReport> {
    if grid_size < 16 {
        return Err(Error::Precondition(format!("grid size must be at least 16, got {grid_size}")));
    }
    let upper = fam.degree().period();
    if !(eps > 0.0 && 2.0 * eps < upper) {
        return Err(Error::Precondition(format!("eps must lie in (0, {}), got {eps}", upper / 2.0)));
    }
    let step = (upper - 2.0 * eps) / (grid_size - 1) as f64;
    let samples: Vec<(f64, f64)> = (0..grid_size)
        .into_par_iter()
        .map(|i| {
            let s = if i + 1 == grid_size { upper - eps } else { eps + i as f64 * step };
            (s, residual_at(fam, r, s).expect("grid stays inside the open interval"))
        })
        .collect();
    let f = |s: f64| residual_at(fam, r, s).expect("refinement stays inside the open interval");
    let scale = |s: f64| invariants(fam, s).map(|i| i.a2 * i.a2).unwrap_or(1.0);
    // A zero of high order at the minimal member smears into several sign
    // changes under rounding; they are recognized by |T| staying at noise level
    // all the way back to s*.
    let s_star = minimal_parameter(fam);
    let at_minimal = |b: &ScanBracket| {
        (0..=16).all(|i| {
            let s = s_star + (b.s - s_star) * i as f64 / 16.0;
            f(s).abs() <= MINIMAL_NOISE * scale(s)
        })
    };
    let (minimal, brackets) = bracket_zeros(&samples, &f, &scale).into_iter().partition(at_minimal);
    Ok(ScanReport { samples, brackets, minimal })
}

/// Shared bracketing logic for sampled residuals.
pub(crate) fn bracket_zeros(
    samples: &[(f64, f64)],
    f: &(dyn Fn(f64) -> f64 + Sync),
    scale: &(dyn Fn(f64) -> f64 + Sync),
) -> Vec<ScanBracket> {
    let neg = |t: f64| t < 0.0;
    let n = samples.len();
    let mut out: Vec<ScanBracket> = (0..n - 1)
        .into_par_iter()
        .flat_map_iter(|i| {
            let (s0, t0) = samples[i];
            let (s1, t1) = samples[i + 1];
            let mut local = Vec::new();
            if neg(t0) != neg(t1) {
                local.push(ScanBracket {
                    lo: s0,
                    hi: s1,
                    s: bisect(f, s0, s1),
                    kind: BracketKind::SignChange,
                    multiplicity: 1,
                });
            }
            if i > 0 {
                let (sp, tp) = samples[i - 1];
                let is_min = !neg(t0) && !neg(tp) && !neg(t1) && t0 <= tp && t0 < t1;
                let is_max = neg(t0) && neg(tp) && neg(t1) && t0 >= tp && t0 > t1;
                if is_min || is_max {
                    let sign = if is_min { 1.0 } else { -1.0 };
                    let (se, te) = golden(&|s| sign * f(s), sp, s1);
                    let te = sign * te;
                    if neg(te) != neg(t0) {
                        local.push(ScanBracket {
                            lo: sp,
                            hi: se,
                            s: bisect(f, sp, se),
                            kind: BracketKind::SignChange,
                            multiplicity: 1,
                        });
                        local.push(ScanBracket {
                            lo: se,
                            hi: s1,
                            s: bisect(f, se, s1),
                            kind: BracketKind::SignChange,
                            multiplicity: 1,
                        });
                    } else if te.abs() <= TANGENCY_TOLERANCE * scale(se) {
                        local.push(ScanBracket { lo: sp, hi: s1, s: se, kind: BracketKind::Tangency, multiplicity: 2 });
                    }
                }
            }
            local
        })
        .collect();
    out.sort_by(|a, b| a.s.total_cmp(&b.s));
    out
}

fn bisect(f: &(dyn Fn(f64) -> f64 + Sync), mut lo: f64, mut hi: f64) -> f64 {
    let neg_lo = f(lo) < 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (f(mid) < 0.0) == neg_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Golden-section minimization on `[a, b]`; returns `(argmin, min)`.
fn golden(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if b - a <= 1e-15 * b.abs().max(1.0) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

fn cot(t: f64) -> f64 {
    t.cos() / t.sin()
}

/// `T_r(s)` written directly in tangents and cotangents of `s`, term by term
/// as the principal curvatures appear for `ℓ ∈ {3, 4, 6}`.
pub fn raw_display(fam: &IsoparametricFamily, r: u64, s: f64) -> Result<f64> {
    let rf = r as f64;
    let (m1, m2) = (fam.m1() as f64, fam.m2() as f64);
    let p6 = PI / 6.0;
    match fam.degree() {
        Degree::Three => {
            let (a, b, c) = ((p6 - s).tan(), (s + p6).tan(), cot(s));
            let lin = a - b + c;
            let sq = a * a + b * b + c * c;
            Ok(m1 * m1 * ((2.0 - rf) * lin * lin + sq * sq - 3.0 * sq))
        }
        Degree::Six => {
            let t = [(p6 - s).tan(), s.tan(), (s + p6).tan()];
            let k = [cot(p6 - s), cot(s), cot(s + p6)];
            let lin = -t[0] + t[1] + t[2] + k[0] - k[1] - k[2];
            let sq: f64 = t.iter().chain(k.iter()).map(|v| v * v).sum();
            Ok(m1 * m1 * ((2.0 - rf) * lin * lin + sq * sq - 6.0 * sq))
        }
        Degree::Four => {
            let (t, u) = (s.tan(), (s + PI / 4.0).tan());
            let sum = m1 * t * t + m1 / (t * t) + m2 * u * u + m2 / (u * u);
            let lin = m1 * cot(2.0 * s) - m2 * (2.0 * s).tan();
            Ok(-4.0 * (rf - 2.0) * lin * lin + sum * sum - 2.0 * (m1 + m2) * sum)
        }
        d => Err(Error::Unsupported(format!("no trigonometric display for degree {d}"))),
    }
}

/// `T_r(s)` as a positive factor times the reduced polynomial expression.
///
/// For `ℓ = 4` with `m1 ≠ m2` this is `4 m1² P_{b,r}(y) / (y²(1−y)²)`, `y = cos² 2s`.
pub fn reduced_form(fam: &IsoparametricFamily, r: u64, s: f64) -> Result<f64> {
    let rf = r as f64;
    let m1 = fam.m1() as f64;
    match fam.degree() {
        Degree::Three => {
            let bracket = rf * (12.0 * s).cos() - rf + 28.0 * (6.0 * s).cos() + 44.0;
            let den = 2.0 * (2.0 * s).cos() + 1.0;
            Ok(9.0 * m1 * m1 * bracket / (8.0 * s.sin().powi(4) * den.powi(4)))
        }
        Degree::Six => {
            let bracket = rf * (24.0 * s).cos() - rf + 64.0 * (12.0 * s).cos() + 224.0;
            let den = 2.0 * (4.0 * s).cos() + 1.0;
            Ok(9.0 * m1 * m1 * bracket / (32.0 * (s.sin() * s.cos()).powi(4) * den.powi(4)))
        }
        Degree::Four if fam.equal_multiplicities() => {
            let bracket = rf * (16.0 * s).cos() - rf + 40.0 * (8.0 * s).cos() + 88.0;
            Ok(2.0 * m1 * m1 * bracket / (4.0 * s).sin().powi(4))
        }
        Degree::Four => {
            let b = ratio(fam.m2() as i64, fam.m1() as i64);
            let p = HarmonicQuartic::build(&b, r)?;
            let (c, sn) = ((2.0 * s).cos(), (2.0 * s).sin());
            let (y, w) = (c * c, sn * sn);
            Ok(4.0 * m1 * m1 * p.eval_f64(y) / (y * y * w * w))
        }
        d => Err(Error::Unsupported(format!("no reduced form for degree {d}"))),
    }
}

/// `|raw − reduced|` relative to the size `|A|⁴` of the leading term.
pub fn display_discrepancy(fam: &IsoparametricFamily, r: u64, s: f64) -> Result<f64> {
    let raw = raw_display(fam, r, s)?;
    let red = reduced_form(fam, r, s)?;
    let a2 = invariants(fam, s)?.a2;
    Ok((raw - red).abs() / raw.abs().max(red.abs()).max(a2 * a2))
}

/// `T_r` from exact invariants: `(1, m, r, a2, α²)` with rational entries.
pub fn exact_residual(m: u32, r: u64, c: i64, a2: &BigRational, alpha2: &BigRational) -> BigRational {
    HarmonicityQuery::new(int(c), m, r, a2.clone(), alpha2.clone()).residual()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::to_f64;

    fn fam(l: u32, m1: u32, m2: u32) -> IsoparametricFamily {
        IsoparametricFamily::new(Degree::from_u32(l).unwrap(), m1, m2).unwrap()
    }

    #[test]
    fn residual_examples() {
        assert_eq!(HarmonicityQuery::new(1.0, 3, 3, 6.0, 2.0).residual(), 0.0);
        assert_eq!(HarmonicityQuery::new(0.0, 7, 5, 0.0, 0.0).residual(), 0.0);
        assert_eq!(HarmonicityQuery::new(1.0, 2, 2, 2.0, 0.5).residual(), 0.0);
        let q = HarmonicityQuery::new(int(1), 3, 3, int(6), int(2));
        assert!(q.residual().is_zero());
    }

    #[test]
    fn nonexistence_examples() {
        assert!(nonexistence_flat_or_negative(&HarmonicityQuery::new(0.0, 5, 3, 0.0, 0.0)).unwrap());
        assert!(nonexistence_flat_or_negative(&HarmonicityQuery::new(-1.0, 3, 4, 0.0, 0.0)).unwrap());
        assert!(matches!(
            nonexistence_flat_or_negative(&HarmonicityQuery::new(1.0, 3, 3, 0.0, 0.0)),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn quadratic_coefficients() {
        let q = quadratic_for_degree(Degree::Three, 20).unwrap();
        assert_eq!((q.a, q.b, q.c), (20.into(), 14.into(), 2.into()));
        let q = quadratic_for_degree(Degree::Four, 42).unwrap();
        assert_eq!((q.a, q.b, q.c), (42.into(), 20.into(), 2.into()));
        let q = quadratic_for_degree(Degree::Six, 110).unwrap();
        assert_eq!((q.a, q.b, q.c), (110.into(), 32.into(), 2.into()));
        assert!(matches!(degree_quadratic(&fam(4, 1, 2), 42), Err(Error::Unsupported(_))));
        assert!(matches!(quadratic_for_degree(Degree::Two, 42), Err(Error::Unsupported(_))));
    }

    #[test]
    fn exact_roots_at_thresholds() {
        let roots = degree_roots(&quadratic_for_degree(Degree::Three, 20).unwrap());
        let ex: Vec<_> = roots.iter().map(|r| r.exact.clone().unwrap()).collect();
        assert_eq!(ex, vec![ratio(-1, 2), ratio(-1, 5)]);
        assert!(degree_roots(&quadratic_for_degree(Degree::Three, 19).unwrap()).is_empty());
        let roots = degree_roots(&quadratic_for_degree(Degree::Four, 42).unwrap());
        let ex: Vec<_> = roots.iter().map(|r| r.exact.clone().unwrap()).collect();
        assert_eq!(ex, vec![ratio(-1, 3), ratio(-1, 7)]);
        let roots = degree_roots(&quadratic_for_degree(Degree::Six, 110).unwrap());
        let ex: Vec<_> = roots.iter().map(|r| r.exact.clone().unwrap()).collect();
        assert_eq!(ex, vec![ratio(-1, 5), ratio(-1, 11)]);
    }

    #[test]
    fn irrational_roots_solve_the_quadratic() {
        for (d, r) in [(Degree::Three, 21), (Degree::Four, 100), (Degree::Six, 500)] {
            let q = quadratic_for_degree(d, r).unwrap();
            let roots = degree_roots(&q);
            assert_eq!(roots.len(), 2);
            for root in roots {
                let (a, b, c) = (big_f64(&q.a), big_f64(&q.b), big_f64(&q.c));
                let v = a * root.x * root.x + b * root.x + c;
                assert!(v.abs() < 1e-12 * a, "{v}");
            }
        }
    }

    #[test]
    fn parameters_from_roots() {
        let p = roots_to_parameters(Degree::Three, &[-0.5]);
        assert_eq!(p.values.len(), 2);
        assert!((p.values[0].0 - PI / 9.0).abs() < 1e-15);
        assert!((p.values[1].0 - 2.0 * PI / 9.0).abs() < 1e-15);
        let p = roots_to_parameters(Degree::Four, &[-1.0]);
        assert!(p.values.is_empty());
        assert_eq!(p.notes.len(), 1);
        let p = roots_to_parameters(Degree::Six, &[-0.2]);
        let (a, b) = (p.values[0].0, p.values[1].0);
        assert!((a + b - PI / 6.0).abs() < 1e-15);
        assert!(((12.0 * a).cos() + 0.2).abs() < 1e-12);
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify(&fam(3, 2, 2), 19).unwrap().count, 0);
        assert_eq!(classify(&fam(3, 2, 2), 20).unwrap().count, 4);
        assert_eq!(classify(&fam(4, 2, 2), 42).unwrap().count, 4);
        assert_eq!(classify(&fam(4, 2, 2), 41).unwrap().count, 0);
        assert_eq!(classify(&fam(4, 7, 8), 47).unwrap().count, 4);
        assert_eq!(classify(&fam(4, 7, 8), 38).unwrap().count, 2);
        assert_eq!(classify(&fam(4, 7, 8), 37).unwrap().regime, Regime::None);
        assert_eq!(classify(&fam(6, 1, 1), 110).unwrap().count, 4);
        assert_eq!(classify(&fam(6, 1, 1), 109).unwrap().count, 0);
        assert!(classify(&fam(3, 1, 1), 1).is_err());
    }

    #[test]
    fn classify_low_degrees() {
        let res = classify(&fam(1, 2, 2), 3).unwrap();
        assert_eq!(res.count, 2);
        assert!((res.solutions[0].s.sin() - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        let res = classify(&fam(2, 1, 2), 3).unwrap();
        assert_eq!(res.count, 1);
        match &res.solutions[0].source {
            SolutionSource::Clifford { u } => assert!((u - 0.610_166_501_699_547_4).abs() < 1e-15),
            other => panic!("{other:?}"),
        }
        assert_eq!(classify(&fam(2, 1, 1), 3).unwrap().count, 0);
        let res = classify(&fam(2, 1, 2), 4).unwrap();
        match &res.solutions[0].source {
            SolutionSource::Clifford { u } => assert!((u - 0.712_287_056_131_230_2).abs() < 1e-15),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn clifford_polynomial_factors() {
        // (3u − 1)(9u³ − 11u² + 5u − 1) up to a constant
        let p = clifford_polynomial(1, 2, 3);
        let want = &QPoly::from_ints(&[-1, 3]) * &QPoly::from_ints(&[-1, 5, -11, 9]);
        assert_eq!(p.monic(), want.monic());
    }

    #[test]
    fn biharmonic_is_empty_for_higher_degrees() {
        for f in [fam(3, 1, 1), fam(4, 1, 1), fam(4, 1, 2), fam(4, 3, 7), fam(6, 2, 2)] {
            assert_eq!(classify(&f, 2).unwrap().count, 0, "{f}");
        }
    }

    #[test]
    fn scan_examples() {
        let rep = scan_residual(&fam(3, 1, 1), 2, 2000, DEFAULT_EPS).unwrap();
        assert!(rep.brackets.is_empty());
        assert!(rep.samples.iter().all(|&(_, t)| t > 0.0));
        let rep = scan_residual(&fam(4, 1, 1), 42, 100_000, DEFAULT_EPS).unwrap();
        assert_eq!(rep.count(), 4);
        assert!(scan_residual(&fam(4, 1, 1), 42, 8, DEFAULT_EPS).is_err());
    }

    #[test]
    fn scan_finds_tangency() {
        // no integer r gives a double root of the reduced quadratics, so use a synthetic one
        let f = |s: f64| (s - 1.0).powi(2) * 5.0;
        let samples: Vec<(f64, f64)> = (0..101).map(|i| (i as f64 * 0.0199, f(i as f64 * 0.0199))).collect();
        let br = bracket_zeros(&samples, &f, &|_| 1.0);
        assert_eq!(br.len(), 1);
        assert_eq!(br[0].kind, BracketKind::Tangency);
        assert!((br[0].s - 1.0).abs() < 1e-6);
    }

    #[test]
    fn displays_agree() {
        for f in [fam(3, 1, 1), fam(3, 4, 4), fam(6, 1, 1), fam(4, 1, 1), fam(4, 2, 5), fam(4, 7, 8)] {
            for r in [2, 20, 47, 110] {
                for i in 1..200 {
                    let s = i as f64 * f.degree().period() / 200.0;
                    let d = display_discrepancy(&f, r, s).unwrap();
                    assert!(d < 1e-9, "{f} r={r} s={s} d={d}");
                    let t = residual_at(&f, r, s).unwrap();
                    let raw = raw_display(&f, r, s).unwrap();
                    let a2 = invariants(&f, s).unwrap().a2;
                    assert!((t - raw).abs() <= 1e-9 * a2 * a2);
                }
            }
        }
    }

    #[test]
    fn exact_sphere_residual() {
        let q = exact_residual(3, 4, 1, &int(9), &int(3));
        assert!(q.is_zero());
        assert_eq!(to_f64(&exact_residual(2, 3, 1, &int(2), &int(1))), -4.0);
    }
}
