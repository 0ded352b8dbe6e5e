//! Isoparametric families `M_s` in the unit sphere and their curvature invariants.

use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};

/// Number of distinct principal curvatures of an isoparametric hypersurface.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Degree {
    One,
    Two,
    Three,
    Four,
    Six,
}

impl Degree {
    pub const ALL: [Degree; 5] = [Degree::One, Degree::Two, Degree::Three, Degree::Four, Degree::Six];

    pub fn from_u32(l: u32) -> Result<Self> {
        match l {
            1 => Ok(Degree::One),
            2 => Ok(Degree::Two),
            3 => Ok(Degree::Three),
            4 => Ok(Degree::Four),
            6 => Ok(Degree::Six),
            _ => Err(Error::Unsupported(format!(
                "degree {l}: an isoparametric hypersurface has 1, 2, 3, 4 or 6 distinct principal curvatures"
            ))),
        }
    }

    pub fn get(self) -> u32 {
        match self {
            Degree::One => 1,
            Degree::Two => 2,
            Degree::Three => 3,
            Degree::Four => 4,
            Degree::Six => 6,
        }
    }

    /// Length `π/ℓ` of the parameter interval.
    pub fn period(self) -> f64 {
        PI / self.get() as f64
    }
}

impl fmt::Display for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.get())
    }
}

/// A family of parallel isoparametric hypersurfaces `M_s`, `0 < s < π/ℓ`.
///
/// The multiplicities of the principal curvatures alternate `m1, m2, m1, ...`.
/// For `ℓ = 1` there is a single multiplicity and `m1 == m2` is stored.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct IsoparametricFamily {
    degree: Degree,
    m1: u32,
    m2: u32,
}

impl IsoparametricFamily {
    /// Validates the multiplicity constraints for the given degree.
    ///
    /// `ℓ = 3, 6` force `m1 == m2`; `ℓ = 2, 4` use the orientation `m1 <= m2`.
    pub fn new(degree: Degree, m1: u32, m2: u32) -> Result<Self> {
        if m1 == 0 || m2 == 0 {
            return Err(Error::InvalidFamily("multiplicities must be positive".into()));
        }
        match degree {
            Degree::One | Degree::Three | Degree::Six if m1 != m2 => Err(Error::InvalidFamily(format!(
                "degree {degree} requires equal multiplicities, got ({m1}, {m2})"
            ))),
            Degree::Two | Degree::Four if m1 > m2 => Err(Error::InvalidFamily(format!(
                "degree {degree} is oriented with m1 <= m2, got ({m1}, {m2})"
            ))),
            _ => Ok(IsoparametricFamily { degree, m1, m2 }),
        }
    }

    /// Family with all multiplicities equal to `m1`.
    pub fn uniform(degree: Degree, m1: u32) -> Result<Self> {
        Self::new(degree, m1, m1)
    }

    /// Small hyperspheres `S^m(sin s)`.
    pub fn sphere(m: u32) -> Result<Self> {
        Self::new(Degree::One, m, m)
    }

    pub fn degree(&self) -> Degree {
        self.degree
    }

    pub fn ell(&self) -> u32 {
        self.degree.get()
    }

    pub fn m1(&self) -> u32 {
        self.m1
    }

    pub fn m2(&self) -> u32 {
        self.m2
    }

    pub fn equal_multiplicities(&self) -> bool {
        self.m1 == self.m2
    }

    /// Dimension `m` of each hypersurface, the total multiplicity.
    pub fn hypersurface_dim(&self) -> u32 {
        match self.degree {
            Degree::One => self.m1,
            Degree::Two => self.m1 + self.m2,
            Degree::Three => 3 * self.m1,
            Degree::Four => 2 * (self.m1 + self.m2),
            Degree::Six => 6 * self.m1,
        }
    }

    /// Multiplicity of the `i`-th principal curvature (0-based).
    pub fn multiplicity(&self, i: usize) -> u32 {
        if i % 2 == 0 {
            self.m1
        } else {
            self.m2
        }
    }

    fn check_parameter(&self, s: f64) -> Result<()> {
        let upper = self.degree.period();
        if s > 0.0 && s < upper {
            Ok(())
        } else {
            Err(Error::OutOfRange { value: s, lower: 0.0, upper })
        }
    }
}

impl fmt::Display for IsoparametricFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "l={} (m1={}, m2={})", self.degree, self.m1, self.m2)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrincipalCurvature {
    pub k: f64,
    pub multiplicity: u32,
}

/// Curvature data of the member `M_s`.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvatureInvariants {
    pub s: f64,
    pub principal: Vec<PrincipalCurvature>,
    /// Hypersurface dimension.
    pub m: u32,
    /// Mean curvature `(1/m) Σ m_i k_i`.
    pub alpha: f64,
    /// Squared norm of the shape operator, `Σ m_i k_i²`.
    pub a2: f64,
}

impl CurvatureInvariants {
    pub fn alpha2(&self) -> f64 {
        self.alpha * self.alpha
    }

    /// `|A|² − m α²`, nonnegative by the Cauchy inequality.
    pub fn cauchy_gap(&self) -> f64 {
        self.a2 - self.m as f64 * self.alpha2()
    }
}

/// The `ℓ` principal curvatures `k_i = cot(s + (i−1)π/ℓ)` with alternating multiplicities.
pub fn principal_curvatures(fam: &IsoparametricFamily, s: f64) -> Result<Vec<PrincipalCurvature>> {
    fam.check_parameter(s)?;
    let l = fam.ell() as usize;
    Ok((0..l)
        .map(|i| {
            let t = s + i as f64 * PI / l as f64;
            PrincipalCurvature { k: t.cos() / t.sin(), multiplicity: fam.multiplicity(i) }
        })
        .collect())
}

pub fn invariants(fam: &IsoparametricFamily, s: f64) -> Result<CurvatureInvariants> {
    let principal = principal_curvatures(fam, s)?;
    let m = fam.hypersurface_dim();
    let (sum, a2) = principal.iter().fold((0.0, 0.0), |(sum, a2), p| {
        let w = p.multiplicity as f64;
        (sum + w * p.k, a2 + w * p.k * p.k)
    });
    Ok(CurvatureInvariants { s, principal, m, alpha: sum / m as f64, a2 })
}

/// Mean curvature alone; cheaper than [`invariants`].
pub fn mean_curvature(fam: &IsoparametricFamily, s: f64) -> Result<f64> {
    Ok(invariants(fam, s)?.alpha)
}

/// The parameter `s*` of the minimal member of the family.
pub fn minimal_parameter(fam: &IsoparametricFamily) -> f64 {
    match fam.degree() {
        _ if fam.equal_multiplicities() => PI / (2.0 * fam.ell() as f64),
        Degree::Four => {
            let (m1, m2) = (fam.m1() as f64, fam.m2() as f64);
            0.5 * (m2 / (m1 + m2)).sqrt().acos()
        }
        _ => minimal_parameter_bisection(fam),
    }
}

/// `s*` by bisection on the strictly decreasing mean curvature.
///
/// Stops when `|α| < 1e−14` or the bracket is narrower than `1e−15`.
pub fn minimal_parameter_bisection(fam: &IsoparametricFamily) -> f64 {
    let alpha = |s: f64| mean_curvature(fam, s).expect("bisection stays inside the open interval");
    let (mut lo, mut hi) = (0.0, fam.degree().period());
    let mut mid = 0.5 * (lo + hi);
    while hi - lo > 1e-15 {
        mid = 0.5 * (lo + hi);
        let a = alpha(mid);
        if a.abs() < 1e-14 {
            break;
        }
        if a > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    mid
}

/// Mean curvature and `|A|²` of a degree-4 member written in tangents and cotangents of `s`.
///
/// `m α = 2 (m1 cot 2s − m2 tan 2s)` and
/// `|A|² = m1 (tan² s + cot² s) + m2 (tan²(s+π/4) + cot²(s+π/4))`.
pub fn degree_four_closed_form(m1: u32, m2: u32, s: f64) -> (f64, f64) {
    let (m1, m2) = (m1 as f64, m2 as f64);
    let m = 2.0 * (m1 + m2);
    let t = s.tan();
    let u = (s + PI / 4.0).tan();
    let alpha = 2.0 * (m1 / (2.0 * s).tan() - m2 * (2.0 * s).tan()) / m;
    let a2 = m1 * (t * t + 1.0 / (t * t)) + m2 * (u * u + 1.0 / (u * u));
    (alpha, a2)
}
