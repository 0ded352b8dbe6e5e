//! Finite-difference geometry on explicit charts of hypersurfaces in the unit
//! sphere `S^{m+1} ⊂ R^{m+2}`.
//!
//! Two chart kinds are available: small hyperspheres `S^m(R)` and generalized
//! Clifford tori `S^{m1}(R1) × S^{m2}(R2)`, both written with hyperspherical
//! angles. Everything here is computed from the embedding alone and serves as
//! an independent check of the closed-form curvature formulas.

use std::f64::consts::PI;

use nalgebra::{ComplexField, DMatrix, DVector, SymmetricEigen};
use num_complex::{Complex64, ComplexFloat};
use rayon::prelude::*;

use crate::criterion::HarmonicityQuery;
use crate::error::{Error, Result};

/// Distance kept from coordinate singularities when sampling.
pub const POLE_MARGIN: f64 = PI / 8.0;

/// Largest metric condition number accepted by [`fundamental_forms`].
pub const MAX_CONDITION: f64 = 1e8;

/// Default finite-difference step.
pub const DEFAULT_STEP: f64 = 1e-3;

const COMPLEX_STEP: f64 = 1e-30;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ChartKind {
    /// `S^m(R) = {(R ω, √(1−R²)) : ω ∈ S^m}`.
    SmallSphere { m: usize, radius: f64 },
    /// `S^{m1}(R1) × S^{m2}(R2)` with `R1² + R2² = 1`.
    CliffordTorus { m1: usize, m2: usize, r1: f64, r2: f64 },
}

/// A parametrized hypersurface of the unit sphere.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Chart {
    kind: ChartKind,
}

/// `(R cos θ1, R sin θ1 cos θ2, …, R sin θ1⋯sin θn)`, a point of `S^n(R)`.
fn push_sphere<T: ComplexFloat + From<f64>>(angles: &[T], radius: T, out: &mut Vec<T>) {
    let mut prod = radius;
    for &t in angles {
        out.push(prod * t.cos());
        prod = prod * t.sin();
    }
    out.push(prod);
}

/// Coordinate intervals of `n` hyperspherical angles: polar angles in `(0, π)`,
/// the last one an azimuth in `(−π, π)`.
fn angle_domain(n: usize, out: &mut Vec<(f64, f64)>) {
    for i in 0..n {
        out.push(if i + 1 == n { (-PI, PI) } else { (0.0, PI) });
    }
}

impl Chart {
    pub fn small_sphere(m: usize, radius: f64) -> Result<Self> {
        if m == 0 {
            return Err(Error::Precondition("dimension must be positive".into()));
        }
        if !(radius > 0.0 && radius <= 1.0) {
            return Err(Error::OutOfRange { value: radius, lower: 0.0, upper: 1.0 });
        }
        Ok(Chart { kind: ChartKind::SmallSphere { m, radius } })
    }

    pub fn clifford_torus(m1: usize, m2: usize, r1: f64, r2: f64) -> Result<Self> {
        if m1 == 0 || m2 == 0 {
            return Err(Error::Precondition("factor dimensions must be positive".into()));
        }
        if !(r1 > 0.0 && r2 > 0.0) || (r1 * r1 + r2 * r2 - 1.0).abs() > 1e-12 {
            return Err(Error::Precondition(format!("radii must be positive with R1² + R2² = 1, got ({r1}, {r2})")));
        }
        Ok(Chart { kind: ChartKind::CliffordTorus { m1, m2, r1, r2 } })
    }

    /// The member `M_s` of the degree-2 family: `R1 = sin s`, `R2 = cos s`.
    pub fn clifford_from_parameter(m1: usize, m2: usize, s: f64) -> Result<Self> {
        Self::clifford_torus(m1, m2, s.sin(), s.cos())
    }

    pub fn kind(&self) -> ChartKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        match self.kind {
            ChartKind::SmallSphere { m, .. } => m,
            ChartKind::CliffordTorus { m1, m2, .. } => m1 + m2,
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim() + 2
    }

    pub fn map<T: ComplexFloat + From<f64>>(&self, u: &[T]) -> Vec<T> {
        let mut out = Vec::with_capacity(self.ambient_dim());
        match self.kind {
            ChartKind::SmallSphere { radius, .. } => {
                push_sphere(u, <T as From<f64>>::from(radius), &mut out);
                out.push(<T as From<f64>>::from((1.0 - radius * radius).sqrt()));
            }
            ChartKind::CliffordTorus { m1, r1, r2, .. } => {
                push_sphere(&u[..m1], <T as From<f64>>::from(r1), &mut out);
                push_sphere(&u[m1..], <T as From<f64>>::from(r2), &mut out);
            }
        }
        out
    }

    pub fn point(&self, u: &[f64]) -> DVector<f64> {
        DVector::from_vec(self.map(u))
    }

    /// Open parameter box on which the chart is an immersion.
    pub fn domain(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        match self.kind {
            ChartKind::SmallSphere { m, .. } => angle_domain(m, &mut out),
            ChartKind::CliffordTorus { m1, m2, .. } => {
                angle_domain(m1, &mut out);
                angle_domain(m2, &mut out);
            }
        }
        out
    }

    /// Box `[π/8, 7π/8]^m` used for sampling, away from every pole.
    pub fn sample_box(&self) -> Vec<(f64, f64)> {
        vec![(POLE_MARGIN, PI - POLE_MARGIN); self.dim()]
    }

    /// Deterministic low-discrepancy points of the sample box.
    pub fn sample_points(&self, n: usize) -> Vec<Vec<f64>> {
        let dim = self.dim();
        let steps: Vec<f64> = (0..dim).map(|i| (((i + 2) as f64).sqrt()).fract()).collect();
        (0..n)
            .map(|k| {
                self.sample_box()
                    .iter()
                    .zip(&steps)
                    .map(|(&(lo, hi), &a)| lo + (hi - lo) * (0.5 + (k as f64 + 1.0) * a).fract())
                    .collect()
            })
            .collect()
    }

    /// Closed-form principal curvatures (ascending), mean curvature and `|A|²`,
    /// oriented so that the mean curvature is nonnegative.
    pub fn exact_invariants(&self) -> (Vec<f64>, f64, f64) {
        let mut k: Vec<f64> = match self.kind {
            ChartKind::SmallSphere { m, radius } => vec![(1.0 - radius * radius).sqrt() / radius; m],
            ChartKind::CliffordTorus { m1, m2, r1, r2 } => {
                let mut v = vec![r2 / r1; m1];
                v.extend(vec![-r1 / r2; m2]);
                v
            }
        };
        let m = k.len() as f64;
        if k.iter().sum::<f64>() < 0.0 {
            k.iter_mut().for_each(|x| *x = -*x);
        }
        k.sort_by(f64::total_cmp);
        let f = k.iter().sum::<f64>() / m;
        let a2 = k.iter().map(|x| x * x).sum();
        (k, f, a2)
    }

    fn check_margin(&self, u: &[f64], margin: f64) -> Result<()> {
        if u.len() != self.dim() {
            return Err(Error::Precondition(format!("expected {} coordinates, got {}", self.dim(), u.len())));
        }
        for (&x, &(lo, hi)) in u.iter().zip(&self.domain()) {
            if !(x - margin > lo && x + margin < hi) {
                return Err(Error::Precondition(format!(
                    "coordinate {x} is closer than {margin} to the boundary of ({lo}, {hi})"
                )));
            }
        }
        Ok(())
    }
}

fn shifted(u: &[f64], moves: &[(usize, f64)]) -> Vec<f64> {
    let mut v = u.to_vec();
    for &(i, d) in moves {
        v[i] += d;
    }
    v
}

/// Unit vector orthogonal to all `vs` (which span a hyperplane of the ambient space).
fn orthogonal_complement(vs: &[DVector<f64>], n: usize) -> DVector<f64> {
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(vs.len());
    for v in vs {
        let mut w = v.clone();
        for _ in 0..2 {
            for e in &basis {
                w -= e * e.dot(&w);
            }
        }
        basis.push(w.normalize());
    }
    (0..n)
        .map(|k| {
            let mut w = DVector::from_fn(n, |i, _| if i == k { 1.0 } else { 0.0 });
            for _ in 0..2 {
                for e in &basis {
                    w -= e * e.dot(&w);
                }
            }
            w
        })
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .expect("ambient dimension is positive")
        .normalize()
}

/// Finite-difference first and second fundamental forms at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct FundamentalForms {
    pub metric: DMatrix<f64>,
    /// `b_ij = ⟨∂_ij X, η⟩`.
    pub second: DMatrix<f64>,
    /// Unit normal, tangent to the sphere and orthogonal to the hypersurface.
    pub normal: DVector<f64>,
    /// Eigenvalues of the shape operator `g⁻¹ b`, ascending.
    pub shape_eigenvalues: Vec<f64>,
    /// Mean curvature `(1/m) tr A`, made nonnegative by the choice of `η`.
    pub f: f64,
    pub a2: f64,
    /// Condition number of the metric.
    pub condition: f64,
}

/// Metric, second form and unoriented normal from order-2 central differences.
fn raw_forms(chart: &Chart, u: &[f64], h: f64) -> (DMatrix<f64>, DMatrix<f64>, DVector<f64>) {
    let m = chart.dim();
    let x = |v: &[f64]| chart.point(v);
    let x0 = x(u);
    let d1: Vec<DVector<f64>> =
        (0..m).map(|i| (x(&shifted(u, &[(i, h)])) - x(&shifted(u, &[(i, -h)]))) / (2.0 * h)).collect();
    let mut d2 = vec![vec![DVector::zeros(m + 2); m]; m];
    for i in 0..m {
        d2[i][i] = (x(&shifted(u, &[(i, h)])) - &x0 * 2.0 + x(&shifted(u, &[(i, -h)]))) / (h * h);
        for j in 0..i {
            let v = (x(&shifted(u, &[(i, h), (j, h)])) - x(&shifted(u, &[(i, h), (j, -h)]))
                - x(&shifted(u, &[(i, -h), (j, h)]))
                + x(&shifted(u, &[(i, -h), (j, -h)])))
                / (4.0 * h * h);
            d2[i][j] = v.clone();
            d2[j][i] = v;
        }
    }
    let mut span = vec![x0];
    span.extend(d1.iter().cloned());
    let eta = orthogonal_complement(&span, m + 2);
    let g = DMatrix::from_fn(m, m, |i, j| d1[i].dot(&d1[j]));
    let b = DMatrix::from_fn(m, m, |i, j| d2[i][j].dot(&eta));
    (g, b, eta)
}

fn finish(g: DMatrix<f64>, mut b: DMatrix<f64>, mut eta: DVector<f64>) -> Result<FundamentalForms> {
    let m = g.nrows();
    let geig = SymmetricEigen::new(g.clone()).eigenvalues;
    let (gmin, gmax) = geig.iter().fold((f64::INFINITY, 0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let condition = if gmin > 0.0 { gmax / gmin } else { f64::INFINITY };
    if !(condition <= MAX_CONDITION) {
        return Err(Error::Discretization(format!("metric condition number {condition:e} exceeds {MAX_CONDITION:e}")));
    }
    let chol = g
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Discretization("metric is not positive definite".into()))?;
    let l_inv = chol
        .l()
        .try_inverse()
        .ok_or_else(|| Error::Discretization("metric factor is singular".into()))?;
    let mut sym = &l_inv * &b * l_inv.transpose();
    sym = (&sym + sym.transpose()) * 0.5;
    let mut eig: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
    let mut f = eig.iter().sum::<f64>() / m as f64;
    let scale = eig.iter().map(|k| k.abs()).fold(0.0, f64::max).max(1.0);
    let flip = if f.abs() > 1e-9 * scale {
        f < 0.0
    } else {
        // minimal: largest normal component positive
        let imax = eta.iamax();
        eta[imax] < 0.0
    };
    if flip {
        eta = -eta;
        b = -b;
        eig.iter_mut().for_each(|k| *k = -*k);
        f = -f;
    }
    eig.sort_by(f64::total_cmp);
    let a2 = eig.iter().map(|k| k * k).sum();
    Ok(FundamentalForms { metric: g, second: b, normal: eta, shape_eigenvalues: eig, f, a2, condition })
}

/// First and second fundamental forms by order-2 central differences with step `h`.
pub fn fundamental_forms(chart: &Chart, u: &[f64], h: f64) -> Result<FundamentalForms> {
    if !(h > 0.0) {
        return Err(Error::Precondition(format!("step must be positive, got {h}")));
    }
    chart.check_margin(u, 2.0 * h)?;
    let (g, b, eta) = raw_forms(chart, u, h);
    finish(g, b, eta)
}

/// Richardson combination `(4 F(h/2) − F(h)) / 3` of the metric and second form,
/// which removes the `h²` term of the central differences.
pub fn fundamental_forms_extrapolated(chart: &Chart, u: &[f64], h: f64) -> Result<FundamentalForms> {
    if !(h > 0.0) {
        return Err(Error::Precondition(format!("step must be positive, got {h}")));
    }
    chart.check_margin(u, 2.0 * h)?;
    let (g1, mut b1, eta1) = raw_forms(chart, u, h);
    let (g2, b2, eta2) = raw_forms(chart, u, 0.5 * h);
    if eta1.dot(&eta2) < 0.0 {
        b1 = -b1;
    }
    let g = (&g2 * 4.0 - g1) / 3.0;
    let b = (&b2 * 4.0 - b1) / 3.0;
    finish(g, b, eta2)
}

/// Scalars the Laplacian machinery runs on: `f64`, or `Complex64` for complex-step derivatives.
trait Scalar: ComplexField<RealField = f64> + Copy {}
impl<T: ComplexField<RealField = f64> + Copy> Scalar for T {}

fn shifted_t<T: Scalar>(u: &[T], moves: &[(usize, f64)]) -> Vec<T> {
    let mut v = u.to_vec();
    for &(i, d) in moves {
        v[i] += T::from_real(d);
    }
    v
}

/// `∂/∂θ_k` of `push_sphere`: each coordinate contains `θ_k` at most once, so
/// the derivative swaps `cos θ_k → −sin θ_k` or `sin θ_k → cos θ_k` in place.
fn push_sphere_derivative<T: Scalar>(angles: &[T], radius: f64, k: usize, out: &mut Vec<T>) {
    let mut prod = T::from_real(radius);
    let mut seen = false;
    for (j, &t) in angles.iter().enumerate() {
        if j < k {
            out.push(T::zero());
        } else if j == k {
            out.push(-(prod * t.sin()));
            seen = true;
        } else {
            out.push(prod * t.cos());
        }
        prod *= if j == k { t.cos() } else { t.sin() };
    }
    out.push(if seen { prod } else { T::zero() });
}

impl Chart {
    fn point_t<T: Scalar>(&self, u: &[T]) -> DVector<T> {
        let mut out = Vec::with_capacity(self.ambient_dim());
        let push = |angles: &[T], radius: f64, out: &mut Vec<T>| {
            let mut prod = T::from_real(radius);
            for &t in angles {
                out.push(prod * t.cos());
                prod *= t.sin();
            }
            out.push(prod);
        };
        match self.kind {
            ChartKind::SmallSphere { radius, .. } => {
                push(u, radius, &mut out);
                out.push(T::from_real((1.0 - radius * radius).sqrt()));
            }
            ChartKind::CliffordTorus { m1, r1, r2, .. } => {
                push(&u[..m1], r1, &mut out);
                push(&u[m1..], r2, &mut out);
            }
        }
        DVector::from_vec(out)
    }

    /// Exact tangent vectors `∂_k X`.
    fn tangents_t<T: Scalar>(&self, u: &[T]) -> Vec<DVector<T>> {
        (0..self.dim())
            .map(|k| {
                let mut out = Vec::with_capacity(self.ambient_dim());
                match self.kind {
                    ChartKind::SmallSphere { radius, .. } => {
                        push_sphere_derivative(u, radius, k, &mut out);
                        out.push(T::zero());
                    }
                    ChartKind::CliffordTorus { m1, m2, r1, r2 } => {
                        if k < m1 {
                            push_sphere_derivative(&u[..m1], r1, k, &mut out);
                            out.extend(std::iter::repeat_n(T::zero(), m2 + 1));
                        } else {
                            out.extend(std::iter::repeat_n(T::zero(), m1 + 1));
                            push_sphere_derivative(&u[m1..], r2, k - m1, &mut out);
                        }
                    }
                }
                DVector::from_vec(out)
            })
            .collect()
    }
}

/// Unit normal from exact tangents; bilinear throughout, so it is analytic in `u`.
fn unit_normal_t<T: Scalar>(chart: &Chart, u: &[T]) -> DVector<T> {
    let n = chart.ambient_dim();
    let mut basis: Vec<DVector<T>> = Vec::with_capacity(n);
    let mut vs = vec![chart.point_t(u)];
    vs.extend(chart.tangents_t(u));
    let reduce = |mut w: DVector<T>, basis: &[DVector<T>]| {
        for _ in 0..2 {
            for e in basis {
                let c = e.dot(&w);
                w -= e * c;
            }
        }
        w
    };
    for v in vs {
        let w = reduce(v, &basis);
        let len = w.dot(&w).sqrt();
        basis.push(w / len);
    }
    let w = (0..n)
        .map(|k| reduce(DVector::from_fn(n, |i, _| if i == k { T::one() } else { T::zero() }), &basis))
        .max_by(|a, b| {
            let na: f64 = a.iter().map(|x| x.real() * x.real()).sum();
            let nb: f64 = b.iter().map(|x| x.real() * x.real()).sum();
            na.total_cmp(&nb)
        })
        .expect("ambient dimension is positive");
    let len = w.dot(&w).sqrt();
    w / len
}

fn project_t<T: Scalar>(w: &DVector<T>, p: &DVector<T>) -> DVector<T> {
    w - p * p.dot(w)
}

type FieldT<'a, T> = dyn Fn(&[T]) -> DVector<T> + Sync + 'a;

/// How the first and second parameter derivatives of the field are taken.
enum Stencil<'a> {
    /// Order-2 central differences on a real field.
    Central(&'a FieldT<'a, f64>),
    /// Complex-step first derivatives of an analytic field, then order-2
    /// central differences of those for the second derivatives.
    ComplexStep(&'a FieldT<'a, Complex64>),
}

/// Field value, first derivatives and second derivatives at `u`.
fn field_jet(stencil: &Stencil<'_>, u: &[f64], h: f64) -> (DVector<f64>, Vec<DVector<f64>>, Vec<Vec<DVector<f64>>>) {
    let m = u.len();
    match stencil {
        Stencil::Central(field) => {
            let v0 = field(u);
            let vp: Vec<_> = (0..m).map(|i| field(&shifted(u, &[(i, h)]))).collect();
            let vm: Vec<_> = (0..m).map(|i| field(&shifted(u, &[(i, -h)]))).collect();
            let d1 = (0..m).map(|k| (&vp[k] - &vm[k]) / (2.0 * h)).collect();
            let mut d2 = vec![vec![DVector::zeros(v0.len()); m]; m];
            for i in 0..m {
                d2[i][i] = (&vp[i] - &v0 * 2.0 + &vm[i]) / (h * h);
                for j in 0..i {
                    let v = (field(&shifted(u, &[(i, h), (j, h)])) - field(&shifted(u, &[(i, h), (j, -h)]))
                        - field(&shifted(u, &[(i, -h), (j, h)]))
                        + field(&shifted(u, &[(i, -h), (j, -h)])))
                        / (4.0 * h * h);
                    d2[i][j] = v.clone();
                    d2[j][i] = v;
                }
            }
            (v0, d1, d2)
        }
        Stencil::ComplexStep(field) => {
            let z: Vec<Complex64> = u.iter().map(|&x| Complex64::new(x, 0.0)).collect();
            let grad = |w: &[Complex64]| -> Vec<DVector<f64>> {
                (0..m)
                    .map(|k| {
                        let mut zk = w.to_vec();
                        zk[k].im += COMPLEX_STEP;
                        field(&zk).map(|c| c.im / COMPLEX_STEP)
                    })
                    .collect()
            };
            let v0 = field(&z).map(|c| c.re);
            let d1 = grad(&z);
            let gp: Vec<_> = (0..m).map(|i| grad(&shifted_t(&z, &[(i, h)]))).collect();
            let gm: Vec<_> = (0..m).map(|i| grad(&shifted_t(&z, &[(i, -h)]))).collect();
            let d2 = (0..m)
                .map(|i| {
                    (0..m)
                        .map(|j| ((&gp[i][j] - &gm[i][j]) + (&gp[j][i] - &gm[j][i])) / (4.0 * h))
                        .collect()
                })
                .collect();
            (v0, d1, d2)
        }
    }
}

/// Rough Laplacian `Δ̄ = d*d` of a vector field `V` along the immersion:
/// `Δ̄V = −g^{ij} [P(∂_ij V) + ⟨V, ∂_j φ⟩ ∂_i φ − Γ^k_ij P(∂_k V)]`, where `P`
/// projects onto the sphere's tangent space and `Γ^k_ij = g^{kl} ⟨∂_ij φ, ∂_l φ⟩`.
fn rough_laplacian_t<T: Scalar>(
    chart: &Chart,
    field: &FieldT<'_, T>,
    jet: Option<(DVector<T>, Vec<DVector<T>>, Vec<Vec<DVector<T>>>)>,
    u: &[T],
    h: f64,
) -> Result<DVector<T>> {
    let m = chart.dim();
    let phi = chart.point_t(u);
    let t = chart.tangents_t(u);
    let g = DMatrix::from_fn(m, m, |i, j| t[i].dot(&t[j]));
    let g_inv = g.try_inverse().ok_or_else(|| Error::Discretization("singular metric".into()))?;
    let tp: Vec<Vec<DVector<T>>> = (0..m).map(|i| chart.tangents_t(&shifted_t(u, &[(i, h)]))).collect();
    let tm: Vec<Vec<DVector<T>>> = (0..m).map(|i| chart.tangents_t(&shifted_t(u, &[(i, -h)]))).collect();
    let two_h = T::from_real(4.0 * h);
    let mut gamma = vec![vec![vec![T::zero(); m]; m]; m];
    for i in 0..m {
        for j in 0..m {
            let dij = ((&tp[i][j] - &tm[i][j]) + (&tp[j][i] - &tm[j][i])) / two_h;
            let low: Vec<T> = (0..m).map(|l| dij.dot(&t[l])).collect();
            for k in 0..m {
                gamma[k][i][j] = (0..m).fold(T::zero(), |acc, l| acc + g_inv[(k, l)] * low[l]);
            }
        }
    }
    let (v0, d1, d2) = match jet {
        Some(j) => j,
        None => {
            let v0 = field(u);
            let vp: Vec<_> = (0..m).map(|i| field(&shifted_t(u, &[(i, h)]))).collect();
            let vm: Vec<_> = (0..m).map(|i| field(&shifted_t(u, &[(i, -h)]))).collect();
            let d1: Vec<_> = (0..m).map(|k| (&vp[k] - &vm[k]) / T::from_real(2.0 * h)).collect();
            let mut d2 = vec![vec![DVector::zeros(v0.len()); m]; m];
            for i in 0..m {
                d2[i][i] = (&vp[i] - &v0 * T::from_real(2.0) + &vm[i]) / T::from_real(h * h);
                for j in 0..i {
                    let v = (field(&shifted_t(u, &[(i, h), (j, h)])) - field(&shifted_t(u, &[(i, h), (j, -h)]))
                        - field(&shifted_t(u, &[(i, -h), (j, h)]))
                        + field(&shifted_t(u, &[(i, -h), (j, -h)])))
                        / T::from_real(4.0 * h * h);
                    d2[i][j] = v.clone();
                    d2[j][i] = v;
                }
            }
            (v0, d1, d2)
        }
    };
    let dv: Vec<DVector<T>> = d1.iter().map(|d| project_t(d, &phi)).collect();
    let mut out = DVector::zeros(m + 2);
    for i in 0..m {
        for j in 0..m {
            let mut term = project_t(&d2[i][j], &phi) + &t[i] * v0.dot(&t[j]);
            for k in 0..m {
                term -= &dv[k] * gamma[k][i][j];
            }
            out -= term * g_inv[(i, j)];
        }
    }
    Ok(out)
}

/// Outcome of a Laplacian identity check at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct LaplacianCheck {
    /// Finite-difference `Δ̄^p H`.
    pub computed: DVector<f64>,
    /// `α |A|^{2p} η` from the fundamental forms.
    pub expected: DVector<f64>,
    pub residual: DVector<f64>,
    pub residual_norm: f64,
}

/// Iterated rough Laplacian `Δ̄^p H` of the mean curvature vector field `H = f η`
/// compared with `f |A|^{2p} η`. Valid for CMC charts with constant `|A|²`.
///
/// The innermost Laplacian uses central differences of step `h`. For `p = 2`
/// the outer Laplacian differentiates the (analytic) inner field with complex
/// steps, so rounding errors are not divided by `h⁴`; its second derivatives
/// still come from central differences of step `h`.
pub fn verify_power_law(chart: &Chart, p: u32, u: &[f64], h: f64) -> Result<LaplacianCheck> {
    if p == 0 || p > 2 {
        return Err(Error::Unsupported(format!(
            "power {p}: finite-difference iterates are only accurate for p = 1, 2"
        )));
    }
    if !(h > 0.0) {
        return Err(Error::Precondition(format!("step must be positive, got {h}")));
    }
    chart.check_margin(u, 2.0 * p as f64 * h)?;
    let forms = fundamental_forms_extrapolated(chart, u, h)?;
    let eta_c = forms.normal.clone();
    let f = forms.f;
    let computed = if p == 1 {
        let h_field = |v: &[f64]| -> DVector<f64> {
            let n = unit_normal_t(chart, v);
            let n = if n.dot(&eta_c) < 0.0 { -n } else { n };
            n * f
        };
        let jet = field_jet(&Stencil::Central(&h_field), u, h);
        rough_laplacian_t(chart, &h_field, Some(jet), u, h)?
    } else {
        let eta_z = eta_c.map(|x| Complex64::new(x, 0.0));
        let h_field = |v: &[Complex64]| -> DVector<Complex64> {
            let n = unit_normal_t(chart, v);
            let n = if n.dot(&eta_z).re < 0.0 { -n } else { n };
            n * Complex64::new(f, 0.0)
        };
        let inner = |v: &[Complex64]| -> DVector<Complex64> {
            let lap = rough_laplacian_t(chart, &h_field, None, v, h).expect("inner stencil stays in the domain");
            project_t(&lap, &chart.point_t(v))
        };
        let jet = field_jet(&Stencil::ComplexStep(&inner), u, h);
        let dummy = |_: &[f64]| -> DVector<f64> { unreachable!("jet is precomputed") };
        rough_laplacian_t(chart, &dummy, Some(jet), u, h)?
    };
    let expected = &forms.normal * (f * forms.a2.powi(p as i32));
    let residual = &computed - &expected;
    let residual_norm = residual.norm();
    Ok(LaplacianCheck { computed, expected, residual, residual_norm })
}

/// `Δ̄H − f |A|² η` at `u`; vanishes up to `O(h²)` on CMC charts.
pub fn verify_mean_curvature_laplacian(chart: &Chart, u: &[f64], h: f64) -> Result<LaplacianCheck> {
    verify_power_law(chart, 1, u, h)
}

/// Per-point data of a survey.
#[derive(Clone, Debug, PartialEq)]
pub struct ChartSample {
    pub u: Vec<f64>,
    pub metric: DMatrix<f64>,
    pub shape_eigenvalues: Vec<f64>,
    pub f: f64,
    pub a2: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeomReport {
    pub samples: Vec<ChartSample>,
    /// Largest `|f − f̄|` over the samples.
    pub f_deviation: f64,
    /// Largest `|a2 − ā2|` over the samples.
    pub a2_deviation: f64,
    pub mean_f: f64,
    pub mean_a2: f64,
    pub normal_convention: &'static str,
}

pub const NORMAL_CONVENTION: &str =
    "eta is chosen with mean curvature f >= 0; for minimal charts its largest ambient component is positive";

/// Fundamental forms at `n` deterministic sample points.
pub fn survey(chart: &Chart, n: usize, h: f64, extrapolate: bool) -> Result<GeomReport> {
    let samples: Vec<ChartSample> = chart
        .sample_points(n)
        .into_par_iter()
        .map(|u| {
            let ff = if extrapolate {
                fundamental_forms_extrapolated(chart, &u, h)?
            } else {
                fundamental_forms(chart, &u, h)?
            };
            Ok(ChartSample { u, metric: ff.metric, shape_eigenvalues: ff.shape_eigenvalues, f: ff.f, a2: ff.a2 })
        })
        .collect::<Result<_>>()?;
    let k = samples.len().max(1) as f64;
    let mean_f = samples.iter().map(|s| s.f).sum::<f64>() / k;
    let mean_a2 = samples.iter().map(|s| s.a2).sum::<f64>() / k;
    let f_deviation = samples.iter().map(|s| (s.f - mean_f).abs()).fold(0.0, f64::max);
    let a2_deviation = samples.iter().map(|s| (s.a2 - mean_a2).abs()).fold(0.0, f64::max);
    Ok(GeomReport { samples, f_deviation, a2_deviation, mean_f, mean_a2, normal_convention: NORMAL_CONVENTION })
}

/// Number of sample points used by [`check_criterion_on_chart`].
pub const CRITERION_SAMPLES: usize = 8;
/// Relative spread of `f` and `|A|²` tolerated before a chart counts as non-isoparametric.
pub const CONSTANCY_TOLERANCE: f64 = 1e-7;

#[derive(Clone, Debug, PartialEq)]
pub struct CriterionCheck {
    pub m: usize,
    pub r: u64,
    pub f: f64,
    pub a2: f64,
    /// `|A|⁴ − m|A|² − (r−2) m² f²` from the numerical invariants.
    pub value: f64,
    pub tolerance: f64,
    pub holds: bool,
}

/// Evaluates the r-harmonicity criterion with numerically computed invariants.
pub fn check_criterion_on_chart(chart: &Chart, r: u64) -> Result<CriterionCheck> {
    if r < 2 {
        return Err(Error::Precondition(format!("order r must be >= 2, got {r}")));
    }
    let rep = survey(chart, CRITERION_SAMPLES, DEFAULT_STEP, true)?;
    let spread = CONSTANCY_TOLERANCE * rep.mean_a2.abs().max(1.0);
    if rep.a2_deviation > spread || rep.f_deviation > CONSTANCY_TOLERANCE * rep.mean_f.abs().max(1.0) {
        return Err(Error::Precondition(format!(
            "invariants are not constant on the chart (f spread {:e}, |A|² spread {:e})",
            rep.f_deviation, rep.a2_deviation
        )));
    }
    let m = chart.dim();
    let (f, a2) = (rep.mean_f, rep.mean_a2);
    let value = HarmonicityQuery::new(1.0, m as u32, r, a2, f * f).residual();
    let tolerance = 1e-6 * (a2 * a2).max(1.0);
    Ok(CriterionCheck { m, r, f, a2, value, tolerance, holds: value.abs() < tolerance })
}

#[cfg(test)]
mod tests {
    use super::*;

    const U3: [f64; 4] = [0.9, 1.3, 0.7, 1.9];

    #[test]
    fn charts_lie_on_the_unit_sphere() {
        let charts = [
            Chart::small_sphere(2, 1.0 / 3f64.sqrt()).unwrap(),
            Chart::small_sphere(3, 0.5).unwrap(),
            Chart::clifford_torus(1, 2, 0.6, 0.8).unwrap(),
            Chart::clifford_torus(2, 2, 0.5f64.sqrt(), 0.5f64.sqrt()).unwrap(),
        ];
        for c in charts {
            for u in c.sample_points(20) {
                assert!((c.point(&u).norm() - 1.0).abs() < 1e-12);
            }
        }
        assert!(Chart::clifford_torus(1, 1, 0.6, 0.7).is_err());
    }

    #[test]
    fn sphere_forms() {
        let c = Chart::small_sphere(2, 1.0 / 3f64.sqrt()).unwrap();
        let ff = fundamental_forms_extrapolated(&c, &U3[..2], 1e-3).unwrap();
        for k in &ff.shape_eigenvalues {
            assert!((k - 2f64.sqrt()).abs() < 1e-8);
        }
        assert!((ff.f - 2f64.sqrt()).abs() < 1e-8);
        assert!((ff.a2 - 4.0).abs() < 1e-8);
        let c = Chart::small_sphere(2, 0.5f64.sqrt()).unwrap();
        let ff = fundamental_forms_extrapolated(&c, &U3[..2], 1e-3).unwrap();
        assert!((ff.a2 - 2.0).abs() < 1e-8);
    }

    #[test]
    fn minimal_clifford_forms() {
        let c = Chart::clifford_torus(1, 1, 0.5f64.sqrt(), 0.5f64.sqrt()).unwrap();
        let ff = fundamental_forms_extrapolated(&c, &U3[..2], 1e-3).unwrap();
        assert!((ff.shape_eigenvalues[0] + 1.0).abs() < 1e-8);
        assert!((ff.shape_eigenvalues[1] - 1.0).abs() < 1e-8);
        assert!(ff.f.abs() < 1e-8);
    }

    #[test]
    fn margin_and_step_are_checked() {
        let c = Chart::small_sphere(2, 0.5).unwrap();
        assert!(fundamental_forms(&c, &[1e-4, 1.0], 1e-3).is_err());
        assert!(fundamental_forms(&c, &[1.0, 1.0], 0.0).is_err());
        assert!(fundamental_forms(&c, &[1.0], 1e-3).is_err());
    }

    #[test]
    fn laplacian_of_mean_curvature() {
        let c = Chart::small_sphere(2, 1.0 / 3f64.sqrt()).unwrap();
        let a = verify_mean_curvature_laplacian(&c, &U3[..2], 1e-3).unwrap();
        let b = verify_mean_curvature_laplacian(&c, &U3[..2], 5e-4).unwrap();
        assert!(a.residual_norm < 1e-4, "{}", a.residual_norm);
        let ratio = a.residual_norm / b.residual_norm;
        assert!((3.0..5.0).contains(&ratio), "ratio {ratio}");
        let minimal = Chart::clifford_torus(1, 1, 0.5f64.sqrt(), 0.5f64.sqrt()).unwrap();
        assert!(verify_mean_curvature_laplacian(&minimal, &U3[..2], 1e-3).unwrap().residual_norm < 1e-12);
    }

    #[test]
    fn power_law_second_iterate() {
        let c = Chart::small_sphere(2, 1.0 / 3f64.sqrt()).unwrap();
        let chk = verify_power_law(&c, 2, &U3[..2], 1e-3).unwrap();
        assert!((chk.expected.norm() - 16.0 * 2f64.sqrt()).abs() < 1e-6);
        assert!(chk.residual_norm < 1e-4, "{}", chk.residual_norm);
        assert!(matches!(verify_power_law(&c, 3, &U3[..2], 1e-3), Err(Error::Unsupported(_))));
    }

    #[test]
    fn criterion_on_spheres() {
        let c = Chart::small_sphere(3, 0.5).unwrap();
        assert!(check_criterion_on_chart(&c, 4).unwrap().holds);
        assert!(!check_criterion_on_chart(&c, 3).unwrap().holds);
        let c = Chart::small_sphere(2, 0.5f64.sqrt()).unwrap();
        let chk = check_criterion_on_chart(&c, 3).unwrap();
        assert!(!chk.holds);
        assert!((chk.value + 4.0).abs() < 1e-6);
    }

    #[test]
    fn clifford_reproduces_degree_two_curvatures() {
        for (m1, m2, s) in [(1usize, 2usize, 0.5), (2, 2, 0.3), (1, 1, 1.1)] {
            let c = Chart::clifford_from_parameter(m1, m2, s).unwrap();
            let ff = fundamental_forms_extrapolated(&c, &U3[..m1 + m2], 1e-3).unwrap();
            let (exact, f, a2) = c.exact_invariants();
            for (a, b) in ff.shape_eigenvalues.iter().zip(&exact) {
                assert!((a - b).abs() < 1e-8, "{a} vs {b}");
            }
            assert!((ff.f - f).abs() < 1e-8);
            assert!((ff.a2 - a2).abs() < 1e-8 * a2.max(1.0), "{m1} {m2} {s}: {} vs {a2}", ff.a2);
        }
    }
}
