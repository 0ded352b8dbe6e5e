//! One function per subcommand: resolve arguments, call the library, emit a document.

use std::f64::consts::PI;

use num_rational::BigRational;
use rayon::prelude::*;
use serde::Serialize;

use polyharm::criterion::{
    self, classify as classify_family, clifford_polynomial, degree_roots, residual,
    roots_to_parameters, scan_residual, BracketKind, ClassificationResult, HarmonicityQuery, Regime, SolutionSource,
    CLASSIFY_TOLERANCE,
};
use polyharm::family::invariants as family_invariants;
use polyharm::geomlab::{self, Chart};
use polyharm::poly::{isolate_real_roots, refine_in_unit_interval};
use polyharm::quartic::{HarmonicQuartic, Parity};
use polyharm::rational::{int, ratio};
use polyharm::thresholds::{brute_force_thresholds, minimize, upper_bounds, ThresholdReport, UpperBounds};
use polyharm::{Degree, Error, IsoparametricFamily};

use crate::output::{
    cell_f64_opt, cell_opt, fixed, fixed_opt, fixed_vec, fmt_f64, join_f64, Document, Rat, Row, F64, TOOL, VERSION,
};
use crate::{
    CliError, ClassifyArgs, FamilyArgs, GeomArgs, ChartChoice, InvariantsArgs, RatioArgs, RootsArgs, ScanArgs, Sink,
    SweepArgs, ThresholdsArgs,
};

type Result<T> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn echo<T: Serialize>(args: &T) -> serde_json::Value {
    serde_json::to_value(args).unwrap_or(serde_json::Value::Null)
}

fn document<R, S>(
    command: &'static str,
    input: serde_json::Value,
    provenance: &'static str,
    summary: S,
    records: Vec<R>,
) -> Document<R, S> {
    Document { tool: TOOL, version: VERSION, command, input, provenance, summary, records }
}

fn family(a: &FamilyArgs) -> Result<IsoparametricFamily> {
    let degree = Degree::from_u32(a.degree)?;
    Ok(IsoparametricFamily::new(degree, a.m1, a.m2.unwrap_or(a.m1))?)
}

/// `b = m2/m1` from `--b` or from both multiplicities; both forms must agree.
fn resolve_ratio(b: &Option<BigRational>, m1: Option<u32>, m2: Option<u32>) -> Result<(BigRational, Option<(u32, u32)>)> {
    let mults = match (m1, m2) {
        (Some(m1), Some(m2)) if m1 > 0 && m2 > 0 => Some((m1, m2)),
        (Some(_), Some(_)) => return Err(usage("multiplicities must be positive")),
        (None, None) => None,
        _ => return Err(usage("give both --m1 and --m2, or --b")),
    };
    match (b, mults) {
        (Some(b), Some((m1, m2))) => {
            if *b != ratio(m2 as i64, m1 as i64) {
                return Err(usage(format!("--b {b} conflicts with --m2/--m1 = {m2}/{m1}")));
            }
            Ok((b.clone(), Some((m1, m2))))
        }
        (Some(b), None) => Ok((b.clone(), None)),
        (None, Some((m1, m2))) => Ok((ratio(m2 as i64, m1 as i64), Some((m1, m2)))),
        (None, None) => Err(usage("give --b or both --m1 and --m2")),
    }
}

/// Re-evaluates the criterion at `s` from the family invariants.
fn reverify(fam: &IsoparametricFamily, r: u64, s: f64) -> Result<f64> {
    let inv = family_invariants(fam, s)?;
    let t = residual(&HarmonicityQuery::new(1.0, inv.m, r, inv.a2, inv.alpha2()));
    let rel = t.abs() / (inv.a2 * inv.a2);
    if !(rel < CLASSIFY_TOLERANCE) {
        return Err(Error::Verification(format!("{fam}, r={r}: s={s} re-verifies with relative residual {rel:e}")).into());
    }
    Ok(rel)
}

// ---------------------------------------------------------------- invariants

#[derive(Serialize)]
struct Curvature {
    #[serde(serialize_with = "fixed")]
    k: f64,
    multiplicity: u32,
}

#[derive(Serialize)]
struct InvariantRecord {
    #[serde(serialize_with = "fixed")]
    s: f64,
    principal: Vec<Curvature>,
    m: u32,
    #[serde(serialize_with = "fixed")]
    alpha: f64,
    #[serde(serialize_with = "fixed")]
    alpha2: f64,
    #[serde(serialize_with = "fixed")]
    a2: f64,
    #[serde(serialize_with = "fixed")]
    cauchy_gap: f64,
    #[serde(serialize_with = "fixed_opt")]
    residual: Option<f64>,
}

impl Row for InvariantRecord {
    fn header() -> Vec<&'static str> {
        vec!["s", "m", "alpha", "alpha2", "a2", "cauchy_gap", "residual", "principal"]
    }

    fn cells(&self) -> Vec<String> {
        let principal: Vec<String> =
            self.principal.iter().map(|p| format!("{}x{}", fmt_f64(p.k), p.multiplicity)).collect();
        vec![
            fmt_f64(self.s),
            self.m.to_string(),
            fmt_f64(self.alpha),
            fmt_f64(self.alpha2),
            fmt_f64(self.a2),
            fmt_f64(self.cauchy_gap),
            cell_f64_opt(self.residual),
            principal.join(";"),
        ]
    }
}

pub fn invariants(a: &InvariantsArgs, sink: &Sink) -> Result<()> {
    let fam = family(&a.family)?;
    let period = fam.degree().period();
    let params: Vec<f64> = match a.grid {
        Some(0) => return Err(usage("--grid must be positive")),
        Some(n) => (1..=n).map(|i| period * i as f64 / (n + 1) as f64).collect(),
        None if a.s.is_empty() => return Err(usage("give --s or --grid")),
        None => a.s.clone(),
    };
    if a.r.is_some_and(|r| r < 2) {
        return Err(usage("--r must be at least 2"));
    }
    let records = params
        .iter()
        .map(|&s| {
            let inv = family_invariants(&fam, s)?;
            let res = a.r.map(|r| HarmonicityQuery::new(a.c as f64, inv.m, r, inv.a2, inv.alpha2()).residual());
            Ok(InvariantRecord {
                s,
                principal: inv.principal.iter().map(|p| Curvature { k: p.k, multiplicity: p.multiplicity }).collect(),
                m: inv.m,
                alpha: inv.alpha,
                alpha2: inv.alpha2(),
                a2: inv.a2,
                cauchy_gap: inv.cauchy_gap(),
                residual: res,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let summary = serde_json::json!({ "family": fam.to_string(), "members": records.len() });
    sink.emit(&document(
        "invariants",
        echo(a),
        "principal curvatures k_i = cot(s + (i-1)π/ℓ); alpha = Σ m_i k_i / m; a2 = Σ m_i k_i²; \
         residual = a2² − m c a2 − (r−2) m² c alpha²",
        summary,
        records,
    ))
}

// ---------------------------------------------------------------- roots

#[derive(Serialize)]
struct RootRecord {
    variable: &'static str,
    #[serde(serialize_with = "fixed")]
    value: f64,
    exact: Option<Rat>,
    lo: Option<Rat>,
    hi: Option<Rat>,
    multiplicity: u32,
    parity: &'static str,
    /// Members of the family attached to the root; empty when it is excluded.
    #[serde(serialize_with = "fixed_vec")]
    s_values: Vec<f64>,
    note: Option<String>,
}

impl Row for RootRecord {
    fn header() -> Vec<&'static str> {
        vec!["variable", "value", "lo", "hi", "multiplicity", "parity", "s_values", "note"]
    }

    fn cells(&self) -> Vec<String> {
        vec![
            self.variable.to_string(),
            fmt_f64(self.value),
            self.lo.as_ref().map(Rat::cell).unwrap_or_default(),
            self.hi.as_ref().map(Rat::cell).unwrap_or_default(),
            self.multiplicity.to_string(),
            self.parity.to_string(),
            join_f64(&self.s_values),
            cell_opt(&self.note),
        ]
    }
}

#[derive(Serialize)]
struct PolySummary {
    family: Option<String>,
    b: Option<Rat>,
    r: u64,
    polynomial: &'static str,
    /// Coefficients in ascending degree.
    coefficients: Vec<Rat>,
    count: usize,
}

fn parity(m: u32) -> &'static str {
    if m % 2 == 1 {
        "odd"
    } else {
        "even"
    }
}

pub fn roots(a: &RootsArgs, sink: &Sink) -> Result<()> {
    if a.r < 2 {
        return Err(usage("--r must be at least 2"));
    }
    let degree = Degree::from_u32(a.degree)?;
    let (fam, b) = if degree == Degree::Four && a.b.is_some() {
        let (b, mults) = resolve_ratio(&a.b, a.m1, a.m2)?;
        let fam = mults.map(|(m1, m2)| IsoparametricFamily::new(degree, m1, m2)).transpose()?;
        (fam, Some(b))
    } else {
        if a.b.is_some() {
            return Err(usage("--b applies to degree 4 only"));
        }
        let m1 = a.m1.ok_or_else(|| usage("--m1 is required"))?;
        let fam = IsoparametricFamily::new(degree, m1, a.m2.unwrap_or(m1))?;
        let b = (degree == Degree::Four).then(|| ratio(fam.m2() as i64, fam.m1() as i64));
        (Some(fam), b)
    };
    let equal = match (&fam, &b) {
        (Some(f), _) => f.equal_multiplicities(),
        (None, Some(b)) => *b == int(1),
        (None, None) => unreachable!("degree 4 always has a ratio"),
    };
    let (polynomial, coefficients, records): (&'static str, Vec<BigRational>, Vec<RootRecord>) = match degree {
        Degree::One => {
            // cot² s = r − 1  ⟺  sin² s = 1/r
            let u = ratio(1, a.r as i64);
            let s = (1.0 / a.r as f64).sqrt().asin();
            let rec = RootRecord {
                variable: "u = sin^2 s",
                value: 1.0 / a.r as f64,
                exact: Some(Rat::from(&u)),
                lo: None,
                hi: None,
                multiplicity: 1,
                parity: "odd",
                s_values: vec![s, PI - s],
                note: None,
            };
            ("r u - 1", vec![int(-1), int(a.r as i64)], vec![rec])
        }
        Degree::Two => {
            let f = fam.expect("degree 2 has multiplicities");
            let p = clifford_polynomial(f.m1(), f.m2(), a.r);
            let u0 = ratio(f.m1() as i64, (f.m1() + f.m2()) as i64);
            let records = isolate_real_roots(&p, &int(0), &int(1))
                .into_iter()
                .map(|mut br| {
                    let minimal = br.lo <= u0 && u0 <= br.hi && br.factor.eval(&u0) == int(0);
                    let (u, v) = refine_in_unit_interval(&mut br);
                    let s = u.sqrt().atan2(v.sqrt());
                    RootRecord {
                        variable: "u = sin^2 s",
                        value: if minimal { polyharm::rational::to_f64(&u0) } else { u },
                        exact: minimal.then(|| Rat::from(&u0)),
                        lo: Some(Rat::from(&br.lo)),
                        hi: Some(Rat::from(&br.hi)),
                        multiplicity: br.multiplicity,
                        parity: parity(br.multiplicity),
                        s_values: if minimal { Vec::new() } else { vec![s] },
                        note: minimal.then(|| "minimal Clifford torus, not proper".to_string()),
                    }
                })
                .collect();
            ("A² − m A u(1−u) − (r−2) B u(1−u), A = m1(1−u)² + m2 u², B = (m1(1−u) − m2 u)²", p.coeffs().to_vec(), records)
        }
        _ if equal => {
            let q = criterion::quadratic_for_degree(degree, a.r)?;
            let roots = degree_roots(&q);
            let params = roots_to_parameters(degree, &roots.iter().map(|x| x.x).collect::<Vec<_>>());
            let records = roots
                .iter()
                .enumerate()
                .map(|(i, root)| RootRecord {
                    variable: "x = cos(2 l s)",
                    value: root.x,
                    exact: root.exact.as_ref().map(Rat::from),
                    lo: None,
                    hi: None,
                    multiplicity: root.multiplicity,
                    parity: parity(root.multiplicity),
                    s_values: params.values.iter().filter(|(_, j)| *j == i).map(|(s, _)| *s).collect(),
                    note: None,
                })
                .collect();
            let coeffs = [&q.c, &q.b, &q.a].map(|c| BigRational::from_integer(c.clone())).to_vec();
            ("r x² + b x + c in x = cos(2ℓs)", coeffs, records)
        }
        _ => {
            let b = b.clone().expect("degree 4 has a ratio");
            let p = HarmonicQuartic::build(&b, a.r)?;
            let records = p
                .roots_in_unit_interval()
                .into_iter()
                .map(|root| RootRecord {
                    variable: "y = cos^2(2s)",
                    value: root.refined,
                    exact: (root.lo == root.hi).then(|| Rat::from(&root.lo)),
                    s_values: vec![root.parameter()],
                    lo: Some(Rat::from(&root.lo)),
                    hi: Some(Rat::from(&root.hi)),
                    multiplicity: root.multiplicity,
                    parity: match root.parity {
                        Parity::Odd => "odd",
                        Parity::Even => "even",
                    },
                    note: None,
                })
                .collect();
            ("P_{b,r}(y) = Q_b(y) − r R_b(y) in y = cos²(2s)", p.poly().coeffs().to_vec(), records)
        }
    };
    let summary = PolySummary {
        family: fam.map(|f| f.to_string()),
        b: b.as_ref().map(Rat::from),
        r: a.r,
        polynomial,
        coefficients: coefficients.iter().map(Rat::from).collect(),
        count: records.len(),
    };
    sink.emit(&document("roots", echo(a), "roots in the open interval of the reduced polynomial", summary, records))
}

// ---------------------------------------------------------------- classify

#[derive(Serialize)]
struct SolutionRecord {
    #[serde(serialize_with = "fixed")]
    s: f64,
    multiplicity: u32,
    source: &'static str,
    /// `u`, `x` or `y` depending on the source; absent for spheres.
    #[serde(serialize_with = "fixed_opt")]
    root: Option<f64>,
    exact: Option<Rat>,
    #[serde(serialize_with = "fixed")]
    alpha: f64,
    #[serde(serialize_with = "fixed")]
    a2: f64,
    #[serde(serialize_with = "fixed")]
    residual: f64,
    #[serde(serialize_with = "fixed")]
    relative_residual: f64,
}

impl Row for SolutionRecord {
    fn header() -> Vec<&'static str> {
        vec!["s", "multiplicity", "source", "root", "alpha", "a2", "residual", "relative_residual"]
    }

    fn cells(&self) -> Vec<String> {
        vec![
            fmt_f64(self.s),
            self.multiplicity.to_string(),
            self.source.to_string(),
            cell_f64_opt(self.root),
            fmt_f64(self.alpha),
            fmt_f64(self.a2),
            fmt_f64(self.residual),
            fmt_f64(self.relative_residual),
        ]
    }
}

#[derive(Serialize)]
struct ClassifySummary {
    family: String,
    r: u64,
    count: u32,
    regime: &'static str,
    notes: Vec<String>,
}

fn solution_records(res: &ClassificationResult) -> Result<Vec<SolutionRecord>> {
    res.solutions
        .iter()
        .map(|sol| {
            let relative_residual = reverify(&res.family, res.r, sol.s)?;
            let (source, root, exact) = match &sol.source {
                SolutionSource::Sphere => ("sphere", None, None),
                SolutionSource::Clifford { u } => ("clifford", Some(*u), None),
                SolutionSource::Quadratic { x, exact } => ("quadratic", Some(*x), exact.as_ref().map(Rat::from)),
                SolutionSource::Quartic { y, .. } => ("quartic", Some(*y), None),
            };
            Ok(SolutionRecord {
                s: sol.s,
                multiplicity: sol.multiplicity,
                source,
                root,
                exact,
                alpha: sol.invariants.alpha,
                a2: sol.invariants.a2,
                residual: sol.residual,
                relative_residual,
            })
        })
        .collect()
}

fn regime(r: Regime) -> &'static str {
    match r {
        Regime::None => "none",
        Regime::Some => "some",
    }
}

pub fn classify(a: &ClassifyArgs, sink: &Sink) -> Result<()> {
    let fam = family(&a.family)?;
    let res = classify_family(&fam, a.r)?;
    let records = solution_records(&res)?;
    let summary =
        ClassifySummary { family: fam.to_string(), r: a.r, count: res.count, regime: regime(res.regime), notes: res.notes };
    sink.emit(&document(
        "classify",
        echo(a),
        "members M_s with a2² − m a2 − (r−2) m² alpha² = 0 and alpha ≠ 0, each re-verified from its invariants",
        summary,
        records,
    ))
}

// ---------------------------------------------------------------- thresholds

#[derive(Serialize)]
struct ThresholdRecord {
    b: Rat,
    y0: Rat,
    #[serde(serialize_with = "fixed")]
    y1: f64,
    #[serde(serialize_with = "fixed")]
    y2: f64,
    #[serde(serialize_with = "fixed")]
    r1: f64,
    #[serde(serialize_with = "fixed")]
    r2: f64,
    #[serde(serialize_with = "fixed")]
    rstar_value: f64,
    #[serde(serialize_with = "fixed")]
    rstarstar_value: f64,
    rstar: u64,
    rstarstar: u64,
    bound_rstar: u64,
    bound_rstarstar: u64,
    brute_force: Option<BruteForce>,
    warnings: Vec<String>,
}

#[derive(Serialize)]
struct BruteForce {
    r_max: u64,
    grid: usize,
    rstar: u64,
    rstarstar: u64,
}

impl From<&ThresholdReport> for ThresholdRecord {
    fn from(rep: &ThresholdReport) -> Self {
        ThresholdRecord {
            b: Rat::from(&rep.b),
            y0: Rat::from(&rep.y0),
            y1: rep.y1.y,
            y2: rep.y2.y,
            r1: rep.r1,
            r2: rep.r2,
            rstar_value: rep.rstar_value,
            rstarstar_value: rep.rstarstar_value,
            rstar: rep.rstar,
            rstarstar: rep.rstarstar,
            bound_rstar: rep.bounds.bound_rstar,
            bound_rstarstar: rep.bounds.bound_rstarstar,
            brute_force: None,
            warnings: rep.warnings.clone(),
        }
    }
}

impl Row for ThresholdRecord {
    fn header() -> Vec<&'static str> {
        vec!["b", "y1", "y2", "R1", "R2", "rstar", "rstarstar", "bound_rstar", "bound_rstarstar"]
    }

    fn cells(&self) -> Vec<String> {
        vec![
            self.b.cell(),
            fmt_f64(self.y1),
            fmt_f64(self.y2),
            fmt_f64(self.r1),
            fmt_f64(self.r2),
            self.rstar.to_string(),
            self.rstarstar.to_string(),
            self.bound_rstar.to_string(),
            self.bound_rstarstar.to_string(),
        ]
    }
}

const THRESHOLD_PROVENANCE: &str = "r* and r** from the two minima R1, R2 of R(y) = Q_b(y)/R_b(y) on (0, y0) and \
     (y0, 1), located through the exact roots of the derivative numerator; bounds evaluate R at y0/2 and (1+y0)/2";

/// Checks the closed-form ordering `rstar ≤ bound` that every report must satisfy.
fn check_report(rep: &ThresholdReport) -> Result<()> {
    if rep.rstar > rep.rstarstar || rep.rstar > rep.bounds.bound_rstar || rep.rstarstar > rep.bounds.bound_rstarstar {
        return Err(Error::Verification(format!(
            "b = {}: orders ({}, {}) are inconsistent with bounds ({}, {})",
            rep.b, rep.rstar, rep.rstarstar, rep.bounds.bound_rstar, rep.bounds.bound_rstarstar
        ))
        .into());
    }
    Ok(())
}

pub fn thresholds(a: &ThresholdsArgs, sink: &Sink) -> Result<()> {
    let (b, mults) = resolve_ratio(&a.ratio.b, a.ratio.m1, a.ratio.m2)?;
    let rep = minimize(&b)?;
    check_report(&rep)?;
    let mut rec = ThresholdRecord::from(&rep);
    if a.brute_force {
        let (m1, m2) = mults.unwrap_or_else(|| {
            let (n, d) = (b.numer(), b.denom());
            (u32::try_from(d).unwrap_or(u32::MAX), u32::try_from(n).unwrap_or(u32::MAX))
        });
        let fam = IsoparametricFamily::new(Degree::Four, m1, m2)?;
        let r_max = a.r_max.unwrap_or(rep.bounds.bound_rstarstar + 5);
        let bf = brute_force_thresholds(&fam, r_max, a.grid)?;
        if (bf.rstar, bf.rstarstar) != (rep.rstar, rep.rstarstar) {
            return Err(Error::Verification(format!(
                "scan gives ({}, {}) but the exact minimization gives ({}, {})",
                bf.rstar, bf.rstarstar, rep.rstar, rep.rstarstar
            ))
            .into());
        }
        rec.brute_force = Some(BruteForce { r_max, grid: a.grid, rstar: bf.rstar, rstarstar: bf.rstarstar });
    }
    let summary = serde_json::json!({ "b": Rat::from(&b) });
    sink.emit(&document("thresholds", echo(a), THRESHOLD_PROVENANCE, summary, vec![rec]))
}

// ---------------------------------------------------------------- bounds

#[derive(Serialize)]
struct BoundsRecord {
    b: Rat,
    /// `R(y0/2) = 8(b² + 6b + 10)/(b(b+2))`.
    v_rstar: Rat,
    /// `R((1+y0)/2) = (8 + 48b + 80b²)/(1+2b)`.
    v_rstarstar: Rat,
    /// The same values in the `1 + V` form.
    display_rstar: Rat,
    display_rstarstar: Rat,
    bound_rstar: u64,
    bound_rstarstar: u64,
    note: Option<String>,
}

impl BoundsRecord {
    fn new(b: &BigRational, ub: &UpperBounds) -> Self {
        let (d1, d2) = ub.display_values();
        BoundsRecord {
            b: Rat::from(b),
            v_rstar: Rat::from(&ub.v_rstar),
            v_rstarstar: Rat::from(&ub.v_rstarstar),
            display_rstar: Rat::from(&d1),
            display_rstarstar: Rat::from(&d2),
            bound_rstar: ub.bound_rstar,
            bound_rstarstar: ub.bound_rstarstar,
            note: ub.note.clone(),
        }
    }
}

impl Row for BoundsRecord {
    fn header() -> Vec<&'static str> {
        vec!["b", "v_rstar", "v_rstarstar", "bound_rstar", "bound_rstarstar"]
    }

    fn cells(&self) -> Vec<String> {
        vec![
            self.b.cell(),
            self.v_rstar.cell(),
            self.v_rstarstar.cell(),
            self.bound_rstar.to_string(),
            self.bound_rstarstar.to_string(),
        ]
    }
}

pub fn bounds(a: &RatioArgs, sink: &Sink) -> Result<()> {
    let (b, _) = resolve_ratio(&a.b, a.m1, a.m2)?;
    let ub = upper_bounds(&b)?;
    let rec = BoundsRecord::new(&b, &ub);
    sink.emit(&document(
        "bounds",
        echo(a),
        "r* <= ceil(R(y0/2)) and r** <= ceil(R((1+y0)/2)) with R = Q_b/R_b and y0 = b/(1+b)",
        serde_json::json!({}),
        vec![rec],
    ))
}

// ---------------------------------------------------------------- scan

#[derive(Serialize)]
struct BracketRecord {
    #[serde(serialize_with = "fixed")]
    lo: f64,
    #[serde(serialize_with = "fixed")]
    hi: f64,
    #[serde(serialize_with = "fixed")]
    s: f64,
    kind: &'static str,
    multiplicity: u32,
}

impl Row for BracketRecord {
    fn header() -> Vec<&'static str> {
        vec!["lo", "hi", "s", "kind", "multiplicity"]
    }

    fn cells(&self) -> Vec<String> {
        vec![fmt_f64(self.lo), fmt_f64(self.hi), fmt_f64(self.s), self.kind.to_string(), self.multiplicity.to_string()]
    }
}

#[derive(Serialize)]
struct ScanSummary {
    family: String,
    r: u64,
    count: u32,
    negative_samples: bool,
    /// Zeros at the minimal member, which are not counted.
    #[serde(serialize_with = "fixed_vec")]
    minimal_zeros: Vec<f64>,
}

pub fn scan(a: &ScanArgs, sink: &Sink) -> Result<()> {
    let fam = family(&a.family)?;
    if a.r < 2 {
        return Err(usage("--r must be at least 2"));
    }
    let rep = scan_residual(&fam, a.r, a.grid, a.eps)?;
    let records = rep
        .brackets
        .iter()
        .map(|b| BracketRecord {
            lo: b.lo,
            hi: b.hi,
            s: b.s,
            kind: match b.kind {
                BracketKind::SignChange => "sign-change",
                BracketKind::Tangency => "tangency",
            },
            multiplicity: b.multiplicity,
        })
        .collect();
    let summary = ScanSummary {
        family: fam.to_string(),
        r: a.r,
        count: rep.count(),
        negative_samples: rep.has_negative_sample(),
        minimal_zeros: rep.minimal.iter().map(|b| b.s).collect(),
    };
    sink.emit(&document(
        "scan",
        echo(a),
        "sign changes and near-zero extrema of T_r(s) on a uniform grid of [eps, π/ℓ − eps]",
        summary,
        records,
    ))
}

// ---------------------------------------------------------------- verify-geom

#[derive(Serialize)]
struct SampleRecord {
    #[serde(serialize_with = "fixed_vec")]
    u: Vec<f64>,
    #[serde(serialize_with = "fixed_vec")]
    shape_eigenvalues: Vec<f64>,
    #[serde(serialize_with = "fixed")]
    f: f64,
    #[serde(serialize_with = "fixed")]
    a2: f64,
}

impl Row for SampleRecord {
    fn header() -> Vec<&'static str> {
        vec!["u", "f", "a2", "shape_eigenvalues"]
    }

    fn cells(&self) -> Vec<String> {
        vec![join_f64(&self.u), fmt_f64(self.f), fmt_f64(self.a2), join_f64(&self.shape_eigenvalues)]
    }
}

#[derive(Serialize)]
struct CriterionSummary {
    r: u64,
    #[serde(serialize_with = "fixed")]
    value: f64,
    #[serde(serialize_with = "fixed")]
    tolerance: f64,
    holds: bool,
}

#[derive(Serialize)]
struct GeomSummary {
    chart: String,
    #[serde(serialize_with = "fixed_vec")]
    exact_principal: Vec<f64>,
    exact_f: F64,
    exact_a2: F64,
    mean_f: F64,
    mean_a2: F64,
    f_deviation: F64,
    a2_deviation: F64,
    /// `|Δ̄H − f|A|²η|` at the first sample point.
    laplacian_residual: F64,
    criterion: Option<CriterionSummary>,
    normal_convention: &'static str,
}

/// Relative tolerance for the surveyed invariants against the closed form.
const GEOM_TOLERANCE: f64 = 1e-6;

fn chart_from(a: &GeomArgs) -> Result<(Chart, String)> {
    match a.chart {
        ChartChoice::Sphere => {
            let m = a.m.ok_or_else(|| usage("--m is required for a sphere chart"))?;
            let radius = match (a.r, a.radius) {
                (Some(r), None) if r >= 1 => 1.0 / (r as f64).sqrt(),
                (Some(_), None) => return Err(usage("--r must be positive")),
                (None, Some(radius)) => radius,
                _ => return Err(usage("give exactly one of --r and --radius")),
            };
            Ok((Chart::small_sphere(m, radius)?, format!("S^{m}({})", fmt_f64(radius))))
        }
        ChartChoice::Clifford => {
            let (m1, m2, s) = match (a.m1, a.m2, a.s) {
                (Some(m1), Some(m2), Some(s)) => (m1, m2, s),
                _ => return Err(usage("--m1, --m2 and --s are required for a Clifford chart")),
            };
            let chart = Chart::clifford_from_parameter(m1, m2, s)?;
            Ok((chart, format!("S^{m1}({}) x S^{m2}({})", fmt_f64(s.sin()), fmt_f64(s.cos()))))
        }
    }
}

pub fn verify_geom(a: &GeomArgs, sink: &Sink) -> Result<()> {
    let (chart, name) = chart_from(a)?;
    if a.points == 0 {
        return Err(usage("--points must be positive"));
    }
    let rep = geomlab::survey(&chart, a.points, a.h, true)?;
    let (k, f, a2) = chart.exact_invariants();
    let scale = a2.max(1.0);
    if (rep.mean_a2 - a2).abs() > GEOM_TOLERANCE * scale || (rep.mean_f - f).abs() > GEOM_TOLERANCE * scale.sqrt() {
        return Err(Error::Verification(format!(
            "{name}: surveyed (f, |A|²) = ({}, {}) but the closed form gives ({f}, {a2})",
            rep.mean_f, rep.mean_a2
        ))
        .into());
    }
    let u0 = &rep.samples[0].u;
    let lap = geomlab::verify_mean_curvature_laplacian(&chart, u0, a.h)?;
    let criterion = match a.criterion_r.or(a.r) {
        Some(r) => {
            let c = geomlab::check_criterion_on_chart(&chart, r)?;
            Some(CriterionSummary { r, value: c.value, tolerance: c.tolerance, holds: c.holds })
        }
        None => None,
    };
    let records = rep
        .samples
        .iter()
        .map(|s| SampleRecord { u: s.u.clone(), shape_eigenvalues: s.shape_eigenvalues.clone(), f: s.f, a2: s.a2 })
        .collect();
    let summary = GeomSummary {
        chart: name,
        exact_principal: k,
        exact_f: F64(f),
        exact_a2: F64(a2),
        mean_f: F64(rep.mean_f),
        mean_a2: F64(rep.mean_a2),
        f_deviation: F64(rep.f_deviation),
        a2_deviation: F64(rep.a2_deviation),
        laplacian_residual: F64(lap.residual_norm),
        criterion,
        normal_convention: rep.normal_convention,
    };
    sink.emit(&document(
        "verify-geom",
        echo(a),
        "first and second fundamental forms by central differences with one Richardson step, \
         compared with the closed-form principal curvatures of the chart",
        summary,
        records,
    ))
}

// ---------------------------------------------------------------- table

#[derive(Serialize)]
struct TableRow {
    section: &'static str,
    degree: u32,
    m1: Option<u32>,
    m2: Option<u32>,
    b: Option<Rat>,
    rstar: u64,
    rstarstar: u64,
    bound_rstar: Option<u64>,
    bound_rstarstar: Option<u64>,
}

impl Row for TableRow {
    fn header() -> Vec<&'static str> {
        vec!["section", "degree", "m1", "m2", "b", "rstar", "rstarstar", "bound_rstar", "bound_rstarstar"]
    }

    fn cells(&self) -> Vec<String> {
        vec![
            self.section.to_string(),
            self.degree.to_string(),
            cell_opt(&self.m1),
            cell_opt(&self.m2),
            self.b.as_ref().map(Rat::cell).unwrap_or_default(),
            self.rstar.to_string(),
            self.rstarstar.to_string(),
            cell_opt(&self.bound_rstar),
            cell_opt(&self.bound_rstarstar),
        ]
    }
}

/// Ratios listed in the headline table.
const TABLE_RATIOS: [(i64, i64); 6] = [(1, 1), (8, 7), (2, 1), (10, 1), (100, 1), (10000, 1)];

/// Smallest order with a proper solution, found by classifying r = 2, 3, …
fn first_order(fam: &IsoparametricFamily) -> Result<(u64, u32)> {
    for r in 2..=10_000 {
        let res = classify_family(fam, r)?;
        if res.count > 0 {
            return Ok((r, res.count));
        }
    }
    Err(Error::Verification(format!("{fam}: no proper solution up to r = 10000")).into())
}

pub fn table(sink: &Sink) -> Result<()> {
    let mut rows = Vec::new();
    for degree in [Degree::Three, Degree::Four, Degree::Six] {
        let fam = IsoparametricFamily::uniform(degree, 1)?;
        let (r, count) = first_order(&fam)?;
        if count != 4 {
            return Err(Error::Verification(format!("{fam}: {count} solutions at the first order {r}")).into());
        }
        rows.push(TableRow {
            section: "equal-multiplicity threshold",
            degree: degree.get(),
            m1: Some(1),
            m2: Some(1),
            b: None,
            rstar: r,
            rstarstar: r,
            bound_rstar: None,
            bound_rstarstar: None,
        });
    }
    let reports: Vec<(BigRational, ThresholdReport)> = TABLE_RATIOS
        .par_iter()
        .map(|&(n, d)| {
            let b = ratio(n, d);
            let rep = minimize(&b)?;
            check_report(&rep)?;
            Ok((b, rep))
        })
        .collect::<Result<_>>()?;
    for (b, rep) in &reports {
        rows.push(TableRow {
            section: "critical orders",
            degree: 4,
            m1: u32::try_from(b.denom()).ok(),
            m2: u32::try_from(b.numer()).ok(),
            b: Some(Rat::from(b)),
            rstar: rep.rstar,
            rstarstar: rep.rstarstar,
            bound_rstar: Some(rep.bounds.bound_rstar),
            bound_rstarstar: Some(rep.bounds.bound_rstarstar),
        });
    }
    sink.emit(&document(
        "table",
        serde_json::json!({}),
        "first orders with proper solutions for equal multiplicities; r*, r** and their closed-form bounds \
         for degree 4 with b = m2/m1",
        serde_json::json!({ "rows": rows.len() }),
        rows,
    ))
}

// ---------------------------------------------------------------- sweep

#[derive(Serialize)]
struct OrderRecord {
    r: u64,
    count: u32,
    regime: &'static str,
    #[serde(serialize_with = "fixed_vec")]
    s_values: Vec<f64>,
}

impl Row for OrderRecord {
    fn header() -> Vec<&'static str> {
        vec!["r", "count", "regime", "s_values"]
    }

    fn cells(&self) -> Vec<String> {
        vec![self.r.to_string(), self.count.to_string(), self.regime.to_string(), join_f64(&self.s_values)]
    }
}

pub fn sweep(a: &SweepArgs, sink: &Sink) -> Result<()> {
    if !a.b_list.is_empty() {
        let records: Vec<ThresholdRecord> = a
            .b_list
            .par_iter()
            .map(|b| {
                let rep = minimize(b)?;
                check_report(&rep)?;
                Ok(ThresholdRecord::from(&rep))
            })
            .collect::<Result<_>>()?;
        let summary = serde_json::json!({ "ratios": records.len() });
        return sink.emit(&document("sweep", echo(a), THRESHOLD_PROVENANCE, summary, records));
    }
    let (Some(from), Some(to)) = (a.r_from, a.r_to) else {
        return Err(usage("give --b-list, or --degree/--m1 with --r-from and --r-to"));
    };
    if from > to {
        return Err(usage(format!("empty range: --r-from {from} is greater than --r-to {to}")));
    }
    if from < 2 {
        return Err(usage("--r-from must be at least 2"));
    }
    let degree = a.degree.ok_or_else(|| usage("--degree is required with an order range"))?;
    let m1 = a.m1.ok_or_else(|| usage("--m1 is required with an order range"))?;
    let fam = family(&FamilyArgs { degree, m1, m2: a.m2 })?;
    let records: Vec<OrderRecord> = (from..=to)
        .into_par_iter()
        .map(|r| {
            let res = classify_family(&fam, r)?;
            for sol in &res.solutions {
                reverify(&fam, r, sol.s)?;
            }
            Ok(OrderRecord {
                r,
                count: res.count,
                regime: regime(res.regime),
                s_values: res.solutions.iter().map(|s| s.s).collect(),
            })
        })
        .collect::<Result<_>>()?;
    let summary = serde_json::json!({ "family": fam.to_string(), "orders": records.len() });
    sink.emit(&document(
        "sweep",
        echo(a),
        "number of proper r-harmonic members for each order in the range",
        summary,
        records,
    ))
}
