//! Frozen values. Critical orders come from an independent 50-digit oracle
//! (roots of the derivative numerator in mpmath); the rest are closed forms.

use num_rational::BigRational;

use polyharm::criterion::{classify, scan_residual, SolutionSource, DEFAULT_EPS};
use polyharm::family::{invariants, minimal_parameter};
use polyharm::geomlab::{check_criterion_on_chart, verify_power_law, Chart};
use polyharm::quartic::{equal_mult_consistency, HarmonicQuartic};
use polyharm::rational::{int, ratio, to_f64};
use polyharm::thresholds::{brute_force_thresholds, minimize, BRUTE_FORCE_GRID};
use polyharm::{Degree, IsoparametricFamily};

const ORDERS: [((i64, i64), u64, u64); 9] = [
    ((1, 1), 42, 42),
    ((8, 7), 38, 47),
    ((2, 1), 26, 74),
    ((5, 1), 15, 168),
    ((10, 1), 11, 325),
    ((100, 1), 6, 3141),
    ((10000, 1), 5, 312919),
    ((3, 2), 31, 58),
    ((4, 1), 17, 137),
];

#[test]
fn critical_orders_match_the_oracle() {
    for ((n, d), rstar, rstarstar) in ORDERS {
        let rep = minimize(&ratio(n, d)).unwrap();
        assert_eq!((rep.rstar, rep.rstarstar), (rstar, rstarstar), "b = {n}/{d}");
        let y0 = to_f64(&rep.y0);
        assert!(rep.y1.y < y0 && y0 < rep.y2.y);
    }
}

#[test]
fn brute_force_pins_b_two() {
    let fam = IsoparametricFamily::new(Degree::Four, 1, 2).unwrap();
    let bf = brute_force_thresholds(&fam, 90, BRUTE_FORCE_GRID).unwrap();
    assert_eq!((bf.rstar, bf.rstarstar), (26, 74));
    assert_eq!(bf.counts[(26 - 2) as usize], 2);
    assert_eq!(bf.counts[(74 - 2) as usize], 4);
}

#[test]
fn brute_force_equal_multiplicities() {
    let fam = IsoparametricFamily::new(Degree::Four, 3, 3).unwrap();
    let bf = brute_force_thresholds(&fam, 50, BRUTE_FORCE_GRID).unwrap();
    assert_eq!((bf.rstar, bf.rstarstar), (42, 42));
}

#[test]
fn large_ratio_family_at_its_second_order() {
    let fam = IsoparametricFamily::new(Degree::Four, 1, 10000).unwrap();
    let res = classify(&fam, 312919).unwrap();
    assert_eq!(res.count, 4);
    assert!(res.solutions.iter().all(|s| s.relative_residual() < 1e-9));
    assert!(classify(&fam, 312918).unwrap().count < 4);
    assert_eq!(classify(&fam, 4).unwrap().count, 0);
    assert!(classify(&fam, 5).unwrap().count >= 2);
}

#[test]
fn classified_parameters_reproduce_their_roots() {
    for (d, m, r) in [(Degree::Three, 2, 25), (Degree::Four, 1, 60), (Degree::Six, 1, 130)] {
        let fam = IsoparametricFamily::uniform(d, m).unwrap();
        let two_l = 2.0 * fam.ell() as f64;
        for sol in classify(&fam, r).unwrap().solutions {
            let SolutionSource::Quadratic { x, .. } = sol.source else { panic!("{:?}", sol.source) };
            assert!(((two_l * sol.s).cos() - x).abs() < 1e-12);
        }
    }
}

#[test]
fn degree_six_stays_positive_below_threshold() {
    let fam = IsoparametricFamily::uniform(Degree::Six, 1).unwrap();
    let rep = scan_residual(&fam, 109, 1_000_000, DEFAULT_EPS).unwrap();
    assert!(!rep.has_negative_sample());
    assert_eq!(rep.count(), 0);
}

#[test]
fn equal_multiplicity_quartic_has_no_common_zero_below_threshold() {
    for k in -99..100 {
        let x = ratio(k, 100);
        let c = equal_mult_consistency(41, &x).unwrap();
        assert!(c.quadratic_value > int(0), "x = {x}");
    }
    assert!(HarmonicQuartic::build(&int(1), 41).unwrap().roots_in_unit_interval().is_empty());
}

#[test]
fn minimal_member_of_unequal_degree_four() {
    let fam = IsoparametricFamily::new(Degree::Four, 1, 2).unwrap();
    assert!(invariants(&fam, minimal_parameter(&fam)).unwrap().alpha.abs() < 1e-12);
    let fam = IsoparametricFamily::new(Degree::Four, 1, 3).unwrap();
    assert!((minimal_parameter(&fam) - std::f64::consts::PI / 12.0).abs() < 1e-15);
}

#[test]
fn triharmonic_clifford_torus() {
    // the proper root u = sin² s of the (1, 2) Clifford polynomial at r = 3
    let u: f64 = 0.610_166_501_699_547_35;
    let chart = Chart::clifford_from_parameter(1, 2, u.sqrt().asin()).unwrap();
    assert!(check_criterion_on_chart(&chart, 3).unwrap().holds);
    assert!(!check_criterion_on_chart(&chart, 4).unwrap().holds);
}

#[test]
fn power_law_on_minimal_charts_vanishes() {
    let chart = Chart::clifford_torus(1, 1, 0.5f64.sqrt(), 0.5f64.sqrt()).unwrap();
    for p in [1, 2] {
        let chk = verify_power_law(&chart, p, &[0.9, 1.3], 1e-3).unwrap();
        // the finite-difference mean curvature is ~1e-9 here, not exactly 0
        assert!(chk.residual_norm < 1e-12, "p={p}: residual {}", chk.residual_norm);
        assert!(chk.computed.norm() < 1e-8);
    }
    let sphere = Chart::small_sphere(2, 1.0 / 3f64.sqrt()).unwrap();
    let one = verify_power_law(&sphere, 1, &[0.9, 1.3], 1e-3).unwrap();
    let two = verify_power_law(&sphere, 2, &[0.9, 1.3], 1e-3).unwrap();
    let ratio_norm = two.computed.norm() / one.computed.norm();
    assert!((ratio_norm - 4.0).abs() < 1e-4, "{ratio_norm}");
}

#[test]
fn quartic_roots_give_parameters_in_the_first_half() {
    let b: BigRational = ratio(8, 7);
    let fam = IsoparametricFamily::new(Degree::Four, 7, 8).unwrap();
    for root in HarmonicQuartic::build(&b, 47).unwrap().roots_in_unit_interval() {
        let s = root.parameter();
        assert!(s > 0.0 && s < std::f64::consts::FRAC_PI_4);
        assert!(((2.0 * s).cos().powi(2) - root.refined).abs() < 1e-14);
        let t = polyharm::criterion::residual_at(&fam, 47, s).unwrap();
        let a2 = invariants(&fam, s).unwrap().a2;
        assert!(t.abs() < 1e-9 * a2 * a2);
    }
}
