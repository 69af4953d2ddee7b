use liouville_iso::corpus::{self, annulus_regression as reg};
use liouville_iso::domain::Curve;
use liouville_iso::iso::{
    alexandrov_check, alexandrov_regular_check, bol_check, fit_sharp_metric, huber_check,
    huber_regular_check, SharpDiagnostic, DEFAULT_TOL,
};
use liouville_iso::{Curvature, Domain, Error, Measure, Metric, Point64 as P};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn o() -> P {
    P::new(0.0, 0.0)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn curv(g: &Metric) -> Curvature {
    Curvature::of_metric(g).unwrap()
}

#[test]
fn huber_examples() {
    for &r in &[0.3, 1.0, 2.5] {
        let rep = huber_check(&Metric::flat(), &Domain::ball(r).unwrap(), 1e-8).unwrap();
        assert!(rel(rep.lhs, 4.0 * PI * PI * r * r) < 1e-12);
        assert!(rep.equality && rep.holds() && !rep.vacuous);
        assert!(rep.relative_deficit().abs() <= 1e-8);
    }
    for &alpha in &[0.1, 0.5, 0.8] {
        let g = Metric::pure_atoms(Measure::single(o(), 4.0 * PI * alpha));
        let rep = huber_check(&g, &Domain::ball(1.0).unwrap(), 1e-8).unwrap();
        assert!(rel(rep.lhs, 4.0 * PI * PI) < 1e-10);
        assert!(rel(rep.rhs, 4.0 * PI * PI) < 1e-8, "α={alpha}: {}", rep.rhs);
        assert!(rep.equality, "α={alpha}: {}", rep.relative_deficit());
    }
    let sq = Domain::polygon(vec![P::new(-1.0, -1.0), P::new(1.0, -1.0), P::new(1.0, 1.0), P::new(-1.0, 1.0)])
        .unwrap();
    let rep = huber_check(&Metric::flat(), &sq, DEFAULT_TOL).unwrap();
    assert!(rel(rep.lhs, 64.0) < 1e-12 && rel(rep.rhs, 16.0 * PI) < 1e-9);
    assert!(!rep.equality && rep.passes());
    assert!(huber_check(&Metric::flat(), &Domain::annulus(o(), 0.5, 1.0).unwrap(), 1e-6).is_err());
}

#[test]
fn huber_regular_examples() {
    let (r0, r1) = (0.4, 1.3);
    let u = Domain::annulus(o(), r0, r1).unwrap();
    let e = Domain::ball(r1).unwrap();
    let rep = huber_regular_check(&Metric::flat(), &u, &e, DEFAULT_TOL).unwrap();
    let margin = 4.0 * PI * PI * (r1 + r0).powi(2) - 4.0 * PI * PI * (r1 * r1 - r0 * r0);
    assert!(rel(rep.deficit, margin) < 1e-9, "{} vs {margin}", rep.deficit);
    assert!(rep.must_be_strict && rep.passes());

    let disk = Domain::disk(P::new(0.2, 0.1), 0.9).unwrap();
    let g = Metric::pure_atoms(Measure::new([(P::new(0.3, 0.0), PI), (P::new(-0.2, 0.3), -PI)]));
    let a = huber_check(&g, &disk, DEFAULT_TOL).unwrap();
    let b = huber_regular_check(&g, &disk, &disk, DEFAULT_TOL).unwrap();
    assert_eq!((a.lhs, a.rhs, a.deficit), (b.lhs, b.rhs, b.deficit));
    assert!(!b.must_be_strict);

    // e^f = |z|^{−1}: M(U) = π, L(∂U) = 2π(1 + √½).
    let g = Metric::pure_atoms(Measure::single(o(), 2.0 * PI));
    let u = Domain::annulus(o(), 0.5, 1.0).unwrap();
    let rep = huber_regular_check(&g, &u, &Domain::ball(1.0).unwrap(), DEFAULT_TOL).unwrap();
    assert!(rel(rep.lhs, (2.0 * PI * (1.0 + 0.5f64.sqrt())).powi(2)) < 1e-10);
    assert!(rel(rep.rhs, 2.0 * PI * PI) < 1e-8, "{}", rep.rhs);
    assert!(rep.passes() && !rep.equality);

    let err = huber_regular_check(&Metric::flat(), &Domain::ball(2.0).unwrap(), &e, DEFAULT_TOL);
    assert!(matches!(err, Err(Error::NotSubset)));
}

#[test]
fn annulus_deficit_grows_with_hole() {
    let r1 = 1.0;
    let e = Domain::ball(r1).unwrap();
    let mut last = 0.0;
    for k in 1..=9 {
        let r0 = 0.1 * k as f64;
        let u = Domain::annulus(o(), r0, r1).unwrap();
        let rep = huber_regular_check(&Metric::flat(), &u, &e, DEFAULT_TOL).unwrap();
        assert!(rep.deficit > last, "R₀={r0}: {} ≤ {last}", rep.deficit);
        last = rep.deficit;
    }
}

#[test]
fn alexandrov_examples() {
    for &a2 in &[0.0, -0.25, -0.5, -0.75] {
        let g = Metric::example2(-0.9, a2).unwrap();
        let c = curv(&g);
        for &r in &[0.25, 0.5, 1.0] {
            let rep = alexandrov_check(&g, &c, &Domain::ball(r).unwrap(), 1.0, DEFAULT_TOL).unwrap();
            assert!(rep.deficit.abs() <= 1e-6 * rep.lhs, "α₂={a2} R={r}: {}", rep.deficit);
            assert!(rel(rep.lhs, corpus::example2_length_sq(a2, r)) < 1e-6);
            assert!(rel(rep.inputs.m, corpus::example2_area(a2, r)) < 1e-6);
            assert!(rep.equality);
        }
    }

    let sphere = Metric::spherical_cone(1.0, 0.0, 2.0).unwrap();
    for &r in &[0.2, 0.6, 0.95] {
        let rep = alexandrov_check(&sphere, &curv(&sphere), &Domain::ball(r).unwrap(), 1.0, 1e-8).unwrap();
        let l2 = 16.0 * PI * PI * r * r / (1.0 + r * r).powi(2);
        assert!(rel(rep.lhs, l2) < 1e-10 && rep.equality);
        assert!(rel(rep.inputs.m, 4.0 * PI * r * r / (1.0 + r * r)) < 1e-8);
    }

    let g = Metric::example2(-0.75, -0.25).unwrap();
    let rep = alexandrov_check(&g, &curv(&g), &Domain::ball(2.0).unwrap(), 1.0, DEFAULT_TOL).unwrap();
    assert!(rep.passes() && !rep.equality, "{}", rep.relative_deficit());
    assert!(rep.relative_deficit() > 1e-3);

    let err = alexandrov_check(&g, &curv(&g), &Domain::ball(0.5).unwrap(), -1.0, DEFAULT_TOL);
    assert!(matches!(err, Err(Error::InvalidParameter(_))));
}

#[test]
fn vacuous_reports_are_flagged() {
    let g = Metric::example2(-0.75, -0.5).unwrap();
    let rep = alexandrov_check(&g, &curv(&g), &Domain::ball(3.0).unwrap(), 50.0, DEFAULT_TOL).unwrap();
    assert!(rep.vacuous && rep.rhs < 0.0 && rep.holds());
}

#[test]
fn regular_check_examples() {
    let ann = Domain::annulus(o(), 0.5, 1.0).unwrap();
    let flat = Metric::flat();
    let a = alexandrov_regular_check(&flat, &curv(&flat), &ann, 0.0, DEFAULT_TOL).unwrap();
    let b = huber_regular_check(&flat, &ann, &ann.fill_holes(), DEFAULT_TOL).unwrap();
    assert!(rel(a.deficit, b.deficit) < 1e-12);
    assert!(a.must_be_strict && a.passes());

    let g = Metric::example2(reg::ALPHA1, reg::ALPHA2).unwrap();
    let c = curv(&g);
    let e = Domain::annulus(o(), reg::INNER, reg::OUTER).unwrap();
    let rep = alexandrov_regular_check(&g, &c, &e, reg::K0, DEFAULT_TOL).unwrap();
    assert!(rel(rep.lhs, reg::LHS) < 1e-9);
    assert!(rel(rep.rhs, reg::RHS) < 1e-8);
    assert!((rep.deficit - reg::MARGIN).abs() < 1e-6);
    assert!(rel(rep.inputs.m, reg::AREA) < 1e-8);
    assert!(rel(rep.inputs.k_plus, 2.0 * PI * reg::ALPHA2.abs()) < 1e-12);
    assert!(rep.deficit >= 1e-3 && rep.passes() && !rep.equality);

    let d = Domain::ball(0.7).unwrap();
    let a = alexandrov_regular_check(&g, &c, &d, 1.0, DEFAULT_TOL).unwrap();
    let b = alexandrov_check(&g, &c, &d, 1.0, DEFAULT_TOL).unwrap();
    assert_eq!((a.lhs, a.rhs), (b.lhs, b.rhs));
    assert!(!a.must_be_strict && a.passes());
}

#[test]
fn bol_examples() {
    let g = Metric::example2(-0.75, -0.5).unwrap();
    let rep = bol_check(&g, &curv(&g), &Domain::ball(1.0).unwrap(), DEFAULT_TOL).unwrap();
    assert!(rel(rep.lhs, PI * PI) < 1e-9 && rel(rep.rhs, PI * PI) < 1e-7);
    assert!(rep.equality);

    let g = Metric::example2(0.0, 0.0).unwrap();
    let rep = bol_check(&g, &curv(&g), &Domain::ball(1.0).unwrap(), DEFAULT_TOL).unwrap();
    assert!(rel(rep.lhs, 4.0 * PI * PI) < 1e-9 && rep.equality);
    for &r in &[0.1, 0.4, 0.8] {
        let rep = bol_check(&g, &curv(&g), &Domain::ball(r).unwrap(), DEFAULT_TOL).unwrap();
        assert!(rep.equality, "R={r}");
    }
    // Small disks around a cone point: samples sit close to the atom.
    for &a2 in &[-0.25, -0.5, -0.75] {
        let g = Metric::example2(-0.9, a2).unwrap();
        let rep = bol_check(&g, &curv(&g), &Domain::ball(0.25).unwrap(), DEFAULT_TOL).unwrap();
        assert!(rep.equality, "α₂={a2}: {}", rep.relative_deficit());
    }

    let g = Metric::example2(-0.75, -0.5).unwrap();
    let err = bol_check(&g, &curv(&g), &Domain::ball(2.0).unwrap(), DEFAULT_TOL);
    assert!(matches!(err, Err(Error::Precondition(_))));
}

#[test]
fn scaling_covariance() {
    let cases = [
        (Metric::spherical_cone(1.0, 0.25, 1.3).unwrap(), Domain::ball(0.8).unwrap(), 1.0),
        (Metric::example2(-0.75, -0.25).unwrap(), Domain::ball(2.0).unwrap(), 1.0),
        (Metric::example2(-0.5, -0.5).unwrap(), Domain::disk(P::new(0.2, 0.1), 0.5).unwrap(), 0.5),
    ];
    for (g, e, k0) in cases {
        let base = alexandrov_check(&g, &curv(&g), &e, k0, DEFAULT_TOL).unwrap();
        for &lambda in &[0.5, 3.0] {
            let s = g.scaled(lambda);
            let l2 = lambda * lambda;
            let rep = alexandrov_check(&s, &curv(&s), &e, k0 / l2, DEFAULT_TOL).unwrap();
            assert!(rel(rep.lhs, l2 * base.lhs) < 1e-9);
            assert!(rel(rep.inputs.m, l2 * base.inputs.m) < 1e-8);
            // L², M and the rhs all carry one factor λ².
            let d_want = l2 * base.deficit;
            assert!((rep.deficit - d_want).abs() <= 1e-7 * l2 * base.lhs, "λ={lambda}: {} vs {d_want}", rep.deficit);
            assert_eq!(rep.equality, base.equality);
        }
    }
}

#[test]
fn adding_a_positive_atom_lowers_rhs() {
    let g = Metric::example2(-0.5, -0.25).unwrap();
    let e = Domain::ball(0.8).unwrap();
    let c = curv(&g);
    let base = alexandrov_check(&g, &c, &e, 1.0, DEFAULT_TOL).unwrap();
    let mut more = c.clone();
    more.k_s_atoms = c.k_s_atoms.sum(&Measure::single(P::new(0.3, 0.2), 0.4));
    let rep = alexandrov_check(&g, &more, &e, 1.0, DEFAULT_TOL).unwrap();
    assert!(rep.rhs < base.rhs);
    assert!(rel(base.rhs - rep.rhs, 2.0 * 0.4 * base.inputs.m) < 1e-10);
    // An atom outside E changes nothing.
    more.k_s_atoms = c.k_s_atoms.sum(&Measure::single(P::new(1.3, 0.2), 0.4));
    assert_eq!(alexandrov_check(&g, &more, &e, 1.0, DEFAULT_TOL).unwrap().rhs, base.rhs);
}

#[test]
fn sharp_fit_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let e = Domain::ball(1.0).unwrap();
    for _ in 0..20 {
        let (k0, alpha, tau0) = corpus::random_cone_parameters(&mut rng);
        let g = Metric::spherical_cone(k0, alpha, tau0).unwrap();
        let fit = fit_sharp_metric(&g, &curv(&g), &e, k0, 64, DEFAULT_TOL).unwrap();
        assert!(fit.sharp, "{:?}", fit.diagnostics);
        assert!((fit.alpha - alpha).abs() <= 1e-9 * alpha.max(1e-3), "{} vs {alpha}", fit.alpha);
        assert!(rel(fit.tau, tau0) < 1e-9, "{} vs {tau0}", fit.tau);
        assert!(fit.mobius.norm() < 1e-9 && fit.residual < 1e-9);
    }
}

#[test]
fn sharp_fit_on_example2() {
    let a2 = -0.5;
    let g = Metric::example2(-0.75, a2).unwrap();
    let fit = fit_sharp_metric(&g, &curv(&g), &Domain::ball(0.5).unwrap(), 1.0, 64, DEFAULT_TOL).unwrap();
    assert!(fit.sharp && fit.residual <= 1e-6, "{:?}", fit.diagnostics);
    assert!((fit.alpha - a2.abs()).abs() < 1e-12);
    let tau = 2.0 * (1.0 + a2) / 2f64.powf(1.0 + a2);
    assert!(rel(fit.tau, tau) < 1e-8, "{} vs {tau}", fit.tau);

    let fit = fit_sharp_metric(&g, &curv(&g), &Domain::ball(2.0).unwrap(), 1.0, 64, DEFAULT_TOL).unwrap();
    assert!(!fit.sharp);
    assert!(fit
        .diagnostics
        .iter()
        .any(|d| matches!(d, SharpDiagnostic::CurvatureMismatch { .. })));
}

#[test]
fn sharp_fit_off_centre_disk() {
    // An apex off the disk centre is not extremal for that disk: the verdict
    // must agree with the strict Alexandrov inequality.
    let g = Metric::spherical_cone(1.0, 0.3, 0.9).unwrap();
    let e = Domain::disk(P::new(0.2, -0.1), 0.7).unwrap();
    let fit = fit_sharp_metric(&g, &curv(&g), &e, 1.0, 64, DEFAULT_TOL).unwrap();
    let rep = alexandrov_check(&g, &curv(&g), &e, 1.0, DEFAULT_TOL).unwrap();
    assert!((fit.alpha - 0.3).abs() < 1e-12);
    assert!(!rep.equality && !fit.sharp, "{} {:?}", rep.relative_deficit(), fit.diagnostics);
    assert!(fit.diagnostics.iter().any(|d| matches!(d, SharpDiagnostic::Residual { .. })));

    // The flat metric is extremal on every disk (α = 0, K₀ = 0).
    let flat = Metric::flat();
    let fit = fit_sharp_metric(&flat, &curv(&flat), &e, 0.0, 64, DEFAULT_TOL).unwrap();
    assert!(fit.sharp && fit.alpha == 0.0, "{:?}", fit.diagnostics);
}

#[test]
fn sharp_fit_recovers_mobius_centre() {
    // τ²|Φ₀′|²|Φ₀|^{−2α}/(1 + k|Φ₀|^{2β})² with the apex at z₀ = c + aR.
    let (k0, alpha, tau): (f64, f64, f64) = (1.0, 0.3, 0.8);
    let (c, r, a): (P, f64, P) = (P::new(0.2, -0.1), 0.7, P::new(0.25, 0.3));
    let beta = 1.0 - alpha;
    let k = k0 * tau * tau / (4.0 * beta * beta);
    let z0 = c + a * r;
    let u = move |z: P| {
        let zeta = (z - c) / r;
        let den = P::new(1.0, 0.0) - a.conj() * zeta;
        let phi = (zeta - a) / den;
        let dphi = (1.0 - a.norm_sqr()) / (den * den * r);
        2.0 * tau.ln() + 2.0 * dphi.norm().ln() + 2.0 * alpha * (den.norm().ln() + r.ln())
            - 2.0 * (1.0 + k * phi.norm().powf(2.0 * beta)).ln()
    };
    let g = Metric::potential(
        liouville_iso::poly::HarmonicPoly::zero(),
        Measure::single(z0, 4.0 * PI * alpha),
        liouville_iso::metric::RegularPart::custom(u),
    );
    let e = Domain::disk(c, r).unwrap();
    let c_g = curv(&g).with_density(liouville_iso::Density::Constant(k0));
    let fit = fit_sharp_metric(&g, &c_g, &e, k0, 64, DEFAULT_TOL).unwrap();
    assert!(fit.sharp, "{:?}", fit.diagnostics);
    assert!((fit.mobius - a).norm() < 1e-12);
    assert!(rel(fit.tau, tau) < 1e-9 && fit.residual < 1e-9);
    let rep = alexandrov_check(&g, &c_g, &e, k0, DEFAULT_TOL).unwrap();
    assert!(rep.equality, "{}", rep.relative_deficit());
}

#[test]
fn sharp_fit_diagnostics() {
    let e = Domain::ball(1.0).unwrap();
    let g = Metric::pure_atoms(Measure::new([(P::new(0.3, 0.0), PI), (P::new(-0.3, 0.0), PI)]));
    let fit = fit_sharp_metric(&g, &curv(&g), &e, 0.0, 64, DEFAULT_TOL).unwrap();
    assert!(!fit.sharp);
    assert!(fit.diagnostics.iter().any(|d| matches!(d, SharpDiagnostic::MultipleAtoms { count: 2 })));

    let g = Metric::pure_atoms(Measure::single(P::new(0.3, 0.0), -PI));
    let fit = fit_sharp_metric(&g, &curv(&g), &e, 0.0, 64, DEFAULT_TOL).unwrap();
    assert!(!fit.sharp);
    assert!(fit.diagnostics.iter().any(|d| matches!(d, SharpDiagnostic::NegativeAtom { .. })));

    let sq = Domain::polygon(vec![P::new(0.0, 0.0), P::new(1.0, 0.0), P::new(0.0, 1.0)]).unwrap();
    assert!(fit_sharp_metric(&g, &curv(&g), &sq, 0.0, 16, DEFAULT_TOL).is_err());
}

#[test]
fn small_soundness_sweeps() {
    let mut rng = ChaCha8Rng::seed_from_u64(1234);
    for _ in 0..25 {
        let inst = corpus::random_alexandrov_instance(&mut rng).unwrap();
        let rep = alexandrov_check(&inst.metric, &inst.curvature, &inst.domain, inst.k0, DEFAULT_TOL).unwrap();
        assert!(rep.holds(), "deficit {} err {}", rep.deficit, rep.error_estimate);
        let inst = corpus::random_huber_instance(&mut rng).unwrap();
        let rep = huber_check(&inst.metric, &inst.domain, DEFAULT_TOL).unwrap();
        assert!(rep.holds(), "deficit {} err {}", rep.deficit, rep.error_estimate);
    }
}

#[test]
fn polygon_hole_counts_as_multiply_connected() {
    let e = Domain::ball(1.0)
        .unwrap()
        .with_hole(Curve::Polygon(vec![P::new(-0.2, -0.2), P::new(0.2, -0.2), P::new(0.0, 0.2)]))
        .unwrap();
    let rep = huber_regular_check(&Metric::flat(), &e, &e.fill_holes(), DEFAULT_TOL).unwrap();
    assert!(rep.must_be_strict && rep.passes() && rep.deficit > 0.0);
}
