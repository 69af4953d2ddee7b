use liouville_iso::corpus::{cone_area, rearrangement_weight};
use liouville_iso::rearrange::{
    cone_eta, cone_tau0, default_s_grid, distribution, rearrangement, solve_radial_liouville,
    verify_chain, DEFAULT_GRID_POINTS,
};
use liouville_iso::{Error, RadialProfile, RearrangementData};
use std::f64::consts::PI;

const K0S: [f64; 3] = [0.0, 0.5, 1.0];
const ALPHAS: [f64; 4] = [-0.5, 0.0, 0.5, 0.75];

fn sup_error(p: &RadialProfile) -> f64 {
    p.nodes()
        .map(|(r, e)| (e - cone_eta(p.k0, p.alpha, p.c, r).unwrap()).abs())
        .fold(0.0, f64::max)
}

fn data(p: &RadialProfile) -> RearrangementData {
    rearrangement(p, &default_s_grid(p.mu0(), DEFAULT_GRID_POINTS)).unwrap()
}

fn grid() -> impl Iterator<Item = RadialProfile> {
    K0S.iter().flat_map(|&k0| {
        ALPHAS
            .iter()
            .map(move |&a| solve_radial_liouville(k0, a, rearrangement_weight(k0, a)).unwrap())
    })
}

#[test]
fn shooting_matches_closed_form_on_grid() {
    for p in grid() {
        let err = sup_error(&p);
        assert!(err <= 1e-8, "K₀={} α={}: {err}", p.k0, p.alpha);
        assert!(p.nodes().all(|(_, e)| e >= -1e-12));
        let etas: Vec<f64> = p.nodes().map(|(_, e)| e).collect();
        if p.k0 > 0.0 {
            assert!(etas.windows(2).all(|w| w[1] < w[0]));
        }
        assert!(p.eta_at(1.0).unwrap().abs() < 1e-12);
    }
}

#[test]
fn round_sphere_is_critical() {
    let p = solve_radial_liouville(1.0, 0.0, 1.0).unwrap();
    assert!((p.t_plus - 4f64.ln()).abs() < 1e-8);
    assert!(sup_error(&p) <= 1e-8, "{}", sup_error(&p));
    assert!((cone_tau0(1.0f64, 0.0, 1.0).unwrap() - 2.0).abs() < 1e-15);
}

#[test]
fn zero_curvature_profile() {
    let p = solve_radial_liouville(0.0, 0.5, 1.0).unwrap();
    assert!(p.nodes().all(|(_, e)| e == 0.0));
    let d = data(&p);
    assert!(d.f.iter().all(|f| *f == 0.0) && d.p_plus.iter().all(|x| *x == 0.0));
    assert!(verify_chain(&d, 1e-6).all_pass());
}

#[test]
fn supercritical_weight_has_no_solution() {
    // K₀C = 1 > (1 − ½)².
    assert!(matches!(solve_radial_liouville(1.0, 0.5, 1.0), Err(Error::Shooting(_))));
    assert!(solve_radial_liouville(1.0, 1.0, 1.0).is_err());
    assert!(solve_radial_liouville(-1.0, 0.0, 1.0).is_err());
}

#[test]
fn distribution_examples() {
    let p = solve_radial_liouville(1.0, 0.0, 1.0).unwrap();
    let levels: Vec<f64> = (0..=20).map(|k| p.t_plus * k as f64 / 20.0).collect();
    let mu = distribution(&p, &levels).unwrap();
    assert!((mu[0] - PI).abs() < 1e-14);
    assert_eq!(mu[20], 0.0);
    assert!(mu.windows(2).all(|w| w[1] < w[0]));
    for (t, m) in levels.iter().zip(&mu) {
        let r = p.level_radius(*t).unwrap();
        assert!((m - PI * r * r).abs() < 1e-14);
    }
    let q = solve_radial_liouville(0.5, -0.5, rearrangement_weight(0.5, -0.5)).unwrap();
    let mu = distribution(&q, &[0.0]).unwrap();
    assert!((mu[0] - PI * q.c / 1.5).abs() < 1e-13);
}

#[test]
fn rearrangement_endpoints() {
    for p in grid().filter(|p| p.k0 > 0.0) {
        let d = data(&p);
        let n = d.s_grid.len() - 1;
        assert_eq!(d.s_grid[0], 0.0);
        assert!((d.s_grid[n] - d.mu0).abs() < 1e-15 * d.mu0);
        assert!(d.eta_star[n].abs() < 1e-12);
        assert!((d.eta_star[0] - p.t_plus).abs() < 1e-12);
        assert_eq!(d.f[0], 0.0);
        // M(B₁) in the cone metric e^{ψ+η} = cone(K₀, α, τ₀√C).
        let tau = cone_tau0(p.k0, p.alpha, p.c).unwrap() * p.c.sqrt();
        let m = cone_area(p.k0, p.alpha, tau, 1.0);
        assert!((d.mass - m).abs() < 1e-10 * m, "{} vs {m}", d.mass);
        assert!((d.f[n] - 2.0 * p.k0 * m).abs() < 1e-10 * m);
        assert!(d.eta_star.windows(2).all(|w| w[1] <= w[0]));
        assert!(d.f.windows(2).all(|w| w[1] >= w[0]));
    }
}

#[test]
fn inversion_consistency() {
    for p in grid().filter(|p| p.k0 > 0.0) {
        let d = data(&p);
        let n = d.s_grid.len();
        let mu = distribution(&p, &d.eta_star[1..n - 1]).unwrap();
        for (s, m) in d.s_grid[1..n - 1].iter().zip(&mu) {
            assert!((s - m).abs() <= 1e-8 * d.mu0.max(1.0), "K₀={} α={}: {s} vs {m}", p.k0, p.alpha);
        }
    }
}

#[test]
fn f_prime_identity() {
    for p in grid().filter(|p| p.k0 > 0.0) {
        let d = data(&p);
        let (s, f) = (&d.s_grid, &d.f);
        for i in (50..s.len() - 50).step_by(25) {
            // Derivative of the quadratic through three neighbouring nodes.
            let (h0, h1) = (s[i] - s[i - 1], s[i + 1] - s[i]);
            let num = -h1 / (h0 * (h0 + h1)) * f[i - 1] + (h1 - h0) / (h0 * h1) * f[i]
                + h0 / (h1 * (h0 + h1)) * f[i + 1];
            let want = d.f_prime[i];
            assert!((num - want).abs() <= 1e-6 * want, "K₀={} α={} s={}: {num} vs {want}", p.k0, p.alpha, s[i]);
        }
    }
}

#[test]
fn cone_chain_is_equality() {
    for p in grid() {
        let d = data(&p);
        let v = verify_chain(&d, 1e-6);
        assert!(v.all_pass(), "K₀={} α={}: {v:?}", p.k0, p.alpha);
        let m = d.mass;
        let sharp = (4.0 * PI - 4.0 * PI * d.alpha - d.k0 * m) * m;
        assert!((d.boundary_length_sq - sharp).abs() <= 1e-6 * d.boundary_length_sq);
        let f_end = d.f[d.f.len() - 1];
        let jump = d.p_plus[d.p_plus.len() - 1] - d.p_plus[0];
        if p.alpha >= 0.0 {
            assert!(jump.abs() <= 1e-6 * (f_end * f_end).max(1.0), "K₀={} α={}: {jump}", p.k0, p.alpha);
            assert!(v.chain_margin.abs() <= 1e-6 * d.boundary_length_sq);
        } else {
            // A negative atom does not enter 𝒦₊: γ = 2π and the chain is strict.
            assert_eq!(d.gamma, 2.0 * PI);
            assert!(p.k0 == 0.0 || (jump > 0.0 && v.chain_margin > 1e-3), "{jump} {}", v.chain_margin);
        }
    }
}

#[test]
fn strict_subsolution_has_positive_margin() {
    let p = solve_radial_liouville(1.0, 0.0, rearrangement_weight(1.0, 0.0)).unwrap();
    for &eps in &[0.01, 0.1] {
        let d = data(&p.scaled(1.0 - eps));
        let v = verify_chain(&d, 1e-6);
        assert!(v.monotone.pass && v.monotone.worst_margin >= 0.0, "ε={eps}: {v:?}");
        assert!(v.all_pass());
        let gain = d.p_plus[d.p_plus.len() - 1] - d.p_plus[0];
        assert!(gain > 0.0 && v.chain_margin > 1e-3, "ε={eps}: {gain} {}", v.chain_margin);
    }
}

#[test]
fn critical_weight_scaled_profile_is_not_monotone() {
    // With C = 1 the scaled profile is not a subsolution where η > 1, and P₊ dips near s = 0.
    let p = solve_radial_liouville(1.0, 0.0, 1.0).unwrap();
    let d = data(&p.scaled(0.99));
    let v = verify_chain(&d, 1e-8);
    assert!(!v.monotone.pass);
    assert!(v.monotone.worst_margin < -5e-5 && v.monotone.worst_margin > -2e-4, "{}", v.monotone.worst_margin);
    assert!(v.length.pass && v.area.pass && v.chain_margin > 0.0);
}

#[test]
fn lipschitz_estimate_is_stable() {
    for p in grid().filter(|p| p.k0 > 0.0) {
        let coarse = verify_chain(&data(&p), 1e-6).lipschitz;
        let fine_grid = default_s_grid(p.mu0(), 2 * DEFAULT_GRID_POINTS - 1);
        let fine = verify_chain(&rearrangement(&p, &fine_grid).unwrap(), 1e-6).lipschitz;
        assert!(coarse.finite && fine.finite && coarse.constant > 0.0);
        let ratio = fine.constant / coarse.constant;
        assert!((0.5..=2.0).contains(&ratio), "K₀={} α={}: {ratio}", p.k0, p.alpha);
    }
}

#[test]
fn grid_outside_range_is_rejected() {
    let p = solve_radial_liouville(1.0, 0.0, 0.75).unwrap();
    assert!(rearrangement(&p, &[0.0, p.mu0() * 1.01]).is_err());
    assert!(rearrangement(&p, &[0.5, 0.2]).is_err());
    assert!(distribution(&p, &[-1.0]).is_err());
}
