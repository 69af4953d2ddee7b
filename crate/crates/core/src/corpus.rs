//! Closed-form oracles for the example metrics and seeded random instances
//! for the property sweeps. Everything here is `f64`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;

use crate::curvature::{CurvatureDecomposition, Density};
use crate::domain::{Membership, PlanarDomain};
use crate::error::Result;
use crate::measure::SignedAtomicMeasure;
use crate::metric::{MetricSpec, RegularPart};
use crate::poly::{BivariatePoly, HarmonicPoly};

/// `−(a/2)|z|^{−2}(log(e/|z|))^{−(2−a)}`.
pub fn example1_curvature(a: f64, z: Complex64) -> f64 {
    let r = z.norm();
    -0.5 * a / (r * r) * (1.0 - r.ln()).powf(-(2.0 - a))
}

/// `1` inside the unit circle, `σ = (1+α₁)²/(1+α₂)²` outside.
pub fn example2_curvature(alpha1: f64, alpha2: f64, z: Complex64) -> f64 {
    if z.norm() < 1.0 {
        1.0
    } else {
        ((1.0 + alpha1) / (1.0 + alpha2)).powi(2)
    }
}

/// `L²(∂B_R)` by direct radial integration, `R ≤ 1`.
pub fn example2_length_sq(alpha2: f64, r: f64) -> f64 {
    let u = r.powf(2.0 * (1.0 + alpha2));
    16.0 * PI * PI * (1.0 + alpha2).powi(2) * u / (1.0 + u).powi(2)
}

/// `M(B_R)` by direct radial integration, `R ≤ 1`.
pub fn example2_area(alpha2: f64, r: f64) -> f64 {
    let u = r.powf(2.0 * (1.0 + alpha2));
    4.0 * PI * (1.0 + alpha2) * u / (1.0 + u)
}

/// The closed form for `L²(∂B_R)` as printed with the example; it differs
/// from [`example2_length_sq`] by a factor `R²`.
pub fn example2_length_sq_printed(alpha2: f64, r: f64) -> f64 {
    16.0 * PI * PI * (1.0 + alpha2).powi(2) * r.powf(2.0 * alpha2)
        / (1.0 + r.powf(2.0 * (1.0 + alpha2))).powi(2)
}

/// The printed closed form for `M(B_R)`; off by `R²` like the length.
pub fn example2_area_printed(alpha2: f64, r: f64) -> f64 {
    4.0 * PI * (1.0 + alpha2) * r.powf(2.0 * alpha2) / (1.0 + r.powf(2.0 * (1.0 + alpha2)))
}

/// Total area of the glued sphere: `2π(1+α₂) + 2π(1+α₁)/σ`.
pub fn example2_total_area(alpha1: f64, alpha2: f64) -> f64 {
    let sigma = ((1.0 + alpha1) / (1.0 + alpha2)).powi(2);
    2.0 * PI * (1.0 + alpha2) + 2.0 * PI * (1.0 + alpha1) / sigma
}

/// `2π(2 + α₁ + α₂)`.
pub fn example2_smooth_curvature(alpha1: f64, alpha2: f64) -> f64 {
    2.0 * PI * (2.0 + alpha1 + alpha2)
}

/// Regression values for the hole-filled check on Example 2 with
/// `α₂ = −1/2` (`α₁ = −3/4`), `K₀ = 1`, `E = {1/2 < |z| < 3/4}`, from the
/// one-dimensional radial integrals.
pub mod annulus_regression {
    pub const ALPHA1: f64 = -0.75;
    pub const ALPHA2: f64 = -0.5;
    pub const K0: f64 = 1.0;
    pub const INNER: f64 = 0.5;
    pub const OUTER: f64 = 0.75;
    pub const LHS: f64 = 36.86059016119074;
    pub const RHS: f64 = 3.401768410352795;
    pub const MARGIN: f64 = 33.45882175083795;
    pub const AREA: f64 = 0.5983986006837703;
}

/// Spherical cone lengths on `B_r`, centred at the apex.
pub fn cone_length_sq(k0: f64, alpha: f64, tau0: f64, r: f64) -> f64 {
    let b = 1.0 - alpha;
    let x = k0 * tau0 * tau0 * r.powf(2.0 * b) / (4.0 * b * b);
    let len = 2.0 * PI * tau0.abs() * r.powf(b) / (1.0 + x);
    len * len
}

/// Spherical cone area of `B_r`: `4πβ x/(K₀(1+x))` with `x` as in the
/// denominator, or `πτ₀²r^{2β}/β` when `K₀ = 0`.
pub fn cone_area(k0: f64, alpha: f64, tau0: f64, r: f64) -> f64 {
    let b = 1.0 - alpha;
    if k0 == 0.0 {
        return PI * tau0 * tau0 * r.powf(2.0 * b) / b;
    }
    let x = k0 * tau0 * tau0 * r.powf(2.0 * b) / (4.0 * b * b);
    4.0 * PI * b * x / (k0 * (1.0 + x))
}

/// Weight of the `C r^{−2α}` rearrangement runs: `C = 3(1−α)²/(4K₀)`, or
/// `1` for `K₀ = 0`. Strictly below the existence threshold `K₀C = (1−α)²`.
pub fn rearrangement_weight(k0: f64, alpha: f64) -> f64 {
    if k0 == 0.0 {
        1.0
    } else {
        0.75 * (1.0 - alpha).powi(2) / k0
    }
}

/// A metric, its curvature decomposition, a domain and a `K₀`.
#[derive(Debug, Clone)]
pub struct Instance {
    pub metric: MetricSpec<f64>,
    pub curvature: CurvatureDecomposition<f64>,
    pub domain: PlanarDomain<f64>,
    pub k0: f64,
}

fn random_domain<R: Rng>(rng: &mut R) -> PlanarDomain<f64> {
    let c = Complex64::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
    if rng.gen_bool(0.5) {
        PlanarDomain::disk(c, rng.gen_range(0.3..1.5)).expect("positive radius")
    } else {
        // Star-shaped about `c`, hence simple.
        let n = rng.gen_range(3..=7);
        let mut angles: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..2.0 * PI)).collect();
        angles.sort_by(f64::total_cmp);
        let gaps_ok = angles
            .windows(2)
            .map(|w| w[1] - w[0])
            .chain(std::iter::once(angles[0] + 2.0 * PI - angles[n - 1]))
            .all(|g| g > 0.2 && g < PI - 0.05);
        if !gaps_ok {
            return random_domain(rng);
        }
        let verts = angles
            .iter()
            .map(|t| c + Complex64::from_polar(rng.gen_range(0.4..1.4), *t))
            .collect();
        PlanarDomain::polygon(verts).unwrap_or_else(|_| PlanarDomain::disk(c, 1.0).unwrap())
    }
}

/// Atoms with weights in `(0, 4π)`, total below `4π`, at least `margin`
/// from `∂d`.
fn random_atoms<R: Rng>(rng: &mut R, d: &PlanarDomain<f64>, margin: f64) -> SignedAtomicMeasure<f64> {
    let n = rng.gen_range(0..=3);
    let (lo, hi) = d.bounding_box();
    let mut budget = 4.0 * PI * 0.95;
    let mut atoms = Vec::new();
    let mut tries = 0;
    while atoms.len() < n && tries < 200 {
        tries += 1;
        let p = Complex64::new(
            rng.gen_range(lo.re - 0.3..hi.re + 0.3),
            rng.gen_range(lo.im - 0.3..hi.im + 0.3),
        );
        if d.distance_to_boundary(p) < margin
            || atoms.iter().any(|(q, _): &(Complex64, f64)| (p - *q).norm() < margin)
        {
            continue;
        }
        let w = rng.gen_range(0.05..1.0) * budget;
        budget -= w;
        atoms.push((p, w));
    }
    SignedAtomicMeasure::new(atoms)
}

fn random_harmonic<R: Rng>(rng: &mut R) -> HarmonicPoly<f64> {
    HarmonicPoly::from_complex_coefficients(&[
        (rng.gen_range(-0.5..0.5), 0.0),
        (rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3)),
        (rng.gen_range(-0.1..0.1), rng.gen_range(-0.1..0.1)),
    ])
}

/// Pure `f`-metric (atoms plus harmonic part) on a random disk or polygon.
pub fn random_huber_instance<R: Rng>(rng: &mut R) -> Result<Instance> {
    let domain = random_domain(rng);
    let atoms = random_atoms(rng, &domain, 0.05);
    let metric = MetricSpec::potential(random_harmonic(rng), atoms, RegularPart::Zero);
    let curvature = CurvatureDecomposition::of_metric(&metric)?;
    Ok(Instance {
        metric,
        curvature,
        domain,
        k0: 0.0,
    })
}

/// `ρ = f + u` with `f` atoms plus a harmonic part, `u = a|z − c|²`
/// (`a ≥ 0`), and a radial step density `K ∈ [0, 2]`. Since `−Δu ≤ 0`,
/// `u` is a subsolution for every non-negative `K`.
pub fn random_alexandrov_instance<R: Rng>(rng: &mut R) -> Result<Instance> {
    let domain = random_domain(rng);
    let atoms = random_atoms(rng, &domain, 0.05);
    let a = rng.gen_range(0.0..0.5);
    let (cx, cy) = (rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
    // a((x−cx)² + (y−cy)²)
    let u = BivariatePoly::new([
        ((2, 0), a),
        ((0, 2), a),
        ((1, 0), -2.0 * a * cx),
        ((0, 1), -2.0 * a * cy),
        ((0, 0), a * (cx * cx + cy * cy)),
    ]);
    let metric = MetricSpec::potential(random_harmonic(rng), atoms, RegularPart::Polynomial(u));
    let center = Complex64::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
    let steps = rng.gen_range(1..=3);
    let mut breaks: Vec<f64> = (0..steps).map(|_| rng.gen_range(0.2..1.5)).collect();
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|x, y| (*x - *y).abs() < 0.05);
    // Keep the step circles off any atom.
    let atom_radii: Vec<f64> = metric.atoms().atoms().iter().map(|at| (at.point - center).norm()).collect();
    breaks.retain(|b| atom_radii.iter().all(|r| (r - b).abs() > 0.02));
    let values = (0..=breaks.len()).map(|_| rng.gen_range(0.0..2.0)).collect();
    let density = Density::radial_steps(center, breaks, values)?;
    let curvature = CurvatureDecomposition::of_metric(&metric)?.with_density(density);
    let k0 = [0.0, 0.5, 1.0][rng.gen_range(0..3)];
    Ok(Instance {
        metric,
        curvature,
        domain,
        k0,
    })
}

/// `(K₀, α, τ₀)` for round-trip fits: `K₀ ∈ (0.2, 2)`, `α ∈ [0, 0.9)`,
/// `τ₀ ∈ (0.3, 2)`.
pub fn random_cone_parameters<R: Rng>(rng: &mut R) -> (f64, f64, f64) {
    (
        rng.gen_range(0.2..2.0),
        rng.gen_range(0.0..0.9),
        rng.gen_range(0.3..2.0),
    )
}

/// True when every atom of `m` is strictly inside or strictly outside `d`.
pub fn atoms_off_boundary(m: &SignedAtomicMeasure<f64>, d: &PlanarDomain<f64>) -> bool {
    m.atoms().iter().all(|a| d.classify(a.point) != Membership::Boundary)
}
