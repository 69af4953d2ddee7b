//! Adaptive Gauss–Kronrod quadrature for lengths, areas and weighted areas of
//! singular conformal metrics, plus `L^p` growth probes around a point.
//!
//! Two-dimensional integrals are iterated one-dimensional ones over star
//! pieces: an apex `p` joined to a boundary arc, parametrized by
//! `p + s(γ(θ) − p)`. Singular points sit at an apex, where a change of
//! variable in `s` removes the singularity; points that are not apexes get a
//! smooth partition-of-unity patch of their own.

use crate::curvature::Density;
use crate::domain::{BoundaryArc, Curve, Membership, PlanarDomain};
use crate::error::{to_f64, Error, Result};
use crate::metric::MetricSpec;
pub use crate::scalar::Loc;
use crate::scalar::{cross, pairwise_sum, Point, Real};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Patches never exceed this radius.
pub const MAX_PATCH_RADIUS: f64 = 0.1;

/// Local behaviour of an integrand near a point, in the distance `r` to it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RadialBehavior<T> {
    /// `~ r^{−γ}`; integrable in the plane iff `γ < 2`.
    Power(T),
    /// Logarithmically modulated, e.g. `r^{−2}(log 1/r)^{−b}` with `b > 1`.
    Log,
}

impl<T: Real> RadialBehavior<T> {
    /// Behaviour of a product of two integrands.
    pub fn combine(self, other: Self) -> Self {
        match (self, other) {
            (RadialBehavior::Power(a), RadialBehavior::Power(b)) => RadialBehavior::Power(a + b),
            _ => RadialBehavior::Log,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Singularity<T> {
    pub at: Point<T>,
    pub behavior: RadialBehavior<T>,
}

/// Merges behaviours at identical points.
pub fn merge_singularities<T: Real>(
    a: &[Singularity<T>],
    b: &[Singularity<T>],
) -> Vec<Singularity<T>> {
    let mut out: Vec<Singularity<T>> = a.to_vec();
    for s in b {
        match out.iter_mut().find(|o| o.at == s.at) {
            Some(o) => o.behavior = o.behavior.combine(s.behavior),
            None => out.push(*s),
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance<T> {
    pub rel: T,
    pub abs: T,
    /// Cap on subintervals per one-dimensional integral.
    pub max_intervals: usize,
}

impl<T: Real> Tolerance<T> {
    pub fn new(rel: T) -> Self {
        Self {
            rel,
            abs: T::lit(1e-14),
            max_intervals: 2000,
        }
    }

    /// Default for boundary lengths.
    pub fn boundary() -> Self {
        Self::new(T::lit(1e-10))
    }

    /// Default for areas and weighted areas.
    pub fn area() -> Self {
        Self::new(T::lit(1e-8))
    }

    fn target(&self, value: T) -> T {
        self.abs.max(self.effective_rel() * value.abs())
    }

    fn effective_rel(&self) -> T {
        self.rel.max(T::epsilon() * T::lit(50.0))
    }

    fn inner(&self) -> Self {
        Self {
            rel: self.rel * T::lit(0.1),
            abs: self.abs * T::lit(0.1),
            max_intervals: self.max_intervals,
        }
    }
}

/// Value and absolute error estimate of one integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult<T> {
    pub value: T,
    pub error_estimate: T,
    /// One-dimensional subintervals used, summed over all nesting levels.
    pub cells_used: usize,
    pub singular_patches: usize,
    pub converged: bool,
}

impl<T: Real> QuadResult<T> {
    pub fn zero() -> Self {
        Self {
            value: T::zero(),
            error_estimate: T::zero(),
            cells_used: 0,
            singular_patches: 0,
            converged: true,
        }
    }

    pub fn exact(value: T) -> Self {
        Self {
            value,
            ..Self::zero()
        }
    }

    fn combine(self, other: Self, sign: T) -> Self {
        Self {
            value: self.value + sign * other.value,
            error_estimate: self.error_estimate + other.error_estimate,
            cells_used: self.cells_used + other.cells_used,
            singular_patches: self.singular_patches + other.singular_patches,
            converged: self.converged && other.converged,
        }
    }

    pub fn plus(self, other: Self) -> Self {
        self.combine(other, T::one())
    }

    pub fn minus(self, other: Self) -> Self {
        self.combine(other, -T::one())
    }

    /// Multiplies value and error by `|c|`-scaled amounts.
    pub fn scaled(self, c: T) -> Self {
        Self {
            value: self.value * c,
            error_estimate: self.error_estimate * c.abs(),
            ..self
        }
    }

    /// `value²` with a first-order error estimate.
    pub fn squared(self) -> Self {
        Self {
            value: self.value * self.value,
            error_estimate: T::lit(2.0) * self.value.abs() * self.error_estimate,
            ..self
        }
    }
}

fn sum_results<T: Real>(parts: impl IntoIterator<Item = QuadResult<T>>) -> QuadResult<T> {
    parts
        .into_iter()
        .fold(QuadResult::zero(), |acc, r| acc.plus(r))
}

struct Interval<T> {
    a: T,
    b: T,
    value: T,
    error: T,
    aux: T,
    splittable: bool,
}

/// One 15-point Kronrod rule with the embedded 7-point Gauss estimate.
/// The integrand returns `(value, aux)`; `aux` is integrated by the Kronrod
/// rule alongside and carries nested error estimates.
fn gk15<T, F>(f: &mut F, a: T, b: T) -> Result<(T, T, T)>
where
    T: Real,
    F: FnMut(T) -> Result<(T, T)>,
{
    let half = T::lit(0.5);
    let c = (a + b) * half;
    let h = (b - a) * half;
    let (fc, ac) = f(c)?;
    let mut resg = fc * T::lit(WG[3]);
    let mut resk = fc * T::lit(WGK[7]);
    let mut resabs = fc.abs() * T::lit(WGK[7]);
    let mut aux = ac * T::lit(WGK[7]);
    let mut fv1 = [T::zero(); 7];
    let mut fv2 = [T::zero(); 7];
    for j in 0..7 {
        let x = h * T::lit(XGK[j]);
        let (f1, a1) = f(c - x)?;
        let (f2, a2) = f(c + x)?;
        fv1[j] = f1;
        fv2[j] = f2;
        let w = T::lit(WGK[j]);
        resk = resk + w * (f1 + f2);
        resabs = resabs + w * (f1.abs() + f2.abs());
        aux = aux + w * (a1 + a2);
        if j % 2 == 1 {
            resg = resg + T::lit(WG[j / 2]) * (f1 + f2);
        }
    }
    let reskh = resk * half;
    let mut resasc = T::lit(WGK[7]) * (fc - reskh).abs();
    for j in 0..7 {
        resasc = resasc + T::lit(WGK[j]) * ((fv1[j] - reskh).abs() + (fv2[j] - reskh).abs());
    }
    let ah = h.abs();
    let result = resk * h;
    resabs = resabs * ah;
    resasc = resasc * ah;
    let mut err = ((resk - resg) * h).abs();
    if resasc != T::zero() && err != T::zero() {
        err = resasc * T::one().min((T::lit(200.0) * err / resasc).powf(T::lit(1.5)));
    }
    let eps = T::epsilon();
    if resabs > T::min_positive_value() / (T::lit(50.0) * eps) {
        err = err.max(eps * T::lit(50.0) * resabs);
    }
    if !result.is_finite() {
        return Err(Error::Precondition(format!(
            "integrand is not finite on [{}, {}]",
            to_f64(a),
            to_f64(b)
        )));
    }
    Ok((result, err, aux * ah))
}

fn adaptive<T, F>(mut f: F, points: &[T], tol: &Tolerance<T>) -> Result<QuadResult<T>>
where
    T: Real,
    F: FnMut(T) -> Result<(T, T)>,
{
    let mut iv: Vec<Interval<T>> = Vec::new();
    for w in points.windows(2) {
        if w[1] > w[0] {
            let (value, error, aux) = gk15(&mut f, w[0], w[1])?;
            iv.push(Interval {
                a: w[0],
                b: w[1],
                value,
                error,
                aux,
                splittable: true,
            });
        }
    }
    if iv.is_empty() {
        return Ok(QuadResult::zero());
    }
    let converged = loop {
        let total: T = iv.iter().map(|i| i.value).sum();
        let err: T = iv.iter().map(|i| i.error).sum();
        if err <= tol.target(total) {
            break true;
        }
        if iv.len() >= tol.max_intervals {
            break false;
        }
        let worst = iv
            .iter()
            .enumerate()
            .filter(|(_, i)| i.splittable)
            .max_by(|x, y| x.1.error.partial_cmp(&y.1.error).unwrap_or(std::cmp::Ordering::Equal))
            .map(|(k, _)| k);
        let Some(k) = worst else { break false };
        let (a, b) = (iv[k].a, iv[k].b);
        let m = (a + b) * T::lit(0.5);
        if !(m > a && m < b) || (b - a) <= T::epsilon() * T::lit(64.0) * a.abs().max(b.abs()) {
            iv[k].splittable = false;
            continue;
        }
        let (v1, e1, x1) = gk15(&mut f, a, m)?;
        let (v2, e2, x2) = gk15(&mut f, m, b)?;
        iv[k] = Interval {
            a,
            b: m,
            value: v1,
            error: e1,
            aux: x1,
            splittable: true,
        };
        iv.push(Interval {
            a: m,
            b,
            value: v2,
            error: e2,
            aux: x2,
            splittable: true,
        });
    };
    iv.sort_by(|x, y| x.a.partial_cmp(&y.a).unwrap_or(std::cmp::Ordering::Equal));
    let values: Vec<T> = iv.iter().map(|i| i.value).collect();
    let errors: Vec<T> = iv.iter().map(|i| i.error + i.aux.abs()).collect();
    Ok(QuadResult {
        value: pairwise_sum(&values),
        error_estimate: pairwise_sum(&errors),
        cells_used: iv.len(),
        singular_patches: 0,
        converged,
    })
}

fn sorted_points<T: Real>(mut pts: Vec<T>) -> Vec<T> {
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    pts.dedup();
    pts
}

/// `∫_a^b f` by global adaptive Gauss–Kronrod (15 points).
pub fn integrate<T, F>(mut f: F, a: T, b: T, tol: &Tolerance<T>) -> Result<QuadResult<T>>
where
    T: Real,
    F: FnMut(T) -> Result<T>,
{
    integrate_with_breaks(&mut f, &[a, b], tol)
}

/// `∫ f` over `[points[0], points[last]]`, with the interior points used as
/// initial subdivision (kinks and jumps belong there).
pub fn integrate_with_breaks<T, F>(mut f: F, points: &[T], tol: &Tolerance<T>) -> Result<QuadResult<T>>
where
    T: Real,
    F: FnMut(T) -> Result<T>,
{
    adaptive(|x| f(x).map(|v| (v, T::zero())), &sorted_points(points.to_vec()), tol)
}

/// Change of variable in the radial parameter of a star piece.
#[derive(Debug, Clone, Copy)]
enum RadialMap<T> {
    Identity,
    /// `s = u^{1/q}`.
    Power(T),
    /// `s = exp(1 − 1/u)`.
    Log,
}

impl<T: Real> RadialMap<T> {
    fn for_behavior(b: RadialBehavior<T>, at: Point<T>) -> Result<Self> {
        match b {
            RadialBehavior::Log => Ok(RadialMap::Log),
            RadialBehavior::Power(g) => {
                if !(g < T::lit(2.0)) {
                    return Err(Error::Precondition(format!(
                        "integrand ~ r^(-{}) is not integrable at ({}, {})",
                        to_f64(g),
                        to_f64(at.re),
                        to_f64(at.im)
                    )));
                }
                Ok(RadialMap::Power(T::one() - g / T::lit(2.0)))
            }
        }
    }

    /// `(s, ds/du)`.
    fn eval(self, u: T) -> (T, T) {
        match self {
            RadialMap::Identity => (u, T::one()),
            RadialMap::Power(q) => {
                let e = q.recip();
                let s = u.powf(e);
                (s, e * u.powf(e - T::one()))
            }
            RadialMap::Log => {
                if u <= T::zero() {
                    return (T::zero(), T::zero());
                }
                let s = (T::one() - u.recip()).exp();
                (s, s / (u * u))
            }
        }
    }

    fn inverse(self, s: T) -> T {
        match self {
            RadialMap::Identity => s,
            RadialMap::Power(q) => s.powf(q),
            RadialMap::Log => {
                if s <= T::zero() {
                    T::zero()
                } else {
                    (T::one() - s.ln()).recip()
                }
            }
        }
    }
}

/// `{apex + s(edge(θ) − apex) : s ∈ [s0, 1]}`.
struct StarPiece<T> {
    apex: Point<T>,
    edge: BoundaryArc<T>,
    s0: T,
    map: RadialMap<T>,
}

/// Circles `(center, radius)` across which the integrand may jump.
type Circles<T> = [(Point<T>, T)];

fn ray_circle_params<T: Real>(p: Point<T>, v: Point<T>, c: Point<T>, r: T) -> [Option<T>; 2] {
    let f = p - c;
    let qa = v.norm_sqr();
    let qb = T::lit(2.0) * (f.re * v.re + f.im * v.im);
    let qc = f.norm_sqr() - r * r;
    let disc = qb * qb - T::lit(4.0) * qa * qc;
    if qa == T::zero() || !(disc > T::zero()) {
        return [None, None];
    }
    let sq = disc.sqrt();
    [
        Some((-qb - sq) / (qa + qa)),
        Some((-qb + sq) / (qa + qa)),
    ]
}

fn star_integral<T, F>(
    piece: &StarPiece<T>,
    f: &F,
    circles: &Circles<T>,
    tol: &Tolerance<T>,
) -> Result<QuadResult<T>>
where
    T: Real,
    F: Fn(Loc<T>) -> Result<T>,
{
    let (lo, hi) = piece.edge.parameter_interval();
    let mut pts = vec![lo, hi];
    for (c, r) in circles {
        pts.extend(piece.edge.circle_crossings(*c, *r));
    }
    let inner_tol = tol.inner();
    let mut inner_cells = 0usize;
    let mut inner_converged = true;
    let apex = piece.apex;
    let map = piece.map;
    let outer = adaptive(
        |th| {
            let e = piece.edge.position(th);
            let v = e - apex;
            let jac = cross(v, piece.edge.velocity(th)).abs();
            if jac == T::zero() {
                return Ok((T::zero(), T::zero()));
            }
            let mut sb = vec![piece.s0, T::one()];
            for (c, r) in circles {
                for s in ray_circle_params(apex, v, *c, *r).into_iter().flatten() {
                    if s > piece.s0 && s < T::one() {
                        sb.push(s);
                    }
                }
            }
            let ub: Vec<T> = sb.into_iter().map(|s| map.inverse(s)).collect();
            let r = adaptive(
                |u| {
                    let (s, ds) = map.eval(u);
                    if s <= T::zero() || ds == T::zero() {
                        return Ok((T::zero(), T::zero()));
                    }
                    let offset = v * s;
                    if offset == Point::new(T::zero(), T::zero()) {
                        return Ok((T::zero(), T::zero()));
                    }
                    Ok((f(Loc { apex, offset })? * s * ds * jac, T::zero()))
                },
                &sorted_points(ub),
                &inner_tol,
            )?;
            inner_cells += r.cells_used;
            inner_converged &= r.converged;
            Ok((r.value, r.error_estimate))
        },
        &sorted_points(pts),
        tol,
    )?;
    Ok(QuadResult {
        cells_used: outer.cells_used + inner_cells,
        converged: outer.converged && inner_converged,
        ..outer
    })
}

fn quarter_arcs<T: Real>(center: Point<T>, radius: T) -> Vec<BoundaryArc<T>> {
    (0..4)
        .map(|k| BoundaryArc::Arc {
            center,
            radius,
            start: T::FRAC_PI_2() * T::lit(k as f64),
            span: T::FRAC_PI_2(),
            counterclockwise: true,
        })
        .collect()
}

/// Smooth cutoff: `1` on `x ≤ ½`, `0` on `x ≥ 1`.
pub fn bump<T: Real>(x: T) -> T {
    let half = T::lit(0.5);
    if x <= half {
        return T::one();
    }
    if x >= T::one() {
        return T::zero();
    }
    let y = (T::one() - x) / half;
    let g = |t: T| if t <= T::zero() { T::zero() } else { (-t.recip()).exp() };
    let (a, b) = (g(y), g(T::one() - y));
    a / (a + b)
}

/// Simply connected integration region.
enum Region<T> {
    /// `inner < |z − center| < radius`.
    Disk {
        center: Point<T>,
        radius: T,
        inner: T,
    },
    /// Counterclockwise vertices.
    Polygon(Curve<T>),
}

impl<T: Real> Region<T> {
    fn boundary_distance(&self, z: Point<T>) -> T {
        match self {
            Region::Disk {
                center,
                radius,
                inner,
            } => {
                let r = (z - *center).norm();
                let d = (*radius - r).abs();
                if *inner > T::zero() {
                    d.min((r - *inner).abs())
                } else {
                    d
                }
            }
            Region::Polygon(c) => c.distance(z),
        }
    }

    fn strictly_inside(&self, z: Point<T>, band: T) -> bool {
        match self {
            Region::Disk {
                center,
                radius,
                inner,
            } => {
                let r = (z - *center).norm();
                r < *radius - band && (*inner == T::zero() || r > *inner + band)
            }
            Region::Polygon(c) => c.classify(z, band) == Membership::Inside,
        }
    }
}

struct Patch<T> {
    at: Point<T>,
    radius: T,
    map: RadialMap<T>,
}

fn region_integral<T, F>(
    region: &Region<T>,
    f: &F,
    sings: &[Singularity<T>],
    circles: &Circles<T>,
    band: T,
    tol: &Tolerance<T>,
) -> Result<QuadResult<T>>
where
    T: Real,
    F: Fn(Loc<T>) -> Result<T>,
{
    let interior: Vec<Singularity<T>> = sings
        .iter()
        .filter(|s| region.strictly_inside(s.at, band))
        .copied()
        .collect();
    let apex_sing = match region {
        Region::Disk { center, inner, .. } if *inner == T::zero() => {
            interior.iter().find(|s| s.at == *center).copied()
        }
        _ => None,
    };
    let mut patches = Vec::new();
    for (i, s) in interior.iter().enumerate() {
        if Some(*s) == apex_sing {
            continue;
        }
        let mut r = T::lit(MAX_PATCH_RADIUS).min(region.boundary_distance(s.at) * T::lit(0.25));
        for (j, o) in interior.iter().enumerate() {
            if i != j {
                r = r.min((s.at - o.at).norm() * T::lit(0.25));
            }
        }
        patches.push(Patch {
            at: s.at,
            radius: r,
            map: RadialMap::for_behavior(s.behavior, s.at)?,
        });
    }
    let cover = |z: Point<T>| -> T {
        patches
            .iter()
            .map(|p| bump((z - p.at).norm() / p.radius))
            .sum()
    };
    let main = |l: Loc<T>| -> Result<T> {
        let chi = cover(l.z());
        if chi >= T::one() {
            return Ok(T::zero());
        }
        Ok((T::one() - chi) * f(l)?)
    };
    let pieces: Vec<StarPiece<T>> = match region {
        Region::Disk {
            center,
            radius,
            inner,
        } => {
            let map = match apex_sing {
                Some(s) => RadialMap::for_behavior(s.behavior, s.at)?,
                None => RadialMap::Identity,
            };
            quarter_arcs(*center, *radius)
                .into_iter()
                .map(|edge| StarPiece {
                    apex: *center,
                    edge,
                    s0: *inner / *radius,
                    map: if *inner > T::zero() {
                        RadialMap::Identity
                    } else {
                        map
                    },
                })
                .collect()
        }
        Region::Polygon(c) => c
            .triangulate()
            .into_iter()
            .map(|[a, b, cc]| StarPiece {
                apex: a,
                edge: BoundaryArc::Segment { a: b, b: cc },
                s0: T::zero(),
                map: RadialMap::Identity,
            })
            .collect(),
    };
    let mut total = QuadResult::zero();
    for piece in &pieces {
        total = total.plus(star_integral(piece, &main, circles, tol)?);
    }
    for p in &patches {
        let local = |l: Loc<T>| -> Result<T> {
            let chi = bump(l.distance_to(p.at) / p.radius);
            if chi == T::zero() {
                return Ok(T::zero());
            }
            Ok(chi * f(l)?)
        };
        for edge in quarter_arcs(p.at, p.radius) {
            let piece = StarPiece {
                apex: p.at,
                edge,
                s0: T::zero(),
                map: p.map,
            };
            total = total.plus(star_integral(&piece, &local, circles, tol)?);
        }
    }
    total.singular_patches = patches.len();
    Ok(total)
}

/// `∫_d f dx` for an integrand with the given singular points and jump circles.
pub fn integrate_over<T, F>(
    d: &PlanarDomain<T>,
    f: F,
    singularities: &[Singularity<T>],
    circles: &[(Point<T>, T)],
    tol: &Tolerance<T>,
) -> Result<QuadResult<T>>
where
    T: Real,
    F: Fn(Point<T>) -> Result<T>,
{
    integrate_over_at(d, |l: Loc<T>| f(l.z()), singularities, circles, tol)
}

/// As [`integrate_over`], handing the integrand each node as a [`Loc`]
/// relative to the nearest singular apex.
pub fn integrate_over_at<T, F>(
    d: &PlanarDomain<T>,
    f: F,
    singularities: &[Singularity<T>],
    circles: &[(Point<T>, T)],
    tol: &Tolerance<T>,
) -> Result<QuadResult<T>>
where
    T: Real,
    F: Fn(Loc<T>) -> Result<T>,
{
    let band = T::lit(crate::domain::BOUNDARY_BAND) * d.diameter().max(T::one());
    let mut holes: Vec<&Curve<T>> = d.holes().iter().collect();
    let outer = match d.outer() {
        Curve::Circle { center, radius } => {
            let concentric = holes.iter().position(|h| {
                matches!(h, Curve::Circle { center: c, .. } if *c == *center)
            });
            let inner = match concentric {
                Some(k) => match holes.remove(k) {
                    Curve::Circle { radius: r, .. } => *r,
                    Curve::Polygon(_) => unreachable!(),
                },
                None => T::zero(),
            };
            Region::Disk {
                center: *center,
                radius: *radius,
                inner,
            }
        }
        poly => Region::Polygon(poly.clone().oriented(true)),
    };
    let mut total = region_integral(&outer, &f, singularities, circles, band, tol)?;
    for h in holes {
        let region = match h {
            Curve::Circle { center, radius } => Region::Disk {
                center: *center,
                radius: *radius,
                inner: T::zero(),
            },
            poly => Region::Polygon(poly.clone().oriented(true)),
        };
        total = total.minus(region_integral(&region, &f, singularities, circles, band, tol)?);
    }
    Ok(total)
}

fn max_radius<T: Real>(d: &PlanarDomain<T>) -> (T, Point<T>) {
    match d.outer() {
        Curve::Circle { center, radius } => {
            let dir = if center.norm() > T::zero() {
                *center / center.norm()
            } else {
                Point::new(T::one(), T::zero())
            };
            (center.norm() + *radius, *center + dir * *radius)
        }
        Curve::Polygon(v) => v
            .iter()
            .map(|p| (p.norm(), *p))
            .fold((T::zero(), v[0]), |a, b| if b.0 > a.0 { b } else { a }),
    }
}

/// Rejects domains leaving the chart, singular points on `∂d` and cusps
/// inside the outer curve.
pub fn validate_domain<T: Real>(g: &MetricSpec<T>, d: &PlanarDomain<T>) -> Result<()> {
    let ext = g.extent();
    if ext.is_finite() {
        let (r, at) = max_radius(d);
        if r > ext * (T::one() + T::lit(1e-12)) {
            return Err(Error::OutsideChart {
                x: to_f64(at.re),
                y: to_f64(at.im),
            });
        }
    }
    let filled = d.fill_holes();
    for s in g.singularities() {
        if d.classify(s.at) == Membership::Boundary {
            return Err(Error::AtomOnBoundary {
                x: to_f64(s.at.re),
                y: to_f64(s.at.im),
            });
        }
    }
    let atoms = g.atoms();
    let inside = atoms.restrict(|p| filled.classify(p) == Membership::Inside);
    inside.require_no_cusps("e^ρ is not integrable near a cusp")?;
    Ok(())
}

fn metric_circles<T: Real>(g: &MetricSpec<T>) -> Vec<(Point<T>, T)> {
    let o = Point::new(T::zero(), T::zero());
    g.radial_breaks().into_iter().map(|b| (o, b)).collect()
}

/// `L(∂d) = ∫_{∂d} e^{ρ/2} dℓ` at the default tolerance.
pub fn boundary_length<T: Real>(g: &MetricSpec<T>, d: &PlanarDomain<T>) -> Result<QuadResult<T>> {
    boundary_length_with(g, d, &Tolerance::boundary())
}

pub fn boundary_length_with<T: Real>(
    g: &MetricSpec<T>,
    d: &PlanarDomain<T>,
    tol: &Tolerance<T>,
) -> Result<QuadResult<T>> {
    validate_domain(g, d)?;
    let circles = metric_circles(g);
    let mut parts = Vec::new();
    for arc in d.boundary_arcs() {
        let (lo, hi) = arc.parameter_interval();
        let mut pts = vec![lo, hi];
        for (c, r) in &circles {
            pts.extend(arc.circle_crossings(*c, *r));
        }
        let half = T::lit(0.5);
        parts.push(integrate_with_breaks(
            |t| Ok((g.rho(arc.position(t))? * half).exp() * arc.speed(t)),
            &pts,
            tol,
        )?);
    }
    Ok(sum_results(parts))
}

/// `M(d) = ∫_d e^ρ dx` at the default tolerance.
pub fn area<T: Real>(g: &MetricSpec<T>, d: &PlanarDomain<T>) -> Result<QuadResult<T>> {
    area_with(g, d, &Tolerance::area())
}

pub fn area_with<T: Real>(
    g: &MetricSpec<T>,
    d: &PlanarDomain<T>,
    tol: &Tolerance<T>,
) -> Result<QuadResult<T>> {
    validate_domain(g, d)?;
    integrate_over_at(
        d,
        |l| g.rho_at(l).map(T::exp),
        &g.singularities(),
        &metric_circles(g),
        tol,
    )
}

/// `∫_d w e^ρ dx` at the default tolerance.
pub fn weighted_area<T: Real>(
    g: &MetricSpec<T>,
    d: &PlanarDomain<T>,
    w: &Density<T>,
) -> Result<QuadResult<T>> {
    weighted_area_with(g, d, w, &Tolerance::area())
}

pub fn weighted_area_with<T: Real>(
    g: &MetricSpec<T>,
    d: &PlanarDomain<T>,
    w: &Density<T>,
    tol: &Tolerance<T>,
) -> Result<QuadResult<T>> {
    validate_domain(g, d)?;
    if w.is_zero() {
        return Ok(QuadResult::zero());
    }
    let sings = merge_singularities(&g.singularities(), &w.singularities());
    let mut circles = metric_circles(g);
    circles.extend(w.circles());
    integrate_over_at(
        d,
        |l| {
            let k = w.eval_at(l)?;
            if k == T::zero() {
                return Ok(T::zero());
            }
            Ok(k * g.rho_at(l)?.exp())
        },
        &sings,
        &circles,
        tol,
    )
}

/// `r₀·2^{−k}` for `k = 0..=k_max`.
pub fn dyadic_radii<T: Real>(r0: T, k_max: usize) -> Vec<T> {
    (0..=k_max).map(|k| r0 * T::lit(0.5).powi(k as i32)).collect()
}

/// Cumulative `∫_{r_k<|z−c|<r_0} |w|^p dx` for `k = 1, 2, …`.
pub fn lp_probe<T: Real>(w: &Density<T>, center: Point<T>, p: T, radii: &[T]) -> Result<Vec<T>> {
    if !(p >= T::one()) {
        return Err(Error::InvalidParameter("L^p probe needs p ≥ 1".into()));
    }
    if radii.len() < 2
        || radii.windows(2).any(|x| !(x[0] > x[1]))
        || !(radii[radii.len() - 1] > T::zero())
    {
        return Err(Error::InvalidParameter(
            "probe radii must be positive and strictly decreasing".into(),
        ));
    }
    let tol = Tolerance::new(T::lit(1e-9));
    let mut out = Vec::with_capacity(radii.len() - 1);
    let mut acc = T::zero();
    for k in 1..radii.len() {
        let (x0, x1) = (radii[k].ln(), radii[k - 1].ln());
        let quarter = T::FRAC_PI_2();
        let pts: Vec<T> = (0..5).map(|j| quarter * T::lit(j as f64)).collect();
        let inner_tol = tol.inner();
        let ring = adaptive(
            |th| {
                let dir = Point::from_polar(T::one(), th);
                let r = integrate(
                    |x| {
                        let rr = x.exp();
                        Ok(w.eval(center + dir * rr)?.abs().powf(p) * rr * rr)
                    },
                    x0,
                    x1,
                    &inner_tol,
                )?;
                Ok((r.value, r.error_estimate))
            },
            &pts,
            &tol,
        )?;
        acc = acc + ring.value;
        out.push(acc);
    }
    Ok(out)
}

/// Verdict on a cumulative probe sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Growth {
    Bounded,
    Divergent,
}

/// `S_n / S_{n−1}`.
pub fn last_term_ratio<T: Real>(seq: &[T]) -> T {
    let n = seq.len();
    if n < 2 {
        return T::nan();
    }
    seq[n - 1] / seq[n - 2]
}

/// `(S_n − S_{n−1}) / (S_{n−1} − S_{n−2})`.
pub fn last_increment_ratio<T: Real>(seq: &[T]) -> T {
    let n = seq.len();
    if n < 3 {
        return T::nan();
    }
    (seq[n - 1] - seq[n - 2]) / (seq[n - 2] - seq[n - 3])
}

/// Over dyadic shells, shrinking increments indicate a finite limit.
pub fn classify_growth<T: Real>(seq: &[T]) -> Growth {
    if last_increment_ratio(seq) >= T::one() {
        Growth::Divergent
    } else {
        Growth::Bounded
    }
}

/// Adjacent exponents with opposite growth verdicts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentBracket<T> {
    /// Largest tested exponent whose probe stayed bounded.
    pub bounded: T,
    /// Smallest tested exponent whose probe diverged.
    pub divergent: T,
}

/// Scans an increasing exponent grid with dyadic probes on `r₀·2^{−k}`,
/// `k ≤ k_max`, returning the first bounded/divergent transition.
pub fn critical_exponent_bracket<T: Real>(
    w: &Density<T>,
    center: Point<T>,
    r0: T,
    k_max: usize,
    exponents: &[T],
) -> Result<Option<ExponentBracket<T>>> {
    let radii = dyadic_radii(r0, k_max);
    let mut last_bounded = None;
    for &p in exponents {
        match classify_growth(&lp_probe(w, center, p, &radii)?) {
            Growth::Bounded => last_bounded = Some(p),
            Growth::Divergent => {
                return Ok(last_bounded.map(|b| ExponentBracket {
                    bounded: b,
                    divergent: p,
                }))
            }
        }
    }
    Ok(None)
}

/// `p_lo, p_lo + step, …` up to `p_hi`.
pub fn exponent_grid<T: Real>(p_lo: T, p_hi: T, step: T) -> Vec<T> {
    let n = ((p_hi - p_lo) / step).floor().to_usize().unwrap_or(0);
    (0..=n).map(|k| p_lo + step * T::lit(k as f64)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::SignedAtomicMeasure;
    use num_complex::Complex64 as C;
    use std::f64::consts::PI;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn kronrod_rule_is_exact_for_polynomials() {
        for deg in 0..=23 {
            let mut f = |x: f64| Ok((x.powi(deg), 0.0));
            let (v, _, _) = gk15(&mut f, 0.0, 1.0).unwrap();
            assert!(rel(v, 1.0 / (deg as f64 + 1.0)) < 1e-14, "degree {deg}");
        }
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        let r = integrate(|x: f64| Ok(x.sqrt().recip()), 0.0, 1.0, &Tolerance::new(1e-10)).unwrap();
        assert!(r.converged);
        assert!(rel(r.value, 2.0) < 1e-9);
    }

    #[test]
    fn bump_is_a_partition() {
        assert_eq!(bump(0.3), 1.0);
        assert_eq!(bump(1.2), 0.0);
        assert!((bump(0.75f64) - 0.5).abs() < 1e-15);
        let mut prev = 1.0;
        for k in 0..100 {
            let b = bump(0.5 + 0.005 * k as f64);
            assert!(b <= prev);
            prev = b;
        }
    }

    #[test]
    fn flat_quantities() {
        let g = MetricSpec::<f64>::flat();
        let d = PlanarDomain::disk(C::new(0.3, -0.2), 1.5).unwrap();
        assert!(rel(boundary_length(&g, &d).unwrap().value, 3.0 * PI) < 1e-12);
        assert!(rel(area(&g, &d).unwrap().value, PI * 2.25) < 1e-12);
        let sq = PlanarDomain::polygon(vec![
            C::new(0.0, 0.0),
            C::new(2.0, 0.0),
            C::new(2.0, 1.0),
            C::new(1.0, 0.5),
            C::new(0.0, 1.0),
        ])
        .unwrap();
        assert!(rel(area(&g, &sq).unwrap().value, sq.shoelace_area()) < 1e-12);
    }

    #[test]
    fn single_atom_area_via_apex_and_patch() {
        for beta in [PI, 2.0 * PI, 3.0 * PI] {
            let g = MetricSpec::pure_atoms(SignedAtomicMeasure::single(C::new(0.0, 0.0), beta));
            let e = 2.0 - beta / (2.0 * PI);
            let exact = 2.0 * PI * 0.8f64.powf(e) / e;
            let r = area(&g, &PlanarDomain::ball(0.8).unwrap()).unwrap();
            assert!(rel(r.value, exact) < 1e-9, "β = {beta}: {} vs {exact}", r.value);
            // off-centre disk: patch around the atom
            let g2 = MetricSpec::pure_atoms(SignedAtomicMeasure::single(C::new(0.1, 0.05), beta));
            let shifted = PlanarDomain::disk(C::new(0.1, 0.05), 0.8).unwrap();
            let d_off = PlanarDomain::disk(C::new(0.0, 0.0), 2.0).unwrap();
            let a_off = area(&g2, &d_off).unwrap();
            assert!(a_off.singular_patches == 1);
            let a_ring = area(&g2, &shifted).unwrap();
            assert!(rel(a_ring.value, exact) < 1e-9);
        }
    }

    #[test]
    fn cusp_inside_is_rejected() {
        let g = MetricSpec::pure_atoms(SignedAtomicMeasure::single(C::new(0.0, 0.0), 4.0 * PI));
        assert!(matches!(
            area(&g, &PlanarDomain::ball(1.0).unwrap()),
            Err(Error::Cusp { .. })
        ));
    }

    #[test]
    fn atom_on_boundary_is_rejected() {
        let g = MetricSpec::pure_atoms(SignedAtomicMeasure::single(C::new(1.0, 0.0), PI));
        assert!(matches!(
            boundary_length(&g, &PlanarDomain::ball(1.0).unwrap()),
            Err(Error::AtomOnBoundary { .. })
        ));
    }

    #[test]
    fn growth_classification() {
        // |z|^{-1} in L^p iff p < 2; shell increments scale by 2^{p−2}.
        let w = Density::custom(|z: C| z.norm().recip());
        let radii = dyadic_radii(1.0, 8);
        let s = lp_probe(&w, C::new(0.0, 0.0), 2.5, &radii).unwrap();
        assert_eq!(classify_growth(&s), Growth::Divergent);
        assert!(rel(last_increment_ratio(&s), 2f64.sqrt()) < 1e-8);
        let s = lp_probe(&w, C::new(0.0, 0.0), 2.0, &radii).unwrap();
        assert!(rel(s[0], 2.0 * PI * 2f64.ln()) < 1e-8);
        let s = lp_probe(&w, C::new(0.0, 0.0), 1.0, &radii).unwrap();
        assert_eq!(classify_growth(&s), Growth::Bounded);
    }
}
