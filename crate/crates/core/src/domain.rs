//! Simple and regular planar domains bounded by circles and polygons.

use crate::error::{to_f64, Error, Result};
use crate::scalar::{cross, pt, Point, Real};

/// Width of the band around a boundary inside which membership is ambiguous.
pub const BOUNDARY_BAND: f64 = 1e-12;

/// A closed Jordan curve.
#[derive(Debug, Clone, PartialEq)]
pub enum Curve<T> {
    Circle { center: Point<T>, radius: T },
    /// Vertices of a simple polygon, without repeating the first vertex.
    Polygon(Vec<Point<T>>),
}

/// Three-valued membership.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Membership {
    Inside,
    Outside,
    Boundary,
}

/// A parametrized piece of `∂E`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryArc<T> {
    /// `center + radius·e^{i(start + orientation·t)}`, `t ∈ [0, span]`.
    Arc {
        center: Point<T>,
        radius: T,
        start: T,
        span: T,
        counterclockwise: bool,
    },
    /// `a + t(b − a)`, `t ∈ [0, 1]`.
    Segment { a: Point<T>, b: Point<T> },
}

impl<T: Real> BoundaryArc<T> {
    pub fn parameter_interval(&self) -> (T, T) {
        match *self {
            BoundaryArc::Arc { span, .. } => (T::zero(), span),
            BoundaryArc::Segment { .. } => (T::zero(), T::one()),
        }
    }

    pub fn position(&self, t: T) -> Point<T> {
        match *self {
            BoundaryArc::Arc {
                center,
                radius,
                start,
                counterclockwise,
                ..
            } => {
                let th = if counterclockwise { start + t } else { start - t };
                center + Point::from_polar(radius, th)
            }
            BoundaryArc::Segment { a, b } => a + (b - a) * t,
        }
    }

    /// Velocity `dγ/dt`.
    pub fn velocity(&self, t: T) -> Point<T> {
        match *self {
            BoundaryArc::Arc {
                radius,
                start,
                counterclockwise,
                ..
            } => {
                let th = if counterclockwise { start + t } else { start - t };
                let v = Point::from_polar(radius, th) * Point::i();
                if counterclockwise {
                    v
                } else {
                    -v
                }
            }
            BoundaryArc::Segment { a, b } => b - a,
        }
    }

    pub fn speed(&self, t: T) -> T {
        match *self {
            BoundaryArc::Arc { radius, .. } => radius,
            BoundaryArc::Segment { .. } => self.velocity(t).norm(),
        }
    }

    pub fn euclidean_length(&self) -> T {
        match *self {
            BoundaryArc::Arc { radius, span, .. } => radius * span,
            BoundaryArc::Segment { a, b } => (b - a).norm(),
        }
    }

    /// Signed area swept with respect to the origin, `½∮ x dy − y dx`.
    pub fn signed_area_contribution(&self) -> T {
        let half = T::lit(0.5);
        match *self {
            BoundaryArc::Arc {
                center,
                radius,
                start,
                span,
                counterclockwise,
            } => {
                let s = if counterclockwise { T::one() } else { -T::one() };
                let (t0, t1) = (start, start + s * span);
                // ½∫ (c + R e^{iθ}) × (iR e^{iθ}) dθ
                let sector = half * radius * radius * (t1 - t0);
                let lin = half
                    * radius
                    * (center.re * (t1.sin() - t0.sin()) + center.im * (t0.cos() - t1.cos()));
                sector + lin
            }
            BoundaryArc::Segment { a, b } => half * cross(a, b),
        }
    }

    /// Parameters in the open interval where `|γ(t) − origin| = radius`.
    pub fn circle_crossings(&self, origin: Point<T>, radius: T) -> Vec<T> {
        let (lo, hi) = self.parameter_interval();
        let mut out = Vec::new();
        match *self {
            BoundaryArc::Segment { a, b } => {
                let d = b - a;
                let f = a - origin;
                let qa = d.norm_sqr();
                let qb = T::lit(2.0) * (f.re * d.re + f.im * d.im);
                let qc = f.norm_sqr() - radius * radius;
                let disc = qb * qb - T::lit(4.0) * qa * qc;
                if qa > T::zero() && disc > T::zero() {
                    let sq = disc.sqrt();
                    for t in [(-qb - sq) / (qa + qa), (-qb + sq) / (qa + qa)] {
                        if t > lo && t < hi {
                            out.push(t);
                        }
                    }
                }
            }
            BoundaryArc::Arc {
                center,
                radius: r,
                start,
                span,
                counterclockwise,
            } => {
                let c = center - origin;
                let cn = c.norm();
                if cn == T::zero() || r == T::zero() {
                    return out;
                }
                // |c + r e^{iθ}|² = |c|² + r² + 2 r |c| cos(θ − arg c)
                let cosv = (radius * radius - cn * cn - r * r) / (T::lit(2.0) * r * cn);
                if cosv.abs() < T::one() {
                    let base = cosv.acos();
                    let phase = c.arg();
                    for th in [phase + base, phase - base] {
                        // solve start ± t = th (mod 2π)
                        let mut t = if counterclockwise { th - start } else { start - th };
                        t = t % T::two_pi();
                        if t < T::zero() {
                            t = t + T::two_pi();
                        }
                        while t < span {
                            if t > lo && t < hi {
                                out.push(t);
                            }
                            t = t + T::two_pi();
                        }
                    }
                }
            }
        }
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out
    }
}

impl<T: Real> Curve<T> {
    pub fn circle(center: Point<T>, radius: T) -> Self {
        Curve::Circle { center, radius }
    }

    /// Twice-signed-area sign decides orientation; positive is counterclockwise.
    pub fn signed_area(&self) -> T {
        match self {
            Curve::Circle { radius, .. } => T::PI() * *radius * *radius,
            Curve::Polygon(v) => {
                let n = v.len();
                let s: T = (0..n).map(|i| cross(v[i], v[(i + 1) % n])).sum();
                s * T::lit(0.5)
            }
        }
    }

    pub fn area(&self) -> T {
        self.signed_area().abs()
    }

    fn edges(&self) -> impl Iterator<Item = (Point<T>, Point<T>)> + '_ {
        let v: &[Point<T>] = match self {
            Curve::Polygon(v) => v,
            Curve::Circle { .. } => &[],
        };
        (0..v.len()).map(move |i| (v[i], v[(i + 1) % v.len()]))
    }

    pub fn distance(&self, z: Point<T>) -> T {
        match self {
            Curve::Circle { center, radius } => ((z - *center).norm() - *radius).abs(),
            Curve::Polygon(_) => self
                .edges()
                .map(|(a, b)| segment_distance(z, a, b))
                .fold(T::infinity(), T::min),
        }
    }

    /// Strict interior test ignoring the ambiguity band.
    fn interior_raw(&self, z: Point<T>) -> bool {
        match self {
            Curve::Circle { center, radius } => (z - *center).norm() < *radius,
            Curve::Polygon(v) => {
                let mut inside = false;
                let n = v.len();
                let mut j = n - 1;
                for i in 0..n {
                    let (a, b) = (v[i], v[j]);
                    if (a.im > z.im) != (b.im > z.im) {
                        let x = a.re + (z.im - a.im) * (b.re - a.re) / (b.im - a.im);
                        if z.re < x {
                            inside = !inside;
                        }
                    }
                    j = i;
                }
                inside
            }
        }
    }

    pub fn classify(&self, z: Point<T>, band: T) -> Membership {
        if self.distance(z) <= band {
            Membership::Boundary
        } else if self.interior_raw(z) {
            Membership::Inside
        } else {
            Membership::Outside
        }
    }

    pub fn bounding_box(&self) -> (Point<T>, Point<T>) {
        match self {
            Curve::Circle { center, radius } => (
                *center - pt(*radius, *radius),
                *center + pt(*radius, *radius),
            ),
            Curve::Polygon(v) => {
                let mut lo = v[0];
                let mut hi = v[0];
                for p in v {
                    lo = pt(lo.re.min(p.re), lo.im.min(p.im));
                    hi = pt(hi.re.max(p.re), hi.im.max(p.im));
                }
                (lo, hi)
            }
        }
    }

    pub fn diameter(&self) -> T {
        match self {
            Curve::Circle { radius, .. } => *radius + *radius,
            Curve::Polygon(v) => {
                let mut d = T::zero();
                for a in v {
                    for b in v {
                        d = d.max((*a - *b).norm());
                    }
                }
                d
            }
        }
    }

    /// Points along the curve used for containment tests.
    fn samples(&self, per_edge: usize) -> Vec<Point<T>> {
        match self {
            Curve::Circle { center, radius } => {
                let n = per_edge * 8;
                (0..n)
                    .map(|k| {
                        *center
                            + Point::from_polar(*radius, T::two_pi() * T::lit(k as f64 / n as f64))
                    })
                    .collect()
            }
            Curve::Polygon(_) => self
                .edges()
                .flat_map(|(a, b)| {
                    (0..per_edge).map(move |k| a + (b - a) * T::lit(k as f64 / per_edge as f64))
                })
                .collect(),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Curve::Circle { radius, center } => {
                if !(*radius > T::zero()) || !radius.is_finite() {
                    return Err(Error::InvalidDomain(format!(
                        "circle radius must be positive, got {}",
                        to_f64(*radius)
                    )));
                }
                if !(center.re.is_finite() && center.im.is_finite()) {
                    return Err(Error::InvalidDomain("circle center must be finite".into()));
                }
                Ok(())
            }
            Curve::Polygon(v) => {
                if v.len() < 3 {
                    return Err(Error::InvalidDomain(
                        "polygon needs at least three vertices".into(),
                    ));
                }
                if v.iter().any(|p| !(p.re.is_finite() && p.im.is_finite())) {
                    return Err(Error::InvalidDomain("polygon vertices must be finite".into()));
                }
                let n = v.len();
                for i in 0..n {
                    for j in (i + 1)..n {
                        let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                        let (a, b) = (v[i], v[(i + 1) % n]);
                        let (c, d) = (v[j], v[(j + 1) % n]);
                        if adjacent {
                            if v[i] == v[j] {
                                return Err(Error::InvalidDomain("repeated polygon vertex".into()));
                            }
                            continue;
                        }
                        if segments_intersect(a, b, c, d) {
                            return Err(Error::InvalidDomain(format!(
                                "polygon edges {i} and {j} intersect"
                            )));
                        }
                    }
                }
                if self.signed_area() == T::zero() {
                    return Err(Error::InvalidDomain("degenerate polygon".into()));
                }
                Ok(())
            }
        }
    }

    pub(crate) fn oriented(self, counterclockwise: bool) -> Self {
        match self {
            Curve::Polygon(mut v) => {
                if (Curve::Polygon(v.clone()).signed_area() > T::zero()) != counterclockwise {
                    v.reverse();
                }
                Curve::Polygon(v)
            }
            c => c,
        }
    }

    /// `other`'s closure lies in the open interior of `self`.
    fn strictly_contains(&self, other: &Curve<T>) -> bool {
        match (self, other) {
            (Curve::Circle { center: c1, radius: r1 }, Curve::Circle { center: c2, radius: r2 }) => {
                (*c1 - *c2).norm() + *r2 < *r1
            }
            (Curve::Polygon(_), Curve::Circle { center, radius }) => {
                self.interior_raw(*center) && self.distance(*center) > *radius
            }
            (_, Curve::Polygon(v)) => {
                v.iter().all(|p| self.interior_raw(*p) && self.distance(*p) > T::zero())
                    && !self.edges_cross(other)
            }
        }
    }

    fn edges_cross(&self, other: &Curve<T>) -> bool {
        match (self, other) {
            (Curve::Polygon(_), Curve::Polygon(_)) => self
                .edges()
                .any(|(a, b)| other.edges().any(|(c, d)| segments_intersect(a, b, c, d))),
            _ => false,
        }
    }

    /// Closures are disjoint.
    fn disjoint(&self, other: &Curve<T>) -> bool {
        match (self, other) {
            (Curve::Circle { center: c1, radius: r1 }, Curve::Circle { center: c2, radius: r2 }) => {
                (*c1 - *c2).norm() > *r1 + *r2
            }
            (Curve::Circle { center, radius }, Curve::Polygon(v))
            | (Curve::Polygon(v), Curve::Circle { center, radius }) => {
                let poly = Curve::Polygon(v.clone());
                !poly.interior_raw(*center)
                    && poly.distance(*center) > *radius
                    && v.iter().all(|p| (*p - *center).norm() > *radius)
            }
            (Curve::Polygon(a), Curve::Polygon(b)) => {
                !self.edges_cross(other)
                    && !a.iter().any(|p| other.interior_raw(*p) || other.distance(*p) == T::zero())
                    && !b.iter().any(|p| self.interior_raw(*p))
            }
        }
    }

    fn arcs(&self, counterclockwise: bool) -> Vec<BoundaryArc<T>> {
        match self {
            Curve::Circle { center, radius } => vec![BoundaryArc::Arc {
                center: *center,
                radius: *radius,
                start: T::zero(),
                span: T::two_pi(),
                counterclockwise,
            }],
            Curve::Polygon(_) => self.edges().map(|(a, b)| BoundaryArc::Segment { a, b }).collect(),
        }
    }

    /// Ear-clipping triangulation of a counterclockwise simple polygon.
    pub(crate) fn triangulate(&self) -> Vec<[Point<T>; 3]> {
        let v = match self {
            Curve::Polygon(v) => v.clone(),
            Curve::Circle { .. } => return Vec::new(),
        };
        let mut idx: Vec<usize> = (0..v.len()).collect();
        let mut tris = Vec::new();
        let mut guard = 0;
        while idx.len() > 3 && guard < 10 * v.len() * v.len() {
            guard += 1;
            let n = idx.len();
            let mut clipped = false;
            for k in 0..n {
                let (ia, ib, ic) = (idx[(k + n - 1) % n], idx[k], idx[(k + 1) % n]);
                let (a, b, c) = (v[ia], v[ib], v[ic]);
                if cross(b - a, c - b) <= T::zero() {
                    continue;
                }
                let blocked = idx.iter().any(|&j| {
                    j != ia && j != ib && j != ic && point_in_triangle(v[j], a, b, c)
                });
                if !blocked {
                    tris.push([a, b, c]);
                    idx.remove(k);
                    clipped = true;
                    break;
                }
            }
            if !clipped {
                break;
            }
        }
        if idx.len() == 3 {
            tris.push([v[idx[0]], v[idx[1]], v[idx[2]]]);
        }
        tris
    }
}

fn segment_distance<T: Real>(z: Point<T>, a: Point<T>, b: Point<T>) -> T {
    let d = b - a;
    let len2 = d.norm_sqr();
    if len2 == T::zero() {
        return (z - a).norm();
    }
    let t = ((z - a).re * d.re + (z - a).im * d.im) / len2;
    let t = t.max(T::zero()).min(T::one());
    (z - (a + d * t)).norm()
}

fn orient<T: Real>(a: Point<T>, b: Point<T>, c: Point<T>) -> T {
    cross(b - a, c - a)
}

fn on_segment<T: Real>(a: Point<T>, b: Point<T>, p: Point<T>) -> bool {
    p.re >= a.re.min(b.re) && p.re <= a.re.max(b.re) && p.im >= a.im.min(b.im) && p.im <= a.im.max(b.im)
}

/// Closed segments `ab` and `cd` share a point.
fn segments_intersect<T: Real>(a: Point<T>, b: Point<T>, c: Point<T>, d: Point<T>) -> bool {
    let (d1, d2) = (orient(c, d, a), orient(c, d, b));
    let (d3, d4) = (orient(a, b, c), orient(a, b, d));
    let z = T::zero();
    if ((d1 > z && d2 < z) || (d1 < z && d2 > z)) && ((d3 > z && d4 < z) || (d3 < z && d4 > z)) {
        return true;
    }
    (d1 == z && on_segment(c, d, a))
        || (d2 == z && on_segment(c, d, b))
        || (d3 == z && on_segment(a, b, c))
        || (d4 == z && on_segment(a, b, d))
}

fn point_in_triangle<T: Real>(p: Point<T>, a: Point<T>, b: Point<T>, c: Point<T>) -> bool {
    let z = T::zero();
    orient(a, b, p) >= z && orient(b, c, p) >= z && orient(c, a, p) >= z
}

/// A bounded domain: an outer Jordan curve minus finitely many holes.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarDomain<T> {
    outer: Curve<T>,
    holes: Vec<Curve<T>>,
}

impl<T: Real> PlanarDomain<T> {
    /// Validates the curves and normalizes orientation: the outer polygon is
    /// stored counterclockwise, hole polygons clockwise.
    pub fn new(outer: Curve<T>, holes: Vec<Curve<T>>) -> Result<Self> {
        outer.validate()?;
        for h in &holes {
            h.validate()?;
        }
        let outer = outer.oriented(true);
        let holes: Vec<_> = holes.into_iter().map(|h| h.oriented(false)).collect();
        for (i, h) in holes.iter().enumerate() {
            if !outer.strictly_contains(h) {
                return Err(Error::InvalidDomain(format!(
                    "hole {i} is not strictly inside the outer curve"
                )));
            }
            for (j, g) in holes.iter().enumerate().skip(i + 1) {
                if !h.disjoint(g) {
                    return Err(Error::InvalidDomain(format!("holes {i} and {j} overlap")));
                }
            }
        }
        Ok(Self { outer, holes })
    }

    pub fn disk(center: Point<T>, radius: T) -> Result<Self> {
        Self::new(Curve::circle(center, radius), Vec::new())
    }

    /// Disk of radius `radius` centred at the origin.
    pub fn ball(radius: T) -> Result<Self> {
        Self::disk(Point::new(T::zero(), T::zero()), radius)
    }

    pub fn polygon(vertices: Vec<Point<T>>) -> Result<Self> {
        Self::new(Curve::Polygon(vertices), Vec::new())
    }

    /// `{inner < |z − center| < outer}`.
    pub fn annulus(center: Point<T>, inner: T, outer: T) -> Result<Self> {
        Self::new(
            Curve::circle(center, outer),
            vec![Curve::circle(center, inner)],
        )
    }

    pub fn with_hole(self, hole: Curve<T>) -> Result<Self> {
        let mut holes = self.holes;
        holes.push(hole);
        Self::new(self.outer, holes)
    }

    pub fn outer(&self) -> &Curve<T> {
        &self.outer
    }

    pub fn holes(&self) -> &[Curve<T>] {
        &self.holes
    }

    pub fn is_simple(&self) -> bool {
        self.holes.is_empty()
    }

    /// `(center, radius)` when the domain is a disk without holes.
    pub fn as_disk(&self) -> Option<(Point<T>, T)> {
        match (&self.outer, self.holes.is_empty()) {
            (Curve::Circle { center, radius }, true) => Some((*center, *radius)),
            _ => None,
        }
    }

    pub fn curves(&self) -> impl Iterator<Item = &Curve<T>> {
        std::iter::once(&self.outer).chain(self.holes.iter())
    }

    pub fn diameter(&self) -> T {
        self.outer.diameter()
    }

    fn band(&self) -> T {
        T::lit(BOUNDARY_BAND) * self.diameter().max(T::one())
    }

    pub fn distance_to_boundary(&self, z: Point<T>) -> T {
        self.curves().map(|c| c.distance(z)).fold(T::infinity(), T::min)
    }

    pub fn classify(&self, z: Point<T>) -> Membership {
        let band = self.band();
        match self.outer.classify(z, band) {
            Membership::Inside => {}
            other => return other,
        }
        for h in &self.holes {
            match h.classify(z, band) {
                Membership::Outside => {}
                Membership::Inside => return Membership::Outside,
                Membership::Boundary => return Membership::Boundary,
            }
        }
        Membership::Inside
    }

    /// Strict membership; points in the ambiguity band are an error.
    pub fn contains(&self, z: Point<T>) -> Result<bool> {
        match self.classify(z) {
            Membership::Inside => Ok(true),
            Membership::Outside => Ok(false),
            Membership::Boundary => Err(Error::BoundaryAmbiguous {
                x: to_f64(z.re),
                y: to_f64(z.im),
            }),
        }
    }

    /// Outer boundary counterclockwise, holes clockwise.
    pub fn boundary_arcs(&self) -> Vec<BoundaryArc<T>> {
        let mut arcs = self.outer.arcs(true);
        for h in &self.holes {
            arcs.extend(h.arcs(false));
        }
        arcs
    }

    /// The outer curve alone (holes filled in).
    pub fn fill_holes(&self) -> Self {
        Self {
            outer: self.outer.clone(),
            holes: Vec::new(),
        }
    }

    /// Euclidean area, holes subtracted.
    pub fn euclidean_area(&self) -> T {
        self.outer.area() - self.holes.iter().map(|h| h.area()).sum::<T>()
    }

    pub fn euclidean_perimeter(&self) -> T {
        self.boundary_arcs().iter().map(|a| a.euclidean_length()).sum()
    }

    /// Euclidean area from the boundary parametrization (shoelace/Green).
    pub fn shoelace_area(&self) -> T {
        self.boundary_arcs()
            .iter()
            .map(|a| a.signed_area_contribution())
            .sum()
    }

    pub fn bounding_box(&self) -> (Point<T>, Point<T>) {
        self.outer.bounding_box()
    }

    /// `self ⊆ other`, tested on boundary samples of both domains.
    pub fn is_subset_of(&self, other: &Self) -> bool {
        let inside_other = |p: Point<T>| other.classify(p) != Membership::Outside;
        if !self.outer.samples(64).into_iter().all(inside_other) {
            return false;
        }
        // Every hole of `other` must avoid the interior of `self`.
        other.holes.iter().all(|h| {
            h.samples(64)
                .into_iter()
                .all(|p| self.classify(p) != Membership::Inside)
                && match h {
                    Curve::Circle { center, .. } => self.classify(*center) != Membership::Inside,
                    Curve::Polygon(v) => v.iter().all(|p| self.classify(*p) != Membership::Inside),
                }
        })
    }
}
