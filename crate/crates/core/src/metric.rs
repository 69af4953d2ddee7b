//! Conformal factors `e^ρ|dz|²`: radial closed forms, spherical cones,
//! potential-form metrics, and their `ρ = f + u` decompositions.

use std::fmt;
use std::sync::Arc;

use crate::curvature::Density;
use crate::error::{to_f64, Error, Result};
use crate::measure::SignedAtomicMeasure;
use crate::poly::{BivariatePoly, HarmonicPoly};
use crate::quad::{RadialBehavior, Singularity};
use crate::scalar::{Loc, Point, Real};

/// Relative tolerance on `ρ` across radial breakpoints.
pub const CONTINUITY_TOL: f64 = 1e-10;

/// One closed-form radial expression for `ρ(r)`.
#[derive(Debug, Clone, PartialEq)]
pub enum RadialExpr<T> {
    /// `e^ρ = A·r^{2β} / (1 + B·r^c)²`, stored as `(log A, β, B, c)`.
    Cone {
        log_scale: T,
        power: T,
        coeff: T,
        exponent: T,
    },
    /// `e^ρ = (log(e/r))^{−a}`.
    LogPower { a: T },
    /// `ρ(1/r) − 4·log r` for the wrapped expression.
    Inverted(Box<RadialExpr<T>>),
}

impl<T: Real> RadialExpr<T> {
    pub fn cone(scale: T, power: T, coeff: T, exponent: T) -> Self {
        RadialExpr::Cone {
            log_scale: scale.ln(),
            power,
            coeff,
            exponent,
        }
    }

    /// `ρ(r)` for `r > 0`.
    pub fn rho(&self, r: T) -> T {
        match self {
            RadialExpr::Cone {
                log_scale,
                power,
                coeff,
                exponent,
            } => {
                let lin = if *power == T::zero() {
                    T::zero()
                } else {
                    (*power + *power) * r.ln()
                };
                let den = if *coeff == T::zero() {
                    T::zero()
                } else {
                    (T::one() + *coeff * r.powf(*exponent)).abs().ln()
                };
                *log_scale + lin - (den + den)
            }
            RadialExpr::LogPower { a } => -*a * (T::one() - r.ln()).ln(),
            RadialExpr::Inverted(inner) => inner.rho(r.recip()) - T::lit(4.0) * r.ln(),
        }
    }

    /// Gaussian curvature `K = −Δρ / (2e^ρ)` in closed form.
    pub fn curvature(&self, r: T) -> T {
        match self {
            RadialExpr::Cone {
                log_scale,
                power,
                coeff,
                exponent,
            } => {
                // Δ log(1 + B r^c) = B c² r^{c−2} / (1 + B r^c)²
                let c = *exponent;
                *coeff * c * c * r.powf(c - T::lit(2.0) - (*power + *power)) / log_scale.exp()
            }
            RadialExpr::LogPower { a } => {
                let s = T::one() - r.ln();
                -(*a / T::lit(2.0)) * (r * r).recip() * s.powf(-(T::lit(2.0) - *a))
            }
            RadialExpr::Inverted(inner) => inner.curvature(r.recip()),
        }
    }

    /// Coefficient `ℓ` of `log r` in `ρ` as `r → 0`, when `ρ − ℓ log r`
    /// stays bounded there.
    fn log_coefficient_at_zero(&self) -> Option<T> {
        match self {
            RadialExpr::Cone {
                power,
                coeff,
                exponent,
                ..
            } => {
                if *coeff != T::zero() && *exponent < T::zero() {
                    Some((*power - *exponent) * T::lit(2.0))
                } else {
                    Some(*power + *power)
                }
            }
            RadialExpr::LogPower { .. } => Some(T::zero()),
            RadialExpr::Inverted(inner) => inner
                .log_coefficient_at_infinity()
                .map(|l| -l - T::lit(4.0)),
        }
    }

    fn log_coefficient_at_infinity(&self) -> Option<T> {
        match self {
            RadialExpr::Cone {
                power,
                coeff,
                exponent,
                ..
            } => {
                if *coeff != T::zero() && *exponent > T::zero() {
                    Some((*power - *exponent) * T::lit(2.0))
                } else {
                    Some(*power + *power)
                }
            }
            RadialExpr::LogPower { .. } => None,
            RadialExpr::Inverted(inner) => inner
                .log_coefficient_at_zero()
                .map(|l| -l - T::lit(4.0)),
        }
    }

    /// Is `ρ` finite at `r = 0`?
    fn regular_at_zero(&self) -> bool {
        match self {
            RadialExpr::Cone {
                power,
                coeff,
                exponent,
                ..
            } => *power == T::zero() && (*coeff == T::zero() || *exponent > T::zero()),
            _ => false,
        }
    }

    /// Behaviour of the curvature near `r = 0` as a power `r^{−γ}`.
    fn curvature_exponent_at_zero(&self) -> Option<RadialBehavior<T>> {
        match self {
            RadialExpr::Cone {
                power,
                coeff,
                exponent,
                ..
            } => {
                if *coeff == T::zero() {
                    return None;
                }
                let e = *exponent - T::lit(2.0) - (*power + *power);
                (e < T::zero()).then(|| RadialBehavior::Power(-e))
            }
            RadialExpr::LogPower { .. } => Some(RadialBehavior::Log),
            RadialExpr::Inverted(_) => None,
        }
    }

    /// Expression for the pull-back under `w = 1/z`.
    fn inverted(&self) -> Self {
        match self {
            RadialExpr::Cone {
                log_scale,
                power,
                coeff,
                exponent,
            } => {
                let two = T::lit(2.0);
                if *coeff == T::zero() {
                    RadialExpr::Cone {
                        log_scale: *log_scale,
                        power: -*power - two,
                        coeff: T::zero(),
                        exponent: *exponent,
                    }
                } else {
                    // 1 + B w^{−c} = B w^{−c} (1 + w^c / B)
                    RadialExpr::Cone {
                        log_scale: *log_scale - two * coeff.abs().ln(),
                        power: *exponent - *power - two,
                        coeff: coeff.recip(),
                        exponent: *exponent,
                    }
                }
            }
            RadialExpr::Inverted(inner) => (**inner).clone(),
            other => RadialExpr::Inverted(Box::new(other.clone())),
        }
    }
}

/// `ρ` as a function of `|z|`, piecewise over radial intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseRadial<T> {
    breaks: Vec<T>,
    branches: Vec<RadialExpr<T>>,
    extent: T,
    log_shift: T,
    offset: T,
}

impl<T: Real> PiecewiseRadial<T> {
    /// `branches[k]` applies on `[breaks[k−1], breaks[k])`; the chart is
    /// `|z| ≤ extent` (use `+∞` for the whole plane).
    pub fn new(breaks: Vec<T>, branches: Vec<RadialExpr<T>>, extent: T) -> Result<Self> {
        Self::with_log_shift(breaks, branches, extent, T::zero())
    }

    fn with_log_shift(
        breaks: Vec<T>,
        branches: Vec<RadialExpr<T>>,
        extent: T,
        log_shift: T,
    ) -> Result<Self> {
        if branches.len() != breaks.len() + 1 {
            return Err(Error::InvalidParameter(
                "radial metric needs one more branch than breakpoints".into(),
            ));
        }
        if breaks.windows(2).any(|w| !(w[0] < w[1]))
            || breaks.iter().any(|b| !(*b > T::zero()) || *b >= extent)
        {
            return Err(Error::InvalidParameter(
                "radial breakpoints must be increasing and inside the chart".into(),
            ));
        }
        let out = Self {
            breaks,
            branches,
            extent,
            log_shift,
            offset: T::zero(),
        };
        for (k, b) in out.breaks.iter().enumerate() {
            let (l, r) = (out.branches[k].rho(*b), out.branches[k + 1].rho(*b));
            let scale = l.abs().max(r.abs()).max(T::one());
            if !((l - r).abs() <= T::lit(CONTINUITY_TOL) * scale) {
                return Err(Error::InvalidParameter(format!(
                    "radial expression discontinuous at r = {}: {} vs {}",
                    to_f64(*b),
                    to_f64(l),
                    to_f64(r)
                )));
            }
        }
        Ok(out)
    }

    pub fn breaks(&self) -> &[T] {
        &self.breaks
    }

    pub fn branches(&self) -> &[RadialExpr<T>] {
        &self.branches
    }

    pub fn extent(&self) -> T {
        self.extent
    }

    fn branch(&self, r: T) -> &RadialExpr<T> {
        let k = self.breaks.iter().take_while(|b| **b <= r).count();
        &self.branches[k]
    }

    /// Coefficient of `log r` at the origin, including the shift.
    pub fn origin_log_coefficient(&self) -> T {
        self.branches[0]
            .log_coefficient_at_zero()
            .unwrap_or_else(T::zero)
            + self.log_shift
    }

    fn regular_at_origin(&self) -> bool {
        self.branches[0].regular_at_zero() && self.log_shift == T::zero()
    }

    pub fn rho(&self, r: T) -> Result<T> {
        if r > self.extent * (T::one() + T::lit(1e-12)) {
            return Err(Error::OutsideChart {
                x: to_f64(r),
                y: 0.0,
            });
        }
        if r == T::zero() {
            return if self.regular_at_origin() {
                Ok(self.branches[0].rho(T::zero()) + self.offset)
            } else {
                Err(Error::SingularPoint { x: 0.0, y: 0.0 })
            };
        }
        let shift = if self.log_shift == T::zero() {
            T::zero()
        } else {
            self.log_shift * r.ln()
        };
        Ok(self.branch(r).rho(r) + shift + self.offset)
    }

    pub fn curvature(&self, r: T) -> T {
        let mut k = self.branch(r).curvature(r) * (-self.offset).exp();
        if self.log_shift != T::zero() {
            k = k * r.powf(-self.log_shift);
        }
        k
    }

    /// Same pieces with `ρ` replaced by `ρ + shift·log r`.
    fn shifted(&self, shift: T) -> Self {
        Self {
            log_shift: self.log_shift + shift,
            ..self.clone()
        }
    }

    fn scaled(&self, lambda: T) -> Self {
        Self {
            offset: self.offset + (lambda * lambda).ln(),
            ..self.clone()
        }
    }

    fn inverted(&self) -> Result<Self> {
        if self.extent.is_finite() {
            return Err(Error::InvalidParameter(
                "inversion needs a chart covering the whole plane".into(),
            ));
        }
        let breaks = self.breaks.iter().rev().map(|b| b.recip()).collect();
        let branches = self.branches.iter().rev().map(|b| b.inverted()).collect();
        let mut out = Self::with_log_shift(breaks, branches, T::infinity(), -self.log_shift)?;
        out.offset = self.offset;
        Ok(out)
    }
}

/// Closure-backed regular part.
#[derive(Clone)]
pub struct CustomFn<T> {
    pub value: Arc<dyn Fn(Point<T>) -> T + Send + Sync>,
    pub laplacian: Option<Arc<dyn Fn(Point<T>) -> T + Send + Sync>>,
}

impl<T> fmt::Debug for CustomFn<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomFn")
            .field("laplacian", &self.laplacian.is_some())
            .finish()
    }
}

/// The bounded part `u` of `ρ = f + u`.
#[derive(Debug, Clone)]
pub enum RegularPart<T> {
    Zero,
    Polynomial(BivariatePoly<T>),
    Radial(PiecewiseRadial<T>),
    Custom(CustomFn<T>),
    /// `inner − h`.
    Shifted(Box<RegularPart<T>>, HarmonicPoly<T>),
}

impl<T: Real> RegularPart<T> {
    pub fn custom<F>(value: F) -> Self
    where
        F: Fn(Point<T>) -> T + Send + Sync + 'static,
    {
        RegularPart::Custom(CustomFn {
            value: Arc::new(value),
            laplacian: None,
        })
    }

    pub fn custom_with_laplacian<F, L>(value: F, laplacian: L) -> Self
    where
        F: Fn(Point<T>) -> T + Send + Sync + 'static,
        L: Fn(Point<T>) -> T + Send + Sync + 'static,
    {
        RegularPart::Custom(CustomFn {
            value: Arc::new(value),
            laplacian: Some(Arc::new(laplacian)),
        })
    }

    pub fn eval(&self, z: Point<T>) -> Result<T> {
        Ok(match self {
            RegularPart::Zero => T::zero(),
            RegularPart::Polynomial(p) => p.eval(z),
            RegularPart::Radial(r) => r.rho(z.norm())?,
            RegularPart::Custom(c) => (c.value)(z),
            RegularPart::Shifted(inner, h) => inner.eval(z)? - h.eval(z),
        })
    }

    /// Exact Laplacian where the representation provides one.
    pub fn laplacian(&self, z: Point<T>) -> Option<T> {
        match self {
            RegularPart::Zero => Some(T::zero()),
            RegularPart::Polynomial(p) => Some(p.laplacian().eval(z)),
            RegularPart::Radial(_) => None,
            RegularPart::Custom(c) => c.laplacian.as_ref().map(|l| l(z)),
            RegularPart::Shifted(inner, _) => inner.laplacian(z),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, RegularPart::Zero)
    }

    /// True for a closed-form radial profile (possibly gauge shifted).
    pub fn is_radial(&self) -> bool {
        match self {
            RegularPart::Radial(_) => true,
            RegularPart::Shifted(inner, _) => inner.is_radial(),
            _ => false,
        }
    }

    /// Radii about the origin where a radial profile changes branch.
    pub fn radial_breaks(&self) -> Vec<T> {
        match self {
            RegularPart::Radial(p) => p.breaks.clone(),
            RegularPart::Shifted(inner, _) => inner.radial_breaks(),
            _ => Vec::new(),
        }
    }
}

/// Spherical `{K₀, α}`-cone: `|w|^{−2α}·τ₀² / (1 + K₀τ₀²|w|^{2(1−α)}/(4(1−α)²))²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalCone<T> {
    pub k0: T,
    pub alpha: T,
    pub tau0: T,
}

impl<T: Real> SphericalCone<T> {
    fn branch(&self) -> RadialExpr<T> {
        let one_m = T::one() - self.alpha;
        let t2 = self.tau0 * self.tau0;
        RadialExpr::cone(
            t2,
            -self.alpha,
            self.k0 * t2 / (T::lit(4.0) * one_m * one_m),
            one_m + one_m,
        )
    }

    fn as_radial(&self) -> PiecewiseRadial<T> {
        PiecewiseRadial {
            breaks: Vec::new(),
            branches: vec![self.branch()],
            extent: T::infinity(),
            log_shift: T::zero(),
            offset: T::zero(),
        }
    }

    /// `e^{v(w)}`, the regular factor.
    pub fn regular_factor(&self, w: Point<T>) -> T {
        let one_m = T::one() - self.alpha;
        let t2 = self.tau0 * self.tau0;
        let den = T::one()
            + self.k0 * t2 / (T::lit(4.0) * one_m * one_m) * w.norm().powf(one_m + one_m);
        t2 / (den * den)
    }
}

/// Metric given by `ρ = h + Σ(βᵢ/2π)log(1/|z−pᵢ|) + u`.
#[derive(Debug, Clone)]
pub struct PotentialMetric<T> {
    pub harmonic: HarmonicPoly<T>,
    pub atoms: SignedAtomicMeasure<T>,
    pub regular: RegularPart<T>,
}

/// Named closed-form metrics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Preset<T> {
    Example1 { a: T },
    Example2 { alpha1: T, alpha2: T },
    Example3Chart2,
    Example3Chart1,
}

/// A conformal factor `e^ρ`.
#[derive(Debug, Clone)]
pub enum MetricSpec<T> {
    PiecewiseRadial {
        profile: PiecewiseRadial<T>,
        preset: Option<Preset<T>>,
    },
    SphericalCone(SphericalCone<T>),
    Potential(PotentialMetric<T>),
    Flat,
}

/// The pieces of `ρ = f + u` together with the curvature density.
#[derive(Debug, Clone)]
pub struct Decomposition<T> {
    /// ω of the logarithmic potential (equal to `2k_s`).
    pub f_atoms: SignedAtomicMeasure<T>,
    pub f_harmonic: HarmonicPoly<T>,
    pub u: RegularPart<T>,
    pub k: Density<T>,
}

impl<T: Real> Decomposition<T> {
    pub fn f(&self, z: Point<T>) -> T {
        self.f_harmonic.eval(z) + self.f_atoms.log_potential(z)
    }

    pub fn u(&self, z: Point<T>) -> Result<T> {
        self.u.eval(z)
    }

    pub fn rho(&self, z: Point<T>) -> Result<T> {
        Ok(self.f(z) + self.u(z)?)
    }

    /// Moves a harmonic `h` from `u` into `f`: `{u − h, f + h}`.
    pub fn gauge_shift(&self, h: &HarmonicPoly<T>) -> Self {
        Self {
            f_atoms: self.f_atoms.clone(),
            f_harmonic: self.f_harmonic.add(h),
            u: RegularPart::Shifted(Box::new(self.u.clone()), h.clone()),
            k: self.k.clone(),
        }
    }
}

fn origin<T: Real>() -> Point<T> {
    Point::new(T::zero(), T::zero())
}

impl<T: Real> MetricSpec<T> {
    pub fn flat() -> Self {
        MetricSpec::Flat
    }

    pub fn spherical_cone(k0: T, alpha: T, tau0: T) -> Result<Self> {
        if !(k0 >= T::zero()) || !k0.is_finite() {
            return Err(Error::InvalidParameter("cone curvature K₀ must be ≥ 0".into()));
        }
        if !(alpha < T::one()) || !alpha.is_finite() {
            return Err(Error::InvalidParameter("cone order α must be < 1".into()));
        }
        if tau0 == T::zero() || !tau0.is_finite() {
            return Err(Error::InvalidParameter("cone scale τ₀ must be non-zero".into()));
        }
        Ok(MetricSpec::SphericalCone(SphericalCone { k0, alpha, tau0 }))
    }

    pub fn potential(
        harmonic: HarmonicPoly<T>,
        atoms: SignedAtomicMeasure<T>,
        regular: RegularPart<T>,
    ) -> Self {
        MetricSpec::Potential(PotentialMetric {
            harmonic,
            atoms,
            regular,
        })
    }

    /// `e^ρ = Π|z−pᵢ|^{−βᵢ/2π}`.
    pub fn pure_atoms(atoms: SignedAtomicMeasure<T>) -> Self {
        Self::potential(HarmonicPoly::zero(), atoms, RegularPart::Zero)
    }

    pub fn radial(profile: PiecewiseRadial<T>) -> Self {
        MetricSpec::PiecewiseRadial {
            profile,
            preset: None,
        }
    }

    /// `e^ρ = (log(e/|z|))^{−a}` on the unit disk, `a ∈ (−∞, 1) ∖ {0}`.
    pub fn example1(a: T) -> Result<Self> {
        if !(a < T::one()) || a == T::zero() {
            return Err(Error::InvalidParameter(
                "Example 1 needs a < 1 and a ≠ 0".into(),
            ));
        }
        let profile = PiecewiseRadial::new(vec![], vec![RadialExpr::LogPower { a }], T::one())?;
        Ok(MetricSpec::PiecewiseRadial {
            profile,
            preset: Some(Preset::Example1 { a }),
        })
    }

    /// Two glued caps of constant curvature with cone points at `0` (order
    /// `α₂`) and `∞` (order `α₁`), `−1 < α₁ ≤ α₂ ≤ 0`.
    pub fn example2(alpha1: T, alpha2: T) -> Result<Self> {
        if !(alpha1 > -T::one() && alpha1 <= alpha2 && alpha2 <= T::zero()) {
            return Err(Error::InvalidParameter(
                "Example 2 needs −1 < α₁ ≤ α₂ ≤ 0".into(),
            ));
        }
        let two = T::lit(2.0);
        let a = T::lit(4.0) * (T::one() + alpha2) * (T::one() + alpha2);
        let inner = RadialExpr::cone(a, alpha2, T::one(), two * (T::one() + alpha2));
        let outer = RadialExpr::cone(a, alpha1, T::one(), two * (T::one() + alpha1));
        let profile = PiecewiseRadial::new(vec![T::one()], vec![inner, outer], T::infinity())?;
        Ok(MetricSpec::PiecewiseRadial {
            profile,
            preset: Some(Preset::Example2 { alpha1, alpha2 }),
        })
    }

    /// `2/(2−|z|^{1/2})²` inside the unit circle, `8|z|^{3/2}/(1+|z|^{1/2})²` outside.
    pub fn example3_chart2() -> Self {
        let half = T::lit(0.5);
        let inner = RadialExpr::cone(half, T::zero(), -half, half);
        let outer = RadialExpr::cone(T::lit(8.0), T::lit(0.75), T::one(), half);
        let profile = PiecewiseRadial::new(vec![T::one()], vec![inner, outer], T::infinity())
            .expect("Example 3 is continuous");
        MetricSpec::PiecewiseRadial {
            profile,
            preset: Some(Preset::Example3Chart2),
        }
    }

    /// The chart at infinity of Example 3, as displayed:
    /// `8|w|^{−9/2}/(1+|w|^{1/2})²` on `|w| ≤ 1`, `2|w|^{−3}/(2|w|^{1/2}−1)²` beyond.
    pub fn example3_chart1() -> Self {
        let half = T::lit(0.5);
        let inner = RadialExpr::cone(T::lit(8.0), T::lit(-2.25), T::one(), half);
        // 2 w^{−3} / (2 w^{1/2} − 1)² = 2 w^{−3} / (1 − 2 w^{1/2})²
        let outer = RadialExpr::cone(T::lit(2.0), T::lit(-1.5), T::lit(-2.0), half);
        let profile = PiecewiseRadial::new(vec![T::one()], vec![inner, outer], T::infinity())
            .expect("Example 3 chart 1 is continuous");
        MetricSpec::PiecewiseRadial {
            profile,
            preset: Some(Preset::Example3Chart1),
        }
    }

    pub fn preset(&self) -> Option<Preset<T>> {
        match self {
            MetricSpec::PiecewiseRadial { preset, .. } => *preset,
            _ => None,
        }
    }

    pub fn is_radial(&self) -> bool {
        match self {
            MetricSpec::PiecewiseRadial { .. } | MetricSpec::SphericalCone(_) | MetricSpec::Flat => {
                true
            }
            MetricSpec::Potential(p) => {
                p.harmonic.as_poly().terms().iter().all(|(m, _)| *m == (0, 0))
                    && p.atoms.atoms().iter().all(|a| a.point == origin())
                    && matches!(p.regular, RegularPart::Zero)
            }
        }
    }

    fn radial_profile(&self) -> Option<PiecewiseRadial<T>> {
        match self {
            MetricSpec::PiecewiseRadial { profile, .. } => Some(profile.clone()),
            MetricSpec::SphericalCone(c) => Some(c.as_radial()),
            MetricSpec::Flat => Some(PiecewiseRadial {
                breaks: Vec::new(),
                branches: vec![RadialExpr::Cone {
                    log_scale: T::zero(),
                    power: T::zero(),
                    coeff: T::zero(),
                    exponent: T::one(),
                }],
                extent: T::infinity(),
                log_shift: T::zero(),
                offset: T::zero(),
            }),
            MetricSpec::Potential(_) => None,
        }
    }

    /// Radius of the chart (`+∞` for the whole plane).
    pub fn extent(&self) -> T {
        match self {
            MetricSpec::PiecewiseRadial { profile, .. } => profile.extent,
            _ => T::infinity(),
        }
    }

    /// Radii (about the origin) where the closed form changes branch.
    pub fn radial_breaks(&self) -> Vec<T> {
        match self {
            MetricSpec::PiecewiseRadial { profile, .. } => profile.breaks.clone(),
            _ => Vec::new(),
        }
    }

    /// ω of the logarithmic part of `ρ`.
    pub fn atoms(&self) -> SignedAtomicMeasure<T> {
        match self {
            MetricSpec::Potential(p) => p.atoms.clone(),
            MetricSpec::Flat => SignedAtomicMeasure::empty(),
            _ => {
                let profile = self.radial_profile().expect("radial");
                let l = profile.origin_log_coefficient();
                // ℓ log r = (w/2π) log(1/r)  ⇒  w = −2πℓ
                SignedAtomicMeasure::single(origin(), -T::two_pi() * l)
            }
        }
    }

    /// Points where `e^ρ` is singular or degenerate, with the local
    /// behaviour of `e^ρ` there.
    pub fn singularities(&self) -> Vec<Singularity<T>> {
        let mut out: Vec<Singularity<T>> = self
            .atoms()
            .atoms()
            .iter()
            .map(|a| Singularity {
                at: a.point,
                behavior: RadialBehavior::Power(a.weight / T::two_pi()),
            })
            .collect();
        if let MetricSpec::PiecewiseRadial { profile, .. } = self {
            if matches!(profile.branches[0], RadialExpr::LogPower { .. }) {
                out.retain(|s| s.at != origin());
                out.push(Singularity {
                    at: origin(),
                    behavior: RadialBehavior::Log,
                });
            }
        }
        out
    }

    /// Singular behaviour of the closed-form curvature density.
    pub fn curvature_singularities(&self) -> Vec<Singularity<T>> {
        match self {
            MetricSpec::PiecewiseRadial { profile, .. } => profile.branches[0]
                .curvature_exponent_at_zero()
                .map(|b| Singularity {
                    at: origin(),
                    behavior: b,
                })
                .into_iter()
                .collect(),
            _ => Vec::new(),
        }
    }

    pub fn rho(&self, z: Point<T>) -> Result<T> {
        match self {
            MetricSpec::Flat => Ok(T::zero()),
            MetricSpec::PiecewiseRadial { profile, .. } => {
                let r = z.norm();
                if r > profile.extent * (T::one() + T::lit(1e-12)) {
                    return Err(Error::OutsideChart {
                        x: to_f64(z.re),
                        y: to_f64(z.im),
                    });
                }
                profile.rho(r).map_err(|e| match e {
                    Error::SingularPoint { .. } => Error::SingularPoint {
                        x: to_f64(z.re),
                        y: to_f64(z.im),
                    },
                    other => other,
                })
            }
            MetricSpec::SphericalCone(c) => {
                let r = z.norm();
                if r == T::zero() && c.alpha != T::zero() {
                    return Err(Error::SingularPoint { x: 0.0, y: 0.0 });
                }
                Ok(c.branch().rho(r))
            }
            MetricSpec::Potential(p) => {
                if p.atoms.atoms().iter().any(|a| a.point == z) {
                    return Err(Error::SingularPoint {
                        x: to_f64(z.re),
                        y: to_f64(z.im),
                    });
                }
                Ok(p.harmonic.eval(z) + p.atoms.log_potential(z) + p.regular.eval(z)?)
            }
        }
    }

    /// `ρ` at `loc`; equal to `rho(loc.z())` up to rounding, but stable at
    /// offsets far below the ulp of an atom at the apex.
    pub fn rho_at(&self, loc: Loc<T>) -> Result<T> {
        match self {
            MetricSpec::Potential(p) if loc.offset != Point::new(T::zero(), T::zero()) => {
                let z = loc.z();
                Ok(p.harmonic.eval(z) + p.atoms.log_potential_at(loc) + p.regular.eval(z)?)
            }
            _ => self.rho(loc.z()),
        }
    }

    /// `e^{ρ(z)}`.
    pub fn eval_conformal_factor(&self, z: Point<T>) -> Result<T> {
        self.rho(z).map(T::exp)
    }

    /// Closed-form curvature `K(z)` where one exists; potential metrics use
    /// `K = −Δu / (2e^ρ)` (finite differences if `u` has no exact Laplacian).
    pub fn curvature(&self, z: Point<T>) -> Result<T> {
        self.curvature_at(Loc::at(z))
    }

    /// [`Self::curvature`] at `loc`, stable next to an atom at the apex.
    pub fn curvature_at(&self, loc: Loc<T>) -> Result<T> {
        let z = loc.z();
        match self {
            MetricSpec::Flat => Ok(T::zero()),
            MetricSpec::PiecewiseRadial { profile, .. } => Ok(profile.curvature(z.norm())),
            MetricSpec::SphericalCone(c) => Ok(c.k0),
            MetricSpec::Potential(p) => {
                let lap = match p.regular.laplacian(z) {
                    Some(l) => l,
                    None => {
                        let h = T::lit(1e-4);
                        let u = |w: Point<T>| p.regular.eval(w);
                        let c = u(z)?;
                        let sum = u(z + Point::new(h, T::zero()))?
                            + u(z - Point::new(h, T::zero()))?
                            + u(z + Point::new(T::zero(), h))?
                            + u(z - Point::new(T::zero(), h))?;
                        (sum - T::lit(4.0) * c) / (h * h)
                    }
                };
                Ok(-lap / (T::lit(2.0) * self.rho_at(loc)?.exp()))
            }
        }
    }

    /// `λ²e^ρ`.
    pub fn scaled(&self, lambda: T) -> Self {
        let shift = (lambda * lambda).ln();
        match self {
            MetricSpec::Flat => Self::potential(
                HarmonicPoly::constant(shift),
                SignedAtomicMeasure::empty(),
                RegularPart::Zero,
            ),
            MetricSpec::PiecewiseRadial { profile, .. } => MetricSpec::PiecewiseRadial {
                profile: profile.scaled(lambda),
                preset: None,
            },
            MetricSpec::SphericalCone(c) => MetricSpec::SphericalCone(SphericalCone {
                k0: c.k0 / (lambda * lambda),
                alpha: c.alpha,
                tau0: c.tau0 * lambda,
            }),
            MetricSpec::Potential(p) => Self::potential(
                p.harmonic.add(&HarmonicPoly::constant(shift)),
                p.atoms.clone(),
                p.regular.clone(),
            ),
        }
    }

    /// `ρ = f + u` with the curvature density. Cusps are rejected.
    pub fn decompose(&self) -> Result<Decomposition<T>> {
        let atoms = self.atoms();
        atoms.require_no_cusps("metric has a cusp; e^ρ is not locally integrable there")?;
        let k = Density::Metric(Box::new(self.clone()));
        Ok(match self {
            MetricSpec::Flat => Decomposition {
                f_atoms: SignedAtomicMeasure::empty(),
                f_harmonic: HarmonicPoly::zero(),
                u: RegularPart::Zero,
                k: Density::Zero,
            },
            MetricSpec::Potential(p) => Decomposition {
                f_atoms: p.atoms.clone(),
                f_harmonic: p.harmonic.clone(),
                u: p.regular.clone(),
                k: if p.regular.is_zero() { Density::Zero } else { k },
            },
            _ => {
                let profile = self.radial_profile().expect("radial");
                let l = profile.origin_log_coefficient();
                Decomposition {
                    f_atoms: atoms,
                    f_harmonic: HarmonicPoly::zero(),
                    u: RegularPart::Radial(profile.shifted(-l)),
                    k,
                }
            }
        })
    }

    /// The metric in the chart `w = 1/z`: `ρ₁(w) = ρ(1/w) − 4 log|w|`.
    pub fn pullback_inversion(&self) -> Result<Self> {
        match self {
            MetricSpec::Potential(_) => Err(Error::NotRadial),
            _ => {
                let profile = self.radial_profile().expect("radial").inverted()?;
                let preset = match self.preset() {
                    Some(Preset::Example3Chart2) => Some(Preset::Example3Chart1),
                    Some(Preset::Example3Chart1) => Some(Preset::Example3Chart2),
                    _ => None,
                };
                Ok(MetricSpec::PiecewiseRadial { profile, preset })
            }
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            MetricSpec::PiecewiseRadial { .. } => "piecewise_radial",
            MetricSpec::SphericalCone(_) => "cone",
            MetricSpec::Potential(_) => "potential",
            MetricSpec::Flat => "flat",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64 as C;
    use std::f64::consts::PI;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn cone_at_origin_is_round_sphere() {
        let g = MetricSpec::spherical_cone(1.0, 0.0, 2.0).unwrap();
        assert!(close(g.eval_conformal_factor(C::new(0.0, 0.0)).unwrap(), 4.0, 1e-15));
        let z = C::new(0.3, 0.4);
        let r2 = z.norm_sqr();
        assert!(close(
            g.eval_conformal_factor(z).unwrap(),
            4.0 / ((1.0 + r2) * (1.0 + r2)),
            1e-14
        ));
    }

    #[test]
    fn flat_cone_and_flat_metric() {
        let g = MetricSpec::spherical_cone(0.0, 0.0, 1.0).unwrap();
        assert!(close(g.eval_conformal_factor(C::new(0.7, -0.2)).unwrap(), 1.0, 1e-15));
        assert_eq!(MetricSpec::<f64>::flat().eval_conformal_factor(C::new(3.0, 1.0)).unwrap(), 1.0);
    }

    #[test]
    fn cone_with_negative_order() {
        // α = −1/2, τ₀² = 4(1−α)² = 9: factor at |w|=1 is 9/(1+1)² = 9/4
        let g = MetricSpec::spherical_cone(1.0, -0.5, 3.0).unwrap();
        assert!(close(g.eval_conformal_factor(C::new(0.0, 1.0)).unwrap(), 2.25, 1e-14));
        assert!(g.eval_conformal_factor(C::new(0.0, 0.0)).is_err());
    }

    #[test]
    fn cone_parameter_validation() {
        assert!(MetricSpec::spherical_cone(1.0, 1.0, 1.0).is_err());
        assert!(MetricSpec::spherical_cone(1.0, 0.2, 0.0).is_err());
        assert!(MetricSpec::spherical_cone(-1.0, 0.2, 1.0).is_err());
    }

    #[test]
    fn example2_branches_agree_on_unit_circle() {
        for a2 in [0.0, -0.25, -0.5] {
            let g = MetricSpec::example2(-0.75, a2).unwrap();
            let v = g.eval_conformal_factor(C::new(1.0, 0.0)).unwrap();
            assert!(close(v, (1.0 + a2) * (1.0 + a2), 1e-14));
            let inside = g.eval_conformal_factor(C::new(1.0 - 1e-12, 0.0)).unwrap();
            assert!(close(inside, v, 1e-10));
        }
    }

    #[test]
    fn radial_continuity_is_checked() {
        let bad = PiecewiseRadial::new(
            vec![1.0],
            vec![RadialExpr::cone(1.0, 0.0, 0.0, 1.0), RadialExpr::cone(2.0, 0.0, 0.0, 1.0)],
            f64::INFINITY,
        );
        assert!(bad.is_err());
    }

    #[test]
    fn example2_decomposition() {
        let a2 = -0.25;
        let g = MetricSpec::example2(-0.5, a2).unwrap();
        let d = g.decompose().unwrap();
        assert_eq!(d.f_atoms.len(), 1);
        assert!(close(d.f_atoms.weight_at(C::new(0.0, 0.0)), 4.0 * PI * 0.25, 1e-15));
        let sigma = (1.0f64 - 0.5).powi(2) / (1.0f64 + a2).powi(2);
        assert!(close(d.k.eval(C::new(0.5, 0.0)).unwrap(), 1.0, 1e-14));
        assert!(close(d.k.eval(C::new(0.0, 2.0)).unwrap(), sigma, 1e-14));
        // u from the displayed closed form
        let z = C::new(0.3, 0.2);
        let r = z.norm();
        let u_disp = (4.0 * (1.0 + a2).powi(2) / (1.0 + r.powf(2.0 * (1.0 + a2))).powi(2)).ln();
        assert!(close(d.u(z).unwrap(), u_disp, 1e-14));
        let z = C::new(-1.5, 0.9);
        let r = z.norm();
        let u_disp = (4.0 * (1.0 + a2).powi(2) * r.powf(2.0 * (-0.5 - a2))
            / (1.0 + r.powf(2.0 * 0.5)).powi(2))
        .ln();
        assert!(close(d.u(z).unwrap(), u_disp, 1e-14));
        assert!(close(d.f(z), 2.0 * a2 * r.ln(), 1e-14));
    }

    #[test]
    fn example1_decomposition_is_trivial() {
        let g = MetricSpec::example1(0.5).unwrap();
        let d = g.decompose().unwrap();
        assert!(d.f_atoms.is_empty());
        let z = C::new(0.3, -0.1);
        assert!(close(d.u(z).unwrap(), g.rho(z).unwrap(), 1e-15));
        let r = z.norm();
        let k = -(0.5 / 2.0) * r.powi(-2) * (1.0 - r.ln()).powf(-(2.0 - 0.5));
        assert!(close(d.k.eval(z).unwrap(), k, 1e-14));
        assert!(g.eval_conformal_factor(C::new(0.0, 0.0)).is_err());
        assert!(matches!(
            g.eval_conformal_factor(C::new(1.5, 0.0)),
            Err(Error::OutsideChart { .. })
        ));
        assert!(MetricSpec::example1(0.0).is_err());
        assert!(MetricSpec::example1(1.0).is_err());
    }

    #[test]
    fn flat_decomposition() {
        let d = MetricSpec::<f64>::flat().decompose().unwrap();
        assert!(d.f_atoms.is_empty());
        assert_eq!(d.u(C::new(1.0, 2.0)).unwrap(), 0.0);
        assert_eq!(d.k.eval(C::new(1.0, 2.0)).unwrap(), 0.0);
    }

    #[test]
    fn inversion_of_flat_is_point_at_infinity() {
        let g1 = MetricSpec::<f64>::flat().pullback_inversion().unwrap();
        let w = C::new(0.3, 0.1);
        assert!(close(g1.rho(w).unwrap(), -4.0 * w.norm().ln(), 1e-14));
        assert!(close(g1.atoms().weight_at(C::new(0.0, 0.0)), 8.0 * PI, 1e-14));
    }

    #[test]
    fn inversion_of_example3_reproduces_displayed_chart() {
        let g1 = MetricSpec::<f64>::example3_chart2().pullback_inversion().unwrap();
        let disp = MetricSpec::<f64>::example3_chart1();
        for k in 1..60 {
            let r = 0.05 * k as f64;
            let w = C::from_polar(r, 0.37 * k as f64);
            assert!(close(g1.rho(w).unwrap(), disp.rho(w).unwrap(), 1e-12), "r = {r}");
            // direct formula
            let expect = if r <= 1.0 {
                (8.0 * r.powf(-4.5) / (1.0 + r.sqrt()).powi(2)).ln()
            } else {
                (2.0 * r.powi(-3) / (2.0 * r.sqrt() - 1.0).powi(2)).ln()
            };
            assert!(close(disp.rho(w).unwrap(), expect, 1e-12));
        }
        assert!(close(disp.atoms().weight_at(C::new(0.0, 0.0)), 9.0 * PI, 1e-14));
        assert!(matches!(disp.decompose(), Err(Error::Cusp { .. })));
    }

    #[test]
    fn inversion_of_example2_swaps_cone_orders() {
        let (a1, a2) = (-0.5, -0.25);
        let g1 = MetricSpec::example2(a1, a2).unwrap().pullback_inversion().unwrap();
        let d1 = g1.decompose().unwrap();
        assert!(close(d1.f_atoms.weight_at(C::new(0.0, 0.0)), -4.0 * PI * a1, 1e-14));
        for w in [C::new(0.3, 0.1), C::new(-0.8, 0.2), C::new(1.7, -2.0)] {
            let r: f64 = w.norm();
            let u1 = if r < 1.0 {
                (4.0 * (1.0 + a2).powi(2) / (1.0 + r.powf(2.0 * (1.0 + a1))).powi(2)).ln()
            } else {
                (4.0 * (1.0 + a2).powi(2) * r.powf(2.0 * (a2 - a1))
                    / (1.0 + r.powf(2.0 * (1.0 + a2))).powi(2))
                .ln()
            };
            assert!(close(d1.u(w).unwrap(), u1, 1e-12));
            assert!(close(d1.f(w), 2.0 * a1 * r.ln(), 1e-12));
        }
        assert!(MetricSpec::pure_atoms(SignedAtomicMeasure::single(C::new(0.5, 0.0), 1.0))
            .pullback_inversion()
            .is_err());
    }

    #[test]
    fn cone_agrees_with_round_example2() {
        let cone = MetricSpec::spherical_cone(1.0, 0.0, 2.0).unwrap();
        let ex = MetricSpec::example2(0.0, 0.0).unwrap();
        for k in 0..50 {
            let z = C::from_polar(0.019 * k as f64 + 0.001, k as f64);
            let (a, b) = (cone.eval_conformal_factor(z).unwrap(), ex.eval_conformal_factor(z).unwrap());
            assert!((a - b).abs() <= 1e-12 * b);
        }
    }

    #[test]
    fn potential_metric_eval_and_singular_point() {
        let atoms = SignedAtomicMeasure::single(C::new(0.5, 0.0), 2.0 * PI);
        let h = HarmonicPoly::from_complex_coefficients(&[(0.1, 0.0), (0.2, 0.3)]);
        let g = MetricSpec::potential(h.clone(), atoms, RegularPart::Zero);
        let z = C::new(-0.2, 0.4);
        let expect = h.eval(z) + (1.0 / (z - C::new(0.5, 0.0)).norm()).ln();
        assert!(close(g.rho(z).unwrap(), expect, 1e-14));
        assert!(matches!(
            g.eval_conformal_factor(C::new(0.5, 0.0)),
            Err(Error::SingularPoint { .. })
        ));
    }

    #[test]
    fn potential_curvature_from_polynomial_regular_part() {
        // u = x² + y²: Δu = 4, K = −2 e^{−ρ}
        let u = BivariatePoly::new([((2, 0), 1.0), ((0, 2), 1.0)]);
        let g = MetricSpec::potential(
            HarmonicPoly::zero(),
            SignedAtomicMeasure::empty(),
            RegularPart::Polynomial(u),
        );
        let z = C::new(0.3, 0.2);
        let k = g.curvature(z).unwrap();
        assert!(close(k, -2.0 * (-z.norm_sqr()).exp(), 1e-14));
    }
}
