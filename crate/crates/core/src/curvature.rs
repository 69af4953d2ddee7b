//! Curvature measures: the density/atom split `𝒦 = K e^ρ dx + k_s`, total
//! curvature, positive variation `𝒦₊(E;K₀)`, two-chart Gauss–Bonnet totals and
//! finite-difference recovery of `K` from `ρ`.

use std::fmt;
use std::sync::Arc;

use crate::domain::{Membership, PlanarDomain};
use crate::error::{to_f64, Error, Result};
use crate::measure::SignedAtomicMeasure;
use crate::metric::{Decomposition, MetricSpec};
use crate::quad::{self, QuadResult, Singularity, Tolerance};
use crate::scalar::{Loc, Point, Real};

/// Finite-difference step used when none is given.
pub const DEFAULT_STEP: f64 = 1e-4;

/// Closure-backed scalar field with optional singularity hints for quadrature.
#[derive(Clone)]
pub struct CustomDensity<T> {
    f: Arc<dyn Fn(Point<T>) -> T + Send + Sync>,
    singularities: Vec<Singularity<T>>,
    circles: Vec<(Point<T>, T)>,
}

/// A scalar field on the plane, typically a curvature density `K`.
#[derive(Clone)]
pub enum Density<T> {
    Zero,
    Constant(T),
    /// `values[k]` on `breaks[k−1] ≤ |z − center| < breaks[k]`.
    RadialSteps {
        center: Point<T>,
        breaks: Vec<T>,
        values: Vec<T>,
    },
    /// The closed-form curvature of a metric.
    Metric(Box<MetricSpec<T>>),
    Custom(CustomDensity<T>),
    /// `[base − k0]⁺`.
    Excess { base: Box<Density<T>>, k0: T },
}

impl<T: fmt::Debug> fmt::Debug for Density<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Density::Zero => write!(f, "Zero"),
            Density::Constant(c) => write!(f, "Constant({c:?})"),
            Density::RadialSteps {
                center,
                breaks,
                values,
            } => f
                .debug_struct("RadialSteps")
                .field("center", center)
                .field("breaks", breaks)
                .field("values", values)
                .finish(),
            Density::Metric(_) => write!(f, "Metric"),
            Density::Custom(_) => write!(f, "Custom"),
            Density::Excess { base, k0 } => write!(f, "Excess({base:?} - {k0:?})"),
        }
    }
}

impl<T: Real> Density<T> {
    pub fn custom<F>(f: F) -> Self
    where
        F: Fn(Point<T>) -> T + Send + Sync + 'static,
    {
        Self::custom_with(f, Vec::new(), Vec::new())
    }

    /// Custom field with known singular points and jump circles.
    pub fn custom_with<F>(f: F, singularities: Vec<Singularity<T>>, circles: Vec<(Point<T>, T)>) -> Self
    where
        F: Fn(Point<T>) -> T + Send + Sync + 'static,
    {
        Density::Custom(CustomDensity {
            f: Arc::new(f),
            singularities,
            circles,
        })
    }

    pub fn radial_steps(center: Point<T>, breaks: Vec<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != breaks.len() + 1 || breaks.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidParameter(
                "radial steps need increasing breaks and one more value than breaks".into(),
            ));
        }
        Ok(Density::RadialSteps {
            center,
            breaks,
            values,
        })
    }

    /// `[self − k0]⁺`.
    pub fn excess(&self, k0: T) -> Self {
        match self {
            Density::Zero => {
                if k0 >= T::zero() {
                    Density::Zero
                } else {
                    Density::Constant(-k0)
                }
            }
            Density::Constant(c) => {
                let v = (*c - k0).max(T::zero());
                if v == T::zero() {
                    Density::Zero
                } else {
                    Density::Constant(v)
                }
            }
            Density::RadialSteps {
                center,
                breaks,
                values,
            } => Density::RadialSteps {
                center: *center,
                breaks: breaks.clone(),
                values: values.iter().map(|v| (*v - k0).max(T::zero())).collect(),
            },
            other => Density::Excess {
                base: Box::new(other.clone()),
                k0,
            },
        }
    }

    pub fn eval(&self, z: Point<T>) -> Result<T> {
        self.eval_at(Loc::at(z))
    }

    /// [`Self::eval`] at `loc`; metric densities use the offset next to atoms.
    pub fn eval_at(&self, loc: Loc<T>) -> Result<T> {
        let z = loc.z();
        Ok(match self {
            Density::Zero => T::zero(),
            Density::Constant(c) => *c,
            Density::RadialSteps {
                center,
                breaks,
                values,
            } => {
                let r = (z - *center).norm();
                values[breaks.iter().take_while(|b| **b <= r).count()]
            }
            Density::Metric(g) => g.curvature_at(loc)?,
            Density::Custom(c) => (c.f)(z),
            Density::Excess { base, k0 } => (base.eval_at(loc)? - *k0).max(T::zero()),
        })
    }

    /// True when the field vanishes identically by construction.
    pub fn is_zero(&self) -> bool {
        match self {
            Density::Zero => true,
            Density::Constant(c) => *c == T::zero(),
            Density::RadialSteps { values, .. } => values.iter().all(|v| *v == T::zero()),
            _ => false,
        }
    }

    pub fn singularities(&self) -> Vec<Singularity<T>> {
        match self {
            Density::Metric(g) => g.curvature_singularities(),
            Density::Custom(c) => c.singularities.clone(),
            Density::Excess { base, .. } => base.singularities(),
            _ => Vec::new(),
        }
    }

    /// Circles across which the field may jump.
    pub fn circles(&self) -> Vec<(Point<T>, T)> {
        match self {
            Density::RadialSteps { center, breaks, .. } => {
                breaks.iter().map(|b| (*center, *b)).collect()
            }
            Density::Metric(g) => {
                let o = Point::new(T::zero(), T::zero());
                g.radial_breaks().into_iter().map(|b| (o, b)).collect()
            }
            Density::Custom(c) => c.circles.clone(),
            Density::Excess { base, .. } => base.circles(),
            _ => Vec::new(),
        }
    }
}

/// `𝒦 = K e^ρ dx + k_s`, with `k_s = ω/2`.
#[derive(Debug, Clone)]
pub struct CurvatureDecomposition<T> {
    pub density: Density<T>,
    /// Curvature atoms (half the ω-weights).
    pub k_s_atoms: SignedAtomicMeasure<T>,
    /// The `ρ = f + u` split the density belongs to.
    pub potential: Decomposition<T>,
}

impl<T: Real> CurvatureDecomposition<T> {
    pub fn from_decomposition(d: Decomposition<T>) -> Self {
        Self {
            density: d.k.clone(),
            k_s_atoms: d.f_atoms.scaled(T::lit(0.5)),
            potential: d,
        }
    }

    pub fn of_metric(g: &MetricSpec<T>) -> Result<Self> {
        Ok(Self::from_decomposition(g.decompose()?))
    }

    /// Replaces the density, keeping atoms and potential.
    pub fn with_density(self, density: Density<T>) -> Self {
        Self {
            density: density.clone(),
            potential: Decomposition {
                k: density,
                ..self.potential
            },
            ..self
        }
    }

    fn atoms_in(&self, d: &PlanarDomain<T>) -> Result<SignedAtomicMeasure<T>> {
        for a in self.k_s_atoms.atoms() {
            if d.classify(a.point) == Membership::Boundary {
                return Err(Error::AtomOnBoundary {
                    x: to_f64(a.point.re),
                    y: to_f64(a.point.im),
                });
            }
        }
        Ok(self
            .k_s_atoms
            .restrict(|p| d.classify(p) == Membership::Inside))
    }

    /// `k_s(d)`.
    pub fn singular_mass(&self, d: &PlanarDomain<T>) -> Result<T> {
        Ok(self.atoms_in(d)?.total_mass())
    }

    /// `k_{s,+}(d)`.
    pub fn positive_singular_mass(&self, d: &PlanarDomain<T>) -> Result<T> {
        Ok(self.atoms_in(d)?.positive_part().total_mass())
    }
}

/// `𝒦(d) = ∫_d K e^ρ + k_s(d)`.
pub fn total_curvature<T: Real>(
    c: &CurvatureDecomposition<T>,
    g: &MetricSpec<T>,
    d: &PlanarDomain<T>,
) -> Result<QuadResult<T>> {
    let smooth = quad::weighted_area(g, d, &c.density)?;
    Ok(smooth.plus(QuadResult::exact(c.singular_mass(d)?)))
}

/// `𝒦₊(d;K₀) = k_{s,+}(d) + ∫_d [K − K₀]⁺ e^ρ`.
///
/// With purely atomic singular part the Borel supremum is attained on the
/// positive atoms together with `{K > K₀}`.
pub fn positive_variation<T: Real>(
    c: &CurvatureDecomposition<T>,
    g: &MetricSpec<T>,
    d: &PlanarDomain<T>,
    k0: T,
) -> Result<QuadResult<T>> {
    positive_variation_with(c, g, d, k0, &Tolerance::area())
}

pub fn positive_variation_with<T: Real>(
    c: &CurvatureDecomposition<T>,
    g: &MetricSpec<T>,
    d: &PlanarDomain<T>,
    k0: T,
    tol: &Tolerance<T>,
) -> Result<QuadResult<T>> {
    let smooth = quad::weighted_area_with(g, d, &c.density.excess(k0), tol)?;
    Ok(smooth.plus(QuadResult::exact(c.positive_singular_mass(d)?)))
}

/// Curvature of a sphere covered by `{|z| < r₀}` and the inverted chart
/// `{|w| < 1/r₀}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussBonnet<T> {
    /// `𝒦` of the whole surface.
    pub total: T,
    /// `∫K e^ρ` over both charts.
    pub smooth: T,
    /// `k_s` over both charts.
    pub atoms: T,
    pub near_chart: QuadResult<T>,
    pub far_chart: QuadResult<T>,
    pub error_estimate: T,
}

pub fn gauss_bonnet_two_chart<T: Real>(g2: &MetricSpec<T>, r0: T) -> Result<GaussBonnet<T>> {
    if !(r0 > T::zero()) {
        return Err(Error::InvalidParameter("chart cut radius must be positive".into()));
    }
    if !g2.is_radial() {
        return Err(Error::NotRadial);
    }
    g2.atoms().require_no_cusps("in the chart z")?;
    let g1 = g2.pullback_inversion()?;
    g1.atoms()
        .require_no_cusps("at z = ∞, in the chart w = 1/z")?;
    let c2 = CurvatureDecomposition::of_metric(g2)?;
    let c1 = CurvatureDecomposition::of_metric(&g1)?;
    let near = PlanarDomain::ball(r0)?;
    let far = PlanarDomain::ball(r0.recip())?;
    let near_chart = quad::weighted_area(g2, &near, &c2.density)?;
    let far_chart = quad::weighted_area(&g1, &far, &c1.density)?;
    let atoms = c2.singular_mass(&near)? + c1.singular_mass(&far)?;
    let smooth = near_chart.value + far_chart.value;
    Ok(GaussBonnet {
        total: smooth + atoms,
        smooth,
        atoms,
        near_chart,
        far_chart,
        error_estimate: near_chart.error_estimate + far_chart.error_estimate,
    })
}

fn check_proximity<T: Real>(z: Point<T>, h: T, points: &[Point<T>], radii: &[(Point<T>, T)]) -> Result<()> {
    let required = T::lit(10.0) * h;
    let mut dist = T::infinity();
    for p in points {
        dist = dist.min((z - *p).norm());
    }
    for (c, r) in radii {
        dist = dist.min(((z - *c).norm() - *r).abs());
    }
    if dist <= required {
        return Err(Error::Proximity {
            distance: to_f64(dist),
            required: to_f64(required),
        });
    }
    Ok(())
}

fn five_point<T: Real, F>(f: F, z: Point<T>, h: T) -> Result<T>
where
    F: Fn(Point<T>) -> Result<T>,
{
    let (dx, dy) = (Point::new(h, T::zero()), Point::new(T::zero(), h));
    let s = f(z + dx)? + f(z - dx)? + f(z + dy)? + f(z - dy)?;
    Ok((s - T::lit(4.0) * f(z)?) / (h * h))
}

/// `K(z) ≈ −Δ_h ρ(z) / (2e^{ρ(z)})` with the 5-point Laplacian.
pub fn recover_density<T: Real>(g: &MetricSpec<T>, z: Point<T>, h: T) -> Result<T> {
    let points: Vec<Point<T>> = g.singularities().iter().map(|s| s.at).collect();
    let o = Point::new(T::zero(), T::zero());
    let circles: Vec<(Point<T>, T)> = g.radial_breaks().into_iter().map(|b| (o, b)).collect();
    check_proximity(z, h, &points, &circles)?;
    let lap = five_point(|w| g.rho(w), z, h)?;
    Ok(-lap / (T::lit(2.0) * g.rho(z)?.exp()))
}

/// `φ(z) = −Δ_h u − 2[K − K₀]e^{f+u} − 2K₀e^{f+u}`; non-positive values
/// certify the subsolution property at `z`.
pub fn subsolution_residual<T: Real>(
    c: &CurvatureDecomposition<T>,
    k0: T,
    z: Point<T>,
    h: T,
) -> Result<T> {
    let dec = &c.potential;
    let mut points: Vec<Point<T>> = dec.f_atoms.atoms().iter().map(|a| a.point).collect();
    points.extend(c.density.singularities().iter().map(|s| s.at));
    let o = Point::new(T::zero(), T::zero());
    let mut circles = c.density.circles();
    let u_breaks = dec.u.radial_breaks();
    if dec.u.is_radial() {
        points.push(o);
    }
    circles.extend(u_breaks.into_iter().map(|b| (o, b)));
    check_proximity(z, h, &points, &circles)?;
    let lap = five_point(|w| dec.u(w), z, h)?;
    let e = dec.rho(z)?.exp();
    let k = c.density.eval(z)?;
    let two = T::lit(2.0);
    Ok(-lap - two * (k - k0) * e - two * k0 * e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64 as C;
    use std::f64::consts::PI;

    #[test]
    fn conversion_halves_atoms() {
        let g = MetricSpec::example2(-0.5, -0.25).unwrap();
        let c = CurvatureDecomposition::of_metric(&g).unwrap();
        assert!((c.k_s_atoms.weight_at(C::new(0.0, 0.0)) - 2.0 * PI * 0.25).abs() < 1e-15);
    }

    #[test]
    fn steps_and_excess() {
        let k = Density::radial_steps(C::new(0.0, 0.0), vec![1.0], vec![1.0, 0.25]).unwrap();
        assert_eq!(k.eval(C::new(0.5, 0.0)).unwrap(), 1.0);
        assert_eq!(k.eval(C::new(0.0, 2.0)).unwrap(), 0.25);
        let e = k.excess(0.5);
        assert_eq!(e.eval(C::new(0.5, 0.0)).unwrap(), 0.5);
        assert_eq!(e.eval(C::new(0.0, 2.0)).unwrap(), 0.0);
        assert!(Density::<f64>::Constant(1.0).excess(1.0).is_zero());
    }

    #[test]
    fn proximity_is_enforced() {
        let g = MetricSpec::example2(-0.5, -0.25).unwrap();
        assert!(matches!(
            recover_density(&g, C::new(1.0 + 5e-4, 0.0), 1e-4),
            Err(Error::Proximity { .. })
        ));
        assert!(matches!(
            recover_density(&g, C::new(5e-4, 0.0), 1e-4),
            Err(Error::Proximity { .. })
        ));
    }
}
