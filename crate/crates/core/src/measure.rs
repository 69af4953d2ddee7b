//! Finite signed atomic measures on the plane.
//!
//! Weights are stored in the ω-convention: an atom of weight `β` at `p`
//! contributes `(β/2π)·log(1/|z−p|)` to the logarithmic potential. An atom is
//! a cusp once its positive weight reaches `4π`.

use crate::error::{to_f64, Error, Result};
use crate::scalar::{Loc, Point, Real};

/// One weighted point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom<T> {
    pub point: Point<T>,
    pub weight: T,
}

/// A finite signed measure made of Dirac atoms.
///
/// Weights at identical points are merged on construction (exact coordinate
/// equality) and zero weights are dropped, so every stored point is distinct.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SignedAtomicMeasure<T> {
    atoms: Vec<Atom<T>>,
}

/// Points carrying positive weight at or above a threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularSet<T> {
    pub points: Vec<Point<T>>,
    pub threshold: T,
}

impl<T: Real> SingularSet<T> {
    pub fn contains(&self, p: Point<T>) -> bool {
        self.points.contains(&p)
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

impl<T: Real> SignedAtomicMeasure<T> {
    pub fn empty() -> Self {
        Self { atoms: Vec::new() }
    }

    /// Builds a measure from `(point, weight)` pairs.
    pub fn new<I>(atoms: I) -> Self
    where
        I: IntoIterator<Item = (Point<T>, T)>,
    {
        let mut merged: Vec<Atom<T>> = Vec::new();
        for (point, weight) in atoms {
            match merged.iter_mut().find(|a| a.point == point) {
                Some(a) => a.weight = a.weight + weight,
                None => merged.push(Atom { point, weight }),
            }
        }
        merged.retain(|a| a.weight != T::zero());
        Self { atoms: merged }
    }

    pub fn single(point: Point<T>, weight: T) -> Self {
        Self::new([(point, weight)])
    }

    pub fn atoms(&self) -> &[Atom<T>] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Weight carried by the exact point `p` (zero if `p` is not an atom).
    pub fn weight_at(&self, p: Point<T>) -> T {
        self.atoms
            .iter()
            .find(|a| a.point == p)
            .map_or(T::zero(), |a| a.weight)
    }

    pub fn total_mass(&self) -> T {
        self.atoms.iter().map(|a| a.weight).sum()
    }

    pub fn total_variation(&self) -> T {
        self.atoms.iter().map(|a| a.weight.abs()).sum()
    }

    /// Splits into `(ω₊, ω₋)`, both with non-negative weights.
    pub fn jordan_decompose(&self) -> (Self, Self) {
        let positive = self
            .atoms
            .iter()
            .filter(|a| a.weight > T::zero())
            .copied()
            .collect();
        let negative = self
            .atoms
            .iter()
            .filter(|a| a.weight < T::zero())
            .map(|a| Atom {
                point: a.point,
                weight: -a.weight,
            })
            .collect();
        (Self { atoms: positive }, Self { atoms: negative })
    }

    pub fn positive_part(&self) -> Self {
        self.jordan_decompose().0
    }

    pub fn negative_part(&self) -> Self {
        self.jordan_decompose().1
    }

    /// `self − other`, merging coincident points.
    pub fn difference(&self, other: &Self) -> Self {
        Self::new(
            self.atoms
                .iter()
                .map(|a| (a.point, a.weight))
                .chain(other.atoms.iter().map(|a| (a.point, -a.weight))),
        )
    }

    pub fn sum(&self, other: &Self) -> Self {
        Self::new(
            self.atoms
                .iter()
                .chain(other.atoms.iter())
                .map(|a| (a.point, a.weight)),
        )
    }

    /// Multiplies every weight by `factor`.
    pub fn scaled(&self, factor: T) -> Self {
        Self::new(self.atoms.iter().map(|a| (a.point, a.weight * factor)))
    }

    /// Keeps the atoms whose location satisfies `keep`.
    pub fn restrict<F>(&self, mut keep: F) -> Self
    where
        F: FnMut(Point<T>) -> bool,
    {
        Self {
            atoms: self
                .atoms
                .iter()
                .filter(|a| keep(a.point))
                .copied()
                .collect(),
        }
    }

    /// Image of the measure under a point map. Atoms landing on the same
    /// point are merged.
    pub fn push_forward<F>(&self, map: F) -> Self
    where
        F: Fn(Point<T>) -> Point<T>,
    {
        Self::new(self.atoms.iter().map(|a| (map(a.point), a.weight)))
    }

    /// Atoms of `ω₊` with weight `≥ threshold`.
    pub fn singular_set(&self, threshold: T) -> Result<SingularSet<T>> {
        if !(threshold > T::zero()) {
            return Err(Error::InvalidParameter(format!(
                "singular-set threshold must be positive, got {}",
                to_f64(threshold)
            )));
        }
        Ok(SingularSet {
            points: self
                .atoms
                .iter()
                .filter(|a| a.weight >= threshold)
                .map(|a| a.point)
                .collect(),
            threshold,
        })
    }

    /// `S_{2π}`.
    pub fn s2pi(&self) -> SingularSet<T> {
        self.singular_set(T::two_pi())
            .expect("2π is a valid threshold")
    }

    /// True iff every positive atom has weight strictly below `4π`.
    pub fn assert_no_cusps(&self) -> bool {
        self.atoms.iter().all(|a| a.weight < T::four_pi())
    }

    /// The first cusp atom, if any.
    pub fn first_cusp(&self) -> Option<Atom<T>> {
        self.atoms.iter().find(|a| a.weight >= T::four_pi()).copied()
    }

    /// Errors with [`Error::Cusp`] if a cusp is present.
    pub fn require_no_cusps(&self, context: &str) -> Result<()> {
        match self.first_cusp() {
            None => Ok(()),
            Some(a) => Err(Error::Cusp {
                x: to_f64(a.point.re),
                y: to_f64(a.point.im),
                mass: to_f64(a.weight),
                context: if context.is_empty() {
                    String::new()
                } else {
                    format!(" ({context})")
                },
            }),
        }
    }

    /// Supremum of the exponents `p` for which `e^{f₊}` is `L^p` near `x`:
    /// `4π / ω₊({x})`, or `+∞` when `x` carries no positive mass.
    pub fn critical_exponent(&self, x: Point<T>) -> T {
        let w = self.weight_at(x);
        if w > T::zero() {
            T::four_pi() / w
        } else {
            T::infinity()
        }
    }

    /// `Σ (βᵢ/2π)·log(1/|z−pᵢ|)`; infinite at an atom.
    pub fn log_potential(&self, z: Point<T>) -> T {
        self.atoms
            .iter()
            .map(|a| -(a.weight / T::two_pi()) * (z - a.point).norm().ln())
            .sum()
    }

    /// [`Self::log_potential`] at `loc`, with apex atoms measured by the offset.
    pub fn log_potential_at(&self, loc: Loc<T>) -> T {
        self.atoms
            .iter()
            .map(|a| -(a.weight / T::two_pi()) * loc.distance_to(a.point).ln())
            .sum()
    }

    /// Distance from `z` to the nearest atom (`+∞` for the empty measure).
    pub fn distance_to_atoms(&self, z: Point<T>) -> T {
        self.atoms
            .iter()
            .map(|a| (z - a.point).norm())
            .fold(T::infinity(), T::min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    fn m(atoms: &[((f64, f64), f64)]) -> SignedAtomicMeasure<f64> {
        SignedAtomicMeasure::new(
            atoms
                .iter()
                .map(|&((x, y), w)| (Complex64::new(x, y), w)),
        )
    }

    #[test]
    fn jordan_split_by_sign() {
        let mu = m(&[((0.0, 0.0), 3.0 * PI), ((1.0, 0.0), -PI)]);
        let (pos, neg) = mu.jordan_decompose();
        assert_eq!(pos, m(&[((0.0, 0.0), 3.0 * PI)]));
        assert_eq!(neg, m(&[((1.0, 0.0), PI)]));
        assert_eq!(pos.difference(&neg), mu);
    }

    #[test]
    fn jordan_of_empty_and_cancelled() {
        let (p, n) = SignedAtomicMeasure::<f64>::empty().jordan_decompose();
        assert!(p.is_empty() && n.is_empty());
        let mu = m(&[((0.0, 0.0), 2.0 * PI), ((0.0, 0.0), -2.0 * PI)]);
        assert!(mu.is_empty());
    }

    #[test]
    fn singular_set_threshold_inclusive() {
        let mu = m(&[((0.0, 0.0), 3.0 * PI), ((1.0, 0.0), PI)]);
        let s = mu.singular_set(2.0 * PI).unwrap();
        assert_eq!(s.points, vec![Complex64::new(0.0, 0.0)]);
        let edge = m(&[((0.0, 0.0), 2.0 * PI)]).s2pi();
        assert!(edge.contains(Complex64::new(0.0, 0.0)));
        assert!(mu.singular_set(0.0).is_err());
        assert!(mu.singular_set(-1.0).is_err());
    }

    #[test]
    fn cusp_detection_is_strict() {
        assert!(m(&[((0.0, 0.0), 4.0 * PI * 0.5)]).assert_no_cusps());
        assert!(!m(&[((0.0, 0.0), 4.0 * PI)]).assert_no_cusps());
        // Example 3, chart at infinity: log coefficient −9/2 ⇒ ω-mass 9π.
        let ex3 = m(&[((0.0, 0.0), 9.0 * PI)]);
        assert!(!ex3.assert_no_cusps());
        assert!(ex3.singular_set(9.0 * PI).unwrap().contains(Complex64::new(0.0, 0.0)));
        assert!(matches!(ex3.require_no_cusps(""), Err(Error::Cusp { .. })));
    }

    #[test]
    fn critical_exponents() {
        let x = Complex64::new(0.3, -0.2);
        // e^{f₊} ~ |z−x|^{−β/2π}: ∫ r^{−pβ/2π} r dr converges iff pβ/2π < 2.
        assert!((m(&[((0.3, -0.2), 2.0 * PI)]).critical_exponent(x) - 2.0).abs() < 1e-15);
        assert!((m(&[((0.3, -0.2), PI)]).critical_exponent(x) - 4.0).abs() < 1e-15);
        assert!(m(&[((0.3, -0.2), PI)])
            .critical_exponent(Complex64::new(0.0, 0.0))
            .is_infinite());
        assert!(m(&[((0.3, -0.2), -PI)]).critical_exponent(x).is_infinite());
    }

    #[test]
    fn log_potential_kernel() {
        let mu = m(&[((0.0, 0.0), 4.0 * PI)]);
        let z = Complex64::new(0.5, 0.0);
        // (4π/2π)·log(1/0.5) = 2 log 2
        assert!((mu.log_potential(z) - 2.0 * 2f64.ln()).abs() < 1e-15);
    }
}
