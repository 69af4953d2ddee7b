//! Real bivariate polynomials and harmonic polynomials.

use crate::error::{Error, Result};
use crate::scalar::{Point, Real};

/// `Σ c·xⁱ·yʲ` with sparse terms.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BivariatePoly<T> {
    terms: Vec<((u32, u32), T)>,
}

impl<T: Real> BivariatePoly<T> {
    pub fn zero() -> Self {
        Self { terms: Vec::new() }
    }

    pub fn constant(c: T) -> Self {
        Self::new([((0, 0), c)])
    }

    /// Builds from `((i, j), c)` terms, merging repeated monomials.
    pub fn new<I>(terms: I) -> Self
    where
        I: IntoIterator<Item = ((u32, u32), T)>,
    {
        let mut merged: Vec<((u32, u32), T)> = Vec::new();
        for (m, c) in terms {
            match merged.iter_mut().find(|(k, _)| *k == m) {
                Some((_, v)) => *v = *v + c,
                None => merged.push((m, c)),
            }
        }
        merged.retain(|(_, c)| *c != T::zero());
        merged.sort_by_key(|(m, _)| *m);
        Self { terms: merged }
    }

    pub fn terms(&self) -> &[((u32, u32), T)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, z: Point<T>) -> T {
        self.terms
            .iter()
            .map(|&((i, j), c)| c * z.re.powi(i as i32) * z.im.powi(j as i32))
            .sum()
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(self.terms.iter().chain(other.terms.iter()).copied())
    }

    pub fn neg(&self) -> Self {
        Self::new(self.terms.iter().map(|&(m, c)| (m, -c)))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    /// Exact Laplacian on coefficients.
    pub fn laplacian(&self) -> Self {
        let mut out = Vec::new();
        for &((i, j), c) in &self.terms {
            if i >= 2 {
                out.push(((i - 2, j), c * T::lit((i * (i - 1)) as f64)));
            }
            if j >= 2 {
                out.push(((i, j - 2), c * T::lit((j * (j - 1)) as f64)));
            }
        }
        Self::new(out)
    }

    fn max_abs_coefficient(&self) -> T {
        self.terms
            .iter()
            .map(|(_, c)| c.abs())
            .fold(T::zero(), T::max)
    }
}

/// A polynomial with identically vanishing Laplacian.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct HarmonicPoly<T>(BivariatePoly<T>);

impl<T: Real> HarmonicPoly<T> {
    pub fn zero() -> Self {
        Self(BivariatePoly::zero())
    }

    pub fn constant(c: T) -> Self {
        Self(BivariatePoly::constant(c))
    }

    /// Accepts `p` if every coefficient of `Δp` is negligible relative to the
    /// largest coefficient of `p` (exact zero for integer-valued inputs).
    pub fn new(p: BivariatePoly<T>) -> Result<Self> {
        let lap = p.laplacian();
        let scale = p.max_abs_coefficient().max(T::one());
        let tol = T::epsilon() * T::lit(64.0) * scale;
        if lap.terms.iter().any(|(_, c)| c.abs() > tol) {
            return Err(Error::InvalidParameter(
                "harmonic part has non-zero Laplacian".into(),
            ));
        }
        Ok(Self(p))
    }

    /// `Re Σ aₖ zᵏ` for complex coefficients `aₖ = (re, im)`.
    pub fn from_complex_coefficients(coeffs: &[(T, T)]) -> Self {
        let mut terms = Vec::new();
        for (k, &(a, b)) in coeffs.iter().enumerate() {
            // zᵏ = Σ_m C(k,m) x^{k−m} (iy)^m
            let mut binom = 1.0f64;
            for m in 0..=k {
                let c = T::lit(binom);
                let (x_pow, y_pow) = ((k - m) as u32, m as u32);
                // i^m: real part from even m, imaginary part from odd m.
                match m % 4 {
                    0 => terms.push(((x_pow, y_pow), a * c)),
                    1 => terms.push(((x_pow, y_pow), -b * c)),
                    2 => terms.push(((x_pow, y_pow), -a * c)),
                    _ => terms.push(((x_pow, y_pow), b * c)),
                }
                binom = binom * (k - m) as f64 / (m + 1) as f64;
            }
        }
        Self(BivariatePoly::new(terms))
    }

    pub fn as_poly(&self) -> &BivariatePoly<T> {
        &self.0
    }

    pub fn eval(&self, z: Point<T>) -> T {
        self.0.eval(z)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(self.0.add(&other.0))
    }

    pub fn neg(&self) -> Self {
        Self(self.0.neg())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64 as C;

    #[test]
    fn laplacian_of_monomials() {
        // Δ(x²y³) = 2y³ + 6x²y
        let p = BivariatePoly::new([((2, 3), 1.0)]);
        assert_eq!(
            p.laplacian(),
            BivariatePoly::new([((0, 3), 2.0), ((2, 1), 6.0)])
        );
    }

    #[test]
    fn harmonic_check() {
        assert!(HarmonicPoly::new(BivariatePoly::new([((2, 0), 1.0), ((0, 2), -1.0)])).is_ok());
        assert!(HarmonicPoly::new(BivariatePoly::new([((2, 0), 1.0), ((0, 2), 1.0)])).is_err());
    }

    #[test]
    fn complex_coefficients_give_real_part() {
        let h = HarmonicPoly::from_complex_coefficients(&[(0.5, 0.0), (1.0, -2.0), (0.3, 0.7)]);
        assert!(HarmonicPoly::new(h.as_poly().clone()).is_ok());
        let z = C::new(0.4, -1.3);
        let expect = (C::new(0.5, 0.0) + C::new(1.0, -2.0) * z + C::new(0.3, 0.7) * z * z).re;
        assert!((h.eval(z) - expect).abs() < 1e-14);
    }
}
