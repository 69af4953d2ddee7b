//! Radial level-set rearrangement on the unit disk.
//!
//! The weight is `e^ψ = C r^{−2α}` and `η` solves
//! `−Δη = 2K₀ e^ψ e^η` on `B₁` with `η = 0` on the boundary. With
//! `τ = r^β`, `β = 1 − α`, the problem becomes the flat radial Liouville
//! equation `(τη′)′/τ = −λ e^η`, `λ = 2K₀C/β²`, solved here by shooting on
//! `η(0)`.

use crate::error::{to_f64, Error, Result};
use crate::measure::SignedAtomicMeasure;
use crate::quad::{self, Tolerance};
use crate::scalar::{pt, Real};

/// RK4 steps on `τ ∈ [0, 1]`.
pub const DEFAULT_STEPS: usize = 4000;
/// Upper end of the bracket for `η(0)`.
pub const SHOOTING_BRACKET: f64 = 20.0;
/// Points in [`default_s_grid`].
pub const DEFAULT_GRID_POINTS: usize = 2001;

/// `η` sampled on a uniform grid in `τ = r^β`, interpolated by cubic Hermite.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile<T> {
    pub alpha: T,
    pub c: T,
    pub k0: T,
    /// `η(0)`, the top level.
    pub t_plus: T,
    knots: Vec<T>,
    eta: Vec<T>,
    slope: Vec<T>,
}

fn check_params<T: Real>(k0: T, alpha: T, c: T) -> Result<()> {
    if !(k0 >= T::zero() && k0.is_finite()) {
        return Err(Error::InvalidParameter(format!("K₀ must be ≥ 0, got {}", to_f64(k0))));
    }
    if !(alpha < T::one() && alpha.is_finite()) {
        return Err(Error::InvalidParameter(format!("α must be < 1, got {}", to_f64(alpha))));
    }
    if !(c > T::zero() && c.is_finite()) {
        return Err(Error::InvalidParameter(format!("C must be > 0, got {}", to_f64(c))));
    }
    Ok(())
}

/// Smallest `τ₀ > 0` with `τ₀ = 1 + K₀Cτ₀²/(4β²)`; none past the critical
/// value `K₀C = β²`.
pub fn cone_tau0<T: Real>(k0: T, alpha: T, c: T) -> Result<T> {
    check_params(k0, alpha, c)?;
    let beta = T::one() - alpha;
    let k = k0 * c / (T::lit(4.0) * beta * beta);
    let disc = T::one() - T::lit(4.0) * k;
    if disc < -T::lit(1e-12) {
        return Err(Error::InvalidParameter(format!(
            "K₀C = {} exceeds (1−α)² = {}: no radial solution",
            to_f64(k0 * c),
            to_f64(beta * beta)
        )));
    }
    Ok(T::lit(2.0) / (T::one() + disc.max(T::zero()).sqrt()))
}

/// `log(τ₀²/(1 + K₀Cτ₀²r^{2β}/(4β²))²)`.
pub fn cone_eta<T: Real>(k0: T, alpha: T, c: T, r: T) -> Result<T> {
    let tau0 = cone_tau0(k0, alpha, c)?;
    let beta = T::one() - alpha;
    let k = k0 * c / (T::lit(4.0) * beta * beta);
    let two = T::lit(2.0);
    Ok(two * tau0.ln() - two * (T::one() + k * tau0 * tau0 * r.powf(two * beta)).ln())
}

#[derive(Clone, Copy)]
struct State<T> {
    eta: T,
    p: T,
    w: T,
    q: T,
}

impl<T: Real> State<T> {
    fn axpy(self, h: T, d: State<T>) -> Self {
        State {
            eta: self.eta + h * d.eta,
            p: self.p + h * d.p,
            w: self.w + h * d.w,
            q: self.q + h * d.q,
        }
    }
}

fn field<T: Real>(lambda: T, t: T, s: State<T>) -> State<T> {
    let e = lambda * t * s.eta.exp();
    State {
        eta: s.p / t,
        p: -e,
        w: s.q / t,
        q: -e * s.w,
    }
}

struct Shot<T> {
    eta1: T,
    w1: T,
    path: Vec<(T, T)>,
}

/// Integrates from `η(0) = eta0`; `p = τη′`, `w = ∂η/∂η(0)`.
fn shoot<T: Real>(lambda: T, eta0: T, n: usize, record: bool) -> Shot<T> {
    let h = T::one() / T::lit(n as f64);
    let a = lambda * eta0.exp() / T::lit(8.0);
    let (ah2, a2h4) = (a * h * h, a * a * h * h * h * h);
    let two = T::lit(2.0);
    let four = T::lit(4.0);
    let mut s = State {
        eta: eta0 - two * ah2 + a2h4,
        p: -four * ah2 + four * a2h4,
        w: T::one() - two * ah2 + two * a2h4,
        q: -four * ah2 + T::lit(8.0) * a2h4,
    };
    let mut path = Vec::new();
    if record {
        path.reserve(n + 1);
        path.push((eta0, T::zero()));
        path.push((s.eta, s.p));
    }
    let half = T::lit(0.5);
    for i in 1..n {
        let t = T::lit(i as f64) * h;
        let k1 = field(lambda, t, s);
        let k2 = field(lambda, t + half * h, s.axpy(half * h, k1));
        let k3 = field(lambda, t + half * h, s.axpy(half * h, k2));
        let k4 = field(lambda, t + h, s.axpy(h, k3));
        s = State {
            eta: s.eta + h / T::lit(6.0) * (k1.eta + two * k2.eta + two * k3.eta + k4.eta),
            p: s.p + h / T::lit(6.0) * (k1.p + two * k2.p + two * k3.p + k4.p),
            w: s.w + h / T::lit(6.0) * (k1.w + two * k2.w + two * k3.w + k4.w),
            q: s.q + h / T::lit(6.0) * (k1.q + two * k2.q + two * k3.q + k4.q),
        };
        if record {
            path.push((s.eta, s.p));
        }
    }
    Shot {
        eta1: s.eta,
        w1: s.w,
        path,
    }
}

fn converged<T: Real>(lo: T, hi: T) -> bool {
    hi - lo <= T::epsilon() * T::lit(4.0) * hi.abs().max(T::one())
}

/// Minimal solution of the radial Dirichlet problem, by shooting.
pub fn solve_radial_liouville<T: Real>(k0: T, alpha: T, c: T) -> Result<RadialProfile<T>> {
    solve_radial_liouville_with(k0, alpha, c, DEFAULT_STEPS)
}

pub fn solve_radial_liouville_with<T: Real>(
    k0: T,
    alpha: T,
    c: T,
    steps: usize,
) -> Result<RadialProfile<T>> {
    check_params(k0, alpha, c)?;
    if steps < 2 {
        return Err(Error::InvalidParameter("need at least two steps".into()));
    }
    let beta = T::one() - alpha;
    let lambda = T::lit(2.0) * k0 * c / (beta * beta);
    let eta0 = if lambda == T::zero() {
        T::zero()
    } else {
        // Fold: where ∂η(1)/∂η(0) changes sign.
        let mut lo = T::zero();
        let mut hi = T::lit(SHOOTING_BRACKET);
        if !(shoot(lambda, lo, steps, false).w1 > T::zero()) {
            return Err(Error::Shooting(format!(
                "η(1) already decreasing in η(0) at η(0) = 0 (λ = {})",
                to_f64(lambda)
            )));
        }
        if shoot(lambda, hi, steps, false).w1 > T::zero() {
            lo = hi;
        } else {
            for _ in 0..200 {
                let mid = (lo + hi) * T::lit(0.5);
                if shoot(lambda, mid, steps, false).w1 > T::zero() {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if converged(lo, hi) {
                    break;
                }
            }
        }
        let fold = lo;
        let top = shoot(lambda, fold, steps, false).eta1;
        if top < -T::lit(1e-10) {
            return Err(Error::Shooting(format!(
                "no root in [0, {}]: max η(1) = {} at η(0) = {}; K₀C = {} vs (1−α)² = {}",
                SHOOTING_BRACKET,
                to_f64(top),
                to_f64(fold),
                to_f64(k0 * c),
                to_f64(beta * beta)
            )));
        }
        // A tangential maximum is the critical case; the root is the fold.
        if top <= T::lit(1e-10) {
            fold
        } else {
            let (mut lo, mut hi) = (T::zero(), fold);
            for _ in 0..200 {
                let mid = (lo + hi) * T::lit(0.5);
                if shoot(lambda, mid, steps, false).eta1 < T::zero() {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if converged(lo, hi) {
                    break;
                }
            }
            (lo + hi) * T::lit(0.5)
        }
    };
    let path = if lambda == T::zero() {
        vec![(T::zero(), T::zero()); steps + 1]
    } else {
        shoot(lambda, eta0, steps, true).path
    };
    let h = T::one() / T::lit(steps as f64);
    let knots: Vec<T> = (0..=steps).map(|i| T::lit(i as f64) * h).collect();
    let slope = knots
        .iter()
        .zip(&path)
        .map(|(t, (_, p))| if *t == T::zero() { T::zero() } else { *p / *t })
        .collect();
    let mut eta: Vec<T> = path.into_iter().map(|(e, _)| e).collect();
    // The boundary condition is exact by construction; snap the last sample.
    let last = eta.len() - 1;
    if eta[last].abs() < T::lit(1e-8) {
        eta[last] = T::zero();
    }
    Ok(RadialProfile {
        alpha,
        c,
        k0,
        t_plus: eta0,
        knots,
        eta,
        slope,
    })
}

impl<T: Real> RadialProfile<T> {
    pub fn beta(&self) -> T {
        T::one() - self.alpha
    }

    /// `(r, η(r))` at the solver's nodes.
    pub fn nodes(&self) -> impl Iterator<Item = (T, T)> + '_ {
        let inv = T::one() / self.beta();
        self.knots.iter().zip(&self.eta).map(move |(t, e)| (t.powf(inv), *e))
    }

    /// `η` in the variable `τ = r^β`.
    fn eval_tau(&self, tau: T) -> T {
        let n = self.knots.len() - 1;
        let h = self.knots[1] - self.knots[0];
        let x = (tau / h).max(T::zero());
        let i = x.floor().to_usize().unwrap_or(0).min(n - 1);
        let u = x - T::lit(i as f64);
        let (y0, y1) = (self.eta[i], self.eta[i + 1]);
        let (m0, m1) = (self.slope[i] * h, self.slope[i + 1] * h);
        let u2 = u * u;
        let u3 = u2 * u;
        let two = T::lit(2.0);
        let three = T::lit(3.0);
        (two * u3 - three * u2 + T::one()) * y0
            + (u3 - two * u2 + u) * m0
            + (three * u2 - two * u3) * y1
            + (u3 - u2) * m1
    }

    pub fn eta_at(&self, r: T) -> Result<T> {
        if !(r >= T::zero() && r <= T::one()) {
            return Err(Error::InvalidParameter(format!("r = {} outside [0, 1]", to_f64(r))));
        }
        Ok(self.eval_tau(r.powf(self.beta())))
    }

    /// `τ = r^β` of the level circle `{η = t}`.
    fn level_tau(&self, t: T) -> Result<T> {
        let slack = T::lit(1e-12) * self.t_plus.abs().max(T::one());
        if !(t >= -slack && t <= self.t_plus + slack) {
            return Err(Error::InvalidParameter(format!(
                "level {} outside [0, {}]",
                to_f64(t),
                to_f64(self.t_plus)
            )));
        }
        if t <= T::zero() {
            return Ok(T::one());
        }
        if t >= self.t_plus {
            return Ok(T::zero());
        }
        // η is decreasing along the knots.
        let j = self.eta.partition_point(|e| *e > t);
        let (mut lo, mut hi) = (self.knots[j.saturating_sub(1)], self.knots[j.min(self.knots.len() - 1)]);
        for _ in 0..200 {
            let mid = (lo + hi) * T::lit(0.5);
            if self.eval_tau(mid) > t {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= T::epsilon() * T::lit(2.0) {
                break;
            }
        }
        Ok((lo + hi) * T::lit(0.5))
    }

    /// Radius of the level circle `{η = t}`.
    pub fn level_radius(&self, t: T) -> Result<T> {
        Ok(self.level_tau(t)?.powf(T::one() / self.beta()))
    }

    /// `dτ`-area of `B₁`: `πC/(1−α)`.
    pub fn mu0(&self) -> T {
        T::PI() * self.c / self.beta()
    }

    /// The profile `factor·η` on the same weight.
    pub fn scaled(&self, factor: T) -> Self {
        Self {
            t_plus: self.t_plus * factor,
            eta: self.eta.iter().map(|e| *e * factor).collect(),
            slope: self.slope.iter().map(|e| *e * factor).collect(),
            ..self.clone()
        }
    }
}

/// `μ(t) = πC r(t)^{2β}/β` on a grid of levels.
pub fn distribution<T: Real>(p: &RadialProfile<T>, t_grid: &[T]) -> Result<Vec<T>> {
    let scale = T::PI() * p.c / p.beta();
    t_grid
        .iter()
        .map(|t| {
            let tau = p.level_tau(*t)?;
            Ok(scale * tau * tau)
        })
        .collect()
}

/// Chebyshev–Lobatto points on `[0, μ₀]`, clustered at both ends.
pub fn default_s_grid<T: Real>(mu0: T, n: usize) -> Vec<T> {
    let n = n.max(2);
    let half = T::lit(0.5);
    let mut g: Vec<T> = (0..n)
        .map(|k| {
            let th = T::PI() * T::lit(k as f64) / T::lit((n - 1) as f64);
            mu0 * half * (T::one() - th.cos())
        })
        .collect();
    g[0] = T::zero();
    g[n - 1] = mu0;
    g
}

#[derive(Debug, Clone, PartialEq)]
pub struct RearrangementData<T> {
    pub alpha: T,
    pub c: T,
    pub k0: T,
    pub s_grid: Vec<T>,
    pub eta_star: Vec<T>,
    pub mu0: T,
    pub f: Vec<T>,
    /// `2K₀e^{η*}`.
    pub f_prime: Vec<T>,
    pub p_plus: Vec<T>,
    /// `2π − 𝒦₊(B₁;K₀)`.
    pub gamma: T,
    /// `M(B₁) = ∫ e^η dτ`.
    pub mass: T,
    /// Squared `dσ`-length of `∂B₁`.
    pub boundary_length_sq: T,
}

/// `η*`, `F` and `P₊` on `s_grid ⊂ [0, μ(0)]`.
pub fn rearrangement<T: Real>(p: &RadialProfile<T>, s_grid: &[T]) -> Result<RearrangementData<T>> {
    let mu0 = p.mu0();
    let slack = T::lit(1e-12) * mu0;
    if s_grid.is_empty() {
        return Err(Error::InvalidParameter("empty s grid".into()));
    }
    for w in s_grid.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::InvalidParameter("s grid must be increasing".into()));
        }
    }
    if !(s_grid[0] >= -slack && s_grid[s_grid.len() - 1] <= mu0 + slack) {
        return Err(Error::InvalidParameter(format!("s grid outside [0, {}]", to_f64(mu0))));
    }
    let beta = p.beta();
    let two = T::lit(2.0);
    let tau_of = |s: T| (s.max(T::zero()) / mu0).sqrt().min(T::one());
    let eta_star: Vec<T> = s_grid.iter().map(|s| p.eval_tau(tau_of(*s))).collect();

    // ∫ e^{η*} dλ = (2πC/β) ∫ e^{η(τ)} τ dτ
    let jac = two * T::PI() * p.c / beta;
    let tol = Tolerance::new(T::lit(1e-13));
    let piece = |a: T, b: T| -> Result<T> {
        if b <= a {
            return Ok(T::zero());
        }
        Ok(jac * quad::integrate(|t| Ok(p.eval_tau(t).exp() * t), a, b, &tol)?.value)
    };
    let mut cumulative = Vec::with_capacity(s_grid.len());
    let mut acc = piece(T::zero(), tau_of(s_grid[0]))?;
    cumulative.push(acc);
    for w in s_grid.windows(2) {
        acc = acc + piece(tau_of(w[0]), tau_of(w[1]))?;
        cumulative.push(acc);
    }
    let mass = acc + piece(tau_of(s_grid[s_grid.len() - 1]), T::one())?;

    let gamma = T::two_pi()
        - SignedAtomicMeasure::single(pt(T::zero(), T::zero()), T::four_pi() * p.alpha)
            .positive_part()
            .total_mass()
            * T::lit(0.5);
    let f: Vec<T> = cumulative.iter().map(|v| two * p.k0 * *v).collect();
    let f_prime: Vec<T> = eta_star.iter().map(|e| two * p.k0 * e.exp()).collect();
    let p_plus = s_grid
        .iter()
        .zip(&f)
        .zip(&f_prime)
        .map(|((s, f), fp)| two * gamma * *s * *fp - two * gamma * *f + *f * *f * T::lit(0.5))
        .collect();
    Ok(RearrangementData {
        alpha: p.alpha,
        c: p.c,
        k0: p.k0,
        s_grid: s_grid.to_vec(),
        eta_star,
        mu0,
        f,
        f_prime,
        p_plus,
        gamma,
        mass,
        boundary_length_sq: T::lit(4.0) * T::PI() * T::PI() * p.c,
    })
}

/// Outcome of one inequality in the chain; `worst_margin` is the smallest
/// `lhs − rhs` seen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainCheck<T> {
    pub pass: bool,
    pub worst_margin: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LipschitzEstimate<T> {
    pub a: T,
    pub b: T,
    /// Largest `|η*(sᵢ) − η*(sⱼ)|/|sᵢ − sⱼ|` over neighbouring grid points in `[a, b]`.
    pub constant: T,
    pub finite: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainVerdict<T> {
    /// `(∫_{Γ(η*(s))} dσ)² ≥ 2γs`.
    pub huber: ChainCheck<T>,
    /// `P₊` non-decreasing.
    pub monotone: ChainCheck<T>,
    /// `L²(∂E) ≥ 2γμ(0)`.
    pub length: ChainCheck<T>,
    /// `2γμ(0) ≥ (2γ − K₀M)M`.
    pub area: ChainCheck<T>,
    /// `L² − (2γ − K₀M)M`.
    pub chain_margin: T,
    pub lipschitz: LipschitzEstimate<T>,
}

impl<T: Real> ChainVerdict<T> {
    pub fn all_pass(&self) -> bool {
        self.huber.pass && self.monotone.pass && self.length.pass && self.area.pass && self.lipschitz.finite
    }
}

/// Difference-quotient bound for `η*` on `[a, b]`.
pub fn lipschitz_constant<T: Real>(d: &RearrangementData<T>, a: T, b: T) -> LipschitzEstimate<T> {
    let mut constant = T::zero();
    for i in 0..d.s_grid.len().saturating_sub(1) {
        let (s0, s1) = (d.s_grid[i], d.s_grid[i + 1]);
        if s0 >= a && s1 <= b {
            constant = constant.max((d.eta_star[i] - d.eta_star[i + 1]).abs() / (s1 - s0));
        }
    }
    LipschitzEstimate {
        a,
        b,
        constant,
        finite: constant.is_finite(),
    }
}

pub fn verify_chain<T: Real>(d: &RearrangementData<T>, tol: T) -> ChainVerdict<T> {
    let two = T::lit(2.0);
    let one = T::one();
    let mut huber = T::infinity();
    let mut huber_ok = true;
    for s in &d.s_grid {
        // Γ(η*(s)) is the circle with dτ-area s; its dσ-length is 2π√C·r^β.
        let len_sq = T::lit(4.0) * T::PI() * T::PI() * d.c * (*s / d.mu0).max(T::zero());
        let rhs = two * d.gamma * *s;
        let m = len_sq - rhs;
        huber = huber.min(m);
        huber_ok &= m >= -tol * rhs.abs().max(one);
    }
    let f_end = *d.f.last().unwrap_or(&T::zero());
    let mut mono = T::infinity();
    for w in d.p_plus.windows(2) {
        mono = mono.min(w[1] - w[0]);
    }
    let mono_scale = f_end * f_end;
    let l2 = d.boundary_length_sq;
    let top = two * d.gamma * d.mu0;
    let bottom = (two * d.gamma - d.k0 * d.mass) * d.mass;
    ChainVerdict {
        huber: ChainCheck {
            pass: huber_ok,
            worst_margin: huber,
        },
        monotone: ChainCheck {
            pass: !(mono < -tol * mono_scale.max(one)),
            worst_margin: mono,
        },
        length: ChainCheck {
            pass: l2 - top >= -tol * l2.max(one),
            worst_margin: l2 - top,
        },
        area: ChainCheck {
            pass: top - bottom >= -tol * top.abs().max(one),
            worst_margin: top - bottom,
        },
        chain_margin: l2 - bottom,
        lipschitz: lipschitz_constant(d, d.mu0 * T::lit(0.1), d.mu0 * T::lit(0.9)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sup_error(p: &RadialProfile<f64>) -> f64 {
        p.nodes()
            .map(|(r, e)| (e - cone_eta(p.k0, p.alpha, p.c, r).unwrap()).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn critical_round_sphere() {
        let p = solve_radial_liouville(1.0, 0.0, 1.0).unwrap();
        assert!((p.t_plus - 4f64.ln()).abs() < 1e-8, "{}", p.t_plus);
        assert!(sup_error(&p) < 1e-8, "{}", sup_error(&p));
    }

    #[test]
    fn subcritical_matches_closed_form() {
        for &alpha in &[-0.5, 0.0, 0.5, 0.75] {
            let beta: f64 = 1.0 - alpha;
            let p = solve_radial_liouville(1.0, alpha, 0.75 * beta * beta).unwrap();
            assert!(sup_error(&p) < 1e-8, "α={alpha}: {}", sup_error(&p));
        }
    }

    #[test]
    fn zero_curvature_is_zero() {
        let p = solve_radial_liouville(0.0, 0.3, 2.0).unwrap();
        assert_eq!(p.t_plus, 0.0);
        assert!(p.nodes().all(|(_, e)| e == 0.0));
    }

    #[test]
    fn supercritical_reports_bracket() {
        let err = solve_radial_liouville(1.0, 0.5, 1.0).unwrap_err();
        assert!(matches!(err, Error::Shooting(_)), "{err}");
        assert!(cone_tau0(1.0, 0.5, 1.0).is_err());
    }

    #[test]
    fn distribution_endpoints() {
        let p = solve_radial_liouville(1.0, 0.25, 0.3).unwrap();
        let mu = distribution(&p, &[0.0, p.t_plus]).unwrap();
        assert!((mu[0] - std::f64::consts::PI * 0.3 / 0.75).abs() < 1e-14);
        assert_eq!(mu[1], 0.0);
        assert!(distribution(&p, &[p.t_plus + 1.0]).is_err());
    }
}
