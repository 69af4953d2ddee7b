//! JSON run configuration and its translation into library objects.

use liouville_iso::domain::Curve;
use liouville_iso::metric::RegularPart;
use liouville_iso::poly::{BivariatePoly, HarmonicPoly};
use liouville_iso::{Density, Domain, Measure, Metric, Point64 as P};
use serde::Deserialize;
use std::path::PathBuf;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub metric: MetricBlock,
    pub domain: DomainBlock,
    /// Replaces the curvature density derived from the metric.
    #[serde(default)]
    pub density: Option<DensityBlock>,
    pub checks: Vec<CheckSpec>,
    #[serde(default)]
    pub output: OutputBlock,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    pub dir: Option<PathBuf>,
    #[serde(default = "default_report")]
    pub report: String,
}

fn default_report() -> String {
    "report.json".into()
}

impl Default for OutputBlock {
    fn default() -> Self {
        Self {
            dir: None,
            report: default_report(),
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomSpec {
    pub x: f64,
    pub y: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Term {
    pub i: u32,
    pub j: u32,
    pub c: f64,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MetricBlock {
    Flat,
    Cone {
        k0: f64,
        alpha: f64,
        tau0: f64,
    },
    Example1 {
        a: f64,
    },
    Example2 {
        alpha1: f64,
        alpha2: f64,
    },
    Example3Chart1,
    Example3Chart2,
    /// `ρ = Re Σ aₖzᵏ + Σ(βᵢ/2π)log(1/|z − pᵢ|) + u` with polynomial `u`.
    Potential {
        #[serde(default)]
        harmonic: Vec<[f64; 2]>,
        #[serde(default)]
        atoms: Vec<AtomSpec>,
        #[serde(default)]
        regular: Vec<Term>,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CurveBlock {
    Circle { center: [f64; 2], radius: f64 },
    Polygon { vertices: Vec<[f64; 2]> },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainBlock {
    Disk {
        #[serde(default)]
        center: [f64; 2],
        radius: f64,
        #[serde(default)]
        holes: Vec<CurveBlock>,
    },
    Annulus {
        #[serde(default)]
        center: [f64; 2],
        inner: f64,
        outer: f64,
    },
    Polygon {
        vertices: Vec<[f64; 2]>,
        #[serde(default)]
        holes: Vec<CurveBlock>,
    },
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DensityBlock {
    Constant {
        value: f64,
    },
    RadialSteps {
        #[serde(default)]
        center: [f64; 2],
        breaks: Vec<f64>,
        values: Vec<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expect {
    Bounded,
    Divergent,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CheckSpec {
    Huber {
        tol: Option<f64>,
    },
    HuberRegular {
        /// Simply connected `E ⊇ U`; defaults to `U` with its holes filled.
        outer: Option<DomainBlock>,
        tol: Option<f64>,
    },
    Alexandrov {
        k0: f64,
        tol: Option<f64>,
    },
    AlexandrovRegular {
        k0: f64,
        tol: Option<f64>,
    },
    Bol {
        tol: Option<f64>,
    },
    SharpFit {
        k0: f64,
        #[serde(default = "default_samples")]
        samples: usize,
        expect_sharp: Option<bool>,
        tol: Option<f64>,
    },
    Rearrange {
        k0: f64,
        alpha: f64,
        /// Weight `C`; defaults to a strictly subcritical value.
        c: Option<f64>,
        #[serde(default = "default_grid_points")]
        grid_points: usize,
        #[serde(default = "default_levels")]
        levels: usize,
        tol: Option<f64>,
    },
    GaussBonnet {
        #[serde(default = "default_r0")]
        r0: f64,
        tol: Option<f64>,
    },
    Decompose,
    LpProbe {
        p: f64,
        #[serde(default)]
        center: [f64; 2],
        #[serde(default = "default_probe_r0")]
        r0: f64,
        #[serde(default = "default_k_max")]
        k_max: usize,
        expect: Option<Expect>,
    },
}

fn default_samples() -> usize {
    64
}
fn default_grid_points() -> usize {
    liouville_iso::rearrange::DEFAULT_GRID_POINTS
}
fn default_levels() -> usize {
    201
}
fn default_r0() -> f64 {
    4.0
}
fn default_probe_r0() -> f64 {
    1.0
}
fn default_k_max() -> usize {
    20
}

impl CheckSpec {
    pub fn name(&self) -> &'static str {
        match self {
            CheckSpec::Huber { .. } => "huber",
            CheckSpec::HuberRegular { .. } => "huber_regular",
            CheckSpec::Alexandrov { .. } => "alexandrov",
            CheckSpec::AlexandrovRegular { .. } => "alexandrov_regular",
            CheckSpec::Bol { .. } => "bol",
            CheckSpec::SharpFit { .. } => "sharp_fit",
            CheckSpec::Rearrange { .. } => "rearrange",
            CheckSpec::GaussBonnet { .. } => "gauss_bonnet",
            CheckSpec::Decompose => "decompose",
            CheckSpec::LpProbe { .. } => "lp_probe",
        }
    }

    fn validate(&self, at: &str) -> Result<(), String> {
        let nonneg = |name: &str, v: f64| {
            if v >= 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(format!("{at}.{name}: must be a finite number ≥ 0, got {v}"))
            }
        };
        let tol = |t: &Option<f64>| match t {
            Some(t) if !(*t > 0.0 && t.is_finite()) => Err(format!("{at}.tol: must be positive, got {t}")),
            _ => Ok(()),
        };
        match self {
            CheckSpec::Huber { tol: t } | CheckSpec::Bol { tol: t } => tol(t),
            CheckSpec::HuberRegular { outer, tol: t } => {
                if let Some(o) = outer {
                    o.build().map_err(|e| format!("{at}.outer: {e}"))?;
                }
                tol(t)
            }
            CheckSpec::Alexandrov { k0, tol: t } | CheckSpec::AlexandrovRegular { k0, tol: t } => {
                nonneg("k0", *k0)?;
                tol(t)
            }
            CheckSpec::SharpFit { k0, samples, tol: t, .. } => {
                nonneg("k0", *k0)?;
                if *samples < 8 {
                    return Err(format!("{at}.samples: need at least 8, got {samples}"));
                }
                tol(t)
            }
            CheckSpec::Rearrange { k0, alpha, c, grid_points, levels, tol: t } => {
                nonneg("k0", *k0)?;
                if !(*alpha < 1.0) {
                    return Err(format!("{at}.alpha: must be < 1, got {alpha}"));
                }
                if let Some(c) = c {
                    if !(*c > 0.0) {
                        return Err(format!("{at}.c: must be positive, got {c}"));
                    }
                }
                if *grid_points < 3 || *levels < 2 {
                    return Err(format!("{at}: grid_points ≥ 3 and levels ≥ 2 required"));
                }
                tol(t)
            }
            CheckSpec::GaussBonnet { r0, tol: t } => {
                if !(*r0 > 1.0) {
                    return Err(format!("{at}.r0: must exceed 1, got {r0}"));
                }
                tol(t)
            }
            CheckSpec::Decompose => Ok(()),
            CheckSpec::LpProbe { p, r0, k_max, .. } => {
                if !(*p >= 1.0) {
                    return Err(format!("{at}.p: must be ≥ 1, got {p}"));
                }
                if !(*r0 > 0.0) || *k_max < 2 {
                    return Err(format!("{at}: r0 > 0 and k_max ≥ 2 required"));
                }
                Ok(())
            }
        }
    }
}

fn pt([x, y]: [f64; 2]) -> P {
    P::new(x, y)
}

impl CurveBlock {
    fn build(&self) -> Curve<f64> {
        match self {
            CurveBlock::Circle { center, radius } => Curve::circle(pt(*center), *radius),
            CurveBlock::Polygon { vertices } => Curve::Polygon(vertices.iter().copied().map(pt).collect()),
        }
    }
}

impl DomainBlock {
    pub fn build(&self) -> liouville_iso::Result<Domain> {
        let (mut d, holes) = match self {
            DomainBlock::Disk { center, radius, holes } => (Domain::disk(pt(*center), *radius)?, holes.as_slice()),
            DomainBlock::Annulus { center, inner, outer } => {
                return Domain::annulus(pt(*center), *inner, *outer);
            }
            DomainBlock::Polygon { vertices, holes } => (
                Domain::polygon(vertices.iter().copied().map(pt).collect())?,
                holes.as_slice(),
            ),
        };
        for h in holes {
            d = d.with_hole(h.build())?;
        }
        Ok(d)
    }
}

impl MetricBlock {
    pub fn build(&self) -> liouville_iso::Result<Metric> {
        Ok(match self {
            MetricBlock::Flat => Metric::flat(),
            MetricBlock::Cone { k0, alpha, tau0 } => Metric::spherical_cone(*k0, *alpha, *tau0)?,
            MetricBlock::Example1 { a } => Metric::example1(*a)?,
            MetricBlock::Example2 { alpha1, alpha2 } => Metric::example2(*alpha1, *alpha2)?,
            MetricBlock::Example3Chart1 => Metric::example3_chart1(),
            MetricBlock::Example3Chart2 => Metric::example3_chart2(),
            MetricBlock::Potential { harmonic, atoms, regular } => {
                let coeffs: Vec<(f64, f64)> = harmonic.iter().map(|[a, b]| (*a, *b)).collect();
                let atoms = Measure::new(atoms.iter().map(|a| (P::new(a.x, a.y), a.weight)));
                let u = if regular.is_empty() {
                    RegularPart::Zero
                } else {
                    RegularPart::Polynomial(BivariatePoly::new(regular.iter().map(|t| ((t.i, t.j), t.c))))
                };
                Metric::potential(HarmonicPoly::from_complex_coefficients(&coeffs), atoms, u)
            }
        })
    }
}

impl DensityBlock {
    pub fn build(&self) -> liouville_iso::Result<Density> {
        match self {
            DensityBlock::Constant { value } => Ok(Density::Constant(*value)),
            DensityBlock::RadialSteps { center, breaks, values } => {
                Density::radial_steps(pt(*center), breaks.clone(), values.clone())
            }
        }
    }
}

/// A configuration whose library objects have been constructed.
pub struct Prepared {
    pub metric: Metric,
    pub domain: Domain,
    pub density: Option<Density>,
    pub checks: Vec<CheckSpec>,
    pub output: OutputBlock,
}

/// Parses and validates; errors carry the offending location.
pub fn load(text: &str) -> Result<Prepared, String> {
    let cfg: RunConfig = serde_json::from_str(text).map_err(|e| format!("config: {e}"))?;
    let metric = cfg.metric.build().map_err(|e| format!("metric: {e}"))?;
    let domain = cfg.domain.build().map_err(|e| format!("domain: {e}"))?;
    let density = cfg
        .density
        .as_ref()
        .map(|d| d.build())
        .transpose()
        .map_err(|e| format!("density: {e}"))?;
    if cfg.checks.is_empty() {
        return Err("checks: at least one check is required".into());
    }
    for (i, c) in cfg.checks.iter().enumerate() {
        c.validate(&format!("checks[{i}]"))?;
    }
    Ok(Prepared {
        metric,
        domain,
        density,
        checks: cfg.checks,
        output: cfg.output,
    })
}
