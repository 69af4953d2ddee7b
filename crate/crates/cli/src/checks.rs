//! Execution of configured checks.

use crate::config::{CheckSpec, Expect, Prepared};
use crate::report::{CheckOutcome, Status, Table};
use liouville_iso::curvature::{gauss_bonnet_two_chart, total_curvature};
use liouville_iso::iso::{
    alexandrov_check, alexandrov_regular_check, bol_check, fit_sharp_metric, huber_check,
    huber_regular_check,
};
use liouville_iso::quad::{self, classify_growth, dyadic_radii, last_increment_ratio, last_term_ratio, Growth};
use liouville_iso::rearrange::{self, default_s_grid, distribution, rearrangement, solve_radial_liouville, verify_chain};
use liouville_iso::{corpus, Curvature, IsoReport, Measure, Point64 as P, Quad, Result, SharpFit};
use serde_json::{json, Value};
use std::f64::consts::PI;
use std::sync::OnceLock;

/// Shared state for one run: the prepared config and a lazily built curvature.
pub struct Context<'a> {
    pub cfg: &'a Prepared,
    pub tol: f64,
    curvature: OnceLock<Result<Curvature>>,
}

impl<'a> Context<'a> {
    pub fn new(cfg: &'a Prepared, tol: f64) -> Self {
        Self {
            cfg,
            tol,
            curvature: OnceLock::new(),
        }
    }

    fn curvature(&self) -> Result<&Curvature> {
        self.curvature
            .get_or_init(|| {
                let c = Curvature::of_metric(&self.cfg.metric)?;
                Ok(match &self.cfg.density {
                    Some(d) => c.with_density(d.clone()),
                    None => c,
                })
            })
            .as_ref()
            .map_err(Clone::clone)
    }
}

pub fn iso_json(r: &IsoReport) -> Value {
    json!({
        "lhs": r.lhs,
        "rhs": r.rhs,
        "deficit": r.deficit,
        "relative_deficit": r.relative_deficit(),
        "equality": r.equality,
        "vacuous": r.vacuous,
        "must_be_strict": r.must_be_strict,
        "inputs": {"l2": r.inputs.l2, "m": r.inputs.m, "k_plus": r.inputs.k_plus, "k0": r.inputs.k0},
        "tol": r.tol,
        "error_estimate": r.error_estimate,
        "converged": r.converged,
    })
}

pub fn iso_status(r: &IsoReport) -> Status {
    if r.vacuous {
        Status::Vacuous
    } else if r.passes() {
        Status::Pass
    } else {
        Status::Fail
    }
}

pub fn sharp_json(f: &SharpFit) -> Value {
    json!({
        "alpha": f.alpha,
        "tau": f.tau,
        "mobius": [f.mobius.re, f.mobius.im],
        "rotation": f.rotation,
        "residual": f.residual,
        "samples": f.samples,
        "sharp": f.sharp,
        "diagnostics": f.diagnostics.iter().map(|d| d.to_string()).collect::<Vec<_>>(),
    })
}

fn atoms_json(m: &Measure) -> Value {
    m.atoms()
        .iter()
        .map(|a| json!({"x": a.point.re, "y": a.point.im, "weight": a.weight}))
        .collect()
}

fn quad_json(q: &Quad) -> Value {
    json!({"value": q.value, "error_estimate": q.error_estimate, "cells_used": q.cells_used, "converged": q.converged})
}

fn growth_name(g: Growth) -> &'static str {
    match g {
        Growth::Bounded => "bounded",
        Growth::Divergent => "divergent",
    }
}

fn iso(index: usize, kind: &'static str, r: Result<IsoReport>) -> Result<CheckOutcome> {
    let r = r?;
    Ok(CheckOutcome::new(index, kind, iso_status(&r), iso_json(&r)))
}

pub fn run_check(ctx: &Context, index: usize, spec: &CheckSpec) -> CheckOutcome {
    let kind = spec.name();
    match dispatch(ctx, index, spec) {
        Ok(out) => out,
        Err(e) => CheckOutcome::from_error(index, kind, &e),
    }
}

fn dispatch(ctx: &Context, index: usize, spec: &CheckSpec) -> Result<CheckOutcome> {
    let (g, e) = (&ctx.cfg.metric, &ctx.cfg.domain);
    let tol = |t: &Option<f64>| t.unwrap_or(ctx.tol);
    let kind = spec.name();
    match spec {
        CheckSpec::Huber { tol: t } => iso(index, kind, huber_check(g, e, tol(t))),
        CheckSpec::HuberRegular { outer, tol: t } => {
            let outer = match outer {
                Some(o) => o.build()?,
                None => e.fill_holes(),
            };
            iso(index, kind, huber_regular_check(g, e, &outer, tol(t)))
        }
        CheckSpec::Alexandrov { k0, tol: t } => iso(index, kind, alexandrov_check(g, ctx.curvature()?, e, *k0, tol(t))),
        CheckSpec::AlexandrovRegular { k0, tol: t } => {
            iso(index, kind, alexandrov_regular_check(g, ctx.curvature()?, e, *k0, tol(t)))
        }
        CheckSpec::Bol { tol: t } => iso(index, kind, bol_check(g, ctx.curvature()?, e, tol(t))),
        CheckSpec::SharpFit { k0, samples, expect_sharp, tol: t } => {
            let fit = fit_sharp_metric(g, ctx.curvature()?, e, *k0, *samples, tol(t))?;
            let status = match expect_sharp {
                Some(want) if *want != fit.sharp => Status::Fail,
                _ => Status::Pass,
            };
            Ok(CheckOutcome::new(index, kind, status, sharp_json(&fit)))
        }
        CheckSpec::Rearrange { k0, alpha, c, grid_points, levels, tol: t } => {
            rearrange_check(index, *k0, *alpha, *c, *grid_points, *levels, tol(t))
        }
        CheckSpec::GaussBonnet { r0, tol: t } => {
            let gb = gauss_bonnet_two_chart(g, *r0)?;
            let ok = (gb.total - 4.0 * PI).abs() <= tol(t) * 4.0 * PI + gb.error_estimate;
            let details = json!({
                "total": gb.total,
                "expected": 4.0 * PI,
                "smooth": gb.smooth,
                "atoms": gb.atoms,
                "near_chart": quad_json(&gb.near_chart),
                "far_chart": quad_json(&gb.far_chart),
                "error_estimate": gb.error_estimate,
                "r0": r0,
            });
            Ok(CheckOutcome::new(index, kind, if ok { Status::Pass } else { Status::Fail }, details))
        }
        CheckSpec::Decompose => {
            let c = ctx.curvature()?;
            let k = total_curvature(c, g, e)?;
            let details = json!({
                "metric": g.kind_name(),
                "atoms": atoms_json(&c.potential.f_atoms),
                "k_s": c.singular_mass(e)?,
                "k_s_plus": c.positive_singular_mass(e)?,
                "total_curvature": k.value,
                "total_curvature_error": k.error_estimate,
                "cusp_free": c.potential.f_atoms.assert_no_cusps(),
            });
            Ok(CheckOutcome::new(index, kind, Status::Pass, details))
        }
        CheckSpec::LpProbe { p, center, r0, k_max, expect } => {
            let radii = dyadic_radii(*r0, *k_max);
            let sums = quad::lp_probe(&ctx.curvature()?.density, P::new(center[0], center[1]), *p, &radii)?;
            let growth = classify_growth(&sums);
            let status = match expect {
                Some(Expect::Bounded) if growth != Growth::Bounded => Status::Fail,
                Some(Expect::Divergent) if growth != Growth::Divergent => Status::Fail,
                _ => Status::Pass,
            };
            let details = json!({
                "p": p,
                "growth": growth_name(growth),
                "last_term_ratio": last_term_ratio(&sums),
                "last_increment_ratio": last_increment_ratio(&sums),
                "radii": &radii[1..],
                "sums": &sums,
            });
            let mut out = CheckOutcome::new(index, kind, status, details);
            out.tables.push(Table {
                name: "lp_probe",
                header: vec!["k", "epsilon", "sum"],
                rows: sums
                    .iter()
                    .enumerate()
                    .map(|(k, s)| vec![(k + 1) as f64, radii[k + 1], *s])
                    .collect(),
            });
            Ok(out)
        }
    }
}

fn rearrange_check(
    index: usize,
    k0: f64,
    alpha: f64,
    c: Option<f64>,
    grid_points: usize,
    levels: usize,
    tol: f64,
) -> Result<CheckOutcome> {
    let c = c.unwrap_or_else(|| corpus::rearrangement_weight(k0, alpha));
    let p = solve_radial_liouville(k0, alpha, c)?;
    let d = rearrangement(&p, &default_s_grid(p.mu0(), grid_points))?;
    let v = verify_chain(&d, tol);
    let sup_err = p
        .nodes()
        .map(|(r, e)| rearrange::cone_eta(k0, alpha, c, r).map(|x| (x - e).abs()))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let details = json!({
        "k0": k0,
        "alpha": alpha,
        "c": c,
        "t_plus": p.t_plus,
        "mu0": d.mu0,
        "gamma": d.gamma,
        "mass": d.mass,
        "boundary_length_sq": d.boundary_length_sq,
        "chain_rhs": (2.0 * d.gamma - k0 * d.mass) * d.mass,
        "chain_margin": v.chain_margin,
        "closed_form_sup_error": sup_err,
        "huber": {"pass": v.huber.pass, "worst_margin": v.huber.worst_margin},
        "monotone": {"pass": v.monotone.pass, "worst_margin": v.monotone.worst_margin},
        "length": {"pass": v.length.pass, "worst_margin": v.length.worst_margin},
        "area": {"pass": v.area.pass, "worst_margin": v.area.worst_margin},
        "lipschitz": {"a": v.lipschitz.a, "b": v.lipschitz.b, "constant": v.lipschitz.constant, "finite": v.lipschitz.finite},
    });
    let status = if v.all_pass() { Status::Pass } else { Status::Fail };
    let mut out = CheckOutcome::new(index, "rearrange", status, details);
    out.tables.push(Table {
        name: "rearrangement",
        header: vec!["s", "eta_star", "F", "P_plus"],
        rows: (0..d.s_grid.len())
            .map(|i| vec![d.s_grid[i], d.eta_star[i], d.f[i], d.p_plus[i]])
            .collect(),
    });
    let t: Vec<f64> = (0..levels)
        .map(|k| p.t_plus * k as f64 / (levels - 1) as f64)
        .collect();
    let mu = distribution(&p, &t)?;
    out.tables.push(Table {
        name: "distribution",
        header: vec!["t", "mu"],
        rows: t.iter().zip(&mu).map(|(t, m)| vec![*t, *m]).collect(),
    });
    Ok(out)
}
