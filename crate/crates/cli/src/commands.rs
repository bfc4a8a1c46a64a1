//! One function per command. Each returns whether its verification verdict
//! held; errors are reported by the caller.

use std::f64::consts::PI;

use fracmc::area::{area_limit_scan, classical_ps_oracle, kappa_analytic, per_s_estimate, Domain, Region};
use fracmc::curvature::{fmc_flux, FluxOptions};
use fracmc::flow::{audit, flow_run, FlowConfig, FlowState, InitialShape};
use fracmc::probes::{slide_ball, slide_hyperplane, Verdict};
use fracmc::shapes::{
    barrier_apex, barrier_constants, cone_2d_points, make_barrier, make_cone_2d, make_cone_nd, make_dented_disk, make_flat_disk,
    make_neck, project_to_surface, BarrierKind, BarrierMesh, BarrierSpec,
};
use fracmc::{build_polyline, fmc_estimate, pt2, Dim, Estimate, Hypersurface, Params, Point, QuadratureSpec};
use serde_json::{json, Value};

use crate::config::{ConfigError, Settings};
use crate::output::{csv_text, emit, header, json_text, num};

#[derive(Debug, thiserror::Error)]
pub enum Failure {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Lib(#[from] fracmc::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

type Outcome = Result<bool, Failure>;

pub fn run(st: &Settings) -> Outcome {
    match st.command() {
        "curvature" => curvature(st),
        "area" => area(st),
        "cone-scan" => cone_scan(st),
        "barrier-scan" => barrier_scan(st),
        "probe" => probe(st),
        "flow" => flow(st),
        "limit-scan" => limit_scan(st),
        c => unreachable!("settings exist only for known commands, got {c}"),
    }
}

fn coords(p: &Point, dim: Dim) -> Vec<f64> {
    p.iter().take(dim.n()).copied().collect()
}

fn estimate_json(e: &Estimate) -> Value {
    json!({
        "value": e.value, "std_error": e.std_error, "trunc_bound": e.trunc_bound,
        "half_width": e.half_width(), "lo": e.lo(), "hi": e.hi(), "n_eval": e.n_eval, "seed": e.seed,
    })
}

fn regular_polygon(n: usize, radius: f64) -> Vec<Point> {
    (0..n).map(|k| {
        let t = 2.0 * PI * k as f64 / n as f64;
        pt2(radius * t.cos(), radius * t.sin())
    }).collect()
}

fn params(st: &Settings, dim: Dim) -> Result<Params, Failure> {
    let s = st.f64("s")?;
    Params::new(dim, s).map_err(|e| st.bad("s", e.to_string()).into())
}

fn quadrature(st: &Settings, m: &Hypersurface, seed: u64) -> Result<QuadratureSpec, Failure> {
    let mut q = QuadratureSpec::for_surface(m, st.usize("n")?, seed);
    if st.str("r_near") != "auto" {
        q.r_near = st.f64("r_near")?;
    }
    if st.str("r_far") != "auto" {
        q.r_far = st.f64("r_far")?;
    }
    q.alpha_reg = st.f64("alpha_reg")?;
    Ok(q)
}

/// The surface named by `shape` (and its dimension).
fn shape(st: &Settings, s: f64) -> Result<(Hypersurface, Dim), Failure> {
    let name = st.choice("shape", &["flat2d", "flat3d", "segment", "circle", "cone2d", "cone3d", "barrier", "barrier-free", "dented2d", "dented3d", "neck"])?;
    let radius = st.f64("radius")?;
    let m = match name {
        "flat2d" | "segment" => (make_flat_disk(Dim::Two, radius, 0.0, st.usize("facets")?)?, Dim::Two),
        "flat3d" => (make_flat_disk(Dim::Three, radius, 0.0, st.usize("facets")?)?, Dim::Three),
        "circle" => (build_polyline(&regular_polygon(st.usize("facets")?, radius), true)?, Dim::Two),
        "cone2d" => (make_cone_2d(st.f64("d")?)?, Dim::Two),
        "cone3d" => (make_cone_nd(st.usize("n_az")?, st.usize("n_rad")?)?, Dim::Three),
        "barrier" | "barrier-free" => {
            let p = Params::new(Dim::Two, s)?;
            let spec = BarrierSpec::new(Dim::Two, st.f64("eps")?, &p)?;
            let kind = if name == "barrier" { BarrierKind::WithBump } else { BarrierKind::BumpFree };
            (make_barrier(&spec, kind, &BarrierMesh::default())?, Dim::Two)
        }
        "dented2d" | "dented3d" => {
            let dim = if name == "dented2d" { Dim::Two } else { Dim::Three };
            let m = make_dented_disk(dim, radius, st.f64("depth")?, st.f64("width")?, st.f64("center")?, st.f64("h")?)?;
            (m, dim)
        }
        "neck" => (make_neck(st.f64("d")?, st.f64("waist")?, st.usize("facets")?)?, Dim::Two),
        _ => unreachable!(),
    };
    Ok(m)
}

fn json_only(st: &Settings) -> Result<(), Failure> {
    st.choice("format", &["auto", "json"])?;
    Ok(())
}

fn table_format(st: &Settings) -> Result<bool, Failure> {
    Ok(st.choice("format", &["auto", "csv", "json"])? == "json")
}

fn expectation(st: &Settings, e: &Estimate) -> Result<bool, Failure> {
    Ok(match st.choice("expect", &["any", "zero", "nonzero", "positive", "negative"])? {
        "any" => true,
        "zero" => e.contains(0.0),
        "nonzero" => !e.contains(0.0),
        "positive" => e.lo() > 0.0,
        _ => e.hi() < 0.0,
    })
}

fn curvature(st: &Settings) -> Outcome {
    json_only(st)?;
    let s = st.f64("s")?;
    let (m, dim) = shape(st, s)?;
    let p = params(st, dim)?;
    let (z, mut nu) = project_to_surface(&m, &st.point("z", dim)?)?;
    if st.bool("flip_normal")? {
        nu = -nu;
    }
    let q = quadrature(st, &m, st.u64("seed")?)?;
    let e = fmc_estimate(&m, z, nu, &p, &q)?;
    let ok = expectation(st, &e)?;
    let h = header(st, &[p.header_lines(), q.header_lines()].concat());
    let body = json!({
        "z": coords(&z, dim), "nu": coords(&nu, dim), "estimate": estimate_json(&e),
        "contains_zero": e.contains(0.0), "verified": ok,
    });
    emit(st.str("out"), &json_text(&h, body))?;
    Ok(ok)
}

fn area(st: &Settings) -> Outcome {
    json_only(st)?;
    let s = st.f64("s")?;
    let (m, dim) = shape(st, s)?;
    let p = params(st, dim)?;
    let seed = st.u64("seed")?;
    let omega = Domain::ball(Point::zeros(), st.f64("omega_radius")?);
    let q = quadrature(st, &m, seed)?;
    let e = per_s_estimate(&m, &omega, &p, &q)?;
    let oracle = match st.choice("oracle", &["none", "disk", "polygon"])? {
        "none" => None,
        o => {
            if st.str("shape") != "circle" {
                return Err(st.bad("oracle", "needs shape=circle (the oracle integrates over the enclosed set)").into());
            }
            let r = st.f64("radius")?;
            let region = if o == "disk" {
                Region::Ball { center: Point::zeros(), radius: r }
            } else {
                Region::Polygon(regular_polygon(st.usize("facets")?, r))
            };
            let qo = QuadratureSpec::for_diameter(2.0 * r, st.usize("n")?, seed.wrapping_add(1));
            Some(classical_ps_oracle(&region, &omega, &p, &qo)?)
        }
    };
    let ok = oracle.as_ref().map_or(true, |o| o.overlaps(&e));
    let h = header(st, &[p.header_lines(), q.header_lines()].concat());
    let body = json!({
        "per_s": estimate_json(&e),
        "oracle": oracle.as_ref().map(estimate_json),
        "verified": ok,
    });
    emit(st.str("out"), &json_text(&h, body))?;
    Ok(ok)
}

fn sign_of(e: &Estimate) -> i32 {
    if e.contains(0.0) {
        0
    } else if e.value > 0.0 {
        1
    } else {
        -1
    }
}

fn cone_scan(st: &Settings) -> Outcome {
    let as_json = table_format(st)?;
    let p = params(st, Dim::Two)?;
    let ds = st.f64_list("d")?;
    let points = st.usize("points")?;
    if points == 0 {
        return Err(st.bad("points", "must be positive").into());
    }
    let seed = st.u64("seed")?;
    let mut rows = Vec::new();
    let mut verdicts = Vec::new();
    let mut all_ok = true;
    let mut k_seed = 0u64;
    for &d in &ds {
        let m = make_cone_2d(d)?;
        let cand = cone_2d_points(&m, points.div_ceil(4));
        let chosen: Vec<_> = (0..points).map(|k| cand[k * cand.len() / points]).collect();
        let mut signs = Vec::new();
        for (k, (z, nu)) in chosen.iter().enumerate() {
            let q = quadrature(st, &m, seed.wrapping_add(k_seed))?;
            k_seed += 1;
            let e = fmc_estimate(&m, *z, *nu, &p, &q)?;
            signs.push(sign_of(&e));
            rows.push(vec![
                num(d), k.to_string(), num(z.x), num(z.y), num(nu.x), num(nu.y),
                num(e.value), num(e.std_error), num(e.trunc_bound), num(e.half_width()), sign_of(&e).to_string(),
            ]);
        }
        let symmetric = (d - 1.0).abs() < 1e-12;
        let ok = if symmetric { signs.iter().all(|&s| s == 0) } else { signs[0] != 0 && signs.iter().all(|&s| s == signs[0]) };
        all_ok &= ok;
        let what = if symmetric { "all intervals contain 0".to_string() } else { format!("sign {}", signs[0]) };
        eprintln!("d={d}: {what} -> {}", if ok { "ok" } else { "FAILED" });
        verdicts.push(json!({ "d": d, "symmetric": symmetric, "signs": signs, "verified": ok }));
    }
    let cols = ["d", "point", "x1", "x2", "nu1", "nu2", "value", "std_error", "trunc_bound", "half_width", "sign"];
    let h = header(st, &p.header_lines());
    let text = if as_json {
        json_text(&h, json!({ "columns": cols, "rows": rows, "verdicts": verdicts, "verified": all_ok }))
    } else {
        csv_text(&h, &cols, &rows)?
    };
    emit(st.str("out"), &text)?;
    Ok(all_ok)
}

fn barrier_scan(st: &Settings) -> Outcome {
    let as_json = table_format(st)?;
    let dim = match st.choice("dim", &["2", "3"])? {
        "2" => Dim::Two,
        _ => Dim::Three,
    };
    let p = params(st, dim)?;
    let factor = st.f64("bound_factor")?;
    let mesh = BarrierMesh { h: st.f64("mesh_h")?, eta: st.f64("mesh_eta")? };
    let seed = st.u64("seed")?;
    let mut eps = st.f64_list("eps")?;
    eps.sort_by(|a, b| b.total_cmp(a));
    // H at the apex: exact flux in the plane, Monte Carlo in space
    let apex = |spec: &BarrierSpec, kind: BarrierKind, k: u64| -> Result<Estimate, Failure> {
        let m = make_barrier(spec, kind, &mesh)?;
        let (z, nu) = project_to_surface(&m, &barrier_apex(spec))?;
        Ok(match dim {
            Dim::Two => Estimate::exact(fmc_flux(&m, z, nu, &p, &FluxOptions::default())?, 0.0, 0),
            Dim::Three => fmc_estimate(&m, z, nu, &p, &quadrature(st, &m, seed.wrapping_add(k))?)?,
        })
    };
    let mut rows = Vec::new();
    let mut negative = Vec::new();
    let mut all_within = true;
    for (i, &e) in eps.iter().enumerate() {
        let spec = BarrierSpec::new(dim, e, &p).map_err(|x| st.bad("eps", x.to_string()))?;
        let c = barrier_constants(&spec, &p);
        let bound = c.c_bound * c.phi.powf(p.s);
        let free = apex(&spec, BarrierKind::BumpFree, 2 * i as u64)?;
        let bump = apex(&spec, BarrierKind::WithBump, 2 * i as u64 + 1)?;
        let within = free.value.abs() <= factor * bound;
        let neg = bump.hi() < 0.0;
        all_within &= within;
        negative.push(neg);
        rows.push(vec![
            num(e), num(c.delta), num(c.phi), num(c.c_bound), num(bound), num(free.value), num(free.half_width()),
            num(bump.value), num(bump.half_width()), within.to_string(), neg.to_string(),
        ]);
    }
    // largest ε of the list below which every value is negative
    let threshold = eps.iter().zip(&negative).rev().take_while(|x| *x.1).last().map(|x| *x.0);
    eprintln!(
        "bump-free within {factor}·c·φ^s: {}; with bump negative for ε ≤ {}",
        if all_within { "all" } else { "NOT all" },
        threshold.map_or("none".to_string(), |t| format!("{t:e}"))
    );
    let cols = ["eps", "delta", "phi", "c_bound", "bound", "H_free", "H_free_err", "H_bump", "H_bump_err", "within_bound", "negative"];
    let h = header(st, &p.header_lines());
    let text = if as_json {
        json_text(&h, json!({ "columns": cols, "rows": rows, "threshold": threshold, "verified": all_within }))
    } else {
        csv_text(&h, &cols, &rows)?
    };
    emit(st.str("out"), &text)?;
    Ok(all_within)
}

fn probe(st: &Settings) -> Outcome {
    json_only(st)?;
    let s = st.f64("s")?;
    let (m, dim) = shape(st, s)?;
    let p = params(st, dim)?;
    let q = quadrature(st, &m, st.u64("seed")?)?;
    let axis = st.point("axis", dim)?;
    if axis.norm() == 0.0 {
        return Err(st.bad("axis", "must be nonzero").into());
    }
    let report = match st.choice("probe", &["plane", "ball"])? {
        "plane" => slide_hyperplane(&m, &axis, st.f64("direction")?, &p, &q)?,
        _ => slide_ball(&m, st.f64("ball_radius")?, st.f64("ball_height")?, &axis, &p, &q)?,
    };
    let ok = match st.choice("expect", &["any", "critical", "violation"])? {
        "any" => true,
        "critical" => report.verdict == Verdict::ConsistentWithCritical,
        _ => report.verdict == Verdict::ViolatesCriticality,
    };
    let h = header(st, &[p.header_lines(), q.header_lines()].concat());
    let body = json!({
        "lambda_star": report.lambda_star,
        "contact_points": report.contact_points.iter().map(|c| coords(c, dim)).collect::<Vec<_>>(),
        "boundary_contacts": report.boundary_contacts.iter().map(|c| coords(c, dim)).collect::<Vec<_>>(),
        "eval_points": report.eval_points.iter().map(|c| coords(c, dim)).collect::<Vec<_>>(),
        "fmc_at_contact": report.fmc_at_contact.iter().map(estimate_json).collect::<Vec<_>>(),
        "verdict": format!("{:?}", report.verdict),
        "verified": ok,
    });
    emit(st.str("out"), &json_text(&h, body))?;
    Ok(ok)
}

/// `<stem>.<tag>.<ext>` next to `out`.
fn sibling(out: &str, tag: &str, ext: &str) -> String {
    let path = std::path::Path::new(out);
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "flow".into());
    path.with_file_name(format!("{stem}.{tag}.{ext}")).to_string_lossy().into_owned()
}

fn flow(st: &Settings) -> Outcome {
    st.choice("format", &["auto", "csv"])?;
    let p = params(st, Dim::Two)?;
    let d = st.f64("d")?;
    let mut cfg = FlowConfig::new(d);
    cfg.seed = st.u64("seed")?;
    cfg.dt_safety = st.f64("dt_safety")?;
    cfg.h_target = st.f64("h_target")?;
    cfg.max_steps = st.usize("max_steps")?;
    cfg.stop_tol = st.f64("stop_tol")?;
    cfg.topology_merge_dist = if st.str("merge") == "auto" { 0.5 * cfg.h_target } else { st.f64("merge")? };
    cfg.energy_lines = st.usize("energy_lines")?;
    cfg.validate().map_err(|e| st.bad("d", e.to_string()))?;
    let init = match st.choice("init", &["wall-chords", "flat-sheets", "cone"])? {
        "wall-chords" => InitialShape::WallChords,
        "flat-sheets" => InitialShape::FlatSheets,
        _ => InitialShape::Cone,
    };
    let run = flow_run(&FlowState::initial(init, &cfg), &cfg, &p)?;
    let c = &run.connectivity;
    let regime = if c.each_attached_to_both_rings() {
        "Connected"
    } else if c.each_attached_to_one_ring() {
        "Disconnected"
    } else {
        "Mixed"
    };
    let n_audit = st.usize("audit_points")?;
    let au = if n_audit > 0 { Some(audit(&run.final_state, &p, n_audit, st.usize("audit_samples")?, cfg.seed, cfg.exec)?) } else { None };
    let expect_ok = match st.choice("expect", &["any", "connected", "disconnected"])? {
        "any" => true,
        "connected" => regime == "Connected",
        _ => regime == "Disconnected",
    };
    let ok = expect_ok && au.as_ref().map_or(true, |a| a.passed);
    let h = header(st, &[p.header_lines(), cfg.header_lines()].concat());
    let summary = json!({
        "verdict": format!("{:?}", run.verdict),
        "regime": regime,
        "steps": run.trace.last().map_or(0, |r| r.step),
        "rejected": run.rejected,
        "n_components": c.n_components,
        "min_component_gap": if c.min_pair_distance.is_finite() { Some(c.min_pair_distance) } else { None },
        "min_wall_gap": run.final_state.min_wall_gap(),
        "sup_h": run.final_state.sup_h(),
        "audit": au.as_ref().map(|a| json!({
            "points": a.points.iter().map(|z| coords(z, Dim::Two)).collect::<Vec<_>>(),
            "estimates": a.estimates.iter().map(estimate_json).collect::<Vec<_>>(),
            "z_simultaneous": a.z_simultaneous, "sup_abs": a.sup_abs, "sup_lower": a.sup_lower, "passed": a.passed,
        })),
        "verified": ok,
    });
    let out = st.str("out");
    let hdr: String = h.iter().map(|l| format!("# {l}\n")).collect();
    if out.is_empty() {
        emit("", &run.trace_csv(&h))?;
        eprint!("{}", json_text(&h, summary));
    } else {
        emit(out, &run.trace_csv(&h))?;
        emit(&sibling(out, "final", "csv"), &format!("{hdr}{}", run.final_state.to_csv()))?;
        emit(&sibling(out, "summary", "json"), &json_text(&h, summary))?;
    }
    eprintln!("flow d={d}: {:?}, {regime}, {} component(s)", run.verdict, c.n_components);
    Ok(ok)
}

fn limit_scan(st: &Settings) -> Outcome {
    let as_json = table_format(st)?;
    let n_f = st.usize("facets")?;
    let (m, measure) = match st.choice("shape", &["segment", "circle"])? {
        "segment" => (make_flat_disk(Dim::Two, 1.0, 0.0, n_f)?, 2.0),
        _ => (build_polyline(&regular_polygon(n_f, 1.0), true)?, 2.0 * n_f as f64 * (PI / n_f as f64).sin()),
    };
    let list = st.f64_list("s_list")?.into_iter().map(|s| Params::new(Dim::Two, s)).collect::<Result<Vec<_>, _>>()
        .map_err(|e| st.bad("s_list", e.to_string()))?;
    let omega = Domain::ball(Point::zeros(), st.f64("omega_radius")?);
    let q = quadrature(st, &m, st.u64("seed")?)?;
    let scan = area_limit_scan(&m, &omega, &list, &q)?;
    let kappa = kappa_analytic(Dim::Two);
    let rows: Vec<Vec<String>> = scan.rows.iter().map(|r| {
        vec![num(r.s), num(r.estimate.value), num(r.estimate.std_error), num(r.estimate.half_width()), num(r.scaled), num(r.scaled_err)]
    }).collect();
    let ratio = scan.extrapolated.map(|v| v / (kappa * measure));
    eprintln!(
        "limit {:?} vs κ·|M| = {}·{measure:.6}; fitted κ {:?}; monotone {}",
        scan.extrapolated, kappa, scan.fit_kappa(measure), scan.monotone
    );
    let cols = ["s", "per_s", "std_error", "half_width", "scaled", "scaled_err"];
    let h = header(st, &q.header_lines());
    let text = if as_json {
        json_text(&h, json!({
            "columns": cols, "rows": rows, "extrapolated": scan.extrapolated, "measure": measure,
            "kappa_analytic": kappa, "kappa_fit": scan.fit_kappa(measure), "ratio": ratio, "monotone": scan.monotone,
        }))
    } else {
        csv_text(&h, &cols, &rows)?
    };
    emit(st.str("out"), &text)?;
    Ok(true)
}
