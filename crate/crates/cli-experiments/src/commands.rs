//! The four experiment commands. Each writes CSV and SVG files into an
//! output directory and returns a short textual summary.

use crate::experiment::WaveExperiment;
use crate::krylov::ritz_norm_estimate;
use crate::out::{num, OutDir};
use crate::preset::RaySource;
use crate::svg::{heatmap, Chart, Series};
use anyhow::{bail, Context, Result};
use grid_core::{Cauchy64, CauchyData, MediumSource, RunConfig, ScalarField};
use marchenko_1d::{
    even_term_identity, focusing_report, pressure_tail_iterate, reflection_response, rose_cauchy_equivalence_check,
    rose_tail_iterate, BoundaryTrace, Marchenko64, TailVariant,
};
use microlocal_rays::{
    constructive_tail, cotangent_depth, mdt_symbol, symbol_neumann_iterate, trace_rays, Covector, Depth, Dir, Model64,
    NeumannOptions, RayEnd, Slowness64, SymbolVector,
};
use scattering_control::{almost_direct_transmission, Adt64, scattering_control_iterate, IterationOptions, Trace64};
use std::fmt;
use std::path::PathBuf;
use wave_solver::{energy, kinetic_energy};

/// Rays within this angle of horizontal are cut rather than traced.
pub const GLANCING_DEG: f64 = 2.0;

#[derive(Clone, Debug, Default)]
pub struct Report {
    pub title: String,
    pub lines: Vec<String>,
    pub files: Vec<PathBuf>,
}

impl Report {
    fn new(title: impl Into<String>) -> Self {
        Report { title: title.into(), ..Default::default() }
    }

    fn line(&mut self, s: impl Into<String>) {
        self.lines.push(s.into());
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.title)?;
        for l in &self.lines {
            writeln!(f, "  {l}")?;
        }
        for p in &self.files {
            writeln!(f, "  wrote {}", p.display())?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------- simulate

/// Propagates the configured pulse over `[0, 2T]`, recording energies and
/// nine evenly spaced snapshots.
pub fn simulate(cfg: &RunConfig, out: &OutDir) -> Result<Report> {
    let ex = WaveExperiment::new(cfg)?;
    let prop = ex.prop();
    let grid = *prop.grid();
    let n = 2 * prop.steps_per_t();
    let frames: Vec<usize> = (0..=8).map(|j| j * n / 8).collect();
    let every = (n / 200).max(1);
    let theta = ex.nest.theta_mask.clone();
    let outside = theta.complement();
    let full = theta.or(&outside);
    let dt = prop.dt();

    let mut rows = Vec::new();
    let mut snaps: Vec<(f64, Vec<f64>)> = Vec::new();
    prop.run(&ex.h0, n as i64, |k, u, v| {
        let k = k as usize;
        let want_row = k % every == 0 || k == n;
        let want_frame = frames.contains(&k);
        if !(want_row || want_frame) {
            return;
        }
        let t = k as f64 * dt;
        if want_row {
            let h = CauchyData::new(
                ScalarField::from_values(grid, u.to_vec()).expect("same grid"),
                ScalarField::from_values(grid, v.to_vec()).expect("same grid"),
            )
            .expect("same grid");
            rows.push([t, energy(prop, &h, &full), energy(prop, &h, &theta), energy(prop, &h, &outside), kinetic_energy(prop, &h, &full)]);
        }
        if want_frame {
            snaps.push((t, u.to_vec()));
        }
    });

    let mut rep = Report::new(format!("simulate {}", cfg.name));
    let e0 = rows[0][1];
    let drift = rows.iter().map(|r| (r[1] - e0).abs()).fold(0.0, f64::max) / if e0 > 0.0 { e0 } else { 1.0 };
    rep.line(format!("{} nodes, {} steps of dt = {:.6e} over 2T = {}", grid.len(), n, dt, 2.0 * prop.t_ctrl()));
    rep.line(prop.snap_report());
    rep.line(format!("initial energy {:.6e}, largest relative drift {:.3e}", e0, drift));
    let last = rows.last().expect("at least one row");
    rep.line(format!("energy in Θ at 2T: {:.4} of the total", if last[1] > 0.0 { last[2] / last[1] } else { 0.0 }));

    rep.files.push(out.csv(
        "energy.csv",
        &["t", "energy", "energy_theta", "energy_outside", "kinetic"],
        rows.iter().map(|r| r.iter().map(|&x| num(x)).collect()),
    )?);

    if grid.dim() == 1 {
        let xs: Vec<f64> = (0..grid.len()).map(|i| grid.position(i)[0]).collect();
        let mut header = vec!["x".to_string()];
        header.extend(snaps.iter().map(|(t, _)| format!("u(t={t:.4})")));
        let hdr: Vec<&str> = header.iter().map(String::as_str).collect();
        let table = (0..grid.len()).map(|i| std::iter::once(num(xs[i])).chain(snaps.iter().map(|(_, u)| num(u[i]))).collect());
        rep.files.push(out.csv("snapshots.csv", &hdr, table)?);

        // Stack the snapshots vertically, one curve per time.
        let peak = snaps.iter().flat_map(|(_, u)| u.iter()).fold(0.0f64, |a, v| a.max(v.abs()));
        let gap = if peak > 0.0 { 2.2 * peak } else { 1.0 };
        let mut chart = Chart::new(format!("{}: u(x, t), later times lower", cfg.name), "x", "u, offset by time");
        for (j, (t, u)) in snaps.iter().enumerate() {
            let off = -(j as f64) * gap;
            chart.series.push(Series::new(format!("t = {t:.3}"), xs.iter().zip(u).map(|(&x, &v)| (x, v + off)).collect()));
        }
        rep.files.push(out.text("snapshots.svg", &chart.render())?);
    } else {
        let [nx, ny] = grid.extent();
        for (j, (t, u)) in snaps.iter().enumerate() {
            let svg = heatmap(&format!("{}: u at t = {t:.3}", cfg.name), nx, ny, u);
            rep.files.push(out.text(&format!("snapshot_{j}.svg"), &svg)?);
        }
    }

    let mut chart = Chart::new(format!("{}: energy", cfg.name), "t", "energy");
    for (c, label) in [(1, "total"), (2, "in Θ"), (3, "outside Θ")] {
        chart.series.push(Series::new(label, rows.iter().map(|r| (r[0], r[c])).collect()));
    }
    rep.files.push(out.text("energy.svg", &chart.render())?);
    Ok(rep)
}

// ---------------------------------------------------------------- control

#[derive(Clone, Copy, Debug)]
pub struct ControlOptions {
    /// Stop once the tail has stabilized instead of running all `k_max` steps.
    pub early_stop: bool,
}

impl Default for ControlOptions {
    fn default() -> Self {
        ControlOptions { early_stop: true }
    }
}

pub struct ControlRun {
    pub experiment: WaveExperiment,
    pub trace: Trace64,
    /// Reference almost direct transmission.
    pub adt: Adt64,
    pub krylov: Option<crate::krylov::KrylovEstimate>,
}

/// Scattering control iteration with the almost direct transmission as
/// reference, keeping every iterate for the norm estimate.
pub fn run_control(cfg: &RunConfig, opts: ControlOptions) -> Result<ControlRun> {
    let ex = WaveExperiment::new(cfg)?;
    let adt = almost_direct_transmission(&ex.setup, &ex.h0).context("almost direct transmission")?;
    let mut io = IterationOptions::new(cfg.k_max);
    io.oracle = Some(&adt);
    io.snapshot_every = 1;
    io.stop_when_stabilized = opts.early_stop;
    io.check_invariants = ex.config.grid.dim == 1;
    let mut trace = scattering_control_iterate(&ex.setup, &ex.h0, &io).context("scattering control iteration")?;
    let iterates: Vec<Cauchy64> = std::mem::take(&mut trace.snapshots).into_iter().map(|(_, h)| h).collect();
    let krylov = ritz_norm_estimate(&ex.setup, &iterates);
    Ok(ControlRun { adt, experiment: ex, trace, krylov })
}

pub fn control(cfg: &RunConfig, out: &OutDir, opts: ControlOptions) -> Result<Report> {
    let run = run_control(cfg, opts)?;
    let tr = &run.trace;
    let n0 = if tr.h0_norm > 0.0 { tr.h0_norm } else { 1.0 };
    let mut rep = Report::new(format!("control {}", cfg.name));
    rep.line(format!("‖h0‖ = {:.6e}, {} iterations recorded", tr.h0_norm, tr.rows.len()));
    match tr.stabilized_at {
        Some(k) => rep.line(format!("tail stabilized at k = {k}")),
        None => rep.line(format!(
            "DIVERGENCE FLAGGED: tail did not stabilize within k = {} (last relative step {:.3e}, tail {:.3e})",
            cfg.k_max,
            tr.rows.last().map_or(0.0, |r| r.step_norm / n0),
            tr.rows.last().map_or(0.0, |r| r.tail_norm / n0),
        )),
    }
    if let Some(last) = tr.rows.last() {
        let rel = |a: f64, b: f64| if b != 0.0 { (a - b) / b } else { a };
        rep.line(format!(
            "recovered energy {:.6e} vs direct transmission {:.6e} (rel. error {:+.3e})",
            last.recovered_e,
            run.adt.energy,
            rel(last.recovered_e, run.adt.energy)
        ));
        rep.line(format!(
            "recovered kinetic energy {:.6e} vs {:.6e} (rel. error {:+.3e})",
            last.recovered_ke,
            run.adt.kinetic_energy,
            rel(last.recovered_ke, run.adt.kinetic_energy)
        ));
        if let Some(m) = last.interior_mismatch {
            rep.line(format!("interior mismatch at k = {}: {:.3e}", last.k, m));
        }
    }
    if let Some(k) = &run.krylov {
        rep.line(format!(
            "Ritz estimate of ‖π*Rπ*R‖ on the span of {} increments (dim {}): {:.6}",
            k.span, k.dimension, k.estimate
        ));
    }

    let header = [
        "k",
        "tail_norm",
        "step_norm",
        "inside_norm",
        "interior_mismatch",
        "recovered_e",
        "recovered_ke",
        "pi_bar_violation",
        "norm_h",
        "norm_pstar_r",
        "norm_pstar_r_pstar_r",
    ];
    let opt = |x: Option<f64>| x.map(num).unwrap_or_default();
    rep.files.push(out.csv(
        "trace.csv",
        &header,
        tr.rows.iter().map(|r| {
            vec![
                r.k.to_string(),
                num(r.tail_norm),
                num(r.step_norm),
                num(r.inside_norm),
                opt(r.interior_mismatch),
                num(r.recovered_e),
                num(r.recovered_ke),
                opt(r.pi_bar_violation),
                num(r.norm_h),
                num(r.norm_pstar_r),
                num(r.norm_pstar_r_pstar_r),
            ]
        }),
    )?);

    let mut chart = Chart::new(format!("{}: convergence", cfg.name), "k", "relative to ‖h0‖");
    chart.log_y = true;
    let col = |f: &dyn Fn(&scattering_control::IterationRow<f64>) -> Option<f64>| {
        tr.rows.iter().filter_map(|r| f(r).map(|v| (r.k as f64, v))).collect::<Vec<_>>()
    };
    chart.series.push(Series::new("tail", col(&|r| Some(r.tail_norm / n0))));
    chart.series.push(Series::new("step", col(&|r| Some(r.step_norm / n0))));
    chart.series.push(Series::new("inside", col(&|r| Some(r.inside_norm / n0))));
    chart.series.push(Series::new("interior mismatch", col(&|r| r.interior_mismatch)));
    rep.files.push(out.text("convergence.svg", &chart.render())?);

    let grid = *tr.h0.grid();
    let tail = tr.tail();
    if grid.dim() == 1 {
        let xs: Vec<f64> = (0..grid.len()).map(|i| grid.position(i)[0]).collect();
        let rows = (0..grid.len()).map(|i| vec![num(xs[i]), num(tr.h0.u0.values()[i]), num(tail.u0.values()[i]), num(tail.u1.values()[i])]);
        rep.files.push(out.csv("tail.csv", &["x", "h0_u0", "tail_u0", "tail_u1"], rows)?);
        let mut chart = Chart::new(format!("{}: h0 and the control tail", cfg.name), "x", "u0");
        chart.series.push(Series::new("h0", xs.iter().zip(tr.h0.u0.values()).map(|(&x, &v)| (x, v)).collect()));
        chart.series.push(Series::new("tail", xs.iter().zip(tail.u0.values()).map(|(&x, &v)| (x, v)).collect()));
        rep.files.push(out.text("tail.svg", &chart.render())?);
    } else {
        let [nx, ny] = grid.extent();
        rep.files.push(out.text("tail.svg", &heatmap(&format!("{}: tail u0 at k = {}", cfg.name, tr.rows.len() - 1), nx, ny, tail.u0.values()))?);
        rep.files.push(out.text("h0.svg", &heatmap(&format!("{}: h0 u0", cfg.name), nx, ny, tr.h0.u0.values()))?);
    }
    Ok(rep)
}

// ---------------------------------------------------------------- marchenko

pub fn marchenko(cfg: &RunConfig, out: &OutDir) -> Result<Report> {
    if cfg.grid.dim != 1 {
        bail!("the Marchenko comparison is one-dimensional, but {} has dim = {}", cfg.name, cfg.grid.dim);
    }
    let medium = cfg.build_medium::<f64>()?;
    let nest = cfg.build_nest::<f64>()?;
    let s = Marchenko64::new(&medium, &nest, cfg.cfl, cfg.cg_tol, cfg.cg_max_iter).context("Marchenko setup")?;
    let r0 = crate::experiment::initial_data(cfg, &medium, s.control().prop())?;
    let kernel = reflection_response(&s, 0.2, 1e-8, 1e-2).context("reflection response")?;
    let incident = s.incoming_trace(&r0)?;
    let k = cfg.k_max;

    let mut rep = Report::new(format!("marchenko {}", cfg.name));
    rep.line(format!("x_b = {:.4}, ε = {:.4}, {} samples of dt = {:.4e}", s.x_b(), s.eps(), incident.len(), incident.dt));
    rep.line(format!("reflection response refit residual {:.3e}", kernel.refit_residual));

    let mut columns: Vec<(String, BoundaryTrace)> = vec![("incident".into(), incident.clone())];
    for variant in [TailVariant::Pressure, TailVariant::Velocity] {
        let name = match variant {
            TailVariant::Pressure => "pressure",
            TailVariant::Velocity => "velocity",
        };
        let rose = rose_tail_iterate(&s, &kernel, &incident, k, variant)?;
        let cauchy = pressure_tail_iterate(&s, &r0, k, variant)?;
        let eq = rose_cauchy_equivalence_check(&s, &cauchy.tail, &rose.tail)?;
        let focus = focusing_report(&s, &r0, &cauchy.tail)?;
        rep.line(format!(
            "{name}: Rose vs Cauchy tail {eq:.3e}; harmonic residual {:.3e}, velocity residual {:.3e}, inside mismatch {:.3e}",
            focus.harmonic_residual, focus.velocity_residual, focus.inside_mismatch
        ));
        if variant == TailVariant::Pressure {
            let even = even_term_identity(&s, &cauchy)?;
            let worst = even.iter().copied().fold(0.0, f64::max);
            rep.line(format!("even-term identity, worst of {}: {worst:.3e}", even.len()));
        }
        columns.push((format!("rose_{name}"), rose.tail));
        columns.push((format!("cauchy_{name}"), s.incoming_trace(&cauchy.tail)?));
    }
    if incident.l2() > 0.0 && columns[1].1.l2() <= 1e-8 * incident.l2() {
        rep.line("tails are empty: the medium sends nothing back into the measurement window");
    }

    let mut header = vec!["tau".to_string()];
    header.extend(columns.iter().map(|c| c.0.clone()));
    let hdr: Vec<&str> = header.iter().map(String::as_str).collect();
    let n = incident.len();
    rep.files.push(out.csv(
        "tails.csv",
        &hdr,
        (0..n).map(|i| std::iter::once(num(incident.time(i))).chain(columns.iter().map(|c| num(c.1.u[i]))).collect()),
    )?);
    let mut chart = Chart::new(format!("{}: boundary tails at x_b", cfg.name), "τ", "pressure");
    for (j, (name, tr)) in columns.iter().enumerate().skip(1) {
        let pts = (0..n).map(|i| (tr.time(i), tr.u[i])).collect();
        let s = Series::new(name.clone(), pts);
        chart.series.push(if j % 2 == 0 { s.dashed() } else { s });
    }
    rep.files.push(out.text("tails.svg", &chart.render())?);
    Ok(rep)
}

// ---------------------------------------------------------------- rays

/// Layered model seen by the ray code: `Θ` becomes the half-space below the
/// top of the configured `Θ` box, and the tops of `Θ″` and `Θ′` set the
/// cutoff planes.
pub fn ray_model(cfg: &RunConfig) -> Result<Model64> {
    let (interfaces, speeds) = match &cfg.medium {
        MediumSource::Constant(c) => (vec![], vec![*c]),
        MediumSource::Layered { interfaces, speeds } => (interfaces.clone(), speeds.clone()),
        MediumSource::File(p) => bail!("ray tracing needs a layered medium, {} reads speeds from {}", cfg.name, p.display()),
    };
    let n = &cfg.nest;
    Ok(Model64::new(interfaces, speeds, n.theta.lo[0])?.with_nested(n.theta_dprime.lo[0], n.theta_prime.lo[0])?)
}

pub fn rays(cfg: &RunConfig, source: Option<RaySource>, out: &OutDir) -> Result<Report> {
    let model = ray_model(cfg)?;
    let t_ctrl = cfg.t_ctrl;
    let z0 = cfg.pulse.center[0];
    let (p, sources): (f64, Vec<(Dir, f64)>) = match source {
        Some(s) => (s.slowness, s.covectors.to_vec()),
        None => {
            let layer = model.layer_at(&z0).context("pulse centre lies on an interface")?;
            (cfg.pulse.angle_deg.to_radians().sin() / model.speeds()[layer], vec![(Dir::Down, z0)])
        }
    };
    let slice = Slowness64::new(&model, p, GLANCING_DEG);
    let theta = *model.theta();
    let max_events = cfg.k_max.max(1);
    let t_end = 2.0 * t_ctrl;

    let mut rep = Report::new(format!("rays {}", cfg.name));
    rep.line(format!("slowness p = {p:.6}, {} layers, ∂Θ at z = {theta}, window [0, {t_end}]", model.layer_count()));
    let mut ray_rows = Vec::new();
    let mut chart = Chart::new(format!("{}: depth below ∂Θ along broken rays", cfg.name), "t", "depth");
    chart.hide_legend = true;
    let mut h0 = SymbolVector::new(0.0);
    for (si, &(dir, z)) in sources.iter().enumerate() {
        let eta = Covector::new(&slice, 0.0, z, 0.0, dir)?;
        h0.add(eta.layer, eta.dir, eta.z, 1.0);
        let depth = cotangent_depth(&slice, &eta, &theta, max_events)?;
        let tr = trace_rays(&slice, &eta, &t_end, max_events)?;
        let window: f64 = tr
            .rays
            .iter()
            .filter(|r| r.end == RayEnd::Window)
            .map(|r| slice.flux(r.segments.last().map_or(eta.layer, |s| s.end.layer), &r.amplitude))
            .fold(0.0, |a, b| a + b);
        let depth = match depth {
            Depth::Finite(d) => format!("{d:.6}"),
            Depth::Inside => "unbounded (never leaves Θ)".into(),
            Depth::Outside => "outside Θ".into(),
        };
        rep.line(format!(
            "source {si} ({dir:?} at z = {z}): cotangent depth {depth}; {} rays, mass in window {window:.6}, truncated {:.3e}, cut {:.6}",
            tr.rays.len(),
            tr.truncated_mass,
            tr.cut_mass
        ));
        if tr.cut_mass > 0.0 && tr.rays.iter().all(|r| r.end == RayEnd::Glancing) {
            rep.line(format!("source {si}: all mass reported cut at glancing interfaces"));
        }
        for (ri, ray) in tr.rays.iter().enumerate() {
            for (k, seg) in ray.segments.iter().enumerate() {
                ray_rows.push(vec![
                    si.to_string(),
                    ri.to_string(),
                    ray.code_string(),
                    format!("{:?}", ray.end),
                    num(ray.amplitude),
                    k.to_string(),
                    seg.start.layer.to_string(),
                    format!("{:?}", seg.start.dir),
                    num(seg.start.t),
                    num(seg.start.x),
                    num(seg.start.z),
                    num(seg.end.t),
                    num(seg.end.x),
                    num(seg.end.z),
                ]);
            }
            chart.series.push(Series::new(ray.code_string(), ray.depth_profile(&slice, &theta)));
        }
    }
    let n = 64;
    let diamond = (0..=n).map(|i| {
        let t = t_end * i as f64 / n as f64;
        (t, t_ctrl - (t - t_ctrl).abs())
    });
    chart.series.push(Series::new("T − |t − T|", diamond.collect()).dashed());
    chart.series.push(Series::new("∂Θ", vec![(0.0, 0.0), (t_end, 0.0)]).dashed());
    rep.files.push(out.csv(
        "rays.csv",
        &["source", "ray", "code", "end", "amplitude", "segment", "layer", "dir", "t0", "x0", "z0", "t1", "x1", "z1"],
        ray_rows,
    )?);
    rep.files.push(out.text("depth.svg", &chart.render())?);

    match mdt_symbol(&slice, &h0, &t_ctrl) {
        Ok(mdt) => rep.line(format!(
            "almost direct transmission: {} covectors carrying energy {:.6} of {:.6}",
            mdt.len(),
            mdt.norm_sq(&slice),
            h0.norm_sq(&slice)
        )),
        Err(e) => rep.line(format!("almost direct transmission unavailable: {e}")),
    }
    match constructive_tail(&slice, &h0, &t_ctrl, 8) {
        Ok(tail) => {
            rep.line(format!("constructive tail: {} covectors for {} returning pieces", tail.tail.len(), tail.returning.len()));
            let total = tail.total(&h0);
            let opts = NeumannOptions { k_max: cfg.k_max, reference: Some(&total), ..Default::default() };
            let steps = symbol_neumann_iterate(&slice, &h0, &t_ctrl, &opts)?;
            if let Some(last) = steps.last() {
                rep.line(format!("symbol Neumann series after {} steps: error {:.3e}", last.k, last.error.unwrap_or(f64::NAN)));
            }
            rep.files.push(out.csv(
                "neumann.csv",
                &["k", "norm", "inside_norm", "error", "lost_mass"],
                steps.iter().map(|s| vec![s.k.to_string(), num(s.norm), num(s.inside_norm), num(s.error.unwrap_or(f64::NAN)), num(s.lost_mass)]),
            )?);
        }
        Err(e) => rep.line(format!("no constructive tail: {e}")),
    }
    Ok(rep)
}
