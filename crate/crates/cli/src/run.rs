//! Command dispatch and artifact output.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use terrace::evolve::{decay_fit, figure_checks, simulate, Mode, ScenarioConfig, SpaceTimeField};
use terrace::fronts::{
    kpp_minimal_speed, kpp_profile, system_front, FrontProfile, ResidualKind, UniformGrid,
};
use terrace::io::{fmt_real, pgm_bytes};
use terrace::model::{classify_equilibrium, equilibria, jacobian, ModelParams, Stability};
use terrace::scenario::{compliant, forced, ProfileGrids, WeightedScenario};
use terrace::spectral::{
    build_operator, field_of_values, max_sector_eta, resolvent_check, resolvent_samples,
    sector_check, OperatorDomain, SectorSpec,
};
use terrace::speeds::region_scan;
use terrace::weights::{
    alpha_threshold, diag_bound_check, region_bounds, weight_maps, GridRect, RegionLabel,
};

use crate::config::{Command, ConfigError, FrontKind, RunConfig};

pub const MANIFEST: &str = "manifest.json";
pub const ERROR_RECORD: &str = "error.json";

#[derive(Debug, Error)]
pub enum RunError {
    #[error("invalid configuration:\n{}", .0.iter().map(|e| format!("  {e}")).collect::<Vec<_>>().join("\n"))]
    Config(Vec<ConfigError>),
    #[error(transparent)]
    Core(#[from] terrace::Error),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl RunError {
    /// 1 for invalid input, 2 for numerical failures and i/o.
    pub fn exit_code(&self) -> i32 {
        use terrace::Error as E;
        match self {
            RunError::Config(_) => 1,
            RunError::Core(e) => match e {
                E::InvalidParameter { .. }
                | E::SingularEquilibrium { .. }
                | E::NotAnEquilibrium { .. }
                | E::SpeedBelowMinimal { .. }
                | E::UnsupportedEndpoints(_)
                | E::StepTooLarge { .. }
                | E::Mismatch(_)
                | E::Parse(_) => 1,
                _ => 2,
            },
            RunError::Io { .. } => 2,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            RunError::Config(_) => "config",
            RunError::Core(_) if self.exit_code() == 1 => "validation",
            RunError::Core(_) => "numerical",
            RunError::Io { .. } => "io",
        }
    }

    pub fn record(&self) -> Value {
        let details: Vec<Value> = match self {
            RunError::Config(errs) => errs
                .iter()
                .map(|e| json!({ "line": e.line, "key": e.key, "message": e.message }))
                .collect(),
            _ => Vec::new(),
        };
        json!({
            "kind": self.kind(),
            "exit_code": self.exit_code(),
            "message": self.to_string(),
            "details": details,
        })
    }
}

/// Files written into the run directory, in order.
pub struct Outputs {
    dir: PathBuf,
    files: Vec<(String, u64, String)>,
}

impl Outputs {
    pub fn create(dir: &Path) -> Result<Self, RunError> {
        fs::create_dir_all(dir).map_err(|source| RunError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), RunError> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|source| RunError::Io { path, source })?;
        let digest = Sha256::digest(bytes);
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        self.files.retain(|f| f.0 != name);
        self.files.push((name.to_string(), bytes.len() as u64, hex));
        Ok(())
    }

    pub fn json(&mut self, name: &str, v: &Value) -> Result<(), RunError> {
        let mut text = serde_json::to_string_pretty(v).expect("json values serialize");
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    /// Writes the manifest listing every other file with its SHA-256.
    pub fn finish(mut self, command: &str, seed: u64, exit_code: i32) -> Result<Value, RunError> {
        let files: Vec<Value> = self
            .files
            .iter()
            .map(|(p, n, h)| json!({ "path": p, "bytes": n, "sha256": h }))
            .collect();
        let manifest = json!({
            "command": command,
            "seed": seed,
            "exit_code": exit_code,
            "files": files,
        });
        self.json(MANIFEST, &manifest)?;
        Ok(manifest)
    }
}

/// Runs the configured command into `out`, always leaving a manifest and,
/// on failure, an error record. Returns the exit code.
pub fn execute(cfg: Result<RunConfig, Vec<ConfigError>>, command: &str, out: &Path) -> i32 {
    let mut outputs = match Outputs::create(out) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let seed = cfg.as_ref().map_or(0, |c| c.seed);
    let result = cfg.map_err(RunError::Config).and_then(|cfg| {
        outputs.write("config.txt", cfg.echo().as_bytes())?;
        run(&cfg, &mut outputs)
    });
    let code = match &result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if let Err(e2) = outputs.json(ERROR_RECORD, &e.record()) {
                eprintln!("error: {e2}");
            }
            e.exit_code()
        }
    };
    match outputs.finish(command, seed, code) {
        Ok(_) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

pub fn run(cfg: &RunConfig, out: &mut Outputs) -> Result<(), RunError> {
    match cfg.command {
        Command::Equilibria => run_equilibria(cfg, out),
        Command::Front => run_front(cfg, out),
        Command::SpeedRegion => run_speed_region(cfg, out),
        Command::WeightCheck => run_weight_check(cfg, out),
        Command::Numrange => run_numrange(cfg, out),
        Command::Simulate => run_simulate(cfg, out),
        Command::Figure => run_figure(cfg, out),
    }
}

fn num(x: f64) -> Value {
    json!(x)
}

fn run_equilibria(cfg: &RunConfig, out: &mut Outputs) -> Result<(), RunError> {
    let p = cfg.params();
    let eq = equilibria(&p)?;
    let mut csv = String::from(
        "name,u1,u2,j11,j12,j21,j22,lambda1_re,lambda1_im,lambda2_re,lambda2_im,stability\n",
    );
    let mut rows = Vec::new();
    for (name, e) in eq.named() {
        let j = jacobian(e, &p);
        let [l1, l2] = j.eigenvalues();
        let stab = match classify_equilibrium(e, &p)? {
            Stability::Stable => "stable",
            Stability::Unstable => "unstable",
        };
        let vals = [
            e.u1, e.u2, j.a11, j.a12, j.a21, j.a22, l1.re, l1.im, l2.re, l2.im,
        ];
        let cells: Vec<String> = vals.iter().map(|v| fmt_real(*v)).collect();
        csv.push_str(&format!("{name},{},{stab}\n", cells.join(",")));
        rows.push(json!({ "name": name, "u": [e.u1, e.u2], "stability": stab }));
    }
    out.write("equilibria.csv", csv.as_bytes())?;
    out.json(
        "summary.json",
        &json!({ "equilibria": rows, "standing_assumption": p.assumption_ok() }),
    )
}

fn front_summary(f: &FrontProfile<f64>) -> Value {
    json!({
        "speed": f.speed,
        "endpoints": f.endpoints.label(),
        "tail_rate": f.tail_rate,
        "interior_residual": f.interior_residual(ResidualKind::Discrete),
        "truncation_residual": f.interior_residual(ResidualKind::Truncation),
        "midpoint": f.midpoint_crossing().ok(),
        "plateau_edge": f.plateau_edge,
    })
}

fn run_front(cfg: &RunConfig, out: &mut Outputs) -> Result<(), RunError> {
    let p = cfg.params();
    let fb = cfg.front.expect("validated");
    let f = match fb.kind {
        FrontKind::Kpp => kpp_profile(fb.c, p.d, p.r, fb.length, fb.n)?,
        FrontKind::System(ends) => system_front(fb.c, &p, ends, None, fb.length, fb.n)?,
    };
    out.write("front.csv", f.to_csv().as_bytes())?;
    let mut summary = front_summary(&f);
    summary["kpp_minimal_speed"] = num(kpp_minimal_speed(p.d, p.r));
    out.json("summary.json", &summary)
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

fn run_speed_region(cfg: &RunConfig, out: &mut Outputs) -> Result<(), RunError> {
    let p = cfg.params();
    let (a, b) = (cfg.region.c1, cfg.region.c2);
    let scan = region_scan(&linspace(a.0, a.1, a.2), &linspace(b.0, b.1, b.2), &p)?;
    out.write("region.csv", scan.to_csv().as_bytes())?;
    // one pixel row per c2, largest c2 on top
    let (n1, n2) = (scan.c1_grid.len(), scan.c2_grid.len());
    let mut img = Vec::with_capacity(n1 * n2);
    for j in (0..n2).rev() {
        img.extend((0..n1).map(|i| if scan.cell(i, j).feasible { 1.0 } else { 0.0 }));
    }
    out.write("feasible.pgm", &pgm_bytes(&img, n1, n2))?;
    let count = |f: &dyn Fn(&terrace::speeds::RegionCell<f64>) -> bool| {
        scan.cells.iter().filter(|c| f(c)).count()
    };
    out.json(
        "summary.json",
        &json!({
            "cells": scan.cells.len(),
            "feasible": count(&|c| c.feasible),
            "interaction_excluded": count(&|c| c.interaction_excluded()),
            "variants_disagree": count(&|c| c.variants_disagree()),
        }),
    )
}

fn scenario_for(cfg: &RunConfig, p: &ModelParams<f64>) -> Result<WeightedScenario<f64>, RunError> {
    let s = cfg.speeds();
    let (psi1, psi2) = cfg.psi;
    let grids = ProfileGrids::default();
    Ok(match (s.kappa1, s.kappa2) {
        (Some(k1), Some(k2)) => forced(p, s.c1, s.c2, k1, k2, psi1, psi2, grids)?,
        (k1, _) => compliant(p, s.c1, s.c2, k1, psi1, psi2, grids)?,
    })
}

fn coarse_step(lo: f64, hi: f64, step: f64, points: usize) -> f64 {
    step.max((hi - lo) / (points - 1) as f64)
}

fn run_weight_check(cfg: &RunConfig, out: &mut Outputs) -> Result<(), RunError> {
    let p = cfg.params();
    let sc = scenario_for(cfg, &p)?;
    let c = cfg.check;
    let grid = GridRect::new(c.t.0, c.t.1, c.t.2, c.x.0, c.x.1, c.x.2)?;
    let bound = diag_bound_check(&sc.spec, &sc.weight, &p, &grid)?;
    let analytic = region_bounds(&sc.weight, &p, sc.epsilon);
    let mut csv = String::from("region,max_a11,max_a22,bound_a11,bound_a22\n");
    for r in RegionLabel::ALL {
        let (m, b) = (bound.region_max[r.index()], analytic[r.index()]);
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            r.label(),
            fmt_real(m[0]),
            fmt_real(m[1]),
            fmt_real(b[0]),
            fmt_real(b[1])
        ));
    }
    out.write("diag_bound.csv", csv.as_bytes())?;

    let mgrid = GridRect::new(
        c.t.0,
        c.t.1,
        coarse_step(c.t.0, c.t.1, c.t.2, c.map_points),
        c.x.0,
        c.x.1,
        coarse_step(c.x.0, c.x.1, c.x.2, c.map_points),
    )?;
    let maps = weight_maps(&sc.spec, &sc.weight, &p, &mgrid)?;
    out.write("weight_maps.csv", maps.to_csv().as_bytes())?;
    out.write("phi.pgm", &maps.pgm(&maps.phi))?;
    out.write("a11.pgm", &maps.pgm(&maps.a11))?;
    out.write("a22.pgm", &maps.pgm(&maps.a22))?;

    let threshold = match c.alpha {
        None => Value::Null,
        Some((lo, hi, res, dx)) => {
            let agrid = GridRect::new(c.t.0, c.t.1, dx, c.x.0, c.x.1, dx)?;
            let s = cfg.speeds();
            let found = alpha_threshold(lo, hi, res, |a| {
                let pa = p.with_alphas(a, a);
                match compliant(
                    &pa,
                    s.c1,
                    s.c2,
                    None,
                    cfg.psi.0,
                    cfg.psi.1,
                    ProfileGrids::default(),
                ) {
                    Ok(sa) => Ok(diag_bound_check(&sa.spec, &sa.weight, &pa, &agrid)?.eta > 0.0),
                    Err(terrace::Error::InvalidParameter { .. }) => Ok(false),
                    Err(e) => Err(e),
                }
            })?;
            json!({ "lo": lo, "hi": hi, "resolution": res, "dx": dx, "alpha": found })
        }
    };
    let cert = sc.weight.cert;
    out.json(
        "summary.json",
        &json!({
            "eta": bound.eta,
            "positive": bound.eta > 0.0,
            "argmax": { "t": bound.t, "x": bound.x, "component": bound.component + 1, "region": bound.region.label() },
            "covers_all_regions": bound.covers_all_regions(),
            "points": bound.points,
            "epsilon": sc.epsilon,
            "certificate": {
                "c1": cert.c1, "c2": cert.c2, "kappa1": cert.kappa1, "kappa2": cert.kappa2,
                "margins": [cert.margins.a1, cert.margins.a2, cert.margins.b, cert.margins.c],
                "all_negative": cert.margins.all_negative(),
            },
            "alpha_threshold": threshold,
        }),
    )
}

fn time_tag(t: f64) -> String {
    let s = format!("{t}");
    s.replace('.', "p")
}

fn run_numrange(cfg: &RunConfig, out: &mut Outputs) -> Result<(), RunError> {
    let p = cfg.params();
    let sc = scenario_for(cfg, &p)?;
    let nr = &cfg.numrange;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut per_time = Vec::new();
    for &t in &nr.times {
        let dom = OperatorDomain::new(nr.x_lo, nr.x_hi, nr.n)?;
        let op = build_operator(t, &sc.spec, &sc.weight, &p, dom)?;
        let fov = field_of_values(&op.matrix, nr.angles)?;
        let tag = time_tag(t);
        out.write(&format!("fov_t{tag}.csv"), fov.to_csv().as_bytes())?;
        let vertices = fov.outer_vertices();
        let eta = max_sector_eta(&vertices, nr.eta_resolution);
        let mut entry = json!({
            "t": t,
            "max_re": fov.max_re(),
            "sector_eta": eta,
        });
        if let Some(eta) = eta {
            let sector = SectorSpec::new(eta)?;
            let (inside, worst) = sector_check(&fov.points, &sector);
            let mut lambdas = resolvent_samples(&sector, nr.resolvent_samples);
            for _ in 0..nr.random_samples {
                let im: f64 = rng.gen_range(-30.0..30.0);
                let gap = 10f64.powf(rng.gen_range(-2.0..2.0));
                lambdas.push(Complex::new(-eta * (1.0 + im.abs()) + gap, im));
            }
            if !lambdas.is_empty() {
                let rep = resolvent_check(&op.matrix, &sector, &lambdas)?;
                out.write(&format!("resolvent_t{tag}.csv"), rep.to_csv().as_bytes())?;
                entry["resolvent_min_ratio"] = num(rep.min_ratio);
            }
            entry["points_in_sector"] = json!(inside);
            entry["worst_sector_margin"] = num(worst);
        }
        per_time.push(entry);
    }
    out.json(
        "summary.json",
        &json!({ "domain": [nr.x_lo, nr.x_hi], "n": nr.n, "angles": nr.angles, "times": per_time }),
    )
}

fn write_field(
    out: &mut Outputs,
    field: &SpaceTimeField<f64>,
    max_columns: usize,
) -> Result<(), RunError> {
    out.write("norms.csv", field.norms_csv().as_bytes())?;
    out.write("interfaces.csv", field.interfaces_csv().as_bytes())?;
    out.write("field.csv", field.field_csv(max_columns).as_bytes())?;
    out.write("u1.pgm", &field.pgm(0, max_columns))?;
    out.write("u2.pgm", &field.pgm(1, max_columns))
}

fn apply_overrides(cfg: &RunConfig, sim: &mut ScenarioConfig<f64>) -> Result<(), RunError> {
    let s = &cfg.simulate;
    if let Some((lo, hi, n)) = s.domain {
        sim.domain = UniformGrid::spanning(lo, hi, n)?;
    }
    if let Some(t) = s.t_end {
        sim.t_end = t;
    }
    if let Some(dt) = s.dt {
        sim.dt = dt;
    }
    if let Some(k) = s.snapshot_every {
        sim.snapshot_every = k;
    }
    sim.scheme = s.scheme;
    Ok(())
}

fn interface_summary(field: &SpaceTimeField<f64>) -> Value {
    let t_end = field.t_grid.last().copied().unwrap_or(0.0);
    let speed = |k| {
        field
            .interface_speed(k, t_end / 2.0, t_end)
            .map(|(s, r2)| json!({ "speed": s, "r2": r2 }))
    };
    json!({ "u1": speed(0), "u2": speed(1), "final": field.interfaces.last().map(|f| [f[0], f[1]]) })
}

fn run_simulate(cfg: &RunConfig, out: &mut Outputs) -> Result<(), RunError> {
    let s = &cfg.simulate;
    if s.mode == Mode::Nonlinear {
        return run_preset(cfg, out, false);
    }
    let p = cfg.params();
    let sc = scenario_for(cfg, &p)?;
    let t_end = s.t_end.unwrap_or(40.0);
    let lo = sc.weight.psi1 - 50.0;
    let hi = sc.weight.psi2 + sc.weight.cert.c2 * t_end + 60.0;
    let n = ((hi - lo) / 0.1).round() as usize + 1;
    let mut sim = sc.run_config(
        s.mode,
        s.bump,
        UniformGrid::spanning(lo, hi, n)?,
        t_end,
        0.01,
    )?;
    sim.snapshot_every = 50;
    apply_overrides(cfg, &mut sim)?;
    let field = simulate(&sim)?;
    write_field(out, &field, s.max_columns)?;
    let fit = decay_fit(&field.t_grid, &field.norms, s.fit).ok();
    out.json(
        "summary.json",
        &json!({
            "mode": s.mode.label(),
            "bump": s.bump.label(),
            "domain": [sim.domain.start, sim.domain.end()],
            "n": sim.domain.len,
            "t_end": sim.t_end,
            "max_growth": field.max_growth(),
            "decay_fit": fit.map(|f| json!({ "eta": f.eta, "c": f.c, "r2": f.r2, "t0": f.t0, "t1": f.t1, "samples": f.samples })),
        }),
    )
}

fn run_preset(cfg: &RunConfig, out: &mut Outputs, checks: bool) -> Result<(), RunError> {
    let preset = cfg.figure.expect("validated");
    let mut sim = preset.config::<f64>()?;
    if let Some(p) = cfg.model {
        sim.params = p;
    }
    apply_overrides(cfg, &mut sim)?;
    let field = simulate(&sim)?;
    write_field(out, &field, cfg.simulate.max_columns)?;
    let mut summary = json!({
        "preset": preset.name(),
        "params": [sim.params.d, sim.params.r, sim.params.alpha1, sim.params.alpha2],
        "domain": [sim.domain.start, sim.domain.end()],
        "n": sim.domain.len,
        "t_end": sim.t_end,
        "interfaces": interface_summary(&field),
    });
    if checks {
        let list: Vec<Value> = figure_checks(preset, &field, &sim.params)
            .into_iter()
            .map(|c| json!({ "name": c.name, "passed": c.passed, "detail": c.detail }))
            .collect();
        summary["checks"] = Value::Array(list);
    }
    out.json("summary.json", &summary)
}

fn run_figure(cfg: &RunConfig, out: &mut Outputs) -> Result<(), RunError> {
    run_preset(cfg, out, true)
}
