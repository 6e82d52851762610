use terrace::evolve::*;
use terrace::fronts::{linear_fit, SuperpositionSpec, UniformGrid};
use terrace::model::{
    equilibria, jacobian, quadratic_remainder, reaction, ModelParams, StatePoint,
};
use terrace::scenario::{reference_compliant, ProbeBump};

fn fig_params() -> ModelParams<f64> {
    ModelParams::new(4.0, 2.0, 0.75, 0.75).unwrap()
}

#[test]
fn linear_run_from_zero_stays_zero() {
    let s = reference_compliant::<f64>().unwrap();
    let grid = UniformGrid::spanning(-40.0, 60.0, 1001).unwrap();
    for mode in [Mode::LinearAtAnsatz, Mode::WeightedLinear] {
        let mut cfg = s
            .run_config(mode, ProbeBump::Between, grid, 1.0, 0.01)
            .unwrap();
        cfg.initial = InitialCondition::Uniform(StatePoint::zero());
        let f = simulate(&cfg).unwrap();
        assert!(f.values.iter().all(|v| v.u1 == 0.0 && v.u2 == 0.0));
    }
}

#[test]
fn ordered_data_stay_ordered() {
    let p = fig_params();
    let eq = equilibria(&p).unwrap();
    let grid = UniformGrid::spanning(-50.0, 50.0, 1001).unwrap();
    let lower = InitialCondition::Steps {
        background: eq.e4,
        segments: vec![Segment {
            lo: -10.0,
            hi: 10.0,
            state: eq.e3,
        }],
        bumps: vec![Bump {
            center: 0.0,
            width: 1.0,
            amplitude: StatePoint::new(0.0, 0.01),
        }],
    };
    let upper = InitialCondition::Steps {
        background: eq.e4,
        segments: vec![Segment {
            lo: -12.0,
            hi: 12.0,
            state: eq.e3,
        }],
        bumps: vec![Bump {
            center: 0.0,
            width: 2.0,
            amplitude: StatePoint::new(0.1, 0.2),
        }],
    };
    // D dt / dx^2 = 1 keeps Crank-Nicolson free of oscillations
    let run = |init| {
        let mut c = ScenarioConfig::new(p, Mode::Nonlinear, init, grid, 3.0, 0.0025);
        c.snapshot_every = 40;
        simulate(&c).unwrap()
    };
    let (a, b) = (run(lower), run(upper));
    let n = grid.len;
    for (k, (va, vb)) in a.values.iter().zip(&b.values).enumerate() {
        assert!(
            vb.u1 >= va.u1 - 1e-8 && vb.u2 >= va.u2 - 1e-8,
            "t={} x={} {va:?} {vb:?}",
            a.t_grid[k / n],
            grid.point(k % n)
        );
    }
}

#[test]
fn weighted_run_is_the_conjugated_linear_run() {
    let s = reference_compliant::<f64>().unwrap();
    let grid = UniformGrid::spanning(-60.0, 120.0, 1801).unwrap();
    let xs = grid.points();
    for bump in ProbeBump::ALL {
        let weighted = s
            .run_config(Mode::WeightedLinear, bump, grid, 5.0, 0.01)
            .unwrap();
        let w0 = weighted.initial.sample(&grid).unwrap();
        let v0 = w0
            .iter()
            .zip(&xs)
            .map(|(w, &x)| *w * s.weight.phi(0.0, x).value.exp())
            .collect();
        let mut linear = s
            .run_config(Mode::LinearAtAnsatz, bump, grid, 5.0, 0.01)
            .unwrap();
        linear.initial = InitialCondition::Samples(v0);
        let fw = simulate(&weighted).unwrap();
        let fv = simulate(&linear).unwrap();
        let back: Vec<_> = fv
            .last_row()
            .iter()
            .zip(&xs)
            .map(|(v, &x)| *v * (-s.weight.phi(5.0, x).value).exp())
            .collect();
        let diff: Vec<_> = fw
            .last_row()
            .iter()
            .zip(&back)
            .map(|(a, b)| *a - *b)
            .collect();
        let rel = l2_norm(&diff, grid.step) / l2_norm(fw.last_row(), grid.step);
        assert!(rel < 1e-4, "{}: {rel}", bump.label());
    }
}

#[test]
fn norms_match_the_stored_rows() {
    let cfg = Preset::Fig2Left.config::<f64>().unwrap();
    let mut cfg = ScenarioConfig {
        domain: UniformGrid::spanning(-100.0, 100.0, 2001).unwrap(),
        t_end: 1.0,
        ..cfg
    };
    cfg.snapshot_every = 10;
    let f = simulate(&cfg).unwrap();
    assert_eq!(f.len(), 11);
    for i in 0..f.len() {
        assert!((l2_norm(f.row(i), f.grid.step) - f.norms[i]).abs() <= 1e-12 * f.norms[i]);
    }
    assert_eq!(f.t_grid[5], 0.5);
}

fn speeds_at(dx: f64, dt: f64) -> (f64, f64) {
    let base = Preset::Fig2Left.config::<f64>().unwrap();
    let n = (300.0 / dx).round() as usize + 1;
    let mut cfg = ScenarioConfig {
        domain: UniformGrid::spanning(-150.0, 150.0, n).unwrap(),
        t_end: 20.0,
        dt,
        ..base
    };
    cfg.snapshot_every = (0.5 / dt).round() as usize;
    let f = simulate(&cfg).unwrap();
    (
        f.interface_speed(0, 10.0, 20.0).unwrap().0,
        f.interface_speed(1, 10.0, 20.0).unwrap().0,
    )
}

#[test]
fn interface_speeds_converge_under_refinement() {
    let coarse = speeds_at(0.1, 0.02);
    let fine = speeds_at(0.05, 0.01);
    assert!(
        ((coarse.0 - fine.0) / fine.0).abs() < 0.02,
        "{coarse:?} {fine:?}"
    );
    assert!(
        ((coarse.1 - fine.1) / fine.1).abs() < 0.02,
        "{coarse:?} {fine:?}"
    );
}

#[test]
fn cutoff_residual_lives_on_the_glue_zone() {
    let s = reference_compliant::<f64>().unwrap();
    let p = s.params;
    let mut ts = Vec::new();
    let mut logs = Vec::new();
    for t in [0.0, 2.0, 4.0, 6.0, 8.0] {
        let c0t = s.spec.c0 * t;
        let xs: Vec<f64> = (0..=20000).map(|i| -100.0 + 0.02 * i as f64).collect();
        let r = residual_field(&s.spec, t, &xs, &p, ResidualVariant::Cutoff);
        let (mut inner, mut outer) = (0.0f64, 0.0f64);
        for (x, v) in xs.iter().zip(&r) {
            let z = (x - c0t).abs();
            if z <= 1.0 {
                inner = inner.max(v.norm_inf());
            } else if z > 5.0 {
                outer = outer.max(v.norm_inf());
            }
        }
        assert!(outer < 1e-5, "t = {t}: {outer}");
        ts.push(t);
        logs.push(inner.ln());
    }
    let (slope, _, r2) = linear_fit(&ts, &logs).unwrap();
    assert!(slope < -0.5 && r2 > 0.95, "{slope} {r2}");
}

#[test]
fn weighted_residual_grows() {
    let s = reference_compliant::<f64>().unwrap();
    let ts = [0.0, 2.0, 4.0, 6.0, 8.0];
    let logs: Vec<f64> = ts
        .iter()
        .map(|&t| {
            let c0t = s.spec.c0 * t;
            let xs: Vec<f64> = (0..=200).map(|i| c0t - 1.0 + 0.01 * i as f64).collect();
            weighted_residual_sup(
                &s.spec,
                &s.weight,
                t,
                &xs,
                &s.params,
                ResidualVariant::Cutoff,
            )
            .ln()
        })
        .collect();
    let (slope, _, _) = linear_fit(&ts, &logs).unwrap();
    assert!(slope > 0.0, "{slope}");
}

#[test]
fn single_front_residual_is_the_profile_residual() {
    let s = reference_compliant::<f64>().unwrap();
    let e3 = StatePoint::new(1.0, 0.0);
    let mut p2 = s.spec.p2.clone();
    p2.values.iter_mut().for_each(|v| *v = e3);
    p2.left_state = e3;
    p2.right_state = e3;
    let spec = SuperpositionSpec::new(s.spec.p1.clone(), p2, -60.0, 60.0).unwrap();
    let xs: Vec<f64> = (2..spec.p1.len() - 2)
        .map(|i| spec.psi1 + spec.p1.xi(i))
        .collect();
    for variant in [ResidualVariant::Cutoff, ResidualVariant::Additive] {
        let r = residual_field(&spec, 0.0, &xs, &s.params, variant);
        let sup = r.iter().map(|v| v.norm_inf()).fold(0.0, f64::max);
        assert!(sup <= 1e-6, "{variant:?}: {sup}");
    }
}

#[test]
fn quadratic_remainder_matches_direct_evaluation() {
    let p = fig_params();
    let e3 = StatePoint::new(1.0, 0.0);
    assert_eq!(
        quadratic_remainder(e3, StatePoint::zero(), &p),
        StatePoint::zero()
    );
    let direct = |ubar: StatePoint<f64>, v: StatePoint<f64>| {
        reaction(ubar + v, &p) - reaction(ubar, &p) - jacobian(ubar, &p).apply(v)
    };
    for (ubar, v) in [
        (e3, StatePoint::new(0.0, 1e-3)),
        (StatePoint::new(0.3, 0.7), StatePoint::new(-0.2, 0.5)),
        (StatePoint::new(1.9, 2.4), StatePoint::new(0.01, -0.03)),
    ] {
        let q = quadratic_remainder(ubar, v, &p);
        assert!((q - direct(ubar, v)).norm_inf() < 1e-14);
        let q2 = quadratic_remainder(ubar, v * 2.0, &p);
        assert!((q2 - q * 4.0).norm_inf() < 1e-14);
    }
    let q = quadratic_remainder(e3, StatePoint::new(0.0, 1e-3), &p);
    assert!((q.u2 + 1e-6).abs() < 1e-18 && q.u1 == 0.0);
}
