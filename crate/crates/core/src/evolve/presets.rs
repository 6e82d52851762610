use crate::error::{invalid, Result};
use crate::fronts::{linear_fit, UniformGrid};
use crate::model::{equilibria, ModelParams, StatePoint};
use crate::Real;

use super::{Bump, InitialCondition, Mode, ScenarioConfig, Segment, SpaceTimeField};

/// Level crossings of the two components closer than this count as one
/// interface.
pub const INTERFACE_MERGE_WIDTH: f64 = 2.0;

/// Step-data scenarios for the `figure` runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// `e3` on `(-50, 50)`, `e4` elsewhere, small `u2` bump at the origin.
    Fig1,
    /// `e1` on `(-50, 50)`, `e4` elsewhere.
    Fig2Left,
    /// `e1` on `(-10, 10)`, `e3` on `(-40, 40) \ (-10, 10)`, `e4` elsewhere,
    /// with `d = 0.2`.
    Fig2Right,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::Fig1, Preset::Fig2Left, Preset::Fig2Right];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig1 => "fig1",
            Preset::Fig2Left => "fig2-left",
            Preset::Fig2Right => "fig2-right",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == s.trim())
            .ok_or_else(|| {
                invalid(
                    "preset",
                    format!("unknown preset `{s}` (fig1, fig2-left, fig2-right)"),
                )
            })
    }

    pub fn params<T: Real>(self) -> ModelParams<T> {
        let d = match self {
            Preset::Fig2Right => 0.2,
            _ => 4.0,
        };
        ModelParams::new(T::of(d), T::of(2.0), T::of(0.75), T::of(0.75))
            .expect("preset parameters are valid")
    }

    pub fn t_end(self) -> f64 {
        match self {
            Preset::Fig2Right => 40.0,
            _ => 30.0,
        }
    }

    pub fn config<T: Real>(self) -> Result<ScenarioConfig<T>> {
        let p = self.params::<T>();
        let eq = equilibria(&p)?;
        let seg = |lo: f64, hi: f64, state: StatePoint<T>| Segment {
            lo: T::of(lo),
            hi: T::of(hi),
            state,
        };
        let (segments, bumps) = match self {
            Preset::Fig1 => (
                vec![seg(-50.0, 50.0, eq.e3)],
                vec![Bump {
                    center: T::zero(),
                    width: T::one(),
                    amplitude: StatePoint::new(T::zero(), T::of(0.01)),
                }],
            ),
            Preset::Fig2Left => (vec![seg(-50.0, 50.0, eq.e1)], vec![]),
            Preset::Fig2Right => (
                vec![seg(-40.0, 40.0, eq.e3), seg(-10.0, 10.0, eq.e1)],
                vec![],
            ),
        };
        let initial = InitialCondition::Steps {
            background: eq.e4,
            segments,
            bumps,
        };
        let grid = UniformGrid::spanning(T::of(-300.0), T::of(300.0), 12_001)?;
        let mut cfg = ScenarioConfig::new(
            p,
            Mode::Nonlinear,
            initial,
            grid,
            T::of(self.t_end()),
            T::of(0.01),
        );
        cfg.snapshot_every = 20;
        Ok(cfg)
    }
}

/// Snapshots before this time are ignored by the separation checks.
pub const FIGURE_TRANSIENT: f64 = 5.0;

/// Slack for "non-increasing" separation between snapshots.
pub const SEPARATION_SLACK: f64 = 0.05;

/// Outcome of one qualitative check on a figure run.
#[derive(Debug, Clone, PartialEq)]
pub struct FigureCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> FigureCheck {
    FigureCheck {
        name,
        passed,
        detail,
    }
}

/// `(t, |x_u1 - x_u2|)` for snapshots at or after `t0`.
fn abs_separation<T: Real>(field: &SpaceTimeField<T>, t0: f64) -> Vec<(f64, f64)> {
    field
        .t_grid
        .iter()
        .zip(field.separation())
        .filter_map(|(t, s)| {
            let t = t.to_f64_lossy();
            (t >= t0).then_some(())?;
            Some((t, s?.to_f64_lossy().abs()))
        })
        .collect()
}

/// The qualitative checks of a figure preset on its run.
pub fn figure_checks<T: Real>(
    preset: Preset,
    field: &SpaceTimeField<T>,
    p: &ModelParams<T>,
) -> Vec<FigureCheck> {
    let t_end = field.t_grid.last().map_or(0.0, |t| t.to_f64_lossy());
    let counts = field.interface_counts(T::of(INTERFACE_MERGE_WIDTH));
    let first = counts.first().copied().unwrap_or(0);
    let last = counts.last().copied().unwrap_or(0);
    match preset {
        Preset::Fig1 => {
            let window = (T::of(10.0_f64.min(t_end / 2.0)), T::of(t_end));
            let speed = |k| {
                field
                    .interface_speed(k, window.0, window.1)
                    .map(|(s, _)| s.to_f64_lossy())
            };
            let (s1, s2) = (speed(0), speed(1));
            let pulled = (p.d * p.r).sqrt().to_f64_lossy() * 2.0;
            let mut out = vec![check(
                "two_interfaces",
                last == 2,
                format!("final interface count {last}"),
            )];
            match (s1, s2) {
                (Some(a), Some(b)) => {
                    let (lead, trail) = (a.max(b), a.min(b));
                    let rel = (lead - pulled).abs() / pulled;
                    out.push(check(
                        "leading_speed",
                        rel < 0.1,
                        format!("leading speed {lead:.4} vs 2 sqrt(dr) = {pulled:.4} (relative {rel:.4})"),
                    ));
                    out.push(check(
                        "speed_gap",
                        lead - trail > 0.5,
                        format!("trailing speed {trail:.4}, gap {:.4}", lead - trail),
                    ));
                }
                _ => {
                    out.push(check(
                        "leading_speed",
                        false,
                        "interfaces not tracked".into(),
                    ));
                    out.push(check("speed_gap", false, "interfaces not tracked".into()));
                }
            }
            out
        }
        Preset::Fig2Left => {
            let sep = abs_separation(field, t_end / 2.0);
            let (ts, ss): (Vec<f64>, Vec<f64>) = sep.iter().copied().unzip();
            let slope = linear_fit(&ts, &ss).map(|(s, _, _)| s);
            vec![
                check(
                    "breakup",
                    first == 1 && last == 2,
                    format!("interface count {first} -> {last}"),
                ),
                check(
                    "separation_increasing",
                    slope.is_some_and(|s| s > 0.0),
                    format!(
                        "separation slope {:.4} on the second half",
                        slope.unwrap_or(f64::NAN)
                    ),
                ),
            ]
        }
        Preset::Fig2Right => {
            let sep = abs_separation(field, FIGURE_TRANSIENT);
            let worst = sep
                .windows(2)
                .map(|w| w[1].1 - w[0].1)
                .fold(f64::NEG_INFINITY, f64::max);
            let at_min =
                sep.iter().copied().fold(
                    (f64::NAN, f64::INFINITY),
                    |m, v| if v.1 < m.1 { v } else { m },
                );
            let final_sep = sep.last().map_or(f64::NAN, |v| v.1);
            vec![
                check(
                    "separation_non_increasing",
                    !sep.is_empty() && worst <= SEPARATION_SLACK,
                    format!(
                        "largest increase {worst:.4} between snapshots; minimum {:.4} at t = {:.2}",
                        at_min.1, at_min.0
                    ),
                ),
                check(
                    "final_single_interface",
                    last == 1,
                    format!("final interface count {last}, separation {final_sep:.4}"),
                ),
            ]
        }
    }
}
