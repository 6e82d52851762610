//! Damped Newton for `D p'' + c p' + g(p) = 0` on a truncated line.
//!
//! Left end: Dirichlet on both components. Right end, per component:
//! Dirichlet when `J_kk` at the right state is negative, no condition
//! otherwise. Each dropped right-end row is replaced by a phase condition
//! pinning a component's midpoint value at `xi = 0`: the first component
//! always, the second one as well when both are unstable at the right
//! state (there the fronts form a one-parameter family and the member
//! with co-located midpoints is selected). Rows are ordered by their grid
//! anchor so the Jacobian stays banded.

use crate::error::{Error, Result};
use crate::linalg::BandMatrix;
use crate::model::StatePoint;
use crate::Real;

use super::{FrontModel, UniformGrid};

const MAX_ITERATIONS: usize = 200;
const MAX_HALVINGS: usize = 30;
const TOLERANCE: f64 = 1e-10;

pub(crate) struct Solution<T> {
    pub values: Vec<StatePoint<T>>,
    pub free_component: usize,
}

#[derive(Debug, Clone, Copy)]
enum Row<T> {
    Fixed {
        node: usize,
        k: usize,
        value: T,
    },
    Interior {
        node: usize,
        k: usize,
    },
    Phase {
        node: usize,
        k: usize,
        theta: T,
        value: T,
    },
}

struct Problem<'a, T> {
    model: &'a FrontModel<T>,
    c: T,
    grid: UniformGrid<T>,
    rows: Vec<Row<T>>,
}

#[inline]
fn var(node: usize, k: usize) -> usize {
    2 * node + k
}

pub(crate) fn solve<T: Real>(
    model: &FrontModel<T>,
    c: T,
    left: StatePoint<T>,
    right: StatePoint<T>,
    grid: UniformGrid<T>,
    frozen: [bool; 2],
) -> Result<Solution<T>> {
    let n = grid.len;
    let diff = model.diffusion();
    let jr = model.jacobian(right).diagonal();

    // right-end classification
    let mut rates: [Option<T>; 2] = [None, None];
    for k in 0..2 {
        if !frozen[k] && jr[k] >= T::zero() {
            let disc = (c * c - T::of(4.0) * diff[k] * jr[k]).max(T::zero());
            rates[k] = Some((c - disc.sqrt()) / (diff[k] + diff[k]));
        }
    }
    let free = match (rates[0], rates[1]) {
        (Some(a), Some(b)) => usize::from(b < a),
        (Some(_), None) => 0,
        (None, Some(_)) => 1,
        (None, None) => {
            return Err(Error::UnsupportedEndpoints(
                "right state has no unstable direction to leave free".into(),
            ))
        }
    };

    let (pj, ptheta) = grid
        .locate(T::zero())
        .ok_or_else(|| Error::Mismatch("grid does not contain the origin".into()))?;

    let mut rows = Vec::with_capacity(2 * n);
    for node in 0..n {
        for k in 0..2 {
            if frozen[k] || node == 0 {
                rows.push(Row::Fixed {
                    node,
                    k,
                    value: left.get(k),
                });
            } else if node + 1 < n {
                rows.push(Row::Interior { node, k });
            } else if k == free {
                continue;
            } else if rates[k].is_some() {
                // node at both ends: a one-parameter family of fronts,
                // selected by a second phase condition below
                continue;
            } else {
                rows.push(Row::Fixed {
                    node,
                    k,
                    value: right.get(k),
                });
            }
        }
        if node == pj {
            for k in 0..2 {
                if k == 0 || (rates[0].is_some() && rates[1].is_some()) {
                    let value = (left.get(k) + right.get(k)) * T::of(0.5);
                    rows.push(Row::Phase {
                        node: pj,
                        k,
                        theta: ptheta,
                        value,
                    });
                }
            }
        }
    }
    debug_assert_eq!(rows.len(), 2 * n);

    let prob = Problem {
        model,
        c,
        grid,
        rows,
    };

    // tanh initial guess, each component with the width of its slow tail
    let width = |k: usize| {
        let kappa = rates[k]
            .or(rates[free])
            .unwrap_or(T::one())
            .max(T::of(1e-3));
        (T::of(2.0) / kappa).max(T::one()).min(T::of(20.0))
    };
    let widths = [width(0), width(1)];
    let mut u: Vec<T> = vec![T::zero(); 2 * n];
    for i in 0..n {
        for k in 0..2 {
            let s = (T::one() + (grid.point(i) / widths[k]).tanh()) * T::of(0.5);
            u[var(i, k)] = if frozen[k] {
                left.get(k)
            } else {
                left.get(k) + (right.get(k) - left.get(k)) * s
            };
        }
    }

    let h = grid.step;
    let coef = diff[0].max(diff[1]) / (h * h) + c.abs() / h;
    let tol = T::of(TOLERANCE).max(T::of(100.0) * T::epsilon() * coef);

    let mut f = prob.residual(&u);
    let mut fnorm = sup(&f);
    let mut trial = vec![T::zero(); u.len()];
    for it in 0..MAX_ITERATIONS {
        if fnorm < tol {
            return Ok(Solution {
                values: (0..n)
                    .map(|i| StatePoint::new(u[var(i, 0)], u[var(i, 1)]))
                    .collect(),
                free_component: free,
            });
        }
        let jac = prob.jacobian(&u);
        let lu = jac.factor()?;
        let mut delta: Vec<T> = f.iter().map(|v| -*v).collect();
        lu.solve_in_place(&mut delta);
        let mut lambda = T::one();
        let mut accepted = false;
        for _ in 0..=MAX_HALVINGS {
            for ((t, a), b) in trial.iter_mut().zip(&u).zip(&delta) {
                *t = *a + lambda * *b;
            }
            let ft = prob.residual(&trial);
            let tn = sup(&ft);
            if tn.is_finite() && tn < fnorm {
                std::mem::swap(&mut u, &mut trial);
                f = ft;
                fnorm = tn;
                accepted = true;
                break;
            }
            lambda *= T::of(0.5);
        }
        if !accepted {
            return Err(Error::NewtonDivergence {
                iterations: it + 1,
                residual: fnorm.to_f64_lossy(),
            });
        }
    }
    Err(Error::NewtonDivergence {
        iterations: MAX_ITERATIONS,
        residual: fnorm.to_f64_lossy(),
    })
}

fn sup<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |m, x| {
        if x.is_nan() {
            T::nan()
        } else {
            m.max(x.abs())
        }
    })
}

impl<T: Real> Problem<'_, T> {
    fn state(&self, u: &[T], node: usize) -> StatePoint<T> {
        StatePoint::new(u[var(node, 0)], u[var(node, 1)])
    }

    fn residual(&self, u: &[T]) -> Vec<T> {
        let h = self.grid.step;
        let diff = self.model.diffusion();
        let inv_h2 = T::one() / (h * h);
        let half_h = T::of(0.5) / h;
        self.rows
            .iter()
            .map(|row| match *row {
                Row::Fixed { node, k, value } => u[var(node, k)] - value,
                Row::Interior { node, k } => {
                    let (a, b, c) = (u[var(node - 1, k)], u[var(node, k)], u[var(node + 1, k)]);
                    let g = self.model.reaction(self.state(u, node)).get(k);
                    diff[k] * (c - b - b + a) * inv_h2 + self.c * (c - a) * half_h + g
                }
                Row::Phase {
                    node,
                    k,
                    theta,
                    value,
                } => u[var(node, k)] * (T::one() - theta) + u[var(node + 1, k)] * theta - value,
            })
            .collect()
    }

    fn jacobian(&self, u: &[T]) -> BandMatrix<T> {
        let h = self.grid.step;
        let diff = self.model.diffusion();
        let inv_h2 = T::one() / (h * h);
        let half_h = T::of(0.5) / h;
        let mut entries = Vec::with_capacity(self.rows.len() * 4);
        for (r, row) in self.rows.iter().enumerate() {
            match *row {
                Row::Fixed { node, k, .. } => entries.push((r, var(node, k), T::one())),
                Row::Interior { node, k } => {
                    let jac = self.model.jacobian(self.state(u, node));
                    let (jkk, jko) = match k {
                        0 => (jac.a11, jac.a12),
                        _ => (jac.a22, jac.a21),
                    };
                    entries.push((r, var(node - 1, k), diff[k] * inv_h2 - self.c * half_h));
                    entries.push((r, var(node, k), -(diff[k] + diff[k]) * inv_h2 + jkk));
                    entries.push((r, var(node + 1, k), diff[k] * inv_h2 + self.c * half_h));
                    if jko != T::zero() {
                        entries.push((r, var(node, 1 - k), jko));
                    }
                }
                Row::Phase { node, k, theta, .. } => {
                    entries.push((r, var(node, k), T::one() - theta));
                    entries.push((r, var(node + 1, k), theta));
                }
            }
        }
        BandMatrix::from_triplets(2 * self.grid.len, &entries)
    }
}
