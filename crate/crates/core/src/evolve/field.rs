use crate::fronts::{linear_fit, UniformGrid};
use crate::io::{fmt_real, pgm_bytes};
use crate::model::StatePoint;
use crate::Real;

use super::{l2_norm, Mode};

/// Interface level for both components.
pub const INTERFACE_LEVEL: f64 = 0.5;

/// Snapshots of a run with their norms and interface positions.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeField<T> {
    pub mode: Mode,
    pub grid: UniformGrid<T>,
    pub t_grid: Vec<T>,
    /// Row-major, one row of `grid.len` samples per snapshot.
    pub values: Vec<StatePoint<T>>,
    /// Trapezoid L2 norm per snapshot.
    pub norms: Vec<T>,
    /// Rightmost level-0.5 crossing per component and snapshot.
    pub interfaces: Vec<[Option<T>; 2]>,
}

/// Rightmost crossing of `level` by `component`, linearly interpolated.
pub fn level_crossing_from_right<T: Real>(
    row: &[StatePoint<T>],
    grid: &UniformGrid<T>,
    component: usize,
    level: T,
) -> Option<T> {
    for i in (0..row.len().saturating_sub(1)).rev() {
        let a = row[i].get(component) - level;
        let b = row[i + 1].get(component) - level;
        if b == T::zero() {
            return Some(grid.point(i + 1));
        }
        if a * b < T::zero() {
            return Some(grid.point(i) + a / (a - b) * grid.step);
        }
    }
    None
}

impl<T: Real> SpaceTimeField<T> {
    pub fn new(grid: UniformGrid<T>, mode: Mode) -> Self {
        Self {
            mode,
            grid,
            t_grid: Vec::new(),
            values: Vec::new(),
            norms: Vec::new(),
            interfaces: Vec::new(),
        }
    }

    pub fn push(&mut self, t: T, row: &[StatePoint<T>]) {
        let level = T::of(INTERFACE_LEVEL);
        self.t_grid.push(t);
        self.values.extend_from_slice(row);
        self.norms.push(l2_norm(row, self.grid.step));
        self.interfaces.push([
            level_crossing_from_right(row, &self.grid, 0, level),
            level_crossing_from_right(row, &self.grid, 1, level),
        ]);
    }

    pub fn len(&self) -> usize {
        self.t_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t_grid.is_empty()
    }

    pub fn row(&self, i: usize) -> &[StatePoint<T>] {
        let n = self.grid.len;
        &self.values[i * n..(i + 1) * n]
    }

    pub fn last_row(&self) -> &[StatePoint<T>] {
        self.row(self.len() - 1)
    }

    pub fn x_grid(&self) -> Vec<T> {
        self.grid.points()
    }

    /// `max_t |w(t)| / |w(0)|`.
    pub fn max_growth(&self) -> T {
        let n0 = self.norms[0];
        self.norms.iter().fold(T::zero(), |m, v| m.max(*v / n0))
    }

    /// Least-squares speed of a component's interface on `[t0, t1]`
    /// with its `r^2`.
    pub fn interface_speed(&self, component: usize, t0: T, t1: T) -> Option<(T, T)> {
        let (ts, xs): (Vec<T>, Vec<T>) = self
            .t_grid
            .iter()
            .zip(&self.interfaces)
            .filter(|(t, _)| **t >= t0 && **t <= t1)
            .filter_map(|(t, f)| f[component].map(|x| (*t, x)))
            .unzip();
        if ts.len() < 3 {
            return None;
        }
        linear_fit(&ts, &xs).map(|(s, _, r2)| (s, r2))
    }

    /// `x_u1 - x_u2` per snapshot where both interfaces exist.
    pub fn separation(&self) -> Vec<Option<T>> {
        self.interfaces
            .iter()
            .map(|f| match f {
                [Some(a), Some(b)] => Some(*a - *b),
                _ => None,
            })
            .collect()
    }

    /// Distinct interfaces per snapshot: crossings closer than `merge`
    /// count once.
    pub fn interface_counts(&self, merge: T) -> Vec<usize> {
        self.interfaces
            .iter()
            .map(|f| match f {
                [Some(a), Some(b)] => {
                    if (*a - *b).abs() < merge {
                        1
                    } else {
                        2
                    }
                }
                [Some(_), None] | [None, Some(_)] => 1,
                [None, None] => 0,
            })
            .collect()
    }

    pub fn norms_csv(&self) -> String {
        let mut s = String::from("t,norm,log_norm\n");
        for (t, n) in self.t_grid.iter().zip(&self.norms) {
            s.push_str(&format!(
                "{},{},{}\n",
                fmt_real(*t),
                fmt_real(*n),
                fmt_real(n.ln())
            ));
        }
        s
    }

    pub fn interfaces_csv(&self) -> String {
        let opt = |v: Option<T>| v.map(fmt_real).unwrap_or_else(|| "nan".into());
        let mut s = String::from("t,x_interface_u1,x_interface_u2\n");
        for (t, f) in self.t_grid.iter().zip(&self.interfaces) {
            s.push_str(&format!("{},{},{}\n", fmt_real(*t), opt(f[0]), opt(f[1])));
        }
        s
    }

    fn column_stride(&self, max_columns: usize) -> usize {
        self.grid.len.div_ceil(max_columns.max(1))
    }

    /// Long-format CSV `t,x,u1,u2`, keeping every `stride`-th column where
    /// the stride caps the columns at `max_columns`.
    pub fn field_csv(&self, max_columns: usize) -> String {
        let stride = self.column_stride(max_columns);
        let mut s = String::from("t,x,u1,u2\n");
        for (i, t) in self.t_grid.iter().enumerate() {
            let row = self.row(i);
            for j in (0..self.grid.len).step_by(stride) {
                s.push_str(&format!(
                    "{},{},{},{}\n",
                    fmt_real(*t),
                    fmt_real(self.grid.point(j)),
                    fmt_real(row[j].u1),
                    fmt_real(row[j].u2)
                ));
            }
        }
        s
    }

    /// Grayscale image of one component, one pixel row per snapshot (top
    /// row `t = 0`), columns subsampled like [`Self::field_csv`].
    pub fn pgm(&self, component: usize, max_columns: usize) -> Vec<u8> {
        let stride = self.column_stride(max_columns);
        let cols: Vec<usize> = (0..self.grid.len).step_by(stride).collect();
        let mut data = Vec::with_capacity(cols.len() * self.len());
        for i in 0..self.len() {
            let row = self.row(i);
            data.extend(cols.iter().map(|&j| row[j].get(component)));
        }
        pgm_bytes(&data, cols.len(), self.len())
    }
}
