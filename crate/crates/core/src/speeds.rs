//! Speed-pair feasibility: the convective-stability inequalities for the
//! rates `(kappa1, kappa2)` and the interaction constraint linking them.
//!
//! With `p = (d, r, alpha1, alpha2)`:
//!
//! ```text
//! (a1)  kappa1^2 - c1 kappa1 + (1 + alpha2) < 0
//! (a2)  d kappa1^2 - c1 kappa1 - r          < 0
//! (b)   d kappa2^2 - c2 kappa2 + r          < 0
//! (c)   d kappa2^2 - c2 kappa2 + r + kappa1 (c2 - c1) < 0
//! ```

use std::fmt;

use crate::error::{invalid, Result};
use crate::io::fmt_real;
use crate::model::ModelParams;
use crate::Real;

/// Inward nudge applied to the infimum of the `kappa1` interval.
pub const KAPPA1_NUDGE: f64 = 1e-6;

/// Open interval `(lo, hi)`; empty unless `lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval<T> {
    pub lo: T,
    pub hi: T,
}

impl<T: Real> Interval<T> {
    pub fn new(lo: T, hi: T) -> Self {
        Self { lo, hi }
    }

    pub fn empty() -> Self {
        Self {
            lo: T::nan(),
            hi: T::nan(),
        }
    }

    pub fn is_empty(&self) -> bool {
        !(self.lo < self.hi)
    }

    pub fn contains(&self, x: T) -> bool {
        !self.is_empty() && self.lo < x && x < self.hi
    }

    pub fn intersect(&self, o: &Self) -> Self {
        if self.is_empty() || o.is_empty() {
            return Self::empty();
        }
        let r = Self::new(self.lo.max(o.lo), self.hi.min(o.hi));
        if r.is_empty() {
            Self::empty()
        } else {
            r
        }
    }

    pub fn width(&self) -> T {
        if self.is_empty() {
            T::zero()
        } else {
            self.hi - self.lo
        }
    }
}

impl<T: Real> fmt::Display for Interval<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            write!(f, "empty")
        } else {
            write!(f, "({}, {})", self.lo, self.hi)
        }
    }
}

/// Open root interval of `a k^2 - b k + c`, `a > 0`.
fn sublevel<T: Real>(a: T, b: T, c: T) -> Interval<T> {
    let disc = b * b - T::of(4.0) * a * c;
    if !(disc > T::zero()) {
        return Interval::empty();
    }
    let s = disc.sqrt();
    Interval::new((b - s) / (a + a), (b + s) / (a + a))
}

/// Which constant enters the first inequality of (a).
///
/// The default uses `1 + alpha2`; the `1 + alpha1` form appears in the
/// large-speed feasibility estimate. Both are available so that scans
/// can report where they disagree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum A1Variant {
    #[default]
    OnePlusAlpha2,
    OnePlusAlpha1,
}

impl A1Variant {
    fn constant<T: Real>(self, p: &ModelParams<T>) -> T {
        match self {
            A1Variant::OnePlusAlpha2 => T::one() + p.alpha2,
            A1Variant::OnePlusAlpha1 => T::one() + p.alpha1,
        }
    }
}

/// Rates `kappa1` satisfying both inequalities of (a).
pub fn kappa1_interval<T: Real>(c1: T, p: &ModelParams<T>) -> Interval<T> {
    kappa1_interval_variant(c1, p, A1Variant::default())
}

pub fn kappa1_interval_variant<T: Real>(c1: T, p: &ModelParams<T>, v: A1Variant) -> Interval<T> {
    let first = sublevel(T::one(), c1, v.constant(p));
    let second = sublevel(p.d, c1, -p.r);
    first.intersect(&second)
}

/// Rates `kappa2` satisfying (b); empty iff `c2 <= 2 sqrt(d r)`.
pub fn kappa2_interval<T: Real>(c2: T, d: T, r: T) -> Interval<T> {
    // compare speeds directly so the threshold itself rounds to empty
    if !(c2 > T::of(2.0) * (d * r).sqrt()) {
        return Interval::empty();
    }
    sublevel(d, c2, r)
}

/// Left-hand sides of the four inequalities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Margins<T> {
    pub a1: T,
    pub a2: T,
    pub b: T,
    pub c: T,
}

impl<T: Real> Margins<T> {
    pub fn evaluate(c1: T, c2: T, kappa1: T, kappa2: T, p: &ModelParams<T>) -> Self {
        Self::evaluate_variant(c1, c2, kappa1, kappa2, p, A1Variant::default())
    }

    pub fn evaluate_variant(c1: T, c2: T, k1: T, k2: T, p: &ModelParams<T>, v: A1Variant) -> Self {
        let b = p.d * k2 * k2 - c2 * k2 + p.r;
        Self {
            a1: k1 * k1 - c1 * k1 + v.constant(p),
            a2: p.d * k1 * k1 - c1 * k1 - p.r,
            b,
            c: b + k1 * (c2 - c1),
        }
    }

    pub fn all_negative(&self) -> bool {
        self.a1 < T::zero() && self.a2 < T::zero() && self.b < T::zero() && self.c < T::zero()
    }

    /// First inequality that fails, in the order a1, a2, b, c.
    pub fn first_failure(&self) -> Option<(Inequality, T)> {
        [
            (Inequality::A1, self.a1),
            (Inequality::A2, self.a2),
            (Inequality::B, self.b),
            (Inequality::C, self.c),
        ]
        .into_iter()
        .find(|(_, m)| !(*m < T::zero()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Inequality {
    A1,
    A2,
    B,
    C,
}

impl Inequality {
    pub fn label(self) -> &'static str {
        match self {
            Inequality::A1 => "a1 (slow front, first)",
            Inequality::A2 => "a2 (slow front, second)",
            Inequality::B => "b (fast front)",
            Inequality::C => "c (interaction)",
        }
    }
}

/// A verified tuple `(c1, c2, kappa1, kappa2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedCertificate<T> {
    pub c1: T,
    pub c2: T,
    pub kappa1: T,
    pub kappa2: T,
    pub margins: Margins<T>,
}

impl<T: Real> SpeedCertificate<T> {
    /// Evaluates the inequalities at the given rates; `Err` names the first
    /// failure.
    pub fn verify(
        c1: T,
        c2: T,
        kappa1: T,
        kappa2: T,
        p: &ModelParams<T>,
    ) -> std::result::Result<Self, Infeasible<T>> {
        let margins = Margins::evaluate(c1, c2, kappa1, kappa2, p);
        match margins.first_failure() {
            None if c1 < c2 && kappa1 > T::zero() && kappa2 > T::zero() => Ok(Self {
                c1,
                c2,
                kappa1,
                kappa2,
                margins,
            }),
            None => Err(Infeasible {
                failed: Inequality::C,
                margin: margins.c,
                kappa1: Some(kappa1),
                kappa2: Some(kappa2),
            }),
            Some((failed, margin)) => Err(Infeasible {
                failed,
                margin,
                kappa1: Some(kappa1),
                kappa2: Some(kappa2),
            }),
        }
    }
}

/// Why no certificate exists: the first failing inequality and its
/// smallest attainable left-hand side under the selection rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Infeasible<T> {
    pub failed: Inequality,
    pub margin: T,
    pub kappa1: Option<T>,
    pub kappa2: Option<T>,
}

impl<T: Real> fmt::Display for Infeasible<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "infeasible at {} (margin {:+.6})",
            self.failed.label(),
            self.margin
        )
    }
}

pub type Verdict<T> = std::result::Result<SpeedCertificate<T>, Infeasible<T>>;

/// Builds a certificate for `(c1, c2)`.
///
/// `kappa1` defaults to the infimum of [`kappa1_interval`] nudged inward;
/// `kappa2` is the vertex `c2 / (2 d)` of the (b)/(c) quadratics, clamped
/// into [`kappa2_interval`].
pub fn certificate<T: Real>(
    c1: T,
    c2: T,
    p: &ModelParams<T>,
    kappa1: Option<T>,
) -> Result<Verdict<T>> {
    certificate_variant(c1, c2, p, kappa1, A1Variant::default())
}

pub fn certificate_variant<T: Real>(
    c1: T,
    c2: T,
    p: &ModelParams<T>,
    kappa1: Option<T>,
    v: A1Variant,
) -> Result<Verdict<T>> {
    if !(c1.is_finite() && c2.is_finite()) {
        return Err(invalid("c", "speeds must be finite"));
    }
    if !(c1 < c2) {
        return Err(invalid("c1", format!("need c1 < c2, got ({c1}, {c2})")));
    }
    let i1 = kappa1_interval_variant(c1, p, v);
    let k1 = match kappa1 {
        Some(k) => {
            let m = Margins::evaluate_variant(c1, c2, k, T::one(), p, v);
            if !(m.a1 < T::zero()) {
                return Ok(Err(Infeasible {
                    failed: Inequality::A1,
                    margin: m.a1,
                    kappa1: Some(k),
                    kappa2: None,
                }));
            }
            if !(m.a2 < T::zero()) {
                return Ok(Err(Infeasible {
                    failed: Inequality::A2,
                    margin: m.a2,
                    kappa1: Some(k),
                    kappa2: None,
                }));
            }
            k
        }
        None => {
            if i1.is_empty() {
                return Ok(Err(empty_a_report(c1, p, v)));
            }
            let nudge = T::of(KAPPA1_NUDGE);
            if i1.width() > nudge + nudge {
                i1.lo + nudge
            } else {
                (i1.lo + i1.hi) * T::of(0.5)
            }
        }
    };
    let i2 = kappa2_interval(c2, p.d, p.r);
    let vertex = c2 / (p.d + p.d);
    if i2.is_empty() {
        let b = p.d * vertex * vertex - c2 * vertex + p.r;
        return Ok(Err(Infeasible {
            failed: Inequality::B,
            margin: b,
            kappa1: Some(k1),
            kappa2: Some(vertex),
        }));
    }
    let k2 = vertex.max(i2.lo).min(i2.hi);
    let margins = Margins::evaluate_variant(c1, c2, k1, k2, p, v);
    match margins.first_failure() {
        None => Ok(Ok(SpeedCertificate {
            c1,
            c2,
            kappa1: k1,
            kappa2: k2,
            margins,
        })),
        Some((failed, margin)) => Ok(Err(Infeasible {
            failed,
            margin,
            kappa1: Some(k1),
            kappa2: Some(k2),
        })),
    }
}

fn empty_a_report<T: Real>(c1: T, p: &ModelParams<T>, v: A1Variant) -> Infeasible<T> {
    let first = sublevel(T::one(), c1, v.constant(p));
    if first.is_empty() {
        // minimum of k^2 - c1 k + const
        let margin = v.constant(p) - c1 * c1 / T::of(4.0);
        return Infeasible {
            failed: Inequality::A1,
            margin,
            kappa1: Some(c1 * T::of(0.5)),
            kappa2: None,
        };
    }
    // the sublevel sets are disjoint: report (a2) at the closest point
    let k = first.lo;
    let margin = p.d * k * k - c1 * k - p.r;
    Infeasible {
        failed: Inequality::A2,
        margin,
        kappa1: Some(k),
        kappa2: None,
    }
}

/// One grid point of a region scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionCell<T> {
    pub c1: T,
    pub c2: T,
    pub feasible: bool,
    pub fail_a: bool,
    pub fail_b: bool,
    pub fail_c: bool,
    pub kappa1: Option<T>,
    pub kappa2: Option<T>,
    pub margin_c: Option<T>,
    /// Verdict with `1 + alpha1` in the first inequality of (a).
    pub feasible_alpha1_variant: bool,
}

impl<T> RegionCell<T> {
    /// (a) and (b) hold but the interaction constraint (c) fails.
    pub fn interaction_excluded(&self) -> bool {
        !self.fail_a && !self.fail_b && self.fail_c
    }

    pub fn variants_disagree(&self) -> bool {
        self.feasible != self.feasible_alpha1_variant
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionScan<T> {
    pub c1_grid: Vec<T>,
    pub c2_grid: Vec<T>,
    /// Row-major: `cells[i * c2_grid.len() + j]` is `(c1_grid[i], c2_grid[j])`.
    pub cells: Vec<RegionCell<T>>,
}

impl<T: Real> RegionScan<T> {
    pub fn cell(&self, i: usize, j: usize) -> &RegionCell<T> {
        &self.cells[i * self.c2_grid.len() + j]
    }

    pub fn feasible_matrix(&self) -> Vec<Vec<bool>> {
        self.cells
            .chunks(self.c2_grid.len())
            .map(|row| row.iter().map(|c| c.feasible).collect())
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(
            "c1,c2,feasible,fail_a,fail_b,fail_c,kappa1,kappa2,margin_c,feasible_alpha1_variant\n",
        );
        let opt = |v: Option<T>| v.map(fmt_real).unwrap_or_default();
        let b = |v: bool| if v { "1" } else { "0" };
        for c in &self.cells {
            s.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                fmt_real(c.c1),
                fmt_real(c.c2),
                b(c.feasible),
                b(c.fail_a),
                b(c.fail_b),
                b(c.fail_c),
                opt(c.kappa1),
                opt(c.kappa2),
                opt(c.margin_c),
                b(c.feasible_alpha1_variant),
            ));
        }
        s
    }
}

fn scan_cell<T: Real>(c1: T, c2: T, p: &ModelParams<T>) -> RegionCell<T> {
    let mut cell = RegionCell {
        c1,
        c2,
        feasible: false,
        fail_a: false,
        fail_b: false,
        fail_c: false,
        kappa1: None,
        kappa2: None,
        margin_c: None,
        feasible_alpha1_variant: false,
    };
    if !(c1 < c2) {
        return cell;
    }
    cell.fail_a = kappa1_interval(c1, p).is_empty();
    cell.fail_b = kappa2_interval(c2, p.d, p.r).is_empty();
    match certificate(c1, c2, p, None) {
        Ok(Ok(cert)) => {
            cell.feasible = true;
            cell.kappa1 = Some(cert.kappa1);
            cell.kappa2 = Some(cert.kappa2);
            cell.margin_c = Some(cert.margins.c);
        }
        Ok(Err(rep)) => {
            cell.kappa1 = rep.kappa1;
            cell.kappa2 = rep.kappa2;
            if rep.failed == Inequality::C {
                cell.fail_c = true;
                cell.margin_c = Some(rep.margin);
            }
        }
        Err(_) => {}
    }
    cell.feasible_alpha1_variant = matches!(
        certificate_variant(c1, c2, p, None, A1Variant::OnePlusAlpha1),
        Ok(Ok(_))
    );
    cell
}

/// Feasibility over a `(c1, c2)` grid; pairs with `c1 >= c2` are marked
/// infeasible without failure flags.
pub fn region_scan<T: Real>(
    c1_grid: &[T],
    c2_grid: &[T],
    p: &ModelParams<T>,
) -> Result<RegionScan<T>> {
    for (name, g) in [("c1_grid", c1_grid), ("c2_grid", c2_grid)] {
        if g.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(invalid(name, "grid must be strictly ascending"));
        }
    }
    let mut cells = Vec::with_capacity(c1_grid.len() * c2_grid.len());
    for &c1 in c1_grid {
        for &c2 in c2_grid {
            cells.push(scan_cell(c1, c2, p));
        }
    }
    Ok(RegionScan {
        c1_grid: c1_grid.to_vec(),
        c2_grid: c2_grid.to_vec(),
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> ModelParams<f64> {
        ModelParams::new(4.0, 2.0, 0.75, 0.75).unwrap()
    }

    #[test]
    fn kappa1_examples() {
        assert!(kappa1_interval(2.0, &p()).is_empty());
        let i = kappa1_interval(3.0, &p());
        assert!((i.lo - (3.0 - 2f64.sqrt()) / 2.0).abs() < 1e-12);
        assert!((i.hi - (3.0 + 41f64.sqrt()) / 8.0).abs() < 1e-12);
        assert!((i.lo - 0.79289).abs() < 1e-5 && (i.hi - 1.17539).abs() < 1e-5);
    }

    #[test]
    fn kappa2_examples() {
        let i = kappa2_interval(6.0f64, 4.0, 2.0);
        assert!((i.lo - 0.5).abs() < 1e-15 && (i.hi - 1.0).abs() < 1e-15);
        assert!(kappa2_interval(2.0 * 8f64.sqrt(), 4.0, 2.0).is_empty());
        let c2 = 200.0f64;
        let i = kappa2_interval(c2, 4.0, 2.0);
        assert!((i.lo - 2.0 / c2).abs() < 1e-5);
        assert!((i.hi - (c2 / 4.0 - 2.0 / c2)).abs() < 1e-5);
    }

    #[test]
    fn interaction_violation_at_3_6() {
        let rep = certificate(3.0, 6.0, &p(), Some(0.8)).unwrap().unwrap_err();
        assert_eq!(rep.failed, Inequality::C);
        // min over kappa2 of 4k^2 - 6k + 2 + 0.8 * 3, attained at 0.75
        assert!((rep.margin - 2.15).abs() < 1e-12);
        assert_eq!(rep.kappa2, Some(0.75));
    }

    #[test]
    fn compliant_pair() {
        let cert = certificate(3.0, 13.2, &p(), None).unwrap().unwrap();
        assert!((cert.kappa1 - 0.7929).abs() < 1e-4);
        assert!((cert.kappa2 - 1.65).abs() < 1e-12);
        let oracle = 4.0 * 1.65f64.powi(2) - 13.2 * 1.65 + 2.0 + cert.kappa1 * 10.2;
        assert!((cert.margins.c - oracle).abs() < 1e-12);
        assert!((cert.margins.c + 0.80).abs() < 5e-3);
        assert!(cert.margins.all_negative());
        let given = SpeedCertificate::verify(3.0, 13.2, 0.793, 1.65, &p()).unwrap();
        assert!((given.margins.c + 0.8014).abs() < 1e-4);
    }

    #[test]
    fn scan_row_monotone_in_c2() {
        let c2: Vec<f64> = (0..=140).map(|i| 6.0 + 0.1 * i as f64).collect();
        let scan = region_scan(&[3.0], &c2, &p()).unwrap();
        let row = &scan.feasible_matrix()[0];
        let first = row.iter().position(|&f| f).unwrap();
        assert!(row[first..].iter().all(|&f| f));
        let low = region_scan(&[2.5], &c2, &p()).unwrap();
        assert!(low.cells.iter().all(|c| !c.feasible && c.fail_a));
        assert!(scan.cells.iter().any(|c| c.interaction_excluded()));
    }
}
