use crate::error::{invalid, Error, Result};
use crate::fronts::{linear_fit, SuperpositionSpec};
use crate::model::{reaction, ModelParams, StatePoint};
use crate::weights::WeightSpec;
use crate::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResidualVariant {
    /// `ubar = (1 - chi) p1 + chi p2` glued at `c0 t`.
    Cutoff,
    /// `ubar = p1 + p2 - e3`.
    Additive,
}

/// `R(ubar) = -ubar_t + D ubar_xx + g(ubar)` at time `t` on `xs`.
pub fn residual_field<T: Real>(
    spec: &SuperpositionSpec<T>,
    t: T,
    xs: &[T],
    p: &ModelParams<T>,
    variant: ResidualVariant,
) -> Vec<StatePoint<T>> {
    let diff = StatePoint::new(p.d, T::one());
    let e3 = StatePoint::new(T::one(), T::zero());
    xs.iter()
        .map(|&x| {
            let (u, u_t, u_xx) = match variant {
                ResidualVariant::Cutoff => {
                    let j = spec.jet(t, x);
                    (j.u, j.u_t, j.u_xx)
                }
                ResidualVariant::Additive => {
                    let (y1, y2) = spec.moving_coordinates(t, x);
                    let [a, a1, a2] = spec.p1.eval_jet(y1);
                    let [b, b1, b2] = spec.p2.eval_jet(y2);
                    (a + b - e3, -(a1 * spec.c1 + b1 * spec.c2), a2 + b2)
                }
            };
            -u_t + u_xx.hadamard(diff) + reaction(u, p)
        })
        .collect()
}

/// `max_x |R(ubar)(t, x)| exp(-phi(t, x))` over `xs`.
pub fn weighted_residual_sup<T: Real>(
    spec: &SuperpositionSpec<T>,
    w: &WeightSpec<T>,
    t: T,
    xs: &[T],
    p: &ModelParams<T>,
    variant: ResidualVariant,
) -> T {
    residual_field(spec, t, xs, p, variant)
        .iter()
        .zip(xs)
        .map(|(r, &x)| r.norm_inf() * (-w.phi(t, x).value).exp())
        .fold(T::zero(), T::max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit<T> {
    /// Minus the slope of `log |w|`.
    pub eta: T,
    /// `exp(intercept)`: the fitted `|w(t)| ~ C exp(-eta t)`.
    pub c: T,
    pub r2: T,
    /// Window actually used.
    pub t0: T,
    pub t1: T,
    pub samples: usize,
}

/// Least-squares line through `log |w(t)|` on `[t0, t1]`. The window ends
/// at the last sample before the first non-positive or non-finite norm.
pub fn decay_fit<T: Real>(ts: &[T], norms: &[T], window: (T, T)) -> Result<DecayFit<T>> {
    if ts.len() != norms.len() {
        return Err(Error::Mismatch(format!(
            "{} times for {} norms",
            ts.len(),
            norms.len()
        )));
    }
    let (t0, t1) = window;
    if !(t0 < t1) {
        return Err(invalid("window", "need t0 < t1"));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (t, n) in ts.iter().zip(norms) {
        if *t < t0 {
            continue;
        }
        if *t > t1 {
            break;
        }
        if !(*n > T::zero() && n.is_finite()) {
            break;
        }
        xs.push(*t);
        ys.push(n.ln());
    }
    if xs.len() < 3 {
        return Err(Error::DecayFit { count: xs.len() });
    }
    let (slope, intercept, r2) = linear_fit(&xs, &ys).ok_or(Error::DecayFit { count: xs.len() })?;
    Ok(DecayFit {
        eta: -slope,
        c: intercept.exp(),
        r2,
        t0: xs[0],
        t1: xs[xs.len() - 1],
        samples: xs.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_exponential() {
        let ts: Vec<f64> = (0..=100).map(|i| 0.1 * i as f64).collect();
        let ns: Vec<f64> = ts.iter().map(|t| 3.0 * (-0.2 * t).exp()).collect();
        let f = decay_fit(&ts, &ns, (0.0, 10.0)).unwrap();
        assert!(
            (f.eta - 0.2).abs() < 1e-12 && (f.c - 3.0).abs() < 1e-12 && (f.r2 - 1.0).abs() < 1e-12
        );
        let flat = vec![2.0; ts.len()];
        assert!(decay_fit(&ts, &flat, (0.0, 10.0)).unwrap().eta.abs() < 1e-12);
    }

    #[test]
    fn window_shrinks_at_underflow() {
        let ts: Vec<f64> = (0..=10).map(|i| i as f64).collect();
        let mut ns: Vec<f64> = ts.iter().map(|t| (-t).exp()).collect();
        ns[7] = 0.0;
        let f = decay_fit(&ts, &ns, (0.0, 10.0)).unwrap();
        assert_eq!((f.samples, f.t1), (7, 6.0));
        ns[2] = 0.0;
        assert!(matches!(
            decay_fit(&ts, &ns, (0.0, 10.0)),
            Err(Error::DecayFit { count: 2 })
        ));
    }
}
