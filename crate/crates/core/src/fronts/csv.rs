use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::io::fmt_real;
use crate::model::{ModelParams, StatePoint};
use crate::Real;

use super::{Endpoints, FrontModel, FrontProfile, UniformGrid};

pub(super) fn write_profile<T: Real>(p: &FrontProfile<T>) -> String {
    let mut s = String::new();
    let mut kv = |k: &str, v: String| {
        s.push_str(&format!("# {k} = {v}\n"));
    };
    kv("speed", fmt_real(p.speed));
    kv("endpoints", p.endpoints.label().to_string());
    match p.model {
        FrontModel::Kpp { d, r } => {
            kv("model", "kpp".into());
            kv("d", fmt_real(d));
            kv("r", fmt_real(r));
        }
        FrontModel::System(m) => {
            kv("model", "system".into());
            kv("d", fmt_real(m.d));
            kv("r", fmt_real(m.r));
            kv("alpha1", fmt_real(m.alpha1));
            kv("alpha2", fmt_real(m.alpha2));
        }
    }
    kv(
        "left",
        format!(
            "{},{}",
            fmt_real(p.left_state.u1),
            fmt_real(p.left_state.u2)
        ),
    );
    kv(
        "right",
        format!(
            "{},{}",
            fmt_real(p.right_state.u1),
            fmt_real(p.right_state.u2)
        ),
    );
    kv("L", fmt_real((p.grid.end() - p.grid.start) * T::of(0.5)));
    kv("N", p.len().to_string());
    if let Some(t) = p.tail_rate {
        kv("tail_rate", fmt_real(t));
    }
    if let Some(e) = p.plateau_edge {
        kv("plateau_edge", fmt_real(e));
    }
    s.push_str("xi,u1,u2\n");
    for (i, v) in p.values.iter().enumerate() {
        s.push_str(&format!(
            "{},{},{}\n",
            fmt_real(p.xi(i)),
            fmt_real(v.u1),
            fmt_real(v.u2)
        ));
    }
    s
}

fn num<T: Real>(s: &str, what: &str) -> Result<T> {
    s.trim()
        .parse::<f64>()
        .map(T::of)
        .map_err(|e| Error::Parse(format!("{what}: `{}`: {e}", s.trim())))
}

fn pair<T: Real>(s: &str, what: &str) -> Result<StatePoint<T>> {
    let mut it = s.split(',');
    let (a, b) = (it.next(), it.next());
    match (a, b, it.next()) {
        (Some(a), Some(b), None) => Ok(StatePoint::new(num(a, what)?, num(b, what)?)),
        _ => Err(Error::Parse(format!("{what}: expected `u1,u2`, got `{s}`"))),
    }
}

pub(super) fn read_profile<T: Real>(text: &str) -> Result<FrontProfile<T>> {
    let mut meta = HashMap::new();
    let mut xs = Vec::new();
    let mut values = Vec::new();
    let mut header_seen = false;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if let Some((k, v)) = rest.split_once('=') {
                meta.insert(k.trim().to_string(), v.trim().to_string());
            }
            continue;
        }
        if !header_seen {
            if line.replace(' ', "") != "xi,u1,u2" {
                return Err(Error::Parse(format!(
                    "line {}: expected header `xi,u1,u2`",
                    lineno + 1
                )));
            }
            header_seen = true;
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 3 {
            return Err(Error::Parse(format!(
                "line {}: expected 3 columns",
                lineno + 1
            )));
        }
        let what = format!("line {}", lineno + 1);
        xs.push(num::<T>(cols[0], &what)?);
        values.push(StatePoint::new(num(cols[1], &what)?, num(cols[2], &what)?));
    }
    let get = |k: &str| {
        meta.get(k)
            .map(String::as_str)
            .ok_or_else(|| Error::Parse(format!("missing header field `{k}`")))
    };
    if xs.len() < 5 {
        return Err(Error::Parse(format!(
            "need at least 5 samples, got {}",
            xs.len()
        )));
    }
    let n = xs.len();
    let step = (xs[n - 1] - xs[0]) / T::of_usize(n - 1);
    let tol = step.abs() * T::of(1e-6);
    for (i, x) in xs.iter().enumerate() {
        if (*x - (xs[0] + step * T::of_usize(i))).abs() > tol {
            return Err(Error::Parse(format!("grid is not uniform at sample {i}")));
        }
    }
    let d = num(get("d")?, "d")?;
    let r = num(get("r")?, "r")?;
    let model = match get("model")? {
        "kpp" => FrontModel::Kpp { d, r },
        "system" => FrontModel::System(ModelParams::new(
            d,
            r,
            num(get("alpha1")?, "alpha1")?,
            num(get("alpha2")?, "alpha2")?,
        )?),
        other => return Err(Error::Parse(format!("unknown model `{other}`"))),
    };
    let opt = |k: &str| -> Result<Option<T>> { meta.get(k).map(|v| num(v, k)).transpose() };
    Ok(FrontProfile {
        speed: num(get("speed")?, "speed")?,
        grid: UniformGrid {
            start: xs[0],
            step,
            len: n,
        },
        values,
        left_state: pair(get("left")?, "left")?,
        right_state: pair(get("right")?, "right")?,
        endpoints: Endpoints::parse(get("endpoints")?)?,
        model,
        tail_rate: opt("tail_rate")?,
        plateau_edge: opt("plateau_edge")?,
    })
}

#[cfg(test)]
mod tests {
    use super::super::kpp_profile;
    use super::*;

    #[test]
    fn csv_round_trip() {
        let p = kpp_profile(6.0, 4.0, 2.0, 30.0, 301).unwrap();
        let q: FrontProfile<f64> = FrontProfile::from_csv(&p.to_csv()).unwrap();
        assert_eq!(q.values, p.values);
        assert_eq!(q.speed, p.speed);
        assert_eq!(q.endpoints, p.endpoints);
        assert_eq!(q.tail_rate, p.tail_rate);
        assert!((q.grid.step - p.grid.step).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_header() {
        assert!(FrontProfile::<f64>::from_csv("a,b,c\n1,2,3\n").is_err());
    }
}
