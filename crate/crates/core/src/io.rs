//! Plain-text artifact formats: CSV numbers and binary PGM images.

use std::io::Write;

use crate::Real;

/// 17 significant digits, enough to round-trip an `f64`.
pub fn fmt_real<T: Real>(x: T) -> String {
    format!("{:.16e}", x.to_f64_lossy())
}

/// Writes a CSV table with the given header.
pub fn write_csv<W: Write, T: Real>(
    out: &mut W,
    header: &[&str],
    rows: &[Vec<T>],
) -> std::io::Result<()> {
    writeln!(out, "{}", header.join(","))?;
    for row in rows {
        let line: Vec<String> = row.iter().map(|v| fmt_real(*v)).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(())
}

/// Grayscale binary PGM of a row-major `height x width` array, linearly
/// mapped from `[min, max]` to `[0, 255]`. Non-finite samples are black.
/// The value range is recorded in a header comment.
pub fn pgm_bytes<T: Real>(data: &[T], width: usize, height: usize) -> Vec<u8> {
    assert_eq!(data.len(), width * height, "pgm data size mismatch");
    let finite = data
        .iter()
        .map(|v| v.to_f64_lossy())
        .filter(|v| v.is_finite());
    let (lo, hi) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
        (a.min(v), b.max(v))
    });
    let (lo, hi) = if lo.is_finite() { (lo, hi) } else { (0.0, 0.0) };
    let span = if hi > lo { hi - lo } else { 1.0 };
    let mut out =
        format!("P5\n# min={lo:.16e} max={hi:.16e}\n{width} {height}\n255\n").into_bytes();
    out.extend(data.iter().map(|v| {
        let x = v.to_f64_lossy();
        if x.is_finite() {
            (((x - lo) / span) * 255.0).round().clamp(0.0, 255.0) as u8
        } else {
            0
        }
    }));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_digits() {
        let x = 0.1f64 + 0.2;
        assert_eq!(fmt_real(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn pgm_layout() {
        let img = pgm_bytes(&[0.0f64, 1.0, 0.5, 2.0], 2, 2);
        let text = String::from_utf8_lossy(&img);
        assert!(
            text.starts_with("P5\n# min=0.0000000000000000e0 max=2.0000000000000000e0\n2 2\n255\n")
        );
        assert_eq!(&img[img.len() - 4..], &[0, 128, 64, 255]);
    }
}
