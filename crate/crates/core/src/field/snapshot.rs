//! Plain-text snapshot files: one header line
//! `# t=<time> domain=<torus|interval> n=<points> L=<length>` followed by
//! `x,value` rows with 17 significant digits.

use std::io::{BufRead, Write};

use super::{Field1D, Grid, IntervalGrid, TorusGrid};
use crate::error::{BbmError, Result};

pub fn write_snapshot(mut w: impl Write, t: f64, field: &Field1D) -> Result<()> {
    let grid = field.grid();
    writeln!(
        w,
        "# t={t:.16e} domain={} n={} L={:.16e}",
        grid.kind(),
        grid.n_points(),
        grid.length()
    )?;
    for (x, v) in grid.nodes().iter().zip(field.values()) {
        writeln!(w, "{x:.16e},{v:.16e}")?;
    }
    Ok(())
}

pub fn read_snapshot(r: impl BufRead) -> Result<(f64, Field1D)> {
    let mut lines = r.lines();
    let header = lines
        .next()
        .ok_or_else(|| BbmError::Parse("empty snapshot".into()))??;
    let header = header
        .strip_prefix('#')
        .ok_or_else(|| BbmError::Parse("snapshot header must start with '#'".into()))?;

    let (mut t, mut domain, mut n, mut length) = (None, None, None, None);
    for token in header.split_whitespace() {
        let (key, value) = token
            .split_once('=')
            .ok_or_else(|| BbmError::Parse(format!("bad header token {token:?}")))?;
        match key {
            "t" => t = Some(parse_f64(value)?),
            "domain" => domain = Some(value.to_string()),
            "n" => {
                n = Some(
                    value
                        .parse::<usize>()
                        .map_err(|e| BbmError::Parse(format!("n: {e}")))?,
                )
            }
            "L" => length = Some(parse_f64(value)?),
            _ => return Err(BbmError::Parse(format!("unknown header key {key:?}"))),
        }
    }
    let missing = |k: &str| BbmError::Parse(format!("snapshot header lacks {k}"));
    let t = t.ok_or_else(|| missing("t"))?;
    let n = n.ok_or_else(|| missing("n"))?;
    let length = length.ok_or_else(|| missing("L"))?;
    let grid: Grid = match domain.as_deref() {
        Some("torus") => TorusGrid::new(n)?.into(),
        Some("interval") => {
            if n < 2 {
                return Err(BbmError::Parse("interval snapshot needs n >= 2".into()));
            }
            IntervalGrid::new(length, n - 1)?.into()
        }
        Some(other) => return Err(BbmError::Parse(format!("unknown domain {other:?}"))),
        None => return Err(missing("domain")),
    };

    let mut values = Vec::with_capacity(n);
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let (_, v) = line
            .split_once(',')
            .ok_or_else(|| BbmError::Parse(format!("bad snapshot row {line:?}")))?;
        values.push(parse_f64(v.trim())?);
    }
    Ok((t, Field1D::new(grid, values)?))
}

fn parse_f64(s: &str) -> Result<f64> {
    s.parse::<f64>()
        .map_err(|e| BbmError::Parse(format!("{s:?}: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_bit_exact() {
        let g = TorusGrid::new(32).unwrap();
        let f = Field1D::from_fn(g, |x| (x.sin() * 1e-3).exp() - 0.1 * x).unwrap();
        let mut buf = Vec::new();
        write_snapshot(&mut buf, 1.25, &f).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# t=1.2500000000000000e0 domain=torus n=32 L="));
        let (t, back) = read_snapshot(buf.as_slice()).unwrap();
        assert_eq!(t, 1.25);
        assert_eq!(back, f);

        let gi = IntervalGrid::new(3.0, 40).unwrap();
        let fi = Field1D::from_fn(gi, |x| x * x).unwrap();
        let mut buf = Vec::new();
        write_snapshot(&mut buf, 0.0, &fi).unwrap();
        assert_eq!(read_snapshot(buf.as_slice()).unwrap().1, fi);
    }

    #[test]
    fn rejects_bad_header() {
        assert!(read_snapshot("t=1\n".as_bytes()).is_err());
        assert!(read_snapshot("# t=1 domain=sphere n=16 L=1\n".as_bytes()).is_err());
        assert!(read_snapshot("# t=1 domain=torus n=16 L=6.28\n0,1\n".as_bytes()).is_err());
    }
}
