use std::f64::consts::PI;
use std::io::BufRead;

use crate::error::{BbmError, Result};
use crate::field::TorusGrid;

#[derive(Clone, Debug, PartialEq)]
pub enum DampingKind {
    /// `amplitude·exp(1 − 1/(1 − ((x−center)/radius)²))` inside the band, 0 outside.
    Bump { center: f64, radius: f64 },
    Constant,
    Table,
}

/// Nonnegative damping coefficient `a(x)` on the torus with its support band.
#[derive(Clone, Debug, PartialEq)]
pub struct DampingProfile {
    values: Vec<f64>,
    band: (f64, f64),
    amplitude: f64,
    kind: DampingKind,
}

/// Signed distance from `center` to `x` on the circle, in `(−π, π]`.
pub(crate) fn periodic_offset(x: f64, center: f64) -> f64 {
    let d = (x - center).rem_euclid(2.0 * PI);
    if d > PI {
        d - 2.0 * PI
    } else {
        d
    }
}

pub fn bump_value(offset: f64, radius: f64, amplitude: f64) -> f64 {
    let r = offset / radius;
    if r.abs() >= 1.0 {
        0.0
    } else {
        amplitude * (1.0 - 1.0 / (1.0 - r * r)).exp()
    }
}

impl DampingProfile {
    pub fn bump(grid: &TorusGrid, center: f64, radius: f64, amplitude: f64) -> Result<Self> {
        if !(radius > 0.0 && radius <= PI) {
            return Err(BbmError::InvalidParameter(format!(
                "damping.radius must lie in (0, π], got {radius}"
            )));
        }
        if !(amplitude.is_finite() && amplitude >= 0.0) {
            return Err(BbmError::InvalidParameter(format!(
                "damping.amplitude must be >= 0, got {amplitude}"
            )));
        }
        if !center.is_finite() {
            return Err(BbmError::InvalidParameter("damping.center must be finite".into()));
        }
        let values = grid
            .nodes()
            .iter()
            .map(|&x| bump_value(periodic_offset(x, center), radius, amplitude))
            .collect();
        Ok(Self {
            values,
            band: (center - radius, center + radius),
            amplitude,
            kind: DampingKind::Bump { center, radius },
        })
    }

    /// `a ≡ amplitude` everywhere; amplitude 0 gives the undamped equation.
    pub fn constant(grid: &TorusGrid, amplitude: f64) -> Result<Self> {
        if !(amplitude.is_finite() && amplitude >= 0.0) {
            return Err(BbmError::InvalidParameter(format!(
                "damping.amplitude must be >= 0, got {amplitude}"
            )));
        }
        Ok(Self {
            values: vec![amplitude; grid.n_points()],
            band: (0.0, 2.0 * PI),
            amplitude,
            kind: DampingKind::Constant,
        })
    }

    pub fn none(grid: &TorusGrid) -> Self {
        Self::constant(grid, 0.0).expect("zero amplitude is valid")
    }

    /// Periodic piecewise-linear interpolation of `(x, a)` samples. The band
    /// is the smallest interval of table abscissae covering the positive entries.
    pub fn from_table(grid: &TorusGrid, table: &[(f64, f64)]) -> Result<Self> {
        if table.len() < 2 {
            return Err(BbmError::InvalidParameter(
                "damping table needs at least two rows".into(),
            ));
        }
        let mut rows: Vec<(f64, f64)> = table
            .iter()
            .map(|&(x, a)| (x.rem_euclid(2.0 * PI), a))
            .collect();
        if rows.iter().any(|(x, a)| !x.is_finite() || !a.is_finite() || *a < 0.0) {
            return Err(BbmError::InvalidParameter(
                "damping table entries must be finite with a >= 0".into(),
            ));
        }
        rows.sort_by(|p, q| p.0.total_cmp(&q.0));
        let first = rows[0];
        let last = rows[rows.len() - 1];

        let interp = |x: f64| -> f64 {
            let i = rows.partition_point(|r| r.0 <= x);
            let (lo, hi) = if i == 0 {
                ((last.0 - 2.0 * PI, last.1), first)
            } else if i == rows.len() {
                (last, (first.0 + 2.0 * PI, first.1))
            } else {
                (rows[i - 1], rows[i])
            };
            if hi.0 == lo.0 {
                return lo.1;
            }
            let w = (x - lo.0) / (hi.0 - lo.0);
            (1.0 - w) * lo.1 + w * hi.1
        };
        let values: Vec<f64> = grid.nodes().into_iter().map(interp).collect();
        let amplitude = rows.iter().map(|r| r.1).fold(0.0, f64::max);
        let positive: Vec<f64> = rows.iter().filter(|r| r.1 > 0.0).map(|r| r.0).collect();
        let band = match (positive.first(), positive.last()) {
            (Some(&a), Some(&b)) => (a, b),
            _ => (0.0, 0.0),
        };
        Ok(Self {
            values,
            band,
            amplitude,
            kind: DampingKind::Table,
        })
    }

    /// Two-column `x,a` CSV; blank lines, `#` comments and a non-numeric header row are skipped.
    pub fn from_csv(grid: &TorusGrid, reader: impl BufRead) -> Result<Self> {
        let mut table = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut cols = line.split(',').map(str::trim);
            let (Some(x), Some(a)) = (cols.next(), cols.next()) else {
                return Err(BbmError::Parse(format!("line {}: expected x,a", lineno + 1)));
            };
            match (x.parse::<f64>(), a.parse::<f64>()) {
                (Ok(x), Ok(a)) => table.push((x, a)),
                _ if lineno == 0 => continue,
                _ => {
                    return Err(BbmError::Parse(format!(
                        "line {}: non-numeric entry",
                        lineno + 1
                    )))
                }
            }
        }
        Self::from_table(grid, &table)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn band(&self) -> (f64, f64) {
        self.band
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn kind(&self) -> &DampingKind {
        &self.kind
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&a| a == 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_invariants() {
        let g = TorusGrid::new(256).unwrap();
        let a = DampingProfile::bump(&g, PI, 1.0, 2.0).unwrap();
        assert!(a.values().iter().all(|&v| v >= 0.0));
        for (x, v) in g.nodes().iter().zip(a.values()) {
            if (x - PI).abs() >= 1.0 {
                assert_eq!(*v, 0.0);
            }
        }
        // center value is the amplitude itself
        assert!((a.values()[128] - 2.0).abs() < 1e-14);
        assert!(a.values()[128] > a.amplitude() / 2.0);
    }

    #[test]
    fn bump_wraps_around_the_origin() {
        let g = TorusGrid::new(64).unwrap();
        let a = DampingProfile::bump(&g, 0.0, 0.5, 1.0).unwrap();
        assert_eq!(a.values()[0], 1.0);
        assert!(a.values()[63] > 0.0 && a.values()[1] > 0.0);
        assert!((a.values()[63] - a.values()[1]).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_parameters() {
        let g = TorusGrid::new(64).unwrap();
        assert!(DampingProfile::bump(&g, 0.0, 0.0, 1.0).is_err());
        assert!(DampingProfile::bump(&g, 0.0, 4.0, 1.0).is_err());
        assert!(DampingProfile::bump(&g, 0.0, 1.0, -1.0).is_err());
        assert!(DampingProfile::constant(&g, -0.1).is_err());
        assert!(DampingProfile::from_table(&g, &[(0.0, 1.0), (1.0, -1.0)]).is_err());
    }

    #[test]
    fn table_from_csv() {
        let g = TorusGrid::new(64).unwrap();
        let csv = "x,a\n0.0,0.0\n1.0,2.0\n2.0,0.0\n";
        let a = DampingProfile::from_csv(&g, csv.as_bytes()).unwrap();
        assert_eq!(a.band(), (1.0, 1.0));
        assert_eq!(a.amplitude(), 2.0);
        let x = g.x(10);
        let expected = if x <= 1.0 { 2.0 * x } else { 2.0 * (2.0 - x) }.max(0.0);
        assert!((a.values()[10] - expected).abs() < 1e-14);
        assert!(a.values().iter().all(|&v| v >= 0.0));
    }
}
