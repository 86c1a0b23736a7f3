//! Distance-field files, PGM export and CSV tables.
//!
//! A grid file is the ASCII header `grid v1 <nx> <ny> <h> <theta> <ox> <oy>` followed by
//! `nx·ny` values, rows of increasing lattice `j`. Value `(a, b)` sits at
//! `h R_θ ((ox, oy) + (a, b))`. Unreached points are `inf`; lattice points of the bounding
//! range that are not grid points (rotated grids) are `NaN`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::bench::{BenchRow, ErrorReport};
use crate::grid::{DiscreteDomain, PointKind};

pub const CSV_HEADER: &str = "test,solver,n,points,prep_seconds,solve_seconds,linf,l1_avg";

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("malformed grid file: {0}")]
    Format(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridFile {
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
    pub theta: f64,
    pub ox: f64,
    pub oy: f64,
    pub values: Vec<f64>,
}

impl GridFile {
    /// Samples `values` on the in-box points of `domain`.
    pub fn from_field(domain: &DiscreteDomain, values: &[f64]) -> GridFile {
        let ((i0, i1), (j0, j1)) = domain.lattice_range();
        let (nx, ny) = ((i1 - i0 + 1) as usize, (j1 - j0 + 1) as usize);
        let mut out = vec![f64::NAN; nx * ny];
        for k in 0..domain.len() {
            if domain.kind(k) == PointKind::Escape {
                continue;
            }
            let (i, j) = domain.lattice(k);
            out[(j - j0) as usize * nx + (i - i0) as usize] = values[k];
        }
        let spec = domain.spec();
        GridFile {
            nx,
            ny,
            h: spec.h,
            theta: spec.theta,
            ox: spec.offset.x + i0 as f64,
            oy: spec.offset.y + j0 as f64,
            values: out,
        }
    }

    pub fn write<W: Write>(&self, mut w: W) -> Result<(), IoError> {
        writeln!(
            w,
            "grid v1 {} {} {} {} {} {}",
            self.nx, self.ny, self.h, self.theta, self.ox, self.oy
        )?;
        for row in self.values.chunks(self.nx.max(1)) {
            let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            writeln!(w, "{}", line.join(" "))?;
        }
        Ok(())
    }

    pub fn read<R: Read>(r: R) -> Result<GridFile, IoError> {
        let mut reader = BufReader::new(r);
        let mut header = String::new();
        reader.read_line(&mut header)?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 8 || fields[0] != "grid" || fields[1] != "v1" {
            return Err(IoError::Format(format!("bad header '{}'", header.trim_end())));
        }
        let int = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| IoError::Format(format!("bad size '{s}'")))
        };
        let real = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| IoError::Format(format!("bad number '{s}'")))
        };
        let (nx, ny) = (int(fields[2])?, int(fields[3])?);
        let (h, theta, ox, oy) = (real(fields[4])?, real(fields[5])?, real(fields[6])?, real(fields[7])?);
        let mut body = String::new();
        reader.read_to_string(&mut body)?;
        let values = body.split_whitespace().map(real).collect::<Result<Vec<_>, _>>()?;
        if values.len() != nx * ny {
            return Err(IoError::Format(format!(
                "expected {} values, found {}",
                nx * ny,
                values.len()
            )));
        }
        Ok(GridFile {
            nx,
            ny,
            h,
            theta,
            ox,
            oy,
            values,
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), IoError> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<GridFile, IoError> {
        GridFile::read(File::open(path)?)
    }

    /// Binary PGM, top row first. Finite values map linearly onto `0..=254` over
    /// `[0, max finite]`; `+∞` and missing points are 255.
    pub fn write_pgm<W: Write>(&self, mut w: W) -> Result<(), IoError> {
        let max = self
            .values
            .iter()
            .copied()
            .filter(|v| v.is_finite())
            .fold(0.0f64, f64::max);
        write!(w, "P5\n{} {}\n255\n", self.nx, self.ny)?;
        let mut bytes = Vec::with_capacity(self.values.len());
        for row in self.values.chunks(self.nx.max(1)).rev() {
            for &v in row {
                bytes.push(if !v.is_finite() {
                    255
                } else if max > 0.0 {
                    (254.0 * (v / max).clamp(0.0, 1.0)).round() as u8
                } else {
                    0
                });
            }
        }
        w.write_all(&bytes)?;
        Ok(())
    }
}

/// Benchmark table. Failed runs keep their row with `NaN` numbers.
pub fn write_bench_csv<W: Write>(mut w: W, rows: &[BenchRow]) -> Result<(), IoError> {
    writeln!(w, "{CSV_HEADER}")?;
    for row in rows {
        match &row.result {
            Ok(ErrorReport {
                point_count,
                prep_seconds,
                solve_seconds,
                linf,
                l1_avg,
                ..
            }) => writeln!(
                w,
                "{},{},{},{point_count},{prep_seconds},{solve_seconds},{linf},{l1_avg}",
                row.test, row.solver, row.n
            )?,
            Err(_) => writeln!(w, "{},{},{},NaN,NaN,NaN,NaN,NaN", row.test, row.solver, row.n)?,
        }
    }
    Ok(())
}

/// `theta,cardinality` table of an orientation sweep.
pub fn write_stencil_stats<W: Write>(mut w: W, stats: &[(f64, usize)]) -> Result<(), IoError> {
    writeln!(w, "theta,cardinality")?;
    for (theta, card) in stats {
        writeln!(w, "{theta},{card}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::{BenchError, SolverKind, TestId};
    use crate::grid::{discretize, GridSpec};
    use crate::linalg::{Rect, Vec2};

    fn sample() -> GridFile {
        GridFile {
            nx: 3,
            ny: 2,
            h: 0.1,
            theta: 0.0,
            ox: -1.0,
            oy: -0.5,
            values: vec![0.0, 1.0 / 3.0, f64::INFINITY, 2.5, 1e-300, f64::NAN],
        }
    }

    #[test]
    fn round_trip_is_exact() {
        let g = sample();
        let mut buf = Vec::new();
        g.write(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("grid v1 3 2 0.1 0 -1 -0.5\n0 0.3333333333333333 inf\n"));
        let back = GridFile::read(&buf[..]).unwrap();
        assert_eq!(back.values[..5], g.values[..5]);
        assert!(back.values[5].is_nan());
        assert_eq!((back.nx, back.ny, back.h, back.ox, back.oy), (3, 2, 0.1, -1.0, -0.5));
    }

    #[test]
    fn rejects_malformed() {
        assert!(GridFile::read(&b"grid v2 1 1 1 0 0 0\n0\n"[..]).is_err());
        assert!(GridFile::read(&b"grid v1 2 1 1 0 0 0\n0\n"[..]).is_err());
        assert!(GridFile::read(&b"grid v1 1 1 1 0 0 0\nx\n"[..]).is_err());
    }

    #[test]
    fn from_field_places_points() {
        let spec = GridSpec::square(Rect::centered_square(1.0), 5);
        let d = discretize(&spec, &[Vec2::ZERO]).unwrap();
        let values: Vec<f64> = (0..d.len()).map(|k| k as f64).collect();
        let g = GridFile::from_field(&d, &values);
        assert_eq!((g.nx, g.ny), (5, 5));
        // node (a, b) sits at h (ox + a, oy + b)
        for k in 0..d.len() {
            let z = d.position(k);
            let a = (z.x / g.h - g.ox).round() as usize;
            let b = (z.y / g.h - g.oy).round() as usize;
            assert_eq!(g.values[b * g.nx + a], k as f64);
        }
    }

    #[test]
    fn pgm_mapping() {
        let mut buf = Vec::new();
        sample().write_pgm(&mut buf).unwrap();
        let header = b"P5\n3 2\n255\n";
        assert_eq!(&buf[..header.len()], header);
        // top row (j = 1) first
        assert_eq!(&buf[header.len()..], &[254, 0, 255, 0, 34, 255]);
    }

    #[test]
    fn csv_rows() {
        let rows = vec![
            BenchRow {
                test: TestId::Spiral,
                solver: SolverKind::FmAsr,
                n: 61,
                result: Ok(ErrorReport {
                    n: 61,
                    point_count: 10,
                    prep_seconds: 0.5,
                    solve_seconds: 0.25,
                    linf: 0.125,
                    l1_avg: 0.0625,
                    unreached: 0,
                }),
            },
            BenchRow {
                test: TestId::Spiral,
                solver: SolverKind::Agsi,
                n: 61,
                result: Err(BenchError::EmptyValidRegion),
            },
        ];
        let mut buf = Vec::new();
        write_bench_csv(&mut buf, &rows).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            format!("{CSV_HEADER}\nspiral,fm-asr,61,10,0.5,0.25,0.125,0.0625\nspiral,agsi,61,NaN,NaN,NaN,NaN,NaN\n")
        );
        let mut buf = Vec::new();
        write_stencil_stats(&mut buf, &[(0.0, 4), (0.5, 6)]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "theta,cardinality\n0,4\n0.5,6\n");
    }
}
