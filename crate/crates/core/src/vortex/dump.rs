//! Plain-text field dump: a `key,value` header followed by row-major `u`.
//!
//! ```text
//! r,<r>
//! R,<half width>
//! h,<spacing>
//! offset,<x>,<y>
//! nodes,<nodes per side>
//! zeros,<count>
//! zero,<x>,<y>,<m>          (one line per zero)
//! iterations,<newton iterations>
//! residual,<final scaled residual>
//! u
//! <u(0,j)>,...,<u(n,j)>     (one line per grid row j)
//! ```

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use super::{singular_part, Convergence, GridSpec, VortexField, ZeroConfig};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::scalar::Real;

pub fn write_field<T: Real, W: Write>(f: &VortexField<T>, mut out: W) -> std::io::Result<()> {
    let g = &f.grid;
    writeln!(out, "r,{:.16e}", f.r)?;
    writeln!(out, "R,{:.16e}", g.half_width)?;
    writeln!(out, "h,{:.16e}", g.spacing)?;
    writeln!(out, "offset,{:.16e},{:.16e}", g.offset.x, g.offset.y)?;
    writeln!(out, "nodes,{}", g.side())?;
    writeln!(out, "zeros,{}", f.zeros.len())?;
    for (p, m) in f.zeros.points.iter().zip(&f.zeros.multiplicities) {
        writeln!(out, "zero,{:.16e},{:.16e},{}", p.x, p.y, m)?;
    }
    writeln!(out, "iterations,{}", f.convergence.iterations)?;
    writeln!(out, "residual,{:.16e}", f.convergence.residual)?;
    writeln!(out, "u")?;
    let side = g.side();
    let mut line = String::new();
    for row in f.u.chunks(side) {
        line.clear();
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                line.push(',');
            }
            line.push_str(&format!("{v:.16e}"));
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub fn write_field_file<T: Real>(f: &VortexField<T>, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    write_field(f, &mut out).and_then(|_| out.flush()).map_err(|e| Error::io(path, e))
}

struct Lines<R> {
    inner: std::io::Lines<R>,
    line: usize,
}

impl<R: BufRead> Lines<R> {
    fn next(&mut self) -> Result<String> {
        self.line += 1;
        match self.inner.next() {
            Some(Ok(l)) => Ok(l),
            Some(Err(e)) => Err(Error::parse("field dump", e)),
            None => Err(self.err("unexpected end of file")),
        }
    }

    fn err(&self, msg: impl std::fmt::Display) -> Error {
        Error::parse(format!("field dump line {}", self.line), msg)
    }

    fn keyed(&mut self, key: &str) -> Result<Vec<String>> {
        let l = self.next()?;
        let mut parts = l.split(',').map(str::to_owned);
        if parts.next().as_deref() != Some(key) {
            return Err(self.err(format!("expected key `{key}`")));
        }
        Ok(parts.collect())
    }

    fn value<V: FromStr>(&self, s: &str) -> Result<V> {
        s.trim().parse().map_err(|_| self.err(format!("cannot parse `{s}`")))
    }

    fn single<V: FromStr>(&mut self, key: &str) -> Result<V> {
        let parts = self.keyed(key)?;
        if parts.len() != 1 {
            return Err(self.err(format!("`{key}` takes one value")));
        }
        self.value(&parts[0])
    }
}

/// Reads a dump back; `u` round-trips bit-exactly and `w = u − s` is rebuilt.
pub fn read_field<T: Real + FromStr, R: BufRead>(input: R) -> Result<VortexField<T>> {
    let mut lines = Lines { inner: input.lines(), line: 0 };
    let r: T = lines.single("r")?;
    let half_width: T = lines.single("R")?;
    let spacing: T = lines.single("h")?;
    let offset = lines.keyed("offset")?;
    if offset.len() != 2 {
        return Err(lines.err("`offset` takes two values"));
    }
    let offset = Point::new(lines.value(&offset[0])?, lines.value(&offset[1])?);
    let side: usize = lines.single("nodes")?;
    if side < 2 {
        return Err(lines.err("grid needs at least two nodes per side"));
    }
    let count: usize = lines.single("zeros")?;
    let mut points = Vec::with_capacity(count);
    let mut mults = Vec::with_capacity(count);
    for _ in 0..count {
        let parts = lines.keyed("zero")?;
        if parts.len() != 3 {
            return Err(lines.err("`zero` takes x, y, m"));
        }
        points.push(Point::new(lines.value(&parts[0])?, lines.value(&parts[1])?));
        mults.push(lines.value(&parts[2])?);
    }
    let iterations: usize = lines.single("iterations")?;
    let residual: T = lines.single("residual")?;
    if lines.next()? != "u" {
        return Err(lines.err("expected `u`"));
    }
    let mut u = Vec::with_capacity(side * side);
    for _ in 0..side {
        let l = lines.next()?;
        let before = u.len();
        for v in l.split(',') {
            u.push(lines.value::<T>(v)?);
        }
        if u.len() - before != side {
            return Err(lines.err(format!("expected {side} values")));
        }
    }
    let zeros = ZeroConfig::new(points, mults)?;
    let grid = GridSpec { half_width, spacing, intervals: side - 1, offset };
    let mut w = Vec::with_capacity(u.len());
    for j in 0..side {
        for i in 0..side {
            w.push(u[grid.index(i, j)] - singular_part(&zeros, grid.node(i, j))?);
        }
    }
    Ok(VortexField {
        r,
        zeros,
        grid,
        u,
        w,
        convergence: Convergence { iterations, residual, history: vec![residual], linear_iterations: 0 },
    })
}

pub fn read_field_file<T: Real + FromStr>(path: &Path) -> Result<VortexField<T>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_field(BufReader::new(file))
}
