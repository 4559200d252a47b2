//! `HPT1` columnar export of potential lattices.

use std::io::{Read, Write};

use super::potential::Lattice;
use crate::error::{Error, Result};
use crate::group::Point;

pub const HPT1_MAGIC: &[u8; 4] = b"HPT1";

/// `"HPT1"`, dims as three `u64`, origin and spacing as six `f64`, then the
/// `x`, `y`, `t` and value columns, each of `nx·ny·nt` `f64`, little-endian.
pub fn write_hpt1<W: Write>(lattice: &Lattice, values: &[f64], mut out: W) -> Result<()> {
    if values.len() != lattice.len() {
        return Err(Error::InvalidArgument(format!("{} values for {} lattice points", values.len(), lattice.len())));
    }
    out.write_all(HPT1_MAGIC)?;
    for d in lattice.dims {
        out.write_all(&(d as u64).to_le_bytes())?;
    }
    let o = lattice.origin;
    for v in [o.x, o.y, o.t].iter().chain(&lattice.spacing) {
        out.write_all(&v.to_le_bytes())?;
    }
    let pts = lattice.points();
    for col in [
        pts.iter().map(|p| p.x).collect::<Vec<_>>(),
        pts.iter().map(|p| p.y).collect(),
        pts.iter().map(|p| p.t).collect(),
        values.to_vec(),
    ] {
        for v in col {
            out.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_hpt1<R: Read>(mut input: R) -> Result<(Lattice, Vec<f64>)> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    if &magic != HPT1_MAGIC {
        return Err(Error::Format("missing HPT1 magic".into()));
    }
    let mut buf = [0u8; 8];
    let mut next = |input: &mut R| -> Result<[u8; 8]> {
        input.read_exact(&mut buf).map_err(|_| Error::Format("truncated HPT1 file".into()))?;
        Ok(buf)
    };
    let mut dims = [0usize; 3];
    for d in &mut dims {
        *d = u64::from_le_bytes(next(&mut input)?) as usize;
    }
    let mut head = [0.0f64; 6];
    for h in &mut head {
        *h = f64::from_le_bytes(next(&mut input)?);
    }
    let lattice = Lattice { origin: Point::new(head[0], head[1], head[2]), spacing: [head[3], head[4], head[5]], dims };
    let n = lattice.len();
    let mut cols = vec![0.0f64; 4 * n];
    for c in &mut cols {
        *c = f64::from_le_bytes(next(&mut input)?);
    }
    Ok((lattice, cols.split_off(3 * n)))
}
