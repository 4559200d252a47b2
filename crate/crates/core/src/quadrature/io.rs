//! Binary (`HSM1`) and CSV export of graph measures.

use std::io::{Read, Write};

use super::measure::GraphMeasure;
use crate::error::{Error, Result};
use crate::group::{Point, WPoint};

pub const HSM1_MAGIC: &[u8; 4] = b"HSM1";

/// One node of a stored measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StoredNode {
    pub w: WPoint,
    pub weight: f64,
    pub point: Point,
}

/// `"HSM1"`, `u64` node count, then `w1, w2, weight, px, py, pt` per node,
/// all little-endian.
pub fn write_hsm1<W: Write>(mu: &GraphMeasure, mut out: W) -> Result<()> {
    out.write_all(HSM1_MAGIC)?;
    out.write_all(&(mu.len() as u64).to_le_bytes())?;
    for i in 0..mu.len() {
        let (w, p) = (mu.nodes[i], mu.points[i]);
        for v in [w.w1, w.w2, mu.weights[i], p.x, p.y, p.t] {
            out.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_hsm1<R: Read>(mut input: R) -> Result<Vec<StoredNode>> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    if &magic != HSM1_MAGIC {
        return Err(Error::Format("missing HSM1 magic".into()));
    }
    let mut buf = [0u8; 8];
    input.read_exact(&mut buf)?;
    let n = u64::from_le_bytes(buf) as usize;
    let mut out = Vec::with_capacity(n.min(1 << 24));
    let mut rec = [0u8; 48];
    for _ in 0..n {
        input.read_exact(&mut rec).map_err(|_| Error::Format("truncated HSM1 file".into()))?;
        let f = |k: usize| f64::from_le_bytes(rec[8 * k..8 * k + 8].try_into().unwrap());
        out.push(StoredNode { w: WPoint::new(f(0), f(1)), weight: f(2), point: Point::new(f(3), f(4), f(5)) });
    }
    Ok(out)
}

/// CSV with header `w1,w2,weight,x,y,t`; 17 significant digits.
pub fn write_csv<W: Write>(mu: &GraphMeasure, mut out: W) -> Result<()> {
    writeln!(out, "w1,w2,weight,x,y,t")?;
    for i in 0..mu.len() {
        let (w, p) = (mu.nodes[i], mu.points[i]);
        writeln!(out, "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}", w.w1, w.w2, mu.weights[i], p.x, p.y, p.t)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::IntrinsicFunction;
    use crate::quadrature::measure::{build_graph_measure, Domain};

    #[test]
    fn hsm1_round_trip() {
        let mu = build_graph_measure(&IntrinsicFunction::bump(0.5, 0.3).unwrap(), Domain::new(-0.5, 0.5, -0.1, 0.1).unwrap(), 8, 6).unwrap();
        let mut buf = Vec::new();
        write_hsm1(&mu, &mut buf).unwrap();
        assert_eq!(buf.len(), 12 + 48 * mu.len());
        let back = read_hsm1(&buf[..]).unwrap();
        for (i, s) in back.iter().enumerate() {
            assert_eq!((s.w, s.weight, s.point), (mu.nodes[i], mu.weights[i], mu.points[i]));
        }
        assert!(read_hsm1(&buf[..20]).is_err());
        assert!(read_hsm1(&b"XXXX"[..]).is_err());
        let mut csv = Vec::new();
        write_csv(&mu, &mut csv).unwrap();
        assert_eq!(String::from_utf8(csv).unwrap().lines().count(), mu.len() + 1);
    }
}
