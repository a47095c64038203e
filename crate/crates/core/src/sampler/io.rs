//! Path export: CSV (one row per grid point) and the `GFL1` binary layout.
//!
//! `GFL1` is little-endian throughout:
//!
//! | field          | type        |
//! |----------------|-------------|
//! | magic `GFL1`   | 4 bytes     |
//! | `N`            | u32         |
//! | `d`            | u32         |
//! | resolutions    | `N` × u64   |
//! | domain lower   | `N` × f64   |
//! | domain upper   | `N` × f64   |
//! | seed           | u64         |
//! | values         | `d` columns of `∏ resolutions` f64, one column per coordinate |

use std::io::{Read, Write};

use super::{interleave, Generator, GridSpec, SamplePath};
use crate::error::{Error, Result};
use crate::geometry::{Point, Rect};

pub const MAGIC: &[u8; 4] = b"GFL1";

/// Header `t1..tN,x1..xd`, then one row per retained point.
pub fn write_csv<W: Write>(path: &SamplePath, mut out: W) -> Result<()> {
    let n = path.index_dim();
    let header: Vec<String> =
        (1..=n).map(|i| format!("t{i}")).chain((1..=path.d).map(|i| format!("x{i}"))).collect();
    writeln!(out, "{}", header.join(","))?;
    let mut p = vec![0.0; n];
    for k in 0..path.len() {
        path.grid.point_into(path.grid_index(k), &mut p);
        let row: Vec<String> = p.iter().chain(path.value(k)).map(|v| format!("{v:?}")).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

pub fn write_binary<W: Write>(path: &SamplePath, mut out: W) -> Result<()> {
    if path.subset.is_some() {
        return Err(Error::InvalidParameter("binary export needs a full grid".into()));
    }
    let n = path.index_dim();
    out.write_all(MAGIC)?;
    out.write_all(&(n as u32).to_le_bytes())?;
    out.write_all(&(path.d as u32).to_le_bytes())?;
    for r in &path.grid.resolution {
        out.write_all(&(*r as u64).to_le_bytes())?;
    }
    for v in path.grid.domain.lower.coords().iter().chain(path.grid.domain.upper.coords()) {
        out.write_all(&v.to_le_bytes())?;
    }
    out.write_all(&path.seed.to_le_bytes())?;
    let mut buf = Vec::with_capacity(path.len() * 8);
    for i in 0..path.d {
        buf.clear();
        for k in 0..path.len() {
            buf.extend_from_slice(&path.value(k)[i].to_le_bytes());
        }
        out.write_all(&buf)?;
    }
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

/// Inverse of [`write_binary`]. The generator record is not stored, so the
/// result carries `method = "gfl1"`.
pub fn read_binary<R: Read>(mut input: R) -> Result<SamplePath> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::InvalidParameter("not a GFL1 file".into()));
    }
    let n = read_u32(&mut input)? as usize;
    let d = read_u32(&mut input)? as usize;
    if n == 0 || n > 16 || d == 0 {
        return Err(Error::InvalidParameter(format!("implausible GFL1 header: N = {n}, d = {d}")));
    }
    let resolution = (0..n).map(|_| read_u64(&mut input).map(|v| v as usize)).collect::<Result<Vec<_>>>()?;
    let lower = (0..n).map(|_| read_f64(&mut input)).collect::<Result<Vec<_>>>()?;
    let upper = (0..n).map(|_| read_f64(&mut input)).collect::<Result<Vec<_>>>()?;
    let seed = read_u64(&mut input)?;
    let grid = GridSpec::new(Rect::new(Point::new(lower)?, Point::new(upper)?)?, resolution)?;
    let total = grid.total_points();
    let columns = (0..d)
        .map(|_| (0..total).map(|_| read_f64(&mut input)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    let generator = Generator { family: "unknown".into(), method: "gfl1".into(), params: serde_json::Value::Null };
    SamplePath::new(grid, d, seed, generator, interleave(&columns))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::IncrementKernel;
    use crate::sampler::sample_gaussian_exact;

    fn small_path() -> SamplePath {
        let k = IncrementKernel::mpfbm(0.4, 2).unwrap();
        let grid = GridSpec::new(
            Rect::new(Point::new(vec![1.0, 1.0]).unwrap(), Point::new(vec![2.0, 3.0]).unwrap()).unwrap(),
            vec![3, 4],
        )
        .unwrap();
        sample_gaussian_exact(&k, &grid, 2, 5).unwrap()
    }

    #[test]
    fn binary_round_trip() {
        let p = small_path();
        let mut buf = Vec::new();
        write_binary(&p, &mut buf).unwrap();
        assert_eq!(&buf[..4], b"GFL1");
        assert_eq!(u32::from_le_bytes(buf[4..8].try_into().unwrap()), 2);
        assert_eq!(u32::from_le_bytes(buf[8..12].try_into().unwrap()), 2);
        assert_eq!(u64::from_le_bytes(buf[12..20].try_into().unwrap()), 3);
        assert_eq!(u64::from_le_bytes(buf[20..28].try_into().unwrap()), 4);
        assert_eq!(buf.len(), 4 + 8 + 16 + 32 + 8 + 12 * 2 * 8);
        let back = read_binary(buf.as_slice()).unwrap();
        assert_eq!(back.values, p.values);
        assert_eq!(back.grid, p.grid);
        assert_eq!(back.seed, 5);
        assert!(read_binary(&b"GFL0xxxx"[..]).is_err());
    }

    #[test]
    fn csv_layout() {
        let p = small_path();
        let mut buf = Vec::new();
        write_csv(&p, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t1,t2,x1,x2");
        assert_eq!(lines.len(), 13);
        let row: Vec<f64> = lines[2].split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(row[0], 1.0);
        assert!((row[1] - 5.0 / 3.0).abs() < 1e-15);
        assert_eq!(&row[2..], p.value(1));
    }
}
