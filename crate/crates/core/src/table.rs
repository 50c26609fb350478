//! Tabulated sensorimotor contingencies: scan grids and sample tables.

use crate::body::RetinaRange;
use crate::error::{Result, SmcError};
use crate::geom::Vec2;
use serde::{Deserialize, Serialize};
use std::io::Write;

/// Regular grid of retina positions covering the retina range, both
/// endpoints included, row-major with x varying fastest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanGrid {
    pub nx: usize,
    pub ny: usize,
}

impl ScanGrid {
    pub fn new(nx: usize, ny: usize) -> Result<ScanGrid> {
        if nx < 2 || ny < 2 {
            return Err(SmcError::InvalidConfig(format!(
                "scan grid must be at least 2x2, got {nx}x{ny}"
            )));
        }
        Ok(ScanGrid { nx, ny })
    }

    pub fn square(n: usize) -> Result<ScanGrid> {
        ScanGrid::new(n, n)
    }

    /// A degenerate single-row grid used by the 1-D and audio agents.
    pub fn line(n: usize) -> ScanGrid {
        ScanGrid { nx: n, ny: 1 }
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn node_indices(&self, k: usize) -> (usize, usize) {
        (k % self.nx, k / self.nx)
    }

    /// Position of node `k` inside `range`.
    pub fn node_pos(&self, k: usize, range: &RetinaRange) -> Vec2 {
        let (ix, iy) = self.node_indices(k);
        let ext = range.extent();
        let x = range.lo.x + ext.x * ix as f64 / (self.nx - 1) as f64;
        let y = if self.ny > 1 {
            range.lo.y + ext.y * iy as f64 / (self.ny - 1) as f64
        } else {
            range.lo.y
        };
        Vec2::new(x, y)
    }

    /// Grid spacing along x.
    pub fn step_x(&self, range: &RetinaRange) -> f64 {
        range.extent().x / (self.nx - 1) as f64
    }
}

/// Proprioceptor output vector; each component lies in (0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProprioVector(pub Vec<f64>);

/// Photoreceptor output vector; each component is >= 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhotoVector(pub Vec<f64>);

impl ProprioVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

impl PhotoVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Largest componentwise absolute difference between two equal-length vectors.
pub fn linf_dist(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Euclidean distance between two equal-length vectors.
pub fn euclid_dist(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// True when every component of `a` is within `tol` of `b`.
pub fn within_tol(a: &[f64], b: &[f64], tol: f64) -> bool {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).all(|(x, y)| (x - y).abs() < tol)
}

/// One row of a sensorimotor contingency table. The learning code sees
/// nothing but these two vectors; the retina position that produced them
/// lives only in the oracle-side scan trace.
#[derive(Debug, Clone, Copy)]
pub struct SmcSample<'a> {
    pub p: &'a [f64],
    pub s: &'a [f64],
}

/// Tabulated <proprioception, exteroception> tuples from one scan,
/// one sample per grid node in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct SmcTable {
    grid: ScanGrid,
    np: usize,
    ns: usize,
    p: Vec<f64>,
    s: Vec<f64>,
}

impl SmcTable {
    pub fn from_rows(grid: ScanGrid, np: usize, ns: usize, p: Vec<f64>, s: Vec<f64>) -> SmcTable {
        assert_eq!(p.len(), grid.len() * np, "proprio rows must match grid");
        assert_eq!(s.len(), grid.len() * ns, "photo rows must match grid");
        SmcTable { grid, np, ns, p, s }
    }

    pub fn grid(&self) -> ScanGrid {
        self.grid
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn n_proprio(&self) -> usize {
        self.np
    }

    pub fn n_photo(&self) -> usize {
        self.ns
    }

    pub fn p_row(&self, k: usize) -> &[f64] {
        &self.p[k * self.np..(k + 1) * self.np]
    }

    pub fn s_row(&self, k: usize) -> &[f64] {
        &self.s[k * self.ns..(k + 1) * self.ns]
    }

    pub fn sample(&self, k: usize) -> SmcSample<'_> {
        SmcSample {
            p: self.p_row(k),
            s: self.s_row(k),
        }
    }

    pub fn proprio(&self, k: usize) -> ProprioVector {
        ProprioVector(self.p_row(k).to_vec())
    }

    pub fn photo(&self, k: usize) -> PhotoVector {
        PhotoVector(self.s_row(k).to_vec())
    }

    /// CSV export: header p_1..p_np, s_1..s_ns; one row per grid node.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        let mut header = Vec::new();
        for j in 1..=self.np {
            header.push(format!("p_{j}"));
        }
        for j in 1..=self.ns {
            header.push(format!("s_{j}"));
        }
        writeln!(w, "{}", header.join(","))?;
        for k in 0..self.len() {
            let mut row = Vec::with_capacity(self.np + self.ns);
            for v in self.p_row(k) {
                row.push(format!("{v}"));
            }
            for v in self.s_row(k) {
                row.push(format!("{v}"));
            }
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_row_major_order() {
        let g = ScanGrid::new(3, 2).unwrap();
        assert_eq!(g.len(), 6);
        assert_eq!(g.node_indices(0), (0, 0));
        assert_eq!(g.node_indices(2), (2, 0));
        assert_eq!(g.node_indices(3), (0, 1));
        let r = RetinaRange::unit();
        assert_eq!(g.node_pos(0, &r), Vec2::new(0.0, 0.0));
        assert_eq!(g.node_pos(2, &r), Vec2::new(1.0, 0.0));
        assert_eq!(g.node_pos(5, &r), Vec2::new(1.0, 1.0));
    }

    #[test]
    fn grid_rejects_degenerate() {
        assert!(ScanGrid::new(1, 5).is_err());
        assert!(ScanGrid::new(5, 1).is_err());
        assert!(ScanGrid::square(2).is_ok());
    }

    #[test]
    fn csv_has_header_and_rows() {
        let g = ScanGrid::new(2, 2).unwrap();
        let t = SmcTable::from_rows(g, 1, 2, vec![0.1, 0.2, 0.3, 0.4], vec![0.0; 8]);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[0], "p_1,s_1,s_2");
    }
}
