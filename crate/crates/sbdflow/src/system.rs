//! Sparse linear system in coordinate form, finalized to compressed rows.

use crate::error::{Error, Result};
use std::io::Write;

/// Classification of an assembled row, used by the consistency oracle to
/// separate second-order PDE/interface stencils from boundary closures whose
/// pointwise truncation is lower order by construction (ghost elimination,
/// half-cell fluxes).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowClass {
    /// Interior PDE stencil (momentum, continuity, Darcy).
    Interior,
    /// Interface or transmission condition imposed as its own row.
    Interface,
    /// Stencil adjacent to a boundary or interface that eliminated a ghost.
    NearBoundary,
    /// Boundary data row (Dirichlet pin or traction condition).
    Boundary,
}

/// Accumulates coordinate triplets; duplicate entries are summed on finalize.
pub struct SystemBuilder {
    n: usize,
    triplets: Vec<(u32, u32, f64)>,
    rhs: Vec<f64>,
    row_class: Vec<RowClass>,
    /// Quadrature weight per row for the weighted residual norm.
    row_weight: Vec<f64>,
}

impl SystemBuilder {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            triplets: Vec::new(),
            rhs: vec![0.0; n],
            row_class: vec![RowClass::Interior; n],
            row_weight: vec![1.0; n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn add(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.n && col < self.n);
        if value != 0.0 {
            self.triplets.push((row as u32, col as u32, value));
        }
    }

    #[inline]
    pub fn add_rhs(&mut self, row: usize, value: f64) {
        self.rhs[row] += value;
    }

    pub fn set_row_meta(&mut self, row: usize, class: RowClass, weight: f64) {
        self.row_class[row] = class;
        self.row_weight[row] = weight;
    }

    /// Sort, merge duplicates and check that every row received an entry.
    pub fn finalize(self) -> Result<LinearSystem> {
        let n = self.n;
        let mut trips = self.triplets;
        trips.sort_unstable_by_key(|&(r, c, _)| ((r as u64) << 32) | c as u64);

        let mut col_idx: Vec<u32> = Vec::with_capacity(trips.len());
        let mut values: Vec<f64> = Vec::with_capacity(trips.len());
        let mut counts = vec![0usize; n];
        let mut last = None;
        for &(r, c, v) in &trips {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                counts[r as usize] += 1;
                last = Some((r, c));
            }
        }
        let mut row_ptr = vec![0usize; n + 1];
        for r in 0..n {
            if counts[r] == 0 {
                return Err(Error::Assembly(format!("row {r} is empty after finalization")));
            }
            row_ptr[r + 1] = row_ptr[r] + counts[r];
        }
        Ok(LinearSystem {
            n,
            row_ptr,
            col_idx,
            values,
            rhs: self.rhs,
            row_class: self.row_class,
            row_weight: self.row_weight,
        })
    }
}

/// Finalized sparse system `A x = b` in compressed-row storage.
pub struct LinearSystem {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<u32>,
    pub values: Vec<f64>,
    pub rhs: Vec<f64>,
    pub row_class: Vec<RowClass>,
    pub row_weight: Vec<f64>,
}

impl LinearSystem {
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        for r in 0..self.n {
            let mut s = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                s += self.values[k] * x[self.col_idx[k] as usize];
            }
            y[r] = s;
        }
    }

    /// Residual `A x - b`.
    pub fn residual(&self, x: &[f64]) -> Vec<f64> {
        let mut r = vec![0.0; self.n];
        self.matvec(x, &mut r);
        for i in 0..self.n {
            r[i] -= self.rhs[i];
        }
        r
    }

    /// Relative residual `||Ax - b||_2 / ||b||_2`.
    pub fn relative_residual(&self, x: &[f64]) -> f64 {
        let r = self.residual(x);
        let rn = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        let bn = self.rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
        if bn > 0.0 { rn / bn } else { rn }
    }

    /// Weighted L2 norm of the residual restricted to interior and interface
    /// rows: the truncation measure used by the consistency oracle.
    pub fn consistency_residual(&self, x: &[f64]) -> f64 {
        let r = self.residual(x);
        let mut s = 0.0;
        for i in 0..self.n {
            if matches!(self.row_class[i], RowClass::Interior | RowClass::Interface) {
                s += self.row_weight[i] * r[i] * r[i];
            }
        }
        s.sqrt()
    }

    /// Entry lookup (zero when absent); intended for small-grid structure tests.
    pub fn entry(&self, row: usize, col: usize) -> f64 {
        for k in self.row_ptr[row]..self.row_ptr[row + 1] {
            if self.col_idx[k] as usize == col {
                return self.values[k];
            }
        }
        0.0
    }

    /// Dump in MatrixMarket coordinate format (1-based indices).
    pub fn write_matrix_market<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
        writeln!(w, "{} {} {}", self.n, self.n, self.nnz())?;
        for r in 0..self.n {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                writeln!(w, "{} {} {:.17e}", r + 1, self.col_idx[k] as usize + 1, self.values[k])?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_are_summed() {
        let mut b = SystemBuilder::new(2);
        b.add(0, 0, 1.0);
        b.add(0, 0, 2.0);
        b.add(0, 1, -1.0);
        b.add(1, 1, 4.0);
        let sys = b.finalize().unwrap();
        assert_eq!(sys.entry(0, 0), 3.0);
        assert_eq!(sys.entry(0, 1), -1.0);
        assert_eq!(sys.nnz(), 3);
    }

    #[test]
    fn empty_row_rejected() {
        let mut b = SystemBuilder::new(3);
        b.add(0, 0, 1.0);
        b.add(2, 2, 1.0);
        assert!(b.finalize().is_err());
    }

    #[test]
    fn matvec_and_residual() {
        let mut b = SystemBuilder::new(2);
        b.add(0, 0, 2.0);
        b.add(0, 1, 1.0);
        b.add(1, 0, 1.0);
        b.add(1, 1, 3.0);
        b.add_rhs(0, 3.0);
        b.add_rhs(1, 4.0);
        let sys = b.finalize().unwrap();
        let x = [1.0, 1.0];
        assert!(sys.relative_residual(&x) < 1e-15);
    }

    #[test]
    fn matrix_market_roundtrip_header() {
        let mut b = SystemBuilder::new(1);
        b.add(0, 0, 1.5);
        let sys = b.finalize().unwrap();
        let mut buf = Vec::new();
        sys.write_matrix_market(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("%%MatrixMarket matrix coordinate real general"));
        assert!(s.contains("1 1 1.5"));
    }
}
