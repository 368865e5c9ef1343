use serde::{Deserialize, Serialize};

use crate::Fraction;

/// A sparse matrix stored column by column. Each column lists
/// `(row, value)` pairs in increasing row order with no explicit zeros.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SparseColumns {
    rows: usize,
    columns: Vec<Vec<(usize, Fraction)>>,
}

impl SparseColumns {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            columns: vec![Vec::new(); cols],
        }
    }

    pub fn from_dense(dense: &[Vec<Fraction>]) -> Self {
        let rows = dense.len();
        let cols = dense.first().map_or(0, Vec::len);
        let mut m = Self::new(rows, cols);
        for (i, row) in dense.iter().enumerate() {
            assert_eq!(row.len(), cols, "ragged dense matrix");
            for (j, v) in row.iter().enumerate() {
                m.set(i, j, v.clone());
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.columns.len()
    }

    pub fn nnz(&self) -> usize {
        self.columns.iter().map(Vec::len).sum()
    }

    /// Appends a new empty column and returns its index.
    pub fn push_column(&mut self) -> usize {
        self.columns.push(Vec::new());
        self.columns.len() - 1
    }

    /// Sets entry `(row, col)`; zero values remove the entry.
    pub fn set(&mut self, row: usize, col: usize, value: Fraction) {
        assert!(row < self.rows && col < self.columns.len(), "index out of range");
        let column = &mut self.columns[col];
        match column.binary_search_by_key(&row, |(r, _)| *r) {
            Ok(pos) if value.is_zero() => {
                column.remove(pos);
            }
            Ok(pos) => column[pos].1 = value,
            Err(_) if value.is_zero() => {}
            Err(pos) => column.insert(pos, (row, value)),
        }
    }

    pub fn get(&self, row: usize, col: usize) -> Fraction {
        let column = &self.columns[col];
        match column.binary_search_by_key(&row, |(r, _)| *r) {
            Ok(pos) => column[pos].1.clone(),
            Err(_) => Fraction::zero(),
        }
    }

    pub fn column(&self, col: usize) -> &[(usize, Fraction)] {
        &self.columns[col]
    }

    pub fn to_dense(&self) -> Vec<Vec<Fraction>> {
        let mut out = vec![vec![Fraction::zero(); self.cols()]; self.rows];
        for (j, column) in self.columns.iter().enumerate() {
            for (i, v) in column {
                out[*i][j] = v.clone();
            }
        }
        out
    }

    /// `A x`.
    pub fn mul_vec(&self, x: &[Fraction]) -> Vec<Fraction> {
        assert_eq!(x.len(), self.cols());
        let mut out = vec![Fraction::zero(); self.rows];
        for (column, xj) in self.columns.iter().zip(x) {
            if xj.is_zero() {
                continue;
            }
            for (i, v) in column {
                out[*i] += v * xj;
            }
        }
        out
    }

    /// `Aᵀ y`.
    pub fn mul_transpose_vec(&self, y: &[Fraction]) -> Vec<Fraction> {
        assert_eq!(y.len(), self.rows);
        self.columns
            .iter()
            .map(|column| column.iter().map(|(i, v)| v * &y[*i]).sum())
            .collect()
    }
}

/// `minimize c·x subject to A x = b, x ≥ 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpProblem {
    pub a: SparseColumns,
    pub b: Vec<Fraction>,
    pub c: Vec<Fraction>,
}

impl LpProblem {
    pub fn new(a: SparseColumns, b: Vec<Fraction>, c: Vec<Fraction>) -> Result<Self, crate::LpError> {
        if a.rows() != b.len() || a.cols() != c.len() {
            return Err(crate::LpError::DimensionMismatch {
                rows: a.rows(),
                cols: a.cols(),
                b: b.len(),
                c: c.len(),
            });
        }
        Ok(Self { a, b, c })
    }

    pub fn rows(&self) -> usize {
        self.a.rows()
    }

    pub fn cols(&self) -> usize {
        self.a.cols()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Solver output. `x`, `y`, `objective` and `basis` are meaningful only when
/// `status` is [`LpStatus::Optimal`]; otherwise they are empty / zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<Fraction>,
    pub y: Vec<Fraction>,
    pub objective: Fraction,
    /// Basic structural column per constraint row; `None` for a row whose
    /// basic variable is a (zero-valued) artificial.
    pub basis: Vec<Option<usize>>,
    pub pivots: usize,
}

impl LpSolution {
    pub(crate) fn without_optimum(status: LpStatus, pivots: usize) -> Self {
        Self {
            status,
            x: Vec::new(),
            y: Vec::new(),
            objective: Fraction::zero(),
            basis: Vec::new(),
            pivots,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}
