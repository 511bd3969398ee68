use std::fmt;

/// Compressed sparse row matrix. Column indices are 0-based.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    n_rows: usize,
    n_cols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CsrViolation(pub String);

impl fmt::Display for CsrViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid CSR structure: {}", self.0)
    }
}

impl std::error::Error for CsrViolation {}

impl SparseMatrix {
    /// Builds a matrix from raw CSR arrays, checking every structural invariant.
    pub fn from_csr(
        n_rows: usize,
        n_cols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self, CsrViolation> {
        let m = SparseMatrix {
            n_rows,
            n_cols,
            row_offsets,
            col_indices,
            values,
        };
        m.validate()?;
        Ok(m)
    }

    /// Assembles a matrix from per-row `(col, value)` lists that are already
    /// sorted by strictly increasing column.
    pub fn from_sorted_rows(
        n_cols: usize,
        rows: &[Vec<(usize, f64)>],
    ) -> Result<Self, CsrViolation> {
        let nnz = rows.iter().map(Vec::len).sum();
        let mut row_offsets = Vec::with_capacity(rows.len() + 1);
        let mut col_indices = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        row_offsets.push(0);
        for row in rows {
            for &(c, v) in row {
                col_indices.push(c);
                values.push(v);
            }
            row_offsets.push(col_indices.len());
        }
        Self::from_csr(rows.len(), n_cols, row_offsets, col_indices, values)
    }

    /// Checks the CSR invariants: offsets start at 0, are non-decreasing and
    /// end at nnz; columns strictly increase within a row and are `< n_cols`.
    pub fn validate(&self) -> Result<(), CsrViolation> {
        let bad = |msg: String| Err(CsrViolation(msg));
        if self.row_offsets.len() != self.n_rows + 1 {
            return bad(format!(
                "row_offsets has length {}, expected {}",
                self.row_offsets.len(),
                self.n_rows + 1
            ));
        }
        if self.row_offsets[0] != 0 {
            return bad("row_offsets[0] != 0".into());
        }
        if self.col_indices.len() != self.values.len() {
            return bad("col_indices and values differ in length".into());
        }
        if self.row_offsets[self.n_rows] != self.values.len() {
            return bad("last row offset does not equal nnz".into());
        }
        for r in 0..self.n_rows {
            let (lo, hi) = (self.row_offsets[r], self.row_offsets[r + 1]);
            if lo > hi {
                return bad(format!("row_offsets decrease at row {r}"));
            }
            let cols = &self.col_indices[lo..hi];
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return bad(format!("columns not strictly increasing in row {r}"));
            }
            if let Some(&c) = cols.last() {
                if c >= self.n_cols {
                    return bad(format!("column {c} out of range in row {r}"));
                }
            }
        }
        Ok(())
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column indices and values of one row.
    #[inline]
    pub fn row(&self, row: usize) -> (&[usize], &[f64]) {
        let (lo, hi) = (self.row_offsets[row], self.row_offsets[row + 1]);
        (&self.col_indices[lo..hi], &self.values[lo..hi])
    }

    /// `x_row · v`.
    #[inline]
    pub fn row_dot(&self, row: usize, v: &[f64]) -> f64 {
        debug_assert!(row < self.n_rows);
        debug_assert!(v.len() >= self.n_cols);
        let (cols, vals) = self.row(row);
        cols.iter().zip(vals).map(|(&c, &x)| x * v[c]).sum()
    }

    /// `out += alpha · x_row`.
    #[inline]
    pub fn row_axpy(&self, row: usize, alpha: f64, out: &mut [f64]) {
        let (cols, vals) = self.row(row);
        for (&c, &x) in cols.iter().zip(vals) {
            out[c] += alpha * x;
        }
    }

    /// Same matrix with a wider column space.
    pub(crate) fn widen(mut self, n_cols: usize) -> Self {
        debug_assert!(n_cols >= self.n_cols);
        self.n_cols = n_cols;
        self
    }
}
