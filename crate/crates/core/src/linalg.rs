//! Dense matrices with SVD-based rank, kernel and cokernel at a relative
//! singular-value cutoff.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::SizeMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_rows(cols: usize, rows: &[Vec<f64>]) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (k, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(Error::SizeMismatch(format!(
                    "row {k} has {} entries, expected {cols}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Ok(Self { rows: rows.len(), cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.cols + j] = value;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Vertical block stack; all blocks must share the column count.
    pub fn stack(blocks: &[&DenseMatrix]) -> Result<Self> {
        let cols = blocks.first().map_or(0, |b| b.cols);
        let mut data = Vec::new();
        let mut rows = 0;
        for b in blocks {
            if b.cols != cols {
                return Err(Error::SizeMismatch(format!(
                    "cannot stack {} columns onto {cols}",
                    b.cols
                )));
            }
            data.extend_from_slice(&b.data);
            rows += b.rows;
        }
        Ok(Self { rows, cols, data })
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.cols, "dimension mismatch in mul_vec");
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    /// `y^T M` for a row vector `y`.
    pub fn left_mul_vec(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.rows, "dimension mismatch in left_mul_vec");
        let mut out = vec![0.0; self.cols];
        for (i, &yi) in y.iter().enumerate() {
            if yi != 0.0 {
                for (o, a) in out.iter_mut().zip(self.row(i)) {
                    *o += yi * a;
                }
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// Rows permuted so that row `k` of the result is row `perm[k]`.
    pub fn permute_rows(&self, perm: &[usize]) -> Self {
        let rows: Vec<Vec<f64>> = perm.iter().map(|&i| self.row(i).to_vec()).collect();
        Self::from_rows(self.cols, &rows).expect("permutation keeps shape")
    }

    fn to_nalgebra(&self, min_rows: usize) -> DMatrix<f64> {
        let rows = self.rows.max(min_rows);
        DMatrix::from_fn(rows, self.cols, |i, j| if i < self.rows { self.get(i, j) } else { 0.0 })
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Singular values and the rank decision made from them.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// Descending, `min(rows, cols)` values.
    pub singular_values: Vec<f64>,
    pub cutoff: f64,
    pub rank: usize,
    /// Some singular value lies within a factor of ten of the cutoff.
    pub near_degenerate: bool,
}

struct Decomposition {
    spectrum: Spectrum,
    /// Right singular vectors ordered like the padded singular values.
    right: Vec<Vec<f64>>,
}

fn decompose(m: &DenseMatrix, tol_rank: f64, want_vectors: bool) -> Result<Decomposition> {
    if !m.is_finite() {
        return Err(Error::NonFinite("matrix"));
    }
    if m.cols == 0 {
        return Ok(Decomposition {
            spectrum: Spectrum {
                singular_values: Vec::new(),
                cutoff: 0.0,
                rank: 0,
                near_degenerate: false,
            },
            right: Vec::new(),
        });
    }
    // zero rows leave the kernel alone and make the thin SVD return all of V
    let padded = m.to_nalgebra(if want_vectors { m.cols } else { 0 });
    let svd = padded.svd(false, want_vectors);
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let all: Vec<f64> = order.iter().map(|&k| svd.singular_values[k]).collect();
    if all.iter().any(|s| !s.is_finite()) {
        return Err(Error::NonFinite("singular values"));
    }
    let largest = all.first().copied().unwrap_or(0.0);
    let cutoff = tol_rank * largest;
    let rank = all.iter().filter(|&&s| s > cutoff).count();
    let near_degenerate =
        largest > 0.0 && all.iter().any(|&s| s > cutoff / 10.0 && s <= cutoff * 10.0);
    let right = if want_vectors {
        let vt = svd
            .v_t
            .ok_or_else(|| Error::NonFinite("singular vectors"))?;
        order.iter().map(|&k| vt.row(k).iter().copied().collect()).collect()
    } else {
        Vec::new()
    };
    let keep = m.rows.min(m.cols);
    Ok(Decomposition {
        spectrum: Spectrum {
            singular_values: all.into_iter().take(keep).collect(),
            cutoff,
            rank,
            near_degenerate,
        },
        right,
    })
}

/// Singular values together with the rank decision.
pub fn spectrum(m: &DenseMatrix, tol_rank: f64) -> Result<Spectrum> {
    Ok(decompose(m, tol_rank, false)?.spectrum)
}

/// Number of singular values above `tol_rank` times the largest one.
pub fn numerical_rank(m: &DenseMatrix, tol_rank: f64) -> Result<usize> {
    Ok(spectrum(m, tol_rank)?.rank)
}

/// Orthonormal basis of the right null space.
pub fn kernel_basis(m: &DenseMatrix, tol_rank: f64) -> Result<Vec<Vec<f64>>> {
    let d = decompose(m, tol_rank, true)?;
    Ok(d.right.into_iter().skip(d.spectrum.rank).collect())
}

/// Orthonormal basis of the left null space.
pub fn cokernel_basis(m: &DenseMatrix, tol_rank: f64) -> Result<Vec<Vec<f64>>> {
    kernel_basis(&m.transpose(), tol_rank)
}

/// Minimum-norm least-squares solution of `M x = b`.
pub fn least_squares(m: &DenseMatrix, b: &[f64], tol_rank: f64) -> Result<Vec<f64>> {
    if b.len() != m.rows {
        return Err(Error::SizeMismatch("right-hand side length".into()));
    }
    let a = m.to_nalgebra(0);
    let svd = a.svd(true, true);
    let eps = tol_rank * svd.singular_values.max();
    let rhs = nalgebra::DVector::from_column_slice(b);
    let x = svd
        .solve(&rhs, eps)
        .map_err(|e| Error::LpBreakdown(format!("least squares failed: {e}")))?;
    Ok(x.iter().copied().collect())
}

/// Projects `v` onto the orthogonal complement of the span of `basis`
/// (which need not be orthonormal).
pub fn project_out(v: &[f64], basis: &[Vec<f64>]) -> Vec<f64> {
    let ortho = orthonormalize(basis, 1e-12);
    let mut out = v.to_vec();
    for q in &ortho {
        let c = dot(&out, q);
        for (o, x) in out.iter_mut().zip(q) {
            *o -= c * x;
        }
    }
    out
}

/// Modified Gram-Schmidt; vectors whose residual falls below `tol` times
/// their norm are dropped.
pub fn orthonormalize(vectors: &[Vec<f64>], tol: f64) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for v in vectors {
        let scale = norm(v);
        if scale == 0.0 {
            continue;
        }
        let mut w = v.clone();
        for _ in 0..2 {
            for q in &out {
                let c = dot(&w, q);
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= c * qi;
                }
            }
        }
        let r = norm(&w);
        if r > tol * scale {
            w.iter_mut().for_each(|x| *x /= r);
            out.push(w);
        }
    }
    out
}
