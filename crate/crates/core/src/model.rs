//! Problem data and points of the lifted `(x, X)` space.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use thiserror::Error;

/// Slack allowed when checking that a point lies in the unit box.
pub const BOX_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("dimension must be at least 1")]
    EmptyDimension,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not symmetric: entry ({i},{j}) = {a} but ({j},{i}) = {b}")]
    Asymmetric { i: usize, j: usize, a: f64, b: f64 },
    #[error("x[{index}] = {value} lies outside [0,1] by more than {BOX_TOL:e}")]
    OutOfBox { index: usize, value: f64 },
}

/// Position of an entry of a symmetric matrix in packed lower-triangular
/// storage. The pair is canonicalised so that `i <= j`; entry `(i, j)` lives in
/// row `j`, column `i` of the lower triangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymIndex {
    i: usize,
    j: usize,
}

impl SymIndex {
    pub fn new(a: usize, b: usize) -> Self {
        if a <= b {
            SymIndex { i: a, j: b }
        } else {
            SymIndex { i: b, j: a }
        }
    }

    pub fn pair(self) -> (usize, usize) {
        (self.i, self.j)
    }

    pub fn is_diagonal(self) -> bool {
        self.i == self.j
    }

    pub fn offset(self) -> usize {
        self.j * (self.j + 1) / 2 + self.i
    }

    pub fn from_offset(offset: usize) -> Self {
        // largest j with j(j+1)/2 <= offset
        let mut j = (((8 * offset + 1) as f64).sqrt() as usize).saturating_sub(1) / 2;
        while (j + 1) * (j + 2) / 2 <= offset {
            j += 1;
        }
        while j * (j + 1) / 2 > offset {
            j -= 1;
        }
        SymIndex {
            i: offset - j * (j + 1) / 2,
            j,
        }
    }

    /// Number of packed entries of an `n x n` symmetric matrix.
    pub fn count(n: usize) -> usize {
        n * (n + 1) / 2
    }

    /// All entries of an `n x n` symmetric matrix in packed order.
    pub fn all(n: usize) -> impl Iterator<Item = SymIndex> {
        (0..SymIndex::count(n)).map(SymIndex::from_offset)
    }
}

/// `max x'Qx + q'x` over `x` in `[0,1]^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxQpInstance {
    quad: DMatrix<f64>,
    lin: DVector<f64>,
    label: Option<String>,
}

impl BoxQpInstance {
    pub fn new(
        quad: DMatrix<f64>,
        lin: DVector<f64>,
        label: Option<String>,
    ) -> Result<Self, ModelError> {
        let n = lin.len();
        if n == 0 {
            return Err(ModelError::EmptyDimension);
        }
        if quad.nrows() != n || quad.ncols() != n {
            return Err(ModelError::DimensionMismatch {
                expected: n,
                found: quad.nrows().max(quad.ncols()),
            });
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let (a, b) = (quad[(i, j)], quad[(j, i)]);
                if a.to_bits() != b.to_bits() && a != b {
                    return Err(ModelError::Asymmetric { i, j, a, b });
                }
            }
        }
        Ok(BoxQpInstance { quad, lin, label })
    }

    /// Builds an instance from row slices; convenient for literals.
    pub fn from_rows(rows: &[&[f64]], lin: &[f64]) -> Result<Self, ModelError> {
        let n = lin.len();
        for r in rows {
            if r.len() != n {
                return Err(ModelError::DimensionMismatch {
                    expected: n,
                    found: r.len(),
                });
            }
        }
        if rows.len() != n {
            return Err(ModelError::DimensionMismatch {
                expected: n,
                found: rows.len(),
            });
        }
        let quad = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
        Self::new(quad, DVector::from_column_slice(lin), None)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn n(&self) -> usize {
        self.lin.len()
    }

    pub fn quad(&self) -> &DMatrix<f64> {
        &self.quad
    }

    pub fn lin(&self) -> &DVector<f64> {
        &self.lin
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    /// Coefficient of the lifted variable `X_ij` (or `X_ii`) in `Q . X`.
    pub fn lifted_coefficient(&self, idx: SymIndex) -> f64 {
        let (i, j) = idx.pair();
        if i == j {
            self.quad[(i, i)]
        } else {
            2.0 * self.quad[(i, j)]
        }
    }

    /// Euclidean norm of the objective over `(x, packed X)` coordinates.
    pub fn objective_norm(&self) -> f64 {
        let n = self.n();
        let lin: f64 = self.lin.iter().map(|v| v * v).sum();
        let quad: f64 = SymIndex::all(n)
            .map(|s| self.lifted_coefficient(s).powi(2))
            .sum();
        (lin + quad).sqrt()
    }

    /// `Q . X + q'x`.
    pub fn objective_value(&self, p: &MomentPoint) -> Result<f64, ModelError> {
        let n = self.n();
        if p.n() != n {
            return Err(ModelError::DimensionMismatch {
                expected: n,
                found: p.n(),
            });
        }
        Ok(self.quad.component_mul(&p.xx).sum() + self.lin.dot(&p.x))
    }

    /// `x'Qx + q'x` after clamping `x` into the box.
    pub fn feasible_value(&self, x: &DVector<f64>) -> Result<f64, ModelError> {
        let n = self.n();
        if x.len() != n {
            return Err(ModelError::DimensionMismatch {
                expected: n,
                found: x.len(),
            });
        }
        let clamped = clamp_to_box(x)?;
        Ok(clamped.dot(&(&self.quad * &clamped)) + self.lin.dot(&clamped))
    }
}

/// Clamps into `[0,1]^n`, rejecting components outside by more than [`BOX_TOL`].
pub fn clamp_to_box(x: &DVector<f64>) -> Result<DVector<f64>, ModelError> {
    for (index, &value) in x.iter().enumerate() {
        if !(value >= -BOX_TOL && value <= 1.0 + BOX_TOL) {
            return Err(ModelError::OutOfBox { index, value });
        }
    }
    Ok(x.map(|v| v.clamp(0.0, 1.0)))
}

/// Index triple `i < j < k`.
pub type Triple = (usize, usize, usize);

/// A point `(x, X)` of the lifted space, optionally carrying trilinear values
/// `z_ijk` for some triples.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentPoint {
    pub x: DVector<f64>,
    pub xx: DMatrix<f64>,
    pub z: BTreeMap<Triple, f64>,
}

impl MomentPoint {
    pub fn new(x: DVector<f64>, xx: DMatrix<f64>) -> Result<Self, ModelError> {
        let n = x.len();
        if xx.nrows() != n || xx.ncols() != n {
            return Err(ModelError::DimensionMismatch {
                expected: n,
                found: xx.nrows(),
            });
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if xx[(i, j)] != xx[(j, i)] {
                    return Err(ModelError::Asymmetric {
                        i,
                        j,
                        a: xx[(i, j)],
                        b: xx[(j, i)],
                    });
                }
            }
        }
        Ok(MomentPoint {
            x,
            xx,
            z: BTreeMap::new(),
        })
    }

    /// The rank-one lift `(x, xx')`, with `z_ijk = x_i x_j x_k` on every triple
    /// when `with_z` is set.
    pub fn rank_one(x: &[f64], with_z: bool) -> Self {
        let x = DVector::from_column_slice(x);
        let xx = &x * x.transpose();
        let mut z = BTreeMap::new();
        if with_z {
            let n = x.len();
            for i in 0..n {
                for j in (i + 1)..n {
                    for k in (j + 1)..n {
                        z.insert((i, j, k), x[i] * x[j] * x[k]);
                    }
                }
            }
        }
        MomentPoint { x, xx, z }
    }

    /// Reads `x` and `X` off a `(n+1) x (n+1)` matrix `Y(x, X)`; the corner is
    /// not checked.
    pub fn from_y(y: &DMatrix<f64>) -> Self {
        let n = y.nrows() - 1;
        let x = DVector::from_fn(n, |i, _| y[(0, i + 1)]);
        let xx = DMatrix::from_fn(n, n, |i, j| {
            if i <= j {
                y[(i + 1, j + 1)]
            } else {
                y[(j + 1, i + 1)]
            }
        });
        MomentPoint {
            x,
            xx,
            z: BTreeMap::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    /// `X_ab` by index, symmetric.
    pub fn lifted(&self, a: usize, b: usize) -> f64 {
        self.xx[(a, b)]
    }

    /// `Y(x, X) = [1 x'; x X]`.
    pub fn assemble_y(&self) -> DMatrix<f64> {
        let n = self.n();
        DMatrix::from_fn(n + 1, n + 1, |r, c| match (r, c) {
            (0, 0) => 1.0,
            (0, c) => self.x[c - 1],
            (r, 0) => self.x[r - 1],
            (r, c) => self.xx[(r - 1, c - 1)],
        })
    }

    /// Ratio of the second-largest to the largest eigenvalue of `Y(x, X)`.
    /// Zero for an exact rank-one lift.
    pub fn rank_ratio(&self) -> f64 {
        let eig = SymmetricEigen::new(self.assemble_y());
        let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        vals.sort_by(|a, b| b.total_cmp(a));
        if vals.len() < 2 || vals[0] <= 0.0 {
            return 0.0;
        }
        vals[1].max(0.0) / vals[0]
    }

    /// Smallest eigenvalue of `Y(x, X)`.
    pub fn min_eigenvalue(&self) -> f64 {
        SymmetricEigen::new(self.assemble_y())
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}
