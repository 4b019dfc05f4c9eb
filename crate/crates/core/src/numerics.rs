//! Dense matrix kernels: a cyclic Jacobi eigensolver for real symmetric
//! matrices, Hermitian spectra through the real embedding, Gram-matrix rank of
//! operator families and subspace intersection dimension.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;
pub type ComplexVector = DVector<Complex64>;

/// Maximum number of full Jacobi sweeps before giving up.
pub const MAX_SWEEPS: usize = 100;

/// Numerical thresholds shared by every module.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Eigenpair residual bound, relative to the Frobenius norm of the input.
    pub eig_residual: f64,
    /// Gap below which neighbouring eigenvalues are merged into one cluster.
    pub cluster: f64,
    /// Relative eigenvalue threshold for numerical rank.
    pub rank: f64,
    /// Allowed negative slack for positivity.
    pub psd: f64,
    /// Entrywise matrix comparison.
    #[serde(rename = "match")]
    pub matching: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            eig_residual: 1e-11,
            cluster: 1e-7,
            rank: 1e-9,
            psd: 1e-10,
            matching: 1e-10,
        }
    }
}

impl Tolerances {
    pub fn new(eig_residual: f64, cluster: f64, rank: f64, psd: f64, matching: f64) -> Result<Self> {
        let tol = Self {
            eig_residual,
            cluster,
            rank,
            psd,
            matching,
        };
        tol.validate()?;
        Ok(tol)
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("eig_residual", self.eig_residual),
            ("cluster", self.cluster),
            ("rank", self.rank),
            ("psd", self.psd),
            ("match", self.matching),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "tolerance {name} must be strictly positive, got {v}"
                )));
            }
        }
        Ok(())
    }

    pub fn with_cluster(mut self, cluster: f64) -> Self {
        self.cluster = cluster;
        self
    }
}

/// Real symmetric matrix. Symmetry is exact: construction mirrors or averages
/// the two triangles.
#[derive(Debug, Clone, PartialEq)]
pub struct RealSymmetricMatrix(DMatrix<f64>);

impl RealSymmetricMatrix {
    /// Builds the matrix from its upper triangle (`i <= j`); the lower
    /// triangle is mirrored.
    pub fn from_upper_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        Self(m)
    }

    /// Symmetrizes an arbitrary square matrix as `(M + Mᵀ)/2`.
    pub fn symmetrize(m: &DMatrix<f64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::InvalidArgument(format!(
                "expected a square matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let n = m.nrows();
        Ok(Self::from_upper_fn(n, |i, j| {
            if i == j {
                m[(i, i)]
            } else {
                0.5 * (m[(i, j)] + m[(j, i)])
            }
        }))
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    /// Largest `|M_ij − M_ji|`; zero by construction.
    pub fn asymmetry(&self) -> f64 {
        (&self.0 - self.0.transpose()).amax()
    }
}

/// Output of [`eig_sym`].
#[derive(Debug, Clone)]
pub struct SymEigen {
    /// Eigenvalues in ascending order.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, ordered like `values`.
    pub vectors: Option<DMatrix<f64>>,
    pub sweeps: usize,
    /// `max_i ‖M v_i − λ_i v_i‖`, available when vectors were requested.
    pub max_residual: Option<f64>,
}

/// Eigendecomposition of a real symmetric matrix by cyclic Jacobi rotations.
///
/// Sweeps over all off-diagonal pairs until no element exceeds
/// `ε·‖M‖_F`, for at most [`MAX_SWEEPS`] sweeps. When eigenvectors are
/// requested the residuals are checked against `tol.eig_residual·‖M‖_F`.
pub fn eig_sym(m: &RealSymmetricMatrix, want_vectors: bool, tol: &Tolerances) -> Result<SymEigen> {
    let n = m.n();
    if n == 0 {
        return Err(Error::InvalidArgument("empty matrix".into()));
    }
    let norm = m.frobenius_norm();
    if !norm.is_finite() {
        return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
    }

    // Row-major working copy.
    let mut a: Vec<f64> = (0..n * n).map(|k| m.get(k / n, k % n)).collect();
    let mut v: Vec<f64> = if want_vectors {
        let mut id = vec![0.0; n * n];
        for i in 0..n {
            id[i * n + i] = 1.0;
        }
        id
    } else {
        Vec::new()
    };

    let threshold = f64::EPSILON * norm;
    let mut sweeps = 0;
    let mut converged = n == 1 || norm == 0.0;
    while !converged {
        if sweeps == MAX_SWEEPS {
            let off = off_diagonal_norm(&a, n);
            return Err(Error::NumericalFailure(format!(
                "Jacobi eigensolver did not converge after {MAX_SWEEPS} sweeps \
                 (n = {n}, off-diagonal norm {off:.3e}, matrix norm {norm:.3e})"
            )));
        }
        sweeps += 1;
        let mut rotations = 0usize;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq.abs() <= threshold {
                    continue;
                }
                rotations += 1;
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    let new_kp = c * akp - s * akq;
                    let new_kq = s * akp + c * akq;
                    a[k * n + p] = new_kp;
                    a[p * n + k] = new_kp;
                    a[k * n + q] = new_kq;
                    a[q * n + k] = new_kq;
                }
                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                if want_vectors {
                    for k in 0..n {
                        let vkp = v[k * n + p];
                        let vkq = v[k * n + q];
                        v[k * n + p] = c * vkp - s * vkq;
                        v[k * n + q] = s * vkp + c * vkq;
                    }
                }
            }
        }
        converged = rotations == 0;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]));
    let values: Vec<f64> = order.iter().map(|&i| a[i * n + i]).collect();

    let (vectors, max_residual) = if want_vectors {
        let vecs = DMatrix::from_fn(n, n, |r, c| v[r * n + order[c]]);
        let mv = m.as_matrix() * &vecs;
        let mut worst = 0.0f64;
        for (c, &lambda) in values.iter().enumerate() {
            let res = (mv.column(c) - vecs.column(c) * lambda).norm();
            worst = worst.max(res);
        }
        if worst > tol.eig_residual * norm.max(f64::MIN_POSITIVE) {
            return Err(Error::NumericalFailure(format!(
                "eigenpair residual {worst:.3e} exceeds {:.1e}·‖M‖ = {:.3e}",
                tol.eig_residual,
                tol.eig_residual * norm
            )));
        }
        (Some(vecs), Some(worst))
    } else {
        (None, None)
    };

    Ok(SymEigen {
        values,
        vectors,
        sweeps,
        max_residual,
    })
}

fn off_diagonal_norm(a: &[f64], n: usize) -> f64 {
    let mut s = 0.0;
    for p in 0..n {
        for q in 0..n {
            if p != q {
                s += a[p * n + q] * a[p * n + q];
            }
        }
    }
    s.sqrt()
}

/// Largest entrywise modulus of `M − M†`.
pub fn hermiticity_defect(m: &ComplexMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// The real symmetric `2n×2n` matrix `[[Re M, −Im M], [Im M, Re M]]` of the
/// Hermitian part of `M`. Each eigenvalue of the Hermitian part appears
/// twice in its spectrum.
pub fn real_embedding(m: &ComplexMatrix) -> RealSymmetricMatrix {
    let n = m.nrows();
    let herm = |i: usize, j: usize| 0.5 * (m[(i, j)] + m[(j, i)].conj());
    RealSymmetricMatrix::from_upper_fn(2 * n, |r, c| {
        let (bi, i) = (r / n, r % n);
        let (bj, j) = (c / n, c % n);
        let z = herm(i, j);
        match (bi, bj) {
            (0, 0) | (1, 1) => z.re,
            (0, 1) => -z.im,
            _ => z.im,
        }
    })
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn eigvals_hermitian(m: &ComplexMatrix, tol: &Tolerances) -> Result<Vec<f64>> {
    if !m.is_square() {
        return Err(Error::InvalidArgument(format!(
            "expected a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let defect = hermiticity_defect(m);
    if defect > tol.matching {
        return Err(Error::InvalidArgument(format!(
            "matrix is not Hermitian: max |M − M†| = {defect:.3e} > {:.1e}",
            tol.matching
        )));
    }
    let doubled = eig_sym(&real_embedding(m), false, tol)?.values;
    Ok(doubled.iter().step_by(2).copied().collect())
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eig_hermitian(m: &ComplexMatrix, tol: &Tolerances) -> Result<f64> {
    Ok(eigvals_hermitian(m, tol)?[0])
}

/// Number of eigenvalues above `tol.rank` times the largest one.
pub fn numerical_rank(eigenvalues: &[f64], tol: &Tolerances) -> usize {
    let largest = eigenvalues.iter().copied().fold(0.0f64, f64::max);
    if largest <= 0.0 {
        return 0;
    }
    eigenvalues
        .iter()
        .filter(|&&e| e > tol.rank * largest)
        .count()
}

/// Hilbert–Schmidt Gram matrix `G_ij = tr(O_i† O_j)`.
pub fn hs_gram(ops: &[ComplexMatrix]) -> ComplexMatrix {
    let k = ops.len();
    let mut g = ComplexMatrix::zeros(k, k);
    for i in 0..k {
        for j in i..k {
            let z = hs_inner(&ops[i], &ops[j]);
            g[(i, j)] = z;
            g[(j, i)] = z.conj();
        }
    }
    g
}

/// `tr(A† B)`.
pub fn hs_inner(a: &ComplexMatrix, b: &ComplexMatrix) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// Dimension of the linear span of a family of equally shaped operators.
pub fn gram_rank(ops: &[ComplexMatrix], tol: &Tolerances) -> Result<usize> {
    let Some(first) = ops.first() else {
        return Err(Error::InvalidArgument("empty operator list".into()));
    };
    if let Some(bad) = ops.iter().position(|o| o.shape() != first.shape()) {
        return Err(Error::InvalidArgument(format!(
            "operator {bad} has shape {:?}, expected {:?}",
            ops[bad].shape(),
            first.shape()
        )));
    }
    rank_of_gram(&hs_gram(ops), tol)
}

fn rank_of_gram(g: &ComplexMatrix, tol: &Tolerances) -> Result<usize> {
    let doubled = eig_sym(&real_embedding(g), false, tol)?.values;
    Ok(numerical_rank(&doubled, tol) / 2)
}

/// Dimension of the span of a family of vectors.
pub fn span_dim(vectors: &[ComplexVector], tol: &Tolerances) -> Result<usize> {
    if vectors.is_empty() {
        return Ok(0);
    }
    let dim = vectors[0].len();
    if vectors.iter().any(|v| v.len() != dim) {
        return Err(Error::InvalidArgument(
            "vectors live in different ambient dimensions".into(),
        ));
    }
    let k = vectors.len();
    let mut g = ComplexMatrix::zeros(k, k);
    for i in 0..k {
        for j in i..k {
            let z = vectors[i].dotc(&vectors[j]);
            g[(i, j)] = z;
            g[(j, i)] = z.conj();
        }
    }
    rank_of_gram(&g, tol)
}

/// `dim(span U ∩ span V) = dim U + dim V − dim(U + V)`.
pub fn subspace_intersection_dim(
    u: &[ComplexVector],
    v: &[ComplexVector],
    tol: &Tolerances,
) -> Result<usize> {
    if let (Some(a), Some(b)) = (u.first(), v.first()) {
        if a.len() != b.len() {
            return Err(Error::InvalidArgument(format!(
                "ambient dimensions differ: {} vs {}",
                a.len(),
                b.len()
            )));
        }
    }
    let du = span_dim(u, tol)?;
    let dv = span_dim(v, tol)?;
    let joined: Vec<ComplexVector> = u.iter().chain(v.iter()).cloned().collect();
    let duv = span_dim(&joined, tol)?;
    Ok((du + dv).saturating_sub(duv))
}

/// Columns of a matrix as vectors; these span its range.
pub fn columns(m: &ComplexMatrix) -> Vec<ComplexVector> {
    m.column_iter().map(|c| c.into_owned()).collect()
}

/// A group of numerically equal eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub value: f64,
    pub multiplicity: usize,
}

/// Single-linkage clustering of an ascending list: consecutive values closer
/// than `width` share a cluster. The representative is the cluster mean.
pub fn cluster_sorted(values: &[f64], width: f64) -> Vec<Cluster> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        if i == values.len() || values[i] - values[i - 1] > width {
            if i > start {
                let members = &values[start..i];
                out.push(Cluster {
                    value: members.iter().sum::<f64>() / members.len() as f64,
                    multiplicity: members.len(),
                });
            }
            start = i;
        }
    }
    out
}

/// `|a − b|` maximised over entries.
pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}
