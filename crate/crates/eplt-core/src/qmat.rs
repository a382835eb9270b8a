//! Dense complex linear-algebra substrate: tensor products, partial trace and
//! transpose, Hermitian eigendecomposition, operator norms and Haar sampling.
//!
//! Everything is a plain dense `DMatrix<Complex<f64>>`; the paper-scale
//! problems this crate targets (local dimension ≤ 8, up to 6 parties) never
//! need sparse or structured storage.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::tolerance::ToleranceProfile;

pub type C64 = num_complex::Complex<f64>;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn cr(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Ordered list of local dimensions of a multipartite system.
///
/// The product of the dimensions must match the matrix dimension of any
/// operator the shape annotates. Dimension-1 registers are allowed as trivial
/// factors (they show up as degenerate ancilla slots in dilations).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsystemShape {
    dims: Vec<usize>,
}

impl SubsystemShape {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidParameter("shape needs at least one subsystem".into()));
        }
        if dims.iter().any(|&d| d == 0) {
            return Err(Error::InvalidParameter("subsystem dimension 0".into()));
        }
        Ok(Self { dims })
    }

    /// Single system of dimension `d`.
    pub fn single(d: usize) -> Self {
        Self { dims: vec![d] }
    }

    /// Two parties of equal local dimension `d`.
    pub fn bipartite(d: usize) -> Self {
        Self { dims: vec![d, d] }
    }

    /// `n` qubits.
    pub fn qubits(n: usize) -> Self {
        Self { dims: vec![2; n] }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn parties(&self) -> usize {
        self.dims.len()
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    /// Concatenation of two shapes (shape of a tensor product).
    pub fn join(&self, other: &Self) -> Self {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self { dims }
    }

    pub fn check_matches(&self, m: &CMat) -> Result<()> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "matrix is {}x{}, expected square",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.nrows() != self.total_dim() {
            return Err(Error::DimensionMismatch(format!(
                "matrix dimension {} does not match shape {:?} (product {})",
                m.nrows(),
                self.dims,
                self.total_dim()
            )));
        }
        Ok(())
    }

    /// Decompose a flat index into per-party indices (row-major).
    fn split(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        for k in (0..self.dims.len()).rev() {
            out[k] = idx % self.dims[k];
            idx /= self.dims[k];
        }
        out
    }

    /// Recompose per-party indices into a flat index (row-major).
    fn flatten(&self, parts: &[usize]) -> usize {
        let mut idx = 0;
        for (k, &p) in parts.iter().enumerate() {
            idx = idx * self.dims[k] + p;
        }
        idx
    }
}

pub fn identity(d: usize) -> CMat {
    CMat::identity(d, d)
}

pub fn zeros(d: usize) -> CMat {
    CMat::zeros(d, d)
}

/// Computational basis column vector |i⟩.
pub fn basis_vector(d: usize, i: usize) -> CVec {
    let mut v = CVec::zeros(d);
    v[i] = cr(1.0);
    v
}

/// |i⟩⟨j| in dimension `d`.
pub fn basis_matrix(d: usize, i: usize, j: usize) -> CMat {
    let mut m = zeros(d);
    m[(i, j)] = cr(1.0);
    m
}

/// Projector |v⟩⟨v| (the vector is not normalized here).
pub fn projector(v: &CVec) -> CMat {
    v * v.adjoint()
}

pub fn max_abs_entry(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    assert_eq!(a.shape(), b.shape(), "max_abs_diff on mismatched shapes");
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn hermiticity_deviation(m: &CMat) -> f64 {
    max_abs_diff(&m.adjoint(), m)
}

pub fn is_hermitian(m: &CMat, tol: f64) -> bool {
    m.nrows() == m.ncols() && hermiticity_deviation(m) <= tol
}

pub fn trace_real(m: &CMat) -> f64 {
    m.trace().re
}

/// Kronecker product. Shapes concatenate: an entry of the result at
/// `(i·rb + k, j·cb + l)` equals `a[i,j] · b[k,l]`.
pub fn tensor(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn tensor_all(mats: &[CMat]) -> CMat {
    assert!(!mats.is_empty(), "tensor_all of empty list");
    let mut out = mats[0].clone();
    for m in &mats[1..] {
        out = tensor(&out, m);
    }
    out
}

/// Trace out every party not in `keep`; kept parties stay in their original
/// order. The trace of the input is preserved.
pub fn partial_trace(m: &CMat, shape: &SubsystemShape, keep: &[usize]) -> Result<CMat> {
    shape.check_matches(m)?;
    if keep.is_empty() {
        return Err(Error::InvalidParameter("partial_trace keeps no party".into()));
    }
    let n = shape.parties();
    let mut keep = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if keep.iter().any(|&k| k >= n) {
        return Err(Error::InvalidParameter(format!(
            "keep set {:?} out of range for {} parties",
            keep, n
        )));
    }
    let traced: Vec<usize> = (0..n).filter(|k| !keep.contains(k)).collect();
    let kept_dims: Vec<usize> = keep.iter().map(|&k| shape.dims()[k]).collect();
    let out_dim: usize = kept_dims.iter().product();
    let traced_dims: Vec<usize> = traced.iter().map(|&k| shape.dims()[k]).collect();
    let traced_total: usize = traced_dims.iter().product::<usize>().max(1);

    let out_shape = SubsystemShape { dims: kept_dims };
    let trc_shape = SubsystemShape { dims: if traced_dims.is_empty() { vec![1] } else { traced_dims } };

    let mut out = CMat::zeros(out_dim, out_dim);
    let mut row_parts = vec![0usize; n];
    let mut col_parts = vec![0usize; n];
    for i in 0..out_dim {
        let ip = out_shape.split(i);
        for j in 0..out_dim {
            let jp = out_shape.split(j);
            let mut acc = C64::default();
            for t in 0..traced_total {
                let tp = trc_shape.split(t);
                for (slot, &party) in keep.iter().enumerate() {
                    row_parts[party] = ip[slot];
                    col_parts[party] = jp[slot];
                }
                for (slot, &party) in traced.iter().enumerate() {
                    row_parts[party] = tp[slot];
                    col_parts[party] = tp[slot];
                }
                acc += m[(shape.flatten(&row_parts), shape.flatten(&col_parts))];
            }
            out[(i, j)] = acc;
        }
    }
    Ok(out)
}

/// Transpose the indices of a single party. Hermiticity is preserved for
/// Hermitian input, and the operation is an involution.
pub fn partial_transpose(m: &CMat, shape: &SubsystemShape, party: usize) -> Result<CMat> {
    shape.check_matches(m)?;
    if party >= shape.parties() {
        return Err(Error::InvalidParameter(format!(
            "party {} out of range for {} parties",
            party,
            shape.parties()
        )));
    }
    let dim = shape.total_dim();
    let mut out = CMat::zeros(dim, dim);
    for i in 0..dim {
        let mut ip = shape.split(i);
        for j in 0..dim {
            let mut jp = shape.split(j);
            std::mem::swap(&mut ip[party], &mut jp[party]);
            let r = shape.flatten(&ip);
            let c = shape.flatten(&jp);
            std::mem::swap(&mut ip[party], &mut jp[party]);
            out[(r, c)] = m[(i, j)];
        }
    }
    Ok(out)
}

/// Reorder subsystems: party `k` of the output is party `perm[k]` of the
/// input. `perm` must be a permutation of `0..parties`.
pub fn permute_systems(m: &CMat, shape: &SubsystemShape, perm: &[usize]) -> Result<(CMat, SubsystemShape)> {
    shape.check_matches(m)?;
    let n = shape.parties();
    let mut seen = vec![false; n];
    if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
        return Err(Error::InvalidParameter(format!("{:?} is not a permutation of 0..{}", perm, n)));
    }
    let new_dims: Vec<usize> = perm.iter().map(|&p| shape.dims()[p]).collect();
    let new_shape = SubsystemShape { dims: new_dims };
    let dim = shape.total_dim();
    let mut out = CMat::zeros(dim, dim);
    let mut old_row = vec![0usize; n];
    let mut old_col = vec![0usize; n];
    for i in 0..dim {
        let ip = new_shape.split(i);
        for j in 0..dim {
            let jp = new_shape.split(j);
            for k in 0..n {
                old_row[perm[k]] = ip[k];
                old_col[perm[k]] = jp[k];
            }
            out[(i, j)] = m[(shape.flatten(&old_row), shape.flatten(&old_col))];
        }
    }
    Ok((out, new_shape))
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
///
/// Returns `(eigenvalues, eigenvectors)` with eigenvectors as columns, so that
/// `m == V diag(λ) V†` up to round-off. Rejects input whose Hermiticity
/// deviation exceeds `tol.herm`.
pub fn eig_hermitian(m: &CMat, tol: &ToleranceProfile) -> Result<(Vec<f64>, CMat)> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch(format!("{}x{} matrix in eig_hermitian", m.nrows(), m.ncols())));
    }
    let dev = hermiticity_deviation(m);
    if dev > tol.herm {
        return Err(Error::NotHermitian { deviation: dev, tolerance: tol.herm });
    }
    // Symmetrize before factorizing so round-off in the input cannot leak
    // into complex eigenvalues.
    let h = (m + m.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(h);
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let vals: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vecs = CMat::zeros(n, n);
    for (new_col, &old_col) in order.iter().enumerate() {
        vecs.set_column(new_col, &eig.eigenvectors.column(old_col));
    }
    Ok((vals, vecs))
}

/// Eigenvalues only, ascending.
pub fn eigvals_hermitian(m: &CMat, tol: &ToleranceProfile) -> Result<Vec<f64>> {
    eig_hermitian(m, tol).map(|(v, _)| v)
}

/// Largest singular value (operator/sup norm). For Hermitian input this is
/// the largest absolute eigenvalue.
pub fn sup_norm(m: &CMat) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    let g = m.adjoint() * m;
    let eig = SymmetricEigen::new(g);
    let max = eig.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max.max(0.0).sqrt()
}

/// Haar-distributed random unitary via QR of a complex Ginibre matrix with
/// the R-diagonal phases folded back into Q.
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMat {
    assert!(d >= 1, "haar_unitary needs d >= 1");
    let g = CMat::from_fn(d, d, |_, _| {
        c(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    let phases: Vec<C64> = (0..d)
        .map(|k| {
            let z = r[(k, k)];
            if z.norm() < 1e-300 {
                cr(1.0)
            } else {
                z / z.norm()
            }
        })
        .collect();
    let mut u = q;
    for (k, &ph) in phases.iter().enumerate() {
        let col = u.column(k) * ph;
        u.set_column(k, &col);
    }
    u
}

/// Deterministic Haar unitary from a seed.
pub fn haar_unitary_seeded(d: usize, seed: u64) -> CMat {
    let mut rng = <ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
    haar_unitary(d, &mut rng)
}

/// Haar-random unit vector (column of a Haar unitary in distribution).
pub fn haar_state_vector<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CVec {
    let mut v = CVec::from_fn(d, |_, _| c(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let n = v.norm();
    v /= cr(n);
    v
}

/// Random Hermitian matrix with Gaussian entries (test and probe fodder).
pub fn random_hermitian<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMat {
    let g = CMat::from_fn(d, d, |_, _| c(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    (&g + g.adjoint()).scale(0.5)
}

/// Random full-rank density matrix (Ginibre ensemble, `G G† / tr`).
pub fn random_density_matrix<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMat {
    let g = CMat::from_fn(d, d, |_, _| c(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let p = &g * g.adjoint();
    let t = p.trace().re;
    p.scale(1.0 / t)
}

/// Row-major vectorization: `vec(M)[i·ncols + j] = M[i,j]`.
pub fn vectorize(m: &CMat) -> CVec {
    let (r, c_) = m.shape();
    CVec::from_fn(r * c_, |k, _| m[(k / c_, k % c_)])
}

/// Inverse of [`vectorize`].
pub fn unvectorize(v: &CVec, rows: usize, cols: usize) -> CMat {
    assert_eq!(v.len(), rows * cols, "unvectorize length mismatch");
    CMat::from_fn(rows, cols, |i, j| v[i * cols + j])
}

/// Unitary factor of the polar decomposition `m = U P` with `P = (m†m)^{1/2}`.
///
/// Among all unitaries, `U` maximizes `Re tr(W† m)`; this is what makes it the
/// right projection step for ascent over the unitary manifold.
pub fn polar_unitary(m: &CMat) -> CMat {
    let h = m.adjoint() * m;
    let eig = SymmetricEigen::new(h);
    let n = m.nrows();
    let mut inv_sqrt = CMat::zeros(n, n);
    for k in 0..n {
        let lam = eig.eigenvalues[k].max(1e-300);
        let col = eig.eigenvectors.column(k) * cr(lam.powf(-0.25) * lam.powf(-0.25));
        inv_sqrt.set_column(k, &col);
    }
    let p_inv_sqrt = &inv_sqrt * eig.eigenvectors.adjoint();
    m * p_inv_sqrt
}
