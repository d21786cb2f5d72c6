//! Dense complex linear algebra with an explicit tolerance policy.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Eigenvalues closer than this are merged into one spectral projection.
pub const CLUSTER_GAP: f64 = 1e-8;

#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TolPolicy {
    pub abs_floor: f64,
    /// Multiplied by the largest matrix dimension and by the largest singular value.
    pub rank_rel: f64,
}

impl Default for TolPolicy {
    fn default() -> Self {
        Self { abs_floor: 1e-10, rank_rel: 64.0 * f64::EPSILON }
    }
}

impl TolPolicy {
    pub fn new(abs_floor: f64, rank_rel: f64) -> Result<Self> {
        if !(abs_floor >= 0.0) || !(rank_rel >= 0.0) {
            return Err(Error::InvalidInput("tolerances must be nonnegative".into()));
        }
        Ok(Self { abs_floor, rank_rel })
    }

    pub fn threshold(&self, max_dim: usize, sigma_max: f64) -> f64 {
        self.abs_floor.max(self.rank_rel * max_dim.max(1) as f64 * sigma_max)
    }
}

/// An orthonormal frame in C^n. `basis` is n×k, k may be zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    basis: CMatrix,
}

impl Subspace {
    /// Wraps a matrix whose columns are already orthonormal.
    pub fn from_orthonormal(basis: CMatrix) -> Self {
        debug_assert!(orthonormality_defect(&basis) < 1e-8);
        Self { basis }
    }

    pub fn zero(n: usize) -> Self {
        Self { basis: CMatrix::zeros(n, 0) }
    }

    pub fn full(n: usize) -> Self {
        Self { basis: CMatrix::identity(n, n) }
    }

    /// span{e_i : i in idx}
    pub fn coordinate(n: usize, idx: &[usize]) -> Self {
        let mut b = CMatrix::zeros(n, idx.len());
        for (j, &i) in idx.iter().enumerate() {
            b[(i, j)] = ONE;
        }
        Self { basis: b }
    }

    pub fn basis(&self) -> &CMatrix {
        &self.basis
    }

    pub fn into_basis(self) -> CMatrix {
        self.basis
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn is_zero(&self) -> bool {
        self.dim() == 0
    }

    pub fn projector(&self) -> CMatrix {
        projector(self)
    }

    /// Coordinates of the orthogonal projection of the columns of `m`.
    pub fn coords(&self, m: &CMatrix) -> CMatrix {
        self.basis.adjoint() * m
    }

    /// Distance of the columns of `m` from the subspace (max column norm of the residual).
    pub fn residual(&self, m: &CMatrix) -> f64 {
        let r = m - &self.basis * self.coords(m);
        max_col_norm(&r)
    }

    /// Embed into a larger ambient space at row offset `offset`.
    pub fn embed(&self, total: usize, offset: usize) -> Subspace {
        Subspace { basis: embed_rows(&self.basis, total, offset) }
    }
}

pub fn orthonormality_defect(b: &CMatrix) -> f64 {
    if b.ncols() == 0 {
        return 0.0;
    }
    let g = b.adjoint() * b - CMatrix::identity(b.ncols(), b.ncols());
    max_abs(&g)
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_col_norm(m: &CMatrix) -> f64 {
    (0..m.ncols()).fold(0.0, |acc, j| acc.max(m.column(j).norm()))
}

pub fn embed_rows(m: &CMatrix, total: usize, offset: usize) -> CMatrix {
    let mut out = CMatrix::zeros(total, m.ncols());
    out.view_mut((offset, 0), (m.nrows(), m.ncols())).copy_from(m);
    out
}

pub fn block_diag(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let mut out = CMatrix::zeros(a.nrows() + b.nrows(), a.ncols() + b.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut(a.shape(), b.shape()).copy_from(b);
    out
}

pub fn hcat(a: &CMatrix, b: &CMatrix) -> CMatrix {
    assert_eq!(a.nrows(), b.nrows());
    let mut out = CMatrix::zeros(a.nrows(), a.ncols() + b.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut((0, a.ncols()), b.shape()).copy_from(b);
    out
}

pub fn top_left(m: &CMatrix, r: usize, c: usize) -> CMatrix {
    m.view((0, 0), (r, c)).into_owned()
}

pub fn scalar(z: Complex64) -> CMatrix {
    CMatrix::from_element(1, 1, z)
}

/// Singular values sorted in decreasing order, together with U and V* when requested.
struct SortedSvd {
    u: Option<CMatrix>,
    v_t: Option<CMatrix>,
    s: Vec<f64>,
}

fn to_faer(m: &CMatrix) -> faer::Mat<Complex64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn from_faer(m: faer::MatRef<'_, Complex64>) -> CMatrix {
    CMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

// Full SVD as (U, singular values, V). faer occasionally reports NoConvergence
// on benign inputs; the adjoint takes a different path through the iteration.
fn full_svd(m: &CMatrix) -> (CMatrix, Vec<f64>, CMatrix) {
    let values = |s: faer::diag::DiagRef<'_, Complex64>| s.column_vector().iter().map(|x| x.re).collect();
    if let Ok(svd) = to_faer(m).svd() {
        return (from_faer(svd.U()), values(svd.S()), from_faer(svd.V()));
    }
    if let Ok(svd) = to_faer(&m.adjoint()).svd() {
        return (from_faer(svd.V()), values(svd.S()), from_faer(svd.U()));
    }
    let svd = nalgebra::SVD::new(m.clone(), true, true);
    let (u, v_t) = (svd.u.expect("u requested"), svd.v_t.expect("v requested"));
    let recon = &u * CMatrix::from_diagonal(&svd.singular_values.map(|x| c64(x, 0.0))) * &v_t;
    assert!(max_abs(&(recon - m)) <= 1e-12 * max_abs(m).max(1.0), "no SVD backend converged");
    let (r, c) = m.shape();
    let k = r.min(c);
    let mut u_full = CMatrix::zeros(r, r);
    u_full.columns_mut(0, k).copy_from(&u);
    let mut v_full = CMatrix::zeros(c, c);
    v_full.columns_mut(0, k).copy_from(&v_t.adjoint());
    // Complete the square factors; only the first k columns carry singular values.
    if k < r {
        let rest = orthogonal_complement(&Subspace { basis: u.clone() });
        u_full.columns_mut(k, r - k).copy_from(rest.basis());
    }
    if k < c {
        let rest = orthogonal_complement(&Subspace { basis: v_t.adjoint() });
        v_full.columns_mut(k, c - k).copy_from(rest.basis());
    }
    (u_full, svd.singular_values.iter().cloned().collect(), v_full)
}

fn sorted_svd(m: &CMatrix, want_u: bool, want_v: bool) -> SortedSvd {
    let (u, raw, v) = full_svd(m);
    let k = raw.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| raw[b].total_cmp(&raw[a]));
    let s = order.iter().map(|&i| raw[i]).collect();
    let u = want_u.then(|| CMatrix::from_fn(u.nrows(), k, |r, c| u[(r, order[c])]));
    let v_t = want_v.then(|| CMatrix::from_fn(k, v.nrows(), |r, c| v[(c, order[r])].conj()));
    SortedSvd { u, v_t, s }
}

/// Eigenvalues and orthonormal eigenvectors of a Hermitian matrix.
pub fn hermitian_eigen(h: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = h.nrows();
    if n == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    let sym = (h + h.adjoint()).scale(0.5);
    match to_faer(&sym).self_adjoint_eigen(faer::Side::Lower) {
        Ok(eig) => (eig.S().column_vector().iter().map(|s| s.re).collect(), from_faer(eig.U())),
        Err(_) => {
            let eig = nalgebra::SymmetricEigen::new(sym);
            (eig.eigenvalues.iter().cloned().collect(), eig.eigenvectors)
        }
    }
}

/// Rank-revealing compact SVD: M ≈ U_r diag(s_r) V_r*.
pub struct CompactSvd {
    pub u: CMatrix,
    pub s: Vec<f64>,
    pub v: CMatrix,
}

pub fn compact_svd(m: &CMatrix, tol: &TolPolicy) -> CompactSvd {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return CompactSvd { u: CMatrix::zeros(r, 0), s: Vec::new(), v: CMatrix::zeros(c, 0) };
    }
    let svd = sorted_svd(m, true, true);
    let thr = tol.threshold(r.max(c), svd.s[0]);
    let k = svd.s.iter().take_while(|&&s| s > thr).count();
    CompactSvd {
        u: svd.u.expect("u requested").columns(0, k).into_owned(),
        s: svd.s[..k].to_vec(),
        v: svd.v_t.expect("v requested").rows(0, k).adjoint(),
    }
}

pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    sorted_svd(m, false, false).s
}

pub fn op_norm(m: &CMatrix) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// min ‖Mx‖ over unit x; +inf when M has no columns.
pub fn sigma_min(m: &CMatrix) -> f64 {
    if m.ncols() == 0 {
        return f64::INFINITY;
    }
    if m.nrows() < m.ncols() {
        return 0.0;
    }
    singular_values(m).last().copied().unwrap_or(0.0)
}

pub fn orthonormalize(m: &CMatrix, tol: &TolPolicy) -> Subspace {
    let n = m.nrows();
    if n == 0 || m.ncols() == 0 {
        return Subspace::zero(n);
    }
    let svd = sorted_svd(m, true, false);
    let thr = tol.threshold(n.max(m.ncols()), svd.s[0]);
    let r = svd.s.iter().take_while(|&&s| s > thr).count();
    let u = svd.u.expect("u requested");
    Subspace { basis: u.columns(0, r).into_owned() }
}

pub fn orthogonal_complement(s: &Subspace) -> Subspace {
    let n = s.ambient_dim();
    let k = s.dim();
    if k == 0 {
        return Subspace::full(n);
    }
    if k >= n {
        return Subspace::zero(n);
    }
    // Eigenvectors of E − P for eigenvalue one; the spectrum is {0, 1}, so the split is clean.
    let q = CMatrix::identity(n, n) - s.basis() * s.basis().adjoint();
    let (vals, vecs) = hermitian_eigen(&q);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]));
    Subspace { basis: CMatrix::from_fn(n, n - k, |r, c| vecs[(r, order[c])]) }
}

pub fn projector(s: &Subspace) -> CMatrix {
    s.basis() * s.basis().adjoint()
}

/// Orthonormal basis of ker M (columns in C^{ncols}).
pub fn null_space(m: &CMatrix, tol: &TolPolicy) -> Subspace {
    let (r, c) = m.shape();
    if c == 0 {
        return Subspace::zero(0);
    }
    if r == 0 {
        return Subspace::full(c);
    }
    let padded = if r < c {
        let mut p = CMatrix::zeros(c, c);
        p.view_mut((0, 0), (r, c)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = sorted_svd(&padded, false, true);
    let thr = tol.threshold(r.max(c), svd.s[0]);
    let rank = svd.s.iter().take_while(|&&s| s > thr).count();
    let v_t = svd.v_t.expect("v requested");
    let basis = v_t.rows(rank, c - rank).adjoint();
    Subspace { basis }
}

pub fn subspace_sum(a: &Subspace, b: &Subspace, tol: &TolPolicy) -> Subspace {
    orthonormalize(&hcat(a.basis(), b.basis()), tol)
}

/// Intersection via the kernel of (I − P_b) restricted to `a`.
pub fn intersection(a: &Subspace, b: &Subspace, tol: &TolPolicy) -> Subspace {
    let n = a.ambient_dim();
    if a.is_zero() || b.is_zero() {
        return Subspace::zero(n);
    }
    let resid = a.basis() - b.basis() * b.coords(a.basis());
    let k = null_space(&resid, tol);
    orthonormalize(&(a.basis() * k.basis()), tol)
}

/// Ambient projector distance ‖P_a − P_b‖_max.
pub fn subspace_distance(a: &Subspace, b: &Subspace) -> f64 {
    max_abs(&(projector(a) - projector(b)))
}

pub fn rank(m: &CMatrix, tol: &TolPolicy) -> usize {
    orthonormalize(m, tol).dim()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormalKind {
    Unitary,
    Hermitian,
}

#[derive(Debug, Clone)]
pub struct EigenPart {
    pub value: Complex64,
    pub projection: CMatrix,
}

pub fn is_hermitian(m: &CMatrix, tol: f64) -> bool {
    m.is_square() && max_abs(&(m - m.adjoint())) <= tol * max_abs(m).max(1.0)
}

pub fn is_unitary(m: &CMatrix, tol: f64) -> bool {
    m.is_square() && orthonormality_defect(m) <= tol
}

/// Spectral decomposition of a unitary or Hermitian matrix, with eigenvalues
/// closer than `CLUSTER_GAP` merged. Parts are sorted by eigenvalue (real part
/// for Hermitian, angle in [0, 2π) for unitary).
pub fn eig_normal(m: &CMatrix, kind: NormalKind, _tol: &TolPolicy) -> Result<Vec<EigenPart>> {
    let n = m.nrows();
    let kind_ok = match kind {
        NormalKind::Hermitian => is_hermitian(m, 1e-8),
        NormalKind::Unitary => is_unitary(m, 1e-8),
    };
    if !kind_ok {
        return Err(Error::KindMismatch(format!("matrix is not {kind:?}")));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let (values, vectors) = match kind {
        NormalKind::Hermitian => {
            let (vals, vecs) = hermitian_eigen(m);
            (vals.into_iter().map(|x| c64(x, 0.0)).collect(), vecs)
        }
        NormalKind::Unitary => unitary_eig(m),
    };
    let key = |z: Complex64| match kind {
        NormalKind::Hermitian => z.re,
        NormalKind::Unitary => angle_0_2pi(z),
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| key(values[a]).total_cmp(&key(values[b])));

    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for &i in &order {
        match clusters.last_mut() {
            Some(cl) if (values[i] - values[*cl.last().unwrap()]).norm() < CLUSTER_GAP => cl.push(i),
            _ => clusters.push(vec![i]),
        }
    }
    if kind == NormalKind::Unitary && clusters.len() > 1 {
        let first = clusters[0][0];
        let last = *clusters.last().unwrap().last().unwrap();
        if (values[first] - values[last]).norm() < CLUSTER_GAP {
            let tail = clusters.pop().unwrap();
            clusters[0].extend(tail);
        }
    }

    let parts = clusters
        .into_iter()
        .map(|cl| {
            let mut mean = cl.iter().map(|&i| values[i]).sum::<Complex64>() / cl.len() as f64;
            if kind == NormalKind::Unitary {
                mean /= mean.norm();
            }
            let vs = CMatrix::from_fn(n, cl.len(), |r, c| vectors[(r, cl[c])]);
            EigenPart { value: mean, projection: &vs * vs.adjoint() }
        })
        .collect();
    Ok(parts)
}

pub fn angle_0_2pi(z: Complex64) -> f64 {
    let a = z.arg();
    if a < 0.0 {
        a + std::f64::consts::TAU
    } else {
        a
    }
}

// A unitary U shares eigenvectors with the Hermitian i(w+U)(w−U)^{-1} for any
// unimodular w off its spectrum; w is picked to keep the inverse well conditioned.
fn unitary_eig(u: &CMatrix) -> (Vec<Complex64>, CMatrix) {
    let n = u.nrows();
    let id = CMatrix::identity(n, n);
    let (w, _) = (0..64)
        .map(|k| {
            let w = Complex64::from_polar(1.0, (k as f64 + 0.5) * std::f64::consts::TAU / 64.0);
            (w, sigma_min(&(id.scale(1.0) * w - u)))
        })
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .expect("non-empty candidate set");
    let inv = (id.clone() * w - u).try_inverse().expect("w chosen off the spectrum");
    let h = (id * w + u) * inv * I;
    let (_, vecs) = hermitian_eigen(&h);
    let vals = (0..n)
        .map(|j| {
            let v = vecs.column(j);
            let z = (v.adjoint() * u * v)[(0, 0)];
            z / z.norm()
        })
        .collect();
    (vals, vecs)
}

pub fn solve(m: &CMatrix, b: &CMatrix, tol: &TolPolicy) -> Result<CMatrix> {
    if !m.is_square() || m.nrows() != b.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "solve: {:?} against {:?}",
            m.shape(),
            b.shape()
        )));
    }
    let n = m.nrows();
    if n == 0 {
        return Ok(CMatrix::zeros(0, b.ncols()));
    }
    let s = singular_values(m);
    let smin = *s.last().unwrap();
    if smin <= tol.threshold(n, s[0]) {
        return Err(Error::Singular { sigma_min: smin });
    }
    m.clone().lu().solve(b).ok_or(Error::Singular { sigma_min: smin })
}

pub fn inverse(m: &CMatrix, tol: &TolPolicy) -> Result<CMatrix> {
    solve(m, &CMatrix::identity(m.nrows(), m.nrows()), tol)
}
