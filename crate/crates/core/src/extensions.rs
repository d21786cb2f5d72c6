//! Forbidden operators, admissibility, generalized Neumann extensions and
//! extensions that leave the original space.

use num_complex::Complex64;

use crate::error::{AdmissibilityFailure, Error, Result};
use crate::numkernel::{
    block_diag, embed_rows, hcat, intersection, is_hermitian, is_unitary, max_abs, null_space,
    orthogonal_complement, orthonormalize, sigma_min, solve, CMatrix, Subspace, TolPolicy,
};
use crate::operators::{
    cayley_forward, classify_signs, require_nonreal, IsometryOp, SignClass, SymmetricOp,
};
use crate::random;

pub use crate::partial::PartialMap;

/// σ_min below which a kernel or a fixed vector is declared present.
pub const ADMISSIBILITY_GAP: f64 = 1e-9;

fn gap(tol: &TolPolicy) -> f64 {
    ADMISSIBILITY_GAP.max(tol.abs_floor)
}

/// (𝓝_z(A), 𝓝_z̄(A))
pub fn defect_pair(a: &SymmetricOp, z: Complex64, tol: &TolPolicy) -> (Subspace, Subspace) {
    (a.defect(z, tol).n_space, a.defect(z.conj(), tol).n_space)
}

/// X_z: P_{N_z} h ↦ P_{N_z̄} h for h ⊥ D(A).
pub fn forbidden_operator(a: &SymmetricOp, z: Complex64, tol: &TolPolicy) -> Result<PartialMap> {
    require_nonreal(z)?;
    let (nz, nzb) = defect_pair(a, z, tol);
    let g = orthogonal_complement(a.dom());
    let y = nz.basis() * nz.coords(g.basis());
    let w = nzb.basis() * nzb.coords(g.basis());
    PartialMap::from_spanning(&y, &w, tol)
}

fn check_parameter_shape(t: &PartialMap, nz: &Subspace, nzb: &Subspace) -> Result<()> {
    if t.src_ambient() != nz.ambient_dim() || t.dst_ambient() != nz.ambient_dim() {
        return Err(Error::DimensionMismatch("parameter acts in another space".into()));
    }
    let r1 = nz.residual(t.src().basis());
    let r2 = nzb.residual(t.image());
    if r1 > 1e-8 || r2 > 1e-8 {
        return Err(Error::PreconditionViolated(format!(
            "parameter must map into defect subspaces (residuals {r1:e}, {r2:e})"
        )));
    }
    Ok(())
}

/// Outcome of both admissibility tests.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmissibilityDetail {
    /// σ_min of (T − X_z) on D(T) ∩ D(X_z).
    pub kernel_margin: f64,
    /// σ_min of (U_z(A) ⊕ T − E) on its domain.
    pub fixed_point_margin: f64,
    pub kernel_test: bool,
    pub fixed_point_test: bool,
}

pub fn admissibility_detail(
    a: &SymmetricOp,
    z: Complex64,
    t: &PartialMap,
    tol: &TolPolicy,
) -> Result<AdmissibilityDetail> {
    require_nonreal(z)?;
    let (nz, nzb) = defect_pair(a, z, tol);
    check_parameter_shape(t, &nz, &nzb)?;
    let x = forbidden_operator(a, z, tol)?;
    let common = intersection(t.src(), x.src(), tol);
    let kernel_margin = sigma_min(&(t.apply(common.basis()) - x.apply(common.basis())));
    let w = cayley_forward(a, z, tol)?.as_map().direct_sum(t);
    let fixed_point_margin = sigma_min(&(w.image() - w.src().basis()));
    let g = gap(tol);
    Ok(AdmissibilityDetail {
        kernel_margin,
        fixed_point_margin,
        kernel_test: kernel_margin > g,
        fixed_point_test: fixed_point_margin > g,
    })
}

pub fn is_admissible(a: &SymmetricOp, z: Complex64, t: &PartialMap, tol: &TolPolicy) -> Result<bool> {
    let d = admissibility_detail(a, z, t, tol)?;
    if d.kernel_test != d.fixed_point_test {
        return Err(Error::InternalDisagreement { kernel: d.kernel_test, fixed_point: d.fixed_point_test });
    }
    Ok(d.kernel_test)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NeumannClass {
    pub sign: SignClass,
    pub closed: bool,
    pub maximal: bool,
    pub self_adjoint: bool,
}

#[derive(Debug, Clone)]
pub struct NeumannExtension {
    pub op: PartialMap,
    pub class: NeumannClass,
}

impl NeumannExtension {
    /// The extension as a symmetric operator when it is one.
    pub fn as_symmetric(&self) -> Result<SymmetricOp> {
        SymmetricOp::from_map(self.op.clone())
    }
}

/// A_{T,z}: D = D(A) ∔ (T − E)D(T), f + Tψ − ψ ↦ Af + zTψ − z̄ψ.
pub fn neumann_extension(a: &SymmetricOp, z: Complex64, t: &PartialMap, tol: &TolPolicy) -> Result<NeumannExtension> {
    require_nonreal(z)?;
    let norm = t.norm();
    if norm > 1.0 + 1e-10 {
        return Err(Error::NotContraction { norm });
    }
    if !is_admissible(a, z, t, tol)? {
        return Err(Error::NotAdmissible(AdmissibilityFailure::Parameter));
    }
    let (nz, nzb) = defect_pair(a, z, tol);
    let psi = t.src().basis();
    let y = hcat(a.dom().basis(), &(t.image() - psi));
    let w = hcat(a.action(), &(t.image() * z - psi * z.conj()));
    let op = PartialMap::from_spanning(&y, &w, tol)?;

    let back = neumann_parameter(a, &op, z, tol)?;
    let dist = back.distance(t);
    if dist > 1e-8 {
        return Err(Error::PostconditionFailed(format!("parameter not recovered from extension ({dist:e})")));
    }

    let isometric = t.isometry_defect() < 1e-8;
    let dom_full = t.dim() == nz.dim();
    let ran_full = t.range(tol).dim() == nzb.dim();
    let class = NeumannClass {
        sign: classify_signs(&op),
        closed: true,
        maximal: dom_full || ran_full,
        self_adjoint: isometric && dom_full && ran_full,
    };
    Ok(NeumannExtension { op, class })
}

/// Parameter T of an extension B ⊇ A at z: the Cayley transform of B restricted to 𝓝_z(A).
pub fn neumann_parameter(a: &SymmetricOp, b: &PartialMap, z: Complex64, tol: &TolPolicy) -> Result<PartialMap> {
    require_nonreal(z)?;
    let d = b.src().basis();
    let y = b.image() - d * z;
    if b.dim() > 0 && sigma_min(&y) <= gap(tol) {
        return Err(Error::Singular { sigma_min: sigma_min(&y) });
    }
    let w = b.image() - d * z.conj();
    let cayley = PartialMap::from_spanning(&y, &w, tol)?;
    let nz = a.defect(z, tol).n_space;
    Ok(cayley.restrict(&intersection(&nz, cayley.src(), tol)))
}

/// Isometry from `h1` onto `h2` (equal dimensions) without nonzero fixed vectors.
pub fn isometry_without_fixed_points(h1: &Subspace, h2: &Subspace, alpha: f64, tol: &TolPolicy) -> PartialMap {
    assert_eq!(h1.dim(), h2.dim());
    let b1 = h1.basis();
    // Pair bases; when the subspaces coincide keep the same frame so U is the identity.
    let b2 = if crate::numkernel::subspace_distance(h1, h2) < 1e-10 {
        b1.clone()
    } else {
        h2.basis().clone()
    };
    let fixed = orthonormalize(&(b1 * null_space(&(&b2 - b1), tol).basis()), tol);
    let rest = intersection(h1, &orthogonal_complement(&fixed), tol);
    let u = PartialMap::new(h1.clone(), b2).expect("dimensions agree");
    let rot = PartialMap::new(fixed.clone(), fixed.basis() * Complex64::from_polar(1.0, alpha)).expect("shape");
    rot.direct_sum(&u.restrict(&rest))
}

/// An isometry from `n_src` onto `n_dst` admissible with respect to A, built by
/// correcting the forbidden operator on the part where it stays inside `n_dst`.
pub fn build_admissible_isometry(
    a: &SymmetricOp,
    z: Complex64,
    n_src: &Subspace,
    n_dst: &Subspace,
    seed: u64,
    tol: &TolPolicy,
) -> Result<PartialMap> {
    require_nonreal(z)?;
    if n_src.dim() != n_dst.dim() {
        return Err(Error::DimensionMismatch("source and target differ in dimension".into()));
    }
    let n = a.ambient_dim();
    if n_src.dim() == 0 {
        return Ok(PartialMap::empty(n, n));
    }
    let mut rng = random::rng(seed);
    let alpha = random::uniform(&mut rng, std::f64::consts::FRAC_PI_4, 7.0 * std::f64::consts::FRAC_PI_4);
    let x = forbidden_operator(a, z, tol)?;

    let j = intersection(x.src(), n_src, tol);
    let leak = x.apply(j.basis());
    let leak = &leak - n_dst.basis() * n_dst.coords(&leak);
    let m = orthonormalize(&(j.basis() * null_space(&leak, tol).basis()), tol);
    let x0 = x.restrict(&m);
    let x0_ran = x0.range(tol);

    let w = random::random_isometry_between(&mut rng, n_src, n_dst);
    let w = PartialMap::new(n_src.clone(), w)?;
    let k = w.restrict(&m).range(tol);
    let s = isometry_without_fixed_points(&x0_ran, &k, alpha, tol);
    let corrected = PartialMap::new(m.clone(), s.apply(x0.image()))?;

    let t_src = intersection(n_src, &orthogonal_complement(&m), tol);
    let t_dst = intersection(n_dst, &orthogonal_complement(&k), tol);
    let t_img = random::random_isometry_between(&mut rng, &t_src, &t_dst);
    let t = PartialMap::new(t_src, t_img)?;
    let v = corrected.direct_sum(&t);
    if !is_admissible(a, z, &v, tol)? {
        return Err(Error::PostconditionFailed("constructed isometry is not admissible".into()));
    }
    Ok(v)
}

/// Blocks of T: 𝓝_z(A) ⊕ 𝓝_z(A_e) → 𝓝_z̄(A) ⊕ 𝓝_z̄(A_e) in the stored frames.
#[derive(Debug, Clone)]
pub struct BlockParam {
    pub inner_src: Subspace,
    pub inner_dst: Subspace,
    pub exit_src: Subspace,
    pub exit_dst: Subspace,
    pub t11: CMatrix,
    pub t12: CMatrix,
    pub t21: CMatrix,
    pub t22: CMatrix,
}

impl BlockParam {
    /// Blocks given in the frames computed for (A, A_e) at z.
    pub fn new(
        a: &SymmetricOp,
        a_e: &SymmetricOp,
        z: Complex64,
        blocks: [CMatrix; 4],
        tol: &TolPolicy,
    ) -> Result<Self> {
        let (inner_src, inner_dst) = defect_pair(a, z, tol);
        let (exit_src, exit_dst) = defect_pair(a_e, z, tol);
        let [t11, t12, t21, t22] = blocks;
        let ok = t11.shape() == (inner_dst.dim(), inner_src.dim())
            && t12.shape() == (inner_dst.dim(), exit_src.dim())
            && t21.shape() == (exit_dst.dim(), inner_src.dim())
            && t22.shape() == (exit_dst.dim(), exit_src.dim());
        if !ok {
            return Err(Error::DimensionMismatch("block shapes do not match defect dimensions".into()));
        }
        Ok(Self { inner_src, inner_dst, exit_src, exit_dst, t11, t12, t21, t22 })
    }

    /// Splits an ambient map on C^{n+m} defined on all of 𝓝_z(A ⊕ A_e).
    pub fn from_map(a: &SymmetricOp, a_e: &SymmetricOp, z: Complex64, t: &PartialMap, tol: &TolPolicy) -> Result<Self> {
        let (n, m) = (a.ambient_dim(), a_e.ambient_dim());
        let (inner_src, inner_dst) = defect_pair(a, z, tol);
        let (exit_src, exit_dst) = defect_pair(a_e, z, tol);
        let src = Subspace::from_orthonormal(block_diag(inner_src.basis(), exit_src.basis()));
        if crate::numkernel::subspace_distance(&src, t.src()) > 1e-8 {
            return Err(Error::PreconditionViolated("block parameter must be defined on the whole defect space".into()));
        }
        let img = t.apply(src.basis());
        let top = img.rows(0, n).into_owned();
        let bot = img.rows(n, m).into_owned();
        let (k, _) = (inner_src.dim(), exit_src.dim());
        let t11 = inner_dst.coords(&top.columns(0, k).into_owned());
        let t12 = inner_dst.coords(&top.columns(k, img.ncols() - k).into_owned());
        let t21 = exit_dst.coords(&bot.columns(0, k).into_owned());
        let t22 = exit_dst.coords(&bot.columns(k, img.ncols() - k).into_owned());
        Ok(Self { inner_src, inner_dst, exit_src, exit_dst, t11, t12, t21, t22 })
    }

    pub fn inner_dim(&self) -> usize {
        self.inner_src.ambient_dim()
    }

    pub fn exit_dim(&self) -> usize {
        self.exit_src.ambient_dim()
    }

    pub fn block_matrix(&self) -> CMatrix {
        let top = hcat(&self.t11, &self.t12);
        let bot = hcat(&self.t21, &self.t22);
        let mut out = CMatrix::zeros(top.nrows() + bot.nrows(), top.ncols());
        out.rows_mut(0, top.nrows()).copy_from(&top);
        out.rows_mut(top.nrows(), bot.nrows()).copy_from(&bot);
        out
    }

    /// The assembled map on C^{n+m}.
    pub fn assemble(&self) -> PartialMap {
        let src = block_diag(self.inner_src.basis(), self.exit_src.basis());
        let dst = block_diag(self.inner_dst.basis(), self.exit_dst.basis());
        PartialMap::new(Subspace::from_orthonormal(src), dst * self.block_matrix()).expect("shapes agree")
    }

    /// The exit block T22 as a map on C^m.
    pub fn t22_map(&self) -> PartialMap {
        PartialMap::new(self.exit_src.clone(), self.exit_dst.basis() * &self.t22).expect("shapes agree")
    }

    pub fn t11_map(&self) -> PartialMap {
        PartialMap::new(self.inner_src.clone(), self.inner_dst.basis() * &self.t11).expect("shapes agree")
    }
}

/// Φ = T11 + T12(X_z(o) − T22)^{-1}T21 for the exit operator o on C^m.
pub fn phi_operator(a: &SymmetricOp, z: Complex64, t: &BlockParam, tol: &TolPolicy) -> Result<PartialMap> {
    require_nonreal(z)?;
    if t.exit_src.dim() != t.exit_dim() {
        return Err(Error::PreconditionViolated("exit operator must be the zero-domain operator".into()));
    }
    let _ = a;
    // X_z(o) is the identity of C^m; in the stored frames it is exit_dst* exit_src.
    let x = t.exit_dst.coords(t.exit_src.basis());
    let phi = match solve(&(x - &t.t22), &t.t21, tol) {
        Ok(s) => &t.t11 + &t.t12 * s,
        Err(Error::Singular { .. }) => return Err(Error::T22NotAdmissible),
        Err(e) => return Err(e),
    };
    PartialMap::from_coords(&t.inner_src, &t.inner_dst, &phi)
}

/// Φ for a general exit operator and a possibly partially defined T on C^{n+m}:
/// D(Φ) = P_{𝓝_z(A)}Θ, Φ P_{𝓝_z(A)}h = P_{𝓝_z̄(A)} W h, where
/// W = U_z(A ⊕ A_e) ⊕ T and Θ = {h ∈ D(W): P_e W h = P_e h}.
pub fn phi_general(
    a: &SymmetricOp,
    a_e: &SymmetricOp,
    z: Complex64,
    t: &PartialMap,
    tol: &TolPolicy,
) -> Result<PartialMap> {
    require_nonreal(z)?;
    let n = a.ambient_dim();
    let m = a_e.ambient_dim();
    let big = a.direct_sum(a_e);
    let w = cayley_forward(&big, z, tol)?.as_map().direct_sum(t);
    let diff = w.image() - w.src().basis();
    let exit_rows = diff.rows(n, m).into_owned();
    let theta = w.src().basis() * null_space(&exit_rows, tol).basis();
    let w_theta = w.apply(&theta);
    let (nz, nzb) = defect_pair(a, z, tol);
    let top = theta.rows(0, n).into_owned();
    let wtop = w_theta.rows(0, n).into_owned();
    let y = nz.basis() * nz.coords(&top);
    let zz = nzb.basis() * nzb.coords(&wtop);
    PartialMap::from_spanning(&y, &zz, tol)
}

#[derive(Debug, Clone)]
pub enum Inner {
    Isometric(IsometryOp),
    Symmetric(SymmetricOp),
}

#[derive(Debug, Clone)]
pub enum BigOp {
    Unitary(CMatrix),
    Hermitian(CMatrix),
    /// A quasi-self-adjoint extension with a proper domain.
    Extension(PartialMap),
}

impl BigOp {
    pub fn as_map(&self) -> PartialMap {
        match self {
            BigOp::Unitary(u) => PartialMap::from_matrix(u),
            BigOp::Hermitian(h) => PartialMap::from_matrix(h),
            BigOp::Extension(p) => p.clone(),
        }
    }

    pub fn matrix(&self) -> Option<&CMatrix> {
        match self {
            BigOp::Unitary(u) | BigOp::Hermitian(u) => Some(u),
            BigOp::Extension(_) => None,
        }
    }
}

/// An extension of the inner operator acting in H ⊕ H_e = C^n ⊕ C^m.
#[derive(Debug, Clone)]
pub struct ExitSpaceModel {
    pub inner: Inner,
    pub exit_dim: usize,
    pub big: BigOp,
    /// Exit-space operator A_e (the zero-domain operator unless stated otherwise).
    pub exit_op: SymmetricOp,
    /// Anchor z and parameter T on C^{n+m}, when the model was built from them.
    pub anchor: Option<Complex64>,
    pub param: Option<PartialMap>,
}

impl ExitSpaceModel {
    pub fn inner_dim(&self) -> usize {
        match &self.inner {
            Inner::Isometric(v) => v.ambient_dim(),
            Inner::Symmetric(a) => a.ambient_dim(),
        }
    }

    pub fn total_dim(&self) -> usize {
        self.inner_dim() + self.exit_dim
    }

    pub fn symmetric_inner(&self) -> Result<&SymmetricOp> {
        match &self.inner {
            Inner::Symmetric(a) => Ok(a),
            Inner::Isometric(_) => Err(Error::InvalidInput("model is isometric".into())),
        }
    }

    pub fn isometric_inner(&self) -> Result<&IsometryOp> {
        match &self.inner {
            Inner::Isometric(v) => Ok(v),
            Inner::Symmetric(_) => Err(Error::InvalidInput("model is symmetric".into())),
        }
    }

    /// Unitary U on C^{n+m} extending V.
    pub fn from_unitary(v: &IsometryOp, u: &CMatrix) -> Result<Self> {
        let n = v.ambient_dim();
        if u.nrows() < n || !is_unitary(u, 1e-10) {
            return Err(Error::InvalidInput("big operator is not unitary".into()));
        }
        let total = u.nrows();
        let dom = embed_rows(v.dom().basis(), total, 0);
        let resid = max_abs(&(u * dom - embed_rows(v.ran_basis(), total, 0)));
        if resid > 1e-10 {
            return Err(Error::InvalidInput(format!("unitary does not extend V ({resid:e})")));
        }
        Ok(Self {
            inner: Inner::Isometric(v.clone()),
            exit_dim: total - n,
            big: BigOp::Unitary(u.clone()),
            exit_op: SymmetricOp::zero(total - n),
            anchor: None,
            param: None,
        })
    }

    /// Hermitian Ã on C^{n+m} extending A.
    pub fn from_hermitian(a: &SymmetricOp, h: &CMatrix) -> Result<Self> {
        let n = a.ambient_dim();
        if h.nrows() < n || !is_hermitian(h, 1e-10) {
            return Err(Error::InvalidInput("big operator is not Hermitian".into()));
        }
        let total = h.nrows();
        let dom = embed_rows(a.dom().basis(), total, 0);
        let resid = max_abs(&(h * dom - embed_rows(a.action(), total, 0)));
        if resid > 1e-10 {
            return Err(Error::InvalidInput(format!("Hermitian matrix does not extend A ({resid:e})")));
        }
        Ok(Self {
            inner: Inner::Symmetric(a.clone()),
            exit_dim: total - n,
            big: BigOp::Hermitian(h.clone()),
            exit_op: SymmetricOp::zero(total - n),
            anchor: None,
            param: None,
        })
    }

    /// 𝒜_T for 𝒜 = A ⊕ A_e with an arbitrary admissible contraction T on C^{n+m}.
    pub fn with_exit_operator(
        a: &SymmetricOp,
        a_e: &SymmetricOp,
        z: Complex64,
        t: &PartialMap,
        tol: &TolPolicy,
    ) -> Result<Self> {
        let big_a = a.direct_sum(a_e);
        let ext = neumann_extension(&big_a, z, t, tol)?;
        let total = big_a.ambient_dim();
        let big = if ext.op.dim() == total {
            let full = ext.op.full();
            if is_hermitian(&full, 1e-9) {
                BigOp::Hermitian((&full + full.adjoint()).scale(0.5))
            } else {
                BigOp::Extension(ext.op)
            }
        } else {
            BigOp::Extension(ext.op)
        };
        Ok(Self {
            inner: Inner::Symmetric(a.clone()),
            exit_dim: a_e.ambient_dim(),
            big,
            exit_op: a_e.clone(),
            anchor: Some(z),
            param: Some(t.clone()),
        })
    }
}

/// Unitary U = V ⊕ T where T maps N₀(V) ⊕ C^m onto N_∞(V) ⊕ C^m.
pub fn isometric_dilation(v: &IsometryOp, exit_dim: usize, t: &PartialMap, tol: &TolPolicy) -> Result<ExitSpaceModel> {
    let n = v.ambient_dim();
    let total = n + exit_dim;
    let n0 = v.defect(crate::Point::Finite(Complex64::new(0.0, 0.0)), tol).n_space;
    let ninf = v.defect(crate::Point::Infinity, tol).n_space;
    let src = Subspace::from_orthonormal(block_diag(n0.basis(), &CMatrix::identity(exit_dim, exit_dim)));
    let dst = Subspace::from_orthonormal(block_diag(ninf.basis(), &CMatrix::identity(exit_dim, exit_dim)));
    if t.src_ambient() != total || crate::numkernel::subspace_distance(&src, t.src()) > 1e-8 {
        return Err(Error::PreconditionViolated("exit block must be defined on N₀(V) ⊕ C^m".into()));
    }
    if dst.residual(t.image()) > 1e-8 || t.isometry_defect() > 1e-8 {
        return Err(Error::PreconditionViolated("exit block must be unitary onto N_∞(V) ⊕ C^m".into()));
    }
    let u = embed_rows(v.ran_basis(), total, 0) * embed_rows(v.dom().basis(), total, 0).adjoint() + t.full();
    let mut model = ExitSpaceModel::from_unitary(v, &u)?;
    model.param = Some(t.clone());
    Ok(model)
}

/// Self-adjoint Ã = 𝒜_T for 𝒜 = A ⊕ o on C^{n+m}.
pub fn exit_space_extension(
    a: &SymmetricOp,
    exit_dim: usize,
    z: Complex64,
    t: &BlockParam,
    tol: &TolPolicy,
) -> Result<ExitSpaceModel> {
    require_nonreal(z)?;
    let o = SymmetricOp::zero(exit_dim);
    let big_a = a.direct_sum(&o);
    let assembled = t.assemble();
    let (nz, nzb) = defect_pair(&big_a, z, tol);
    let onto = assembled.dim() == nz.dim()
        && assembled.isometry_defect() < 1e-10
        && nzb.residual(assembled.image()) < 1e-10
        && assembled.range(tol).dim() == nzb.dim();
    if !onto {
        return Err(Error::PreconditionViolated("block parameter must be unitary between the defect spaces".into()));
    }
    if !is_admissible(&o, z, &t.t22_map(), tol)? {
        return Err(Error::NotAdmissible(AdmissibilityFailure::T22));
    }
    let phi = phi_operator(a, z, t, tol)?;
    if !is_admissible(a, z, &phi, tol)? {
        return Err(Error::NotAdmissible(AdmissibilityFailure::Phi));
    }
    let model = ExitSpaceModel::with_exit_operator(a, &o, z, &assembled, tol)?;
    match &model.big {
        BigOp::Hermitian(_) => Ok(model),
        _ => Err(Error::PostconditionFailed("extension is not self-adjoint".into())),
    }
}

/// 𝔅 = P_H 𝒜_T on D(𝒜_T) ∩ H.
pub fn compressed_extension(model: &ExitSpaceModel, tol: &TolPolicy) -> Result<PartialMap> {
    let a = model.symmetric_inner()?;
    let n = model.inner_dim();
    let total = model.total_dim();
    let big = model.big.as_map();
    let h = Subspace::coordinate(total, &(0..n).collect::<Vec<_>>());
    let j = intersection(big.src(), &h, tol);
    let dom = orthonormalize(&j.basis().rows(0, n).into_owned(), tol);
    let lifted = embed_rows(dom.basis(), total, 0);
    let image = big.apply(&lifted).rows(0, n).into_owned();
    let b = PartialMap::new(dom, image)?;

    let z = model.anchor.unwrap_or(crate::numkernel::I);
    let big_a = a.direct_sum(&model.exit_op);
    let t = match &model.param {
        Some(t) => t.clone(),
        None => neumann_parameter(&big_a, &big, z, tol)?,
    };
    let phi = phi_general(a, &model.exit_op, z, &t, tol)?;
    let a_phi = neumann_extension(a, z, &phi, tol)?;
    let dist = a_phi.op.distance(&b);
    if dist > 1e-9 {
        return Err(Error::PostconditionFailed(format!("compression differs from A_Φ ({dist:e})")));
    }
    Ok(b)
}
