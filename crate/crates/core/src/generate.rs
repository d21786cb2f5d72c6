//! Seeded random operators and dilation instances.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::extensions::{build_admissible_isometry, defect_pair, isometric_dilation, BigOp, ExitSpaceModel};
use crate::numkernel::{block_diag, CMatrix, Subspace, TolPolicy};
use crate::operators::{IsometryOp, Point, SymmetricOp};
use crate::partial::PartialMap;
use crate::random::{self, LabRng};

/// Random isometry with a d-dimensional domain in C^n.
pub fn random_isometry(rng: &mut LabRng, n: usize, d: usize) -> IsometryOp {
    let dom = random::random_frame(rng, n, d);
    let ran = random::random_frame(rng, n, d).into_basis();
    IsometryOp::new(dom, ran).expect("random frames are orthonormal")
}

/// Random symmetric operator with a d-dimensional domain in C^n.
pub fn random_symmetric(rng: &mut LabRng, n: usize, d: usize) -> SymmetricOp {
    let dom = random::random_frame(rng, n, d);
    let h = random::random_hermitian(rng, d);
    let g = random::gaussian(rng, n, d);
    let perp = CMatrix::identity(n, n) - dom.projector();
    let action = dom.basis() * h + perp * g;
    SymmetricOp::new(dom, action).expect("compression is Hermitian")
}

/// Unitary dilation V ⊕ T of a random isometry with exit dimension m.
pub fn isometric_instance(seed: u64, n: usize, d: usize, m: usize, tol: &TolPolicy) -> Result<ExitSpaceModel> {
    if d > n {
        return Err(Error::InvalidInput(format!("domain dimension {d} exceeds {n}")));
    }
    let mut rng = random::rng(seed);
    let v = random_isometry(&mut rng, n, d);
    let t = random_exit_block(&mut rng, &v, m, tol)?;
    isometric_dilation(&v, m, &t, tol)
}

/// Random unitary N₀(V) ⊕ C^m → N_∞(V) ⊕ C^m as a map on C^{n+m}.
pub fn random_exit_block(rng: &mut LabRng, v: &IsometryOp, m: usize, tol: &TolPolicy) -> Result<PartialMap> {
    let n0 = v.defect(Point::Finite(Complex64::new(0.0, 0.0)), tol).n_space;
    let ninf = v.defect(Point::Infinity, tol).n_space;
    let id = CMatrix::identity(m, m);
    let src = Subspace::from_orthonormal(block_diag(n0.basis(), &id));
    let dst = Subspace::from_orthonormal(block_diag(ninf.basis(), &id));
    let img = random::random_isometry_between(rng, &src, &dst);
    PartialMap::new(src, img)
}

/// Self-adjoint extension of A ⊕ A_e, with A of domain dimension d < n and
/// A_e on C^m of domain dimension d_e, built from an admissible unitary at z.
pub fn symmetric_instance(
    seed: u64,
    n: usize,
    d: usize,
    m: usize,
    d_e: usize,
    z: Complex64,
    tol: &TolPolicy,
) -> Result<ExitSpaceModel> {
    if d > n || d_e > m {
        return Err(Error::InvalidInput("domain dimension exceeds the space".into()));
    }
    let mut rng = random::rng(seed);
    let a = random_symmetric(&mut rng, n, d);
    let a_e = random_symmetric(&mut rng, m, d_e);
    let big = a.direct_sum(&a_e);
    let (nz, nzb) = defect_pair(&big, z, tol);
    let t = build_admissible_isometry(&big, z, &nz, &nzb, rng.random(), tol)?;
    let model = ExitSpaceModel::with_exit_operator(&a, &a_e, z, &t, tol)?;
    match model.big {
        BigOp::Hermitian(_) => Ok(model),
        _ => Err(Error::PostconditionFailed("generated extension is not self-adjoint".into())),
    }
}
