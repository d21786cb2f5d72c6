//! The four hand-checkable instances used throughout the tests and the CLI.
//!
//! - I1: V = o on C¹, dilated by the swap unitary on C².
//! - I2: A = o on C¹, extended by the swap matrix on C²; the exit block at z = i is [[0, i], [i, 0]].
//! - I3: A on C² with D(A) = span e1, A e1 = e1.
//! - I4: V on C² with D(V) = span e1, V e1 = e1.

use crate::extensions::{BlockParam, ExitSpaceModel};
use crate::numkernel::{CMatrix, Subspace, TolPolicy, I, ONE, ZERO};
use crate::operators::{IsometryOp, SymmetricOp};
use crate::resolvents::ResolventModel;

pub fn swap() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

pub fn i1_operator() -> IsometryOp {
    IsometryOp::zero(1)
}

pub fn i1_model() -> ExitSpaceModel {
    ExitSpaceModel::from_unitary(&i1_operator(), &swap()).expect("swap is unitary")
}

pub fn i1_resolvent(tol: TolPolicy) -> ResolventModel {
    ResolventModel::dilation(i1_model(), tol).expect("unitary model")
}

pub fn i2_operator() -> SymmetricOp {
    SymmetricOp::zero(1)
}

pub fn i2_model() -> ExitSpaceModel {
    ExitSpaceModel::from_hermitian(&i2_operator(), &swap()).expect("swap is Hermitian")
}

pub fn i2_resolvent(tol: TolPolicy) -> ResolventModel {
    ResolventModel::dilation(i2_model(), tol).expect("Hermitian model")
}

pub fn i2_block(tol: &TolPolicy) -> BlockParam {
    let o = SymmetricOp::zero(1);
    let s = |z| CMatrix::from_element(1, 1, z);
    BlockParam::new(&o, &o, I, [s(ZERO), s(I), s(I), s(ZERO)], tol).expect("I2 block")
}

pub fn i3_operator() -> SymmetricOp {
    let e1 = Subspace::coordinate(2, &[0]);
    let action = e1.basis().clone();
    SymmetricOp::new(e1, action).expect("I3 is symmetric")
}

pub fn i4_operator() -> IsometryOp {
    let e1 = Subspace::coordinate(2, &[0]);
    let ran = e1.basis().clone();
    IsometryOp::new(e1, ran).expect("I4 is isometric")
}
