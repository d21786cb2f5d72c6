//! Seeded random frames, unitaries and operators.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::numkernel::{c64, CMatrix, Subspace};

pub type LabRng = ChaCha8Rng;

pub fn rng(seed: u64) -> LabRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut LabRng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c64(re, im) * std::f64::consts::FRAC_1_SQRT_2
    })
}

/// Haar-distributed unitary (QR of a Ginibre matrix with the phase correction).
pub fn haar_unitary(rng: &mut LabRng, n: usize) -> CMatrix {
    if n == 0 {
        return CMatrix::zeros(0, 0);
    }
    let qr = gaussian(rng, n, n).qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c64(1.0, 0.0) };
        let col = q.column(j) * phase;
        q.set_column(j, &col);
    }
    q
}

pub fn random_frame(rng: &mut LabRng, n: usize, k: usize) -> Subspace {
    assert!(k <= n);
    let u = haar_unitary(rng, n);
    Subspace::from_orthonormal(u.columns(0, k).into_owned())
}

pub fn random_hermitian(rng: &mut LabRng, n: usize) -> CMatrix {
    let g = gaussian(rng, n, n);
    (&g + g.adjoint()).scale(0.5)
}

/// Random unitary carrying `src` onto `dst`, as ambient images of the `src` basis.
pub fn random_isometry_between(rng: &mut LabRng, src: &Subspace, dst: &Subspace) -> CMatrix {
    assert_eq!(src.dim(), dst.dim());
    dst.basis() * haar_unitary(rng, src.dim())
}

/// Random matrix with operator norm `norm`.
pub fn random_with_norm(rng: &mut LabRng, rows: usize, cols: usize, norm: f64) -> CMatrix {
    let g = gaussian(rng, rows, cols);
    let s = crate::numkernel::op_norm(&g);
    if s == 0.0 {
        g
    } else {
        g.scale(norm / s)
    }
}

pub fn unit_interval(rng: &mut LabRng) -> f64 {
    rng.random::<f64>()
}

pub fn uniform(rng: &mut LabRng, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo..hi)
}

pub fn index(rng: &mut LabRng, upper_inclusive: usize) -> usize {
    rng.random_range(0..=upper_inclusive)
}
