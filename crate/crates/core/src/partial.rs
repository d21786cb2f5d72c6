use crate::error::{Error, Result};
use crate::numkernel::{
    compact_svd, hcat, max_abs, max_col_norm, null_space, op_norm, orthonormality_defect,
    orthonormalize, subspace_distance, CMatrix, Subspace, TolPolicy,
};

/// A linear map defined on a subspace `src` of C^n with values in C^m.
/// `image` holds the images of the `src` basis columns.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialMap {
    src: Subspace,
    image: CMatrix,
}

impl PartialMap {
    pub fn new(src: Subspace, image: CMatrix) -> Result<Self> {
        if image.ncols() != src.dim() {
            return Err(Error::DimensionMismatch(format!(
                "image has {} columns for a {}-dimensional domain",
                image.ncols(),
                src.dim()
            )));
        }
        Ok(Self { src, image })
    }

    pub fn empty(src_ambient: usize, dst_ambient: usize) -> Self {
        Self { src: Subspace::zero(src_ambient), image: CMatrix::zeros(dst_ambient, 0) }
    }

    /// Everywhere-defined map given by a square or rectangular matrix.
    pub fn from_matrix(m: &CMatrix) -> Self {
        Self { src: Subspace::full(m.ncols()), image: m.clone() }
    }

    /// The map sending each column of `y` to the matching column of `z`.
    /// Fails when some combination of `y` vanishes while the same combination of `z` does not.
    pub fn from_spanning(y: &CMatrix, z: &CMatrix, tol: &TolPolicy) -> Result<Self> {
        if y.ncols() != z.ncols() {
            return Err(Error::DimensionMismatch("spanning sets differ in length".into()));
        }
        let svd = compact_svd(y, tol);
        let ker = null_space(y, tol);
        if ker.dim() > 0 {
            let leak = max_col_norm(&(z * ker.basis()));
            let scale = max_abs(z).max(1.0);
            if leak > 1e-8 * scale {
                return Err(Error::InvalidInput(format!("map is not well defined (leak {leak:e})")));
            }
        }
        let inv_s = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            svd.s.len(),
            svd.s.iter().map(|&s| num_complex::Complex64::new(1.0 / s, 0.0)),
        ));
        let image = z * &svd.v * inv_s;
        Ok(Self { src: Subspace::from_orthonormal(svd.u), image })
    }

    pub fn src(&self) -> &Subspace {
        &self.src
    }

    pub fn image(&self) -> &CMatrix {
        &self.image
    }

    pub fn src_ambient(&self) -> usize {
        self.src.ambient_dim()
    }

    pub fn dst_ambient(&self) -> usize {
        self.image.nrows()
    }

    pub fn dim(&self) -> usize {
        self.src.dim()
    }

    /// Ambient matrix, zero on the orthogonal complement of `src`.
    pub fn full(&self) -> CMatrix {
        &self.image * self.src.basis().adjoint()
    }

    /// Applies the map to ambient vectors assumed to lie in `src`.
    pub fn apply(&self, h: &CMatrix) -> CMatrix {
        &self.image * self.src.coords(h)
    }

    /// Matrix of the map between the given orthonormal frames.
    pub fn coords_between(&self, src: &Subspace, dst: &Subspace) -> CMatrix {
        dst.basis().adjoint() * self.apply(src.basis())
    }

    /// Builds the map from a coordinate matrix between two frames.
    pub fn from_coords(src: &Subspace, dst: &Subspace, k: &CMatrix) -> Result<Self> {
        if k.shape() != (dst.dim(), src.dim()) {
            return Err(Error::DimensionMismatch(format!(
                "coordinate matrix {:?} for frames {}→{}",
                k.shape(),
                src.dim(),
                dst.dim()
            )));
        }
        Self::new(src.clone(), dst.basis() * k)
    }

    pub fn restrict(&self, sub: &Subspace) -> Self {
        Self { src: sub.clone(), image: self.apply(sub.basis()) }
    }

    pub fn range(&self, tol: &TolPolicy) -> Subspace {
        orthonormalize(&self.image, tol)
    }

    pub fn norm(&self) -> f64 {
        op_norm(&self.image)
    }

    pub fn isometry_defect(&self) -> f64 {
        orthonormality_defect(&self.image)
    }

    /// Adjoint of the ambient extension-by-zero, restricted to `dom`.
    pub fn adjoint_on(&self, dom: &Subspace) -> Self {
        Self { src: dom.clone(), image: self.full().adjoint() * dom.basis() }
    }

    /// Orthogonal sum; domains are assumed mutually orthogonal.
    pub fn direct_sum(&self, other: &Self) -> Self {
        Self {
            src: Subspace::from_orthonormal(hcat(self.src.basis(), other.src.basis())),
            image: hcat(&self.image, &other.image),
        }
    }

    pub fn distance(&self, other: &Self) -> f64 {
        subspace_distance(&self.src, &other.src).max(max_abs(&(self.full() - other.full())))
    }

    pub fn scale_image(&self, s: num_complex::Complex64) -> Self {
        Self { src: self.src.clone(), image: &self.image * s }
    }
}
