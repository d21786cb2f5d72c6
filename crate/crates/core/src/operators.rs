//! Isometric and symmetric operators with explicit domains, their defect
//! subspaces, fractional and Cayley transforms, and regular-type tests.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numkernel::{
    inverse, is_hermitian, max_abs, op_norm, orthogonal_complement, orthonormality_defect,
    orthonormalize, sigma_min, CMatrix, Subspace, TolPolicy,
};
use crate::partial::PartialMap;

/// Evaluation point for isometric defect subspaces; ∞ gives R(V) and N_∞.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Point {
    Finite(Complex64),
    Infinity,
}

impl Point {
    /// 1/z̄, with 0 ↦ ∞.
    pub fn reflect(z: Complex64) -> Point {
        if z == Complex64::new(0.0, 0.0) {
            Point::Infinity
        } else {
            Point::Finite(1.0 / z.conj())
        }
    }
}

impl From<Complex64> for Point {
    fn from(z: Complex64) -> Self {
        Point::Finite(z)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DefectPair {
    pub m_space: Subspace,
    pub n_space: Subspace,
}

impl DefectPair {
    fn from_m(m_space: Subspace) -> Self {
        let n_space = orthogonal_complement(&m_space);
        Self { m_space, n_space }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IsometryOp {
    map: PartialMap,
}

impl IsometryOp {
    pub fn new(dom: Subspace, ran_basis: CMatrix) -> Result<Self> {
        if ran_basis.nrows() != dom.ambient_dim() {
            return Err(Error::DimensionMismatch("range basis lives in another space".into()));
        }
        let defect = orthonormality_defect(&ran_basis);
        if defect > 1e-8 {
            return Err(Error::InvalidInput(format!("range basis not orthonormal ({defect:e})")));
        }
        Ok(Self { map: PartialMap::new(dom, ran_basis)? })
    }

    pub fn from_map(map: PartialMap) -> Result<Self> {
        let (dom, img) = (map.src().clone(), map.image().clone());
        Self::new(dom, img)
    }

    /// The zero-domain operator o_H.
    pub fn zero(n: usize) -> Self {
        Self { map: PartialMap::empty(n, n) }
    }

    pub fn unitary(u: &CMatrix) -> Result<Self> {
        Self::new(Subspace::full(u.nrows()), u.clone())
    }

    pub fn ambient_dim(&self) -> usize {
        self.map.src_ambient()
    }

    pub fn dim(&self) -> usize {
        self.map.dim()
    }

    pub fn dom(&self) -> &Subspace {
        self.map.src()
    }

    pub fn ran_basis(&self) -> &CMatrix {
        self.map.image()
    }

    pub fn ran(&self) -> Subspace {
        Subspace::from_orthonormal(self.map.image().clone())
    }

    pub fn as_map(&self) -> &PartialMap {
        &self.map
    }

    pub fn full(&self) -> CMatrix {
        self.map.full()
    }

    pub fn is_unitary(&self) -> bool {
        self.dim() == self.ambient_dim()
    }

    pub fn defect(&self, point: Point, tol: &TolPolicy) -> DefectPair {
        let d = self.dom().basis();
        let v = self.ran_basis();
        let m = match point {
            Point::Finite(z) => orthonormalize(&(d - v * z), tol),
            Point::Infinity => orthonormalize(v, tol),
        };
        DefectPair::from_m(m)
    }

    /// Defect pair at 1/z̄ computed as span(z̄D − V D), continuous through z = 0.
    pub fn defect_reflected(&self, z: Complex64, tol: &TolPolicy) -> DefectPair {
        let m = self.dom().basis() * z.conj() - self.ran_basis();
        DefectPair::from_m(orthonormalize(&m, tol))
    }

    /// Orthogonal sum with a map defined on part of N₀.
    pub fn with_extension(&self, t: &PartialMap) -> CMatrix {
        self.full() + t.full()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricOp {
    map: PartialMap,
}

impl SymmetricOp {
    pub fn new(dom: Subspace, action: CMatrix) -> Result<Self> {
        let map = PartialMap::new(dom, action)?;
        let g = map.src().coords(map.image());
        if !is_hermitian(&g, 1e-8) {
            return Err(Error::InvalidInput("operator is not symmetric".into()));
        }
        Ok(Self { map })
    }

    pub fn from_map(map: PartialMap) -> Result<Self> {
        let (dom, img) = (map.src().clone(), map.image().clone());
        Self::new(dom, img)
    }

    pub fn zero(n: usize) -> Self {
        Self { map: PartialMap::empty(n, n) }
    }

    pub fn self_adjoint(h: &CMatrix) -> Result<Self> {
        Self::new(Subspace::full(h.nrows()), h.clone())
    }

    pub fn ambient_dim(&self) -> usize {
        self.map.src_ambient()
    }

    pub fn dim(&self) -> usize {
        self.map.dim()
    }

    pub fn dom(&self) -> &Subspace {
        self.map.src()
    }

    pub fn action(&self) -> &CMatrix {
        self.map.image()
    }

    pub fn as_map(&self) -> &PartialMap {
        &self.map
    }

    pub fn full(&self) -> CMatrix {
        self.map.full()
    }

    pub fn is_self_adjoint(&self) -> bool {
        self.dim() == self.ambient_dim()
    }

    pub fn defect(&self, z: Complex64, tol: &TolPolicy) -> DefectPair {
        let m = self.action() - self.dom().basis() * z;
        DefectPair::from_m(orthonormalize(&m, tol))
    }

    /// A ⊕ B acting in C^{n+m}.
    pub fn direct_sum(&self, other: &SymmetricOp) -> SymmetricOp {
        let (n, m) = (self.ambient_dim(), other.ambient_dim());
        let dom = crate::numkernel::hcat(
            &self.dom().embed(n + m, 0).into_basis(),
            &other.dom().embed(n + m, n).into_basis(),
        );
        let act = crate::numkernel::hcat(
            &crate::numkernel::embed_rows(self.action(), n + m, 0),
            &crate::numkernel::embed_rows(other.action(), n + m, n),
        );
        SymmetricOp { map: PartialMap::new(Subspace::from_orthonormal(dom), act).expect("shapes agree") }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// V_z = (V − z̄E)(E − zV)^{-1}; the inverse direction substitutes −z.
pub fn moebius_transform(v: &IsometryOp, z: Complex64, dir: Direction, tol: &TolPolicy) -> Result<IsometryOp> {
    if z.norm() >= 1.0 {
        return Err(Error::InvalidInput(format!("|z| must be < 1, got {}", z.norm())));
    }
    let z = match dir {
        Direction::Forward => z,
        Direction::Inverse => -z,
    };
    let d = v.dom().basis();
    let r = v.ran_basis();
    let y = d - r * z;
    let w = r - d * z.conj();
    IsometryOp::from_map(PartialMap::from_spanning(&y, &w, tol)?)
}

/// U_z = (A − z̄E)(A − zE)^{-1} with domain 𝓜_z(A).
pub fn cayley_forward(a: &SymmetricOp, z: Complex64, tol: &TolPolicy) -> Result<IsometryOp> {
    require_nonreal(z)?;
    let d = a.dom().basis();
    let y = a.action() - d * z;
    let w = a.action() - d * z.conj();
    IsometryOp::from_map(PartialMap::from_spanning(&y, &w, tol)?)
}

/// zE + (z − z̄)(W − E)^{-1}, i.e. (W − E)g ↦ zWg − z̄g.
pub fn cayley_inverse(w: &IsometryOp, z: Complex64, tol: &TolPolicy) -> Result<SymmetricOp> {
    SymmetricOp::from_map(inverse_cayley_map(w.as_map(), z, tol)?)
}

/// Inverse Cayley transform of an arbitrary map W (contraction or isometry).
pub fn inverse_cayley_map(w: &PartialMap, z: Complex64, tol: &TolPolicy) -> Result<PartialMap> {
    require_nonreal(z)?;
    let d = w.src().basis();
    let img = w.image();
    let y = img - d;
    if w.dim() > 0 && sigma_min(&y) <= tol.threshold(y.nrows(), op_norm(&y).max(1.0)).max(1e-9) {
        return Err(Error::FixedPointObstruction);
    }
    let zz = img * z - d * z.conj();
    PartialMap::from_spanning(&y, &zz, tol)
}

pub fn require_nonreal(z: Complex64) -> Result<()> {
    if z.im == 0.0 || !z.im.is_finite() {
        return Err(Error::PointExcluded(z));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularType {
    pub regular: bool,
    pub lower_bound: f64,
}

fn regular_from(m: &CMatrix, tol: &TolPolicy) -> RegularType {
    let lb = sigma_min(m);
    if lb.is_infinite() {
        return RegularType { regular: true, lower_bound: lb };
    }
    let thr = tol.threshold(m.nrows(), op_norm(m));
    RegularType { regular: lb > thr, lower_bound: lb }
}

/// Lower bound of ‖(V − λ)g‖ over unit g ∈ D(V).
pub fn is_regular_type_iso(v: &IsometryOp, lambda: Complex64, tol: &TolPolicy) -> RegularType {
    regular_from(&(v.ran_basis() - v.dom().basis() * lambda), tol)
}

/// Lower bound of ‖(A − λ)f‖ over unit f ∈ D(A).
pub fn is_regular_type_sym(a: &SymmetricOp, lambda: Complex64, tol: &TolPolicy) -> RegularType {
    regular_from(&(a.action() - a.dom().basis() * lambda), tol)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FullContraction {
    pub matrix: CMatrix,
    pub norm_bound: f64,
}

/// V_C = (V⁺ + z̄₀E)(E + z₀V⁺)^{-1} with V⁺ = V_{z₀} ⊕ C.
/// `c` must be defined on (part of) N_{z₀}(V) with values in N_{1/z̄₀}(V).
pub fn orthogonal_extension(v: &IsometryOp, c: &PartialMap, z0: Complex64, tol: &TolPolicy) -> Result<FullContraction> {
    let norm = c.norm();
    if norm > 1.0 + 1e-10 {
        return Err(Error::NotContraction { norm });
    }
    let vplus = v_plus(v, c, z0, tol)?;
    let matrix = if z0 == Complex64::new(0.0, 0.0) {
        vplus
    } else {
        let n = v.ambient_dim();
        let id = CMatrix::identity(n, n);
        let den = inverse(&(&id + &vplus * z0), tol)?;
        (vplus + id * z0.conj()) * den
    };
    let norm_bound = op_norm(&matrix);
    Ok(FullContraction { matrix, norm_bound })
}

/// V⁺ = V_{z₀} ⊕ C as an ambient matrix.
pub fn v_plus(v: &IsometryOp, c: &PartialMap, z0: Complex64, tol: &TolPolicy) -> Result<CMatrix> {
    let vz = moebius_transform(v, z0, Direction::Forward, tol)?;
    Ok(vz.full() + c.full())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignClass {
    Symmetric,
    Dissipative,
    Accumulative,
    Neither,
}

/// Sign of Im(Bh, h) over D(B).
pub fn classify_signs(b: &PartialMap) -> SignClass {
    let g = b.src().coords(b.image());
    if g.nrows() == 0 {
        return SignClass::Symmetric;
    }
    let im = (&g - g.adjoint()) * Complex64::new(0.0, -0.5);
    let im = (&im + im.adjoint()).scale(0.5);
    let eig = crate::numkernel::hermitian_eigen(&im).0;
    let tol = 1e-10 * max_abs(&g).max(1.0);
    let lo = eig.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = eig.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    match (lo >= -tol, hi <= tol) {
        (true, true) => SignClass::Symmetric,
        (true, false) => SignClass::Dissipative,
        (false, true) => SignClass::Accumulative,
        (false, false) => SignClass::Neither,
    }
}

/// Restriction of an everywhere-defined matrix to a subspace, as an operator record.
pub fn restrict_matrix(m: &CMatrix, dom: &Subspace) -> PartialMap {
    PartialMap::new(dom.clone(), m * dom.basis()).expect("shapes agree")
}
