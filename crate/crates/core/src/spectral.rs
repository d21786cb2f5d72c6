//! Spectral measures of dilations, integral representations of generalized
//! resolvents, and the criteria for spectral gaps.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::extensions::{neumann_extension, BigOp, ExitSpaceModel, Inner};
use crate::numkernel::{
    angle_0_2pi, eig_normal, hcat, inverse, max_abs, null_space, orthonormality_defect, rank,
    sigma_min, top_left, CMatrix, NormalKind, TolPolicy, ONE, ZERO,
};
use crate::operators::{
    cayley_forward, is_regular_type_iso, is_regular_type_sym, orthogonal_extension, IsometryOp,
    Point, SymmetricOp,
};
use crate::partial::PartialMap;
use crate::resolvents::{ContractionParam, ParamForm, ResolventModel};

/// Margins at or below this count as singular in the gap machinery.
pub const GAP_THRESHOLD: f64 = 1e-8;
pub const DEFAULT_GRID: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AtomKind {
    /// Locations are angles θ ∈ [0, 2π) of points e^{iθ}.
    Circle,
    /// Locations are real numbers.
    Line,
}

#[derive(Debug, Clone)]
pub struct Atom {
    pub location: f64,
    pub weight: CMatrix,
}

/// A finite operator-valued measure on the circle or the line.
#[derive(Debug, Clone)]
pub struct SpectralAtoms {
    pub kind: AtomKind,
    pub atoms: Vec<Atom>,
}

impl SpectralAtoms {
    pub fn locations(&self) -> Vec<f64> {
        self.atoms.iter().map(|a| a.location).collect()
    }

    pub fn total_weight(&self, n: usize) -> CMatrix {
        self.atoms.iter().fold(CMatrix::zeros(n, n), |acc, a| acc + &a.weight)
    }

    /// Largest deviation of Σ weights from the identity.
    pub fn completeness_defect(&self, n: usize) -> f64 {
        max_abs(&(self.total_weight(n) - CMatrix::identity(n, n)))
    }

    /// Most negative eigenvalue over all weights (0 when all are PSD).
    pub fn psd_floor(&self) -> f64 {
        self.atoms
            .iter()
            .map(|a| {
                let h = (&a.weight + a.weight.adjoint()).scale(0.5);
                crate::numkernel::hermitian_eigen(&h).0.into_iter().fold(0.0, f64::min)
            })
            .fold(0.0, f64::min)
    }

    /// σ(t; h, g) = Σ_{location < t} g*·weight·h.
    pub fn distribution(&self, t: f64, h: &CMatrix, g: &CMatrix) -> Complex64 {
        self.atoms.iter().filter(|a| a.location < t).map(|a| (g.adjoint() * &a.weight * h)[(0, 0)]).sum()
    }

    /// Σ weight_k/(1 − z e^{iθ_k}) on the circle, Σ weight_k/(t_k − z) on the line.
    pub fn integral(&self, n: usize, z: Complex64) -> CMatrix {
        self.atoms.iter().fold(CMatrix::zeros(n, n), |acc, a| {
            let kernel = match self.kind {
                AtomKind::Circle => ONE / (ONE - z * Complex64::from_polar(1.0, a.location)),
                AtomKind::Line => ONE / (Complex64::new(a.location, 0.0) - z),
            };
            acc + &a.weight * kernel
        })
    }

    pub fn in_region(&self, region: &Region) -> Vec<f64> {
        self.locations().into_iter().filter(|&x| region.contains_atom(x)).collect()
    }
}

/// Compresses the eigenprojections of the big operator to H.
/// Atoms whose compressed weight has trace below `tol.abs_floor` are dropped.
pub fn spectral_measure(model: &ExitSpaceModel, tol: &TolPolicy) -> Result<SpectralAtoms> {
    let n = model.inner_dim();
    let (m, kind) = match &model.big {
        BigOp::Unitary(u) => (u, NormalKind::Unitary),
        BigOp::Hermitian(h) => (h, NormalKind::Hermitian),
        BigOp::Extension(_) => return Err(Error::InvalidInput("extension is not self-adjoint".into())),
    };
    let parts = eig_normal(m, kind, tol)?;
    let atoms = parts
        .into_iter()
        .filter_map(|p| {
            let weight = top_left(&p.projection, n, n);
            let trace: f64 = (0..n).map(|i| weight[(i, i)].re).sum();
            if trace < tol.abs_floor {
                return None;
            }
            let location = match kind {
                NormalKind::Unitary => angle_0_2pi(p.value),
                NormalKind::Hermitian => p.value.re,
            };
            Some(Atom { location, weight })
        })
        .collect();
    let kind = match kind {
        NormalKind::Unitary => AtomKind::Circle,
        NormalKind::Hermitian => AtomKind::Line,
    };
    Ok(SpectralAtoms { kind, atoms })
}

/// Largest max-entry deviation between the atom integral and R over the samples.
pub fn verify_integral_representation(atoms: &SpectralAtoms, r: &ResolventModel, samples: &[Complex64]) -> Result<f64> {
    let n = r.ambient_dim();
    let res = crate::par::map(samples, |&z| Ok(max_abs(&(atoms.integral(n, z) - r.eval(z)?))));
    res.into_iter().try_fold(0.0, |acc, x: Result<f64>| Ok(f64::max(acc, x?)))
}

/// An open arc {e^{iθ}: θ1 < θ < θ2} or an open interval (a, b).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    Arc { theta1: f64, theta2: f64 },
    Interval { a: f64, b: f64 },
}

impl Region {
    pub fn arc(theta1: f64, theta2: f64) -> Result<Self> {
        if !(0.0..TAU).contains(&theta1) || !(theta1 < theta2 && theta2 < TAU) {
            return Err(Error::InvalidInput(format!("arc needs 0 ≤ θ1 < θ2 < 2π, got ({theta1}, {theta2})")));
        }
        Ok(Region::Arc { theta1, theta2 })
    }

    pub fn interval(a: f64, b: f64) -> Result<Self> {
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidInput(format!("interval needs a < b, got ({a}, {b})")));
        }
        Ok(Region::Interval { a, b })
    }

    fn bounds(&self) -> (f64, f64) {
        match *self {
            Region::Arc { theta1, theta2 } => (theta1, theta2),
            Region::Interval { a, b } => (a, b),
        }
    }

    /// Half-open membership [lo, hi) used for atom counting.
    pub fn contains_atom(&self, x: f64) -> bool {
        let (lo, hi) = self.bounds();
        x >= lo && x < hi
    }

    /// `size` equally spaced parameters in [lo, hi).
    pub fn grid(&self, size: usize) -> Vec<f64> {
        let (lo, hi) = self.bounds();
        let h = (hi - lo) / size as f64;
        (0..size).map(|j| lo + h * j as f64).collect()
    }
}

/// ζ = e^{-iθ}: the point where the resolvent sees the atom at angle θ.
pub fn circle_point(theta: f64) -> Complex64 {
    Complex64::from_polar(1.0, -theta)
}

/// Golden-section search for a local minimum of f on [lo, hi].
fn golden_min(f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64, width: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > width {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    let x = 0.5 * (lo + hi);
    let fx = f(x);
    [(x1, f1), (x2, f2), (x, fx)].into_iter().fold((x, fx), |b, c| if c.1 < b.1 { c } else { b })
}

/// Minimum of f over a grid on [lo, hi), with every local grid minimum refined.
/// Non-finite values count as +∞.
fn refined_min(f: &(dyn Fn(f64) -> f64 + Sync), grid: &[f64], lo: f64, hi: f64) -> (f64, f64) {
    let vals: Vec<f64> = crate::par::map(grid, |&x| {
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    });
    let h = if grid.len() > 1 { grid[1] - grid[0] } else { hi - lo };
    let mut best = (grid[0], vals[0]);
    for j in 0..grid.len() {
        let left = if j == 0 { f64::INFINITY } else { vals[j - 1] };
        let right = if j + 1 == grid.len() { f64::INFINITY } else { vals[j + 1] };
        if vals[j] < best.1 {
            best = (grid[j], vals[j]);
        }
        if vals[j] <= left && vals[j] <= right {
            let a = (grid[j] - h).max(lo);
            let b = (grid[j] + h).min(hi);
            let cand = golden_min(&|x| {
                let v = f(x);
                if v.is_nan() {
                    f64::INFINITY
                } else {
                    v
                }
            }, a, b, 1e-13 * (1.0 + b.abs()));
            if cand.1 < best.1 && cand.0 < hi {
                best = cand;
            }
        }
    }
    best
}

fn require_regular_iso(v: &IsometryOp, zeta: Complex64, tol: &TolPolicy) -> Result<()> {
    let inv = ONE / zeta;
    let rt = is_regular_type_iso(v, inv, tol);
    if !rt.regular {
        return Err(Error::NotRegularType { point: inv, bound: rt.lower_bound });
    }
    Ok(())
}

/// W_ζ: N₀(V) → N_∞(V), W_ζ P_{N₀} f = ζ^{-1} P_{N_∞} f for f ∈ N_ζ(V); |ζ| = 1.
pub fn w_zeta(v: &IsometryOp, zeta: Complex64, tol: &TolPolicy) -> Result<PartialMap> {
    if (zeta.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidInput(format!("{zeta} is not unimodular")));
    }
    require_regular_iso(v, zeta, tol)?;
    let n0 = v.defect(Point::Finite(ZERO), tol).n_space;
    let ninf = v.defect(Point::Infinity, tol).n_space;
    let nz = v.defect(Point::Finite(zeta), tol).n_space;
    if nz.dim() != n0.dim() {
        return Err(Error::NotRegularType { point: ONE / zeta, bound: 0.0 });
    }
    let s = n0.basis().adjoint() * nz.basis();
    let q = ninf.basis().adjoint() * nz.basis();
    let sinv = inverse(&s, tol)?;
    let w = q * sinv / zeta;
    let defect = orthonormality_defect(&w);
    if defect > GAP_THRESHOLD {
        return Err(Error::PostconditionFailed(format!("W_ζ is not isometric ({defect:e})")));
    }
    PartialMap::from_coords(&n0, &ninf, &w)
}

/// 𝒲_λ = W_{(λ−z)/(λ−z̄)} of U_z(A), a map 𝓝_z(A) → 𝓝_z̄(A); λ real.
pub fn cal_w_lambda(a: &SymmetricOp, z: Complex64, lambda: f64, tol: &TolPolicy) -> Result<PartialMap> {
    let l = Complex64::new(lambda, 0.0);
    let rt = is_regular_type_sym(a, l, tol);
    if !rt.regular {
        return Err(Error::NotRegularType { point: l, bound: rt.lower_bound });
    }
    let u = cayley_forward(a, z, tol)?;
    w_zeta(&u, (l - z) / (l - z.conj()), tol)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapCriteria {
    /// ker(C − W_ζ) ≠ {0}.
    pub eigen: bool,
    /// (C − W_ζ)N₀ = N_∞ and P_{M_∞}M_ζ = M_∞.
    pub range: bool,
    pub kernel_sigma: f64,
    pub projection_sigma: f64,
    /// σ_min(V ⊕ C − ζ^{-1}E), the direct eigenvalue test.
    pub direct_sigma: f64,
}

/// Kernel and range tests for C − W_ζ; `c` is in the frames (N₀(V), N_∞(V)).
pub fn gap_criteria(v: &IsometryOp, c: &CMatrix, zeta: Complex64, tol: &TolPolicy) -> Result<GapCriteria> {
    let w = w_zeta(v, zeta, tol)?;
    let n0 = w.src().clone();
    let ninf = v.defect(Point::Infinity, tol).n_space;
    if c.shape() != (ninf.dim(), n0.dim()) {
        return Err(Error::DimensionMismatch("parameter does not act N₀ → N_∞".into()));
    }
    let wc = w.coords_between(&n0, &ninf);
    let kernel_sigma = sigma_min(&(c - wc));
    let eigen = kernel_sigma <= GAP_THRESHOLD;

    let n = v.ambient_dim();
    let vc = v.full() + ninf.basis() * c * n0.basis().adjoint();
    let direct_sigma = sigma_min(&(vc - CMatrix::identity(n, n) / zeta));
    let direct = direct_sigma <= GAP_THRESHOLD;
    if eigen != direct {
        return Err(Error::PostconditionFailed(format!(
            "kernel test ({kernel_sigma:e}) and direct spectrum test ({direct_sigma:e}) disagree"
        )));
    }

    let m_inf = v.defect(Point::Infinity, tol).m_space;
    let m_zeta = v.defect(Point::Finite(zeta), tol).m_space;
    let projection_sigma = sigma_min(&(m_inf.basis().adjoint() * m_zeta.basis()));
    let range = !eigen && projection_sigma > GAP_THRESHOLD;
    Ok(GapCriteria { eigen, range, kernel_sigma, projection_sigma, direct_sigma })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecompositionCheck {
    pub dom_split: bool,
    pub ran_split: bool,
}

/// Whether D(V) ∔ N_ζ(V) = H and R(V) ∔ N_ζ(V) = H; |ζ| = 1.
pub fn decomposition_check(v: &IsometryOp, zeta: Complex64, tol: &TolPolicy) -> Result<DecompositionCheck> {
    require_regular_iso(v, zeta, tol)?;
    let n = v.ambient_dim();
    let nz = v.defect(Point::Finite(zeta), tol).n_space;
    let split = |b: &CMatrix| b.ncols() + nz.dim() == n && rank(&hcat(b, nz.basis()), tol) == n;
    Ok(DecompositionCheck { dom_split: split(v.dom().basis()), ran_split: split(v.ran_basis()) })
}

#[derive(Debug, Clone)]
pub struct EigenVectorData {
    pub f: CMatrix,
    pub eigen_residual: f64,
    pub defect_residual: f64,
    /// ‖C P_{N₀}f − ζ^{-1}P_{N_∞}f‖
    pub parameter_identity: f64,
    /// ‖V P_{M₀}f − ζ^{-1}P_{M_∞}f‖
    pub operator_identity: f64,
}

pub const EIGEN_STRUCTURE_TOL: f64 = 1e-9;

/// An eigenvector of V ⊕ C for ζ^{-1}, with the identities it must satisfy.
pub fn eigen_vector_structure(v: &IsometryOp, c: &CMatrix, zeta: Complex64, tol: &TolPolicy) -> Result<Option<EigenVectorData>> {
    let n = v.ambient_dim();
    let n0 = v.defect(Point::Finite(ZERO), tol).n_space;
    let ninf = v.defect(Point::Infinity, tol).n_space;
    if c.shape() != (ninf.dim(), n0.dim()) {
        return Err(Error::DimensionMismatch("parameter does not act N₀ → N_∞".into()));
    }
    let cfull = ninf.basis() * c * n0.basis().adjoint();
    let vc = v.full() + &cfull;
    let shifted = &vc - CMatrix::identity(n, n) / zeta;
    let ker = null_space(&shifted, &TolPolicy { abs_floor: GAP_THRESHOLD, ..*tol });
    if ker.dim() == 0 {
        return Ok(None);
    }
    let f = ker.basis().columns(0, 1).into_owned();
    let eigen_residual = (&shifted * &f).norm();
    let nz = v.defect(Point::Finite(zeta), tol).n_space;
    let defect_residual = nz.residual(&f);
    let parameter_identity = (&cfull * &f - ninf.projector() * &f / zeta).norm();
    let m0 = v.dom().projector();
    let minf = v.ran().projector();
    let operator_identity = (v.full() * m0 * &f - minf * &f / zeta).norm();
    let worst = eigen_residual.max(defect_residual).max(parameter_identity).max(operator_identity);
    if worst > EIGEN_STRUCTURE_TOL {
        return Err(Error::PostconditionFailed(format!("eigenvector identities fail ({worst:e})")));
    }
    Ok(Some(EigenVectorData { f, eigen_residual, defect_residual, parameter_identity, operator_identity }))
}

/// Which side of the gap machinery a report belongs to.
#[derive(Debug, Clone)]
pub enum GapOperator {
    /// V with a parameter of Inin type at z₀ (z₀ = 0 gives Chumakin's F_ζ).
    Isometric { v: IsometryOp, z0: Complex64 },
    /// A with a parameter of Shtraus type at λ₀ (also the Cayley anchor).
    Symmetric { a: SymmetricOp, lambda0: Complex64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapPoint {
    /// θ on an arc, t on an interval.
    pub location: f64,
    pub continuation: bool,
    pub unitarity_defect: f64,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapReport {
    pub region: Region,
    pub points: Vec<GapPoint>,
    /// Refined minimum of the invertibility margin and where it occurs.
    pub min_margin: f64,
    pub min_margin_at: f64,
    pub continuation_ok: bool,
    pub max_unitarity_defect: f64,
    /// Failed conditions: 1 continuation, 2 unitarity, 3 invertibility.
    pub failed: Vec<u8>,
    pub analytic: bool,
    /// Atoms of the extension given by a constant unitary parameter, when available.
    pub oracle_atoms: Option<Vec<f64>>,
}

impl GapReport {
    pub fn oracle_agrees(&self) -> Option<bool> {
        self.oracle_atoms.as_ref().map(|a| a.is_empty() == self.analytic)
    }
}

struct GapSetup {
    /// Parameter value in the (source, target) frames of W at a region location.
    param: Box<dyn Fn(f64) -> Result<CMatrix> + Sync>,
    w: Box<dyn Fn(f64) -> Result<CMatrix> + Sync>,
    regular: Box<dyn Fn(f64) -> f64 + Sync>,
    side: Box<dyn Fn(f64) -> f64 + Sync>,
    point: Box<dyn Fn(f64) -> Complex64 + Sync>,
}

fn iso_setup(v: &IsometryOp, z0: Complex64, param: &ContractionParam, tol: TolPolicy) -> Result<GapSetup> {
    if z0.norm() >= 1.0 {
        return Err(Error::InvalidInput("anchor must lie in the unit disk".into()));
    }
    let n0 = v.defect(Point::Finite(ZERO), &tol).n_space;
    let ninf = v.defect(Point::Infinity, &tol).n_space;
    let (v1, v2, v3, p) = (v.clone(), v.clone(), v.clone(), param.clone());
    let (s0, sinf) = (n0.clone(), ninf.clone());
    let param_fn = move |theta: f64| -> Result<CMatrix> {
        let zeta = circle_point(theta);
        let k = p.continuation(zeta)?;
        let map = PartialMap::from_coords(p.src(), p.dst(), &k)?;
        if z0 == ZERO {
            return Ok(map.coords_between(&s0, &sinf));
        }
        let vc = orthogonal_extension(&v1, &map, z0, &tol)?.matrix;
        Ok(sinf.basis().adjoint() * vc * s0.basis())
    };
    let w_fn = move |theta: f64| -> Result<CMatrix> {
        let w = w_zeta(&v2, circle_point(theta), &tol)?;
        Ok(w.coords_between(&n0, &ninf))
    };
    let regular = move |theta: f64| is_regular_type_iso(&v3, ONE / circle_point(theta), &tol).lower_bound;
    let m_inf = v.defect(Point::Infinity, &tol).m_space;
    let v4 = v.clone();
    let side = move |theta: f64| {
        let mz = v4.defect(Point::Finite(circle_point(theta)), &tol).m_space;
        sigma_min(&(m_inf.basis().adjoint() * mz.basis()))
    };
    Ok(GapSetup {
        param: Box::new(param_fn),
        w: Box::new(w_fn),
        regular: Box::new(regular),
        side: Box::new(side),
        point: Box::new(circle_point),
    })
}

fn sym_setup(a: &SymmetricOp, lambda0: Complex64, param: &ContractionParam, tol: TolPolicy) -> Result<GapSetup> {
    crate::operators::require_nonreal(lambda0)?;
    let nz = a.defect(lambda0, &tol).n_space;
    let nzb = a.defect(lambda0.conj(), &tol).n_space;
    let p = param.clone();
    let (s, d) = (nz.clone(), nzb.clone());
    let param_fn = move |t: f64| -> Result<CMatrix> {
        let k = p.continuation(Complex64::new(t, 0.0))?;
        Ok(PartialMap::from_coords(p.src(), p.dst(), &k)?.coords_between(&s, &d))
    };
    let (a1, a2, a3) = (a.clone(), a.clone(), a.clone());
    let w_fn = move |t: f64| -> Result<CMatrix> { Ok(cal_w_lambda(&a1, lambda0, t, &tol)?.coords_between(&nz, &nzb)) };
    let regular = move |t: f64| is_regular_type_sym(&a2, Complex64::new(t, 0.0), &tol).lower_bound;
    let m_zb = a.defect(lambda0.conj(), &tol).m_space;
    let side = move |t: f64| {
        let ml = a3.defect(Complex64::new(t, 0.0), &tol).m_space;
        sigma_min(&(m_zb.basis().adjoint() * ml.basis()))
    };
    Ok(GapSetup {
        param: Box::new(param_fn),
        w: Box::new(w_fn),
        regular: Box::new(regular),
        side: Box::new(side),
        point: Box::new(|t| Complex64::new(t, 0.0)),
    })
}

/// Atoms of the extension given by a constant unitary parameter.
fn oracle_atoms(op: &GapOperator, param: &ContractionParam, region: &Region, tol: &TolPolicy) -> Option<Vec<f64>> {
    let k = match param.form() {
        ParamForm::Constant(k) => k,
        _ => return None,
    };
    if orthonormality_defect(k) > 1e-10 || k.nrows() != k.ncols() {
        return None;
    }
    let map = PartialMap::from_coords(param.src(), param.dst(), k).ok()?;
    let (m, kind) = match op {
        GapOperator::Isometric { v, z0 } => {
            let u = orthogonal_extension(v, &map, *z0, tol).ok()?.matrix;
            (u, NormalKind::Unitary)
        }
        GapOperator::Symmetric { a, lambda0 } => {
            let ext = neumann_extension(a, *lambda0, &map, tol).ok()?;
            if !ext.class.self_adjoint {
                return None;
            }
            (ext.op.full(), NormalKind::Hermitian)
        }
    };
    let parts = eig_normal(&m, kind, tol).ok()?;
    let locs = parts.iter().map(|p| match kind {
        NormalKind::Unitary => angle_0_2pi(p.value),
        NormalKind::Hermitian => p.value.re,
    });
    Some(locs.filter(|&x| region.contains_atom(x)).collect())
}

/// Decides whether the resolvent continues analytically across the region.
pub fn gap_report(
    op: &GapOperator,
    param: &ContractionParam,
    region: &Region,
    grid_size: usize,
    tol: &TolPolicy,
) -> Result<GapReport> {
    if grid_size < 2 {
        return Err(Error::InvalidInput("grid needs at least two points".into()));
    }
    let setup = match (op, region) {
        (GapOperator::Isometric { v, z0 }, Region::Arc { .. }) => iso_setup(v, *z0, param, *tol)?,
        (GapOperator::Symmetric { a, lambda0 }, Region::Interval { .. }) => sym_setup(a, *lambda0, param, *tol)?,
        _ => return Err(Error::InvalidInput("arcs go with isometric operators, intervals with symmetric ones".into())),
    };
    let grid = region.grid(grid_size);
    let (lo, hi) = region.bounds();

    let (at, bound) = refined_min(&*setup.regular, &grid, lo, hi);
    if bound <= GAP_THRESHOLD {
        let p = (setup.point)(at);
        let point = if matches!(region, Region::Arc { .. }) { ONE / p } else { p };
        return Err(Error::NotRegularType { point, bound });
    }
    let (at, side) = refined_min(&*setup.side, &grid, lo, hi);
    if side <= GAP_THRESHOLD {
        return Err(Error::PreconditionViolated(format!(
            "projection of M onto the reference space is not onto near {at} (σ_min {side:e})"
        )));
    }

    let eval_point = |x: f64| -> Result<GapPoint> {
        let w = (setup.w)(x)?;
        match (setup.param)(x) {
            Ok(k) => Ok(GapPoint {
                location: x,
                continuation: true,
                unitarity_defect: orthonormality_defect(&k),
                margin: sigma_min(&(k - w)),
            }),
            Err(Error::Singular { .. } | Error::SingularSystem { .. } | Error::NotContraction { .. }) => {
                Ok(GapPoint { location: x, continuation: false, unitarity_defect: f64::INFINITY, margin: 0.0 })
            }
            Err(e) => Err(e),
        }
    };
    let points: Vec<GapPoint> = crate::par::map(&grid, |&x| eval_point(x)).into_iter().collect::<Result<_>>()?;
    let margin_fn = |x: f64| eval_point(x).map(|p| p.margin).unwrap_or(f64::NAN);
    let (min_margin_at, min_margin) = refined_min(&margin_fn, &grid, lo, hi);

    let continuation_ok = points.iter().all(|p| p.continuation);
    let max_unitarity_defect = points.iter().map(|p| p.unitarity_defect).fold(0.0, f64::max);
    let mut failed = Vec::new();
    if !continuation_ok {
        failed.push(1);
    }
    if !(max_unitarity_defect < GAP_THRESHOLD) {
        failed.push(2);
    }
    if !(min_margin > GAP_THRESHOLD) {
        failed.push(3);
    }
    Ok(GapReport {
        region: *region,
        points,
        min_margin,
        min_margin_at,
        continuation_ok,
        max_unitarity_defect,
        analytic: failed.is_empty(),
        failed,
        oracle_atoms: oracle_atoms(op, param, region, tol),
    })
}

/// Boundedness of a dilation resolvent along the region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryProbe {
    pub max_norm: f64,
    pub max_mean_value_residual: f64,
    pub bounded: bool,
}

pub const BOUNDED_NORM: f64 = 1e8;

/// Evaluates the compressed resolvent of a dilation on the region itself
/// (ζ = e^{-iθ} or real λ), refining the peaks of ‖R‖. A singular system
/// counts as unbounded.
pub fn boundary_probe(model: &ExitSpaceModel, region: &Region, grid_size: usize, tol: &TolPolicy) -> Result<BoundaryProbe> {
    let point = match (&model.inner, region) {
        (Inner::Isometric(_), Region::Arc { .. }) => circle_point,
        (Inner::Symmetric(_), Region::Interval { .. }) => |t: f64| Complex64::new(t, 0.0),
        _ => return Err(Error::InvalidInput("region does not match the model".into())),
    };
    let eval = |p: Complex64| match crate::resolvents::dilation_resolvent(model, p, tol) {
        Ok(r) => Ok(Some(r)),
        Err(Error::SingularSystem { .. }) => Ok(None),
        Err(e) => Err(e),
    };
    let neg_norm = |x: f64| match eval(point(x)) {
        Ok(Some(r)) => -crate::numkernel::op_norm(&r),
        _ => f64::NEG_INFINITY,
    };
    let grid = region.grid(grid_size);
    let (lo, hi) = region.bounds();
    let (_, peak) = refined_min(&neg_norm, &grid, lo, hi);
    let max_norm = -peak;

    // Mean-value test on small circles kept inside the region.
    let h = (hi - lo) / grid_size as f64;
    let centers: Vec<f64> = (0..grid_size).map(|j| lo + h * (j as f64 + 0.5)).collect();
    let radius = 0.4 * h;
    let residuals = crate::par::map(&centers, |&x| -> Result<f64> {
        let c = point(x);
        let center = match eval(c)? {
            Some(r) => r,
            None => return Ok(f64::INFINITY),
        };
        const K: usize = 16;
        let mut acc = CMatrix::zeros(center.nrows(), center.ncols());
        for j in 0..K {
            match eval(c + Complex64::from_polar(radius, TAU * j as f64 / K as f64))? {
                Some(r) => acc += r,
                None => return Ok(f64::INFINITY),
            }
        }
        Ok(max_abs(&(acc / Complex64::new(K as f64, 0.0) - center)))
    });
    let max_mean_value_residual = residuals.into_iter().try_fold(0.0, |a, r: Result<f64>| Ok::<_, Error>(f64::max(a, r?)))?;
    let bounded = max_norm < BOUNDED_NORM && max_mean_value_residual < GAP_THRESHOLD;
    Ok(BoundaryProbe { max_norm, max_mean_value_residual, bounded })
}
