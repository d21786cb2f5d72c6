//! Instance files: JSON with complex numbers stored as `[re, im]`.

use anyhow::{anyhow, bail, ensure, Context, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use resolvent_lab::extensions::{defect_pair, neumann_extension, BigOp, ExitSpaceModel, Inner};
use resolvent_lab::numkernel::{orthonormality_defect, CMatrix, ZERO};
use resolvent_lab::operators::{orthogonal_extension, restrict_matrix};
use resolvent_lab::resolvents::{ContractionParam, ResolventModel};
use resolvent_lab::{IsometryOp, Point, Subspace, SymmetricOp, TolPolicy};

pub const SCHEMA_VERSION: u32 = 1;

pub type Cx = [f64; 2];
/// Row-major matrix: one array of entries per row.
pub type Rows = Vec<Vec<Cx>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Isometric,
    Symmetric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub schema_version: u32,
    pub kind: Kind,
    pub ambient_dim: usize,
    /// n×d orthonormal basis of the domain.
    pub domain_basis: Rows,
    /// n×d images of the domain basis: the range basis for isometric
    /// operators, the action for symmetric ones.
    pub action_or_range: Rows,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exit: Option<ExitBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parameter: Option<ParameterSpec>,
    pub seed: Option<u64>,
}

/// Exit block T on C^{n+m}, stored as its (n+m)×(n+m) matrix.
///
/// Isometric: T is read on N₀(V) ⊕ C^m. Symmetric: T is read on the defect
/// space of A ⊕ A_e at `anchor`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExitBlock {
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anchor: Option<Cx>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exit_operator: Option<ExitOperator>,
    pub t: Rows,
}

/// A_e on C^m; the zero-domain operator when absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExitOperator {
    pub domain_basis: Rows,
    pub action: Rows,
}

/// Constant parameter K given as an n×n matrix, read on N_{z₀}(V) (or 𝓝_{λ₀}(A)).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParameterSpec {
    pub anchor: Cx,
    pub value: Rows,
}

pub fn cx(z: Complex64) -> Cx {
    [z.re, z.im]
}

pub fn from_cx(c: Cx) -> Complex64 {
    Complex64::new(c[0], c[1])
}

pub fn to_rows(m: &CMatrix) -> Rows {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| cx(m[(i, j)])).collect()).collect()
}

/// Decodes a matrix with `rows` rows; the column count is read off the data.
pub fn from_rows(r: &Rows, rows: usize, what: &str) -> Result<CMatrix> {
    ensure!(r.len() == rows, "{what}: expected {rows} rows, found {}", r.len());
    let cols = r.first().map_or(0, Vec::len);
    ensure!(r.iter().all(|row| row.len() == cols), "{what}: rows differ in length");
    ensure!(r.iter().flatten().flatten().all(|x| x.is_finite()), "{what}: non-finite entry");
    Ok(CMatrix::from_fn(rows, cols, |i, j| from_cx(r[i][j])))
}

fn square(r: &Rows, n: usize, what: &str) -> Result<CMatrix> {
    let m = from_rows(r, n, what)?;
    ensure!(m.ncols() == n, "{what}: expected {n} columns, found {}", m.ncols());
    Ok(m)
}

fn frame(r: &Rows, n: usize, what: &str) -> Result<Subspace> {
    let b = from_rows(r, n, what)?;
    ensure!(b.ncols() <= n, "{what}: more columns than rows");
    let defect = orthonormality_defect(&b);
    ensure!(defect < 1e-10, "{what}: columns are not orthonormal ({defect:e})");
    Ok(Subspace::from_orthonormal(b))
}

impl InstanceFile {
    pub fn from_json(text: &str) -> Result<Self> {
        let f: InstanceFile = serde_json::from_str(text).context("malformed instance file")?;
        ensure!(
            f.schema_version == SCHEMA_VERSION,
            "unsupported schema_version {} (expected {SCHEMA_VERSION})",
            f.schema_version
        );
        ensure!(f.ambient_dim > 0, "ambient_dim must be positive");
        Ok(f)
    }

    /// Canonical encoding: pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("instance serializes");
        s.push('\n');
        s
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_json(&text)
    }

    pub fn from_model(model: &ExitSpaceModel, seed: Option<u64>) -> Result<Self> {
        let t = model.param.as_ref().ok_or_else(|| anyhow!("model carries no exit block"))?;
        let (kind, dom, act) = match &model.inner {
            Inner::Isometric(v) => (Kind::Isometric, v.dom().basis().clone(), v.ran_basis().clone()),
            Inner::Symmetric(a) => (Kind::Symmetric, a.dom().basis().clone(), a.action().clone()),
        };
        let exit_operator = (model.exit_op.dim() > 0).then(|| ExitOperator {
            domain_basis: to_rows(model.exit_op.dom().basis()),
            action: to_rows(model.exit_op.action()),
        });
        Ok(Self {
            schema_version: SCHEMA_VERSION,
            kind,
            ambient_dim: model.inner_dim(),
            domain_basis: to_rows(&dom),
            action_or_range: to_rows(&act),
            exit: Some(ExitBlock {
                dim: model.exit_dim,
                anchor: model.anchor.map(cx),
                exit_operator,
                t: to_rows(&t.full()),
            }),
            parameter: None,
            seed,
        })
    }
}

#[derive(Debug, Clone)]
pub enum Operator {
    Isometric(IsometryOp),
    Symmetric(SymmetricOp),
}

/// A constant parameter together with its anchor.
#[derive(Debug, Clone)]
pub struct AnchoredParam {
    pub anchor: Complex64,
    pub param: ContractionParam,
}

/// A loaded instance: the operator and whatever resolvent data it carries.
#[derive(Debug, Clone)]
pub struct Lab {
    pub tol: TolPolicy,
    pub op: Operator,
    pub model: Option<ExitSpaceModel>,
    pub param: Option<AnchoredParam>,
}

impl Lab {
    pub fn build(f: &InstanceFile, tol: TolPolicy) -> Result<Self> {
        let n = f.ambient_dim;
        let dom = frame(&f.domain_basis, n, "domain_basis")?;
        let act = from_rows(&f.action_or_range, n, "action_or_range")?;
        ensure!(act.ncols() == dom.dim(), "action_or_range must have one column per domain vector");
        ensure!(
            f.exit.is_none() || f.parameter.is_none(),
            "an instance carries either an exit block or a parameter, not both"
        );
        let op = match f.kind {
            Kind::Isometric => Operator::Isometric(IsometryOp::new(dom, act)?),
            Kind::Symmetric => Operator::Symmetric(SymmetricOp::new(dom, act)?),
        };
        let model = match &f.exit {
            Some(e) => Some(build_model(&op, e, n, &tol)?),
            None => None,
        };
        let param = match &f.parameter {
            Some(p) => Some(build_param(&op, p, n, &tol)?),
            None => None,
        };
        Ok(Self { tol, op, model, param })
    }

    pub fn kind(&self) -> Kind {
        match self.op {
            Operator::Isometric(_) => Kind::Isometric,
            Operator::Symmetric(_) => Kind::Symmetric,
        }
    }

    pub fn ambient_dim(&self) -> usize {
        match &self.op {
            Operator::Isometric(v) => v.ambient_dim(),
            Operator::Symmetric(a) => a.ambient_dim(),
        }
    }

    /// Anchor used on the symmetric side: the parameter's, the exit block's, or i.
    pub fn symmetric_anchor(&self) -> Complex64 {
        self.param
            .as_ref()
            .map(|p| p.anchor)
            .or_else(|| self.model.as_ref().and_then(|m| m.anchor))
            .unwrap_or(Complex64::new(0.0, 1.0))
    }

    pub fn resolvent(&self) -> Result<ResolventModel> {
        if let Some(model) = &self.model {
            return Ok(ResolventModel::dilation(model.clone(), self.tol)?);
        }
        let p = self.param.as_ref().ok_or_else(|| anyhow!("instance has neither an exit block nor a parameter"))?;
        Ok(match &self.op {
            Operator::Isometric(v) if p.anchor == ZERO => ResolventModel::chumakin(v, p.param.clone(), self.tol)?,
            Operator::Isometric(v) => ResolventModel::inin(v, p.param.clone(), p.anchor, self.tol)?,
            Operator::Symmetric(a) => ResolventModel::shtraus(a, p.param.clone(), p.anchor, self.tol)?,
        })
    }

    /// The unitary or self-adjoint extension behind the resolvent, when there is one.
    pub fn spectral_model(&self) -> Result<ExitSpaceModel> {
        if let Some(model) = &self.model {
            if model.big.matrix().is_none() {
                bail!("the exit-space extension is not self-adjoint");
            }
            return Ok(model.clone());
        }
        let p = self.param.as_ref().ok_or_else(|| anyhow!("instance has neither an exit block nor a parameter"))?;
        let map = p.param.map_at(p.anchor)?;
        if p.param.src().dim() != p.param.dst().dim() || map.isometry_defect() > 1e-10 {
            bail!("spectral data needs a unitary parameter");
        }
        Ok(match &self.op {
            Operator::Isometric(v) => {
                let u = orthogonal_extension(v, &map, p.anchor, &self.tol)?.matrix;
                ExitSpaceModel::from_unitary(v, &u)?
            }
            Operator::Symmetric(a) => {
                let ext = neumann_extension(a, p.anchor, &map, &self.tol)?;
                ensure!(ext.class.self_adjoint, "the extension given by the parameter is not self-adjoint");
                let h = ext.op.full();
                ExitSpaceModel::from_hermitian(a, &((&h + h.adjoint()) * Complex64::new(0.5, 0.0)))?
            }
        })
    }
}

fn build_model(op: &Operator, e: &ExitBlock, n: usize, tol: &TolPolicy) -> Result<ExitSpaceModel> {
    let total = n + e.dim;
    let t_full = square(&e.t, total, "exit.t")?;
    match op {
        Operator::Isometric(v) => {
            ensure!(e.anchor.is_none() && e.exit_operator.is_none(), "isometric exit blocks take no anchor or exit operator");
            let n0 = v.defect(Point::Finite(ZERO), tol).n_space;
            let src = Subspace::from_orthonormal(resolvent_lab::numkernel::block_diag(
                n0.basis(),
                &CMatrix::identity(e.dim, e.dim),
            ));
            let t = restrict_matrix(&t_full, &src);
            Ok(resolvent_lab::extensions::isometric_dilation(v, e.dim, &t, tol)?)
        }
        Operator::Symmetric(a) => {
            let z = from_cx(e.anchor.ok_or_else(|| anyhow!("symmetric exit blocks need an anchor"))?);
            let a_e = match &e.exit_operator {
                Some(x) => {
                    let dom = frame(&x.domain_basis, e.dim, "exit_operator.domain_basis")?;
                    let act = from_rows(&x.action, e.dim, "exit_operator.action")?;
                    ensure!(act.ncols() == dom.dim(), "exit_operator.action must match its domain");
                    SymmetricOp::new(dom, act)?
                }
                None => SymmetricOp::zero(e.dim),
            };
            let (nz, _) = defect_pair(&a.direct_sum(&a_e), z, tol);
            let t = restrict_matrix(&t_full, &nz);
            let model = ExitSpaceModel::with_exit_operator(a, &a_e, z, &t, tol)?;
            if !matches!(model.big, BigOp::Hermitian(_)) {
                bail!("exit block does not give a self-adjoint extension");
            }
            Ok(model)
        }
    }
}

fn build_param(op: &Operator, p: &ParameterSpec, n: usize, tol: &TolPolicy) -> Result<AnchoredParam> {
    let anchor = from_cx(p.anchor);
    let k_full = square(&p.value, n, "parameter.value")?;
    let (src, dst) = match op {
        Operator::Isometric(v) => {
            ensure!(anchor.norm() < 1.0, "isometric parameter anchor must lie in the unit disk");
            (v.defect(Point::Finite(anchor), tol).n_space, v.defect_reflected(anchor, tol).n_space)
        }
        Operator::Symmetric(a) => {
            ensure!(anchor.im != 0.0, "symmetric parameter anchor must be non-real");
            defect_pair(a, anchor, tol)
        }
    };
    let map = restrict_matrix(&k_full, &src);
    let leak = dst.residual(map.image());
    ensure!(leak < 1e-9, "parameter does not map into the target defect space ({leak:e})");
    Ok(AnchoredParam { anchor, param: ContractionParam::constant_from_map(src, dst, &map)? })
}
