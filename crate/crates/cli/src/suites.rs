//! Verification suites run by `reslab verify`.

use std::f64::consts::{FRAC_PI_2, TAU};

use anyhow::{bail, Result};
use num_complex::Complex64;

use resolvent_lab::extensions::BlockParam;
use resolvent_lab::numkernel::{max_abs, op_norm, CMatrix, ZERO};
use resolvent_lab::resolvents::{
    chumakin_resolvent, dilation_boundary_parameter, dilation_parameter, frak_f, frak_f_param, frak_f_via_char, isometric_samples, phi_infinity,
    recover_inin_parameter, recover_parameter, shtraus_resolvent, symmetric_samples, verify_resolvent_axioms,
    verify_symmetric_axioms, ContractionParam, RaySpec, ResolventModel, AXIOM_TOL,
};
use resolvent_lab::spectral::{gap_report, spectral_measure, GapOperator, Region, DEFAULT_GRID};
use resolvent_lab::Error;

use crate::instance::{Lab, Operator};
use crate::report::{Check, Report};

pub const ORACLE_TOL: f64 = 1e-9;
pub const LIMIT_TOL: f64 = 1e-3;
const MONOTONE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Axioms,
    Oracle,
    Gap,
    Limits,
    All,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Axioms => "axioms",
            Suite::Oracle => "oracle",
            Suite::Gap => "gap",
            Suite::Limits => "limits",
            Suite::All => "all",
        }
    }
}

/// Deliberate corruption of the resolvent, for checking that the axioms bite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Tamper {
    /// R ↦ R/2
    Scale,
    /// R(p) ↦ R(p) + 0.3·p·E
    Shift,
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub tamper: Option<Tamper>,
    /// Sector half-opening ε for the Φ∞ ray.
    pub epsilon: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { tamper: None, epsilon: resolvent_lab::resolvents::DEFAULT_SECTOR_EPSILON }
    }
}

pub fn verify(lab: &Lab, suite: Suite, opts: &VerifyOptions) -> Report {
    let parts: &[Suite] = match suite {
        Suite::All => &[Suite::Axioms, Suite::Oracle, Suite::Gap, Suite::Limits],
        _ => std::slice::from_ref(&suite),
    };
    let mut checks = Vec::new();
    for &s in parts {
        let found = match s {
            Suite::Axioms => axioms(lab, opts),
            Suite::Oracle => oracle(lab),
            Suite::Gap => gap(lab),
            Suite::Limits => limits(lab, opts),
            Suite::All => unreachable!(),
        };
        let found = found.unwrap_or_else(|e| vec![Check::failed(format!("{} suite", s.name()), s.name(), format!("{e:#}"))]);
        checks.extend(found.into_iter().map(|mut c| {
            if suite == Suite::All {
                c.name = format!("{}: {}", s.name(), c.name);
            }
            c
        }));
    }
    Report::new(suite.name(), checks)
}

fn tampered(lab: &Lab, tamper: Option<Tamper>) -> Result<ResolventModel> {
    let r = lab.resolvent()?;
    Ok(match tamper {
        None => r,
        Some(Tamper::Scale) => r.scaled(0.5),
        Some(Tamper::Shift) => r.shifted(0.3),
    })
}

fn axioms(lab: &Lab, opts: &VerifyOptions) -> Result<Vec<Check>> {
    let r = tampered(lab, opts.tamper)?;
    let samples = isometric_samples(18);
    let report = match &lab.op {
        Operator::Isometric(v) => verify_resolvent_axioms(&r, v, &samples, AXIOM_TOL)?,
        Operator::Symmetric(a) => verify_symmetric_axioms(&r, a, lab.symmetric_anchor(), &samples, AXIOM_TOL)?,
    };
    Ok(report
        .checks
        .iter()
        .map(|c| Check::new(format!("axiom {}: {}", c.axiom, c.name), c.pass, c.worst, "resolvent axioms"))
        .collect())
}

/// Largest value of `f` over the points; errors abort.
fn worst(points: &[Complex64], f: impl Fn(Complex64) -> resolvent_lab::Result<f64> + Sync + Send) -> Result<f64> {
    let vals = resolvent_lab::par::map(points, |&p| f(p));
    let mut w: f64 = 0.0;
    for v in vals {
        w = w.max(v?);
    }
    Ok(w)
}

fn oracle(lab: &Lab) -> Result<Vec<Check>> {
    let r = lab.resolvent()?;
    let tol = lab.tol;
    let mut checks = Vec::new();
    match &lab.op {
        Operator::Isometric(v) => {
            let all = isometric_samples(40);
            let inside: Vec<Complex64> = all.iter().copied().filter(|z| z.norm() < 1.0).collect();
            if let Some(model) = &lab.model {
                let f = dilation_parameter(model, &tol)?;
                let w = worst(&all, |z| Ok(max_abs(&(r.eval(z)? - chumakin_resolvent(v, &f, z, &tol)?))))?;
                checks.push(Check::below("dilation resolvent vs Chumakin formula", w, ORACLE_TOL, "Chumakin formula"));
                let w = worst(&inside, |z| Ok(max_abs(&(recover_parameter(&r, v, z)? - f.eval(z)?))))?;
                checks.push(Check::below("recovered parameter vs dilation blocks", w, ORACLE_TOL, "parameter recovery"));
            }
            if let Some(p) = &lab.param {
                let w = if p.anchor == ZERO {
                    worst(&inside, |z| Ok(max_abs(&(recover_parameter(&r, v, z)? - p.param.eval(z)?))))?
                } else {
                    worst(&inside, |z| Ok(recover_inin_parameter(&r, v, p.anchor, z)?.distance(&p.param.map_at(z)?)))?
                };
                checks.push(Check::below("recovered parameter vs instance parameter", w, ORACLE_TOL, "parameter recovery"));
                if let Ok(model) = lab.spectral_model() {
                    let direct = ResolventModel::dilation(model, tol)?;
                    let w = worst(&all, |z| Ok(max_abs(&(r.eval(z)? - direct.eval(z)?))))?;
                    checks.push(Check::below("parameter formula vs unitary extension", w, ORACLE_TOL, "orthogonal extension"));
                }
            }
        }
        Operator::Symmetric(a) => {
            let l0 = lab.symmetric_anchor();
            let all = symmetric_samples(40);
            let same = |z: Complex64| all.iter().copied().filter(|l| l.im * z.im > 0.0).collect::<Vec<_>>();
            if let Some(model) = &lab.model {
                let f = frak_f_param(&r, a, l0)?;
                let w = worst(&all, |l| Ok(max_abs(&(r.eval(l)? - shtraus_resolvent(a, &f, l0, l, &tol)?))))?;
                checks.push(Check::below("dilation resolvent vs Shtraus formula", w, ORACLE_TOL, "Shtraus formula"));
                if let (Some(z), Some(t)) = (model.anchor, &model.param) {
                    let blocks = BlockParam::from_map(a, &model.exit_op, z, t, &tol)?;
                    let w = worst(&same(z), |l| {
                        Ok(frak_f_via_char(&blocks, &model.exit_op, z, l, &tol)?.distance(&frak_f(&r, a, z, l)?))
                    })?;
                    checks.push(Check::below(
                        "boundary parameter vs characteristic-function form",
                        w,
                        ORACLE_TOL,
                        "characteristic function representation",
                    ));
                }
            }
            if let Some(p) = &lab.param {
                let w = worst(&same(l0), |l| Ok(frak_f(&r, a, l0, l)?.distance(&p.param.map_at(l)?)))?;
                checks.push(Check::below("recovered parameter vs instance parameter", w, ORACLE_TOL, "Shtraus parameter recovery"));
                if let Ok(model) = lab.spectral_model() {
                    let direct = ResolventModel::dilation(model, tol)?;
                    let w = worst(&all, |l| Ok(max_abs(&(r.eval(l)? - direct.eval(l)?))))?;
                    checks.push(Check::below("Shtraus formula vs self-adjoint extension", w, ORACLE_TOL, "Neumann formulas"));
                }
            }
        }
    }
    Ok(checks)
}

/// Operator and parameter handed to the gap machinery.
pub fn gap_inputs(lab: &Lab) -> Result<(GapOperator, ContractionParam)> {
    let tol = lab.tol;
    match &lab.op {
        Operator::Isometric(v) => {
            if let Some(p) = &lab.param {
                return Ok((GapOperator::Isometric { v: v.clone(), z0: p.anchor }, p.param.clone()));
            }
            match &lab.model {
                Some(model) => Ok((GapOperator::Isometric { v: v.clone(), z0: ZERO }, dilation_parameter(model, &tol)?)),
                None => bail!("instance has neither an exit block nor a parameter"),
            }
        }
        Operator::Symmetric(a) => {
            let lambda0 = lab.symmetric_anchor();
            if let Some(p) = &lab.param {
                return Ok((GapOperator::Symmetric { a: a.clone(), lambda0 }, p.param.clone()));
            }
            match &lab.model {
                Some(model) => {
                    let param = dilation_boundary_parameter(model, lambda0, &tol)?;
                    Ok((GapOperator::Symmetric { a: a.clone(), lambda0 }, param))
                }
                None => bail!("instance has neither an exit block nor a parameter"),
            }
        }
    }
}

/// Regions that isolate each atom, and atom-free regions between them.
fn probe_regions(atoms: &[f64], circle: bool) -> Vec<(Region, bool)> {
    let mut out = Vec::new();
    let k = atoms.len();
    if k == 0 {
        let r = if circle { Region::arc(0.5, 2.5) } else { Region::interval(-2.0, 2.0) };
        out.extend(r.ok().map(|r| (r, false)));
        return out;
    }
    let dist = |i: usize, j: usize| {
        let d = (atoms[i] - atoms[j]).abs();
        if circle {
            d.min(TAU - d)
        } else {
            d
        }
    };
    for i in 0..k {
        let near = (0..k).filter(|&j| j != i).map(|j| dist(i, j)).fold(f64::INFINITY, f64::min);
        let w = (near / 3.0).min(0.25);
        let t = atoms[i];
        let r = if circle { Region::arc((t - w).max(0.0), (t + w).min(TAU - 1e-6)) } else { Region::interval(t - w, t + w) };
        out.extend(r.ok().map(|r| (r, true)));
    }
    let pairs = if circle { k } else { k - 1 };
    for i in 0..pairs {
        let (a, mut b) = (atoms[i], atoms[(i + 1) % k]);
        if circle && i + 1 == k {
            b += TAU;
        }
        let w = (b - a) / 4.0;
        let mid = 0.5 * (a + b);
        if w <= 1e-6 || (circle && (mid - w < 0.0 || mid + w >= TAU)) {
            continue;
        }
        let r = if circle { Region::arc(mid - w, mid + w) } else { Region::interval(mid - w, mid + w) };
        out.extend(r.ok().map(|r| (r, false)));
    }
    if !circle {
        out.extend(Region::interval(atoms[0] - 1.5, atoms[0] - 0.5).ok().map(|r| (r, false)));
        out.extend(Region::interval(atoms[k - 1] + 0.5, atoms[k - 1] + 1.5).ok().map(|r| (r, false)));
    }
    out
}

pub fn region_label(r: &Region) -> String {
    match *r {
        Region::Arc { theta1, theta2 } => format!("arc ({theta1:.4}, {theta2:.4})"),
        Region::Interval { a, b } => format!("interval ({a:.4}, {b:.4})"),
    }
}

fn gap(lab: &Lab) -> Result<Vec<Check>> {
    const CITE: &str = "gap criterion";
    let (op, param) = match gap_inputs(lab) {
        Ok(x) => x,
        Err(e) => return Ok(vec![Check::skipped("gap verdicts", CITE, format!("{e:#}"))]),
    };
    let atoms = match lab.spectral_model() {
        Ok(model) => spectral_measure(&model, &lab.tol)?.locations(),
        Err(e) => return Ok(vec![Check::skipped("gap verdicts", CITE, format!("no spectral ground truth: {e:#}"))]),
    };
    let circle = matches!(op, GapOperator::Isometric { .. });
    let regions = probe_regions(&atoms, circle);
    let outcomes = resolvent_lab::par::map(&regions, |(region, _)| gap_report(&op, &param, region, DEFAULT_GRID, &lab.tol));
    let mut checks = Vec::new();
    for ((region, has_atom), outcome) in regions.iter().zip(outcomes) {
        let expect = if *has_atom { "atom" } else { "no atom" };
        let name = format!("{} ({expect})", region_label(region));
        checks.push(match outcome {
            Ok(rep) => {
                let verdict = if rep.analytic { "analytic" } else { "not analytic" };
                Check::new(name, rep.analytic != *has_atom, rep.min_margin, CITE).with_note(format!("verdict {verdict}"))
            }
            // An eigenvalue of the operator itself sits in the region.
            Err(Error::NotRegularType { point, .. }) => {
                Check::new(name, *has_atom, 0.0, CITE).with_note(format!("not of regular type at {point}"))
            }
            Err(e) => Check::failed(name, CITE, e.to_string()),
        });
    }
    Ok(checks)
}

fn limits(lab: &Lab, opts: &VerifyOptions) -> Result<Vec<Check>> {
    let r = lab.resolvent()?;
    match &lab.op {
        Operator::Isometric(_) => isometric_limits(&r),
        Operator::Symmetric(a) => {
            const CITE: &str = "boundary parameter limit at infinity";
            let lambda0 = lab.symmetric_anchor();
            let angle = FRAC_PI_2 * lambda0.im.signum();
            let ray = RaySpec::new(lambda0, angle, (1..=6).map(|k| 10f64.powi(k)).collect(), opts.epsilon)?;
            let rep = phi_infinity(a, &r, &ray)?;
            let mut checks = Vec::new();
            for (j, errs) in rep.limit_estimates.iter().enumerate() {
                let monotone = errs[1..].windows(2).all(|w| w[1] <= w[0] + MONOTONE_SLACK);
                let last = errs[errs.len() - 1];
                let c = Check::new(format!("domain vector {}: ray limit", j + 1), monotone && last < LIMIT_TOL, last, CITE);
                checks.push(if monotone { c } else { c.with_note("error grows along the ray") });
            }
            for (j, row) in rep.membership[rep.in_domain..].iter().enumerate() {
                let growth = row[5] / row[1];
                let pass = row[1] > 0.0 && row[5] >= 10.0 * row[1];
                checks.push(Check::new(format!("vector outside the domain {}: norm-defect growth", j + 1), pass, growth, CITE));
            }
            if checks.is_empty() {
                checks.push(Check::skipped("ray limit", CITE, "defect space is trivial"));
            }
            Ok(checks)
        }
    }
}

/// ‖R(ζ) − E‖ ≤ |ζ|/(1 − |ζ|) near the origin and ‖R(ζ)‖ ≤ 1/(|ζ| − 1) near infinity.
fn isometric_limits(r: &ResolventModel) -> Result<Vec<Check>> {
    const CITE: &str = "resolvent bounds at the origin and at infinity";
    let n = r.ambient_dim();
    let dir = Complex64::from_polar(1.0, 0.3);
    let small: Vec<Complex64> = (1..=6).map(|k| dir * 10f64.powi(-k)).collect();
    let large: Vec<Complex64> = (1..=6).map(|k| dir * 10f64.powi(k)).collect();
    let id = CMatrix::identity(n, n);
    let w0 = worst(&small, |z| {
        let bound = z.norm() / (1.0 - z.norm());
        Ok((op_norm(&(r.eval(z)? - &id)) - bound).max(0.0) / bound)
    })?;
    let winf = worst(&large, |z| {
        let bound = 1.0 / (z.norm() - 1.0);
        Ok((op_norm(&r.eval(z)?) - bound).max(0.0) / bound)
    })?;
    Ok(vec![
        Check::below("approach to E at the origin", w0, 1e-9, CITE),
        Check::below("decay at infinity", winf, 1e-9, CITE),
    ])
}
