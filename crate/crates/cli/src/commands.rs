//! The subcommands, as functions from inputs to output text.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use num_complex::Complex64;
use serde::Serialize;

use resolvent_lab::extensions::is_admissible;
use resolvent_lab::generate::{isometric_instance, symmetric_instance};
use resolvent_lab::numkernel::{CMatrix, I};
use resolvent_lab::resolvents::{isometric_samples, symmetric_samples};
use resolvent_lab::spectral::{gap_report, spectral_measure, AtomKind, Region};
use resolvent_lab::TolPolicy;

use crate::instance::{InstanceFile, Kind, Lab};
use crate::suites::{gap_inputs, region_label};

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, text: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("creating a file in {}", dir.display()))?;
    tmp.write_all(text.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub struct GenArgs {
    pub kind: Kind,
    pub n: usize,
    pub d: usize,
    pub m: usize,
    /// Domain dimension of the exit-space operator (symmetric only).
    pub d_exit: usize,
    pub seed: u64,
}

/// A random instance plus warnings for the user.
pub fn gen(args: &GenArgs, tol: &TolPolicy) -> Result<(InstanceFile, Vec<String>)> {
    ensure!(args.n > 0, "n must be positive");
    ensure!(args.d <= args.n, "need 0 ≤ d ≤ n");
    let mut warnings = Vec::new();
    let model = match args.kind {
        Kind::Isometric => {
            ensure!(args.d_exit == 0, "--de applies to symmetric instances only");
            if args.d == args.n {
                warnings.push("unitary, defects (0,0)".to_string());
            }
            isometric_instance(args.seed, args.n, args.d, args.m, tol)?
        }
        Kind::Symmetric => {
            ensure!(args.d_exit <= args.m, "need --de ≤ m");
            if args.d == args.n {
                warnings.push("self-adjoint, defects (0,0)".to_string());
            }
            let model = symmetric_instance(args.seed, args.n, args.d, args.m, args.d_exit, I, tol)?;
            let a = model.symmetric_inner()?;
            let t = model.param.as_ref().expect("generated from an exit block");
            ensure!(is_admissible(&a.direct_sum(&model.exit_op), I, t, tol)?, "generated exit block is not admissible");
            model
        }
    };
    Ok((InstanceFile::from_model(&model, Some(args.seed))?, warnings))
}

fn entry_header(prefix: &str, n: usize) -> String {
    let mut s = String::new();
    for i in 1..=n {
        for j in 1..=n {
            write!(s, "\t{prefix}{i}{j}_re\t{prefix}{i}{j}_im").unwrap();
        }
    }
    s
}

fn push_entries(line: &mut String, m: &CMatrix) {
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            write!(line, "\t{}\t{}", m[(i, j)].re, m[(i, j)].im).unwrap();
        }
    }
}

/// Tab-separated samples: the point, then the entries of R row by row.
/// With no points given, `grid` standard sample points are used.
pub fn resolvent(lab: &Lab, points: &[Complex64], grid: usize) -> Result<String> {
    let r = lab.resolvent()?;
    let points = if points.is_empty() {
        match lab.kind() {
            Kind::Isometric => isometric_samples(grid),
            Kind::Symmetric => symmetric_samples(grid),
        }
    } else {
        points.to_vec()
    };
    let values = resolvent_lab::par::map(&points, |&p| r.eval(p));
    let n = lab.ambient_dim();
    let mut out = format!("point_re\tpoint_im{}\n", entry_header("r", n));
    for (p, v) in points.iter().zip(values) {
        let v = v.with_context(|| format!("evaluating the resolvent at {p}"))?;
        let mut line = format!("{}\t{}", p.re, p.im);
        push_entries(&mut line, &v);
        out.push_str(&line);
        out.push('\n');
    }
    Ok(out)
}

/// Atom table: location (θ on the circle, t on the line), trace of the weight, weight entries.
pub fn spectrum(lab: &Lab) -> Result<String> {
    let model = lab.spectral_model()?;
    let atoms = spectral_measure(&model, &lab.tol)?;
    let n = lab.ambient_dim();
    let loc = match atoms.kind {
        AtomKind::Circle => "theta",
        AtomKind::Line => "t",
    };
    let mut out = format!("{loc}\tweight_trace{}\n", entry_header("w", n));
    for a in &atoms.atoms {
        let trace: f64 = (0..n).map(|i| a.weight[(i, i)].re).sum();
        let mut line = format!("{}\t{}", a.location, trace);
        push_entries(&mut line, &a.weight);
        out.push_str(&line);
        out.push('\n');
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapPointOut {
    pub location: f64,
    pub continuation: bool,
    pub unitarity_defect: Option<f64>,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapOut {
    pub region: String,
    pub verdict: String,
    pub failed_conditions: Vec<String>,
    pub min_margin: f64,
    pub min_margin_at: f64,
    pub max_unitarity_defect: Option<f64>,
    /// Atoms of the extension inside the region, when the instance determines them.
    pub atoms: Option<Vec<f64>>,
    pub points: Vec<GapPointOut>,
}

fn condition_name(c: u8) -> String {
    match c {
        1 => "continuation across the region".into(),
        2 => "unitary boundary values".into(),
        3 => "invertibility against W".into(),
        _ => format!("condition {c}"),
    }
}

pub fn gap(lab: &Lab, region: &Region, grid: usize) -> Result<String> {
    match (lab.kind(), region) {
        (Kind::Isometric, Region::Interval { .. }) => bail!("isometric instances take --arc"),
        (Kind::Symmetric, Region::Arc { .. }) => bail!("symmetric instances take --interval"),
        _ => {}
    }
    let (op, param) = gap_inputs(lab)?;
    let rep = gap_report(&op, &param, region, grid, &lab.tol)?;
    let atoms = rep.oracle_atoms.clone().or_else(|| {
        let model = lab.spectral_model().ok()?;
        Some(spectral_measure(&model, &lab.tol).ok()?.in_region(region))
    });
    let finite = |x: f64| x.is_finite().then_some(x);
    let out = GapOut {
        region: region_label(region),
        verdict: if rep.analytic { "analytic" } else { "not analytic" }.into(),
        failed_conditions: rep.failed.iter().map(|&c| condition_name(c)).collect(),
        min_margin: rep.min_margin,
        min_margin_at: rep.min_margin_at,
        max_unitarity_defect: finite(rep.max_unitarity_defect),
        atoms,
        points: rep
            .points
            .iter()
            .map(|p| GapPointOut {
                location: p.location,
                continuation: p.continuation,
                unitarity_defect: finite(p.unitarity_defect),
                margin: p.margin,
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&out)?;
    s.push('\n');
    Ok(s)
}
