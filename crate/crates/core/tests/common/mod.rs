#![allow(dead_code)]

use num_complex::Complex64;
use resolvent_lab::extensions::ExitSpaceModel;
use resolvent_lab::generate::{isometric_instance, symmetric_instance};
use resolvent_lab::random::{self, index, uniform};
use resolvent_lab::{IsometryOp, SymmetricOp, TolPolicy};

pub fn tol() -> TolPolicy {
    TolPolicy::default()
}

/// Random dilation of a random isometry, n ≤ 8, m ≤ 8.
pub fn iso_case(seed: u64) -> (IsometryOp, ExitSpaceModel) {
    let mut rng = random::rng(seed ^ 0x15_0000);
    let n = 1 + index(&mut rng, 7);
    let d = index(&mut rng, n);
    let m = index(&mut rng, 8);
    let model = isometric_instance(seed, n, d, m, &tol()).expect("isometric instance");
    let v = model.isometric_inner().unwrap().clone();
    (v, model)
}

/// Same, with 1 ≤ d < n so both D(V) and N₀(V) are nontrivial.
pub fn iso_case_proper(seed: u64) -> (IsometryOp, ExitSpaceModel) {
    let mut rng = random::rng(seed ^ 0x16_0000);
    let n = 2 + index(&mut rng, 6);
    let d = 1 + index(&mut rng, n - 2);
    let m = index(&mut rng, 6);
    let model = isometric_instance(seed, n, d, m, &tol()).expect("isometric instance");
    let v = model.isometric_inner().unwrap().clone();
    (v, model)
}

pub struct SymCase {
    pub a: SymmetricOp,
    pub model: ExitSpaceModel,
    pub anchor: Complex64,
    /// A second non-real point for Shtraus parametrizations.
    pub lambda0: Complex64,
}

/// Self-adjoint extension of a non-dense A ⊕ A_e; A_e is nontrivial when `general_exit`.
pub fn sym_case(seed: u64, general_exit: bool) -> SymCase {
    let mut rng = random::rng(seed ^ 0x5e_0000);
    let n = 1 + index(&mut rng, 7);
    let d = index(&mut rng, n - 1);
    let m = if general_exit { 2 + index(&mut rng, 4) } else { index(&mut rng, 6) };
    let d_e = if general_exit { 1 + index(&mut rng, m - 2) } else { 0 };
    let anchor = Complex64::new(uniform(&mut rng, -1.0, 1.0), uniform(&mut rng, 0.5, 2.0));
    let sign = if index(&mut rng, 1) == 0 { 1.0 } else { -1.0 };
    let lambda0 = Complex64::new(uniform(&mut rng, -1.0, 1.0), sign * uniform(&mut rng, 0.5, 2.0));
    let model = symmetric_instance(seed, n, d, m, d_e, anchor, &tol()).expect("symmetric instance");
    let a = model.symmetric_inner().unwrap().clone();
    SymCase { a, model, anchor, lambda0 }
}

pub fn max_of(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().fold(0.0, f64::max)
}
