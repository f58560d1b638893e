//! Parameterized constituent tensor families Y, R, Q, T, S and the
//! multitensor-constraint classifier.
//!
//! Each family builds a 4-leg tensor with legs `(a, b, c, d)` of dimension 2,
//! whose (ab|cd) matricization is the family's defining 4x4 matrix. Y, R and Q
//! are unitary in that grouping for every parameter choice; T and S are real
//! antisymmetric with M·Mᵀ proportional to the identity. The classifier also
//! reports the horizontal (ad|bc) regroup defect, which R, T and S satisfy up
//! to their scalar constants and Y and Q generically violate.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tensor::{matricize, max_dev_from_identity, MatrixView, Tensor, C64};

#[derive(Debug, Error)]
pub enum FamilyError {
    #[error("parameter theta_{0} missing for family {1}")]
    MissingParameter(u8, Family),
    #[error("classify expects a 4-leg tensor with equal leg dimensions")]
    NotFourLeg,
    #[error(transparent)]
    Tensor(#[from] crate::tensor::TensorError),
}

pub type Result<T> = std::result::Result<T, FamilyError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    Y,
    R,
    Q,
    T,
    S,
}

impl Family {
    pub fn parameter_indices(self) -> &'static [u8] {
        match self {
            Family::Y => &[1],
            Family::R => &[2],
            Family::Q => &[3, 4, 5],
            Family::T => &[6, 7],
            Family::S => &[8, 9],
        }
    }

    pub fn from_letter(s: &str) -> Option<Family> {
        match s {
            "Y" => Some(Family::Y),
            "R" => Some(Family::R),
            "Q" => Some(Family::Q),
            "T" => Some(Family::T),
            "S" => Some(Family::S),
            _ => None,
        }
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Family::Y => "Y",
            Family::R => "R",
            Family::Q => "Q",
            Family::T => "T",
            Family::S => "S",
        };
        write!(f, "{s}")
    }
}

/// The free parameters θ₁…θ₉. θ₁…θ₅ and θ₇ are angles; θ₆, θ₈, θ₉ are
/// unconstrained reals fed to arctan/cosh.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct ParameterSet {
    theta: BTreeMap<u8, f64>,
}

impl ParameterSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: &[(u8, f64)]) -> Self {
        Self {
            theta: pairs.iter().copied().collect(),
        }
    }

    /// All nine parameters from an array [θ₁, …, θ₉].
    pub fn from_array(v: [f64; 9]) -> Self {
        Self {
            theta: (1..=9u8).zip(v).collect(),
        }
    }

    pub fn set(&mut self, index: u8, value: f64) {
        self.theta.insert(index, value);
    }

    pub fn get(&self, index: u8) -> Option<f64> {
        self.theta.get(&index).copied()
    }

    fn require(&self, index: u8, family: Family) -> Result<f64> {
        self.get(index)
            .ok_or(FamilyError::MissingParameter(index, family))
    }

    pub fn to_array(&self) -> [f64; 9] {
        let mut out = [0.0; 9];
        for i in 1..=9u8 {
            if let Some(v) = self.get(i) {
                out[(i - 1) as usize] = v;
            }
        }
        out
    }

    /// Draw all nine parameters: θ₁…θ₅, θ₇ uniform on [0, 2π); θ₆, θ₈, θ₉
    /// uniform on [−5, 5].
    pub fn sample<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Self::sample_with_ranges(rng, &[])
    }

    /// Like [`ParameterSet::sample`] with per-index range overrides
    /// (index, lo, hi). Parameters are always drawn in index order so a seed
    /// pins the draw regardless of overrides.
    pub fn sample_with_ranges<R: Rng + ?Sized>(rng: &mut R, overrides: &[(u8, f64, f64)]) -> Self {
        let mut p = ParameterSet::new();
        for i in 1..=9u8 {
            let default = match i {
                6 | 8 | 9 => (-5.0, 5.0),
                _ => (0.0, TAU),
            };
            let (lo, hi) = overrides
                .iter()
                .find(|(idx, _, _)| *idx == i)
                .map(|&(_, lo, hi)| (lo, hi))
                .unwrap_or(default);
            p.set(i, rng.random_range(lo..hi));
        }
        p
    }
}

const LEGS: [&str; 4] = ["a", "b", "c", "d"];

fn from_matrix(rows: [[C64; 4]; 4]) -> Tensor {
    let mut data = Vec::with_capacity(16);
    for r in rows {
        data.extend(r);
    }
    Tensor::new(LEGS.to_vec(), vec![2, 2, 2, 2], data).expect("family tensor")
}

fn re(x: f64) -> C64 {
    Complex64::new(x, 0.0)
}

fn im(x: f64) -> C64 {
    Complex64::new(0.0, x)
}

const ZERO: C64 = Complex64::new(0.0, 0.0);

/// Y(θ₁): doubly constrained vertex constituent.
pub fn build_y(p: &ParameterSet) -> Result<Tensor> {
    let t = p.require(1, Family::Y)?;
    let (c, s) = (t.cos(), t.sin());
    Ok(from_matrix([
        [re(c), ZERO, ZERO, im(s)],
        [ZERO, re(s), im(c), ZERO],
        [ZERO, im(c), re(s), ZERO],
        [im(s), ZERO, ZERO, re(c)],
    ]))
}

/// R(θ₂): doubly unitary edge constituent, exp(iθ₂ X⊗X).
pub fn build_r(p: &ParameterSet) -> Result<Tensor> {
    let t = p.require(2, Family::R)?;
    let (c, s) = (t.cos(), t.sin());
    Ok(from_matrix([
        [re(c), ZERO, ZERO, im(s)],
        [ZERO, re(c), im(s), ZERO],
        [ZERO, im(s), re(c), ZERO],
        [im(s), ZERO, ZERO, re(c)],
    ]))
}

/// Q(θ₃, θ₄, θ₅): vertically unitary vertex constituent.
pub fn build_q(p: &ParameterSet) -> Result<Tensor> {
    let t3 = p.require(3, Family::Q)?;
    let t4 = p.require(4, Family::Q)?;
    let t5 = p.require(5, Family::Q)?;
    let (c3, s3) = (t3.cos(), t3.sin());
    let (c5, s5) = (t5.cos(), t5.sin());
    let e = Complex64::from_polar(1.0, t4);
    Ok(from_matrix([
        [re(c3), ZERO, ZERO, re(s3) * e],
        [ZERO, re(c5), im(s5), ZERO],
        [ZERO, im(s5), re(c5), ZERO],
        [re(s3) * e, ZERO, ZERO, -re(c3) * e * e],
    ]))
}

/// T(θ₆, θ₇): real antisymmetric edge swap-in with t = arctan θ₆, c = cos θ₇
/// and T·Tᵀ = (t² + c²)·I.
pub fn build_t(p: &ParameterSet) -> Result<Tensor> {
    let t6 = p.require(6, Family::T)?;
    let t7 = p.require(7, Family::T)?;
    let (x, y) = (t6.atan(), t7.cos());
    Ok(from_matrix([
        [ZERO, re(-x), re(-y), ZERO],
        [re(x), ZERO, ZERO, re(-y)],
        [re(y), ZERO, ZERO, re(x)],
        [ZERO, re(y), re(-x), ZERO],
    ]))
}

/// S(θ₈, θ₉): real antisymmetric edge swap-in with a = cosh θ₈, b = cosh θ₉
/// and S·Sᵀ = (a² + b²)·I.
pub fn build_s(p: &ParameterSet) -> Result<Tensor> {
    let t8 = p.require(8, Family::S)?;
    let t9 = p.require(9, Family::S)?;
    let (a, b) = (t8.cosh(), t9.cosh());
    Ok(from_matrix([
        [ZERO, re(-a), re(-b), ZERO],
        [re(a), ZERO, ZERO, re(-b)],
        [re(b), ZERO, ZERO, re(a)],
        [ZERO, re(b), re(-a), ZERO],
    ]))
}

pub fn build(family: Family, p: &ParameterSet) -> Result<Tensor> {
    match family {
        Family::Y => build_y(p),
        Family::R => build_r(p),
        Family::Q => build_q(p),
        Family::T => build_t(p),
        Family::S => build_s(p),
    }
}

/// T·Tᵀ = c·I closed form.
pub fn t_scalar_constant(p: &ParameterSet) -> Result<f64> {
    let x = p.require(6, Family::T)?.atan();
    let y = p.require(7, Family::T)?.cos();
    Ok(x * x + y * y)
}

/// S·Sᵀ = c·I closed form.
pub fn s_scalar_constant(p: &ParameterSet) -> Result<f64> {
    let a = p.require(8, Family::S)?.cosh();
    let b = p.require(9, Family::S)?.cosh();
    Ok(a * a + b * b)
}

/// Constraint classification of one 4-leg constituent tensor.
#[derive(Debug, Clone, Serialize)]
pub struct ConstraintReport {
    /// ‖M·M† − I‖_max for the vertical (ab|cd) grouping.
    pub vertical_unitary: f64,
    /// ‖N·N† − I‖_max for the horizontal (ad|bc) grouping.
    pub horizontal_unitary: f64,
    /// Fitted c with M·M† = c·I, present when the off-diagonal defect is
    /// below tolerance and c is positive.
    pub scalar_constant: Option<f64>,
    /// Nonzero entries only where the total index parity is even.
    pub z2_symmetric: bool,
    /// M + Mᵀ = 0 entry-wise.
    pub antisymmetric: bool,
}

pub const ALGEBRAIC_TOL: f64 = 1e-10;

fn vertical_view(t: &Tensor) -> Result<MatrixView> {
    let legs = t.legs();
    Ok(matricize(
        t,
        &[legs[0].as_str(), legs[1].as_str()],
        &[legs[2].as_str(), legs[3].as_str()],
    )?)
}

fn horizontal_view(t: &Tensor) -> Result<MatrixView> {
    let legs = t.legs();
    Ok(matricize(
        t,
        &[legs[0].as_str(), legs[3].as_str()],
        &[legs[1].as_str(), legs[2].as_str()],
    )?)
}

/// ‖M·M† − I‖_max over the vertical (ab|cd) grouping.
pub fn vertical_defect(t: &Tensor) -> Result<f64> {
    let m = vertical_view(t)?;
    Ok(max_dev_from_identity(&m.data.dot(&m.dagger())))
}

/// ‖N·N† − I‖_max over the horizontal (ad|bc) grouping.
pub fn horizontal_defect(t: &Tensor) -> Result<f64> {
    let n = horizontal_view(t)?;
    Ok(max_dev_from_identity(&n.data.dot(&n.dagger())))
}

/// ‖M·conj(M) − I‖_max over the vertical grouping: the transpose-pair
/// collapse that Y satisfies for every θ₁ (M is unitary and symmetric).
pub fn transpose_pair_defect(t: &Tensor) -> Result<f64> {
    let m = vertical_view(t)?;
    let conj = m.data.mapv(|c| c.conj());
    Ok(max_dev_from_identity(&m.data.dot(&conj)))
}

/// ‖M·Mᵀ − c·I‖_max for a given constant (T and S closed-form checks).
pub fn gram_transpose_defect(t: &Tensor, c: f64) -> Result<f64> {
    let m = vertical_view(t)?;
    let g = m.data.dot(&m.data.t());
    let n = g.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { re(c) } else { ZERO };
            worst = worst.max((g[(i, j)] - target).norm());
        }
    }
    Ok(worst)
}

fn fit_scalar(g: &ndarray::Array2<C64>, tol: f64) -> Option<f64> {
    let n = g.nrows();
    let mut off = 0.0f64;
    let mut diag_dev = 0.0f64;
    let mean: f64 = (0..n).map(|i| g[(i, i)].re).sum::<f64>() / n as f64;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                diag_dev = diag_dev.max((g[(i, j)] - re(mean)).norm());
            } else {
                off = off.max(g[(i, j)].norm());
            }
        }
    }
    (off <= tol && diag_dev <= tol && mean > tol).then_some(mean)
}

/// Classify a 4-leg tensor against the constituent constraint set.
pub fn classify(t: &Tensor) -> Result<ConstraintReport> {
    if t.rank() != 4 || t.shape().iter().any(|&d| d != t.shape()[0]) {
        return Err(FamilyError::NotFourLeg);
    }
    let m = vertical_view(t)?;
    let gram = m.data.dot(&m.dagger());
    let vertical_unitary = max_dev_from_identity(&gram);
    let horizontal_unitary = horizontal_defect(t)?;
    let scalar_constant = fit_scalar(&gram, ALGEBRAIC_TOL);

    let mut z2 = true;
    let dims = t.shape();
    for a in 0..dims[0] {
        for b in 0..dims[1] {
            for c in 0..dims[2] {
                for d in 0..dims[3] {
                    if (a + b + c + d) % 2 == 1 && t.get(&[a, b, c, d]).norm() > 1e-12 {
                        z2 = false;
                    }
                }
            }
        }
    }
    let anti = {
        let mt = m.data.t();
        let mut worst = 0.0f64;
        for ((i, j), v) in m.data.indexed_iter() {
            worst = worst.max((v + mt[(i, j)]).norm());
        }
        worst <= 1e-12
    };
    Ok(ConstraintReport {
        vertical_unitary,
        horizontal_unitary,
        scalar_constant,
        z2_symmetric: z2,
        antisymmetric: anti,
    })
}
