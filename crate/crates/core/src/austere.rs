//! Pointwise austere and stark conditions on shape operators, and the bordered
//! matrix of the Hopf lift.
//!
//! A shape operator of a real hypersurface in CPⁿ⁺¹ is a symmetric matrix of
//! side 2n+1 in an orthonormal basis whose last vector is the structure vector
//! W. The first 2n vectors span ℋ, on which the complex structure acts either
//! as Jₙ (standard basis) or as J_{k,ℓ} (split basis, adapted to ℋ = ℋ₁ ⊕ ℋ₂).

use log::warn;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::canonform;
use crate::matcore::{elem_sym, RealSymMatrix};

/// Asymmetry above which loading a matrix logs a warning.
const ASYMMETRY_WARN: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ShapeError {
    #[error("invalid shape operator: {0}")]
    Invalid(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("shape operator is not stark")]
    NotStark,
    #[error("reduction residual {residual:e} exceeds tolerance at stage {stage}")]
    ToleranceBreach { stage: String, residual: f64 },
}

/// Which complex structure the basis of ℋ is adapted to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    Standard,
    Split(usize, usize),
}

/// Shape operator in an adapted basis; the last basis vector is W.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeOperatorRep {
    a: DMatrix<f64>,
    basis: Basis,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShapeOperatorJson {
    pub n: usize,
    pub basis: Basis,
    pub entries: Vec<Vec<f64>>,
}

impl ShapeOperatorRep {
    pub fn new(a: RealSymMatrix, basis: Basis) -> Result<Self, ShapeError> {
        let side = a.n();
        if side < 3 || side.is_multiple_of(2) {
            return Err(ShapeError::DimensionMismatch(format!(
                "side must be 2n+1 with n >= 1, got {side}"
            )));
        }
        let n = (side - 1) / 2;
        if let Basis::Split(k, l) = basis {
            if k + l != n {
                return Err(ShapeError::DimensionMismatch(format!(
                    "split({k},{l}) needs k+l = n = {n}"
                )));
            }
        }
        Ok(Self {
            a: a.into_matrix(),
            basis,
        })
    }

    pub fn standard(a: DMatrix<f64>) -> Result<Self, ShapeError> {
        Self::from_matrix(a, Basis::Standard)
    }

    /// Symmetrizes `a`, warning if it was noticeably asymmetric.
    pub fn from_matrix(a: DMatrix<f64>, basis: Basis) -> Result<Self, ShapeError> {
        let sym = RealSymMatrix::new(a).map_err(|e| ShapeError::DimensionMismatch(e.to_string()))?;
        if sym.asymmetry() > ASYMMETRY_WARN {
            warn!("input matrix asymmetric by {:e}; symmetrized", sym.asymmetry());
        }
        Self::new(sym, basis)
    }

    pub fn from_json_value(j: &ShapeOperatorJson) -> Result<Self, ShapeError> {
        let side = 2 * j.n + 1;
        if j.entries.len() != side || j.entries.iter().any(|r| r.len() != side) {
            return Err(ShapeError::DimensionMismatch(format!(
                "n = {} needs a {side}x{side} entries array",
                j.n
            )));
        }
        if j.entries.iter().flatten().any(|x| !x.is_finite()) {
            return Err(ShapeError::Parse("non-finite matrix entry".into()));
        }
        let flat: Vec<f64> = j.entries.iter().flatten().copied().collect();
        Self::from_matrix(DMatrix::from_row_slice(side, side, &flat), j.basis)
    }

    pub fn from_json(text: &str) -> Result<Self, ShapeError> {
        let j: ShapeOperatorJson =
            serde_json::from_str(text).map_err(|e| ShapeError::Parse(e.to_string()))?;
        Self::from_json_value(&j)
    }

    pub fn to_json_value(&self) -> ShapeOperatorJson {
        ShapeOperatorJson {
            n: self.n(),
            basis: self.basis,
            entries: matrix_rows(&self.a),
        }
    }

    pub fn n(&self) -> usize {
        (self.a.nrows() - 1) / 2
    }

    pub fn side(&self) -> usize {
        self.a.nrows()
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    /// Ã: A with the W row and column removed.
    pub fn a_tilde(&self) -> DMatrix<f64> {
        let m = 2 * self.n();
        self.a.view((0, 0), (m, m)).into_owned()
    }

    /// φ on the full tangent space (zero on W).
    pub fn phi(&self) -> DMatrix<f64> {
        match self.basis {
            Basis::Standard => j_standard(self.n()),
            Basis::Split(k, l) => j_split(k, l),
        }
    }

    /// φ restricted to ℋ.
    pub fn j_h(&self) -> DMatrix<f64> {
        let m = 2 * self.n();
        self.phi().view((0, 0), (m, m)).into_owned()
    }

    /// A·W as a column vector.
    pub fn a_w(&self) -> DVector<f64> {
        self.a.column(self.side() - 1).into_owned()
    }
}

pub(crate) fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| m.row(i).iter().copied().collect())
        .collect()
}

/// Jₙ on ℝ²ⁿ⁺¹: e_j ↦ e_{j+n}, e_{j+n} ↦ −e_j, W ↦ 0.
pub fn j_standard(n: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * n + 1, 2 * n + 1);
    for i in 0..n {
        j[(i + n, i)] = 1.0;
        j[(i, i + n)] = -1.0;
    }
    j
}

/// J_{k,ℓ}: Jₖ on the first 2k vectors, J_ℓ on the next 2ℓ, zero on W.
pub fn j_split(k: usize, l: usize) -> DMatrix<f64> {
    let side = 2 * (k + l) + 1;
    let mut j = DMatrix::zeros(side, side);
    for i in 0..k {
        j[(i + k, i)] = 1.0;
        j[(i, i + k)] = -1.0;
    }
    let o = 2 * k;
    for i in 0..l {
        j[(o + i + l, o + i)] = 1.0;
        j[(o + i, o + i + l)] = -1.0;
    }
    j
}

fn norm_scale(m: &DMatrix<f64>) -> f64 {
    m.norm().max(1.0)
}

/// Input to the general (any codimension) condition in one normal direction.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralAustereInput {
    a_nu: DMatrix<f64>,
    theta: f64,
    tilde_selector: Vec<usize>,
}

impl GeneralAustereInput {
    pub fn new(a_nu: DMatrix<f64>, theta: f64, tilde_selector: Vec<usize>) -> Result<Self, ShapeError> {
        let sym = RealSymMatrix::new(a_nu).map_err(|e| ShapeError::DimensionMismatch(e.to_string()))?;
        let k = sym.n();
        if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&theta) {
            return Err(ShapeError::Invalid(format!("theta {theta} outside [0, pi/2]")));
        }
        let mut sel = tilde_selector.clone();
        sel.sort_unstable();
        sel.dedup();
        if sel.len() != tilde_selector.len() || sel.iter().any(|&i| i >= k) || sel.len() >= k {
            return Err(ShapeError::Invalid(
                "tilde_selector must be a proper subset of distinct row indices".into(),
            ));
        }
        Ok(Self {
            a_nu: sym.into_matrix(),
            theta,
            tilde_selector: sel,
        })
    }

    pub fn a_tilde(&self) -> DMatrix<f64> {
        let s = &self.tilde_selector;
        DMatrix::from_fn(s.len(), s.len(), |i, j| self.a_nu[(s[i], s[j])])
    }
}

/// e_{2j+1}(A_ν) = cos²θ·e_{2j−1}(Ã_ν) for j = 0..⌊k/2⌋.
pub fn check_general_austere(input: &GeneralAustereInput, tol: f64) -> bool {
    let k = input.a_nu.nrows();
    let at = input.a_tilde();
    let c2 = input.theta.cos().powi(2);
    let scale = norm_scale(&input.a_nu);
    (0..=k / 2).all(|j| {
        let d = 2 * j as i64 + 1;
        let r = elem_sym(&input.a_nu, d) - c2 * elem_sym(&at, d - 2);
        r.abs() / scale.powi(d as i32) < tol
    })
}

/// Residuals e_{2j+1}(A) − e_{2j−1}(Ã), j = 0..n, each divided by ‖A‖^{2j+1}
/// (floored at 1).
pub fn hypersurface_residuals(rep: &ShapeOperatorRep) -> Vec<f64> {
    let a = rep.matrix();
    let at = rep.a_tilde();
    let scale = norm_scale(a);
    (0..=rep.n())
        .map(|j| {
            let d = 2 * j as i64 + 1;
            (elem_sym(a, d) - elem_sym(&at, d - 2)) / scale.powi(d as i32)
        })
        .collect()
}

pub fn check_hypersurface_austere(rep: &ShapeOperatorRep, tol: f64) -> bool {
    hypersurface_residuals(rep).iter().all(|r| r.abs() < tol)
}

/// ‖J_ℋᵀ Ã J_ℋ + Ã‖ relative to ‖A‖: how far Ã is from anticommuting with J.
pub fn complex_compatibility_defect(rep: &ShapeOperatorRep) -> f64 {
    let at = rep.a_tilde();
    let j = rep.j_h();
    (j.transpose() * &at * &j + &at).norm() / norm_scale(rep.matrix())
}

pub fn check_stark(rep: &ShapeOperatorRep, tol: f64) -> bool {
    check_hypersurface_austere(rep, tol) && complex_compatibility_defect(rep) < tol
}

/// Bordered matrix Â of side 2n+2: a new first basis vector coupled to W
/// with weight 1, and A = [[Ã, v], [vᵀ, α]] in the remaining block.
pub fn hopf_lift(rep: &ShapeOperatorRep) -> DMatrix<f64> {
    let side = rep.side();
    let mut lifted = DMatrix::zeros(side + 1, side + 1);
    lifted.view_mut((1, 1), (side, side)).copy_from(rep.matrix());
    lifted[(0, side)] = 1.0;
    lifted[(side, 0)] = 1.0;
    lifted
}

/// Compares every coefficient of charpoly(Â) with the expansion in terms of
/// A and Ã: e_k(Â) = e_k(A) − e_{k−2}(Ã).
pub fn lift_charpoly_identity_check(rep: &ShapeOperatorRep, tol: f64) -> bool {
    let lifted = hopf_lift(rep);
    let a = rep.matrix();
    let at = rep.a_tilde();
    let scale = norm_scale(a);
    (1..=lifted.nrows() as i64).all(|k| {
        let want = elem_sym(a, k) - elem_sym(&at, k - 2);
        (elem_sym(&lifted, k) - want).abs() / scale.powi(k as i32) < tol
    })
}

/// Odd elementary symmetric functions of Â, scaled like the residuals above.
pub fn lift_odd_functions(rep: &ShapeOperatorRep) -> Vec<f64> {
    let lifted = hopf_lift(rep);
    let scale = norm_scale(&lifted);
    (1..=lifted.nrows() as i64)
        .step_by(2)
        .map(|k| elem_sym(&lifted, k) / scale.powi(k as i32))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub is_hopf: bool,
    pub hopf_violation: f64,
    pub reducible: bool,
    pub invariant_block_dims: (usize, usize),
    /// AW = 0: no such hypersurface exists, but the matrix is still classified.
    pub degenerate: bool,
}

/// Hopf test on W plus the reducibility split from the canonical reduction.
pub fn classify(rep: &ShapeOperatorRep, tol: f64) -> Result<Classification, ShapeError> {
    if !check_stark(rep, tol) {
        return Err(ShapeError::NotStark);
    }
    let aw = rep.a_w();
    let last = rep.side() - 1;
    let mut off = aw.clone();
    off[last] = 0.0;
    let hopf_violation = off.norm();
    let scale = norm_scale(rep.matrix());
    let canon = canonform::reduce_to_canonical(rep, tol)?;
    Ok(Classification {
        is_hopf: hopf_violation < tol * scale,
        hopf_violation,
        reducible: canon.kind == canonform::Kind::Reducible,
        invariant_block_dims: canon.dims,
        degenerate: canon.degenerate,
    })
}
