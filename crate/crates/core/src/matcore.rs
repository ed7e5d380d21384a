//! Small dense matrix kernels.
//!
//! Everything here works on matrices of side at most ten or so: characteristic
//! polynomials by trace recursion, elementary symmetric functions of
//! eigenvalues, a trigonometric solver for depressed cubics with three real
//! roots, and the exponential of a 3×3 skew-Hermitian matrix.

use nalgebra::{Complex, DMatrix, Matrix3, Vector3, SVD};
use thiserror::Error;

use crate::DEFAULT_TOL;

pub type C64 = Complex<f64>;

/// 3×3 complex matrix used for unitary frames and their Maurer–Cartan forms.
pub type ComplexMatrix3 = Matrix3<C64>;

/// Relative gap below which the spectral exponential hands over to
/// scaling-and-squaring.
const ROOT_CLUSTER_GAP: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MatError {
    #[error("cubic has no three real roots (discriminant {0:e})")]
    DiscriminantNegative(f64),
    #[error("matrix is not skew-Hermitian (defect {0:e})")]
    NotSkewHermitian(f64),
    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
}

/// Real symmetric matrix. Construction symmetrizes its input and remembers how
/// far from symmetric it was.
#[derive(Debug, Clone, PartialEq)]
pub struct RealSymMatrix {
    entries: DMatrix<f64>,
    asymmetry: f64,
}

impl RealSymMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self, MatError> {
        if !m.is_square() {
            return Err(MatError::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        let asymmetry = (&m - m.transpose()).amax();
        let entries = (&m + m.transpose()) * 0.5;
        Ok(Self { entries, asymmetry })
    }

    pub fn from_row_slice(n: usize, data: &[f64]) -> Result<Self, MatError> {
        Self::new(DMatrix::from_row_slice(n, n, data))
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let entries = DMatrix::from_fn(n, n, |i, j| if i == j { diag[i] } else { 0.0 });
        Self {
            entries,
            asymmetry: 0.0,
        }
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.entries
    }

    /// Largest |m_ij − m_ji| of the matrix this was built from.
    pub fn asymmetry(&self) -> f64 {
        self.asymmetry
    }

    pub fn elem_sym(&self, k: i64) -> f64 {
        elem_sym(&self.entries, k)
    }

    pub fn charpoly(&self) -> Vec<f64> {
        charpoly_coeffs(&self.entries)
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        sorted_eigenvalues(&self.entries)
    }
}

/// Coefficients of det(λI − M), highest power first (so the first entry is 1).
///
/// Faddeev–LeVerrier: M₁ = I, c_k = −tr(M·M_k)/k, M_{k+1} = M·M_k + c_k·I.
pub fn charpoly_coeffs(m: &DMatrix<f64>) -> Vec<f64> {
    assert!(m.is_square(), "charpoly_coeffs needs a square matrix");
    let n = m.nrows();
    let mut coeffs = Vec::with_capacity(n + 1);
    coeffs.push(1.0);
    let identity = DMatrix::<f64>::identity(n, n);
    let mut mk = identity.clone();
    for k in 1..=n {
        let amk = m * &mk;
        let ck = -amk.trace() / k as f64;
        coeffs.push(ck);
        mk = amk + &identity * ck;
    }
    coeffs
}

/// k-th elementary symmetric function of the eigenvalues of `m`; 1 for k = 0
/// and 0 outside 0..=n.
pub fn elem_sym(m: &DMatrix<f64>, k: i64) -> f64 {
    let n = m.nrows() as i64;
    if k < 0 || k > n {
        return 0.0;
    }
    if k == 0 {
        return 1.0;
    }
    let c = charpoly_coeffs(m);
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    sign * c[k as usize]
}

/// Eigenvalues of a symmetric matrix, ascending.
pub fn sorted_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Roots of ν³ + pν + q, ascending, when all three are real.
pub fn real_cubic_roots(p: f64, q: f64) -> Result<[f64; 3], MatError> {
    let disc = -4.0 * p * p * p - 27.0 * q * q;
    let scale = (4.0 * p.abs().powi(3)).max(27.0 * q * q);
    if scale > 0.0 && disc < -DEFAULT_TOL * scale {
        return Err(MatError::DiscriminantNegative(disc));
    }
    Ok(real_cubic_roots_unchecked(p, q))
}

/// Viète's trigonometric solution, clamped so slightly negative discriminants
/// from rounding still yield three real roots. Each root gets one guarded
/// Newton polish. Callers must know the roots are real.
pub fn real_cubic_roots_unchecked(p: f64, q: f64) -> [f64; 3] {
    let mut roots = if p >= -f64::MIN_POSITIVE.sqrt() * (1.0 + q.abs()) {
        let r = (-q).cbrt();
        [r, r, r]
    } else {
        let m = 2.0 * (-p / 3.0).sqrt();
        let c = ((3.0 * q) / (2.0 * p) * (-3.0 / p).sqrt()).clamp(-1.0, 1.0);
        let phi = c.acos() / 3.0;
        let third = 2.0 * std::f64::consts::PI / 3.0;
        [
            m * phi.cos(),
            m * (phi - third).cos(),
            m * (phi - 2.0 * third).cos(),
        ]
    };
    let f = |x: f64| (x * x + p) * x + q;
    for r in roots.iter_mut() {
        let fp = 3.0 * *r * *r + p;
        if fp != 0.0 {
            let candidate = *r - f(*r) / fp;
            if f(candidate).abs() < f(*r).abs() {
                *r = candidate;
            }
        }
    }
    roots.sort_by(f64::total_cmp);
    roots
}

pub fn skew_hermitian_defect(k: &ComplexMatrix3) -> f64 {
    (k + k.adjoint()).norm()
}

pub fn is_skew_hermitian(k: &ComplexMatrix3, tol: f64) -> bool {
    skew_hermitian_defect(k) < tol
}

/// ‖U†U − I‖ (Frobenius).
pub fn unitarity_defect(u: &ComplexMatrix3) -> f64 {
    (u.adjoint() * u - ComplexMatrix3::identity()).norm()
}

pub fn is_unitary(u: &ComplexMatrix3, tol: f64) -> bool {
    unitarity_defect(u) < tol
}

/// Nearest unitary matrix (unitary polar factor).
pub fn polar_unitary(m: &ComplexMatrix3) -> ComplexMatrix3 {
    let svd = SVD::new(*m, true, true);
    let u = svd.u.expect("left singular vectors requested");
    let v_t = svd.v_t.expect("right singular vectors requested");
    u * v_t
}

fn cross(a: &Vector3<C64>, b: &Vector3<C64>) -> Vector3<C64> {
    Vector3::new(
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    )
}

/// Unit null vector of a rank-two Hermitian 3×3 matrix.
fn null_vector(m: &ComplexMatrix3) -> Vector3<C64> {
    let rows: Vec<Vector3<C64>> = (0..3).map(|i| m.row(i).transpose()).collect();
    let best = [(0, 1), (0, 2), (1, 2)]
        .iter()
        .map(|&(a, b)| cross(&rows[a], &rows[b]))
        .max_by(|x, y| x.norm().total_cmp(&y.norm()))
        .expect("three candidate pairs");
    best / C64::from(best.norm())
}

/// exp(sK) for skew-Hermitian K.
///
/// The traceless Hermitian part H₀ = −i(K − tr(K)/3) has a real depressed
/// cubic as characteristic polynomial; with well-separated roots the
/// exponential is assembled from its eigenvectors, otherwise by
/// scaling-and-squaring.
pub fn skew_hermitian_exp(k: &ComplexMatrix3, s: f64) -> Result<ComplexMatrix3, MatError> {
    let defect = skew_hermitian_defect(k);
    if defect > DEFAULT_TOL * (1.0 + k.norm()) {
        return Err(MatError::NotSkewHermitian(defect));
    }
    let minus_i = C64::new(0.0, -1.0);
    let h = k.map(|z| z * minus_i);
    let h = (h + h.adjoint()) * C64::from(0.5);
    let tau = h.trace().re / 3.0;
    let h0 = h - ComplexMatrix3::identity() * C64::from(tau);

    let p = -0.5 * (h0 * h0).trace().re;
    let q = -h0.determinant().re;
    let nu = real_cubic_roots_unchecked(p, q);
    let gap = (nu[1] - nu[0]).min(nu[2] - nu[1]);
    let spread = h0.norm().max(1.0);

    let phase = C64::from_polar(1.0, s * tau);
    if gap >= ROOT_CLUSTER_GAP * spread {
        Ok(spectral_exp(&h0, &nu, s) * phase)
    } else {
        let k0 = h0.map(|z| z * C64::new(0.0, 1.0));
        Ok(scaling_squaring_exp(&(k0 * C64::from(s))) * phase)
    }
}

fn spectral_exp(h0: &ComplexMatrix3, nu: &[f64; 3], s: f64) -> ComplexMatrix3 {
    let mut vecs: Vec<Vector3<C64>> = Vec::with_capacity(3);
    for &root in nu {
        let m = h0 - ComplexMatrix3::identity() * C64::from(root);
        let mut x = null_vector(&m);
        for _ in 0..2 {
            for v in &vecs {
                let c = v.dotc(&x);
                x -= v * c;
            }
        }
        vecs.push(x / C64::from(x.norm()));
    }
    let v = ComplexMatrix3::from_columns(&vecs);
    let d = ComplexMatrix3::from_diagonal(&Vector3::new(
        C64::from_polar(1.0, s * nu[0]),
        C64::from_polar(1.0, s * nu[1]),
        C64::from_polar(1.0, s * nu[2]),
    ));
    v * d * v.adjoint()
}

/// Taylor series on a scaled copy, squared back up, followed by one
/// Newton–Schulz step towards the unitary group.
fn scaling_squaring_exp(a: &ComplexMatrix3) -> ComplexMatrix3 {
    let norm = a.norm();
    let mut squarings = 0u32;
    if norm > 0.5 {
        squarings = (norm / 0.5).log2().ceil() as u32;
    }
    let scaled = a * C64::from(0.5f64.powi(squarings as i32));
    let mut term = ComplexMatrix3::identity();
    let mut sum = ComplexMatrix3::identity();
    for j in 1..=18 {
        term = term * scaled * C64::from(1.0 / j as f64);
        sum += term;
    }
    for _ in 0..squarings {
        sum = sum * sum;
    }
    let identity = ComplexMatrix3::identity();
    sum * (identity * C64::from(3.0) - sum.adjoint() * sum) * C64::from(0.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < tol)
    }

    #[test]
    fn charpoly_examples() {
        let d = RealSymMatrix::from_diagonal(&[1.0, 2.0, 3.0]);
        assert!(close(&d.charpoly(), &[1.0, -6.0, 11.0, -6.0], 1e-12));
        let z = DMatrix::<f64>::zeros(4, 4);
        assert_eq!(charpoly_coeffs(&z), vec![1.0, 0.0, 0.0, 0.0, 0.0]);
        let i2 = DMatrix::<f64>::identity(2, 2);
        assert!(close(&charpoly_coeffs(&i2), &[1.0, -2.0, 1.0], 1e-12));
    }

    #[test]
    fn elem_sym_examples() {
        let d = RealSymMatrix::from_diagonal(&[1.0, 2.0, 3.0]);
        assert!((d.elem_sym(2) - 11.0).abs() < 1e-12);
        assert_eq!(d.elem_sym(0), 1.0);
        assert_eq!(d.elem_sym(-1), 0.0);
        assert_eq!(d.elem_sym(4), 0.0);
        let a = 2.7;
        let bal = RealSymMatrix::from_diagonal(&[a, -a, 0.0]);
        assert!(bal.elem_sym(1).abs() < 1e-12);
        assert!(bal.elem_sym(3).abs() < 1e-12);
    }

    #[test]
    fn symmetrizes_on_construction() {
        let m = RealSymMatrix::from_row_slice(2, &[1.0, 2.0, 4.0, 1.0]).unwrap();
        assert_eq!(m.as_matrix()[(0, 1)], 3.0);
        assert_eq!(m.as_matrix()[(1, 0)], 3.0);
        assert_eq!(m.asymmetry(), 2.0);
        assert!(RealSymMatrix::new(DMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn cubic_examples() {
        assert!(close(&real_cubic_roots(-4.0, 0.0).unwrap(), &[-2.0, 0.0, 2.0], 1e-14));
        assert!(close(&real_cubic_roots(0.0, 0.0).unwrap(), &[0.0, 0.0, 0.0], 1e-14));
        assert!(close(&real_cubic_roots(-1.0, 0.0).unwrap(), &[-1.0, 0.0, 1.0], 1e-14));
        // (ν−1)²(ν+2) = ν³ − 3ν + 2: double root
        assert!(close(&real_cubic_roots(-3.0, 2.0).unwrap(), &[-2.0, 1.0, 1.0], 1e-7));
        assert!(matches!(
            real_cubic_roots(1.0, 1.0),
            Err(MatError::DiscriminantNegative(_))
        ));
    }

    #[test]
    fn exp_examples() {
        let z = ComplexMatrix3::zeros();
        assert!((skew_hermitian_exp(&z, 3.3).unwrap() - ComplexMatrix3::identity()).norm() < 1e-15);

        let k = ComplexMatrix3::from_diagonal(&Vector3::new(c(0.0, 1.0), c(0.0, -1.0), c(0.0, 0.0)));
        let u = skew_hermitian_exp(&k, PI).unwrap();
        let want = ComplexMatrix3::from_diagonal(&Vector3::new(c(-1.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0)));
        assert!((u - want).norm() < 1e-12);

        // helix generator with β=3, μ=κ=0: [[0,-1,0],[1,0,0],[0,0,3i]]; exp(πK) = −I
        let mut kh = ComplexMatrix3::zeros();
        kh[(0, 1)] = c(-1.0, 0.0);
        kh[(1, 0)] = c(1.0, 0.0);
        kh[(2, 2)] = c(0.0, 3.0);
        let u = skew_hermitian_exp(&kh, PI).unwrap();
        assert!((u + ComplexMatrix3::identity()).norm() < 1e-12);
    }

    #[test]
    fn exp_rejects_non_skew() {
        let m = ComplexMatrix3::identity();
        assert!(matches!(
            skew_hermitian_exp(&m, 1.0),
            Err(MatError::NotSkewHermitian(_))
        ));
    }

    #[test]
    fn clustered_spectrum_uses_fallback_accurately() {
        // K = i·diag(1, 1+1e-9, -2-1e-9) rotated by a fixed unitary
        let d = ComplexMatrix3::from_diagonal(&Vector3::new(
            c(0.0, 1.0),
            c(0.0, 1.0 + 1e-9),
            c(0.0, -2.0 - 1e-9),
        ));
        let q = polar_unitary(&ComplexMatrix3::new(
            c(1.0, 0.2), c(0.3, -0.1), c(0.0, 0.5),
            c(-0.4, 0.0), c(1.0, 0.1), c(0.2, 0.2),
            c(0.1, -0.3), c(0.0, 0.4), c(1.0, 0.0),
        ));
        let k = q * d * q.adjoint();
        let s = 2.5;
        let exact = q
            * ComplexMatrix3::from_diagonal(&Vector3::new(
                C64::from_polar(1.0, s),
                C64::from_polar(1.0, s * (1.0 + 1e-9)),
                C64::from_polar(1.0, -s * (2.0 + 1e-9)),
            ))
            * q.adjoint();
        let u = skew_hermitian_exp(&k, s).unwrap();
        assert!((u - exact).norm() < 1e-12);
        assert!(unitarity_defect(&u) < 1e-13);
    }

    // cofactor expansion, independent of the trace recursion
    fn det_cofactor(m: &DMatrix<f64>) -> f64 {
        let n = m.nrows();
        if n == 1 {
            return m[(0, 0)];
        }
        (0..n)
            .map(|j| {
                let minor = m.clone().remove_row(0).remove_column(j);
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                sign * m[(0, j)] * det_cofactor(&minor)
            })
            .sum()
    }

    fn sym_matrix(n: usize) -> impl Strategy<Value = DMatrix<f64>> {
        proptest::collection::vec(-3.0f64..3.0, n * n).prop_map(move |v| {
            let m = DMatrix::from_row_slice(n, n, &v);
            (&m + m.transpose()) * 0.5
        })
    }

    fn skew_hermitian() -> impl Strategy<Value = ComplexMatrix3> {
        proptest::collection::vec(-3.0f64..3.0, 18).prop_map(|v| {
            let m = ComplexMatrix3::from_fn(|i, j| c(v[3 * i + j], v[9 + 3 * i + j]));
            (m - m.adjoint()) * c(0.5, 0.0)
        })
    }

    proptest! {
        #[test]
        fn first_and_last_symmetric_functions(n in 1usize..=4, m in sym_matrix(4)) {
            let m = m.view((0, 0), (n, n)).into_owned();
            prop_assert!((elem_sym(&m, 1) - m.trace()).abs() < 1e-10);
            prop_assert!((elem_sym(&m, n as i64) - det_cofactor(&m)).abs() < 1e-9);
        }

        #[test]
        fn charpoly_vanishes_on_spectrum(m in sym_matrix(4)) {
            let c = charpoly_coeffs(&m);
            for lam in sorted_eigenvalues(&m) {
                let val = c.iter().fold(0.0, |acc, &ci| acc * lam + ci);
                prop_assert!(val.abs() < 1e-10, "p({lam}) = {val}");
            }
        }

        #[test]
        fn exp_one_parameter_group(k in skew_hermitian(), s in -3.0f64..3.0, t in -3.0f64..3.0) {
            let lhs = skew_hermitian_exp(&k, s).unwrap() * skew_hermitian_exp(&k, t).unwrap();
            let rhs = skew_hermitian_exp(&k, s + t).unwrap();
            prop_assert!((lhs - rhs).norm() < 1e-10);
        }

        #[test]
        fn exp_is_unitary(k in skew_hermitian(), s in -10.0f64..10.0) {
            let u = skew_hermitian_exp(&k, s).unwrap();
            prop_assert!(unitarity_defect(&u) < 1e-12 * (1.0 + s.abs() * k.norm()));
        }

        #[test]
        fn cubic_roots_of_traceless_hermitian_sum_to_zero(k in skew_hermitian()) {
            let h = k.map(|z| z * c(0.0, -1.0));
            let h0 = h - ComplexMatrix3::identity() * C64::from(h.trace().re / 3.0);
            let p = -0.5 * (h0 * h0).trace().re;
            let q = -h0.determinant().re;
            let r = real_cubic_roots(p, q).unwrap();
            prop_assert!((r[0] + r[1] + r[2]).abs() < 1e-12);
        }
    }
}
