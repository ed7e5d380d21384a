//! Helices through the leaf: dF/ds = F·K with K constant.
//!
//! A helix closes up (up to a scalar phase) exactly when the eigenvalues iν
//! of the traceless part K₀ have rational ratios. The minimal period is read
//! off from the integer frequencies.

use std::f64::consts::PI;

use nalgebra::Matrix3;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::matcore::{real_cubic_roots_unchecked, skew_hermitian_exp, ComplexMatrix3, C64};
use crate::starkflow::{cubic_coeffs, FrameScalars};
use crate::surface::SurfaceGrid;

pub const DEFAULT_MAX_DEN: u64 = 64;
pub const DEFAULT_RATIO_TOL: f64 = 1e-8;

/// K = [[0, −1, 0], [1, iκ, −μ], [0, μ, iβ]].
pub fn k_matrix(fs: FrameScalars) -> ComplexMatrix3 {
    let z = C64::new(0.0, 0.0);
    let r = |x: f64| C64::new(x, 0.0);
    let i = |x: f64| C64::new(0.0, x);
    Matrix3::new(
        z, r(-1.0), z,
        r(1.0), i(fs.kappa), r(-fs.mu),
        z, r(fs.mu), i(fs.beta),
    )
}

/// Traceless part K − tr(K)/3·I.
pub fn k0_matrix(fs: FrameScalars) -> ComplexMatrix3 {
    let k = k_matrix(fs);
    k - ComplexMatrix3::identity() * (k.trace() / C64::from(3.0))
}

/// Roots of ν³ − Aν − B, ascending; the eigenvalues of K₀ are iν.
pub fn spectrum(fs: FrameScalars) -> [f64; 3] {
    let h = cubic_coeffs(fs);
    real_cubic_roots_unchecked(-h.a_lin, -h.b_const)
}

/// Same as [`spectrum`] but from a Hermitian eigensolve of −iK₀.
pub fn spectrum_eigen(fs: FrameScalars) -> [f64; 3] {
    let h = k0_matrix(fs).map(|z| z * C64::new(0.0, -1.0));
    let h = (h + h.adjoint()) * C64::from(0.5);
    let ev = h.symmetric_eigenvalues();
    let mut nu = [ev[0], ev[1], ev[2]];
    nu.sort_by(f64::total_cmp);
    nu
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosureReport {
    pub nu: [f64; 3],
    pub closed: bool,
    #[serde(rename = "L")]
    pub length: Option<f64>,
    pub n1: Option<i64>,
    pub n2: Option<i64>,
    pub ratio_tol: f64,
    pub max_den: u64,
}

/// First continued-fraction convergent p/q of `x` with |x − p/q| < tol and
/// q ≤ max_den.
pub fn rational_approx(x: f64, max_den: u64, tol: f64) -> Option<(i64, u64)> {
    if !x.is_finite() {
        return None;
    }
    let (mut h0, mut h1): (i128, i128) = (0, 1);
    let (mut k0, mut k1): (i128, i128) = (1, 0);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        if a.abs() > 1e15 {
            return None;
        }
        let a = a as i128;
        let h2 = a * h1 + h0;
        let k2 = a * k1 + k0;
        if k2 > max_den as i128 {
            return None;
        }
        if (x - h2 as f64 / k2 as f64).abs() < tol {
            return Some((h2 as i64, k2 as u64));
        }
        let frac = r - r.floor();
        if frac == 0.0 {
            return None;
        }
        r = 1.0 / frac;
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
    }
    None
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Closure test on a sorted, trace-free triple.
pub fn closure(nu: [f64; 3], max_den: u64, tol: f64) -> ClosureReport {
    let mut report = ClosureReport {
        nu,
        closed: false,
        length: None,
        n1: None,
        n2: None,
        ratio_tol: tol,
        max_den,
    };
    let scale = nu.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        // K₀ = 0: the helix is a phase orbit, closed at every length
        report.closed = true;
        return report;
    }
    let nonzero = |x: f64| x.abs() > tol * scale;
    for i in 0..3 {
        for j in i + 1..3 {
            if nonzero(nu[i]) && nonzero(nu[j]) && rational_approx(nu[i] / nu[j], max_den, tol).is_none() {
                return report;
            }
        }
    }
    let Some((n1, q)) = rational_approx(nu[0] / nu[2], max_den, tol) else {
        return report;
    };
    let n2 = q as i64;
    let m = [n1, -n1 - n2, n2];
    let omega0 = nu[2] / n2 as f64;
    let g = gcd(m[1] - m[0], m[2] - m[1]);
    report.closed = true;
    report.length = Some(2.0 * PI / (omega0.abs() * g as f64));
    report.n1 = Some(n1);
    report.n2 = Some(n2);
    report
}

#[derive(Debug, Clone, PartialEq)]
pub struct HelixSpec {
    pub fs: FrameScalars,
    pub k: ComplexMatrix3,
    pub nu: [f64; 3],
    pub closure: ClosureReport,
}

pub fn helix_spec(fs: FrameScalars, max_den: u64, tol: f64) -> HelixSpec {
    let nu = spectrum(fs);
    HelixSpec {
        fs,
        k: k_matrix(fs),
        nu,
        closure: closure(nu, max_den, tol),
    }
}

/// F(s) = F₀·exp(sK) at each sample.
pub fn frenet_integrate(f0: &ComplexMatrix3, fs: FrameScalars, s_samples: &[f64]) -> Vec<ComplexMatrix3> {
    let k = k_matrix(fs);
    s_samples
        .iter()
        .map(|&s| f0 * skew_hermitian_exp(&k, s).expect("K is skew-Hermitian by construction"))
        .collect()
}

/// Six real vectors in ℝ⁶ = ℂ³: X, iX, E₁, iE₁, E₃, iE₃, each stored as (Re, Im).
type RealFrame = [[f64; 6]; 6];

fn to_real(v: nalgebra::Vector3<C64>) -> [f64; 6] {
    [v[0].re, v[1].re, v[2].re, v[0].im, v[1].im, v[2].im]
}

/// Integrates the real Frenet system by RK4, treating the i-multiplied
/// vectors as independent unknowns, and returns the complex frame at s_end.
pub fn frenet_real_rk4(f0: &ComplexMatrix3, fs: FrameScalars, s_end: f64, steps: usize) -> ComplexMatrix3 {
    let i = C64::new(0.0, 1.0);
    let init: RealFrame = [
        to_real(f0.column(0).into_owned()),
        to_real(f0.column(0) * i),
        to_real(f0.column(1).into_owned()),
        to_real(f0.column(1) * i),
        to_real(f0.column(2).into_owned()),
        to_real(f0.column(2) * i),
    ];
    let FrameScalars { beta, mu, kappa } = fs;
    let rhs = |y: &RealFrame| -> RealFrame {
        let [x, ix, e1, ie1, e3, ie3] = *y;
        let mut out = [[0.0; 6]; 6];
        for c in 0..6 {
            out[0][c] = e1[c];
            out[1][c] = ie1[c];
            out[2][c] = kappa * ie1[c] + mu * e3[c] - x[c];
            out[3][c] = -kappa * e1[c] + mu * ie3[c] - ix[c];
            out[4][c] = -mu * e1[c] + beta * ie3[c];
            out[5][c] = -mu * ie1[c] - beta * e3[c];
        }
        out
    };
    let h = s_end / steps as f64;
    let mut y = init;
    let comb = |a: &RealFrame, b: &RealFrame, s: f64| {
        let mut o = *a;
        for r in 0..6 {
            for c in 0..6 {
                o[r][c] += s * b[r][c];
            }
        }
        o
    };
    for _ in 0..steps {
        let k1 = rhs(&y);
        let k2 = rhs(&comb(&y, &k1, h / 2.0));
        let k3 = rhs(&comb(&y, &k2, h / 2.0));
        let k4 = rhs(&comb(&y, &k3, h));
        for r in 0..6 {
            for c in 0..6 {
                y[r][c] += h / 6.0 * (k1[r][c] + 2.0 * k2[r][c] + 2.0 * k3[r][c] + k4[r][c]);
            }
        }
    }
    let col = |v: &[f64; 6]| nalgebra::Vector3::new(C64::new(v[0], v[3]), C64::new(v[1], v[4]), C64::new(v[2], v[5]));
    ComplexMatrix3::from_columns(&[col(&y[0]), col(&y[2]), col(&y[4])])
}

/// min over θ of ‖b − e^{iθ}a‖.
pub fn phase_closure_defect(a: &ComplexMatrix3, b: &ComplexMatrix3) -> f64 {
    let t = (a.adjoint() * b).trace();
    let phase = if t.norm() > 0.0 { t / C64::from(t.norm()) } else { C64::new(1.0, 0.0) };
    (b - a * phase).norm()
}

/// Unit representative of a point of CP² whose largest-modulus coordinate is
/// real and positive (lowest index wins ties).
pub fn gauge_fix(z: [C64; 3]) -> [C64; 3] {
    let norm = z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let mut best = 0;
    for i in 1..3 {
        if z[i].norm() > z[best].norm() * (1.0 + 1e-12) {
            best = i;
        }
    }
    let lead = z[best];
    let phase = if lead.norm() > 0.0 { lead.conj() / C64::from(lead.norm()) } else { C64::new(1.0, 0.0) };
    let mut out = [C64::new(0.0, 0.0); 3];
    for i in 0..3 {
        out[i] = z[i] * phase / C64::from(norm);
    }
    out[best] = C64::new(out[best].norm(), 0.0);
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HelixPoint {
    pub x: f64,
    pub y: f64,
    pub s: f64,
    pub z: [C64; 3],
}

/// Points of the hypersurface: first column of F(x, y)·exp(sK(x, y)) for every
/// node and sample, node-major then s.
pub fn sweep(grid: &SurfaceGrid, s_samples: &[f64]) -> Vec<HelixPoint> {
    (0..grid.nx() * grid.ny())
        .into_par_iter()
        .flat_map_iter(|idx| {
            let (ix, iy) = (idx % grid.nx(), idx / grid.nx());
            let frames = frenet_integrate(&grid.frames[idx], grid.scalars[idx], s_samples);
            let (x, y) = (grid.xs[ix], grid.ys[iy]);
            frames.into_iter().zip(s_samples.iter()).map(move |(f, &s)| HelixPoint {
                x,
                y,
                s,
                z: gauge_fix([f[(0, 0)], f[(1, 0)], f[(2, 0)]]),
            })
        })
        .collect()
}

/// CSV: x,y,s,z0_re,z0_im,z1_re,z1_im,z2_re,z2_im.
pub fn write_points_csv<W: std::io::Write>(points: &[HelixPoint], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x", "y", "s", "z0_re", "z0_im", "z1_re", "z1_im", "z2_re", "z2_im"])?;
    for p in points {
        let row = [
            p.x, p.y, p.s, p.z[0].re, p.z[0].im, p.z[1].re, p.z[1].im, p.z[2].re, p.z[2].im,
        ];
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Frame scalars with prescribed β whose helix spectrum is `nu`, if any.
/// Uses A = −e₂(ν), B = ν₁ν₂ν₃ and solves for κ with μ ≥ 0.
pub fn frame_scalars_for_spectrum(nu: [f64; 3], beta: f64) -> Option<FrameScalars> {
    let a_star = -(nu[0] * nu[1] + nu[0] * nu[2] + nu[1] * nu[2]);
    let b_star = nu[0] * nu[1] * nu[2];
    // μ² = A* − 1 − (β² − βκ + κ²)/3 ≥ 0 bounds κ to an interval
    let c = 3.0 * (a_star - 1.0) - beta * beta;
    let disc = beta * beta + 4.0 * c;
    if disc < 0.0 {
        return None;
    }
    let (lo, hi) = ((beta - disc.sqrt()) / 2.0, (beta + disc.sqrt()) / 2.0);
    let mu2 = |k: f64| (a_star - 1.0 - (beta * beta - beta * k + k * k) / 3.0).max(0.0);
    let g = |k: f64| cubic_coeffs(FrameScalars { beta, mu: mu2(k).sqrt(), kappa: k }).b_const - b_star;
    let n = 4000;
    let mut prev = (lo, g(lo));
    for i in 1..=n {
        let k = lo + (hi - lo) * i as f64 / n as f64;
        let gk = g(k);
        if prev.1 == 0.0 || prev.1.signum() != gk.signum() {
            let (mut a, mut b) = (prev.0, k);
            let mut ga = prev.1;
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                let gm = g(m);
                if ga.signum() == gm.signum() && gm != 0.0 {
                    a = m;
                    ga = gm;
                } else {
                    b = m;
                }
            }
            let kappa = 0.5 * (a + b);
            return Some(FrameScalars { beta, mu: mu2(kappa).sqrt(), kappa });
        }
        prev = (k, gk);
    }
    None
}
