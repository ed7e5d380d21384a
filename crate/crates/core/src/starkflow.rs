//! The reduced system in the (x, y) coordinates.
//!
//! The frame scalars (β, μ, κ) are traded for (t, u, v) = (κ/β, (μ/β)^{2/3},
//! β^{2/3}). Along y the quantities C and D are conserved; along x they obey a
//! closed planar system, and v follows from C. So the whole field on a
//! rectangle comes from one x-line of (C, D, v) followed by y-sweeps.

use log::trace;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// y-steps are refused once u drops below this.
pub const U_FLOOR: f64 = 1e-6;

/// |B| below which the ratio A³/B² is left out of drift statistics.
pub const RATIO_B_FLOOR: f64 = 1e-3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowError {
    #[error("beta must be nonzero")]
    BetaZero,
    #[error("({beta}, {mu}) is outside the patch beta > 0, mu >= 0")]
    OutsideCanonicalPatch { beta: f64, mu: f64 },
    #[error("outside the valid region at (x, y) = ({x}, {y}): {reason}; last valid point ({last_x}, {last_y})")]
    OutsideValidRegion {
        x: f64,
        y: f64,
        last_x: f64,
        last_y: f64,
        reason: String,
    },
    #[error("u = 0: the y-direction is singular")]
    UDegenerate,
    #[error("B = 0: ratio undefined (A^3 = {a_cubed}, B = {b})")]
    BZero { a_cubed: f64, b: f64 },
    #[error("step {step} too small for the requested range")]
    StepUnderflow { step: f64 },
    #[error("invalid flow configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameScalars {
    pub beta: f64,
    pub mu: f64,
    pub kappa: f64,
}

impl FrameScalars {
    pub fn new(beta: f64, mu: f64, kappa: f64) -> Result<Self, FlowError> {
        if beta == 0.0 {
            return Err(FlowError::BetaZero);
        }
        Ok(Self { beta, mu, kappa })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedState {
    pub t: f64,
    pub u: f64,
    pub v: f64,
}

impl ReducedState {
    pub fn new(t: f64, u: f64, v: f64) -> Self {
        Self { t, u, v }
    }

    fn to_array(self) -> [f64; 3] {
        [self.t, self.u, self.v]
    }

    fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FirstIntegrals {
    pub c: f64,
    pub d: f64,
}

/// Fixed point of the (C, D) system: C² + D = 0 and CD + 1 = 0.
pub const EQUILIBRIUM_SEED: FirstIntegrals = FirstIntegrals { c: 1.0, d: -1.0 };

/// Coefficients of the helix cubic λ³ + Aλ + iB.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HelixCubic {
    pub a_lin: f64,
    pub b_const: f64,
}

pub fn to_reduced(fs: FrameScalars) -> Result<ReducedState, FlowError> {
    if fs.beta <= 0.0 || fs.mu < 0.0 {
        return Err(FlowError::OutsideCanonicalPatch {
            beta: fs.beta,
            mu: fs.mu,
        });
    }
    Ok(ReducedState {
        t: fs.kappa / fs.beta,
        u: (fs.mu / fs.beta).powf(2.0 / 3.0),
        v: fs.beta.powf(2.0 / 3.0),
    })
}

pub fn from_reduced(rs: ReducedState) -> FrameScalars {
    let b = rs.v.powf(1.5);
    FrameScalars {
        beta: b,
        mu: (rs.u * rs.v).powf(1.5),
        kappa: rs.t * b,
    }
}

pub fn first_integrals(rs: ReducedState) -> FirstIntegrals {
    let ReducedState { t, u, v } = rs;
    FirstIntegrals {
        c: ((t - u * u * u) * v * v - 1.0 / v) / 3.0,
        d: v * (t + 1.0) / 3.0,
    }
}

/// Inverse of [`first_integrals`] at fixed v.
pub fn recover_state(fi: FirstIntegrals, v: f64) -> Result<ReducedState, FlowError> {
    if !(v > 0.0) {
        return Err(region_error(f64::NAN, f64::NAN, format!("v = {v} is not positive")));
    }
    let t = 3.0 * fi.d / v - 1.0;
    let shift = (3.0 * fi.c * v + 1.0) / (v * v * v);
    let u3 = t - shift;
    if u3 < 0.0 {
        // rounding noise right at the u = 0 locus
        if u3 > -1e-14 * (t.abs() + shift.abs()).max(1.0) {
            return Ok(ReducedState { t, u: 0.0, v });
        }
        return Err(region_error(f64::NAN, f64::NAN, format!("u^3 = {u3:e} < 0")));
    }
    Ok(ReducedState { t, u: u3.cbrt(), v })
}

fn region_error(x: f64, y: f64, reason: String) -> FlowError {
    FlowError::OutsideValidRegion {
        x,
        y,
        last_x: f64::NAN,
        last_y: f64::NAN,
        reason,
    }
}

/// (dC/dx, dD/dx).
pub fn cd_rhs(fi: FirstIntegrals) -> (f64, f64) {
    (4.0 * (fi.c * fi.c + fi.d), 2.0 * (fi.c * fi.d + 1.0))
}

pub fn tuv_rhs_x(rs: ReducedState) -> [f64; 3] {
    let ReducedState { t, u, v } = rs;
    [
        2.0 * (2.0 - t) / v,
        -2.0 * u / v,
        2.0 / 3.0 * (v * v * v * (t - u * u * u) + 2.0),
    ]
}

pub fn tuv_rhs_y(rs: ReducedState) -> Result<[f64; 3], FlowError> {
    let ReducedState { t, u, v } = rs;
    if u == 0.0 {
        return Err(FlowError::UDegenerate);
    }
    Ok([
        -2.0 * u * (t + 1.0),
        2.0 / (3.0 * u) * (t + 1.0 / (v * v * v) - 2.0 * u * u * u - 1.0),
        2.0 * u * v,
    ])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TuvRhs {
    pub x_dir: [f64; 3],
    pub y_dir: [f64; 3],
}

pub fn tuv_rhs(rs: ReducedState) -> Result<TuvRhs, FlowError> {
    Ok(TuvRhs {
        x_dir: tuv_rhs_x(rs),
        y_dir: tuv_rhs_y(rs)?,
    })
}

/// dv/dx along the x-line, where v³(t − u³) = 3Cv + 1.
pub fn v_rhs_x(c: f64, v: f64) -> f64 {
    2.0 * (c * v + 1.0)
}

pub fn cubic_coeffs(fs: FrameScalars) -> HelixCubic {
    let FrameScalars { beta: b, mu: m, kappa: k } = fs;
    HelixCubic {
        a_lin: m * m + (b * b - b * k + k * k) / 3.0 + 1.0,
        b_const: (2.0 * b * b * b - 3.0 * b * b * k - 3.0 * b * k * k + 2.0 * k * k * k) / 27.0
            + (m * m * (b + k) + k - 2.0 * b) / 3.0,
    }
}

/// A³/B², constant on a connected stark hypersurface.
pub fn invariant_ratio(fs: FrameScalars) -> Result<f64, FlowError> {
    let HelixCubic { a_lin, b_const } = cubic_coeffs(fs);
    let a_cubed = a_lin.powi(3);
    if b_const.abs() <= 1e-14 * a_cubed.sqrt().max(1.0) {
        return Err(FlowError::BZero { a_cubed, b: b_const });
    }
    Ok(a_cubed / (b_const * b_const))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CdIdentities {
    pub a_from_cd: f64,
    pub b_from_cd: f64,
}

/// A = 3v(D² − C) and B = v^{3/2}(2D³ − 3CD − 1).
pub fn derived_cd_identities(rs: ReducedState) -> CdIdentities {
    let FirstIntegrals { c, d } = first_integrals(rs);
    CdIdentities {
        a_from_cd: 3.0 * rs.v * (d * d - c),
        b_from_cd: rs.v.powf(1.5) * (2.0 * d * d * d - 3.0 * c * d - 1.0),
    }
}

/// One classical Runge–Kutta step.
pub fn rk4_step<const N: usize, F>(f: F, y: [f64; N], h: f64) -> [f64; N]
where
    F: Fn(&[f64; N]) -> [f64; N],
{
    let add = |a: &[f64; N], b: &[f64; N], s: f64| -> [f64; N] {
        let mut out = *a;
        for i in 0..N {
            out[i] += s * b[i];
        }
        out
    };
    let k1 = f(&y);
    let k2 = f(&add(&y, &k1, h / 2.0));
    let k3 = f(&add(&y, &k2, h / 2.0));
    let k4 = f(&add(&y, &k3, h));
    let mut out = y;
    for i in 0..N {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

/// Number of uniform steps covering `range` with spacing at most `step`.
pub fn step_count(range: f64, step: f64) -> Result<usize, FlowError> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(FlowError::InvalidConfig(format!("step must be positive, got {step}")));
    }
    if !(range >= 0.0) || !range.is_finite() {
        return Err(FlowError::InvalidConfig(format!("empty or invalid range {range}")));
    }
    let steps = (range / step - 1e-9).ceil().max(0.0);
    if steps > 1e8 || (steps > 0.0 && range / steps < f64::EPSILON * range.abs().max(1.0) * 16.0) {
        return Err(FlowError::StepUnderflow { step });
    }
    Ok(steps as usize)
}

fn grid(min: f64, max: f64, steps: usize) -> Vec<f64> {
    if steps == 0 {
        return vec![min];
    }
    let h = (max - min) / steps as f64;
    (0..=steps).map(|i| min + h * i as f64).collect()
}

/// Sample of the x-line: (x, C, D, v).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CdSample {
    pub x: f64,
    pub fi: FirstIntegrals,
    pub v: f64,
}

/// RK4 on (C, D, v) along x, without any state recovery.
pub fn integrate_cd_line(
    seed: FirstIntegrals,
    v0: f64,
    x_min: f64,
    x_max: f64,
    step: f64,
) -> Result<Vec<CdSample>, FlowError> {
    let n = step_count(x_max - x_min, step)?;
    let xs = grid(x_min, x_max, n);
    let h = if n == 0 { 0.0 } else { (x_max - x_min) / n as f64 };
    let f = |y: &[f64; 3]| {
        let (dc, dd) = cd_rhs(FirstIntegrals { c: y[0], d: y[1] });
        [dc, dd, v_rhs_x(y[0], y[2])]
    };
    let mut y = [seed.c, seed.d, v0];
    let mut out = Vec::with_capacity(xs.len());
    for (i, &x) in xs.iter().enumerate() {
        if i > 0 {
            y = rk4_step(f, y, h);
        }
        if !y.iter().all(|z| z.is_finite()) {
            return Err(FlowError::OutsideValidRegion {
                x,
                y: f64::NAN,
                last_x: xs[i.saturating_sub(1)],
                last_y: f64::NAN,
                reason: "x-line diverged".into(),
            });
        }
        trace!("x-line x={x} C={} D={} v={}", y[0], y[1], y[2]);
        out.push(CdSample {
            x,
            fi: FirstIntegrals { c: y[0], d: y[1] },
            v: y[2],
        });
    }
    Ok(out)
}

/// RK4 on (t, u, v) along x; used to cross-check the (C, D) system.
pub fn integrate_tuv_x(rs: ReducedState, length: f64, step: f64) -> Result<Vec<ReducedState>, FlowError> {
    let n = step_count(length, step)?;
    let h = if n == 0 { 0.0 } else { length / n as f64 };
    let f = |y: &[f64; 3]| tuv_rhs_x(ReducedState::from_array(*y));
    let mut y = rs.to_array();
    let mut out = vec![rs];
    for _ in 0..n {
        y = rk4_step(f, y, h);
        out.push(ReducedState::from_array(y));
    }
    Ok(out)
}

/// RK4 on (t, u, v) along y, refusing steps that start with u < U_FLOOR.
/// Returns the states at the grid points.
pub fn integrate_tuv_y(
    rs: ReducedState,
    x: f64,
    ys: &[f64],
) -> Result<Vec<ReducedState>, FlowError> {
    let mut y = rs.to_array();
    let mut out = Vec::with_capacity(ys.len());
    out.push(rs);
    for w in ys.windows(2) {
        let (y0, y1) = (w[0], w[1]);
        let fail = |reason: String| FlowError::OutsideValidRegion {
            x,
            y: y1,
            last_x: x,
            last_y: y0,
            reason,
        };
        if y[1] < U_FLOOR {
            return Err(fail(format!("u = {:e} below {U_FLOOR:e}", y[1])));
        }
        let f = |s: &[f64; 3]| {
            let st = ReducedState::from_array(*s);
            tuv_rhs_y(st).unwrap_or([f64::NAN; 3])
        };
        let next = rk4_step(f, y, y1 - y0);
        if !next.iter().all(|z| z.is_finite()) || next[1] < 0.0 || next[2] <= 0.0 {
            return Err(fail("y-step left the region u >= 0, v > 0".into()));
        }
        y = next;
        out.push(ReducedState::from_array(y));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowConfig {
    pub c0: f64,
    pub d0: f64,
    pub v0: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub step: f64,
}

/// Sampled field on the rectangle; the seed sits at (x_min, y_min).
#[derive(Debug, Clone, PartialEq)]
pub struct FlowField {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    /// x-line values of (C, D, v) at y = y_min.
    pub line: Vec<CdSample>,
    /// Row-major over (y, x): index iy·nx + ix.
    pub states: Vec<ReducedState>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlowDrift {
    /// max |(C, D)(node) − (C, D)(x-line)|.
    pub first_integral: f64,
    /// max relative change of A³/B² against the seed, over nodes with |B| above the floor.
    pub ratio: Option<f64>,
    pub seed_ratio: Option<f64>,
}

impl FlowField {
    pub fn nx(&self) -> usize {
        self.xs.len()
    }

    pub fn ny(&self) -> usize {
        self.ys.len()
    }

    pub fn state(&self, ix: usize, iy: usize) -> ReducedState {
        self.states[iy * self.nx() + ix]
    }

    pub fn frame_scalars(&self, ix: usize, iy: usize) -> FrameScalars {
        from_reduced(self.state(ix, iy))
    }

    pub fn drift(&self) -> FlowDrift {
        let mut fi_drift: f64 = 0.0;
        for iy in 0..self.ny() {
            for ix in 0..self.nx() {
                let fi = first_integrals(self.state(ix, iy));
                let line = self.line[ix].fi;
                fi_drift = fi_drift.max((fi.c - line.c).abs()).max((fi.d - line.d).abs());
            }
        }
        let seed_fs = self.frame_scalars(0, 0);
        let seed_ratio = if cubic_coeffs(seed_fs).b_const.abs() > RATIO_B_FLOOR {
            invariant_ratio(seed_fs).ok()
        } else {
            None
        };
        let ratio = seed_ratio.map(|r0| {
            self.states
                .iter()
                .map(|&s| from_reduced(s))
                .filter(|&fs| cubic_coeffs(fs).b_const.abs() > RATIO_B_FLOOR)
                .filter_map(|fs| invariant_ratio(fs).ok())
                .map(|r| ((r - r0) / r0).abs())
                .fold(0.0, f64::max)
        });
        FlowDrift {
            first_integral: fi_drift,
            ratio,
            seed_ratio,
        }
    }
}

/// x-line of (C, D, v) from the seed, state recovery along it, then a y-sweep
/// of (t, u, v) from every x-node.
pub fn integrate_flow(cfg: &FlowConfig) -> Result<FlowField, FlowError> {
    if !(cfg.v0 > 0.0) {
        return Err(FlowError::InvalidConfig(format!("v0 must be positive, got {}", cfg.v0)));
    }
    if cfg.x_max < cfg.x_min || cfg.y_max < cfg.y_min {
        return Err(FlowError::InvalidConfig("ranges need min <= max".into()));
    }
    let seed = FirstIntegrals { c: cfg.c0, d: cfg.d0 };
    let line = integrate_cd_line(seed, cfg.v0, cfg.x_min, cfg.x_max, cfg.step).map_err(|e| match e {
        FlowError::OutsideValidRegion { x, last_x, reason, .. } => FlowError::OutsideValidRegion {
            x,
            y: cfg.y_min,
            last_x,
            last_y: cfg.y_min,
            reason,
        },
        other => other,
    })?;
    let xs: Vec<f64> = line.iter().map(|s| s.x).collect();
    let ys = grid(cfg.y_min, cfg.y_max, step_count(cfg.y_max - cfg.y_min, cfg.step)?);

    let mut bottom = Vec::with_capacity(line.len());
    for (i, s) in line.iter().enumerate() {
        let last_x = if i == 0 { f64::NAN } else { line[i - 1].x };
        let last_y = if i == 0 { f64::NAN } else { cfg.y_min };
        let rs = recover_state(s.fi, s.v).map_err(|e| match e {
            FlowError::OutsideValidRegion { reason, .. } => FlowError::OutsideValidRegion {
                x: s.x,
                y: cfg.y_min,
                last_x,
                last_y,
                reason,
            },
            other => other,
        })?;
        bottom.push(rs);
    }

    let nx = xs.len();
    let mut states = vec![ReducedState::new(0.0, 0.0, 0.0); nx * ys.len()];
    for (ix, &rs) in bottom.iter().enumerate() {
        let column = integrate_tuv_y(rs, xs[ix], &ys)?;
        for (iy, st) in column.into_iter().enumerate() {
            states[iy * nx + ix] = st;
        }
    }
    Ok(FlowField {
        xs,
        ys,
        line,
        states,
    })
}

/// CSV with header x,y,t,u,v,beta,mu,kappa,C,D,ratio.
pub fn write_flow_csv<W: std::io::Write>(field: &FlowField, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x", "y", "t", "u", "v", "beta", "mu", "kappa", "C", "D", "ratio"])?;
    for iy in 0..field.ny() {
        for ix in 0..field.nx() {
            let rs = field.state(ix, iy);
            let fs = from_reduced(rs);
            let fi = first_integrals(rs);
            let ratio = invariant_ratio(fs).unwrap_or(f64::INFINITY);
            let row = [
                field.xs[ix], field.ys[iy], rs.t, rs.u, rs.v, fs.beta, fs.mu, fs.kappa, fi.c, fi.d, ratio,
            ];
            w.write_record(row.iter().map(|v| v.to_string()))?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() < tol
    }

    fn close3(a: [f64; 3], b: [f64; 3], tol: f64) -> bool {
        (0..3).all(|i| close(a[i], b[i], tol))
    }

    #[test]
    fn reduced_examples() {
        let r = to_reduced(FrameScalars::new(1.0, 1.0, 1.0).unwrap()).unwrap();
        assert_eq!(r, ReducedState::new(1.0, 1.0, 1.0));
        let r = to_reduced(FrameScalars::new(3.0, 0.0, 0.0).unwrap()).unwrap();
        assert!(close3(r.to_array(), [0.0, 0.0, 3f64.powf(2.0 / 3.0)], 1e-15));
        assert!(matches!(
            to_reduced(FrameScalars { beta: -1.0, mu: 1.0, kappa: 0.0 }),
            Err(FlowError::OutsideCanonicalPatch { .. })
        ));
        assert!(matches!(
            to_reduced(FrameScalars { beta: 1.0, mu: -1.0, kappa: 0.0 }),
            Err(FlowError::OutsideCanonicalPatch { .. })
        ));
        assert_eq!(FrameScalars::new(0.0, 1.0, 1.0), Err(FlowError::BetaZero));
    }

    #[test]
    fn first_integral_examples() {
        let fi = first_integrals(ReducedState::new(1.0, 1.0, 1.0));
        assert!(close(fi.c, -1.0 / 3.0, 1e-15) && close(fi.d, 2.0 / 3.0, 1e-15));
        let fi = first_integrals(ReducedState::new(0.0, 0.0, 3f64.powf(2.0 / 3.0)));
        assert!(close(fi.c, -(3f64.powf(-5.0 / 3.0)), 1e-15));
        assert!(close(fi.d, 3f64.powf(-1.0 / 3.0), 1e-15));
        assert_eq!(cd_rhs(EQUILIBRIUM_SEED), (0.0, 0.0));
    }

    #[test]
    fn recover_examples() {
        let r = recover_state(FirstIntegrals { c: -1.0 / 3.0, d: 2.0 / 3.0 }, 1.0).unwrap();
        assert!(close3(r.to_array(), [1.0, 1.0, 1.0], 1e-14));
        let v = 3f64.powf(2.0 / 3.0);
        let r = recover_state(
            FirstIntegrals { c: -(3f64.powf(-5.0 / 3.0)), d: 3f64.powf(-1.0 / 3.0) },
            v,
        )
        .unwrap();
        assert!(close3(r.to_array(), [0.0, 0.0, v], 1e-5));
        assert!(close(r.t, 0.0, 1e-14));
        assert!(matches!(
            recover_state(FirstIntegrals { c: 0.0, d: 10.0 }, 1e-3),
            Err(FlowError::OutsideValidRegion { .. })
        ));
        // the equilibrium never reaches real u
        for v in [0.1, 1.0, 10.0] {
            assert!(recover_state(EQUILIBRIUM_SEED, v).is_err());
        }
    }

    #[test]
    fn rhs_examples() {
        assert_eq!(cd_rhs(FirstIntegrals { c: 0.0, d: 0.0 }), (0.0, 2.0));
        let (dc, dd) = cd_rhs(FirstIntegrals { c: -1.0 / 3.0, d: 2.0 / 3.0 });
        assert!(close(dc, 28.0 / 9.0, 1e-14) && close(dd, 14.0 / 9.0, 1e-14));

        let r = tuv_rhs(ReducedState::new(1.0, 1.0, 1.0)).unwrap();
        assert!(close3(r.x_dir, [2.0, -2.0, 4.0 / 3.0], 1e-15));
        assert!(close3(r.y_dir, [-4.0, -2.0 / 3.0, 2.0], 1e-15));
        assert_eq!(tuv_rhs_x(ReducedState::new(2.0, 0.7, 1.3))[0], 0.0);
        assert_eq!(tuv_rhs(ReducedState::new(1.0, 0.0, 1.0)), Err(FlowError::UDegenerate));

        assert!(close(v_rhs_x(-1.0 / 3.0, 1.0), 4.0 / 3.0, 1e-15));
        assert_eq!(v_rhs_x(0.0, 5.0), 2.0);
        assert_eq!(v_rhs_x(-0.5, 2.0), 0.0);
    }

    /// dC/dx via the chain rule through tuv_rhs_x, in closed form.
    fn chain_rule_cd(rs: ReducedState) -> (f64, f64) {
        let ReducedState { t, u, v } = rs;
        let [dt, du, dv] = tuv_rhs_x(rs);
        let dc = ((dt - 3.0 * u * u * du) * v * v + (t - u * u * u) * 2.0 * v * dv + dv / (v * v)) / 3.0;
        let dd = (dv * (t + 1.0) + v * dt) / 3.0;
        (dc, dd)
    }

    #[test]
    fn chain_rule_example() {
        let (dc, dd) = chain_rule_cd(ReducedState::new(1.0, 1.0, 1.0));
        assert!(close(dc, 28.0 / 9.0, 1e-14) && close(dd, 14.0 / 9.0, 1e-14));
    }

    #[test]
    fn cubic_examples() {
        let h = cubic_coeffs(FrameScalars::new(1.0, 1.0, 1.0).unwrap());
        assert!(close(h.a_lin, 7.0 / 3.0, 1e-15) && close(h.b_const, 7.0 / 27.0, 1e-15));
        let h = cubic_coeffs(FrameScalars::new(3.0, 0.0, 0.0).unwrap());
        assert!(close(h.a_lin, 4.0, 1e-15) && close(h.b_const, 0.0, 1e-15));
        let h = cubic_coeffs(FrameScalars::new(1.0, 0.0, 0.0).unwrap());
        assert!(close(h.a_lin, 4.0 / 3.0, 1e-15) && close(h.b_const, -16.0 / 27.0, 1e-15));

        let r = invariant_ratio(FrameScalars::new(1.0, 1.0, 1.0).unwrap()).unwrap();
        assert!(close(r, 189.0, 1e-11));
        assert!(matches!(
            invariant_ratio(FrameScalars::new(3.0, 0.0, 0.0).unwrap()),
            Err(FlowError::BZero { .. })
        ));
    }

    #[test]
    fn cd_identity_examples() {
        let c = derived_cd_identities(ReducedState::new(1.0, 1.0, 1.0));
        assert!(close(c.a_from_cd, 7.0 / 3.0, 1e-15) && close(c.b_from_cd, 7.0 / 27.0, 1e-15));
        let c = derived_cd_identities(ReducedState::new(0.0, 0.0, 3f64.powf(2.0 / 3.0)));
        assert!(close(c.b_from_cd, 0.0, 1e-14));
        let c = derived_cd_identities(ReducedState::new(0.0, 0.0, 1.0));
        assert!(close(c.b_from_cd, -16.0 / 27.0, 1e-15));
        // the uncorrected denominator 2D² − 3CD − 1 gives 1029/25 at (1,1,1)
        let FirstIntegrals { c, d } = first_integrals(ReducedState::new(1.0, 1.0, 1.0));
        let displayed = 27.0 * (d * d - c).powi(3) / (2.0 * d * d - 3.0 * c * d - 1.0).powi(2);
        assert!(close(displayed, 1029.0 / 25.0, 1e-12));
    }

    #[test]
    fn equilibrium_line_is_constant() {
        let line = integrate_cd_line(EQUILIBRIUM_SEED, -1.0, 0.0, 1.0, 1e-3).unwrap();
        for s in &line {
            assert_eq!((s.fi.c, s.fi.d, s.v), (1.0, -1.0, -1.0));
        }
    }

    #[test]
    fn y_flow_preserves_first_integrals() {
        let cfg = FlowConfig {
            c0: -1.0 / 3.0,
            d0: 2.0 / 3.0,
            v0: 1.0,
            x_min: 0.0,
            x_max: 0.0,
            y_min: 0.0,
            y_max: 0.5,
            step: 1e-3,
        };
        let f = integrate_flow(&cfg).unwrap();
        assert_eq!(f.ny(), 501);
        let d = f.drift();
        assert!(d.first_integral < 1e-8, "{d:?}");
        assert!(close(d.seed_ratio.unwrap(), 189.0, 1e-9));
        assert!(d.ratio.unwrap() < 1e-7, "{d:?}");
    }

    #[test]
    fn flow_reports_region_exit() {
        // negative y direction runs into u = 0 near y = −0.35
        let cfg = FlowConfig {
            c0: -1.0 / 3.0,
            d0: 2.0 / 3.0,
            v0: 1.0,
            x_min: 0.0,
            x_max: 0.0,
            y_min: 0.0,
            y_max: 0.0,
            step: 1e-3,
        };
        assert!(integrate_flow(&cfg).is_ok());
        let rs = ReducedState::new(1.0, 1.0, 1.0);
        let ys: Vec<f64> = (0..=1000).map(|i| -(i as f64) * 1e-3).collect();
        match integrate_tuv_y(rs, 0.0, &ys) {
            Err(FlowError::OutsideValidRegion { y, last_y, .. }) => {
                assert!(y < -0.3 && y > -0.4, "{y}");
                assert!(last_y > y);
            }
            other => panic!("expected region exit, got {other:?}"),
        }
        let bad = FlowConfig { c0: 1.0, d0: -1.0, v0: 1.0, ..cfg };
        assert!(matches!(integrate_flow(&bad), Err(FlowError::OutsideValidRegion { .. })));
        let tiny = FlowConfig { step: 1e-300, x_max: 1.0, ..cfg };
        assert!(matches!(integrate_flow(&tiny), Err(FlowError::StepUnderflow { .. })));
    }

    #[test]
    fn fourth_order_on_x_line() {
        // error against a fine reference drops by ~16 when the step halves
        let seed = FirstIntegrals { c: -1.0 / 3.0, d: 2.0 / 3.0 };
        let reference = *integrate_cd_line(seed, 1.0, 0.0, 0.2, 1e-5).unwrap().last().unwrap();
        let err = |h: f64| {
            let s = *integrate_cd_line(seed, 1.0, 0.0, 0.2, h).unwrap().last().unwrap();
            (s.fi.c - reference.fi.c).abs() + (s.fi.d - reference.fi.d).abs() + (s.v - reference.v).abs()
        };
        let e1 = err(0.02);
        let e2 = err(0.01);
        assert!(e1 / e2 >= 8.0, "{e1} {e2}");
    }

    fn valid_state() -> impl Strategy<Value = ReducedState> {
        (-2.0f64..2.0, 0.1f64..2.0, 0.2f64..3.0).prop_map(|(t, u, v)| ReducedState::new(t, u, v))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn round_trip_reduced(b in 0.01f64..10.0, m in 0.0f64..10.0, k in -10.0f64..10.0) {
            let fs = FrameScalars::new(b, m, k).unwrap();
            let back = from_reduced(to_reduced(fs).unwrap());
            prop_assert!((back.beta - b).abs() < 1e-12 * b.max(1.0));
            prop_assert!((back.mu - m).abs() < 1e-12 * m.max(1.0));
            prop_assert!((back.kappa - k).abs() < 1e-12 * k.abs().max(1.0));
        }

        #[test]
        fn recover_inverts_first_integrals(rs in valid_state()) {
            let back = recover_state(first_integrals(rs), rs.v).unwrap();
            prop_assert!((back.t - rs.t).abs() < 1e-12);
            prop_assert!((back.u - rs.u).abs() < 1e-12);
            let fi = first_integrals(back);
            let fi0 = first_integrals(rs);
            prop_assert!((fi.c - fi0.c).abs() < 1e-12 && (fi.d - fi0.d).abs() < 1e-12);
        }

        #[test]
        fn chain_rule_matches_cd_rhs(rs in valid_state()) {
            let (dc, dd) = chain_rule_cd(rs);
            let (ec, ed) = cd_rhs(first_integrals(rs));
            prop_assert!((dc - ec).abs() < 1e-9 * (1.0 + ec.abs()));
            prop_assert!((dd - ed).abs() < 1e-9 * (1.0 + ed.abs()));
        }

        #[test]
        fn cd_identities_match(rs in valid_state()) {
            let want = cubic_coeffs(from_reduced(rs));
            let got = derived_cd_identities(rs);
            prop_assert!((got.a_from_cd - want.a_lin).abs() < 1e-10 * want.a_lin.abs().max(1.0));
            prop_assert!((got.b_from_cd - want.b_const).abs() < 1e-10 * want.b_const.abs().max(1.0));
        }

        #[test]
        fn y_direction_conserves_first_integrals(rs in valid_state()) {
            // directional derivative of C and D along y_dir vanishes
            let [dt, du, dv] = tuv_rhs_y(rs).unwrap();
            let ReducedState { t, u, v } = rs;
            let dc = ((dt - 3.0 * u * u * du) * v * v + (t - u * u * u) * 2.0 * v * dv + dv / (v * v)) / 3.0;
            let dd = (dv * (t + 1.0) + v * dt) / 3.0;
            prop_assert!(dc.abs() < 1e-9 * (1.0 + dt.abs() + du.abs() + dv.abs()));
            prop_assert!(dd.abs() < 1e-9 * (1.0 + dt.abs() + dv.abs()));
        }

        #[test]
        fn helix_coefficient_lower_bound(b in -10.0f64..10.0, m in -10.0f64..10.0, k in -10.0f64..10.0) {
            let h = cubic_coeffs(FrameScalars { beta: b, mu: m, kappa: k });
            prop_assert!(h.a_lin >= 1.0);
        }
    }
}
