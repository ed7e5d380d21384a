//! Frames over the totally geodesic leaf Σ.
//!
//! On Σ only ω² and ω³ survive, and in the (x, y) coordinates they form an
//! explicit coframe. The unitary frame F = (X, E₁, E₃) obeys dF = F·Ω with Ω
//! linear in the coframe, so it can be transported edge by edge with exact
//! exponentials. Transporting along two different paths and comparing gives a
//! direct measure of integrability.

use nalgebra::{Matrix2, Vector2};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::matcore::{polar_unitary, skew_hermitian_exp, unitarity_defect, ComplexMatrix3, MatError, C64};
use crate::starkflow::{integrate_flow, step_count, FlowConfig, FlowError, FlowField, FrameScalars};

/// Drift that triggers polar re-orthonormalisation.
const REORTHO_THRESHOLD: f64 = 1e-9;
/// Drift that is reported as an error instead.
const DRIFT_LIMIT: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SurfaceError {
    #[error("mu = 0: the (x, y) coordinates are undefined")]
    MuZero,
    #[error("beta = {0} is outside the patch beta > 0")]
    BetaNotPositive(f64),
    #[error("frame drifted {0:e} from unitary")]
    NonUnitaryDrift(f64),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Mat(#[from] MatError),
}

/// Rows express (ω², ω³) in terms of (dx, dy).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoframeAtPoint {
    pub m: Matrix2<f64>,
}

impl CoframeAtPoint {
    /// (ω², ω³) evaluated on the coordinate vector (dx, dy).
    pub fn apply(&self, dx: f64, dy: f64) -> (f64, f64) {
        let r = self.m * Vector2::new(dx, dy);
        (r[0], r[1])
    }
}

pub fn coframe_from_xy(fs: FrameScalars) -> Result<CoframeAtPoint, SurfaceError> {
    if fs.mu == 0.0 {
        return Err(SurfaceError::MuZero);
    }
    if fs.beta <= 0.0 {
        return Err(SurfaceError::BetaNotPositive(fs.beta));
    }
    if fs.mu < 0.0 {
        return Err(FlowError::OutsideCanonicalPatch { beta: fs.beta, mu: fs.mu }.into());
    }
    let b3 = fs.beta.cbrt();
    let m3 = fs.mu.cbrt();
    // ω³ = (dy − μ^{4/3} dx) / (β^{2/3} μ^{1/3})
    let denom = b3 * b3 * m3;
    Ok(CoframeAtPoint {
        m: Matrix2::new(b3, 0.0, -(m3 * m3 * m3 * m3) / denom, 1.0 / denom),
    })
}

/// (dx, dy) in terms of (ω², ω³): dx = β^{−1/3}ω², dy = μ^{4/3}β^{−1/3}ω² + β^{2/3}μ^{1/3}ω³.
pub fn xy_from_coframe(fs: FrameScalars) -> Matrix2<f64> {
    let b3 = fs.beta.cbrt();
    let m3 = fs.mu.cbrt();
    Matrix2::new(1.0 / b3, 0.0, m3 * m3 * m3 * m3 / b3, b3 * b3 * m3)
}

/// Ω(w) over (X, E₁, E₃) for w = coefficients on (ω¹, ω², ω³), gauge σ = 0.
pub fn mc_matrix(fs: FrameScalars, w: [f64; 3]) -> ComplexMatrix3 {
    let FrameScalars { beta, mu, kappa } = fs;
    let [w1, w2, w3] = w;
    let mut o = ComplexMatrix3::zeros();
    o[(1, 0)] = C64::new(w1, w2);
    o[(2, 0)] = C64::new(w3, 0.0);
    o[(1, 1)] = C64::new(0.0, kappa * w1);
    o[(2, 1)] = C64::new(mu * w1, mu * w2 + beta * w3);
    o[(2, 2)] = C64::new(0.0, beta * w1);
    for (r, c) in [(0, 1), (0, 2), (1, 2)] {
        o[(r, c)] = -o[(c, r)].conj();
    }
    o
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Direction {
    Omega2,
    Omega3,
}

/// Derivatives (dβ, dμ, dκ) along the dual frame vector of ω² or ω³.
pub fn pde_rhs(fs: FrameScalars, direction: Direction) -> [f64; 3] {
    let FrameScalars { beta: b, mu: m, kappa: k } = fs;
    match direction {
        Direction::Omega2 => [b * k + 2.0 * m * m + 2.0, m * (2.0 * k - b), k * k - 2.0 * m * m + 4.0],
        Direction::Omega3 => [3.0 * b * m, m * m + b * k - b * b + 1.0, m * (k - 2.0 * b)],
    }
}

/// (∂/∂x, ∂/∂y) of (β, μ, κ) from pde_rhs and the coframe.
pub fn xy_derivatives(fs: FrameScalars) -> Result<([f64; 3], [f64; 3]), SurfaceError> {
    let cf = coframe_from_xy(fs)?;
    let d2 = pde_rhs(fs, Direction::Omega2);
    let d3 = pde_rhs(fs, Direction::Omega3);
    let mut dx = [0.0; 3];
    let mut dy = [0.0; 3];
    for i in 0..3 {
        dx[i] = d2[i] * cf.m[(0, 0)] + d3[i] * cf.m[(1, 0)];
        dy[i] = d2[i] * cf.m[(0, 1)] + d3[i] * cf.m[(1, 1)];
    }
    Ok((dx, dy))
}

/// Frames on the node lattice of a surface patch.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceGrid {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    /// Row-major over (y, x): index iy·nx + ix.
    pub scalars: Vec<FrameScalars>,
    pub frames: Vec<ComplexMatrix3>,
    /// ‖F via y-then-x − F via x-then-y‖; zero on the first row and column.
    pub residuals: Vec<f64>,
    pub f0: ComplexMatrix3,
}

impl SurfaceGrid {
    pub fn nx(&self) -> usize {
        self.xs.len()
    }

    pub fn ny(&self) -> usize {
        self.ys.len()
    }

    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.nx() + ix
    }

    pub fn frame(&self, ix: usize, iy: usize) -> &ComplexMatrix3 {
        &self.frames[self.index(ix, iy)]
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_unitarity_defect(&self) -> f64 {
        self.frames.iter().map(unitarity_defect).fold(0.0, f64::max)
    }

    /// Largest imaginary part of (F₀·D)†X over the grid, D = diag(1, i, 1).
    /// Zero when every X lies in one real 3-plane fixed by F₀.
    pub fn real_plane_defect(&self) -> f64 {
        let mut d = ComplexMatrix3::identity();
        d[(1, 1)] = C64::new(0.0, 1.0);
        let basis = (self.f0 * d).adjoint();
        self.frames
            .iter()
            .map(|f| {
                let coords = basis * f.column(0);
                coords.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }
}

/// One edge of transport: F·exp(h·Ω) with Ω at the edge midpoint, where h·Ω is
/// built from the coordinate displacement (dx, dy).
fn transport(f: &ComplexMatrix3, mid: FrameScalars, dx: f64, dy: f64) -> Result<ComplexMatrix3, SurfaceError> {
    let cf = coframe_from_xy(mid)?;
    let (o2, o3) = cf.apply(dx, dy);
    let step = skew_hermitian_exp(&mc_matrix(mid, [0.0, o2, o3]), 1.0)?;
    let mut next = f * step;
    let defect = unitarity_defect(&next);
    if defect > DRIFT_LIMIT {
        return Err(SurfaceError::NonUnitaryDrift(defect));
    }
    if defect > REORTHO_THRESHOLD {
        next = polar_unitary(&next);
    }
    Ok(next)
}

fn odd_or_one(n: usize, axis: &str) -> Result<usize, SurfaceError> {
    if n == 1 {
        Ok(1)
    } else if n % 2 == 1 {
        Ok(n / 2 + 1)
    } else {
        Err(SurfaceError::InvalidGrid(format!(
            "{axis}: need an odd number of flow samples, got {n}"
        )))
    }
}

/// Transport F₀ over the nodes of a flow field sampled at half the node
/// spacing (nodes sit on even sample indices, edge midpoints on odd ones).
pub fn integrate_surface_frames(field: &FlowField, f0: &ComplexMatrix3) -> Result<SurfaceGrid, SurfaceError> {
    let defect = unitarity_defect(f0);
    if defect > DRIFT_LIMIT {
        return Err(SurfaceError::NonUnitaryDrift(defect));
    }
    let nx = odd_or_one(field.nx(), "x")?;
    let ny = odd_or_one(field.ny(), "y")?;
    let xs: Vec<f64> = (0..nx).map(|i| field.xs[2 * i]).collect();
    let ys: Vec<f64> = (0..ny).map(|i| field.ys[2 * i]).collect();
    let fs = |fx: usize, fy: usize| field.frame_scalars(fx, fy);

    let x_step = |f: &ComplexMatrix3, ix: usize, iy: usize| {
        transport(f, fs(2 * ix + 1, 2 * iy), xs[ix + 1] - xs[ix], 0.0)
    };
    let y_step = |f: &ComplexMatrix3, ix: usize, iy: usize| {
        transport(f, fs(2 * ix, 2 * iy + 1), 0.0, ys[iy + 1] - ys[iy])
    };

    // path A: up the first column, then along each row
    let mut first_col = vec![*f0];
    for iy in 0..ny - 1 {
        let next = y_step(&first_col[iy], 0, iy)?;
        first_col.push(next);
    }
    let rows_a: Vec<Vec<ComplexMatrix3>> = (0..ny)
        .into_par_iter()
        .map(|iy| {
            let mut row = vec![first_col[iy]];
            for ix in 0..nx - 1 {
                let next = x_step(&row[ix], ix, iy)?;
                row.push(next);
            }
            Ok(row)
        })
        .collect::<Result<_, SurfaceError>>()?;

    // path B: along the first row, then up each column
    let first_row = &rows_a[0];
    let cols_b: Vec<Vec<ComplexMatrix3>> = (0..nx)
        .into_par_iter()
        .map(|ix| {
            let mut col = vec![first_row[ix]];
            for iy in 0..ny - 1 {
                let next = y_step(&col[iy], ix, iy)?;
                col.push(next);
            }
            Ok(col)
        })
        .collect::<Result<_, SurfaceError>>()?;

    let mut frames = Vec::with_capacity(nx * ny);
    let mut residuals = Vec::with_capacity(nx * ny);
    let mut scalars = Vec::with_capacity(nx * ny);
    for iy in 0..ny {
        for ix in 0..nx {
            let a = rows_a[iy][ix];
            frames.push(a);
            residuals.push((a - cols_b[ix][iy]).norm());
            scalars.push(fs(2 * ix, 2 * iy));
        }
    }
    Ok(SurfaceGrid {
        xs,
        ys,
        scalars,
        frames,
        residuals,
        f0: *f0,
    })
}

/// Node spacing `cfg.step` over the configured rectangle: flow sampled at
/// half that spacing, then frame transport.
pub fn build_surface(cfg: &FlowConfig, f0: &ComplexMatrix3) -> Result<(FlowField, SurfaceGrid), SurfaceError> {
    let nx = step_count(cfg.x_max - cfg.x_min, cfg.step)?;
    let ny = step_count(cfg.y_max - cfg.y_min, cfg.step)?;
    // fine spacing chosen so both directions get exactly twice the node steps
    let fine_x = if nx == 0 { cfg.step / 2.0 } else { (cfg.x_max - cfg.x_min) / (2 * nx) as f64 };
    let fine_y = if ny == 0 { cfg.step / 2.0 } else { (cfg.y_max - cfg.y_min) / (2 * ny) as f64 };
    if nx > 0 && ny > 0 && (fine_x - fine_y).abs() > 1e-12 * fine_x.max(fine_y) {
        return Err(SurfaceError::InvalidGrid(
            "x and y ranges must be whole multiples of the step".into(),
        ));
    }
    let fine = if nx > 0 { fine_x } else { fine_y };
    let field = integrate_flow(&FlowConfig { step: fine, ..*cfg })?;
    let grid = integrate_surface_frames(&field, f0)?;
    Ok((field, grid))
}

/// CSV: x, y, Re/Im of the nine frame entries (row-major), residual.
pub fn write_grid_csv<W: std::io::Write>(grid: &SurfaceGrid, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["x".to_string(), "y".to_string()];
    for r in 0..3 {
        for c in 0..3 {
            header.push(format!("f{r}{c}_re"));
            header.push(format!("f{r}{c}_im"));
        }
    }
    header.push("residual".into());
    w.write_record(&header)?;
    for iy in 0..grid.ny() {
        for ix in 0..grid.nx() {
            let f = grid.frame(ix, iy);
            let mut row = vec![grid.xs[ix].to_string(), grid.ys[iy].to_string()];
            for r in 0..3 {
                for c in 0..3 {
                    row.push(f[(r, c)].re.to_string());
                    row.push(f[(r, c)].im.to_string());
                }
            }
            row.push(grid.residuals[grid.index(ix, iy)].to_string());
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}
