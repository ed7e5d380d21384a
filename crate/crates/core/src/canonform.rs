//! Normal forms of stark shape operators.
//!
//! Starting from W, the chain e₁ = AW/|AW|, w₁ = φe₁, e₂ ∝ Aw₁ projected off
//! everything so far, w₂ = φe₂, … builds an orthonormal basis in which A takes
//! the irreducible layout
//!
//! ```text
//! [[0, S, d],
//!  [S, 0, 0],
//!  [dᵀ, 0, 0]]
//! ```
//!
//! with S tridiagonal and d = (β, 0, …, 0). When the chain stops early the
//! rest of ℋ is invariant under both A and φ, and A takes the reducible layout
//! blockdiag([[P, Q], [Q, −P]], irreducible core of size ℓ).

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::austere::{check_stark, j_split, ShapeError, ShapeOperatorRep};
use crate::matcore::sorted_eigenvalues;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Irreducible,
    Reducible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalForm {
    pub kind: Kind,
    pub s: DMatrix<f64>,
    pub d: DVector<f64>,
    /// Only for the reducible kind.
    pub p: Option<DMatrix<f64>>,
    pub q: Option<DMatrix<f64>>,
    /// (k, ℓ): sizes of the invariant block and of the irreducible core.
    pub dims: (usize, usize),
    /// Orthogonal H with H·A·Hᵀ in canonical layout.
    pub transform: DMatrix<f64>,
    /// ‖H·A·Hᵀ − layout‖.
    pub residual: f64,
    /// ‖H·φ·Hᵀ − J‖ for the target complex structure.
    pub phi_residual: f64,
    /// AW = 0 at the top level.
    pub degenerate: bool,
}

impl CanonicalForm {
    /// H·A·Hᵀ rebuilt from the extracted blocks.
    pub fn layout(&self) -> DMatrix<f64> {
        match (&self.p, &self.q) {
            (Some(p), Some(q)) => reducible_layout(p, q, &self.s, &self.d),
            _ => irreducible_layout(&self.s, &self.d),
        }
    }

    /// Complex structure the transformed basis is adapted to.
    pub fn target_j(&self) -> DMatrix<f64> {
        let (k, l) = self.dims;
        j_split(k, l)
    }

    pub fn orthogonality_defect(&self) -> f64 {
        let h = &self.transform;
        (h * h.transpose() - DMatrix::<f64>::identity(h.nrows(), h.nrows())).norm()
    }
}

/// [[0, S, d], [S, 0, 0], [dᵀ, 0, 0]].
pub fn irreducible_layout(s: &DMatrix<f64>, d: &DVector<f64>) -> DMatrix<f64> {
    let n = s.nrows();
    assert_eq!(d.len(), n, "d must have length n");
    let s = (s + s.transpose()) * 0.5;
    let mut a = DMatrix::zeros(2 * n + 1, 2 * n + 1);
    a.view_mut((0, n), (n, n)).copy_from(&s);
    a.view_mut((n, 0), (n, n)).copy_from(&s);
    a.view_mut((0, 2 * n), (n, 1)).copy_from(d);
    a.view_mut((2 * n, 0), (1, n)).copy_from(&d.transpose());
    a
}

/// blockdiag([[P, Q], [Q, −P]], irreducible_layout(S, d)) in the split basis.
pub fn reducible_layout(
    p: &DMatrix<f64>,
    q: &DMatrix<f64>,
    s: &DMatrix<f64>,
    d: &DVector<f64>,
) -> DMatrix<f64> {
    let k = p.nrows();
    let l = s.nrows();
    let p = (p + p.transpose()) * 0.5;
    let q = (q + q.transpose()) * 0.5;
    let side = 2 * (k + l) + 1;
    let mut a = DMatrix::zeros(side, side);
    a.view_mut((0, 0), (k, k)).copy_from(&p);
    a.view_mut((0, k), (k, k)).copy_from(&q);
    a.view_mut((k, 0), (k, k)).copy_from(&q);
    a.view_mut((k, k), (k, k)).copy_from(&(-&p));
    a.view_mut((2 * k, 2 * k), (2 * l + 1, 2 * l + 1))
        .copy_from(&irreducible_layout(s, d));
    a
}

/// Permutation P with P·J_{k,ℓ}·Pᵀ = J_{k+ℓ}: maps split coordinates to
/// standard ones.
pub fn split_to_standard(k: usize, l: usize) -> DMatrix<f64> {
    let n = k + l;
    let side = 2 * n + 1;
    let mut p = DMatrix::zeros(side, side);
    for i in 0..side {
        let target = if i < k {
            i
        } else if i < 2 * k {
            n + (i - k)
        } else if i < 2 * k + l {
            k + (i - 2 * k)
        } else if i < 2 * n {
            n + k + (i - 2 * k - l)
        } else {
            i
        };
        p[(target, i)] = 1.0;
    }
    p
}

/// Gram–Schmidt `v` against `basis` (two passes).
fn project_off(v: &mut DVector<f64>, basis: &[DVector<f64>]) {
    for _ in 0..2 {
        for b in basis {
            let c = b.dot(v);
            v.axpy(-c, b, 1.0);
        }
    }
}

/// Reduce a stark operator to canonical layout.
pub fn reduce_to_canonical(rep: &ShapeOperatorRep, tol: f64) -> Result<CanonicalForm, ShapeError> {
    if !check_stark(rep, tol) {
        return Err(ShapeError::NotStark);
    }
    let a = rep.matrix();
    let phi = rep.phi();
    let n = rep.n();
    let side = rep.side();
    let scale = a.norm().max(1.0);

    let mut w = DVector::zeros(side);
    w[side - 1] = 1.0;
    let mut removed = vec![w.clone()];
    let mut es: Vec<DVector<f64>> = Vec::new();
    let mut ws: Vec<DVector<f64>> = Vec::new();

    for r in 0..n {
        let mut aw = a * &w;
        let p11 = aw.dot(&w);
        if p11.abs() > tol * scale {
            return Err(ShapeError::ToleranceBreach {
                stage: format!("level {r}: diagonal entry of the structure vector"),
                residual: p11.abs(),
            });
        }
        project_off(&mut aw, &removed);
        let beta = aw.norm();
        if beta <= tol * scale {
            break;
        }
        let e = aw / beta;
        let next = &phi * &e;
        removed.push(e.clone());
        removed.push(next.clone());
        es.push(e);
        ws.push(next.clone());
        w = next;
    }

    let l = es.len();
    let k = n - l;

    // J-adapted orthonormal basis (g, φg) of the invariant remainder
    let mut gs: Vec<DVector<f64>> = Vec::new();
    let mut jgs: Vec<DVector<f64>> = Vec::new();
    for _ in 0..k {
        let mut known: Vec<DVector<f64>> = removed.clone();
        known.extend(gs.iter().cloned());
        known.extend(jgs.iter().cloned());
        let g = (0..side)
            .map(|i| {
                let mut v = DVector::zeros(side);
                v[i] = 1.0;
                project_off(&mut v, &known);
                v
            })
            .max_by(|x, y| x.norm().total_cmp(&y.norm()))
            .expect("side > 0");
        let g = &g / g.norm();
        let mut jg = &phi * &g;
        known.push(g.clone());
        project_off(&mut jg, &known);
        let jg = &jg / jg.norm();
        gs.push(g);
        jgs.push(jg);
    }

    let rows: Vec<DVector<f64>> = gs
        .iter()
        .chain(jgs.iter())
        .chain(es.iter())
        .chain(ws.iter())
        .chain(std::iter::once(&removed[0]))
        .cloned()
        .collect();
    let h = DMatrix::from_fn(side, side, |i, j| rows[i][j]);

    let b = &h * a * h.transpose();
    let b = (&b + b.transpose()) * 0.5;
    let o = 2 * k;
    let s = b.view((o, o + l), (l, l)).into_owned();
    let d: DVector<f64> = b.view((o, side - 1), (l, 1)).column(0).into_owned();
    let (kind, p, q) = if k > 0 {
        (
            Kind::Reducible,
            Some(b.view((0, 0), (k, k)).into_owned()),
            Some(b.view((0, k), (k, k)).into_owned()),
        )
    } else {
        (Kind::Irreducible, None, None)
    };

    let mut form = CanonicalForm {
        kind,
        s,
        d,
        p,
        q,
        dims: (k, l),
        transform: h,
        residual: 0.0,
        phi_residual: 0.0,
        degenerate: l == 0,
    };
    form.residual = (&b - form.layout()).norm();
    form.phi_residual = (&form.transform * &phi * form.transform.transpose() - form.target_j()).norm();

    if form.residual > tol * scale {
        return Err(ShapeError::ToleranceBreach {
            stage: "canonical layout".into(),
            residual: form.residual,
        });
    }
    if form.phi_residual > tol * side as f64 {
        return Err(ShapeError::ToleranceBreach {
            stage: "complex structure".into(),
            residual: form.phi_residual,
        });
    }
    Ok(form)
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvariantSubspace {
    /// Orthonormal columns, even in number.
    pub basis: DMatrix<f64>,
    /// A vanishes on the subspace.
    pub degenerate: bool,
}

/// Minimal nonzero subspace of ℋ invariant under both A and φ, if any.
///
/// Works on the full operator: the symmetric matrices commuting with A, φ and
/// the projection onto W form an algebra whose generic element has the minimal
/// joint invariant subspaces as eigenspaces.
pub fn detect_invariant_subspace(rep: &ShapeOperatorRep, tol: f64) -> Option<InvariantSubspace> {
    let a = rep.matrix();
    let phi = rep.phi();
    let side = rep.side();
    let mut pw = DMatrix::zeros(side, side);
    pw[(side - 1, side - 1)] = 1.0;

    // symmetric basis elements E_ij + E_ji
    let pairs: Vec<(usize, usize)> = (0..side).flat_map(|i| (i..side).map(move |j| (i, j))).collect();
    let sym_basis = |idx: usize| {
        let (i, j) = pairs[idx];
        let mut x = DMatrix::zeros(side, side);
        x[(i, j)] = 1.0;
        x[(j, i)] = 1.0;
        x
    };
    let m = side * side;
    let mut lin = DMatrix::zeros(3 * m, pairs.len());
    for c in 0..pairs.len() {
        let x = sym_basis(c);
        for (blk, g) in [a, &phi, &pw].into_iter().enumerate() {
            let comm = &x * g - g * &x;
            for (r, v) in comm.iter().enumerate() {
                lin[(blk * m + r, c)] = *v;
            }
        }
    }
    let svd = lin.svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let smax = svd.singular_values.max().max(1.0);
    let null: Vec<DVector<f64>> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &sv)| sv < 1e-8 * smax)
        .map(|(i, _)| v_t.row(i).transpose())
        .collect();
    if null.len() <= 1 {
        return None;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut x = DMatrix::zeros(side, side);
    for v in &null {
        let c: f64 = rng.gen_range(-1.0..1.0);
        for (idx, coef) in v.iter().enumerate() {
            x += sym_basis(idx) * (c * coef);
        }
    }
    let eig = x.symmetric_eigen();
    let mut order: Vec<usize> = (0..side).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let spread = eig.eigenvalues.amax().max(1e-300);

    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for &i in &order {
        match clusters.last_mut() {
            Some(c) if (eig.eigenvalues[i] - eig.eigenvalues[*c.last().unwrap()]).abs() < 1e-6 * spread => {
                c.push(i)
            }
            _ => clusters.push(vec![i]),
        }
    }

    let scale = a.norm().max(1.0);
    let mut best: Option<DMatrix<f64>> = None;
    for c in clusters {
        let e = DMatrix::from_fn(side, c.len(), |r, j| eig.eigenvectors[(r, c[j])]);
        if e.row(side - 1).norm() > 1e-6 {
            continue;
        }
        let ae = a * &e;
        let pe = &phi * &e;
        let a_leak = (&ae - &e * (e.transpose() * &ae)).norm();
        let p_leak = (&pe - &e * (e.transpose() * &pe)).norm();
        if a_leak > tol * scale || p_leak > tol * side as f64 {
            continue;
        }
        if best.as_ref().is_none_or(|b| e.ncols() < b.ncols()) {
            best = Some(e);
        }
    }
    best.map(|basis| {
        let degenerate = (a * &basis).norm() < tol * scale;
        InvariantSubspace { basis, degenerate }
    })
}

/// Sorted spectrum symmetric about zero: λᵢ + λ_{n+1−i} ≈ 0.
pub fn balanced_spectrum_check(m: &DMatrix<f64>, tol: f64) -> bool {
    let ev = sorted_eigenvalues(m);
    let scale = m.norm().max(1.0);
    let n = ev.len();
    (0..n).all(|i| (ev[i] + ev[n - 1 - i]).abs() < tol * scale)
}
