//! Seeded random generators for shape operators.
//!
//! Used by the tests, the acceptance suite and the examples. Every generator
//! takes the caller's RNG so runs are reproducible from a seed.

use nalgebra::{Complex, DMatrix, DVector};
use rand::Rng;

use crate::canonform::{irreducible_layout, reducible_layout, split_to_standard, Kind};

/// Uniform entries in [−scale, scale], symmetrized.
pub fn random_symmetric<R: Rng>(side: usize, scale: f64, rng: &mut R) -> DMatrix<f64> {
    let m = DMatrix::from_fn(side, side, |_, _| rng.gen_range(-scale..scale));
    (&m + m.transpose()) * 0.5
}

/// Random symmetric matrix with its trace removed from the diagonal.
pub fn random_trace_free<R: Rng>(side: usize, scale: f64, rng: &mut R) -> DMatrix<f64> {
    let mut m = random_symmetric(side, scale, rng);
    let shift = m.trace() / side as f64;
    for i in 0..side {
        m[(i, i)] -= shift;
    }
    m
}

/// Vector with entries in [−scale, scale] and norm at least 0.3·scale
/// (empty when n = 0).
pub fn random_nonzero_vector<R: Rng>(n: usize, scale: f64, rng: &mut R) -> DVector<f64> {
    if n == 0 {
        return DVector::zeros(0);
    }
    loop {
        let d = DVector::from_fn(n, |_, _| rng.gen_range(-scale..scale));
        if d.norm() >= 0.3 * scale {
            return d;
        }
    }
}

/// Canonical irreducible layout with random S and d.
pub fn random_irreducible<R: Rng>(n: usize, rng: &mut R) -> DMatrix<f64> {
    let s = random_symmetric(n, 2.0, rng);
    let d = random_nonzero_vector(n, 2.0, rng);
    irreducible_layout(&s, &d)
}

/// Canonical reducible layout in the split basis with random blocks.
pub fn random_reducible<R: Rng>(k: usize, l: usize, rng: &mut R) -> DMatrix<f64> {
    let p = random_symmetric(k, 2.0, rng);
    let q = random_symmetric(k, 2.0, rng);
    let s = random_symmetric(l, 2.0, rng);
    let d = random_nonzero_vector(l, 2.0, rng);
    reducible_layout(&p, &q, &s, &d)
}

/// Random n×n unitary from the QR factor of a random complex matrix.
pub fn random_unitary<R: Rng>(n: usize, rng: &mut R) -> DMatrix<Complex<f64>> {
    let m = DMatrix::from_fn(n, n, |_, _| {
        Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    m.qr().q()
}

/// Orthogonal matrix of side 2n+1 commuting with Jₙ and fixing W: the
/// realification [[Re U, −Im U], [Im U, Re U]] of a unitary U, bordered by 1.
pub fn realify_unitary(u: &DMatrix<Complex<f64>>) -> DMatrix<f64> {
    let n = u.nrows();
    let mut g = DMatrix::zeros(2 * n + 1, 2 * n + 1);
    for i in 0..n {
        for j in 0..n {
            let z = u[(i, j)];
            g[(i, j)] = z.re;
            g[(i, j + n)] = -z.im;
            g[(i + n, j)] = z.im;
            g[(i + n, j + n)] = z.re;
        }
    }
    g[(2 * n, 2 * n)] = 1.0;
    g
}

pub fn random_commuting_orthogonal<R: Rng>(n: usize, rng: &mut R) -> DMatrix<f64> {
    realify_unitary(&random_unitary(n, rng))
}

/// Random stark operator in the standard basis: a canonical layout (kind and
/// split chosen at random) conjugated by a random Jₙ-commuting rotation.
/// Returns the matrix, the kind it was built with and (k, ℓ).
pub fn random_stark<R: Rng>(n: usize, rng: &mut R) -> (DMatrix<f64>, Kind, (usize, usize)) {
    let k = rng.gen_range(0..=n);
    random_stark_with_split(n, k, rng)
}

/// As [`random_stark`] with the invariant block size fixed; k = 0 gives the
/// irreducible layout.
pub fn random_stark_with_split<R: Rng>(
    n: usize,
    k: usize,
    rng: &mut R,
) -> (DMatrix<f64>, Kind, (usize, usize)) {
    let l = n - k;
    let (canonical, kind) = if k == 0 {
        (random_irreducible(n, rng), Kind::Irreducible)
    } else {
        let p = split_to_standard(k, l);
        (&p * random_reducible(k, l, rng) * p.transpose(), Kind::Reducible)
    };
    let g = random_commuting_orthogonal(n, rng);
    let scrambled = &g * canonical * g.transpose();
    ((&scrambled + scrambled.transpose()) * 0.5, kind, (k, l))
}
