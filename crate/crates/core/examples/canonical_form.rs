//! Scramble a random stark matrix by a unitary change of frame, then recover
//! its canonical layout.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use stark::austere::ShapeOperatorRep;
use stark::canonform::reduce_to_canonical;
use stark::sample::random_stark;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in 1..=4 {
        let (m, kind, dims) = random_stark(n, &mut rng);
        let rep = ShapeOperatorRep::standard(m).unwrap();
        let form = reduce_to_canonical(&rep, 1e-9).expect("stark input");
        println!(
            "n = {n}: built {kind:?} {dims:?}, recovered {:?} {:?}, residual {:.1e}, orthogonality {:.1e}",
            form.kind,
            form.dims,
            form.residual,
            form.orthogonality_defect()
        );
    }
}
