//! Austere, stark and Hopf-lift checks on a few hand-written shape operators.

use nalgebra::DMatrix;
use stark::austere::{check_hypersurface_austere, check_stark, classify, lift_odd_functions, ShapeOperatorRep};

fn main() {
    let cases = [
        ("diag(1, -1, 0)", DMatrix::from_diagonal(&nalgebra::dvector![1.0, -1.0, 0.0])),
        ("diag(1, 1, 0)", DMatrix::from_diagonal(&nalgebra::dvector![1.0, 1.0, 0.0])),
        // off-diagonal mu = 0.7, border beta = 1.3
        ("irreducible block", DMatrix::from_row_slice(3, 3, &[0.0, 0.7, 1.3, 0.7, 0.0, 0.0, 1.3, 0.0, 0.0])),
    ];
    for (name, m) in cases {
        let rep = ShapeOperatorRep::standard(m).expect("square of odd side");
        let tol = stark::DEFAULT_TOL;
        println!("{name}");
        println!("  austere {}  stark {}", check_hypersurface_austere(&rep, tol), check_stark(&rep, tol));
        println!("  odd functions of the lift {:?}", lift_odd_functions(&rep));
        if let Ok(c) = classify(&rep, tol) {
            println!("  hopf {}  reducible {}  blocks {:?}", c.is_hopf, c.reducible, c.invariant_block_dims);
        }
    }
}
