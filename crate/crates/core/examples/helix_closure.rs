//! Spectra of the helix generator and whether the helix closes.

use stark::helix::{closure, frenet_integrate, phase_closure_defect, spectrum, DEFAULT_MAX_DEN, DEFAULT_RATIO_TOL};
use stark::matcore::ComplexMatrix3;
use stark::starkflow::FrameScalars;

fn main() {
    for (b, m, k) in [(3.0, 0.0, 0.0), (1.0, 1.0, 1.0), (2.0, 0.5, -1.0)] {
        let fs = FrameScalars::new(b, m, k).unwrap();
        let nu = spectrum(fs);
        let c = closure(nu, DEFAULT_MAX_DEN, DEFAULT_RATIO_TOL);
        print!("beta {b}, mu {m}, kappa {k}: nu = [{:.4}, {:.4}, {:.4}]", nu[0], nu[1], nu[2]);
        match c.length {
            Some(l) => {
                let id = ComplexMatrix3::identity();
                let f = frenet_integrate(&id, fs, &[l]);
                println!(", closes at L = {l:.6} (phase defect {:.1e})", phase_closure_defect(&id, &f[0]));
            }
            None => println!(", does not close"),
        }
    }
}
