//! Path-independence of frame transport: the residual between the two
//! transport orders drops by about 4 per halving of the grid step.

use stark::matcore::ComplexMatrix3;
use stark::starkflow::{first_integrals, FlowConfig, ReducedState};
use stark::surface::build_surface;

fn main() {
    let fi = first_integrals(ReducedState::new(1.0, 1.0, 1.0));
    let mut prev = None;
    for h in [0.02, 0.01, 0.005, 0.0025] {
        let cfg = FlowConfig { c0: fi.c, d0: fi.d, v0: 1.0, x_min: 0.0, x_max: 0.2, y_min: 0.0, y_max: 0.2, step: h };
        let (_, grid) = build_surface(&cfg, &ComplexMatrix3::identity()).unwrap();
        let r = grid.max_residual();
        match prev {
            Some(p) => println!("h = {h:<7} residual {r:.3e}  ratio {:.2}", p / r),
            None => println!("h = {h:<7} residual {r:.3e}"),
        }
        prev = Some(r);
    }
}
