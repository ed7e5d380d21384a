//! Integrate the reduced (t, u, v) system from (1, 1, 1) and watch the first
//! integrals and the ratio A³/B² stay put.

use stark::starkflow::{first_integrals, integrate_flow, FlowConfig, ReducedState};

fn main() {
    let fi = first_integrals(ReducedState::new(1.0, 1.0, 1.0));
    let cfg = FlowConfig { c0: fi.c, d0: fi.d, v0: 1.0, x_min: 0.0, x_max: 0.2, y_min: 0.0, y_max: 0.2, step: 1e-3 };
    let field = integrate_flow(&cfg).expect("seed lies in the valid region");
    let corner = field.state(field.nx() - 1, field.ny() - 1);
    println!("seed C = {:.6}, D = {:.6}", fi.c, fi.d);
    println!("state at (0.2, 0.2): t = {:.6}, u = {:.6}, v = {:.6}", corner.t, corner.u, corner.v);
    let d = field.drift();
    println!("first-integral drift {:.2e}", d.first_integral);
    println!("ratio {:?}, drift {:?}", d.seed_ratio, d.ratio);
}
