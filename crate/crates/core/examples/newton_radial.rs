//! Newton's radial body: calibration, closed-form resistance, and the polyhedral body of revolution.

use newton_dual::newton_radial::{calibrate, radial_resistance, revolve};
use newton_dual::resistance::primal_resistance;

fn main() -> newton_dual::error::Result<()> {
    for m in [0.5, 1.0, 2.0, 4.0] {
        let p = calibrate(1.0, m)?;
        println!("M = {m}: front radius {:.6}, edge slope {:.6}, J = {:.10}", p.x_front, p.v_max, radial_resistance(&p).value);
    }
    let p = calibrate(1.0, 1.0)?;
    let exact = radial_resistance(&p).value;
    for rim in [90, 180, 360] {
        let j = primal_resistance(&revolve(&p, rim)?)?.value;
        println!("revolved on a {rim}-gon: J = {j:.10}, relative gap {:.2e}", (j - exact).abs() / exact);
    }
    Ok(())
}
