//! Associated kernels at a few evaluation points, and how their shape
//! parameters switch branches near the boundary.

use ngkde::kernel::{gamma1_shape, gamma2_shape, make_theta1, make_theta2, ng_alpha_shape, ng_pdf, GammaKernelParams};
use ngkde::Obs2;

fn main() -> ngkde::Result<()> {
    let b = 0.3;
    println!("gamma kernels, b = {b} (knot at x2 = {:.3})", 2.0 * b * b);
    println!("{:>6} {:>10} {:>10} {:>12}", "x2", "shape1", "shape2", "K2(x2; x2)");
    for x2 in [0.0, 0.05, 0.18, 0.5, 2.0] {
        let k2 = GammaKernelParams::class2(x2, b)?;
        println!("{x2:>6.2} {:>10.4} {:>10.4} {:>12.5}", gamma1_shape(x2, b)?, gamma2_shape(x2, b)?, k2.pdf(x2)?);
    }

    let (b1, b2) = (0.09, 0.09);
    println!("\nNG kernels, b1 = {b1}, b2 = {b2} (knot at x2 = {:.2})", 3.0 * b2);
    for x in [Obs2::new(0.0, 0.05), Obs2::new(1.0, 0.5), Obs2::new(-2.0, 3.0)] {
        let t1 = make_theta1(x, b1, b2)?;
        let t2 = make_theta2(x, b1, b2)?;
        println!(
            "x = ({:>4}, {:>4}): alpha {:.3} / {:.3}, lambda {:.3}, K(x; x) {:.4} / {:.4}",
            x.x1,
            x.x2,
            t1.alpha,
            ng_alpha_shape(x.x2, b2)?,
            t1.lambda,
            ng_pdf(&t1, x.x1, x.x2)?,
            ng_pdf(&t2, x.x1, x.x2)?,
        );
    }
    Ok(())
}
