//! Leading bias and variance at a point, and AMISE-optimal bandwidths.

use ngkde::theory::{amise_report, bias_leading, variance_leading, Regime};
use ngkde::{builtin_target, tie_bandwidths, EstimatorKind, Grid2D, Obs2};

const KINDS: [EstimatorKind; 4] = [EstimatorKind::F1, EstimatorKind::F2, EstimatorKind::F3, EstimatorKind::F4];

fn main() -> ngkde::Result<()> {
    let t = builtin_target("f2")?;
    let bw = tie_bandwidths(0.2)?;
    for x in [Obs2::new(1.0, 3.0), Obs2::new(0.5, 0.01)] {
        for kind in KINDS {
            println!(
                "x = ({}, {}) {}: bias {:+.3e}, variance (n = 500) {:.3e}",
                x.x1,
                x.x2,
                kind.tag(),
                bias_leading(kind, &t, x, &bw)?,
                variance_leading(kind, &t, x, &bw, 500, Regime::Auto)?
            );
        }
    }

    let t = builtin_target("f4")?;
    let grid = Grid2D::new(t.integration_box, 400, 400)?;
    println!("\ntarget f4");
    for kind in KINDS {
        let r = amise_report(kind, &t, &grid, 100)?;
        println!(
            "{}: s0(100) = {:.4}, AMISE(100) = {:.5}, AMISE(200) = {:.5}",
            kind.tag(),
            r.s0_opt(100.0),
            r.amise_opt(100.0),
            r.amise_opt(200.0)
        );
    }
    Ok(())
}
