//! Data-driven bandwidths by least-squares cross-validation, tied and
//! two-parameter, on a sample where the truth is known for comparison.

use ngkde::{
    builtin_target, ise, lscv_select, lscv_select_2d, target_sample, EstimatorKind, Grid2D, LscvFactor, LscvGrid,
    ScalarSearchSpec,
};

fn main() -> ngkde::Result<()> {
    let t = builtin_target("f2")?;
    let sample = target_sample(&t, 11, 150)?;
    let lscv_grid = LscvGrid::Padded { nx: 61, ny: 61, pad: 4.0 };
    let search = ScalarSearchSpec { lo: 0.05, hi: 1.5, coarse_points: 20, refine_iters: 12 };
    let eval = Grid2D::new(t.integration_box, 81, 81)?;
    for kind in [EstimatorKind::F2, EstimatorKind::F4, EstimatorKind::F5] {
        let tied = lscv_select(kind, &sample, &lscv_grid, &search, LscvFactor::Standard)?;
        let free = lscv_select_2d(kind, &sample, &lscv_grid, &search, LscvFactor::Standard)?;
        println!(
            "{}: tied s = {:.3} (ISE {:.2e}); 2-D ({:.3}, {:.3}) (ISE {:.2e})",
            kind.tag(),
            tied.s_opt,
            ise(kind, &sample, &tied.bw, &t, &eval)?,
            free.s1,
            free.s2,
            ise(kind, &sample, &free.bw, &t, &eval)?,
        );
    }
    Ok(())
}
