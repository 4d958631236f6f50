//! ISE-optimal bandwidths for each estimator on one simulated sample: the
//! tied scalar, then the freed pair.

use ngkde::{builtin_target, oracle_select, oracle_select_2d, target_sample, EstimatorKind, Grid2D, ScalarSearchSpec};

fn main() -> ngkde::Result<()> {
    let t = builtin_target("f1")?;
    let sample = target_sample(&t, 2024, 100)?;
    let grid = Grid2D::new(t.integration_box, 61, 61)?;
    let search = ScalarSearchSpec { coarse_points: 30, refine_iters: 20, ..Default::default() };
    for kind in EstimatorKind::ALL {
        let tied = oracle_select(kind, &sample, &t, &grid, &search)?;
        let pair = oracle_select_2d(kind, &sample, &t, &grid, &search)?;
        let (a, b) = pair.bw.native_pair(kind)?;
        let (na, nb) = kind.bandwidth_names();
        println!(
            "{}: tied s = {:.4} (ISE x 1e6 = {:.0}); pair ({na}, {nb}) = ({a:.4}, {b:.4}) (ISE x 1e6 = {:.0})",
            kind.tag(),
            tied.s_opt,
            tied.score * 1e6,
            pair.score * 1e6
        );
    }
    Ok(())
}
