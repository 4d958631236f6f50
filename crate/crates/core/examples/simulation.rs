//! A short seeded Monte-Carlo run: oracle bandwidths and mean ISE per
//! estimator, printed as a table.

use ngkde::sim::{format_table, run_simulation, SimConfig};
use ngkde::{Grid2D, ScalarSearchSpec};

fn main() -> ngkde::Result<()> {
    let mut cfg = SimConfig::new("f1", 100, 8, 1)?;
    cfg.grid = Grid2D::new(cfg.grid.bounds, 61, 61)?;
    cfg.search = ScalarSearchSpec { coarse_points: 30, refine_iters: 20, ..Default::default() };
    cfg.workers = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    let report = run_simulation(&cfg)?;
    print!("{}", format_table(&report));
    Ok(())
}
