//! Evaluates all five estimators on a grid from one sample and writes the
//! F4 surface as CSV in the temp directory.

use ngkde::bandwidth::target_on_grid;
use ngkde::{builtin_target, evaluate_grid, target_sample, tie_bandwidths, EstimatorKind, Grid2D};

fn main() -> ngkde::Result<()> {
    let t = builtin_target("f3")?;
    let sample = target_sample(&t, 7, 400)?;
    let grid = Grid2D::new(t.integration_box, 81, 81)?;
    let truth = target_on_grid(&t, &grid);
    let bw = tie_bandwidths(0.35)?;
    for kind in EstimatorKind::ALL {
        let surface = evaluate_grid(kind, &sample, &bw, &grid)?;
        let ise: f64 =
            grid.integrate(&surface.values.iter().zip(&truth).map(|(a, b)| (a - b) * (a - b)).collect::<Vec<_>>());
        println!(
            "{}: mass on box {:.4}, ISE {:.3e}, min {:.2e}",
            kind.tag(),
            surface.integral(),
            ise,
            surface.values.iter().cloned().fold(f64::INFINITY, f64::min)
        );
        if kind == EstimatorKind::F4 {
            let path = std::env::temp_dir().join("ngkde_f4_surface.csv");
            surface.write_csv(std::fs::File::create(&path)?)?;
            println!("   wrote {}", path.display());
        }
    }
    Ok(())
}
