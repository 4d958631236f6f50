//! Reads a two-column catalogue with log-scaled columns, drops bad rows,
//! then estimates the density with an LSCV bandwidth.

use std::io::Write;

use ngkde::ingest::{ingest_csv, ColumnRef};
use ngkde::{lscv_select, EstimatorKind, LscvFactor, LscvGrid, ScalarSearchSpec};
use rand::{Rng, SeedableRng};

fn main() -> ngkde::Result<()> {
    let path = std::env::temp_dir().join("ngkde_catalogue.csv");
    let mut file = std::fs::File::create(&path)?;
    writeln!(file, "duration,flux")?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    for _ in 0..120 {
        let d: f64 = 10f64.powf(rng.random_range(-1.0..2.5));
        let f: f64 = 10f64.powf(rng.random_range(0.0..1.0));
        writeln!(file, "{d},{f}")?;
    }
    writeln!(file, "n/a,2.0")?;
    writeln!(file, "-3.0,1.5")?;
    drop(file);

    let data = ingest_csv(&path, &ColumnRef::Name("duration".into()), &ColumnRef::Name("flux".into()), true, true)?;
    println!("kept {} rows, rejected {}", data.sample.len(), data.rejected_count());
    for r in &data.rejected {
        println!("  line {}: {}", r.line, r.reason);
    }
    let search = ScalarSearchSpec { lo: 0.05, hi: 1.5, coarse_points: 20, refine_iters: 12 };
    let grid = LscvGrid::Padded { nx: 61, ny: 61, pad: 4.0 };
    let sel = lscv_select(EstimatorKind::F4, &data.sample, &grid, &search, LscvFactor::Standard)?;
    println!("f4 LSCV bandwidth s = {:.4} (b1 = b2 = {:.4})", sel.s_opt, sel.s_opt * sel.s_opt);
    Ok(())
}
