//! Builtin targets: density values, sampling, and a custom target from JSON.

use ngkde::target::BUILTIN_IDS;
use ngkde::{builtin_target, target_pdf, target_sample, Obs2, TargetSpec};

fn main() -> ngkde::Result<()> {
    for id in BUILTIN_IDS {
        let t = builtin_target(id)?;
        let sample = target_sample(&t, 42, 10_000)?;
        let mean_x2 = sample.iter().map(|o| o.x2).sum::<f64>() / sample.len() as f64;
        println!(
            "{id}: f(0, 1) = {:.5}, box mass {:.4}, sample mean x2 {mean_x2:.3}",
            target_pdf(&t, Obs2::new(0.0, 1.0))?,
            t.box_mass()
        );
    }

    // the JSON form is the same one `ngkde targets export` writes
    let json = builtin_target("f3")?.to_json()?;
    let mut custom = TargetSpec::from_json(&json)?;
    custom.name = "f3-wide".into();
    custom.integration_box.x1_hi = 12.0;
    custom.validate()?;
    println!("\n{}", custom.to_json()?);
    Ok(())
}
