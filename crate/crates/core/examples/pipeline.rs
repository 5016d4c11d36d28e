//! The full train, classify, assess pipeline through the library API,
//! writing the same artifacts as `msclassify run`.
//!
//! ```text
//! cargo run --example generate_scene -- demo
//! cargo run --example pipeline -- demo/pipeline.cfg [pp|md|ml|ed]
//! ```

use std::path::PathBuf;

use msclassify::cli::{self, Options};

fn main() -> msclassify::Result<()> {
    let mut args = std::env::args().skip(1);
    let config = PathBuf::from(args.next().unwrap_or_else(|| "demo/pipeline.cfg".into()));
    let rule = args.next().map(|r| r.parse()).transpose()?;
    let options = Options {
        config: Some(config),
        rule,
        ..Options::default()
    };
    let cfg = options.resolve()?;

    let signatures = cli::train(&cfg)?;
    let regularized = signatures.iter().filter(|s| s.regularized).count();
    println!(
        "trained {} classes ({regularized} regularized)",
        signatures.len()
    );

    let map = cli::classify(&cfg, None)?;
    println!(
        "classified {}x{} pixels, {} unclassified",
        map.width(),
        map.height(),
        map.unclassified_count()
    );

    let report = cli::assess(&cfg)?;
    println!(
        "overall accuracy (mean of diagonal proportions): {:.6}",
        report.overall_mean_diag
    );
    println!(
        "overall accuracy (trace / total): {:.6}",
        report.overall_trace
    );
    match report.kappa {
        Some(k) => println!("kappa: {k:.6}"),
        None => println!("kappa: undefined"),
    }
    println!("artifacts in {}", cfg.out_dir.display());
    Ok(())
}
