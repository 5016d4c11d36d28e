//! Builds class signatures from training regions and prints what each
//! classifier will see: mean, covariance, box bounds and whether the
//! covariance needed regularizing.
//!
//! ```text
//! cargo run --example train_signatures
//! ```

use std::collections::BTreeMap;

use msclassify::region::parse_regions;
use msclassify::scene::{benchmark_spec, RegionPlan, Scene};
use msclassify::signature_file::format_signatures;
use msclassify::training::DEFAULT_EPSILON;
use msclassify::{Raster, SampleType, TrainingSet};

fn main() -> msclassify::Result<()> {
    // a hand-written region file over a tiny two-band raster
    let raster = Raster::new(
        4,
        2,
        2,
        SampleType::U8,
        vec![
            10.0, 12.0, 200.0, 205.0, 11.0, 13.0, 198.0, 202.0, // band 0
            50.0, 52.0, 90.0, 80.0, 51.0, 49.0, 95.0, 85.0, // band 1
        ],
    )?;
    let regions = parse_regions(
        "# class_id x y width height purpose\n\
         0 0 0 2 2 training\n\
         1 2 0 2 2 training\n",
        "inline",
    )?;
    let training = TrainingSet::from_regions(&raster, &regions)?;
    let signatures = training.signatures(DEFAULT_EPSILON, &BTreeMap::new(), true)?;
    print!("{}", format_signatures(&signatures));

    // the benchmark scene: 80 pixels from five 4x4 patches per class
    let scene = Scene::generate(&benchmark_spec(1))?;
    let regions = scene.plan_regions(&RegionPlan::small())?;
    let training = TrainingSet::from_regions(&scene.raster, &regions)?;
    let signatures = training.signatures(DEFAULT_EPSILON, &BTreeMap::new(), true)?;
    println!();
    println!(
        "{:<6} {:>6} {:>12} {:>12}  mean",
        "class", "pixels", "-ln|Σ|", "regularized"
    );
    for s in &signatures {
        let mean: Vec<String> = s.mean.iter().map(|v| format!("{v:.1}")).collect();
        println!(
            "{:<6} {:>6} {:>12.4} {:>12}  [{}]",
            s.class_id.to_string(),
            s.n_samples,
            s.neg_log_det,
            s.regularized,
            mean.join(", ")
        );
    }
    Ok(())
}
