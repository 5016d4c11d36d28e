//! Writes the synthetic benchmark scene, its regions and a pipeline
//! configuration into a directory, ready for the `msclassify` binary.
//!
//! ```text
//! cargo run --example generate_scene -- demo
//! cargo run --bin msclassify -- run --config demo/pipeline.cfg
//! ```

use std::fs;
use std::path::PathBuf;

use msclassify::raster::save_bsq;
use msclassify::region::format_regions;
use msclassify::scene::{benchmark_spec, RegionPlan, Scene};

const CONFIG: &str = "\
# synthetic 12-class benchmark scene
image = scene.hdr
regions = regions.txt
out = out
rule = ed
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "demo".into()));
    let seed = std::env::args()
        .nth(2)
        .and_then(|s| s.parse().ok())
        .unwrap_or(1);
    fs::create_dir_all(&dir)?;

    let scene = Scene::generate(&benchmark_spec(seed))?;
    let regions = scene.plan_regions(&RegionPlan::small())?;
    save_bsq(&scene.raster, &dir.join("scene.hdr"))?;
    fs::write(dir.join("regions.txt"), format_regions(&regions))?;
    fs::write(dir.join("pipeline.cfg"), CONFIG)?;
    println!(
        "wrote a {}x{} {}-band scene with {} regions to {}",
        scene.raster.width(),
        scene.raster.height(),
        scene.raster.bands(),
        regions.len(),
        dir.display()
    );
    Ok(())
}
