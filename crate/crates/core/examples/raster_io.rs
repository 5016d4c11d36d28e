//! Reads and writes the two raster formats: binary PPM (P6) and
//! band-sequential (BSQ) with a text header.
//!
//! ```text
//! cargo run --example raster_io -- [image.ppm | image.hdr]
//! ```

use std::path::PathBuf;

use msclassify::raster::{decode_ppm, load_image, save_bsq, write_ppm};
use msclassify::{Raster, SampleType};

fn main() -> msclassify::Result<()> {
    let raster = match std::env::args().nth(1) {
        Some(path) => load_image(&PathBuf::from(path))?,
        None => gradient(),
    };
    println!("{}", raster.header());

    for b in 0..raster.bands() {
        let band = raster.band(b);
        let (lo, hi) = band
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        let mean = band.iter().sum::<f64>() / band.len() as f64;
        println!("band {b}: min {lo} max {hi} mean {mean:.3}");
    }

    let dir = std::env::temp_dir().join("msclassify-raster-io");
    std::fs::create_dir_all(&dir).map_err(|e| msclassify::Error::Config(e.to_string()))?;
    let header = dir.join("copy.hdr");
    save_bsq(&raster, &header)?;
    let back = load_image(&header)?;
    println!(
        "BSQ round trip through {}: {}",
        header.display(),
        back == raster
    );

    if raster.bands() == 3 && raster.sample_type() != SampleType::F32 {
        let again = decode_ppm(&write_ppm(&raster)?)?;
        println!("PPM round trip: {}", again == raster);
    }

    let unit = raster.normalized_minmax();
    println!("normalized sample range: {:?}", unit.header().sample_type);
    Ok(())
}

/// A small 3-band test card.
fn gradient() -> Raster {
    let (w, h) = (64, 32);
    let mut samples = Vec::with_capacity(w * h * 3);
    for b in 0..3 {
        for y in 0..h {
            for x in 0..w {
                samples.push(match b {
                    0 => (x * 4) as f64,
                    1 => (y * 8) as f64,
                    _ => ((x + y) % 256) as f64,
                });
            }
        }
    }
    Raster::new(w, h, 3, SampleType::U8, samples).expect("valid test card")
}
