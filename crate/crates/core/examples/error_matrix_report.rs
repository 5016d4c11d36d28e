//! Accuracy assessment from raw error-matrix counts: the proportion table,
//! producer's and user's accuracy, kappa and the key-value report.
//!
//! ```text
//! cargo run --example error_matrix_report
//! ```

use msclassify::{AccuracyReport, ClassId, ErrorMatrix, Legend, LegendEntry};

fn main() -> msclassify::Result<()> {
    let names = ["water", "forest", "crops", "urban"];
    let classes: Vec<ClassId> = (0..4).map(ClassId::new).collect::<Result<_, _>>()?;
    // rows: reference class; columns: assigned class, then unclassified
    let counts = vec![
        vec![76, 2, 0, 2, 0],
        vec![3, 61, 14, 0, 2],
        vec![0, 9, 70, 1, 0],
        vec![4, 0, 6, 54, 0],
    ];
    let em = ErrorMatrix::from_counts(classes.clone(), counts)?;
    let report = AccuracyReport::new(&em)?;

    let mut legend = Legend::with_defaults(classes.iter().copied());
    for (id, name) in classes.iter().zip(names) {
        let color = legend.get(*id).map(|e| e.color).unwrap_or_default();
        legend.insert(
            *id,
            LegendEntry {
                name: name.to_string(),
                color,
            },
        );
    }
    print!(
        "{}",
        report.to_table("Error matrix: example survey", &legend)
    );
    println!();
    print!("{}", report.to_key_values());
    Ok(())
}
