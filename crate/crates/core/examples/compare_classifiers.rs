//! Scores all four decision rules on the synthetic benchmark scene, once
//! with a few small training patches and once with plenty of training data.
//!
//! ```text
//! cargo run --release --example compare_classifiers -- [seed]
//! ```

use msclassify::scene::{benchmark_spec, control_spec, RegionPlan, Scene};
use msclassify::training::DEFAULT_EPSILON;
use msclassify::{BoundMode, DecisionRule, TieBreak};

fn main() -> msclassify::Result<()> {
    let seed: u64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(1);
    let rules = [
        DecisionRule::Parallelepiped {
            bounds: BoundMode::MinMax,
            tie_break: TieBreak::NearestMean,
        },
        DecisionRule::Mahalanobis,
        DecisionRule::MaxLikelihood { use_priors: false },
        DecisionRule::Euclidean,
    ];

    let scene = Scene::generate(&benchmark_spec(seed))?;
    let small = scene.plan_regions(&RegionPlan::small())?;

    let control = Scene::generate(&control_spec(seed))?;
    let large = control.plan_regions(&RegionPlan::large())?;

    println!("{:<28} {:>10} {:>10}", "rule", "small", "control");
    for rule in rules {
        let a = scene.evaluate(rule, &small, DEFAULT_EPSILON)?;
        let b = control.evaluate(rule, &large, DEFAULT_EPSILON)?;
        println!(
            "{:<28} {:>10.4} {:>10.4}",
            rule.to_string(),
            a.overall_mean_diag,
            b.overall_mean_diag
        );
    }
    Ok(())
}
