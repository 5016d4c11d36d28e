//! The four discriminant functions and the decision rule that applies them
//! to every pixel.
//!
//! Distance rules (Mahalanobis, Euclidean) pick the smallest score, the
//! maximum-likelihood rule the largest. Classes are visited in ascending id
//! order and only a strictly better score displaces the incumbent, so ties
//! always go to the lowest class id.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;

use crate::classmap::{ClassMap, Legend};
use crate::error::{Error, Result};
use crate::raster::Raster;
use crate::region::ClassId;
use crate::training::{BoundMode, ClassSignature, SignatureSet};

/// How the parallelepiped rule settles a pixel inside several boxes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieBreak {
    /// Lowest class id among the containing boxes.
    FirstMatch,
    /// Nearest mean (Euclidean) among the containing boxes.
    #[default]
    NearestMean,
    /// Leave ambiguous pixels unclassified.
    Unclassified,
}

impl fmt::Display for TieBreak {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TieBreak::FirstMatch => "first_match",
            TieBreak::NearestMean => "nearest_mean",
            TieBreak::Unclassified => "unclassified",
        })
    }
}

impl FromStr for TieBreak {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "first_match" => Ok(TieBreak::FirstMatch),
            "nearest_mean" => Ok(TieBreak::NearestMean),
            "unclassified" => Ok(TieBreak::Unclassified),
            other => Err(Error::Config(format!(
                "pp_tie_break must be first_match, nearest_mean or unclassified, found {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RuleKind {
    Parallelepiped,
    Mahalanobis,
    MaxLikelihood,
    Euclidean,
}

impl RuleKind {
    pub const ALL: [RuleKind; 4] = [
        RuleKind::Parallelepiped,
        RuleKind::Mahalanobis,
        RuleKind::MaxLikelihood,
        RuleKind::Euclidean,
    ];

    pub fn short_name(self) -> &'static str {
        match self {
            RuleKind::Parallelepiped => "pp",
            RuleKind::Mahalanobis => "md",
            RuleKind::MaxLikelihood => "ml",
            RuleKind::Euclidean => "ed",
        }
    }

    pub fn uses_covariance(self) -> bool {
        matches!(self, RuleKind::Mahalanobis | RuleKind::MaxLikelihood)
    }
}

impl fmt::Display for RuleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for RuleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pp" | "parallelepiped" => Ok(RuleKind::Parallelepiped),
            "md" | "mahalanobis" => Ok(RuleKind::Mahalanobis),
            "ml" | "max_likelihood" => Ok(RuleKind::MaxLikelihood),
            "ed" | "euclidean" => Ok(RuleKind::Euclidean),
            other => Err(Error::Config(format!(
                "rule must be one of pp, md, ml, ed; found {other:?}"
            ))),
        }
    }
}

/// A discriminant plus exactly the parameters it needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecisionRule {
    Parallelepiped {
        bounds: BoundMode,
        tie_break: TieBreak,
    },
    Mahalanobis,
    MaxLikelihood {
        use_priors: bool,
    },
    Euclidean,
}

impl DecisionRule {
    pub fn kind(&self) -> RuleKind {
        match self {
            DecisionRule::Parallelepiped { .. } => RuleKind::Parallelepiped,
            DecisionRule::Mahalanobis => RuleKind::Mahalanobis,
            DecisionRule::MaxLikelihood { .. } => RuleKind::MaxLikelihood,
            DecisionRule::Euclidean => RuleKind::Euclidean,
        }
    }

    /// Checks rule parameters against the signatures they will be used with.
    pub fn validate(&self, signatures: &SignatureSet) -> Result<()> {
        match *self {
            DecisionRule::Parallelepiped {
                bounds: BoundMode::KSigma { k },
                ..
            } if !(k > 0.0 && k.is_finite()) => {
                Err(Error::Parameter(format!("k must be positive, got {k}")))
            }
            DecisionRule::MaxLikelihood { use_priors: true } if !signatures.has_priors() => Err(
                Error::Config("use_priors is set but the signatures carry no priors".into()),
            ),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for DecisionRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DecisionRule::Parallelepiped {
                bounds: BoundMode::MinMax,
                tie_break,
            } => write!(f, "pp (minmax, {tie_break})"),
            DecisionRule::Parallelepiped {
                bounds: BoundMode::KSigma { k },
                tie_break,
            } => write!(f, "pp (k_sigma k={k}, {tie_break})"),
            DecisionRule::MaxLikelihood { use_priors: true } => f.write_str("ml (priors)"),
            other => f.write_str(other.kind().short_name()),
        }
    }
}

fn check_dim(sig: &ClassSignature, x: &[f64]) -> Result<()> {
    if sig.dimension() == x.len() {
        Ok(())
    } else {
        Err(Error::Shape(format!(
            "pixel has {} bands, class {} signature has {}",
            x.len(),
            sig.class_id,
            sig.dimension()
        )))
    }
}

fn finite(sig: &ClassSignature, what: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Numeric(format!(
            "class {}: {what} score is not finite",
            sig.class_id
        )))
    }
}

/// Lower and upper corner of the class box under `bounds`.
pub fn box_bounds(sig: &ClassSignature, bounds: BoundMode) -> (Vec<f64>, Vec<f64>) {
    match bounds {
        BoundMode::MinMax => (sig.band_min.clone(), sig.band_max.clone()),
        BoundMode::KSigma { k } => (
            sig.mean
                .iter()
                .zip(&sig.band_std)
                .map(|(m, s)| m - k * s)
                .collect(),
            sig.mean
                .iter()
                .zip(&sig.band_std)
                .map(|(m, s)| m + k * s)
                .collect(),
        ),
    }
}

#[inline]
fn inside_box(sig: &ClassSignature, bounds: BoundMode, x: &[f64]) -> bool {
    match bounds {
        BoundMode::MinMax => x
            .iter()
            .zip(sig.band_min.iter().zip(&sig.band_max))
            .all(|(v, (lo, hi))| lo <= v && v <= hi),
        BoundMode::KSigma { k } => x
            .iter()
            .zip(sig.mean.iter().zip(&sig.band_std))
            .all(|(v, (m, s))| m - k * s <= *v && *v <= m + k * s),
    }
}

#[inline]
fn mahalanobis_unchecked(sig: &ClassSignature, x: &[f64]) -> f64 {
    let d = x.len();
    let inv = sig.inv_covariance.as_slice();
    let mut acc = 0.0;
    for i in 0..d {
        let di = x[i] - sig.mean[i];
        let row = &inv[i * d..(i + 1) * d];
        let mut dot = 0.0;
        for j in 0..d {
            dot += row[j] * (x[j] - sig.mean[j]);
        }
        acc += di * dot;
    }
    acc
}

#[inline]
fn squared_euclidean_unchecked(sig: &ClassSignature, x: &[f64]) -> f64 {
    x.iter()
        .zip(&sig.mean)
        .map(|(v, m)| (v - m) * (v - m))
        .sum()
}

#[inline]
fn max_likelihood_unchecked(sig: &ClassSignature, x: &[f64], use_priors: bool) -> f64 {
    let md = mahalanobis_unchecked(sig, x);
    if use_priors {
        sig.prior.ln() + 0.5 * sig.neg_log_det - 0.5 * md
    } else {
        sig.neg_log_det - md
    }
}

/// Whether `x` lies inside the class box, bounds inclusive.
pub fn score_parallelepiped(sig: &ClassSignature, x: &[f64], bounds: BoundMode) -> Result<bool> {
    check_dim(sig, x)?;
    Ok(inside_box(sig, bounds, x))
}

/// `(x - μ)ᵀ Σ⁻¹ (x - μ)`.
pub fn score_mahalanobis(sig: &ClassSignature, x: &[f64]) -> Result<f64> {
    check_dim(sig, x)?;
    finite(sig, "Mahalanobis", mahalanobis_unchecked(sig, x))
}

/// Gaussian log-likelihood discriminant.
///
/// Without priors: `-ln|Σ| - d²`. With priors:
/// `ln p(ω) - ½ ln|Σ| - ½ d²`, which ranks classes identically when all
/// priors are equal.
pub fn score_max_likelihood(sig: &ClassSignature, x: &[f64], use_priors: bool) -> Result<f64> {
    check_dim(sig, x)?;
    if use_priors && !(sig.prior > 0.0 && sig.prior <= 1.0) {
        return Err(Error::Config(format!(
            "class {}: prior {} is not a probability",
            sig.class_id, sig.prior
        )));
    }
    finite(
        sig,
        "maximum-likelihood",
        max_likelihood_unchecked(sig, x, use_priors),
    )
}

/// Euclidean distance from `x` to the class mean.
pub fn score_euclidean(sig: &ClassSignature, x: &[f64]) -> Result<f64> {
    check_dim(sig, x)?;
    finite(sig, "Euclidean", squared_euclidean_unchecked(sig, x).sqrt())
}

/// Assigns one pixel. `None` means no parallelepiped claimed it.
pub fn classify_pixel(
    rule: &DecisionRule,
    signatures: &SignatureSet,
    x: &[f64],
) -> Result<Option<ClassId>> {
    if x.len() != signatures.dimension() {
        return Err(Error::Shape(format!(
            "pixel has {} bands, signatures have {}",
            x.len(),
            signatures.dimension()
        )));
    }
    assign(rule, signatures.as_slice(), x)
}

fn argmin(
    sigs: &[ClassSignature],
    x: &[f64],
    what: &str,
    score: impl Fn(&ClassSignature, &[f64]) -> f64,
) -> Result<Option<ClassId>> {
    let mut best: Option<(f64, ClassId)> = None;
    for sig in sigs {
        let s = finite(sig, what, score(sig, x))?;
        if best.is_none_or(|(b, _)| s < b) {
            best = Some((s, sig.class_id));
        }
    }
    Ok(best.map(|(_, id)| id))
}

fn assign(rule: &DecisionRule, sigs: &[ClassSignature], x: &[f64]) -> Result<Option<ClassId>> {
    match *rule {
        DecisionRule::Mahalanobis => argmin(sigs, x, "Mahalanobis", mahalanobis_unchecked),
        DecisionRule::Euclidean => argmin(sigs, x, "Euclidean", squared_euclidean_unchecked),
        DecisionRule::MaxLikelihood { use_priors } => {
            argmin(sigs, x, "maximum-likelihood", |s, x| {
                -max_likelihood_unchecked(s, x, use_priors)
            })
        }
        DecisionRule::Parallelepiped { bounds, tie_break } => {
            let mut containing = sigs.iter().filter(|s| inside_box(s, bounds, x));
            let Some(first) = containing.next() else {
                return Ok(None);
            };
            match tie_break {
                TieBreak::FirstMatch => Ok(Some(first.class_id)),
                TieBreak::Unclassified => Ok(containing.next().is_none().then_some(first.class_id)),
                TieBreak::NearestMean => {
                    let mut best = (squared_euclidean_unchecked(first, x), first.class_id);
                    for sig in containing {
                        let s = finite(sig, "Euclidean", squared_euclidean_unchecked(sig, x))?;
                        if s < best.0 {
                            best = (s, sig.class_id);
                        }
                    }
                    Ok(Some(best.1))
                }
            }
        }
    }
}

/// Classifies every pixel of `raster` on the current rayon pool.
pub fn classify_raster(
    rule: &DecisionRule,
    signatures: &SignatureSet,
    raster: &Raster,
) -> Result<ClassMap> {
    if raster.bands() != signatures.dimension() {
        return Err(Error::Shape(format!(
            "raster has {} bands, signatures have {}",
            raster.bands(),
            signatures.dimension()
        )));
    }
    rule.validate(signatures)?;
    let started = Instant::now();
    let (w, h, d) = (raster.width(), raster.height(), raster.bands());
    let sigs = signatures.as_slice();
    let mut labels = vec![None; w * h];
    labels
        .par_chunks_mut(w)
        .enumerate()
        .try_for_each(|(y, row)| -> Result<()> {
            let mut x = vec![0.0; d];
            for (col, slot) in row.iter_mut().enumerate() {
                raster.fill_pixel(y * w + col, &mut x);
                *slot = assign(rule, sigs, &x)?;
            }
            Ok(())
        })?;
    log::info!(
        "classified {w}x{h} pixels with {rule} over {} classes in {:.3?}",
        signatures.len(),
        started.elapsed()
    );
    ClassMap::new(w, h, labels, Legend::with_defaults(signatures.class_ids()))
}

/// [`classify_raster`] on a dedicated pool of `threads` workers.
pub fn classify_raster_with_threads(
    rule: &DecisionRule,
    signatures: &SignatureSet,
    raster: &Raster,
    threads: usize,
) -> Result<ClassMap> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start {threads} worker threads: {e}")))?;
    pool.install(|| classify_raster(rule, signatures, raster))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use crate::raster::SampleType;
    use proptest::prelude::*;

    fn id(n: u8) -> ClassId {
        ClassId::new(n).unwrap()
    }

    fn sig(n: u8, mean: &[f64], cov: Matrix) -> ClassSignature {
        ClassSignature::from_moments(id(n), mean.to_vec(), cov, 1e-9).unwrap()
    }

    fn boxed(n: u8, lo: &[f64], hi: &[f64]) -> ClassSignature {
        let mean: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| (a + b) / 2.0).collect();
        let mut s = sig(n, &mean, Matrix::identity(lo.len()));
        s.band_min = lo.to_vec();
        s.band_max = hi.to_vec();
        s
    }

    const MINMAX: DecisionRule = DecisionRule::Parallelepiped {
        bounds: BoundMode::MinMax,
        tie_break: TieBreak::NearestMean,
    };

    #[test]
    fn parallelepiped_membership() {
        let s = boxed(0, &[0.0, 0.0], &[10.0, 10.0]);
        assert!(score_parallelepiped(&s, &[5.0, 5.0], BoundMode::MinMax).unwrap());
        assert!(score_parallelepiped(&s, &[10.0, 0.0], BoundMode::MinMax).unwrap());
        assert!(!score_parallelepiped(&s, &[10.0001, 5.0], BoundMode::MinMax).unwrap());
        assert!(matches!(
            score_parallelepiped(&s, &[1.0], BoundMode::MinMax),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn mahalanobis_values() {
        let s = sig(0, &[0.0, 0.0], Matrix::identity(2));
        assert_eq!(score_mahalanobis(&s, &[3.0, 4.0]).unwrap(), 25.0);
        assert_eq!(score_mahalanobis(&s, &[0.0, 0.0]).unwrap(), 0.0);
        let s = sig(0, &[0.0, 0.0], Matrix::diagonal(&[4.0, 1.0]));
        assert!((score_mahalanobis(&s, &[2.0, 0.0]).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn max_likelihood_values() {
        let s = sig(0, &[1.0, 2.0], Matrix::identity(2));
        assert_eq!(score_max_likelihood(&s, &[1.0, 2.0], false).unwrap(), 0.0);
        let e = std::f64::consts::E;
        let s = sig(0, &[0.0, 0.0], Matrix::diagonal(&[e, e]));
        assert!((score_max_likelihood(&s, &[0.0, 0.0], false).unwrap() + 2.0).abs() < 1e-15);
        let mut with_prior = s.clone();
        with_prior.prior = 0.5;
        let expected = 0.5_f64.ln() + 0.5 * -2.0;
        assert!(
            (score_max_likelihood(&with_prior, &[0.0, 0.0], true).unwrap() - expected).abs()
                < 1e-15
        );
        with_prior.prior = 0.0;
        assert!(matches!(
            score_max_likelihood(&with_prior, &[0.0, 0.0], true),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn euclidean_values() {
        let s = sig(0, &[0.0, 0.0], Matrix::identity(2));
        assert_eq!(score_euclidean(&s, &[3.0, 4.0]).unwrap(), 5.0);
        assert_eq!(score_euclidean(&s, &[0.0, 0.0]).unwrap(), 0.0);
        assert!(matches!(score_euclidean(&s, &[0.0]), Err(Error::Shape(_))));
    }

    #[test]
    fn nearer_mean_wins() {
        let set = SignatureSet::new(vec![
            sig(1, &[0.0], Matrix::identity(1)),
            sig(2, &[10.0], Matrix::identity(1)),
        ])
        .unwrap();
        assert_eq!(
            classify_pixel(&DecisionRule::Euclidean, &set, &[2.0]).unwrap(),
            Some(id(1))
        );
        assert_eq!(
            classify_pixel(&DecisionRule::Mahalanobis, &set, &[7.0]).unwrap(),
            Some(id(2))
        );
        // exact midpoint: lowest class id
        assert_eq!(
            classify_pixel(&DecisionRule::Euclidean, &set, &[5.0]).unwrap(),
            Some(id(1))
        );
        assert!(matches!(
            classify_pixel(&DecisionRule::Euclidean, &set, &[1.0, 2.0]),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn parallelepiped_outside_and_overlap() {
        let set =
            SignatureSet::new(vec![boxed(0, &[0.0], &[10.0]), boxed(1, &[6.0], &[12.0])]).unwrap();
        assert_eq!(classify_pixel(&MINMAX, &set, &[20.0]).unwrap(), None);
        assert_eq!(classify_pixel(&MINMAX, &set, &[3.0]).unwrap(), Some(id(0)));
        // overlap [6, 10]: means at 5 and 9
        assert_eq!(classify_pixel(&MINMAX, &set, &[8.0]).unwrap(), Some(id(1)));
        let first = DecisionRule::Parallelepiped {
            bounds: BoundMode::MinMax,
            tie_break: TieBreak::FirstMatch,
        };
        assert_eq!(classify_pixel(&first, &set, &[8.0]).unwrap(), Some(id(0)));
        let strict = DecisionRule::Parallelepiped {
            bounds: BoundMode::MinMax,
            tie_break: TieBreak::Unclassified,
        };
        assert_eq!(classify_pixel(&strict, &set, &[8.0]).unwrap(), None);
        assert_eq!(classify_pixel(&strict, &set, &[11.0]).unwrap(), Some(id(1)));
    }

    #[test]
    fn k_sigma_boxes() {
        let mut s = sig(0, &[2.0], Matrix::identity(1));
        s.band_std = vec![2.0_f64.sqrt()];
        let set = SignatureSet::new(vec![s]).unwrap();
        let rule = DecisionRule::Parallelepiped {
            bounds: BoundMode::KSigma { k: 1.0 },
            tie_break: TieBreak::FirstMatch,
        };
        assert_eq!(classify_pixel(&rule, &set, &[3.4]).unwrap(), Some(id(0)));
        assert_eq!(classify_pixel(&rule, &set, &[3.5]).unwrap(), None);
        let bad = DecisionRule::Parallelepiped {
            bounds: BoundMode::KSigma { k: -1.0 },
            tie_break: TieBreak::FirstMatch,
        };
        assert!(bad.validate(&set).is_err());
    }

    #[test]
    fn priors_required_when_requested() {
        let set = SignatureSet::new(vec![sig(0, &[0.0], Matrix::identity(1))]).unwrap();
        let r = Raster::zeros(2, 2, 1, SampleType::U8).unwrap();
        let err = classify_raster(&DecisionRule::MaxLikelihood { use_priors: true }, &set, &r);
        assert!(matches!(err, Err(Error::Config(_))));
    }

    #[test]
    fn constant_raster_at_a_mean() {
        let set = SignatureSet::new(vec![
            sig(1, &[10.0, 10.0, 10.0], Matrix::diagonal(&[4.0, 4.0, 4.0])),
            sig(2, &[50.0, 60.0, 70.0], Matrix::identity(3)),
        ])
        .unwrap();
        let mut samples = vec![50.0; 16];
        samples.extend([60.0; 16]);
        samples.extend([70.0; 16]);
        let r = Raster::new(4, 4, 3, SampleType::U8, samples).unwrap();
        for rule in [
            DecisionRule::Mahalanobis,
            DecisionRule::MaxLikelihood { use_priors: false },
            DecisionRule::Euclidean,
        ] {
            let map = classify_raster(&rule, &set, &r).unwrap();
            assert!(map.labels().iter().all(|l| *l == Some(id(2))), "{rule}");
        }
        let wrong = Raster::zeros(4, 4, 2, SampleType::U8).unwrap();
        assert!(matches!(
            classify_raster(&DecisionRule::Euclidean, &set, &wrong),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn rule_names() {
        for kind in RuleKind::ALL {
            assert_eq!(kind.short_name().parse::<RuleKind>().unwrap(), kind);
        }
        assert!("svm".parse::<RuleKind>().is_err());
        assert_eq!(
            "nearest_mean".parse::<TieBreak>().unwrap(),
            TieBreak::NearestMean
        );
    }

    fn random_set(means: Vec<Vec<f64>>, diag: Vec<Vec<f64>>) -> SignatureSet {
        let sigs = means
            .into_iter()
            .zip(diag)
            .enumerate()
            .map(|(i, (m, d))| sig(i as u8, &m, Matrix::diagonal(&d)))
            .collect();
        SignatureSet::new(sigs).unwrap()
    }

    proptest! {
        #[test]
        fn box_check_matches_interval_oracle(
            lo in prop::collection::vec(-10.0f64..10.0, 3),
            span in prop::collection::vec(0.0f64..5.0, 3),
            x in prop::collection::vec(-12.0f64..16.0, 3),
        ) {
            let hi: Vec<f64> = lo.iter().zip(&span).map(|(a, s)| a + s).collect();
            let s = boxed(0, &lo, &hi);
            let mut oracle = true;
            for b in 0..3 {
                if x[b] < lo[b] || x[b] > hi[b] {
                    oracle = false;
                }
            }
            prop_assert_eq!(score_parallelepiped(&s, &x, BoundMode::MinMax).unwrap(), oracle);
        }

        #[test]
        fn squared_euclidean_is_identity_mahalanobis(
            mean in prop::collection::vec(-50.0f64..50.0, 4),
            x in prop::collection::vec(-50.0f64..50.0, 4),
        ) {
            let s = sig(0, &mean, Matrix::identity(4));
            let ed = score_euclidean(&s, &x).unwrap();
            let md = score_mahalanobis(&s, &x).unwrap();
            prop_assert!((ed * ed - md).abs() <= 1e-9 * (1.0 + md));
        }

        #[test]
        fn translation_leaves_decisions_unchanged(
            means in prop::collection::vec(prop::collection::vec(-20.0f64..20.0, 2), 3),
            diag in prop::collection::vec(prop::collection::vec(0.5f64..4.0, 2), 3),
            x in prop::collection::vec(-25.0f64..25.0, 2),
            shift in prop::collection::vec(-8.0f64..8.0, 2),
        ) {
            let base = random_set(means.clone(), diag.clone());
            let moved_means = means.iter().map(|m| vec![m[0] + shift[0], m[1] + shift[1]]).collect();
            let moved = random_set(moved_means, diag);
            let mx = [x[0] + shift[0], x[1] + shift[1]];
            for rule in [DecisionRule::Mahalanobis, DecisionRule::MaxLikelihood { use_priors: false }, DecisionRule::Euclidean] {
                let a = classify_pixel(&rule, &base, &x).unwrap();
                let b = classify_pixel(&rule, &moved, &mx).unwrap();
                prop_assert_eq!(a, b, "{}", rule);
            }
        }
    }
}
