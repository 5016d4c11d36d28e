//! Class signatures estimated from labeled training regions.
//!
//! Every region of a class is pooled into one sample set before any
//! statistic is taken. Covariances use the unbiased `N - 1` divisor and are
//! diagonally loaded when numerically singular, so homogeneous training
//! patches still yield a usable inverse.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{cholesky_inverse_and_log_det, Matrix};
use crate::raster::{FeatureVector, Raster};
use crate::region::{ClassId, Purpose, Region};

pub const DEFAULT_EPSILON: f64 = 1e-6;

/// How parallelepiped bounds are derived from a class.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum BoundMode {
    /// Per-band minimum and maximum of the training samples.
    #[default]
    MinMax,
    /// `mean ± k·σ` per band, σ being the sample standard deviation.
    KSigma { k: f64 },
}

fn check_dimensions(samples: &[FeatureVector]) -> Result<usize> {
    let first = samples
        .first()
        .ok_or_else(|| Error::InsufficientData("no samples".into()))?;
    let d = first.len();
    if let Some(bad) = samples.iter().find(|s| s.len() != d) {
        return Err(Error::Shape(format!(
            "samples mix dimensions {d} and {}",
            bad.len()
        )));
    }
    Ok(d)
}

/// Componentwise arithmetic mean.
pub fn compute_mean(samples: &[FeatureVector]) -> Result<Vec<f64>> {
    let d = check_dimensions(samples)?;
    let mut mean = vec![0.0; d];
    for s in samples {
        for (m, v) in mean.iter_mut().zip(s.iter()) {
            *m += v;
        }
    }
    let n = samples.len() as f64;
    mean.iter_mut().for_each(|m| *m /= n);
    Ok(mean)
}

/// Unbiased sample covariance around `mean`.
pub fn compute_covariance(samples: &[FeatureVector], mean: &[f64]) -> Result<Matrix> {
    let d = check_dimensions(samples)?;
    if mean.len() != d {
        return Err(Error::Shape(format!(
            "mean has {} components, samples have {d}",
            mean.len()
        )));
    }
    if samples.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "covariance needs at least 2 samples, got {}",
            samples.len()
        )));
    }
    let mut cov = Matrix::zeros(d);
    let mut centered = vec![0.0; d];
    for s in samples {
        for (c, (v, m)) in centered.iter_mut().zip(s.iter().zip(mean)) {
            *c = v - m;
        }
        for i in 0..d {
            for j in i..d {
                cov[(i, j)] += centered[i] * centered[j];
            }
        }
    }
    let denom = (samples.len() - 1) as f64;
    for i in 0..d {
        for j in i..d {
            let v = cov[(i, j)] / denom;
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }
    Ok(cov)
}

/// Result of [`regularize_and_invert`].
#[derive(Debug, Clone, PartialEq)]
pub struct Inversion {
    pub inverse: Matrix,
    /// `-ln|Σ|` of the (possibly loaded) matrix.
    pub neg_log_det: f64,
    /// Amount added to the diagonal, when loading was needed.
    pub loading: Option<f64>,
}

/// Inverts a covariance matrix, first adding `epsilon·trace/d` to the
/// diagonal (or `epsilon` when the trace is zero) if any eigenvalue falls
/// below `epsilon·trace/d`.
pub fn regularize_and_invert(cov: &Matrix, epsilon: f64) -> Result<Inversion> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::Parameter(format!(
            "regularization epsilon must be positive, got {epsilon}"
        )));
    }
    if !cov.is_finite() {
        return Err(Error::Numeric("covariance has non-finite entries".into()));
    }
    if !cov.is_symmetric(1e-9) {
        return Err(Error::Numeric("covariance is not symmetric".into()));
    }
    let d = cov.dim();
    let trace = cov.trace();
    let threshold = epsilon * trace / d as f64;
    let loading = if trace > 0.0 { threshold } else { epsilon };

    let smallest = cov.symmetric_eigenvalues().first().copied().unwrap_or(0.0);
    let singular = !(trace > 0.0) || smallest < threshold;

    let factor = |loaded: bool| {
        if loaded {
            let mut m = cov.clone();
            m.add_to_diagonal(loading);
            m.cholesky()
        } else {
            cov.cholesky()
        }
    };
    let (l, loaded) = match factor(singular) {
        Some(l) => (l, singular),
        // Eigenvalues passed but the factorization still broke down.
        None if !singular => (factor(true).ok_or_else(not_psd)?, true),
        None => return Err(not_psd()),
    };
    let (inverse, log_det) = cholesky_inverse_and_log_det(&l);
    if !log_det.is_finite() || !inverse.is_finite() {
        return Err(Error::Numeric("covariance inverse is not finite".into()));
    }
    Ok(Inversion {
        inverse,
        neg_log_det: -log_det,
        loading: loaded.then_some(loading),
    })
}

fn not_psd() -> Error {
    Error::Numeric("covariance is not positive semi-definite".into())
}

fn sample_std(samples: &[FeatureVector], mean: &[f64]) -> Vec<f64> {
    let denom = (samples.len() - 1) as f64;
    (0..mean.len())
        .map(|b| {
            let ss: f64 = samples.iter().map(|s| (s[b] - mean[b]).powi(2)).sum();
            (ss / denom).sqrt()
        })
        .collect()
}

/// Per-band box `(lower, upper)` around the samples.
pub fn compute_bounds(samples: &[FeatureVector], mode: BoundMode) -> Result<(Vec<f64>, Vec<f64>)> {
    let d = check_dimensions(samples)?;
    match mode {
        BoundMode::MinMax => {
            let mut lo = vec![f64::INFINITY; d];
            let mut hi = vec![f64::NEG_INFINITY; d];
            for s in samples {
                for b in 0..d {
                    lo[b] = lo[b].min(s[b]);
                    hi[b] = hi[b].max(s[b]);
                }
            }
            Ok((lo, hi))
        }
        BoundMode::KSigma { k } => {
            if !(k > 0.0) || !k.is_finite() {
                return Err(Error::Parameter(format!("k must be positive, got {k}")));
            }
            if samples.len() < 2 {
                return Err(Error::InsufficientData(
                    "k-sigma bounds need at least 2 samples".into(),
                ));
            }
            let mean = compute_mean(samples)?;
            let std = sample_std(samples, &mean);
            let lo = mean.iter().zip(&std).map(|(m, s)| m - k * s).collect();
            let hi = mean.iter().zip(&std).map(|(m, s)| m + k * s).collect();
            Ok((lo, hi))
        }
    }
}

/// Per-class statistics consumed by every classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassSignature {
    pub class_id: ClassId,
    pub n_samples: usize,
    pub mean: Vec<f64>,
    pub covariance: Matrix,
    pub inv_covariance: Matrix,
    /// `-ln|Σ|`, cached for the maximum-likelihood discriminant.
    pub neg_log_det: f64,
    pub band_min: Vec<f64>,
    pub band_max: Vec<f64>,
    pub band_std: Vec<f64>,
    /// `p(ω)`; 1 when no prior was supplied.
    pub prior: f64,
    /// Whether diagonal loading fired while inverting the covariance.
    pub regularized: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignatureOptions {
    pub epsilon: f64,
    pub prior: Option<f64>,
    /// Fail with fewer than two samples instead of falling back to a zero
    /// covariance. Needed by every covariance-based rule.
    pub require_covariance: bool,
}

impl Default for SignatureOptions {
    fn default() -> Self {
        SignatureOptions {
            epsilon: DEFAULT_EPSILON,
            prior: None,
            require_covariance: true,
        }
    }
}

impl ClassSignature {
    pub fn dimension(&self) -> usize {
        self.mean.len()
    }

    pub fn from_samples(
        class_id: ClassId,
        samples: &[FeatureVector],
        options: &SignatureOptions,
    ) -> Result<Self> {
        let named = |e: Error| name_class(class_id, e);
        let mean = compute_mean(samples).map_err(named)?;
        let d = mean.len();
        let (covariance, band_std) = if samples.len() >= 2 {
            (
                compute_covariance(samples, &mean).map_err(named)?,
                sample_std(samples, &mean),
            )
        } else if options.require_covariance {
            return Err(named(Error::InsufficientData(format!(
                "covariance needs at least 2 samples, got {}",
                samples.len()
            ))));
        } else {
            (Matrix::zeros(d), vec![0.0; d])
        };
        let (band_min, band_max) = compute_bounds(samples, BoundMode::MinMax).map_err(named)?;
        let inv = regularize_and_invert(&covariance, options.epsilon).map_err(named)?;
        let prior = options.prior.unwrap_or(1.0);
        check_prior(class_id, prior)?;
        Ok(ClassSignature {
            class_id,
            n_samples: samples.len(),
            mean,
            covariance,
            inv_covariance: inv.inverse,
            neg_log_det: inv.neg_log_det,
            band_min,
            band_max,
            band_std,
            prior,
            regularized: inv.loading.is_some(),
        })
    }

    /// Signature from known moments; bounds collapse to `mean ± 3σ`.
    pub fn from_moments(
        class_id: ClassId,
        mean: Vec<f64>,
        covariance: Matrix,
        epsilon: f64,
    ) -> Result<Self> {
        if covariance.dim() != mean.len() {
            return Err(Error::Shape(format!(
                "class {class_id}: mean has {} components, covariance is {}x{}",
                mean.len(),
                covariance.dim(),
                covariance.dim()
            )));
        }
        if mean.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!("class {class_id}: non-finite mean")));
        }
        let inv =
            regularize_and_invert(&covariance, epsilon).map_err(|e| name_class(class_id, e))?;
        let band_std: Vec<f64> = (0..mean.len())
            .map(|b| covariance[(b, b)].max(0.0).sqrt())
            .collect();
        let band_min = mean
            .iter()
            .zip(&band_std)
            .map(|(m, s)| m - 3.0 * s)
            .collect();
        let band_max = mean
            .iter()
            .zip(&band_std)
            .map(|(m, s)| m + 3.0 * s)
            .collect();
        Ok(ClassSignature {
            class_id,
            n_samples: 0,
            mean,
            covariance,
            inv_covariance: inv.inverse,
            neg_log_det: inv.neg_log_det,
            band_min,
            band_max,
            band_std,
            prior: 1.0,
            regularized: inv.loading.is_some(),
        })
    }
}

fn check_prior(class_id: ClassId, prior: f64) -> Result<()> {
    if prior > 0.0 && prior <= 1.0 {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "class {class_id}: prior must lie in (0, 1], got {prior}"
        )))
    }
}

fn name_class(class_id: ClassId, e: Error) -> Error {
    match e {
        Error::InsufficientData(m) => Error::InsufficientData(format!("class {class_id}: {m}")),
        Error::Numeric(m) => Error::Numeric(format!("class {class_id}: {m}")),
        Error::Shape(m) => Error::Shape(format!("class {class_id}: {m}")),
        Error::Parameter(m) => Error::Parameter(format!("class {class_id}: {m}")),
        other => other,
    }
}

/// Pools the training regions of one class from `raster` into a signature.
pub fn build_signature(
    class_id: ClassId,
    regions: &[Region],
    raster: &Raster,
    options: &SignatureOptions,
) -> Result<ClassSignature> {
    if regions.is_empty() {
        return Err(Error::InsufficientData(format!(
            "class {class_id}: no training regions"
        )));
    }
    let mut samples = Vec::with_capacity(regions.iter().map(Region::area).sum());
    for r in regions {
        if r.class_id != class_id || r.purpose != Purpose::Training {
            return Err(Error::Parameter(format!(
                "region `{r}` is not a training region of class {class_id}"
            )));
        }
        samples.extend(raster.extract_region(r)?);
    }
    ClassSignature::from_samples(class_id, &samples, options)
}

/// Ordered signature collection sharing one dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct SignatureSet {
    signatures: Vec<ClassSignature>,
}

impl SignatureSet {
    /// Sorts by class id; rejects duplicates, mixed dimensions and invalid
    /// prior sets.
    pub fn new(mut signatures: Vec<ClassSignature>) -> Result<Self> {
        if signatures.is_empty() {
            return Err(Error::InsufficientData("no class signatures".into()));
        }
        signatures.sort_by_key(|s| s.class_id);
        for pair in signatures.windows(2) {
            if pair[0].class_id == pair[1].class_id {
                return Err(Error::Config(format!(
                    "class {} has two signatures",
                    pair[0].class_id
                )));
            }
        }
        let d = signatures[0].dimension();
        if let Some(bad) = signatures.iter().find(|s| s.dimension() != d) {
            return Err(Error::Shape(format!(
                "class {} has dimension {}, class {} has {d}",
                bad.class_id,
                bad.dimension(),
                signatures[0].class_id
            )));
        }
        let set = SignatureSet { signatures };
        set.check_priors()?;
        Ok(set)
    }

    fn check_priors(&self) -> Result<()> {
        for s in &self.signatures {
            check_prior(s.class_id, s.prior)?;
        }
        if self.has_priors() {
            let total: f64 = self.signatures.iter().map(|s| s.prior).sum();
            if (total - 1.0).abs() > 1e-9 {
                return Err(Error::Config(format!(
                    "class priors must sum to 1, they sum to {total}"
                )));
            }
        }
        Ok(())
    }

    /// True when priors were supplied, i.e. they are not all 1.
    pub fn has_priors(&self) -> bool {
        self.signatures.iter().any(|s| s.prior != 1.0)
    }

    pub fn dimension(&self) -> usize {
        self.signatures[0].dimension()
    }

    pub fn len(&self) -> usize {
        self.signatures.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signatures.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, ClassSignature> {
        self.signatures.iter()
    }

    pub fn as_slice(&self) -> &[ClassSignature] {
        &self.signatures
    }

    pub fn class_ids(&self) -> Vec<ClassId> {
        self.signatures.iter().map(|s| s.class_id).collect()
    }

    pub fn get(&self, class_id: ClassId) -> Option<&ClassSignature> {
        self.signatures
            .binary_search_by_key(&class_id, |s| s.class_id)
            .ok()
            .map(|i| &self.signatures[i])
    }

    pub fn into_vec(self) -> Vec<ClassSignature> {
        self.signatures
    }
}

impl<'a> IntoIterator for &'a SignatureSet {
    type Item = &'a ClassSignature;
    type IntoIter = std::slice::Iter<'a, ClassSignature>;

    fn into_iter(self) -> Self::IntoIter {
        self.signatures.iter()
    }
}

/// Training samples pooled per class.
#[derive(Debug, Clone, Default)]
pub struct TrainingSet {
    classes: BTreeMap<ClassId, Vec<FeatureVector>>,
}

impl TrainingSet {
    /// Pools every training-purpose region; assessment regions are ignored.
    pub fn from_regions(raster: &Raster, regions: &[Region]) -> Result<Self> {
        let mut classes: BTreeMap<ClassId, Vec<FeatureVector>> = BTreeMap::new();
        for r in regions.iter().filter(|r| r.purpose == Purpose::Training) {
            let samples = raster.extract_region(r)?;
            classes.entry(r.class_id).or_default().extend(samples);
        }
        if classes.is_empty() {
            return Err(Error::InsufficientData("no training regions".into()));
        }
        Ok(TrainingSet { classes })
    }

    pub fn class_ids(&self) -> impl Iterator<Item = ClassId> + '_ {
        self.classes.keys().copied()
    }

    pub fn samples(&self, class_id: ClassId) -> Option<&[FeatureVector]> {
        self.classes.get(&class_id).map(Vec::as_slice)
    }

    /// Builds one signature per class, in parallel across classes.
    pub fn signatures(
        &self,
        epsilon: f64,
        priors: &BTreeMap<ClassId, f64>,
        require_covariance: bool,
    ) -> Result<SignatureSet> {
        if let Some(unknown) = priors.keys().find(|id| !self.classes.contains_key(id)) {
            return Err(Error::Config(format!(
                "prior given for class {unknown}, which has no training regions"
            )));
        }
        if !priors.is_empty() && priors.len() != self.classes.len() {
            return Err(Error::Config(
                "priors must be given for every class or for none".into(),
            ));
        }
        let entries: Vec<_> = self.classes.iter().collect();
        let signatures = entries
            .par_iter()
            .map(|(&id, samples)| {
                let options = SignatureOptions {
                    epsilon,
                    prior: priors.get(&id).copied(),
                    require_covariance,
                };
                ClassSignature::from_samples(id, samples, &options)
            })
            .collect::<Result<Vec<_>>>()?;
        SignatureSet::new(signatures)
    }
}
