//! Synthetic multispectral scenes with known ground truth.
//!
//! A scene is a grid of square fields, each belonging to one class. A pixel
//! is the class mean, plus an offset shared by its whole field, plus
//! per-pixel noise:
//!
//! ```text
//! x = μ_c + o_field + e_pixel,   o ~ N(0, field_cov_c),   e ~ N(0, pixel_cov_c)
//! ```
//!
//! so each class is Gaussian with covariance `field_cov + pixel_cov`, but the
//! pixels of one small training patch only see `pixel_cov` around a single
//! field offset. That gap between patch statistics and class statistics is
//! what small training regions get wrong.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use std::collections::BTreeMap;

use crate::accuracy::{build_error_matrix, AccuracyReport};
use crate::classifiers::{classify_raster, DecisionRule};
use crate::classmap::{ClassMap, Legend};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::raster::{Raster, SampleType};
use crate::region::{ClassId, Purpose, Region};
use crate::training::TrainingSet;

#[derive(Debug, Clone)]
pub struct ClassModel {
    pub mean: Vec<f64>,
    /// Covariance of the offset shared by all pixels of a field.
    pub field_cov: Matrix,
    /// Covariance of independent per-pixel noise.
    pub pixel_cov: Matrix,
}

impl ClassModel {
    /// Covariance of a single pixel drawn from the class.
    pub fn total_cov(&self) -> Matrix {
        let n = self.mean.len();
        let data = self
            .field_cov
            .as_slice()
            .iter()
            .zip(self.pixel_cov.as_slice())
            .map(|(a, b)| a + b)
            .collect();
        Matrix::from_row_major(n, data).expect("same dimension")
    }
}

#[derive(Debug, Clone)]
pub struct SceneSpec {
    pub classes: Vec<ClassModel>,
    /// Side of a square field in pixels.
    pub field_size: usize,
    pub fields_x: usize,
    pub fields_y: usize,
    pub seed: u64,
}

/// Where training and assessment regions are drawn.
#[derive(Debug, Clone, Copy)]
pub struct RegionPlan {
    pub region_size: usize,
    pub training_per_class: usize,
    pub assessment_per_class: usize,
    /// Fields of each class reserved for assessment; training never touches them.
    pub assessment_fields_per_class: usize,
    pub seed: u64,
}

impl RegionPlan {
    /// Five 4x4 training and five 4x4 assessment regions per class.
    pub fn small() -> Self {
        RegionPlan {
            region_size: 4,
            training_per_class: 5,
            assessment_per_class: 5,
            assessment_fields_per_class: 5,
            seed: 7,
        }
    }

    /// A hundred 4x4 training patches per class, one per field, for use
    /// with [`control_spec`].
    pub fn large() -> Self {
        RegionPlan {
            region_size: 4,
            training_per_class: 100,
            assessment_per_class: 20,
            assessment_fields_per_class: 20,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Scene {
    pub raster: Raster,
    pub truth: ClassMap,
    field_size: usize,
    fields_x: usize,
    /// Class of each field, row-major.
    field_classes: Vec<ClassId>,
}

fn factor(cov: &Matrix) -> Result<Matrix> {
    if cov.as_slice().iter().all(|&v| v == 0.0) {
        return Ok(Matrix::zeros(cov.dim()));
    }
    cov.cholesky()
        .ok_or_else(|| Error::Parameter("scene covariance is not positive definite".into()))
}

fn correlated(rng: &mut ChaCha8Rng, l: &Matrix, out: &mut [f64]) {
    let d = l.dim();
    let z: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
    for i in 0..d {
        out[i] = (0..=i).map(|k| l[(i, k)] * z[k]).sum();
    }
}

impl Scene {
    pub fn generate(spec: &SceneSpec) -> Result<Scene> {
        let m = spec.classes.len();
        if m == 0 || m > ClassId::MAX as usize + 1 {
            return Err(Error::Parameter(format!(
                "scene needs 1..=255 classes, got {m}"
            )));
        }
        let d = spec.classes[0].mean.len();
        if spec
            .classes
            .iter()
            .any(|c| c.mean.len() != d || c.field_cov.dim() != d || c.pixel_cov.dim() != d)
        {
            return Err(Error::Shape("class models disagree on band count".into()));
        }
        let n_fields = spec.fields_x * spec.fields_y;
        if spec.field_size == 0 || n_fields < m {
            return Err(Error::Parameter(format!(
                "{n_fields} fields cannot hold {m} classes"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let mut field_classes: Vec<ClassId> = (0..n_fields)
            .map(|i| ClassId::new((i % m) as u8).expect("checked above"))
            .collect();
        field_classes.shuffle(&mut rng);

        let factors = spec
            .classes
            .iter()
            .map(|c| Ok((factor(&c.field_cov)?, factor(&c.pixel_cov)?)))
            .collect::<Result<Vec<_>>>()?;

        let (w, h) = (
            spec.fields_x * spec.field_size,
            spec.fields_y * spec.field_size,
        );
        let plane = w * h;
        let mut samples = vec![0.0; plane * d];
        let mut labels = vec![None; plane];
        let mut offset = vec![0.0; d];
        let mut noise = vec![0.0; d];
        for (f, &class) in field_classes.iter().enumerate() {
            let model = &spec.classes[class.get() as usize];
            let (field_l, pixel_l) = &factors[class.get() as usize];
            correlated(&mut rng, field_l, &mut offset);
            let (fx, fy) = (f % spec.fields_x, f / spec.fields_x);
            for y in fy * spec.field_size..(fy + 1) * spec.field_size {
                for x in fx * spec.field_size..(fx + 1) * spec.field_size {
                    correlated(&mut rng, pixel_l, &mut noise);
                    let i = y * w + x;
                    for b in 0..d {
                        samples[b * plane + i] = model.mean[b] + offset[b] + noise[b];
                    }
                    labels[i] = Some(class);
                }
            }
        }
        let raster = Raster::new(w, h, d, SampleType::F32, samples)?;
        let legend = Legend::with_defaults((0..m).map(|i| ClassId::new(i as u8).expect("checked")));
        let truth = ClassMap::new(w, h, labels, legend)?;
        Ok(Scene {
            raster,
            truth,
            field_size: spec.field_size,
            fields_x: spec.fields_x,
            field_classes,
        })
    }

    pub fn class_count(&self) -> usize {
        self.truth.legend().len()
    }

    /// Field indices of `class`, row-major.
    pub fn fields_of(&self, class: ClassId) -> Vec<usize> {
        (0..self.field_classes.len())
            .filter(|&f| self.field_classes[f] == class)
            .collect()
    }

    fn field_origin(&self, field: usize) -> (usize, usize) {
        (
            (field % self.fields_x) * self.field_size,
            (field / self.fields_x) * self.field_size,
        )
    }

    /// Training and assessment regions per `plan`. Assessment regions sit in
    /// fields reserved for them; training regions are spread over the
    /// remaining fields, one region per field while fields last.
    pub fn plan_regions(&self, plan: &RegionPlan) -> Result<Vec<Region>> {
        let size = plan.region_size;
        if size == 0 || size > self.field_size {
            return Err(Error::Parameter(format!(
                "region size {size} does not fit a {}-pixel field",
                self.field_size
            )));
        }
        let slots_per_side = self.field_size / size;
        let slots_per_field = slots_per_side * slots_per_side;
        let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
        let mut regions = Vec::new();
        for class in self.truth.legend().ids() {
            let mut fields = self.fields_of(class);
            fields.shuffle(&mut rng);
            if fields.len() <= plan.assessment_fields_per_class
                || plan.assessment_fields_per_class == 0
            {
                return Err(Error::Parameter(format!(
                    "class {class} has {} fields; {} are reserved for assessment",
                    fields.len(),
                    plan.assessment_fields_per_class
                )));
            }
            let (assess_fields, train_fields) = fields.split_at(plan.assessment_fields_per_class);
            let mut place = |fields: &[usize], count: usize, purpose: Purpose| -> Result<()> {
                if count > fields.len() * slots_per_field {
                    return Err(Error::Parameter(format!(
                        "class {class}: {count} {purpose} regions do not fit in {} fields",
                        fields.len()
                    )));
                }
                let mut slots: Vec<Vec<usize>> = fields
                    .iter()
                    .map(|_| {
                        let mut s: Vec<usize> = (0..slots_per_field).collect();
                        s.shuffle(&mut rng);
                        s
                    })
                    .collect();
                for k in 0..count {
                    let fi = k % fields.len();
                    let slot = slots[fi].pop().expect("capacity checked");
                    let (ox, oy) = self.field_origin(fields[fi]);
                    let x = ox + (slot % slots_per_side) * size;
                    let y = oy + (slot / slots_per_side) * size;
                    regions.push(Region::new(class, x, y, size, size, purpose)?);
                }
                Ok(())
            };
            place(train_fields, plan.training_per_class, Purpose::Training)?;
            place(
                assess_fields,
                plan.assessment_per_class,
                Purpose::Assessment,
            )?;
        }
        Ok(regions)
    }

    /// Trains on the training regions, classifies the whole scene with
    /// `rule` and scores it on the assessment regions.
    pub fn evaluate(
        &self,
        rule: DecisionRule,
        regions: &[Region],
        epsilon: f64,
    ) -> Result<AccuracyReport> {
        let training = TrainingSet::from_regions(&self.raster, regions)?;
        let signatures =
            training.signatures(epsilon, &BTreeMap::new(), rule.kind().uses_covariance())?;
        let map = classify_raster(&rule, &signatures, &self.raster)?;
        let assessment: Vec<Region> = regions
            .iter()
            .filter(|r| r.purpose == Purpose::Assessment)
            .copied()
            .collect();
        AccuracyReport::new(&build_error_matrix(&map, &assessment)?)
    }
}

/// The 12-class, 4-band benchmark scene.
///
/// Field offsets carry most of each class's variance and follow an
/// anisotropic, class-specific shape, while per-pixel noise is isotropic. A
/// handful of 4x4 training patches therefore sees mostly the noise. Classes 0/1 and
/// 2/3 share covariances and differ only in their means.
pub fn benchmark_spec(seed: u64) -> SceneSpec {
    benchmark_spec_with(seed, 16, 16, 12)
}

/// The benchmark classes on a 48x32 grid of 8-pixel fields, enough fields
/// for training data that captures each class's full covariance.
pub fn control_spec(seed: u64) -> SceneSpec {
    benchmark_spec_with(seed, 8, 48, 32)
}

/// Same class models on a finer field grid, for experiments that need many
/// independent fields per class.
pub fn benchmark_spec_with(
    seed: u64,
    field_size: usize,
    fields_x: usize,
    fields_y: usize,
) -> SceneSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed ^ seed);
    let d = 4;
    let m = 12;
    let min_separation = 30.0;
    let mut means: Vec<Vec<f64>> = Vec::with_capacity(m);
    while means.len() < m {
        let candidate: Vec<f64> = (0..d).map(|_| rng.random_range(40.0..200.0)).collect();
        let far_enough = means.iter().all(|other| {
            let dist2: f64 = other
                .iter()
                .zip(&candidate)
                .map(|(a, b)| (a - b).powi(2))
                .sum();
            dist2.sqrt() >= min_separation
        });
        if far_enough {
            means.push(candidate);
        }
    }

    let mut shapes: Vec<Matrix> = Vec::with_capacity(m);
    for c in 0..m {
        if c == 1 || c == 3 {
            // near-identical twin of the previous class
            let twin = shapes[c - 1].clone();
            let jitter = Matrix::diagonal(&vec![0.05; d]);
            shapes.push(add(&twin, &jitter));
            continue;
        }
        shapes.push(random_spd(&mut rng, d, 0.1, 2.5));
    }

    let classes = means
        .into_iter()
        .zip(shapes)
        .enumerate()
        .map(|(c, (mean, shape))| {
            // field offsets follow the class shape; sensor noise is isotropic
            let field_share = [
                0.85, 0.85, 0.9, 0.9, 0.8, 0.95, 0.7, 0.9, 0.75, 0.95, 0.85, 0.8,
            ][c];
            let total = shape.scaled(300.0);
            ClassModel {
                mean,
                field_cov: total.scaled(field_share),
                pixel_cov: Matrix::diagonal(&vec![
                    total.trace() / d as f64 * (1.0 - field_share);
                    d
                ]),
            }
        })
        .collect();
    SceneSpec {
        classes,
        field_size,
        fields_x,
        fields_y,
        seed,
    }
}

fn add(a: &Matrix, b: &Matrix) -> Matrix {
    let data = a
        .as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| x + y)
        .collect();
    Matrix::from_row_major(a.dim(), data).expect("same dimension")
}

/// `Q diag(λ) Qᵀ` with a random rotation and eigenvalues in `[lo, hi]`.
fn random_spd(rng: &mut ChaCha8Rng, d: usize, lo: f64, hi: f64) -> Matrix {
    // Gram-Schmidt on a Gaussian matrix gives a random orthonormal basis
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(d);
    while basis.len() < d {
        let mut v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        for u in &basis {
            let dot: f64 = v.iter().zip(u).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(u).for_each(|(a, b)| *a -= dot * b);
        }
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 1e-6 {
            basis.push(v.into_iter().map(|a| a / norm).collect());
        }
    }
    let eig: Vec<f64> = (0..d).map(|_| rng.random_range(lo..hi)).collect();
    let mut out = Matrix::zeros(d);
    for i in 0..d {
        for j in 0..d {
            out[(i, j)] = (0..d).map(|k| basis[k][i] * eig[k] * basis[k][j]).sum();
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generation_is_deterministic() {
        let spec = benchmark_spec(3);
        let a = Scene::generate(&spec).unwrap();
        let b = Scene::generate(&spec).unwrap();
        assert_eq!(a.raster, b.raster);
        assert_eq!(a.truth, b.truth);
        assert_eq!(
            (a.raster.width(), a.raster.height(), a.raster.bands()),
            (256, 192, 4)
        );
    }

    #[test]
    fn every_class_gets_fields() {
        let scene = Scene::generate(&benchmark_spec(1)).unwrap();
        for c in 0..12 {
            assert_eq!(scene.fields_of(ClassId::new(c).unwrap()).len(), 16);
        }
    }

    #[test]
    fn regions_land_on_their_class() {
        let scene = Scene::generate(&benchmark_spec(2)).unwrap();
        let regions = scene.plan_regions(&RegionPlan::small()).unwrap();
        assert_eq!(regions.len(), 12 * 10);
        for r in &regions {
            assert!(r
                .pixels()
                .all(|(x, y)| scene.truth.get(x, y) == Some(r.class_id)));
        }
        // assessment regions never share a field with training regions
        let field = |r: &Region| (r.x / 16, r.y / 16);
        for t in regions.iter().filter(|r| r.purpose == Purpose::Training) {
            for a in regions.iter().filter(|r| r.purpose == Purpose::Assessment) {
                assert_ne!(field(t), field(a));
            }
        }
    }

    #[test]
    fn pixel_statistics_follow_the_model() {
        let mut spec = benchmark_spec(5);
        spec.classes.truncate(1);
        spec.fields_x = 40;
        spec.fields_y = 40;
        spec.field_size = 2;
        let scene = Scene::generate(&spec).unwrap();
        let band = scene.raster.band(0);
        let n = band.len() as f64;
        let mean = band.iter().sum::<f64>() / n;
        let var = band.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let model = &spec.classes[0];
        let want_var = model.total_cov()[(0, 0)];
        // 1600 independent field offsets dominate the variance of the mean
        let se = (model.field_cov[(0, 0)] / 1600.0 + model.pixel_cov[(0, 0)] / n).sqrt();
        assert!(
            (mean - model.mean[0]).abs() < 4.0 * se,
            "{mean} vs {}",
            model.mean[0]
        );
        assert!((var / want_var - 1.0).abs() < 0.15, "{var} vs {want_var}");
    }
}
