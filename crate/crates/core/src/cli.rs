//! Batch command-line front end.
//!
//! Every subcommand reads a [`PipelineConfig`], applies the command-line
//! overrides and writes its products into the output directory:
//!
//! | command    | writes                                                        |
//! |------------|---------------------------------------------------------------|
//! | `train`    | `signatures.txt`                                              |
//! | `classify` | `classmap_<rule>.hdr`, `classmap_<rule>.bsq`, `classmap_<rule>.ppm` |
//! | `assess`   | `report_<rule>.txt`, `report_<rule>.kv`                       |
//! | `run`      | all of the above                                              |

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::accuracy::{build_error_matrix, AccuracyReport};
use crate::classifiers::{classify_raster, classify_raster_with_threads, RuleKind};
use crate::classmap::ClassMap;
use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::raster::{load_bsq, load_image, save_bsq, save_ppm, Raster};
use crate::region::{load_regions, ClassId, Purpose, Region};
use crate::signature_file::{load_signatures, save_signatures};
use crate::training::{SignatureSet, TrainingSet};

#[derive(Debug, Parser)]
#[command(
    name = "msclassify",
    version,
    about = "Supervised classification of multispectral rasters"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub options: Options,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build class signatures from the training regions.
    Train,
    /// Classify the image with previously trained signatures.
    Classify,
    /// Build the error matrix of a class map over the assessment regions.
    Assess,
    /// Train, classify and assess in one go.
    Run,
}

#[derive(Debug, Args, Default)]
pub struct Options {
    /// Pipeline configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Decision rule, overriding the configuration.
    #[arg(long, global = true, value_name = "pp|md|ml|ed")]
    pub rule: Option<RuleKind>,

    /// Covariance regularization strength, overriding the configuration.
    #[arg(long, global = true, value_name = "REAL")]
    pub epsilon: Option<f64>,

    /// Worker threads for classification (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,

    /// Output directory, overriding the configuration.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

impl Options {
    /// Loads the configuration named by `--config` and applies the overrides.
    pub fn resolve(&self) -> Result<PipelineConfig> {
        let path = self
            .config
            .as_ref()
            .ok_or_else(|| Error::Config("--config <path> is required".into()))?;
        let mut cfg = PipelineConfig::load(path)?;
        if let Some(rule) = self.rule {
            cfg.rule = rule;
        }
        if let Some(epsilon) = self.epsilon {
            if !(epsilon > 0.0 && epsilon.is_finite()) {
                return Err(Error::Config(format!(
                    "--epsilon must be positive, found {epsilon}"
                )));
            }
            cfg.epsilon = epsilon;
        }
        if let Some(out) = &self.out {
            cfg.out_dir = out.clone();
        }
        if self.threads == Some(0) {
            return Err(Error::Config("--threads must be at least 1".into()));
        }
        Ok(cfg)
    }
}

pub fn classmap_path(cfg: &PipelineConfig) -> PathBuf {
    cfg.out_dir
        .join(format!("classmap_{}.hdr", cfg.rule.short_name()))
}

pub fn render_path(cfg: &PipelineConfig) -> PathBuf {
    cfg.out_dir
        .join(format!("classmap_{}.ppm", cfg.rule.short_name()))
}

pub fn report_path(cfg: &PipelineConfig) -> PathBuf {
    cfg.out_dir
        .join(format!("report_{}.txt", cfg.rule.short_name()))
}

pub fn report_kv_path(cfg: &PipelineConfig) -> PathBuf {
    cfg.out_dir
        .join(format!("report_{}.kv", cfg.rule.short_name()))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// The configured image, min-max normalized when the configuration asks.
pub fn load_input(cfg: &PipelineConfig) -> Result<Raster> {
    let raster = load_image(&cfg.image)?;
    Ok(if cfg.normalize {
        raster.normalized_minmax()
    } else {
        raster
    })
}

/// Classes the pipeline works with: those named in the configuration, or
/// else every class mentioned in the region file.
fn declared_classes(cfg: &PipelineConfig, regions: &[Region]) -> Result<Vec<ClassId>> {
    if cfg.class_names.is_empty() {
        let mut ids: Vec<ClassId> = regions.iter().map(|r| r.class_id).collect();
        ids.sort();
        ids.dedup();
        return Ok(ids);
    }
    if let Some(r) = regions
        .iter()
        .find(|r| !cfg.class_names.contains_key(&r.class_id))
    {
        return Err(Error::Config(format!(
            "region file mentions class {}, which the configuration does not declare",
            r.class_id
        )));
    }
    Ok(cfg.class_names.keys().copied().collect())
}

fn require_regions(classes: &[ClassId], regions: &[Region], purpose: Purpose) -> Result<()> {
    for &id in classes {
        if !regions
            .iter()
            .any(|r| r.class_id == id && r.purpose == purpose)
        {
            return Err(Error::InsufficientData(format!(
                "class {id} has no {purpose} regions"
            )));
        }
    }
    Ok(())
}

/// Builds and saves signatures for every declared class.
pub fn train(cfg: &PipelineConfig) -> Result<SignatureSet> {
    let started = Instant::now();
    let regions = load_regions(&cfg.regions)?;
    let raster = load_input(cfg)?;
    let classes = declared_classes(cfg, &regions)?;
    if classes.is_empty() {
        return Err(Error::InsufficientData(format!(
            "{} defines no regions",
            cfg.regions.display()
        )));
    }
    require_regions(&classes, &regions, Purpose::Training)?;
    let training = TrainingSet::from_regions(&raster, &regions)?;
    let signatures = training.signatures(cfg.epsilon, &cfg.priors, cfg.rule.uses_covariance())?;
    for s in &signatures {
        log::info!(
            "class {}: {} training pixels{}",
            s.class_id,
            s.n_samples,
            if s.regularized {
                ", covariance regularized"
            } else {
                ""
            }
        );
    }
    ensure_dir(&cfg.out_dir)?;
    let path = cfg.signatures_path();
    if let Some(parent) = path.parent() {
        ensure_dir(parent)?;
    }
    save_signatures(&signatures, &path)?;
    log::info!(
        "trained {} classes in {:.3?}",
        signatures.len(),
        started.elapsed()
    );
    Ok(signatures)
}

/// Classifies the configured image and saves the label plane and its
/// color rendering.
pub fn classify(cfg: &PipelineConfig, threads: Option<usize>) -> Result<ClassMap> {
    let signatures = load_signatures(&cfg.signatures_path())?;
    let raster = load_input(cfg)?;
    let rule = cfg.decision_rule();
    let map = match threads {
        Some(n) => classify_raster_with_threads(&rule, &signatures, &raster, n)?,
        None => classify_raster(&rule, &signatures, &raster)?,
    };
    let map = map.with_legend(cfg.legend(signatures.class_ids()))?;
    ensure_dir(&cfg.out_dir)?;
    save_bsq(&map.label_raster(), &classmap_path(cfg))?;
    save_ppm(&map.render(), &render_path(cfg))?;
    log::info!(
        "{} of {} pixels unclassified",
        map.unclassified_count(),
        map.labels().len()
    );
    Ok(map)
}

/// Scores the saved class map over the assessment regions and saves the
/// report as a table and as key-value pairs.
pub fn assess(cfg: &PipelineConfig) -> Result<AccuracyReport> {
    let signatures = load_signatures(&cfg.signatures_path())?;
    let legend = cfg.legend(signatures.class_ids());
    let map = ClassMap::from_label_raster(&load_bsq(&classmap_path(cfg))?, legend)?;
    let regions = load_regions(&cfg.regions)?;
    let assessment: Vec<Region> = regions
        .into_iter()
        .filter(|r| r.purpose == Purpose::Assessment)
        .collect();
    let classes: Vec<ClassId> = map.legend().ids().collect();
    require_regions(&classes, &assessment, Purpose::Assessment)?;
    let report = AccuracyReport::new(&build_error_matrix(&map, &assessment)?)?;
    ensure_dir(&cfg.out_dir)?;
    let title = format!("Error matrix: {}", cfg.decision_rule());
    write_text(&report_path(cfg), &report.to_table(&title, map.legend()))?;
    write_text(&report_kv_path(cfg), &report.to_key_values())?;
    Ok(report)
}

/// `train`, `classify` and `assess` in sequence.
pub fn run_pipeline(cfg: &PipelineConfig, threads: Option<usize>) -> Result<AccuracyReport> {
    train(cfg)?;
    classify(cfg, threads)?;
    assess(cfg)
}

fn execute(cli: &Cli) -> Result<()> {
    let cfg = cli.options.resolve()?;
    let threads = cli.options.threads;
    match cli.command {
        Command::Train => {
            let signatures = train(&cfg)?;
            println!(
                "wrote {} signatures to {}",
                signatures.len(),
                cfg.signatures_path().display()
            );
        }
        Command::Classify => {
            classify(&cfg, threads)?;
            println!("wrote {}", classmap_path(&cfg).display());
        }
        Command::Assess | Command::Run => {
            if let Command::Run = cli.command {
                run_pipeline(&cfg, threads)?;
            } else {
                assess(&cfg)?;
            }
            let path = report_path(&cfg);
            let table = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            print!("{table}");
        }
    }
    Ok(())
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code. Errors are reported on stderr as one line.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return 0;
        }
        Err(e) => {
            let rendered = e.render().to_string();
            let first = rendered.lines().next().unwrap_or_default();
            eprintln!("error[usage]: {}", first.trim_start_matches("error: "));
            return 2;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.kind());
            e.exit_code()
        }
    }
}
