//! Pipeline configuration files.
//!
//! ```text
//! # paths are relative to this file
//! image = scene.hdr
//! regions = regions.txt
//! out = out
//! rule = ml
//! epsilon = 1e-6
//! prior.0 = 0.25
//! class.0 = water
//! color.0 = 0 0 255
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::classifiers::{DecisionRule, RuleKind, TieBreak};
use crate::classmap::{Legend, LegendEntry, PALETTE};
use crate::error::{Error, Result};
use crate::region::ClassId;
use crate::training::{BoundMode, DEFAULT_EPSILON};

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub image: PathBuf,
    pub regions: PathBuf,
    pub out_dir: PathBuf,
    /// Defaults to `signatures.txt` inside `out_dir`.
    pub signatures: Option<PathBuf>,
    pub rule: RuleKind,
    pub bound_mode: BoundMode,
    pub tie_break: TieBreak,
    pub use_priors: bool,
    pub epsilon: f64,
    /// Rescale every band to [0, 1] before training and classification.
    pub normalize: bool,
    pub priors: BTreeMap<ClassId, f64>,
    pub class_names: BTreeMap<ClassId, String>,
    pub class_colors: BTreeMap<ClassId, [u8; 3]>,
}

impl PipelineConfig {
    pub fn parse(text: &str, base_dir: &Path, origin: &str) -> Result<Self> {
        let err = |line: usize, message: String| Error::Parse {
            origin: origin.to_string(),
            line,
            message,
        };
        let mut values: BTreeMap<String, (usize, String)> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(i + 1, format!("expected `key = value`, found {line:?}")))?;
            let key = key.trim().to_string();
            if values
                .insert(key.clone(), (i + 1, value.trim().to_string()))
                .is_some()
            {
                return Err(err(i + 1, format!("duplicate key {key:?}")));
            }
        }
        if values.is_empty() {
            return Err(Error::Config(format!("{origin}: configuration is empty")));
        }

        let mut take = |key: &str| values.remove(key);
        let path = |v: Option<(usize, String)>, key: &str| -> Result<PathBuf> {
            let (_, v) = v.ok_or_else(|| Error::Config(format!("{origin}: missing `{key}`")))?;
            Ok(base_dir.join(v))
        };
        let image = path(take("image"), "image")?;
        let regions = path(take("regions"), "regions")?;
        let out_dir = match take("out") {
            Some((_, v)) => base_dir.join(v),
            None => base_dir.join("out"),
        };
        let signatures = take("signatures").map(|(_, v)| base_dir.join(v));

        let parsed = |entry: Option<(usize, String)>, key: &str| -> Result<Option<f64>> {
            entry
                .map(|(line, v)| {
                    v.parse::<f64>()
                        .map_err(|_| err(line, format!("{key}: expected a real, found {v:?}")))
                })
                .transpose()
        };
        let flag = |entry: Option<(usize, String)>, key: &str| -> Result<bool> {
            match entry {
                None => Ok(false),
                Some((_, v)) if v == "true" => Ok(true),
                Some((_, v)) if v == "false" => Ok(false),
                Some((line, v)) => Err(err(
                    line,
                    format!("{key}: expected true or false, found {v:?}"),
                )),
            }
        };
        let at_line = |entry: &Option<(usize, String)>| entry.as_ref().map_or(0, |(l, _)| *l);

        let rule_entry = take("rule");
        let rule = match &rule_entry {
            Some((line, v)) => v.parse().map_err(|e: Error| err(*line, e.to_string()))?,
            None => RuleKind::MaxLikelihood,
        };
        let epsilon_entry = take("epsilon");
        let epsilon_line = at_line(&epsilon_entry);
        let epsilon = parsed(epsilon_entry, "epsilon")?.unwrap_or(DEFAULT_EPSILON);
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(err(
                epsilon_line,
                format!("epsilon must be positive, found {epsilon}"),
            ));
        }
        let mode_entry = take("bound_mode");
        let k_entry = take("k");
        let k_line = at_line(&k_entry);
        let k = parsed(k_entry, "k")?;
        let bound_mode = match mode_entry {
            None => BoundMode::MinMax,
            Some((_, v)) if v == "minmax" => BoundMode::MinMax,
            Some((line, v)) if v == "k_sigma" => {
                let k = k.ok_or_else(|| err(line, "bound_mode = k_sigma needs `k`".into()))?;
                if !(k > 0.0 && k.is_finite()) {
                    return Err(err(k_line, format!("k must be positive, found {k}")));
                }
                BoundMode::KSigma { k }
            }
            Some((line, v)) => {
                return Err(err(
                    line,
                    format!("bound_mode must be minmax or k_sigma, found {v:?}"),
                ))
            }
        };
        let tie_break = match take("pp_tie_break") {
            Some((line, v)) => v.parse().map_err(|e: Error| err(line, e.to_string()))?,
            None => TieBreak::default(),
        };
        let use_priors = flag(take("use_priors"), "use_priors")?;
        let normalize = flag(take("normalize"), "normalize")?;

        let mut priors = BTreeMap::new();
        let mut class_names = BTreeMap::new();
        let mut class_colors = BTreeMap::new();
        for (key, (line, value)) in values {
            let (kind, id) = key
                .split_once('.')
                .ok_or_else(|| err(line, format!("unknown key {key:?}")))?;
            let id: ClassId = id.parse().map_err(|e: Error| err(line, e.to_string()))?;
            match kind {
                "prior" => {
                    let p = value.parse::<f64>().map_err(|_| {
                        err(line, format!("{key}: expected a real, found {value:?}"))
                    })?;
                    priors.insert(id, p);
                }
                "class" => {
                    if value.is_empty() {
                        return Err(err(line, format!("{key}: empty class name")));
                    }
                    class_names.insert(id, value);
                }
                "color" => {
                    let rgb = value
                        .split_whitespace()
                        .map(|c| c.parse::<u8>())
                        .collect::<std::result::Result<Vec<u8>, _>>()
                        .ok()
                        .filter(|c| c.len() == 3)
                        .ok_or_else(|| {
                            err(
                                line,
                                format!("{key}: expected three values 0..=255, found {value:?}"),
                            )
                        })?;
                    class_colors.insert(id, [rgb[0], rgb[1], rgb[2]]);
                }
                _ => return Err(err(line, format!("unknown key {key:?}"))),
            }
        }
        if use_priors && priors.is_empty() {
            return Err(Error::Config(format!(
                "{origin}: use_priors = true but no prior.<class> entries"
            )));
        }

        Ok(PipelineConfig {
            image,
            regions,
            out_dir,
            signatures,
            rule,
            bound_mode,
            tie_break,
            use_priors,
            epsilon,
            normalize,
            priors,
            class_names,
            class_colors,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new(""));
        PipelineConfig::parse(&text, base, &path.display().to_string())
    }

    pub fn decision_rule(&self) -> DecisionRule {
        match self.rule {
            RuleKind::Parallelepiped => DecisionRule::Parallelepiped {
                bounds: self.bound_mode,
                tie_break: self.tie_break,
            },
            RuleKind::Mahalanobis => DecisionRule::Mahalanobis,
            RuleKind::MaxLikelihood => DecisionRule::MaxLikelihood {
                use_priors: self.use_priors,
            },
            RuleKind::Euclidean => DecisionRule::Euclidean,
        }
    }

    pub fn signatures_path(&self) -> PathBuf {
        self.signatures
            .clone()
            .unwrap_or_else(|| self.out_dir.join("signatures.txt"))
    }

    /// Legend for `ids`: configured names and colors where given, defaults
    /// otherwise.
    pub fn legend(&self, ids: impl IntoIterator<Item = ClassId>) -> Legend {
        let mut legend = Legend::new();
        for (i, id) in ids.into_iter().enumerate() {
            let name = self
                .class_names
                .get(&id)
                .cloned()
                .unwrap_or_else(|| format!("class {id}"));
            let color = self
                .class_colors
                .get(&id)
                .copied()
                .unwrap_or(PALETTE[i % PALETTE.len()]);
            legend.insert(id, LegendEntry { name, color });
        }
        legend
    }
}
