//! Plain-text signature files.
//!
//! ```text
//! classes = 2
//! dimension = 3
//!
//! [class 0]
//! n_samples = 16
//! prior = 1.0000000000000000e0
//! ...
//! ```
//!
//! Every real is written with 17 significant digits, which round-trips any
//! `f64` exactly, so a reloaded set reproduces classification decisions bit
//! for bit. Matrices are written row-major on one line.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::region::ClassId;
use crate::training::{ClassSignature, SignatureSet};

fn real(v: f64) -> String {
    format!("{v:.16e}")
}

fn reals(values: &[f64]) -> String {
    values
        .iter()
        .map(|&v| real(v))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn format_signatures(set: &SignatureSet) -> String {
    let mut out = String::new();
    out.push_str("# class signatures\n");
    let _ = writeln!(out, "classes = {}", set.len());
    let _ = writeln!(out, "dimension = {}", set.dimension());
    for s in set {
        let _ = writeln!(out);
        let _ = writeln!(out, "[class {}]", s.class_id);
        let _ = writeln!(out, "n_samples = {}", s.n_samples);
        let _ = writeln!(out, "prior = {}", real(s.prior));
        let _ = writeln!(out, "neg_log_det = {}", real(s.neg_log_det));
        let _ = writeln!(out, "regularized = {}", s.regularized);
        let _ = writeln!(out, "mean = {}", reals(&s.mean));
        let _ = writeln!(out, "covariance = {}", reals(s.covariance.as_slice()));
        let _ = writeln!(
            out,
            "inv_covariance = {}",
            reals(s.inv_covariance.as_slice())
        );
        let _ = writeln!(out, "band_min = {}", reals(&s.band_min));
        let _ = writeln!(out, "band_max = {}", reals(&s.band_max));
        let _ = writeln!(out, "band_std = {}", reals(&s.band_std));
    }
    out
}

#[derive(Default)]
struct Partial {
    class_id: Option<ClassId>,
    line: usize,
    n_samples: Option<usize>,
    prior: Option<f64>,
    neg_log_det: Option<f64>,
    regularized: Option<bool>,
    mean: Option<Vec<f64>>,
    covariance: Option<Vec<f64>>,
    inv_covariance: Option<Vec<f64>>,
    band_min: Option<Vec<f64>>,
    band_max: Option<Vec<f64>>,
    band_std: Option<Vec<f64>>,
}

pub fn parse_signatures(text: &str, origin: &str) -> Result<SignatureSet> {
    let err = |line: usize, message: String| Error::Parse {
        origin: origin.to_string(),
        line,
        message,
    };
    let mut classes: Option<usize> = None;
    let mut dimension: Option<usize> = None;
    let mut done: Vec<Partial> = Vec::new();
    let mut current: Option<Partial> = None;

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let inner = rest
                .strip_suffix(']')
                .and_then(|s| s.trim().strip_prefix("class"))
                .ok_or_else(|| err(line_no, format!("bad section header {line:?}")))?;
            let id: ClassId = inner
                .trim()
                .parse()
                .map_err(|e: Error| err(line_no, e.to_string()))?;
            if let Some(p) = current.take() {
                done.push(p);
            }
            current = Some(Partial {
                class_id: Some(id),
                line: line_no,
                ..Partial::default()
            });
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(line_no, format!("expected `key = value`, found {line:?}")))?;
        let (key, value) = (key.trim(), value.trim());
        let integer = |v: &str| {
            v.parse::<usize>()
                .map_err(|_| err(line_no, format!("{key}: expected an integer, found {v:?}")))
        };
        let scalar = |v: &str| {
            v.parse::<f64>()
                .map_err(|_| err(line_no, format!("{key}: expected a real, found {v:?}")))
        };
        let vector = |v: &str| {
            v.split_whitespace()
                .map(scalar)
                .collect::<Result<Vec<f64>>>()
        };

        let Some(p) = current.as_mut() else {
            match key {
                "classes" => classes = Some(integer(value)?),
                "dimension" => dimension = Some(integer(value)?),
                other => return Err(err(line_no, format!("unknown top-level key {other:?}"))),
            }
            continue;
        };
        let slot_taken = |taken: bool| {
            if taken {
                Err(err(line_no, format!("duplicate key {key:?}")))
            } else {
                Ok(())
            }
        };
        match key {
            "n_samples" => {
                slot_taken(p.n_samples.is_some())?;
                p.n_samples = Some(integer(value)?)
            }
            "prior" => {
                slot_taken(p.prior.is_some())?;
                p.prior = Some(scalar(value)?)
            }
            "neg_log_det" => {
                slot_taken(p.neg_log_det.is_some())?;
                p.neg_log_det = Some(scalar(value)?)
            }
            "regularized" => {
                slot_taken(p.regularized.is_some())?;
                p.regularized = Some(match value {
                    "true" => true,
                    "false" => false,
                    v => {
                        return Err(err(
                            line_no,
                            format!("regularized: expected a bool, found {v:?}"),
                        ))
                    }
                })
            }
            "mean" => {
                slot_taken(p.mean.is_some())?;
                p.mean = Some(vector(value)?)
            }
            "covariance" => {
                slot_taken(p.covariance.is_some())?;
                p.covariance = Some(vector(value)?)
            }
            "inv_covariance" => {
                slot_taken(p.inv_covariance.is_some())?;
                p.inv_covariance = Some(vector(value)?)
            }
            "band_min" => {
                slot_taken(p.band_min.is_some())?;
                p.band_min = Some(vector(value)?)
            }
            "band_max" => {
                slot_taken(p.band_max.is_some())?;
                p.band_max = Some(vector(value)?)
            }
            "band_std" => {
                slot_taken(p.band_std.is_some())?;
                p.band_std = Some(vector(value)?)
            }
            other => return Err(err(line_no, format!("unknown class key {other:?}"))),
        }
    }
    if let Some(p) = current.take() {
        done.push(p);
    }

    let d = dimension.ok_or_else(|| err(1, "missing `dimension`".into()))?;
    let expected = classes.ok_or_else(|| err(1, "missing `classes`".into()))?;
    if done.len() != expected {
        return Err(err(
            text.lines().count(),
            format!(
                "header declares {expected} classes, file holds {}",
                done.len()
            ),
        ));
    }

    let mut signatures = Vec::with_capacity(done.len());
    for p in done {
        let at = p.line;
        let id = p.class_id.expect("set with the section header");
        let need = |name: &str| err(at, format!("class {id}: missing `{name}`"));
        let sized = |v: Option<Vec<f64>>, name: &str, len: usize| -> Result<Vec<f64>> {
            let v = v.ok_or_else(|| need(name))?;
            if v.len() != len {
                return Err(err(
                    at,
                    format!(
                        "class {id}: `{name}` has {} values, expected {len}",
                        v.len()
                    ),
                ));
            }
            Ok(v)
        };
        let covariance = Matrix::from_row_major(d, sized(p.covariance, "covariance", d * d)?)
            .expect("length checked");
        let inv_covariance =
            Matrix::from_row_major(d, sized(p.inv_covariance, "inv_covariance", d * d)?)
                .expect("length checked");
        signatures.push(ClassSignature {
            class_id: id,
            n_samples: p.n_samples.ok_or_else(|| need("n_samples"))?,
            mean: sized(p.mean, "mean", d)?,
            covariance,
            inv_covariance,
            neg_log_det: p.neg_log_det.ok_or_else(|| need("neg_log_det"))?,
            band_min: sized(p.band_min, "band_min", d)?,
            band_max: sized(p.band_max, "band_max", d)?,
            band_std: sized(p.band_std, "band_std", d)?,
            prior: p.prior.ok_or_else(|| need("prior"))?,
            regularized: p.regularized.unwrap_or(false),
        });
    }
    SignatureSet::new(signatures)
}

pub fn save_signatures(set: &SignatureSet, path: &Path) -> Result<()> {
    fs::write(path, format_signatures(set)).map_err(|e| Error::io(path, e))
}

pub fn load_signatures(path: &Path) -> Result<SignatureSet> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_signatures(&text, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::FeatureVector;
    use crate::training::SignatureOptions;
    use proptest::prelude::*;

    fn sample_set(values: &[Vec<f64>]) -> SignatureSet {
        let half = values.len() / 2;
        let make = |id: u8, rows: &[Vec<f64>]| {
            let samples: Vec<_> = rows
                .iter()
                .map(|r| FeatureVector::new(r.clone()).unwrap())
                .collect();
            ClassSignature::from_samples(
                ClassId::new(id).unwrap(),
                &samples,
                &SignatureOptions::default(),
            )
            .unwrap()
        };
        SignatureSet::new(vec![make(4, &values[..half]), make(1, &values[half..])]).unwrap()
    }

    #[test]
    fn layout() {
        let set = sample_set(&[
            vec![1.0, 2.0],
            vec![3.0, 5.0],
            vec![0.5, 0.25],
            vec![7.0, 1.0],
            vec![2.0, 2.0],
        ]);
        let text = format_signatures(&set);
        assert!(text.contains("classes = 2\ndimension = 2\n"));
        assert!(text.find("[class 1]").unwrap() < text.find("[class 4]").unwrap());
        assert!(text.contains("prior = 1.0000000000000000e0\n"));
        assert_eq!(parse_signatures(&text, "t").unwrap(), set);
    }

    #[test]
    fn rejects_bad_files() {
        let set = sample_set(&[vec![1.0], vec![3.0], vec![0.5], vec![7.0]]);
        let text = format_signatures(&set);
        let missing = text.replace("classes = 2", "classes = 3");
        assert!(matches!(
            parse_signatures(&missing, "t"),
            Err(Error::Parse { .. })
        ));
        let short = text.replacen("band_std = ", "band_std = 1 ", 1);
        assert!(matches!(
            parse_signatures(&short, "t"),
            Err(Error::Parse { .. })
        ));
        let garbage = text.replacen("n_samples = 2", "n_samples = two", 1);
        let err = parse_signatures(&garbage, "sig.txt").unwrap_err();
        assert!(err.to_string().starts_with("sig.txt:6:"), "{err}");
        let no_mean: String = text
            .lines()
            .filter(|l| !l.starts_with("mean"))
            .map(|l| format!("{l}\n"))
            .collect();
        assert!(parse_signatures(&no_mean, "t").is_err());
    }

    proptest! {
        #[test]
        fn round_trip_is_exact(rows in prop::collection::vec(prop::collection::vec(-1e4f64..1e4, 3), 4..20)) {
            let set = sample_set(&rows);
            let text = format_signatures(&set);
            let back = parse_signatures(&text, "t").unwrap();
            prop_assert_eq!(&back, &set);
            prop_assert_eq!(format_signatures(&back), text);
        }
    }
}
