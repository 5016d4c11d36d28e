//! Error matrices and the accuracy statistics derived from them.
//!
//! Rows are reference classes, columns the assigned classes plus a final
//! column for unclassified pixels. Unclassified pixels count against the
//! reference row (omission) but never enter a user's-accuracy denominator.
//!
//! Two overall accuracies are reported: `overall_mean_diag`, the mean of the
//! row-normalized diagonal (mean producer's accuracy), and `overall_trace`,
//! the usual trace over total. They coincide when every reference class has
//! the same number of assessment pixels.

use std::fmt::Write as _;

use crate::classmap::{ClassMap, Legend};
use crate::error::{Error, Result};
use crate::region::{ClassId, Purpose, Region};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ErrorMatrix {
    classes: Vec<ClassId>,
    /// `m` rows of `m + 1` counts.
    counts: Vec<Vec<u64>>,
}

impl ErrorMatrix {
    /// `counts` must be `m x (m + 1)`, the last column holding unclassified
    /// pixels. `classes` must be strictly ascending.
    pub fn from_counts(classes: Vec<ClassId>, counts: Vec<Vec<u64>>) -> Result<Self> {
        let m = classes.len();
        if m == 0 {
            return Err(Error::InsufficientData(
                "error matrix needs at least one class".into(),
            ));
        }
        if classes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Parameter(
                "classes must be strictly ascending".into(),
            ));
        }
        if counts.len() != m || counts.iter().any(|r| r.len() != m + 1) {
            return Err(Error::Shape(format!(
                "error matrix for {m} classes must be {m}x{}",
                m + 1
            )));
        }
        Ok(ErrorMatrix { classes, counts })
    }

    pub fn classes(&self) -> &[ClassId] {
        &self.classes
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    pub fn reference_totals(&self) -> Vec<u64> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    /// Column sums, unclassified column last.
    pub fn column_totals(&self) -> Vec<u64> {
        let mut totals = vec![0; self.classes.len() + 1];
        for row in &self.counts {
            for (t, c) in totals.iter_mut().zip(row) {
                *t += c;
            }
        }
        totals
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn unclassified_total(&self) -> u64 {
        self.counts.iter().map(|r| r[self.classes.len()]).sum()
    }

    fn diagonal(&self) -> impl Iterator<Item = u64> + '_ {
        self.counts.iter().enumerate().map(|(i, r)| r[i])
    }

    fn nonzero_reference_totals(&self) -> Result<Vec<u64>> {
        let totals = self.reference_totals();
        if let Some(i) = totals.iter().position(|&t| t == 0) {
            return Err(Error::ZeroTotal(format!(
                "reference class {} has no assessment pixels",
                self.classes[i]
            )));
        }
        Ok(totals)
    }

    /// Each row divided by its reference total.
    pub fn row_normalize(&self) -> Result<Vec<Vec<f64>>> {
        let totals = self.nonzero_reference_totals()?;
        Ok(self
            .counts
            .iter()
            .zip(&totals)
            .map(|(row, &t)| row.iter().map(|&c| c as f64 / t as f64).collect())
            .collect())
    }

    pub fn overall_accuracy(&self) -> Result<OverallAccuracy> {
        let totals = self.nonzero_reference_totals()?;
        let m = self.classes.len() as f64;
        let mean_diag = self
            .diagonal()
            .zip(&totals)
            .map(|(d, &t)| d as f64 / t as f64)
            .sum::<f64>()
            / m;
        let trace = self.diagonal().sum::<u64>() as f64 / self.total() as f64;
        Ok(OverallAccuracy { mean_diag, trace })
    }

    /// Producer's accuracy per class, and user's accuracy per class (`None`
    /// when nothing was assigned to the class).
    pub fn producer_user_accuracy(&self) -> Result<(Vec<f64>, Vec<Option<f64>>)> {
        let totals = self.nonzero_reference_totals()?;
        let columns = self.column_totals();
        let producer = self
            .diagonal()
            .zip(&totals)
            .map(|(d, &t)| d as f64 / t as f64)
            .collect();
        let user = self
            .diagonal()
            .zip(&columns)
            .map(|(d, &c)| (c > 0).then(|| d as f64 / c as f64))
            .collect();
        Ok((producer, user))
    }

    /// Cohen's kappa; `None` when chance agreement is already perfect.
    pub fn kappa(&self) -> Result<Option<f64>> {
        let total = self.total();
        if total == 0 {
            return Err(Error::InsufficientData("error matrix is empty".into()));
        }
        let n = total as f64;
        let observed = self.diagonal().sum::<u64>() as f64 / n;
        let columns = self.column_totals();
        let chance = self
            .reference_totals()
            .iter()
            .zip(&columns)
            .map(|(&r, &c)| r as f64 * c as f64)
            .sum::<f64>()
            / (n * n);
        if chance >= 1.0 {
            return Ok(None);
        }
        Ok(Some((observed - chance) / (1.0 - chance)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverallAccuracy {
    pub mean_diag: f64,
    pub trace: f64,
}

/// Tallies assessment pixels of `map` into an error matrix over the legend's
/// classes.
pub fn build_error_matrix(map: &ClassMap, regions: &[Region]) -> Result<ErrorMatrix> {
    if regions.is_empty() {
        return Err(Error::InsufficientData("no assessment regions".into()));
    }
    let classes: Vec<ClassId> = map.legend().ids().collect();
    let m = classes.len();
    let index_of = |id: ClassId| classes.binary_search(&id).ok();
    let mut counts = vec![vec![0u64; m + 1]; m];
    for r in regions {
        if r.purpose != Purpose::Assessment {
            return Err(Error::Parameter(format!(
                "region `{r}` is not an assessment region"
            )));
        }
        let row = index_of(r.class_id).ok_or_else(|| {
            Error::Config(format!(
                "assessment class {} is not in the legend",
                r.class_id
            ))
        })?;
        if !r.fits_within(map.width(), map.height()) {
            return Err(Error::Bounds(format!(
                "{r} does not fit inside {}x{} class map",
                map.width(),
                map.height()
            )));
        }
        for (x, y) in r.pixels() {
            let col = match map.get(x, y) {
                Some(id) => index_of(id).expect("class map labels are in its legend"),
                None => m,
            };
            counts[row][col] += 1;
        }
    }
    ErrorMatrix::from_counts(classes, counts)
}

/// Every statistic derived from one error matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyReport {
    pub classes: Vec<ClassId>,
    pub counts: Vec<Vec<u64>>,
    pub reference_totals: Vec<u64>,
    pub proportions: Vec<Vec<f64>>,
    pub overall_mean_diag: f64,
    pub overall_trace: f64,
    pub producer: Vec<f64>,
    pub user: Vec<Option<f64>>,
    pub kappa: Option<f64>,
}

impl AccuracyReport {
    pub fn new(em: &ErrorMatrix) -> Result<Self> {
        let overall = em.overall_accuracy()?;
        let (producer, user) = em.producer_user_accuracy()?;
        Ok(AccuracyReport {
            classes: em.classes().to_vec(),
            counts: em.counts().to_vec(),
            reference_totals: em.reference_totals(),
            proportions: em.row_normalize()?,
            overall_mean_diag: overall.mean_diag,
            overall_trace: overall.trace,
            producer,
            user,
            kappa: em.kappa()?,
        })
    }

    /// Human-readable table: row proportions, column sums, the per-class
    /// diagonal and the overall accuracies.
    pub fn to_table(&self, title: &str, legend: &Legend) -> String {
        let m = self.classes.len();
        let has_unclassified = self.counts.iter().any(|r| r[m] > 0);
        let cols = if has_unclassified { m + 1 } else { m };
        let mut out = String::new();
        let _ = writeln!(out, "{title}");
        let _ = write!(out, "{:<18}", "");
        for id in &self.classes {
            let _ = write!(out, "{:>10}", format!("C{id}"));
        }
        if has_unclassified {
            let _ = write!(out, "{:>10}", "Uncl.");
        }
        let _ = writeln!(out, "{:>10}", "R. Total");

        let mut column_sums = vec![0.0; cols];
        for (i, row) in self.proportions.iter().enumerate() {
            let _ = write!(out, "{:<18}", format!("C{}", self.classes[i]));
            for (j, p) in row.iter().take(cols).enumerate() {
                column_sums[j] += p;
                if self.counts[i][j] == 0 {
                    let _ = write!(out, "{:>10}", "");
                } else {
                    let _ = write!(out, "{:>10.6}", p);
                }
            }
            let _ = writeln!(out, "{:>10.6}", row.iter().sum::<f64>());
        }
        let _ = write!(out, "{:<18}", "C. Total");
        for s in &column_sums {
            let _ = write!(out, "{s:>10.6}");
        }
        let _ = writeln!(out, "{:>10.6}", column_sums.iter().sum::<f64>());
        let _ = write!(out, "{:<18}", "Overall accuracy");
        for p in &self.producer {
            let _ = write!(out, "{p:>10.6}");
        }
        if has_unclassified {
            let _ = write!(out, "{:>10}", "");
        }
        let _ = writeln!(out, "{:>10.6}", self.overall_mean_diag);
        let _ = writeln!(out);

        let _ = writeln!(
            out,
            "{:<18}{:>10}{:>10}{:>10}  name",
            "class", "pixels", "producer", "user"
        );
        for (i, id) in self.classes.iter().enumerate() {
            let _ = writeln!(
                out,
                "{:<18}{:>10}{:>10.6}{:>10}  {}",
                format!("C{id}"),
                self.reference_totals[i],
                self.producer[i],
                fmt_opt(self.user[i]),
                legend.name(*id)
            );
        }
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "overall accuracy (mean of diagonal proportions): {:.6}",
            self.overall_mean_diag
        );
        let _ = writeln!(
            out,
            "overall accuracy (trace / total): {:.6}",
            self.overall_trace
        );
        let _ = writeln!(out, "kappa: {}", fmt_opt(self.kappa));
        out
    }

    /// `key = value` lines, one statistic per key.
    pub fn to_key_values(&self) -> String {
        let join = |v: Vec<String>| v.join(" ");
        let mut out = String::new();
        let _ = writeln!(
            out,
            "classes = {}",
            join(self.classes.iter().map(ToString::to_string).collect())
        );
        let _ = writeln!(
            out,
            "reference_totals = {}",
            join(
                self.reference_totals
                    .iter()
                    .map(ToString::to_string)
                    .collect()
            )
        );
        for (i, id) in self.classes.iter().enumerate() {
            let _ = writeln!(
                out,
                "counts.{id} = {}",
                join(self.counts[i].iter().map(ToString::to_string).collect())
            );
        }
        for (i, id) in self.classes.iter().enumerate() {
            let _ = writeln!(
                out,
                "proportions.{id} = {}",
                join(
                    self.proportions[i]
                        .iter()
                        .map(|p| format!("{p:.6}"))
                        .collect()
                )
            );
        }
        let _ = writeln!(out, "overall_mean_diag = {:.6}", self.overall_mean_diag);
        let _ = writeln!(out, "overall_trace = {:.6}", self.overall_trace);
        let _ = writeln!(out, "kappa = {}", fmt_opt(self.kappa));
        let _ = writeln!(
            out,
            "producer = {}",
            join(self.producer.iter().map(|p| format!("{p:.6}")).collect())
        );
        let _ = writeln!(
            out,
            "user = {}",
            join(self.user.iter().map(|u| fmt_opt(*u)).collect())
        );
        out
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "undefined".to_string(), |v| format!("{v:.6}"))
}
