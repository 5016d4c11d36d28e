//! Per-pixel class labels and their legend.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::raster::{Raster, SampleType};
use crate::region::ClassId;

/// Label-plane value of pixels no class claimed.
pub const UNCLASSIFIED_LABEL: u8 = 255;

/// Render color of unclassified pixels.
pub const UNCLASSIFIED_COLOR: [u8; 3] = [0, 0, 0];

/// Default class colors, assigned in class-id order and reused cyclically
/// past twelve classes.
pub const PALETTE: [[u8; 3]; 12] = [
    [0, 0, 255],
    [0, 128, 0],
    [255, 255, 0],
    [255, 0, 0],
    [0, 255, 255],
    [255, 0, 255],
    [128, 64, 0],
    [255, 128, 0],
    [128, 128, 128],
    [0, 255, 0],
    [128, 0, 128],
    [255, 255, 255],
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LegendEntry {
    pub name: String,
    pub color: [u8; 3],
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Legend {
    entries: BTreeMap<ClassId, LegendEntry>,
}

impl Legend {
    pub fn new() -> Self {
        Legend::default()
    }

    /// `class N` names with palette colors.
    pub fn with_defaults(ids: impl IntoIterator<Item = ClassId>) -> Self {
        let mut legend = Legend::new();
        for (i, id) in ids.into_iter().enumerate() {
            legend.insert(
                id,
                LegendEntry {
                    name: format!("class {id}"),
                    color: PALETTE[i % PALETTE.len()],
                },
            );
        }
        legend
    }

    pub fn insert(&mut self, id: ClassId, entry: LegendEntry) {
        self.entries.insert(id, entry);
    }

    pub fn get(&self, id: ClassId) -> Option<&LegendEntry> {
        self.entries.get(&id)
    }

    pub fn contains(&self, id: ClassId) -> bool {
        self.entries.contains_key(&id)
    }

    pub fn ids(&self) -> impl Iterator<Item = ClassId> + '_ {
        self.entries.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (ClassId, &LegendEntry)> {
        self.entries.iter().map(|(&id, e)| (id, e))
    }

    pub fn name(&self, id: ClassId) -> String {
        self.get(id)
            .map_or_else(|| format!("class {id}"), |e| e.name.clone())
    }
}

/// Output of a classification: one optional class id per pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassMap {
    width: usize,
    height: usize,
    labels: Vec<Option<ClassId>>,
    legend: Legend,
}

impl ClassMap {
    pub fn new(
        width: usize,
        height: usize,
        labels: Vec<Option<ClassId>>,
        legend: Legend,
    ) -> Result<Self> {
        if labels.len() != width * height {
            return Err(Error::Shape(format!(
                "{width}x{height} class map needs {} labels, got {}",
                width * height,
                labels.len()
            )));
        }
        if let Some(stray) = labels.iter().flatten().find(|id| !legend.contains(**id)) {
            return Err(Error::Config(format!(
                "label {stray} is missing from the legend"
            )));
        }
        Ok(ClassMap {
            width,
            height,
            labels,
            legend,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn labels(&self) -> &[Option<ClassId>] {
        &self.labels
    }

    pub fn legend(&self) -> &Legend {
        &self.legend
    }

    /// Replaces the legend; every label in the map must still be covered.
    pub fn with_legend(self, legend: Legend) -> Result<Self> {
        ClassMap::new(self.width, self.height, self.labels, legend)
    }

    pub fn get(&self, x: usize, y: usize) -> Option<ClassId> {
        self.labels[y * self.width + x]
    }

    pub fn unclassified_count(&self) -> usize {
        self.labels.iter().filter(|l| l.is_none()).count()
    }

    /// Single-band `u8` plane; unclassified pixels hold [`UNCLASSIFIED_LABEL`].
    pub fn label_raster(&self) -> Raster {
        let samples = self
            .labels
            .iter()
            .map(|l| l.map_or(UNCLASSIFIED_LABEL, ClassId::get) as f64)
            .collect();
        Raster::new(self.width, self.height, 1, SampleType::U8, samples).expect("labels fit in u8")
    }

    /// Reads a label plane back, validating every label against `legend`.
    pub fn from_label_raster(raster: &Raster, legend: Legend) -> Result<Self> {
        if raster.bands() != 1 {
            return Err(Error::Shape(format!(
                "label plane must have 1 band, has {}",
                raster.bands()
            )));
        }
        let labels = raster
            .band(0)
            .iter()
            .map(|&v| {
                let v = v as u32;
                if v == UNCLASSIFIED_LABEL as u32 {
                    Ok(None)
                } else if v <= ClassId::MAX as u32 {
                    Ok(Some(ClassId::new(v as u8)?))
                } else {
                    Err(Error::Format {
                        offset: 0,
                        message: format!("label value {v} is not a class id"),
                    })
                }
            })
            .collect::<Result<Vec<_>>>()?;
        ClassMap::new(raster.width(), raster.height(), labels, legend)
    }

    /// Three-band rendering using the legend colors.
    pub fn render(&self) -> Raster {
        let plane = self.width * self.height;
        let mut samples = vec![0.0; plane * 3];
        for (i, label) in self.labels.iter().enumerate() {
            let color = label
                .and_then(|id| self.legend.get(id))
                .map_or(UNCLASSIFIED_COLOR, |e| e.color);
            for b in 0..3 {
                samples[b * plane + i] = color[b] as f64;
            }
        }
        Raster::new(self.width, self.height, 3, SampleType::U8, samples).expect("colors fit in u8")
    }
}
