//! Labeled rectangles used for training and for accuracy assessment.
//!
//! Region files are UTF-8, one region per line:
//!
//! ```text
//! # class_id x y width height purpose
//! 0 12 40 4 4 training
//! 0 90 17 4 4 assessment
//! ```

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Class label. Values `0..=254` are usable; 255 is reserved for the
/// unclassified sentinel in label planes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClassId(u8);

impl ClassId {
    pub const MAX: u8 = 254;

    pub fn new(id: u8) -> Result<Self> {
        if id > Self::MAX {
            return Err(Error::Parameter(format!(
                "class id {id} is reserved (maximum is {})",
                Self::MAX
            )));
        }
        Ok(ClassId(id))
    }

    pub fn get(self) -> u8 {
        self.0
    }
}

impl fmt::Display for ClassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl FromStr for ClassId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let id: u8 = s
            .parse()
            .map_err(|_| Error::Parameter(format!("invalid class id {s:?}")))?;
        ClassId::new(id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Purpose {
    Training,
    Assessment,
}

impl fmt::Display for Purpose {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Purpose::Training => "training",
            Purpose::Assessment => "assessment",
        })
    }
}

impl FromStr for Purpose {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "training" => Ok(Purpose::Training),
            "assessment" => Ok(Purpose::Assessment),
            other => Err(Error::Parameter(format!(
                "purpose must be `training` or `assessment`, found {other:?}"
            ))),
        }
    }
}

/// Axis-aligned rectangle of pixels tagged with a class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Region {
    pub class_id: ClassId,
    pub x: usize,
    pub y: usize,
    pub width: usize,
    pub height: usize,
    pub purpose: Purpose,
}

impl Region {
    pub fn new(
        class_id: ClassId,
        x: usize,
        y: usize,
        width: usize,
        height: usize,
        purpose: Purpose,
    ) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Parameter(format!(
                "region must cover at least one pixel, got {width}x{height}"
            )));
        }
        Ok(Region {
            class_id,
            x,
            y,
            width,
            height,
            purpose,
        })
    }

    pub fn area(&self) -> usize {
        self.width * self.height
    }

    pub fn fits_within(&self, width: usize, height: usize) -> bool {
        self.width >= 1
            && self.height >= 1
            && self
                .x
                .checked_add(self.width)
                .is_some_and(|right| right <= width)
            && self
                .y
                .checked_add(self.height)
                .is_some_and(|bottom| bottom <= height)
    }

    /// Pixel coordinates covered by the region, row-major.
    pub fn pixels(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (self.y..self.y + self.height)
            .flat_map(move |y| (self.x..self.x + self.width).map(move |x| (x, y)))
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {} {} {} {}",
            self.class_id, self.x, self.y, self.width, self.height, self.purpose
        )
    }
}

/// Parses a region file. `origin` names the source in error messages.
pub fn parse_regions(text: &str, origin: &str) -> Result<Vec<Region>> {
    let mut regions = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            origin: origin.to_string(),
            line: i + 1,
            message,
        };
        let fields: Vec<&str> = content.split_whitespace().collect();
        if fields.len() != 6 {
            return Err(parse_err(format!(
                "expected `class_id x y width height purpose`, found {} fields",
                fields.len()
            )));
        }
        let number = |s: &str, name: &str| -> Result<usize> {
            s.parse().map_err(|_| {
                parse_err(format!(
                    "{name} must be a non-negative integer, found {s:?}"
                ))
            })
        };
        let class_id: ClassId = fields[0]
            .parse()
            .map_err(|e: Error| parse_err(e.to_string()))?;
        let purpose: Purpose = fields[5]
            .parse()
            .map_err(|e: Error| parse_err(e.to_string()))?;
        let region = Region::new(
            class_id,
            number(fields[1], "x")?,
            number(fields[2], "y")?,
            number(fields[3], "width")?,
            number(fields[4], "height")?,
            purpose,
        )
        .map_err(|e| parse_err(e.to_string()))?;
        regions.push(region);
    }
    Ok(regions)
}

pub fn load_regions(path: &std::path::Path) -> Result<Vec<Region>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_regions(&text, &path.display().to_string())
}

pub fn format_regions(regions: &[Region]) -> String {
    let mut out = String::from("# class_id x y width height purpose\n");
    for r in regions {
        out.push_str(&r.to_string());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_with_comments() {
        let text = "# header\n0 1 2 4 4 training  # trailing\n\n3 0 0 2 5 assessment\n";
        let regions = parse_regions(text, "r.txt").unwrap();
        assert_eq!(regions.len(), 2);
        assert_eq!(regions[0].class_id.get(), 0);
        assert_eq!((regions[0].x, regions[0].y, regions[0].area()), (1, 2, 16));
        assert_eq!(regions[1].purpose, Purpose::Assessment);
        assert_eq!(
            parse_regions(&format_regions(&regions), "again").unwrap(),
            regions
        );
    }

    #[test]
    fn reports_line_numbers() {
        let err = parse_regions("0 0 0 4 4 training\n1 0 0 4 training\n", "r.txt").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = parse_regions("0 0 0 0 4 training\n", "r.txt").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        assert!(parse_regions("255 0 0 1 1 training\n", "r.txt").is_err());
        assert!(parse_regions("1 0 0 1 1 validation\n", "r.txt").is_err());
    }

    #[test]
    fn bounds_check() {
        let id = ClassId::new(1).unwrap();
        let r = Region::new(id, 4, 4, 4, 4, Purpose::Training).unwrap();
        assert!(r.fits_within(8, 8));
        assert!(!r.fits_within(7, 8));
        let huge = Region::new(id, usize::MAX, 0, 2, 1, Purpose::Training).unwrap();
        assert!(!huge.fits_within(8, 8));
        assert_eq!(r.pixels().count(), 16);
        assert_eq!(r.pixels().next(), Some((4, 4)));
        assert_eq!(r.pixels().nth(4), Some((4, 5)));
    }
}
