//! Multi-band raster model plus NetPBM P6 and band-sequential (BSQ) I/O.
//!
//! Samples are held as `f64` in band-sequential order whatever the storage
//! type, so plane `b` occupies `samples[b * w * h..(b + 1) * w * h]` and is
//! row-major within the plane.
//!
//! The BSQ carrier is a pair of files: a UTF-8 header of `key = value` lines
//! (`width`, `height`, `bands`, `dtype`, `byteorder`) and a raw data file
//! holding the planes back to back, little-endian.

use std::fmt;
use std::fs;
use std::io::Read;
use std::ops::Deref;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::region::Region;

/// Storage type of raster samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SampleType {
    U8,
    U16,
    F32,
}

impl SampleType {
    pub fn bytes_per_sample(self) -> usize {
        match self {
            SampleType::U8 => 1,
            SampleType::U16 => 2,
            SampleType::F32 => 4,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            SampleType::U8 => "u8",
            SampleType::U16 => "u16",
            SampleType::F32 => "f32",
        }
    }

    /// Brings `v` into the representable set of this type, or reports why it
    /// cannot be.
    fn admit(self, v: f64) -> std::result::Result<f64, &'static str> {
        if !v.is_finite() {
            return Err("non-finite sample");
        }
        match self {
            SampleType::U8 if v.fract() == 0.0 && (0.0..=255.0).contains(&v) => Ok(v),
            SampleType::U16 if v.fract() == 0.0 && (0.0..=65535.0).contains(&v) => Ok(v),
            SampleType::U8 | SampleType::U16 => Err("sample outside the integer range of its type"),
            SampleType::F32 => {
                let narrowed = v as f32;
                if narrowed.is_finite() {
                    Ok(narrowed as f64)
                } else {
                    Err("sample overflows f32")
                }
            }
        }
    }
}

impl fmt::Display for SampleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for SampleType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "u8" => Ok(SampleType::U8),
            "u16" => Ok(SampleType::U16),
            "f32" => Ok(SampleType::F32),
            other => Err(Error::Format {
                offset: 0,
                message: format!("unknown sample type tag {other:?}"),
            }),
        }
    }
}

/// One pixel read across all bands.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector(Vec<f64>);

impl FeatureVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Shape(
                "feature vector must have at least one band".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric(
                "feature vector holds a non-finite value".into(),
            ));
        }
        Ok(FeatureVector(values))
    }

    pub(crate) fn from_finite(values: Vec<f64>) -> Self {
        debug_assert!(values.iter().all(|v| v.is_finite()));
        FeatureVector(values)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for FeatureVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Dimensions and storage type of a BSQ raster. Byte order is always little-endian.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RasterHeader {
    pub width: usize,
    pub height: usize,
    pub bands: usize,
    pub sample_type: SampleType,
}

impl RasterHeader {
    pub fn data_len(&self) -> usize {
        self.width * self.height * self.bands * self.sample_type.bytes_per_sample()
    }
}

impl fmt::Display for RasterHeader {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "width = {}", self.width)?;
        writeln!(f, "height = {}", self.height)?;
        writeln!(f, "bands = {}", self.bands)?;
        writeln!(f, "dtype = {}", self.sample_type)?;
        writeln!(f, "byteorder = little")
    }
}

impl FromStr for RasterHeader {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut width = None;
        let mut height = None;
        let mut bands = None;
        let mut sample_type = None;
        let mut byteorder_seen = false;
        let mut offset = 0;
        for line in text.split_inclusive('\n') {
            let line_offset = offset;
            offset += line.len();
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let bad = |message: String| Error::Format {
                offset: line_offset,
                message,
            };
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| bad(format!("expected `key = value`, found {content:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            let dimension = |v: &str| -> Result<usize> {
                match v.parse::<usize>() {
                    Ok(n) if n >= 1 => Ok(n),
                    _ => Err(bad(format!(
                        "{key} must be a positive integer, found {v:?}"
                    ))),
                }
            };
            match key {
                "width" => width = Some(dimension(value)?),
                "height" => height = Some(dimension(value)?),
                "bands" => bands = Some(dimension(value)?),
                "dtype" => {
                    sample_type = Some(
                        value
                            .parse::<SampleType>()
                            .map_err(|_| bad(format!("unknown sample type tag {value:?}")))?,
                    )
                }
                "byteorder" => {
                    if value != "little" {
                        return Err(bad(format!("unsupported byte order {value:?}")));
                    }
                    byteorder_seen = true;
                }
                other => return Err(bad(format!("unknown header key {other:?}"))),
            }
        }
        let missing = |key: &str| Error::Format {
            offset,
            message: format!("header is missing `{key}`"),
        };
        if !byteorder_seen {
            return Err(missing("byteorder"));
        }
        Ok(RasterHeader {
            width: width.ok_or_else(|| missing("width"))?,
            height: height.ok_or_else(|| missing("height"))?,
            bands: bands.ok_or_else(|| missing("bands"))?,
            sample_type: sample_type.ok_or_else(|| missing("dtype"))?,
        })
    }
}

/// Dense multi-band image. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    width: usize,
    height: usize,
    bands: usize,
    sample_type: SampleType,
    samples: Vec<f64>,
}

impl Raster {
    /// Builds a raster from band-sequential samples.
    ///
    /// Integer types reject fractional or out-of-range values; `F32` rounds
    /// each sample to single precision.
    pub fn new(
        width: usize,
        height: usize,
        bands: usize,
        sample_type: SampleType,
        mut samples: Vec<f64>,
    ) -> Result<Self> {
        if width == 0 || height == 0 || bands == 0 {
            return Err(Error::Shape(format!(
                "raster dimensions must be positive, got {width}x{height}x{bands}"
            )));
        }
        let expected = width * height * bands;
        if samples.len() != expected {
            return Err(Error::Shape(format!(
                "{width}x{height}x{bands} raster needs {expected} samples, got {}",
                samples.len()
            )));
        }
        for (i, s) in samples.iter_mut().enumerate() {
            *s = sample_type.admit(*s).map_err(|why| {
                Error::Numeric(format!("sample {i} ({s}) invalid for {sample_type}: {why}"))
            })?;
        }
        Ok(Raster {
            width,
            height,
            bands,
            sample_type,
            samples,
        })
    }

    pub fn zeros(
        width: usize,
        height: usize,
        bands: usize,
        sample_type: SampleType,
    ) -> Result<Self> {
        Raster::new(
            width,
            height,
            bands,
            sample_type,
            vec![0.0; width * height * bands],
        )
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bands(&self) -> usize {
        self.bands
    }

    pub fn sample_type(&self) -> SampleType {
        self.sample_type
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn header(&self) -> RasterHeader {
        RasterHeader {
            width: self.width,
            height: self.height,
            bands: self.bands,
            sample_type: self.sample_type,
        }
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    /// Row-major plane of band `b`.
    pub fn band(&self, b: usize) -> &[f64] {
        let plane = self.pixel_count();
        &self.samples[b * plane..(b + 1) * plane]
    }

    #[inline]
    pub fn sample(&self, x: usize, y: usize, b: usize) -> f64 {
        self.samples[b * self.pixel_count() + y * self.width + x]
    }

    /// Copies the pixel at linear index `y * width + x` into `out`.
    #[inline]
    pub(crate) fn fill_pixel(&self, index: usize, out: &mut [f64]) {
        let plane = self.pixel_count();
        for (b, slot) in out.iter_mut().enumerate() {
            *slot = self.samples[b * plane + index];
        }
    }

    pub fn pixel_vector(&self, x: usize, y: usize) -> Result<FeatureVector> {
        if x >= self.width || y >= self.height {
            return Err(Error::Index {
                x,
                y,
                width: self.width,
                height: self.height,
            });
        }
        let mut values = vec![0.0; self.bands];
        self.fill_pixel(y * self.width + x, &mut values);
        Ok(FeatureVector::from_finite(values))
    }

    /// All pixel vectors inside `region`, in row-major order.
    pub fn extract_region(&self, region: &Region) -> Result<Vec<FeatureVector>> {
        if !region.fits_within(self.width, self.height) {
            return Err(Error::Bounds(format!(
                "{region} does not fit inside {}x{} raster",
                self.width, self.height
            )));
        }
        let mut out = Vec::with_capacity(region.width * region.height);
        for y in region.y..region.y + region.height {
            for x in region.x..region.x + region.width {
                let mut values = vec![0.0; self.bands];
                self.fill_pixel(y * self.width + x, &mut values);
                out.push(FeatureVector::from_finite(values));
            }
        }
        Ok(out)
    }

    /// Rescales every band independently to `[0, 1]` by its own min and max.
    /// Constant bands map to zero.
    pub fn normalized_minmax(&self) -> Raster {
        let plane = self.pixel_count();
        let mut samples = Vec::with_capacity(self.samples.len());
        for b in 0..self.bands {
            let band = &self.samples[b * plane..(b + 1) * plane];
            let lo = band.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = band.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let span = hi - lo;
            samples.extend(
                band.iter()
                    .map(|v| if span > 0.0 { (v - lo) / span } else { 0.0 }),
            );
        }
        Raster::new(
            self.width,
            self.height,
            self.bands,
            SampleType::F32,
            samples,
        )
        .expect("normalized samples lie in [0, 1]")
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn skip_whitespace_and_comments(&mut self) {
        while let Some(&c) = self.bytes.get(self.pos) {
            if c == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else if c.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn decimal(&mut self, what: &str) -> Result<usize> {
        self.skip_whitespace_and_comments();
        let start = self.pos;
        let mut value: usize = 0;
        while let Some(&c) = self.bytes.get(self.pos) {
            if !c.is_ascii_digit() {
                break;
            }
            value = value
                .checked_mul(10)
                .and_then(|v| v.checked_add((c - b'0') as usize))
                .ok_or_else(|| Error::Format {
                    offset: start,
                    message: format!("{what} overflows"),
                })?;
            self.pos += 1;
        }
        if self.pos == start {
            if self.pos >= self.bytes.len() {
                return Err(Error::Truncated {
                    expected: self.pos + 1,
                    found: self.bytes.len(),
                });
            }
            return Err(Error::Format {
                offset: start,
                message: format!("expected decimal {what}"),
            });
        }
        Ok(value)
    }
}

/// Decodes a binary NetPBM `P6` image into a 3-band raster (R, G, B).
///
/// Samples keep their stored integer values; `maxval` above 255 selects
/// 16-bit big-endian samples as NetPBM prescribes.
pub fn decode_ppm(bytes: &[u8]) -> Result<Raster> {
    if bytes.len() < 2 {
        return Err(Error::Truncated {
            expected: 2,
            found: bytes.len(),
        });
    }
    if &bytes[..2] != b"P6" {
        return Err(Error::Format {
            offset: 0,
            message: "missing P6 magic".into(),
        });
    }
    let mut cur = Cursor { bytes, pos: 2 };
    if let Some(&c) = bytes.get(2) {
        if !c.is_ascii_whitespace() && c != b'#' {
            return Err(Error::Format {
                offset: 2,
                message: "magic must be followed by whitespace".into(),
            });
        }
    }
    cur.skip_whitespace_and_comments();
    let dims_at = cur.pos;
    let width = cur.decimal("width")?;
    let height = cur.decimal("height")?;
    if width == 0 || height == 0 {
        return Err(Error::Format {
            offset: dims_at,
            message: format!("dimensions must be positive, got {width}x{height}"),
        });
    }
    cur.skip_whitespace_and_comments();
    let maxval_at = cur.pos;
    let maxval = cur.decimal("maxval")?;
    if maxval == 0 || maxval > 65535 {
        return Err(Error::Format {
            offset: maxval_at,
            message: format!("maxval must lie in 1..=65535, got {maxval}"),
        });
    }
    match bytes.get(cur.pos) {
        Some(c) if c.is_ascii_whitespace() => cur.pos += 1,
        Some(_) => {
            return Err(Error::Format {
                offset: cur.pos,
                message: "maxval must be followed by a single whitespace byte".into(),
            })
        }
        None => {
            return Err(Error::Truncated {
                expected: cur.pos + 1,
                found: bytes.len(),
            })
        }
    }

    let (sample_type, bps) = if maxval <= 255 {
        (SampleType::U8, 1)
    } else {
        (SampleType::U16, 2)
    };
    let plane = width * height;
    let payload = plane * 3 * bps;
    let data = &bytes[cur.pos..];
    if data.len() < payload {
        return Err(Error::Truncated {
            expected: cur.pos + payload,
            found: bytes.len(),
        });
    }
    let mut samples = vec![0.0; plane * 3];
    for i in 0..plane * 3 {
        let value = if bps == 1 {
            data[i] as usize
        } else {
            u16::from_be_bytes([data[2 * i], data[2 * i + 1]]) as usize
        };
        if value > maxval {
            return Err(Error::Format {
                offset: cur.pos + i * bps,
                message: format!("sample {value} exceeds maxval {maxval}"),
            });
        }
        // interleaved RGB -> band planes
        samples[(i % 3) * plane + i / 3] = value as f64;
    }
    Raster::new(width, height, 3, sample_type, samples)
}

pub fn read_ppm<R: Read>(mut reader: R) -> Result<Raster> {
    let mut bytes = Vec::new();
    reader
        .read_to_end(&mut bytes)
        .map_err(|e| Error::io("<ppm stream>", e))?;
    decode_ppm(&bytes)
}

/// Encodes a 3-band raster as binary `P6`.
///
/// `U16` rasters are written with maxval 65535; everything else with maxval
/// 255, rounding and clamping non-integer samples.
pub fn write_ppm(raster: &Raster) -> Result<Vec<u8>> {
    if raster.bands != 3 {
        return Err(Error::Shape(format!(
            "P6 needs exactly 3 bands, raster has {}",
            raster.bands
        )));
    }
    let maxval: u32 = if raster.sample_type == SampleType::U16 {
        65535
    } else {
        255
    };
    let mut out = format!("P6\n{} {}\n{}\n", raster.width, raster.height, maxval).into_bytes();
    let plane = raster.pixel_count();
    out.reserve(plane * 3 * if maxval > 255 { 2 } else { 1 });
    for i in 0..plane {
        for b in 0..3 {
            let v = raster.samples[b * plane + i]
                .round()
                .clamp(0.0, maxval as f64) as u32;
            if maxval > 255 {
                out.extend_from_slice(&(v as u16).to_be_bytes());
            } else {
                out.push(v as u8);
            }
        }
    }
    Ok(out)
}

/// Decodes band-sequential little-endian samples described by `header`.
pub fn decode_bsq(header: &RasterHeader, bytes: &[u8]) -> Result<Raster> {
    let expected = header.data_len();
    if bytes.len() != expected {
        return Err(Error::Truncated {
            expected,
            found: bytes.len(),
        });
    }
    let samples: Vec<f64> = match header.sample_type {
        SampleType::U8 => bytes.iter().map(|&b| b as f64).collect(),
        SampleType::U16 => bytes
            .chunks_exact(2)
            .map(|c| u16::from_le_bytes([c[0], c[1]]) as f64)
            .collect(),
        SampleType::F32 => {
            let mut out = Vec::with_capacity(bytes.len() / 4);
            for (i, c) in bytes.chunks_exact(4).enumerate() {
                let v = f32::from_le_bytes([c[0], c[1], c[2], c[3]]);
                if !v.is_finite() {
                    return Err(Error::Format {
                        offset: i * 4,
                        message: "non-finite f32 sample".into(),
                    });
                }
                out.push(v as f64);
            }
            out
        }
    };
    Raster::new(
        header.width,
        header.height,
        header.bands,
        header.sample_type,
        samples,
    )
}

pub fn read_bsq<R: Read>(header: &RasterHeader, mut reader: R) -> Result<Raster> {
    let mut bytes = Vec::with_capacity(header.data_len());
    reader
        .read_to_end(&mut bytes)
        .map_err(|e| Error::io("<bsq stream>", e))?;
    decode_bsq(header, &bytes)
}

/// Encodes `raster` as band-sequential little-endian samples.
pub fn write_bsq(raster: &Raster) -> (RasterHeader, Vec<u8>) {
    let header = raster.header();
    let mut out = Vec::with_capacity(header.data_len());
    match raster.sample_type {
        SampleType::U8 => out.extend(raster.samples.iter().map(|&v| v as u8)),
        SampleType::U16 => {
            for &v in &raster.samples {
                out.extend_from_slice(&(v as u16).to_le_bytes());
            }
        }
        SampleType::F32 => {
            for &v in &raster.samples {
                out.extend_from_slice(&(v as f32).to_le_bytes());
            }
        }
    }
    (header, out)
}

/// Path of the raw sample file paired with a BSQ header path.
pub fn bsq_data_path(header_path: &Path) -> PathBuf {
    header_path.with_extension("bsq")
}

pub fn load_ppm(path: &Path) -> Result<Raster> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_ppm(&bytes)
}

pub fn save_ppm(raster: &Raster, path: &Path) -> Result<()> {
    let bytes = write_ppm(raster)?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Loads a BSQ raster from its header file; samples come from the sibling
/// `.bsq` file.
pub fn load_bsq(header_path: &Path) -> Result<Raster> {
    let text = fs::read_to_string(header_path).map_err(|e| Error::io(header_path, e))?;
    let header: RasterHeader = text.parse()?;
    let data_path = bsq_data_path(header_path);
    let bytes = fs::read(&data_path).map_err(|e| Error::io(&data_path, e))?;
    decode_bsq(&header, &bytes)
}

pub fn save_bsq(raster: &Raster, header_path: &Path) -> Result<()> {
    let (header, bytes) = write_bsq(raster);
    fs::write(header_path, header.to_string()).map_err(|e| Error::io(header_path, e))?;
    let data_path = bsq_data_path(header_path);
    fs::write(&data_path, bytes).map_err(|e| Error::io(&data_path, e))
}

/// Loads `.ppm` files as P6 and anything else as a BSQ header.
pub fn load_image(path: &Path) -> Result<Raster> {
    match path.extension().and_then(|e| e.to_str()) {
        Some(ext) if ext.eq_ignore_ascii_case("ppm") => load_ppm(path),
        _ => load_bsq(path),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::region::{Purpose, Region};
    use crate::ClassId;
    use proptest::prelude::*;

    fn region(x: usize, y: usize, width: usize, height: usize) -> Region {
        Region {
            class_id: ClassId::new(0).unwrap(),
            x,
            y,
            width,
            height,
            purpose: Purpose::Training,
        }
    }

    #[test]
    fn ppm_two_pixels() {
        let bytes = b"P6\n2 1\n255\n\xff\x00\x00\x00\x00\xff";
        let r = decode_ppm(bytes).unwrap();
        assert_eq!((r.width(), r.height(), r.bands()), (2, 1, 3));
        assert_eq!(r.pixel_vector(0, 0).unwrap().as_slice(), &[255.0, 0.0, 0.0]);
        assert_eq!(r.pixel_vector(1, 0).unwrap().as_slice(), &[0.0, 0.0, 255.0]);
    }

    #[test]
    fn ppm_zero_pixel() {
        let r = decode_ppm(b"P6 1 1 255\n\0\0\0").unwrap();
        assert_eq!(r.pixel_vector(0, 0).unwrap().as_slice(), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn ppm_skips_comments() {
        let bytes = b"P6\n# made by hand\n1 # width\n1\n# maxval next\n255\n\x01\x02\x03";
        let r = decode_ppm(bytes).unwrap();
        assert_eq!(r.pixel_vector(0, 0).unwrap().as_slice(), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn ppm_full_scene_size() {
        let (w, h) = (864, 580);
        let mut bytes = format!("P6\n{w} {h}\n255\n").into_bytes();
        bytes.extend((0..w * h * 3).map(|i| (i % 251) as u8));
        let r = decode_ppm(&bytes).unwrap();
        assert_eq!(r.samples().len(), 864 * 580 * 3);
    }

    #[test]
    fn ppm_sixteen_bit_is_big_endian() {
        let r = decode_ppm(b"P6 1 1 65535\n\x01\x00\x00\x02\xff\xff").unwrap();
        assert_eq!(r.sample_type(), SampleType::U16);
        assert_eq!(
            r.pixel_vector(0, 0).unwrap().as_slice(),
            &[256.0, 2.0, 65535.0]
        );
        assert_eq!(
            write_ppm(&r).unwrap(),
            b"P6\n1 1\n65535\n\x01\x00\x00\x02\xff\xff"
        );
    }

    #[test]
    fn ppm_errors() {
        assert!(matches!(
            decode_ppm(b"P5\n1 1\n255\n\0"),
            Err(Error::Format { offset: 0, .. })
        ));
        assert!(matches!(
            decode_ppm(b"P6\nx 1\n255\n\0\0\0"),
            Err(Error::Format { offset: 3, .. })
        ));
        assert!(matches!(
            decode_ppm(b"P6\n0 1\n255\n"),
            Err(Error::Format { .. })
        ));
        assert!(matches!(
            decode_ppm(b"P6\n1 1\n70000\n\0\0\0"),
            Err(Error::Format { offset: 7, .. })
        ));
        assert!(matches!(
            decode_ppm(b"P6\n2 1\n255\n\0\0\0"),
            Err(Error::Truncated {
                expected: 17,
                found: 14
            })
        ));
        assert!(matches!(decode_ppm(b"P6\n2"), Err(Error::Truncated { .. })));
        assert!(matches!(
            decode_ppm(b"P6\n1 1\n100\n\x00\x65\x00"),
            Err(Error::Format { offset: 12, .. })
        ));
    }

    #[test]
    fn write_ppm_requires_three_bands() {
        let r = Raster::zeros(2, 2, 4, SampleType::U8).unwrap();
        assert!(matches!(write_ppm(&r), Err(Error::Shape(_))));
    }

    #[test]
    fn write_ppm_zero_raster() {
        let r = Raster::zeros(3, 2, 3, SampleType::U8).unwrap();
        let bytes = write_ppm(&r).unwrap();
        let header = b"P6\n3 2\n255\n";
        assert_eq!(&bytes[..header.len()], header);
        assert!(bytes[header.len()..].iter().all(|&b| b == 0));
        assert_eq!(bytes.len(), header.len() + 18);
    }

    #[test]
    fn write_ppm_clamps_float_samples() {
        let r = Raster::new(1, 1, 3, SampleType::F32, vec![-4.0, 12.6, 300.0]).unwrap();
        let bytes = write_ppm(&r).unwrap();
        assert_eq!(&bytes[bytes.len() - 3..], &[0, 13, 255]);
    }

    #[test]
    fn bsq_two_byte_decode() {
        let h = RasterHeader {
            width: 1,
            height: 1,
            bands: 2,
            sample_type: SampleType::U8,
        };
        let r = decode_bsq(&h, &[7, 9]).unwrap();
        assert_eq!(r.pixel_vector(0, 0).unwrap().as_slice(), &[7.0, 9.0]);
    }

    #[test]
    fn bsq_little_endian_u16() {
        let h = RasterHeader {
            width: 2,
            height: 1,
            bands: 1,
            sample_type: SampleType::U16,
        };
        let r = decode_bsq(&h, &[0x01, 0x00, 0x00, 0x01]).unwrap();
        assert_eq!(r.samples(), &[1.0, 256.0]);
    }

    #[test]
    fn bsq_length_mismatch() {
        let h = RasterHeader {
            width: 2,
            height: 2,
            bands: 1,
            sample_type: SampleType::U16,
        };
        assert!(matches!(
            decode_bsq(&h, &[0; 7]),
            Err(Error::Truncated {
                expected: 8,
                found: 7
            })
        ));
    }

    #[test]
    fn header_text_round_trip() {
        let h = RasterHeader {
            width: 864,
            height: 580,
            bands: 4,
            sample_type: SampleType::F32,
        };
        let text = h.to_string();
        assert_eq!(
            text,
            "width = 864\nheight = 580\nbands = 4\ndtype = f32\nbyteorder = little\n"
        );
        assert_eq!(text.parse::<RasterHeader>().unwrap(), h);
    }

    #[test]
    fn header_rejects_unknown_dtype_and_byteorder() {
        let bad_type = "width = 1\nheight = 1\nbands = 1\ndtype = i64\nbyteorder = little\n";
        assert!(matches!(
            bad_type.parse::<RasterHeader>(),
            Err(Error::Format { offset: 31, .. })
        ));
        let big = "width = 1\nheight = 1\nbands = 1\ndtype = u8\nbyteorder = big\n";
        assert!(matches!(
            big.parse::<RasterHeader>(),
            Err(Error::Format { .. })
        ));
        let missing = "width = 1\nheight = 1\ndtype = u8\nbyteorder = little\n";
        assert!(missing.parse::<RasterHeader>().is_err());
    }

    #[test]
    fn raster_rejects_out_of_range_samples() {
        assert!(Raster::new(1, 1, 1, SampleType::U8, vec![256.0]).is_err());
        assert!(Raster::new(1, 1, 1, SampleType::U16, vec![1.5]).is_err());
        assert!(Raster::new(1, 1, 1, SampleType::F32, vec![f64::NAN]).is_err());
        assert!(Raster::new(2, 1, 1, SampleType::U8, vec![1.0]).is_err());
    }

    #[test]
    fn pixel_vector_cases() {
        let r = Raster::new(1, 1, 3, SampleType::U8, vec![5.0, 6.0, 7.0]).unwrap();
        assert_eq!(r.pixel_vector(0, 0).unwrap().as_slice(), &[5.0, 6.0, 7.0]);
        assert!(matches!(r.pixel_vector(1, 0), Err(Error::Index { .. })));

        let bytes = b"P6 2 2 255\n\x01\x02\x03\x04\x05\x06\x07\x08\x09\x0a\x0b\x0c";
        let r = decode_ppm(bytes).unwrap();
        assert_eq!(
            r.pixel_vector(1, 1).unwrap().as_slice(),
            &[10.0, 11.0, 12.0]
        );
        assert_eq!(r.pixel_vector(0, 1).unwrap().as_slice(), &[7.0, 8.0, 9.0]);
    }

    #[test]
    fn extract_region_cases() {
        let samples: Vec<f64> = (0..8 * 8 * 2).map(|v| (v % 200) as f64).collect();
        let r = Raster::new(8, 8, 2, SampleType::U8, samples).unwrap();
        assert_eq!(r.extract_region(&region(2, 3, 4, 4)).unwrap().len(), 16);
        let single = r.extract_region(&region(5, 6, 1, 1)).unwrap();
        assert_eq!(single, vec![r.pixel_vector(5, 6).unwrap()]);
        let a = r.extract_region(&region(0, 0, 4, 4)).unwrap();
        let b = r.extract_region(&region(4, 4, 2, 3)).unwrap();
        assert_eq!(a.len() + b.len(), 22);
        assert!(matches!(
            r.extract_region(&region(6, 6, 4, 1)),
            Err(Error::Bounds(_))
        ));
        assert!(matches!(
            r.extract_region(&region(0, 7, 1, 2)),
            Err(Error::Bounds(_))
        ));
    }

    #[test]
    fn normalization_maps_bands_to_unit_interval() {
        let r = Raster::new(2, 1, 2, SampleType::U8, vec![10.0, 30.0, 5.0, 5.0]).unwrap();
        let n = r.normalized_minmax();
        assert_eq!(n.samples(), &[0.0, 1.0, 0.0, 0.0]);
    }

    fn any_raster() -> impl Strategy<Value = Raster> {
        (1usize..6, 1usize..6, 1usize..5, 0usize..3).prop_flat_map(|(w, h, b, t)| {
            let n = w * h * b;
            let ty = [SampleType::U8, SampleType::U16, SampleType::F32][t];
            let values = match ty {
                SampleType::U8 => {
                    prop::collection::vec((0u32..=255).prop_map(f64::from), n).boxed()
                }
                SampleType::U16 => {
                    prop::collection::vec((0u32..=65535).prop_map(f64::from), n).boxed()
                }
                SampleType::F32 => prop::collection::vec(-1e6f64..1e6, n).boxed(),
            };
            values.prop_map(move |s| Raster::new(w, h, b, ty, s).unwrap())
        })
    }

    proptest! {
        #[test]
        fn bsq_round_trip(r in any_raster()) {
            let (header, bytes) = write_bsq(&r);
            let back = decode_bsq(&header.to_string().parse().unwrap(), &bytes).unwrap();
            prop_assert_eq!(&back, &r);
            prop_assert_eq!(write_bsq(&back).1, bytes);
        }

        #[test]
        fn pixel_vector_matches_plane_indexing(r in any_raster(), px in 0usize..6, py in 0usize..6) {
            let (x, y) = (px % r.width(), py % r.height());
            let v = r.pixel_vector(x, y).unwrap();
            for b in 0..r.bands() {
                let plane = &r.samples()[b * r.width() * r.height()..];
                prop_assert_eq!(v[b], plane[y * r.width() + x]);
            }
        }

        #[test]
        fn full_region_enumerates_every_pixel(r in any_raster()) {
            let all = r.extract_region(&region(0, 0, r.width(), r.height())).unwrap();
            prop_assert_eq!(all.len(), r.width() * r.height());
            for (i, v) in all.iter().enumerate() {
                let (x, y) = (i % r.width(), i / r.width());
                prop_assert_eq!(v, &r.pixel_vector(x, y).unwrap());
            }
        }

        #[test]
        fn ppm_round_trip_u8(w in 1usize..7, h in 1usize..7, seed in prop::collection::vec(0u8..=255, 147)) {
            let samples: Vec<f64> = (0..w * h * 3).map(|i| seed[i % seed.len()] as f64).collect();
            let r = Raster::new(w, h, 3, SampleType::U8, samples).unwrap();
            let bytes = write_ppm(&r).unwrap();
            let back = decode_ppm(&bytes).unwrap();
            prop_assert_eq!(&back, &r);
            prop_assert_eq!(write_ppm(&back).unwrap(), bytes);
        }
    }
}
