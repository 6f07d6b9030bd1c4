//! Cube and ground-truth files, and their reduction to discrete per-pixel
//! variables.
//!
//! A cube is stored as two files sharing a stem:
//!
//! * `<name>.hsch`: UTF-8 JSON header,
//!   `{"bands":B,"rows":R,"cols":C,"dtype":"u16"|"f32","order":"bsq","wavelengths_nm":[...]}`
//!   (`wavelengths_nm` optional).
//! * `<name>.hscd`: raw little-endian samples, band-sequential (band-major,
//!   then row-major).
//!
//! Ground truth is a bare `<name>.gt` file of little-endian `u16` labels in
//! row-major order, with 0 meaning "unlabeled".

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, Execution};

pub const HEADER_EXT: &str = "hsch";
pub const PAYLOAD_EXT: &str = "hscd";
pub const GROUND_TRUTH_EXT: &str = "gt";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dtype {
    U16,
    F32,
}

impl Dtype {
    pub fn as_str(self) -> &'static str {
        match self {
            Dtype::U16 => "u16",
            Dtype::F32 => "f32",
        }
    }

    pub fn size(self) -> usize {
        match self {
            Dtype::U16 => 2,
            Dtype::F32 => 4,
        }
    }
}

impl std::str::FromStr for Dtype {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "u16" => Ok(Dtype::U16),
            "f32" => Ok(Dtype::F32),
            other => Err(Error::UnknownDtype(other.to_string())),
        }
    }
}

/// Sample storage, kept in the file's native type so integer payloads
/// round-trip bit-exactly.
#[derive(Debug, Clone, PartialEq)]
pub enum CubeData {
    U16(Vec<u16>),
    F32(Vec<f32>),
}

impl CubeData {
    pub fn len(&self) -> usize {
        match self {
            CubeData::U16(v) => v.len(),
            CubeData::F32(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dtype(&self) -> Dtype {
        match self {
            CubeData::U16(_) => Dtype::U16,
            CubeData::F32(_) => Dtype::F32,
        }
    }

    #[inline]
    fn get(&self, i: usize) -> f64 {
        match self {
            CubeData::U16(v) => v[i] as f64,
            CubeData::F32(v) => v[i] as f64,
        }
    }
}

/// A band-sequential radiance cube.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperCube {
    bands: usize,
    rows: usize,
    cols: usize,
    data: CubeData,
    wavelengths_nm: Option<Vec<f64>>,
}

impl HyperCube {
    pub fn new(
        bands: usize,
        rows: usize,
        cols: usize,
        data: CubeData,
        wavelengths_nm: Option<Vec<f64>>,
    ) -> Result<Self> {
        if bands == 0 {
            return Err(Error::Dimension("cube needs at least one band".into()));
        }
        if rows == 0 || cols == 0 {
            return Err(Error::Dimension("cube needs at least one pixel".into()));
        }
        let expected = bands * rows * cols;
        if data.len() != expected {
            return Err(Error::Dimension(format!(
                "{bands}x{rows}x{cols} cube needs {expected} samples, got {}",
                data.len()
            )));
        }
        if let CubeData::F32(v) = &data {
            if let Some(i) = v.iter().position(|x| !x.is_finite()) {
                return Err(Error::NonFinite(i));
            }
        }
        if let Some(w) = &wavelengths_nm {
            if w.len() != bands {
                return Err(Error::Dimension(format!("{} wavelengths for {bands} bands", w.len())));
            }
        }
        Ok(HyperCube {
            bands,
            rows,
            cols,
            data,
            wavelengths_nm,
        })
    }

    pub fn bands(&self) -> usize {
        self.bands
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn pixels(&self) -> usize {
        self.rows * self.cols
    }

    pub fn data(&self) -> &CubeData {
        &self.data
    }

    pub fn wavelengths_nm(&self) -> Option<&[f64]> {
        self.wavelengths_nm.as_deref()
    }

    /// Sample of `band` at row-major pixel index `pixel`.
    #[inline]
    pub fn value(&self, band: usize, pixel: usize) -> f64 {
        self.data.get(band * self.pixels() + pixel)
    }

    /// Values of one band at the given pixels, in that order.
    pub fn band_values(&self, band: usize, order: &[usize]) -> Vec<f64> {
        let base = band * self.pixels();
        order.iter().map(|&p| self.data.get(base + p)).collect()
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    bands: usize,
    rows: usize,
    cols: usize,
    dtype: String,
    order: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    wavelengths_nm: Option<Vec<f64>>,
}

/// Resolves `(header, payload)` paths from either file of the pair or from
/// the bare stem.
pub fn cube_paths(path: &Path) -> (PathBuf, PathBuf) {
    match path.extension().and_then(|e| e.to_str()) {
        Some(HEADER_EXT) | Some(PAYLOAD_EXT) => (path.with_extension(HEADER_EXT), path.with_extension(PAYLOAD_EXT)),
        _ => (append_ext(path, HEADER_EXT), append_ext(path, PAYLOAD_EXT)),
    }
}

pub(crate) fn append_ext(path: &Path, ext: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

pub fn load_cube(path: impl AsRef<Path>) -> Result<HyperCube> {
    let (header_path, payload_path) = cube_paths(path.as_ref());
    let text = fs::read_to_string(&header_path).map_err(|e| Error::io(&header_path, e))?;
    let header: Header = serde_json::from_str(&text).map_err(|e| Error::Header {
        path: header_path.clone(),
        reason: e.to_string(),
    })?;
    let dtype: Dtype = header.dtype.parse()?;
    if header.order != "bsq" {
        return Err(Error::Header {
            path: header_path,
            reason: format!("unsupported order {:?}", header.order),
        });
    }
    let bytes = fs::read(&payload_path).map_err(|e| Error::io(&payload_path, e))?;
    let samples = header
        .bands
        .checked_mul(header.rows)
        .and_then(|n| n.checked_mul(header.cols))
        .ok_or_else(|| Error::Dimension("cube dimensions overflow".into()))?;
    let expected = samples * dtype.size();
    if bytes.len() != expected {
        return Err(Error::PayloadLength {
            expected,
            found: bytes.len(),
        });
    }
    let data = match dtype {
        Dtype::U16 => CubeData::U16(
            bytes
                .chunks_exact(2)
                .map(|c| u16::from_le_bytes([c[0], c[1]]))
                .collect(),
        ),
        Dtype::F32 => CubeData::F32(
            bytes
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
                .collect(),
        ),
    };
    HyperCube::new(header.bands, header.rows, header.cols, data, header.wavelengths_nm)
}

/// Writes `<stem>.hsch` and `<stem>.hscd`.
pub fn write_cube(stem: impl AsRef<Path>, cube: &HyperCube) -> Result<()> {
    let (header_path, payload_path) = cube_paths(stem.as_ref());
    let header = Header {
        bands: cube.bands,
        rows: cube.rows,
        cols: cube.cols,
        dtype: cube.data.dtype().as_str().to_string(),
        order: "bsq".to_string(),
        wavelengths_nm: cube.wavelengths_nm.clone(),
    };
    let json = serde_json::to_string(&header).expect("header serializes");
    fs::write(&header_path, json + "\n").map_err(|e| Error::io(&header_path, e))?;
    fs::write(&payload_path, encode_payload(&cube.data)).map_err(|e| Error::io(&payload_path, e))
}

pub fn encode_payload(data: &CubeData) -> Vec<u8> {
    match data {
        CubeData::U16(v) => v.iter().flat_map(|x| x.to_le_bytes()).collect(),
        CubeData::F32(v) => v.iter().flat_map(|x| x.to_le_bytes()).collect(),
    }
}

/// Per-pixel class labels; 0 is unlabeled.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruthMap {
    rows: usize,
    cols: usize,
    labels: Vec<u16>,
    class_count: usize,
}

impl GroundTruthMap {
    pub fn new(rows: usize, cols: usize, labels: Vec<u16>) -> Result<Self> {
        if labels.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{rows}x{cols} map needs {} labels, got {}",
                rows * cols,
                labels.len()
            )));
        }
        let mut seen = std::collections::BTreeSet::new();
        seen.extend(labels.iter().copied().filter(|&l| l > 0));
        if seen.len() < 2 {
            return Err(Error::TooFewClasses(seen.len()));
        }
        let class_count = *seen.iter().next_back().unwrap() as usize;
        Ok(GroundTruthMap {
            rows,
            cols,
            labels,
            class_count,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn labels(&self) -> &[u16] {
        &self.labels
    }

    /// Largest label present.
    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn check_matches(&self, cube: &HyperCube) -> Result<()> {
        if self.rows != cube.rows || self.cols != cube.cols {
            return Err(Error::Dimension(format!(
                "ground truth is {}x{}, cube is {}x{}",
                self.rows, self.cols, cube.rows, cube.cols
            )));
        }
        Ok(())
    }
}

pub fn load_ground_truth(path: impl AsRef<Path>, rows: usize, cols: usize) -> Result<GroundTruthMap> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let expected = rows * cols * 2;
    if bytes.len() != expected {
        return Err(Error::PayloadLength {
            expected,
            found: bytes.len(),
        });
    }
    let labels = bytes
        .chunks_exact(2)
        .map(|c| u16::from_le_bytes([c[0], c[1]]))
        .collect();
    GroundTruthMap::new(rows, cols, labels)
}

pub fn write_ground_truth(path: impl AsRef<Path>, gt: &GroundTruthMap) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_labels(&gt.labels)).map_err(|e| Error::io(path, e))
}

pub fn encode_labels(labels: &[u16]) -> Vec<u8> {
    labels.iter().flat_map(|x| x.to_le_bytes()).collect()
}

/// Row-major indices of every labeled pixel. This order is the shared
/// sample order of every [`DiscreteVariable`] drawn from a scene.
pub fn labeled_pixel_order(gt: &GroundTruthMap) -> Vec<usize> {
    gt.labels
        .iter()
        .enumerate()
        .filter(|(_, &l)| l > 0)
        .map(|(i, _)| i)
        .collect()
}

/// A sample of bin indices, one per labeled pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscreteVariable {
    symbols: Vec<u32>,
    cardinality: u32,
}

impl DiscreteVariable {
    pub fn new(symbols: Vec<u32>, cardinality: u32) -> Result<Self> {
        if cardinality == 0 {
            return Err(Error::Dimension("cardinality must be positive".into()));
        }
        if let Some(&s) = symbols.iter().find(|&&s| s >= cardinality) {
            return Err(Error::Dimension(format!(
                "symbol {s} outside alphabet of size {cardinality}"
            )));
        }
        Ok(DiscreteVariable { symbols, cardinality })
    }

    /// Infers the cardinality as `max + 1`.
    pub fn from_symbols(symbols: Vec<u32>) -> Self {
        let cardinality = symbols.iter().copied().max().map_or(1, |m| m + 1);
        DiscreteVariable { symbols, cardinality }
    }

    pub fn symbols(&self) -> &[u32] {
        &self.symbols
    }

    pub fn cardinality(&self) -> u32 {
        self.cardinality
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

/// Class labels of the labeled pixels as symbols `label - 1`.
pub fn label_variable(gt: &GroundTruthMap, order: &[usize]) -> DiscreteVariable {
    let symbols = order.iter().map(|&p| u32::from(gt.labels[p]) - 1).collect();
    DiscreteVariable {
        symbols,
        cardinality: gt.class_count as u32,
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuantStrategy {
    #[default]
    LinearMinMax,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuantizerConfig {
    pub bins: u32,
    pub strategy: QuantStrategy,
}

impl Default for QuantizerConfig {
    fn default() -> Self {
        QuantizerConfig {
            bins: 64,
            strategy: QuantStrategy::LinearMinMax,
        }
    }
}

impl QuantizerConfig {
    pub fn new(bins: u32) -> Result<Self> {
        let cfg = QuantizerConfig {
            bins,
            strategy: QuantStrategy::LinearMinMax,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(2..=65536).contains(&self.bins) {
            return Err(Error::config(format!("bins must lie in 2..=65536, got {}", self.bins)));
        }
        Ok(())
    }

    /// Linear min-max binning: `floor((v - min) * bins / (max - min))`,
    /// clamped to `bins - 1`. A constant input maps to symbol 0.
    pub fn quantize(&self, values: &[f64]) -> Result<DiscreteVariable> {
        self.validate()?;
        if values.is_empty() {
            return Err(Error::EmptySample);
        }
        let (min, max) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
        let range = max - min;
        let top = self.bins - 1;
        let symbols = if range > 0.0 {
            let scale = self.bins as f64;
            values
                .iter()
                .map(|&v| (((v - min) * scale / range).floor() as u32).min(top))
                .collect()
        } else {
            vec![0; values.len()]
        };
        Ok(DiscreteVariable {
            symbols,
            cardinality: self.bins,
        })
    }
}

pub fn quantize_band(
    cube: &HyperCube,
    band: usize,
    order: &[usize],
    cfg: &QuantizerConfig,
) -> Result<DiscreteVariable> {
    if band >= cube.bands {
        return Err(Error::config(format!(
            "band {band} out of range for a {}-band cube",
            cube.bands
        )));
    }
    cfg.quantize(&cube.band_values(band, order))
}

/// Raw labeled-pixel values of every band.
pub fn labeled_band_values(cube: &HyperCube, order: &[usize], exec: Execution) -> Vec<Vec<f64>> {
    exec::map_range(exec, cube.bands, |b| cube.band_values(b, order))
}
