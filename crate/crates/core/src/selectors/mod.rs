//! Greedy band-subset selection over a shared [`BandTable`].
//!
//! Every method picks `argmax MI(band, class)` first and then grows the
//! subset one band at a time. Scores within [`TIE_TOLERANCE`] of the step's
//! best are treated as tied and the lowest band index wins, so the outcome
//! does not depend on evaluation order or on sub-ulp rounding differences
//! between algebraically equal scores.

mod classic;
mod mibf;
mod nms;

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cube_io::{self, DiscreteVariable, GroundTruthMap, HyperCube, QuantizerConfig};
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::infotheory;

pub use classic::select_greedy_classic;
pub use mibf::select_mibf;
pub use nms::{run_nms, select_nms, EstimatedGroundTruth};

/// Scores closer than this to the step maximum count as ties.
pub const TIE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Nms,
    Mifs,
    MifsU,
    Mrmr,
    Jmi,
    Disr,
    Mibf,
    Nmi,
}

impl Method {
    pub const ALL: [Method; 8] = [
        Method::Nms,
        Method::Mifs,
        Method::MifsU,
        Method::Mrmr,
        Method::Jmi,
        Method::Disr,
        Method::Mibf,
        Method::Nmi,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Nms => "nms",
            Method::Mifs => "mifs",
            Method::MifsU => "mifs_u",
            Method::Mrmr => "mrmr",
            Method::Jmi => "jmi",
            Method::Disr => "disr",
            Method::Mibf => "mibf",
            Method::Nmi => "nmi",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('-', "_");
        Method::ALL
            .into_iter()
            .find(|m| m.name() == norm)
            .ok_or_else(|| Error::config(format!("unknown method {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectorConfig {
    /// Number of bands to select.
    pub k: usize,
    /// Redundancy weight for MIFS, MIFS-U and NMI.
    pub beta: f64,
    /// MIBF cutoff on pairwise band MI, in bits.
    pub threshold: f64,
    /// Denominator guard of the normalized synergy.
    pub eps: f64,
}

impl SelectorConfig {
    pub fn new(k: usize) -> Self {
        SelectorConfig {
            k,
            beta: 1.0,
            threshold: 0.5,
            eps: infotheory::DEFAULT_EPS,
        }
    }

    pub fn validate(&self, band_count: usize) -> Result<()> {
        if self.k == 0 || self.k > band_count {
            return Err(Error::config(format!("k must lie in 1..={band_count}, got {}", self.k)));
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(Error::config(format!("beta must be >= 0, got {}", self.beta)));
        }
        if self.threshold.is_nan() || self.threshold < 0.0 {
            return Err(Error::config(format!("threshold must be >= 0, got {}", self.threshold)));
        }
        if self.eps.is_nan() || self.eps <= 0.0 {
            return Err(Error::config(format!("eps must be > 0, got {}", self.eps)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub method: Method,
    /// Band indices in selection order.
    pub ranked_bands: Vec<usize>,
    /// Winning objective value at each pick.
    pub scores: Vec<f64>,
    pub config: SelectorConfig,
    /// Set when MIBF ran out of acceptable bands before reaching `k`.
    pub exhausted: bool,
}

impl SelectionResult {
    /// `rank,band_index,score` CSV, ranks starting at 1.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "rank,band_index,score")?;
        for (r, (b, s)) in self.ranked_bands.iter().zip(&self.scores).enumerate() {
            writeln!(w, "{},{},{:.6}", r + 1, b, s)?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec");
        String::from_utf8(buf).expect("ascii")
    }

    /// The first `k` picks, as a greedy run stopped at `k` would produce.
    pub fn prefix(&self, k: usize) -> &[usize] {
        &self.ranked_bands[..k.min(self.ranked_bands.len())]
    }
}

/// Band indices from a `rank,band_index,score` CSV, in file order.
pub fn parse_band_list(text: &str) -> Result<Vec<usize>> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| Error::Parse("empty band list".into()))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    let col = cols
        .iter()
        .position(|&c| c == "band_index")
        .ok_or_else(|| Error::Parse("band list has no band_index column".into()))?;
    lines
        .enumerate()
        .map(|(i, line)| {
            line.split(',')
                .nth(col)
                .and_then(|f| f.trim().parse::<usize>().ok())
                .ok_or_else(|| Error::Parse(format!("bad band list row {}: {line:?}", i + 2)))
        })
        .collect()
}

/// Quantized bands plus the class variable, all over the labeled pixels.
#[derive(Debug, Clone)]
pub struct BandTable {
    bands: Vec<DiscreteVariable>,
    class_var: DiscreteVariable,
    raw_bands: Vec<Vec<f64>>,
    quantizer: QuantizerConfig,
}

impl BandTable {
    /// Quantizes each raw band with `quantizer`.
    pub fn new(
        raw_bands: Vec<Vec<f64>>,
        class_var: DiscreteVariable,
        quantizer: QuantizerConfig,
        exec: Execution,
    ) -> Result<Self> {
        quantizer.validate()?;
        if raw_bands.is_empty() {
            return Err(Error::Dimension("band table needs at least one band".into()));
        }
        let n = class_var.len();
        if n == 0 {
            return Err(Error::EmptySample);
        }
        if let Some(b) = raw_bands.iter().find(|b| b.len() != n) {
            return Err(Error::LengthMismatch(n, b.len()));
        }
        let bands = exec::map(exec, &raw_bands, |b| quantizer.quantize(b))
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        Ok(BandTable {
            bands,
            class_var,
            raw_bands,
            quantizer,
        })
    }

    pub fn from_scene(
        cube: &HyperCube,
        gt: &GroundTruthMap,
        quantizer: QuantizerConfig,
        exec: Execution,
    ) -> Result<Self> {
        gt.check_matches(cube)?;
        let order = cube_io::labeled_pixel_order(gt);
        let class_var = cube_io::label_variable(gt, &order);
        let raw = cube_io::labeled_band_values(cube, &order, exec);
        BandTable::new(raw, class_var, quantizer, exec)
    }

    pub fn band_count(&self) -> usize {
        self.bands.len()
    }

    /// Number of labeled samples.
    pub fn samples(&self) -> usize {
        self.class_var.len()
    }

    pub fn band(&self, i: usize) -> &DiscreteVariable {
        &self.bands[i]
    }

    pub fn bands(&self) -> &[DiscreteVariable] {
        &self.bands
    }

    pub fn raw_band(&self, i: usize) -> &[f64] {
        &self.raw_bands[i]
    }

    pub fn class_var(&self) -> &DiscreteVariable {
        &self.class_var
    }

    /// Class labels (`symbol + 1`) of the samples.
    pub fn labels(&self) -> Vec<u16> {
        self.class_var.symbols().iter().map(|&s| s as u16 + 1).collect()
    }

    pub fn quantizer(&self) -> &QuantizerConfig {
        &self.quantizer
    }

    /// `MI(band, class)` for every band.
    pub fn relevance(&self, exec: Execution) -> Result<Vec<f64>> {
        exec::map(exec, &self.bands, |b| infotheory::mutual_info(b, &self.class_var))
            .into_iter()
            .collect()
    }
}

/// Position in `candidates` of the best score: the lowest band index among
/// the scores within [`TIE_TOLERANCE`] of the maximum.
pub(crate) fn pick_best(candidates: &[usize], scores: &[f64]) -> usize {
    debug_assert_eq!(candidates.len(), scores.len());
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let floor = max - TIE_TOLERANCE;
    candidates
        .iter()
        .zip(scores)
        .enumerate()
        .filter(|(_, (_, &s))| s >= floor)
        .min_by_key(|(_, (&band, _))| band)
        .map(|(pos, _)| pos)
        .expect("at least one candidate")
}

pub fn select(method: Method, table: &BandTable, cfg: &SelectorConfig) -> Result<SelectionResult> {
    select_with(method, table, cfg, Execution::default())
}

pub fn select_with(
    method: Method,
    table: &BandTable,
    cfg: &SelectorConfig,
    exec: Execution,
) -> Result<SelectionResult> {
    match method {
        Method::Nms => select_nms(table, cfg, exec),
        Method::Mibf => select_mibf(table, cfg, exec),
        m => select_greedy_classic(m, table, cfg, exec),
    }
}
