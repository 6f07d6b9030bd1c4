//! Accuracy-versus-k sweeps.

use std::fmt::Write as _;

use crate::classify::{self, SplitPlan};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::selectors::{self, BandTable, Method, SelectorConfig};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Accuracy {
    pub oa: f64,
    pub aa: f64,
    pub kappa: f64,
}

/// One curve point; `accuracy` is `None` when the method ran out of bands
/// before reaching `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub method: Method,
    pub k: usize,
    pub train_fraction: f64,
    pub accuracy: Option<Accuracy>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CurveTable {
    pub rows: Vec<CurveRow>,
}

impl CurveTable {
    pub const HEADER: &'static str = "method,k,train_fraction,oa,aa,kappa";

    /// Exhausted points keep their row with empty metric fields.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = write!(out, "{},{},{:.6},", r.method, r.k, r.train_fraction);
            match r.accuracy {
                Some(a) => {
                    let _ = writeln!(out, "{:.6},{:.6},{:.6}", a.oa, a.aa, a.kappa);
                }
                None => out.push_str(",,\n"),
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub methods: Vec<Method>,
    pub k_grid: Vec<usize>,
    pub fractions: Vec<f64>,
    pub seed: u64,
    pub neighbors: usize,
    /// `k` is ignored; the sweep selects at the largest grid value.
    pub selector: SelectorConfig,
}

/// `k_min, k_min + step, ...` up to and including `k_max` when it lies on
/// the grid.
pub fn k_grid(k_min: usize, k_max: usize, step: usize) -> Result<Vec<usize>> {
    if step == 0 || k_min == 0 || k_min > k_max {
        return Err(Error::config(format!("invalid k grid {k_min}..={k_max} step {step}")));
    }
    Ok((k_min..=k_max).step_by(step).collect())
}

/// Selects once per method at the largest k and evaluates every grid
/// prefix under every split fraction. Rows are ordered by method, then k,
/// then fraction.
pub fn sweep(table: &BandTable, cfg: &SweepConfig, exec: Execution) -> Result<CurveTable> {
    if cfg.methods.is_empty() {
        return Err(Error::config("no methods to sweep"));
    }
    if cfg.fractions.is_empty() {
        return Err(Error::config("no train fractions to sweep"));
    }
    let mut grid = cfg.k_grid.clone();
    grid.sort_unstable();
    grid.dedup();
    let k_max = *grid.last().ok_or_else(|| Error::config("empty k grid"))?;
    if grid[0] == 0 {
        return Err(Error::config("k must be at least 1"));
    }

    let labels = table.labels();
    let splits = cfg
        .fractions
        .iter()
        .map(|&f| classify::stratified_split_labels(&labels, f, cfg.seed))
        .collect::<Result<Vec<SplitPlan>>>()?;

    let sel_cfg = SelectorConfig {
        k: k_max,
        ..cfg.selector
    };
    let mut rows = Vec::with_capacity(cfg.methods.len() * grid.len() * splits.len());
    for &method in &cfg.methods {
        let ranking = selectors::select_with(method, table, &sel_cfg, exec)?;
        for &k in &grid {
            for split in &splits {
                let accuracy = if k <= ranking.ranked_bands.len() {
                    let eval = classify::evaluate_bands(table, ranking.prefix(k), split, cfg.neighbors, exec)?;
                    let m = eval.metrics;
                    Some(Accuracy {
                        oa: m.overall_accuracy,
                        aa: m.average_accuracy,
                        kappa: m.kappa,
                    })
                } else {
                    None
                };
                rows.push(CurveRow {
                    method,
                    k,
                    train_fraction: split.fraction,
                    accuracy,
                });
            }
        }
    }
    Ok(CurveTable { rows })
}
