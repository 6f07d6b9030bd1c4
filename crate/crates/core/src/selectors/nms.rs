use super::{pick_best, BandTable, Method, SelectionResult, SelectorConfig};
use crate::cube_io::DiscreteVariable;
use crate::error::Result;
use crate::exec::{self, Execution};
use crate::infotheory::{self, synergy_ratio};

/// Running estimate of the ground truth built from the selected bands.
///
/// Seeded with the first pick's raw values; every later pick is blended in
/// as `(estimate + band) / 2`, so after `t` picks band `i` carries weight
/// `2^-(t-1)` for `i = 1` and `2^-(t-i+1)` for `i >= 2`. The discrete view
/// is re-quantized with the table's quantizer after every blend.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatedGroundTruth {
    pub values: Vec<f64>,
    pub discretized: DiscreteVariable,
}

impl EstimatedGroundTruth {
    pub fn seed(table: &BandTable, band: usize) -> Result<Self> {
        let values = table.raw_band(band).to_vec();
        let discretized = table.quantizer().quantize(&values)?;
        Ok(EstimatedGroundTruth { values, discretized })
    }

    pub fn blend(&mut self, table: &BandTable, band: usize) -> Result<()> {
        for (g, &b) in self.values.iter_mut().zip(table.raw_band(band)) {
            *g = (*g + b) / 2.0;
        }
        self.discretized = table.quantizer().quantize(&self.values)?;
        Ok(())
    }
}

/// Normalized mutual synergy selection.
///
/// Objective for candidate `b` at each step after the first:
/// `MI(b, C) + 2 II(b; G; C) / (MI(b, C) + MI(G, C))`, where `G` is the
/// [`EstimatedGroundTruth`] and the ratio is 0 when its denominator is below
/// `cfg.eps`.
pub fn select_nms(table: &BandTable, cfg: &SelectorConfig, exec: Execution) -> Result<SelectionResult> {
    run_nms(table, cfg, exec).map(|(result, _)| result)
}

/// [`select_nms`], also returning the final ground-truth estimate.
pub fn run_nms(
    table: &BandTable,
    cfg: &SelectorConfig,
    exec: Execution,
) -> Result<(SelectionResult, EstimatedGroundTruth)> {
    let n = table.band_count();
    cfg.validate(n)?;
    let class = table.class_var();
    let relevance = table.relevance(exec)?;

    let mut remaining: Vec<usize> = (0..n).collect();
    let mut ranked = Vec::with_capacity(cfg.k);
    let mut scores = Vec::with_capacity(cfg.k);

    let rel: Vec<f64> = remaining.iter().map(|&i| relevance[i]).collect();
    let pos = pick_best(&remaining, &rel);
    let first = remaining.remove(pos);
    ranked.push(first);
    scores.push(rel[pos]);
    let mut estimate = EstimatedGroundTruth::seed(table, first)?;

    while ranked.len() < cfg.k {
        let g = &estimate.discretized;
        let g_rel = infotheory::mutual_info(g, class)?;
        let objective = exec::map(exec, &remaining, |&i| -> Result<f64> {
            let jmi = infotheory::joint_mutual_info(table.band(i), g, class)?;
            Ok(relevance[i] + synergy_ratio(jmi, relevance[i], g_rel, cfg.eps))
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        let pos = pick_best(&remaining, &objective);
        let pick = remaining.remove(pos);
        ranked.push(pick);
        scores.push(objective[pos]);
        estimate.blend(table, pick)?;
    }

    let result = SelectionResult {
        method: Method::Nms,
        ranked_bands: ranked,
        scores,
        config: *cfg,
        exhausted: false,
    };
    Ok((result, estimate))
}
