use super::{pick_best, BandTable, Method, SelectionResult, SelectorConfig};
use crate::error::Result;
use crate::exec::{self, Execution};
use crate::infotheory;

/// Threshold-controlled relevance ranking.
///
/// Bands are walked in decreasing `MI(band, C)` order; a band is accepted
/// when its largest MI with any already accepted band is at most
/// `cfg.threshold`. Stops after `cfg.k` acceptances or when the ranking runs
/// out, in which case the result is shorter and `exhausted` is set.
pub fn select_mibf(table: &BandTable, cfg: &SelectorConfig, exec: Execution) -> Result<SelectionResult> {
    let n = table.band_count();
    cfg.validate(n)?;
    let relevance = table.relevance(exec)?;

    // Full ranking, with the same tie rule as the greedy methods.
    let mut pool: Vec<usize> = (0..n).collect();
    let mut ranking = Vec::with_capacity(n);
    while !pool.is_empty() {
        let rel: Vec<f64> = pool.iter().map(|&i| relevance[i]).collect();
        ranking.push(pool.remove(pick_best(&pool, &rel)));
    }

    let mut accepted: Vec<usize> = Vec::with_capacity(cfg.k);
    let mut scores = Vec::with_capacity(cfg.k);
    for cand in ranking {
        if accepted.len() == cfg.k {
            break;
        }
        let redundancy = exec::map(exec, &accepted, |&s| {
            infotheory::mutual_info(table.band(cand), table.band(s))
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        if redundancy.iter().all(|&r| r <= cfg.threshold) {
            accepted.push(cand);
            scores.push(relevance[cand]);
        }
    }

    let exhausted = accepted.len() < cfg.k;
    Ok(SelectionResult {
        method: Method::Mibf,
        ranked_bands: accepted,
        scores,
        config: *cfg,
        exhausted,
    })
}
