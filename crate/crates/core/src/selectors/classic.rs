use super::{pick_best, BandTable, Method, SelectionResult, SelectorConfig};
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::infotheory::{self, Bits};

/// Per-pair term each method accumulates over the selected set, and how
/// the accumulated sum combines with relevance.
///
/// | method | term(i, s)                      | objective                 |
/// |--------|---------------------------------|---------------------------|
/// | mifs   | MI(i, s)                        | rel - beta * sum          |
/// | mifs_u | MI(C, s) / H(s) * MI(i, s)      | rel - beta * sum          |
/// | mrmr   | MI(i, s)                        | rel - sum / abs(S)        |
/// | jmi    | I((i, s); C)                    | sum                       |
/// | disr   | I((i, s); C) / H(i, s, C)       | sum                       |
/// | nmi    | 2 MI(i, s) / (H(i) + H(s))      | rel - beta * sum          |
struct Criterion<'a> {
    method: Method,
    table: &'a BandTable,
    relevance: &'a [Bits],
    entropy: Vec<Bits>,
}

impl Criterion<'_> {
    fn term(&self, i: usize, s: usize) -> Result<f64> {
        let t = self.table;
        let (bi, bs) = (t.band(i), t.band(s));
        match self.method {
            Method::Mifs | Method::Mrmr => infotheory::mutual_info(bi, bs),
            Method::MifsU => {
                // A constant selected band carries no redundancy.
                if self.entropy[s] <= 0.0 {
                    return Ok(0.0);
                }
                let weight = self.relevance[s] / self.entropy[s];
                Ok(weight * infotheory::mutual_info(bi, bs)?)
            }
            Method::Jmi => infotheory::joint_mutual_info(bi, bs, t.class_var()),
            Method::Disr => infotheory::symmetrical_relevance(bi, bs, t.class_var()),
            Method::Nmi => infotheory::normalized_mi(bi, bs),
            Method::Nms | Method::Mibf => unreachable!("not a classic criterion"),
        }
    }

    fn objective(&self, beta: f64, i: usize, sum: f64, selected: usize) -> f64 {
        let rel = self.relevance[i];
        match self.method {
            Method::Mifs | Method::MifsU | Method::Nmi => rel - beta * sum,
            Method::Mrmr => rel - sum / selected as f64,
            Method::Jmi | Method::Disr => sum,
            Method::Nms | Method::Mibf => unreachable!("not a classic criterion"),
        }
    }
}

/// MIFS, MIFS-U, mRMR, JMI, DISR and the normalized-MI (NMI) baseline.
///
/// Each keeps a running per-candidate sum of `term(candidate, s)` over the
/// selected bands `s`, added in selection order, so a step costs one term
/// per remaining candidate.
pub fn select_greedy_classic(
    method: Method,
    table: &BandTable,
    cfg: &SelectorConfig,
    exec: Execution,
) -> Result<SelectionResult> {
    if matches!(method, Method::Nms | Method::Mibf) {
        return Err(Error::config(format!("{method} is not a classic greedy criterion")));
    }
    let n = table.band_count();
    cfg.validate(n)?;

    let relevance = table.relevance(exec)?;
    let entropy = if method == Method::MifsU {
        exec::map(exec, table.bands(), infotheory::entropy)
            .into_iter()
            .collect::<Result<Vec<_>>>()?
    } else {
        Vec::new()
    };
    let crit = Criterion {
        method,
        table,
        relevance: &relevance,
        entropy,
    };

    let mut remaining: Vec<usize> = (0..n).collect();
    let mut sums = vec![0.0f64; n];
    let mut ranked = Vec::with_capacity(cfg.k);
    let mut scores = Vec::with_capacity(cfg.k);

    let rel: Vec<f64> = remaining.iter().map(|&i| relevance[i]).collect();
    let pos = pick_best(&remaining, &rel);
    ranked.push(remaining.remove(pos));
    scores.push(rel[pos]);

    while ranked.len() < cfg.k {
        let last = *ranked.last().unwrap();
        let terms = exec::map(exec, &remaining, |&i| crit.term(i, last))
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        for (&i, t) in remaining.iter().zip(terms) {
            sums[i] += t;
        }
        let objective: Vec<f64> = remaining
            .iter()
            .map(|&i| crit.objective(cfg.beta, i, sums[i], ranked.len()))
            .collect();
        let pos = pick_best(&remaining, &objective);
        ranked.push(remaining.remove(pos));
        scores.push(objective[pos]);
    }

    Ok(SelectionResult {
        method,
        ranked_bands: ranked,
        scores,
        config: *cfg,
        exhausted: false,
    })
}
