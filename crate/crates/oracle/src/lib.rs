//! Reference computations for tests.
//!
//! Everything here is written from the textbook definitions with ordered
//! maps and explicit loops, sharing no code with the main crate.

use std::collections::BTreeMap;

pub const TIE_TOLERANCE: f64 = 1e-9;

fn key(vars: &[&[u32]], i: usize) -> Vec<u32> {
    vars.iter().map(|v| v[i]).collect()
}

/// Counts of each joint symbol tuple.
pub fn counts(vars: &[&[u32]]) -> BTreeMap<Vec<u32>, u64> {
    let n = vars[0].len();
    for v in vars {
        assert_eq!(v.len(), n, "variables must have equal length");
    }
    let mut out = BTreeMap::new();
    for i in 0..n {
        *out.entry(key(vars, i)).or_insert(0) += 1;
    }
    out
}

/// Joint entropy in bits, `-sum p log2 p`.
pub fn entropy(vars: &[&[u32]]) -> f64 {
    let n = vars[0].len() as f64;
    let mut h = 0.0;
    for &c in counts(vars).values() {
        let p = c as f64 / n;
        h -= p * p.log2();
    }
    h
}

/// `sum p(x,y) log2 [p(x,y) / (p(x) p(y))]`.
pub fn mutual_info(x: &[u32], y: &[u32]) -> f64 {
    let n = x.len() as f64;
    let px = counts(&[x]);
    let py = counts(&[y]);
    let mut total = 0.0;
    for (k, &c) in &counts(&[x, y]) {
        let pxy = c as f64 / n;
        let a = px[&vec![k[0]]] as f64 / n;
        let b = py[&vec![k[1]]] as f64 / n;
        total += pxy * (pxy / (a * b)).log2();
    }
    total
}

/// `sum p(x,y,z) log2 [p(z) p(x,y,z) / (p(x,z) p(y,z))]`.
pub fn cond_mutual_info(x: &[u32], y: &[u32], z: &[u32]) -> f64 {
    let n = x.len() as f64;
    let pz = counts(&[z]);
    let pxz = counts(&[x, z]);
    let pyz = counts(&[y, z]);
    let mut total = 0.0;
    for (k, &c) in &counts(&[x, y, z]) {
        let p = c as f64 / n;
        let a = pz[&vec![k[2]]] as f64 / n;
        let b = pxz[&vec![k[0], k[2]]] as f64 / n;
        let d = pyz[&vec![k[1], k[2]]] as f64 / n;
        total += p * (a * p / (b * d)).log2();
    }
    total
}

/// `I((x,y); c) = sum p(x,y,c) log2 [p(x,y,c) / (p(x,y) p(c))]`.
pub fn joint_mutual_info(x: &[u32], y: &[u32], c: &[u32]) -> f64 {
    let n = x.len() as f64;
    let pxy = counts(&[x, y]);
    let pc = counts(&[c]);
    let mut total = 0.0;
    for (k, &cnt) in &counts(&[x, y, c]) {
        let p = cnt as f64 / n;
        let a = pxy[&vec![k[0], k[1]]] as f64 / n;
        let b = pc[&vec![k[2]]] as f64 / n;
        total += p * (p / (a * b)).log2();
    }
    total
}

/// Synergy-positive interaction information.
pub fn interaction_info(x: &[u32], y: &[u32], c: &[u32]) -> f64 {
    joint_mutual_info(x, y, c) - mutual_info(x, c) - mutual_info(y, c)
}

pub fn normalized_synergy(x: &[u32], y: &[u32], c: &[u32], eps: f64) -> f64 {
    let ixc = mutual_info(x, c);
    let iyc = mutual_info(y, c);
    let denom = ixc + iyc;
    if denom < eps {
        return 0.0;
    }
    2.0 * (joint_mutual_info(x, y, c) - ixc - iyc) / denom
}

pub fn normalized_mi(x: &[u32], y: &[u32]) -> f64 {
    let denom = entropy(&[x]) + entropy(&[y]);
    if denom <= 0.0 {
        return 0.0;
    }
    2.0 * mutual_info(x, y) / denom
}

pub fn symmetrical_relevance(x: &[u32], y: &[u32], c: &[u32]) -> f64 {
    joint_mutual_info(x, y, c) / entropy(&[x, y, c])
}

/// Exact probability table, row-major over `dims`.
#[derive(Debug, Clone)]
pub struct Table {
    pub dims: Vec<usize>,
    pub probs: Vec<f64>,
}

impl Table {
    /// Normalizes integer cell weights.
    pub fn from_weights(dims: &[usize], weights: &[u32]) -> Table {
        assert_eq!(dims.iter().product::<usize>(), weights.len());
        let total: u32 = weights.iter().sum();
        assert!(total > 0);
        Table {
            dims: dims.to_vec(),
            probs: weights.iter().map(|&w| w as f64 / total as f64).collect(),
        }
    }

    fn coords(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        for a in (0..self.dims.len()).rev() {
            out[a] = idx % self.dims[a];
            idx /= self.dims[a];
        }
        out
    }

    /// Marginal over `axes`, keyed by the kept coordinates.
    pub fn marginal(&self, axes: &[usize]) -> BTreeMap<Vec<usize>, f64> {
        let mut out = BTreeMap::new();
        for (i, &p) in self.probs.iter().enumerate() {
            let c = self.coords(i);
            let k: Vec<usize> = axes.iter().map(|&a| c[a]).collect();
            *out.entry(k).or_insert(0.0) += p;
        }
        out
    }

    pub fn entropy(&self, axes: &[usize]) -> f64 {
        self.marginal(axes)
            .values()
            .filter(|&&p| p > 0.0)
            .map(|&p| -p * p.log2())
            .sum()
    }

    pub fn mutual_info(&self, a: usize, b: usize) -> f64 {
        self.entropy(&[a]) + self.entropy(&[b]) - self.entropy(&[a, b])
    }

    pub fn cond_mutual_info(&self, a: usize, b: usize, z: usize) -> f64 {
        self.entropy(&[a, z]) + self.entropy(&[b, z]) - self.entropy(&[z]) - self.entropy(&[a, b, z])
    }

    pub fn joint_mutual_info(&self, a: usize, b: usize, c: usize) -> f64 {
        self.entropy(&[a, b]) + self.entropy(&[c]) - self.entropy(&[a, b, c])
    }

    pub fn interaction_info(&self, a: usize, b: usize, c: usize) -> f64 {
        self.joint_mutual_info(a, b, c) - self.mutual_info(a, c) - self.mutual_info(b, c)
    }
}

/// Sample realizing integer cell weights exactly: one symbol vector per axis.
pub fn materialize(dims: &[usize], weights: &[u32]) -> Vec<Vec<u32>> {
    assert_eq!(dims.iter().product::<usize>(), weights.len());
    let mut vars = vec![Vec::new(); dims.len()];
    for (idx, &w) in weights.iter().enumerate() {
        let mut rest = idx;
        let mut coord = vec![0u32; dims.len()];
        for a in (0..dims.len()).rev() {
            coord[a] = (rest % dims[a]) as u32;
            rest /= dims[a];
        }
        for _ in 0..w {
            for (v, &c) in vars.iter_mut().zip(&coord) {
                v.push(c);
            }
        }
    }
    vars
}

/// Equal-width binning over the sample range; constant input maps to 0.
pub fn quantize(values: &[f64], bins: u32) -> Vec<u32> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in values {
        if v < lo {
            lo = v;
        }
        if v > hi {
            hi = v;
        }
    }
    let mut out = Vec::with_capacity(values.len());
    for &v in values {
        if hi > lo {
            let b = ((v - lo) * bins as f64 / (hi - lo)).floor() as u32;
            out.push(if b >= bins { bins - 1 } else { b });
        } else {
            out.push(0);
        }
    }
    out
}

/// Lowest band index among scores within the tie tolerance of the best.
pub fn argmax(candidates: &[usize], scores: &[f64]) -> usize {
    let mut best = f64::NEG_INFINITY;
    for &s in scores {
        if s > best {
            best = s;
        }
    }
    let mut pick = usize::MAX;
    for (&c, &s) in candidates.iter().zip(scores) {
        if s >= best - TIE_TOLERANCE && c < pick {
            pick = c;
        }
    }
    pick
}

/// Problem instance for the brute-force selectors.
pub struct Problem<'a> {
    pub bands: &'a [Vec<u32>],
    pub raw: &'a [Vec<f64>],
    pub class: &'a [u32],
    pub bins: u32,
    pub beta: f64,
    pub threshold: f64,
    pub eps: f64,
}

impl Problem<'_> {
    fn rel(&self, i: usize) -> f64 {
        mutual_info(&self.bands[i], self.class)
    }

    /// Objective of `method` for candidate `i` given the ordered selection.
    fn score(&self, method: &str, i: usize, selected: &[usize]) -> f64 {
        let b = &self.bands;
        let c = self.class;
        if selected.is_empty() {
            return self.rel(i);
        }
        match method {
            "mifs" => {
                let mut sum = 0.0;
                for &s in selected {
                    sum += mutual_info(&b[i], &b[s]);
                }
                self.rel(i) - self.beta * sum
            }
            "mifs_u" => {
                let mut sum = 0.0;
                for &s in selected {
                    let hs = entropy(&[&b[s]]);
                    if hs > 0.0 {
                        sum += mutual_info(c, &b[s]) / hs * mutual_info(&b[i], &b[s]);
                    }
                }
                self.rel(i) - self.beta * sum
            }
            "mrmr" => {
                let mut sum = 0.0;
                for &s in selected {
                    sum += mutual_info(&b[i], &b[s]);
                }
                self.rel(i) - sum / selected.len() as f64
            }
            "jmi" => {
                let mut sum = 0.0;
                for &s in selected {
                    sum += joint_mutual_info(&b[i], &b[s], c);
                }
                sum
            }
            "disr" => {
                let mut sum = 0.0;
                for &s in selected {
                    sum += symmetrical_relevance(&b[i], &b[s], c);
                }
                sum
            }
            "nmi" => {
                let mut sum = 0.0;
                for &s in selected {
                    sum += normalized_mi(&b[i], &b[s]);
                }
                self.rel(i) - self.beta * sum
            }
            "nms" => {
                let g = self.estimate(selected);
                self.rel(i) + normalized_synergy(&b[i], &g, c, self.eps)
            }
            other => panic!("no brute-force scorer for {other}"),
        }
    }

    /// Ground-truth estimate rebuilt from the raw values of `selected`.
    fn estimate(&self, selected: &[usize]) -> Vec<u32> {
        let mut g = self.raw[selected[0]].clone();
        for &s in &selected[1..] {
            for (gv, &r) in g.iter_mut().zip(&self.raw[s]) {
                *gv = (*gv + r) / 2.0;
            }
        }
        quantize(&g, self.bins)
    }

    /// Band sequence picked by re-scoring every candidate from scratch.
    pub fn select(&self, method: &str, k: usize) -> Vec<usize> {
        if method == "mibf" {
            return self.select_mibf(k);
        }
        let mut selected = Vec::new();
        while selected.len() < k {
            let cands: Vec<usize> = (0..self.bands.len()).filter(|i| !selected.contains(i)).collect();
            let scores: Vec<f64> = cands.iter().map(|&i| self.score(method, i, &selected)).collect();
            selected.push(argmax(&cands, &scores));
        }
        selected
    }

    fn select_mibf(&self, k: usize) -> Vec<usize> {
        let mut order = Vec::new();
        while order.len() < self.bands.len() {
            let cands: Vec<usize> = (0..self.bands.len()).filter(|i| !order.contains(i)).collect();
            let scores: Vec<f64> = cands.iter().map(|&i| self.rel(i)).collect();
            order.push(argmax(&cands, &scores));
        }
        let mut accepted: Vec<usize> = Vec::new();
        for cand in order {
            if accepted.len() == k {
                break;
            }
            let ok = accepted
                .iter()
                .all(|&s| mutual_info(&self.bands[cand], &self.bands[s]) <= self.threshold);
            if ok {
                accepted.push(cand);
            }
        }
        accepted
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn xor_table() {
        let w = [1, 0, 0, 1, 0, 1, 1, 0];
        let t = Table::from_weights(&[2, 2, 2], &w);
        assert!((t.interaction_info(0, 1, 2) - 1.0).abs() < 1e-15);
        let v = materialize(&[2, 2, 2], &w);
        assert!((interaction_info(&v[0], &v[1], &v[2]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn quantize_edges() {
        assert_eq!(quantize(&[0.0, 0.5, 1.0], 2), vec![0, 1, 1]);
        assert_eq!(quantize(&[3.0, 3.0], 8), vec![0, 0]);
    }

    #[test]
    fn argmax_ties() {
        assert_eq!(argmax(&[4, 2, 7], &[1.0, 1.0 - 1e-12, 0.5]), 2);
    }
}
