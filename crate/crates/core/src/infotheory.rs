//! Plug-in (maximum-likelihood histogram) estimators of entropy, mutual
//! information and the three-way measures built on them.
//!
//! All logarithms are base 2. Every measure is assembled from joint
//! entropies of the same shared sample, so the usual identities hold up to
//! floating-point rounding. An entropy depends only on the multiset of cell
//! counts: counts are sorted before summation, which makes relabeling a
//! variable (or reordering the variables of a joint) bit-for-bit neutral.
//!
//! Interaction information follows the synergy-positive convention
//! `II(X;Y;C) = I((X,Y);C) - I(X;C) - I(Y;C)`: an XOR triple scores +1 bit
//! and a duplicated relevant variable scores `-I(X;C)`.

use crate::cube_io::DiscreteVariable;
use crate::error::{Error, Result};

/// Information in bits.
pub type Bits = f64;

/// Default guard on the denominator of [`normalized_synergy`].
pub const DEFAULT_EPS: f64 = 1e-12;

/// Joint tables up to this many cells (and not much sparser than the
/// sample) are counted densely.
const DENSE_LIMIT: u64 = 1 << 22;

fn check_lengths(vars: &[&DiscreteVariable]) -> Result<usize> {
    let first = vars.first().ok_or(Error::EmptySample)?;
    let n = first.len();
    for v in &vars[1..] {
        if v.len() != n {
            return Err(Error::LengthMismatch(n, v.len()));
        }
    }
    if n == 0 {
        return Err(Error::EmptySample);
    }
    Ok(n)
}

fn dims_product(vars: &[&DiscreteVariable]) -> Result<u64> {
    vars.iter().try_fold(1u64, |acc, v| {
        acc.checked_mul(u64::from(v.cardinality()))
            .ok_or_else(|| Error::Dimension("joint alphabet too large".into()))
    })
}

#[inline]
fn key_of(vars: &[&DiscreteVariable], i: usize) -> u64 {
    vars.iter()
        .fold(0u64, |k, v| k * u64::from(v.cardinality()) + u64::from(v.symbols()[i]))
}

/// Nonzero cell counts of the joint of `vars`, in key order.
fn joint_cells(vars: &[&DiscreteVariable]) -> Result<Vec<(u64, u32)>> {
    let n = check_lengths(vars)?;
    let cells = dims_product(vars)?;
    if cells <= DENSE_LIMIT && cells <= 8 * n as u64 + (1 << 16) {
        let mut counts = vec![0u32; cells as usize];
        for i in 0..n {
            counts[key_of(vars, i) as usize] += 1;
        }
        Ok(counts
            .into_iter()
            .enumerate()
            .filter(|&(_, c)| c > 0)
            .map(|(k, c)| (k as u64, c))
            .collect())
    } else {
        let mut keys: Vec<u64> = (0..n).map(|i| key_of(vars, i)).collect();
        keys.sort_unstable();
        Ok(run_lengths(&keys))
    }
}

fn run_lengths(sorted: &[u64]) -> Vec<(u64, u32)> {
    let mut out: Vec<(u64, u32)> = Vec::new();
    for &k in sorted {
        match out.last_mut() {
            Some((last, c)) if *last == k => *c += 1,
            _ => out.push((k, 1)),
        }
    }
    out
}

/// Entropy of an empirical distribution given its nonzero counts.
fn entropy_of_counts(mut counts: Vec<u32>, total: u64) -> Bits {
    if counts.len() <= 1 {
        return 0.0;
    }
    counts.sort_unstable();
    let n = total as f64;
    let s: f64 = counts
        .iter()
        .map(|&c| {
            let c = f64::from(c);
            c * c.log2()
        })
        .sum();
    (n.log2() - s / n).max(0.0)
}

fn joint_entropy_unchecked(vars: &[&DiscreteVariable]) -> Result<Bits> {
    let n = vars[0].len() as u64;
    let cells = joint_cells(vars)?;
    Ok(entropy_of_counts(cells.into_iter().map(|(_, c)| c).collect(), n))
}

/// Dense or sparse joint histogram over 1 to 4 variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointHistogram {
    dims: Vec<u32>,
    cells: Vec<(u64, u32)>,
    total: u64,
}

impl JointHistogram {
    pub fn from_vars(vars: &[&DiscreteVariable]) -> Result<Self> {
        if vars.len() > 4 {
            return Err(Error::Dimension(format!(
                "histograms span at most 4 variables, got {}",
                vars.len()
            )));
        }
        let total = check_lengths(vars)? as u64;
        Ok(JointHistogram {
            dims: vars.iter().map(|v| v.cardinality()).collect(),
            cells: joint_cells(vars)?,
            total,
        })
    }

    pub fn dims(&self) -> &[u32] {
        &self.dims
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    fn encode(&self, index: &[u32]) -> u64 {
        self.dims
            .iter()
            .zip(index)
            .fold(0u64, |k, (&d, &s)| k * u64::from(d) + u64::from(s))
    }

    fn decode(&self, mut key: u64) -> Vec<u32> {
        let mut out = vec![0u32; self.dims.len()];
        for (slot, &d) in out.iter_mut().zip(&self.dims).rev() {
            *slot = (key % u64::from(d)) as u32;
            key /= u64::from(d);
        }
        out
    }

    /// Count in the cell addressed by one symbol per axis.
    pub fn count(&self, index: &[u32]) -> u32 {
        assert_eq!(index.len(), self.dims.len(), "index arity");
        let key = self.encode(index);
        self.cells
            .binary_search_by_key(&key, |&(k, _)| k)
            .map_or(0, |i| self.cells[i].1)
    }

    /// Nonzero cells as `(index, count)`.
    pub fn nonzero(&self) -> impl Iterator<Item = (Vec<u32>, u32)> + '_ {
        self.cells.iter().map(|&(k, c)| (self.decode(k), c))
    }

    /// Sums out every axis not listed in `keep`; kept axes stay in the given order.
    pub fn marginalize(&self, keep: &[usize]) -> JointHistogram {
        let dims: Vec<u32> = keep.iter().map(|&a| self.dims[a]).collect();
        let mut keyed: Vec<(u64, u32)> = self
            .cells
            .iter()
            .map(|&(k, c)| {
                let idx = self.decode(k);
                let key = keep
                    .iter()
                    .fold(0u64, |acc, &a| acc * u64::from(self.dims[a]) + u64::from(idx[a]));
                (key, c)
            })
            .collect();
        keyed.sort_unstable_by_key(|&(k, _)| k);
        let mut cells: Vec<(u64, u32)> = Vec::with_capacity(keyed.len());
        for (k, c) in keyed {
            match cells.last_mut() {
                Some((last, acc)) if *last == k => *acc += c,
                _ => cells.push((k, c)),
            }
        }
        JointHistogram {
            dims,
            cells,
            total: self.total,
        }
    }

    pub fn entropy(&self) -> Bits {
        entropy_of_counts(self.cells.iter().map(|&(_, c)| c).collect(), self.total)
    }
}

pub fn entropy(x: &DiscreteVariable) -> Result<Bits> {
    check_lengths(&[x])?;
    joint_entropy_unchecked(&[x])
}

/// Entropy of the Cartesian-product variable of 1 to 4 variables.
pub fn joint_entropy(vars: &[&DiscreteVariable]) -> Result<Bits> {
    if vars.is_empty() || vars.len() > 4 {
        return Err(Error::Dimension(format!(
            "joint entropy takes 1 to 4 variables, got {}",
            vars.len()
        )));
    }
    check_lengths(vars)?;
    joint_entropy_unchecked(vars)
}

/// `H(X) + H(Y) - H(X,Y)`, floored at zero.
pub fn mutual_info(x: &DiscreteVariable, y: &DiscreteVariable) -> Result<Bits> {
    check_lengths(&[x, y])?;
    let hx = joint_entropy_unchecked(&[x])?;
    let hy = joint_entropy_unchecked(&[y])?;
    let hxy = joint_entropy_unchecked(&[x, y])?;
    Ok((hx + hy - hxy).max(0.0))
}

/// `I(X;Y|Z) = H(X,Z) + H(Y,Z) - H(Z) - H(X,Y,Z)`, floored at zero.
pub fn cond_mutual_info(x: &DiscreteVariable, y: &DiscreteVariable, z: &DiscreteVariable) -> Result<Bits> {
    check_lengths(&[x, y, z])?;
    let hxz = joint_entropy_unchecked(&[x, z])?;
    let hyz = joint_entropy_unchecked(&[y, z])?;
    let hz = joint_entropy_unchecked(&[z])?;
    let hxyz = joint_entropy_unchecked(&[x, y, z])?;
    Ok((hxz + hyz - hz - hxyz).max(0.0))
}

/// `I((X,Y);C) = H(X,Y) + H(C) - H(X,Y,C)`.
pub fn joint_mutual_info(x: &DiscreteVariable, y: &DiscreteVariable, c: &DiscreteVariable) -> Result<Bits> {
    check_lengths(&[x, y, c])?;
    let hxy = joint_entropy_unchecked(&[x, y])?;
    let hc = joint_entropy_unchecked(&[c])?;
    let hxyc = joint_entropy_unchecked(&[x, y, c])?;
    Ok((hxy + hc - hxyc).max(0.0))
}

/// `I((X,Y);C) - I(X;C) - I(Y;C)`; positive for synergy, negative for
/// redundancy.
pub fn interaction_info(x: &DiscreteVariable, y: &DiscreteVariable, c: &DiscreteVariable) -> Result<Bits> {
    let jmi = joint_mutual_info(x, y, c)?;
    Ok(jmi - mutual_info(x, c)? - mutual_info(y, c)?)
}

/// `2 II(X;Y;C) / (I(X;C) + I(Y;C))`, or 0 when the denominator is below
/// `eps`. The ratio is not clamped.
pub fn normalized_synergy(x: &DiscreteVariable, y: &DiscreteVariable, c: &DiscreteVariable, eps: f64) -> Result<f64> {
    let ixc = mutual_info(x, c)?;
    let iyc = mutual_info(y, c)?;
    let jmi = joint_mutual_info(x, y, c)?;
    Ok(synergy_ratio(jmi, ixc, iyc, eps))
}

/// Shared by [`normalized_synergy`] and the selector hot loop, which
/// supplies cached relevances.
#[inline]
pub(crate) fn synergy_ratio(jmi: Bits, ixc: Bits, iyc: Bits, eps: f64) -> f64 {
    let denom = ixc + iyc;
    if denom < eps {
        0.0
    } else {
        2.0 * (jmi - ixc - iyc) / denom
    }
}

/// Symmetric uncertainty `2 I(X;Y) / (H(X) + H(Y))`, 0 when both are constant.
pub fn normalized_mi(x: &DiscreteVariable, y: &DiscreteVariable) -> Result<f64> {
    check_lengths(&[x, y])?;
    let hx = joint_entropy_unchecked(&[x])?;
    let hy = joint_entropy_unchecked(&[y])?;
    let denom = hx + hy;
    if denom <= 0.0 {
        return Ok(0.0);
    }
    let hxy = joint_entropy_unchecked(&[x, y])?;
    Ok(2.0 * (hx + hy - hxy).max(0.0) / denom)
}

/// `I((X,Y);C) / H(X,Y,C)`.
pub fn symmetrical_relevance(x: &DiscreteVariable, y: &DiscreteVariable, c: &DiscreteVariable) -> Result<f64> {
    check_lengths(&[x, y, c])?;
    let hxyc = joint_entropy_unchecked(&[x, y, c])?;
    if hxyc <= 0.0 {
        return Err(Error::ZeroJointEntropy);
    }
    let hxy = joint_entropy_unchecked(&[x, y])?;
    let hc = joint_entropy_unchecked(&[c])?;
    Ok((hxy + hc - hxyc).max(0.0) / hxyc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn var(s: &[u32]) -> DiscreteVariable {
        DiscreteVariable::from_symbols(s.to_vec())
    }

    /// x, y uniform independent bits over all four combinations.
    fn bits() -> (DiscreteVariable, DiscreteVariable) {
        (var(&[0, 0, 1, 1]), var(&[0, 1, 0, 1]))
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(entropy(&var(&[0, 1, 2, 3])).unwrap(), 2.0);
        assert_eq!(entropy(&var(&[3, 3, 3])).unwrap(), 0.0);
        let h = entropy(&var(&[0, 1, 1, 1])).unwrap();
        assert!((h - 0.811_278_124_459_132_8).abs() < 1e-12);
    }

    #[test]
    fn empty_and_mismatch() {
        assert!(matches!(entropy(&var(&[])), Err(Error::EmptySample)));
        assert!(matches!(
            mutual_info(&var(&[0, 1]), &var(&[0])),
            Err(Error::LengthMismatch(2, 1))
        ));
    }

    #[test]
    fn xor_triple() {
        let (x, y) = bits();
        let z = var(&[0, 1, 1, 0]);
        assert_eq!(joint_entropy(&[&x, &y, &z]).unwrap(), 2.0);
        assert_eq!(cond_mutual_info(&x, &y, &z).unwrap(), 1.0);
        assert_eq!(joint_mutual_info(&x, &y, &z).unwrap(), 1.0);
        assert_eq!(mutual_info(&x, &z).unwrap(), 0.0);
        assert_eq!(interaction_info(&x, &y, &z).unwrap(), 1.0);
        assert_eq!(normalized_synergy(&x, &y, &z, DEFAULT_EPS).unwrap(), 0.0);
        assert_eq!(symmetrical_relevance(&x, &y, &z).unwrap(), 0.5);
    }

    #[test]
    fn duplicate_is_fully_redundant() {
        let x = var(&[0, 1, 0, 1]);
        assert_eq!(joint_mutual_info(&x, &x, &x).unwrap(), 1.0);
        assert_eq!(interaction_info(&x, &x, &x).unwrap(), -1.0);
        assert_eq!(symmetrical_relevance(&x, &x, &x).unwrap(), 1.0);
        let c = var(&[0, 1, 0, 0]);
        assert_eq!(normalized_synergy(&x, &x, &c, DEFAULT_EPS).unwrap(), -1.0);
    }

    #[test]
    fn and_gate() {
        let (x, y) = bits();
        let c = var(&[0, 0, 0, 1]);
        let mi = mutual_info(&x, &c).unwrap();
        assert!((mi - 0.311_278_124_459_132_8).abs() < 1e-12);
        let nms = normalized_synergy(&x, &y, &c, DEFAULT_EPS).unwrap();
        assert!((nms - 0.606_257_3).abs() < 1e-3, "{nms}");
    }

    #[test]
    fn normalized_mi_cases() {
        let (x, y) = bits();
        assert_eq!(normalized_mi(&x, &x).unwrap(), 1.0);
        assert_eq!(normalized_mi(&x, &y).unwrap(), 0.0);
        let k = var(&[2, 2, 2, 2]);
        assert_eq!(normalized_mi(&k, &k).unwrap(), 0.0);
    }

    #[test]
    fn symmetrical_relevance_needs_entropy() {
        let k = var(&[0, 0, 0]);
        assert!(matches!(
            symmetrical_relevance(&k, &k, &k),
            Err(Error::ZeroJointEntropy)
        ));
    }

    #[test]
    fn histogram_marginals() {
        let x = var(&[0, 1, 2, 0, 1]);
        let y = var(&[1, 1, 0, 0, 1]);
        let z = var(&[0, 0, 0, 1, 1]);
        let h = JointHistogram::from_vars(&[&x, &y, &z]).unwrap();
        assert_eq!(h.total(), 5);
        assert_eq!(h.count(&[1, 1, 0]), 1);
        assert_eq!(h.count(&[2, 1, 1]), 0);
        let xz = h.marginalize(&[0, 2]);
        assert_eq!(xz, JointHistogram::from_vars(&[&x, &z]).unwrap());
        let zy = h.marginalize(&[2, 1]);
        assert_eq!(zy, JointHistogram::from_vars(&[&z, &y]).unwrap());
        assert_eq!(h.marginalize(&[0]).entropy(), entropy(&x).unwrap());
    }

    #[test]
    fn sparse_path_matches_dense() {
        // 65536^2 cells forces the sort-based counter.
        let a = DiscreteVariable::new(vec![0, 65535, 7, 7, 65535], 65536).unwrap();
        let b = DiscreteVariable::new(vec![1, 1, 65535, 65535, 1], 65536).unwrap();
        let small_a = DiscreteVariable::from_symbols(vec![0, 2, 1, 1, 2]);
        let small_b = DiscreteVariable::from_symbols(vec![0, 0, 1, 1, 0]);
        assert_eq!(
            joint_entropy(&[&a, &b]).unwrap(),
            joint_entropy(&[&small_a, &small_b]).unwrap()
        );
    }
}
