//! Synthetic scenes with planted relevant, duplicate, synergic and noise
//! bands.
//!
//! Every pixel is labeled. The class and the first member of each synergy
//! pair form a latent tuple `(c, x_1, ..., x_p)` over `K^(1+p)` cells;
//! pixel slot `t` takes cell `t mod K^(1+p)`, and slots are dealt to pixels
//! by a seeded permutation. When the pixel count is a multiple of
//! `K^(1+p)` every latent cell therefore occurs exactly equally often, and
//! estimators on the noiseless bands reproduce closed-form values exactly.
//!
//! Band constructions (`S = 100` is the class spacing):
//!
//! * relevant: `S (c + 1)`, plus `relevant_noise * S * U(-1, 1)`
//! * duplicate of a relevant band: the source plus `duplicate_noise * S * U(-1, 1)`
//! * synergy pair: `x_1` uniform on `0..K`, `x_2 = (x_1 + c) mod K`, each
//!   stored as `(S / 2K) (level + 0.5)`; neither band alone depends on the
//!   class but the pair determines it
//! * noise: `noise_levels` equally frequent levels dealt by an independent
//!   permutation, stored as `level * S K / noise_levels`

use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cube_io::{self, CubeData, GroundTruthMap, HyperCube};
use crate::error::{Error, Result};

const SPACING: f64 = 100.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SceneSpec {
    pub rows: usize,
    pub cols: usize,
    pub class_count: usize,
    pub relevant_bands: usize,
    /// Noise amplitude on relevant bands, in units of the class spacing.
    pub relevant_noise: f64,
    pub duplicate_bands: usize,
    pub duplicate_noise: f64,
    pub synergy_pairs: usize,
    pub noise_bands: usize,
    pub noise_levels: usize,
    /// Scatter the planted roles over random band positions.
    pub shuffle_bands: bool,
    pub seed: u64,
}

impl Default for SceneSpec {
    fn default() -> Self {
        SceneSpec {
            rows: 32,
            cols: 32,
            class_count: 2,
            relevant_bands: 1,
            relevant_noise: 0.0,
            duplicate_bands: 2,
            duplicate_noise: 0.75,
            synergy_pairs: 1,
            noise_bands: 4,
            noise_levels: 16,
            shuffle_bands: true,
            seed: 42,
        }
    }
}

impl SceneSpec {
    pub fn total_bands(&self) -> usize {
        self.relevant_bands + self.duplicate_bands + 2 * self.synergy_pairs + self.noise_bands
    }

    pub fn pixels(&self) -> usize {
        self.rows * self.cols
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Spec(m.to_string()));
        if self.total_bands() == 0 {
            return bad("scene needs at least one band");
        }
        if self.rows == 0 || self.cols == 0 {
            return bad("rows and cols must be positive");
        }
        if self.class_count < 2 {
            return bad("class_count must be at least 2");
        }
        if self.class_count > u16::MAX as usize {
            return bad("class_count exceeds the u16 label range");
        }
        if self.duplicate_bands > 0 && self.relevant_bands == 0 {
            return bad("duplicates need a relevant band to copy");
        }
        if self.noise_bands > 0 && self.noise_levels < 2 {
            return bad("noise_levels must be at least 2");
        }
        for (name, a) in [
            ("relevant_noise", self.relevant_noise),
            ("duplicate_noise", self.duplicate_noise),
        ] {
            if !(a >= 0.0 && a.is_finite()) {
                return Err(Error::Spec(format!("{name} must be finite and >= 0")));
            }
        }
        Ok(())
    }

    /// Number of latent cells `K^(1+p)`, if it fits in a `usize`.
    fn latent_cells(&self) -> Option<usize> {
        (0..=self.synergy_pairs).try_fold(1usize, |acc, _| acc.checked_mul(self.class_count))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "role", rename_all = "snake_case")]
pub enum BandRole {
    Relevant,
    /// Noisy copy of the relevant band at index `of`.
    Duplicate {
        of: usize,
    },
    /// Member of a synergy pair; `first` and `second` are band indices of
    /// `x_1` and `x_2`.
    SynergyPair {
        first: usize,
        second: usize,
    },
    Noise,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlantedTruth {
    pub roles: Vec<BandRole>,
}

impl PlantedTruth {
    fn indices(&self, f: impl Fn(&BandRole) -> bool) -> Vec<usize> {
        self.roles
            .iter()
            .enumerate()
            .filter(|(_, r)| f(r))
            .map(|(i, _)| i)
            .collect()
    }

    pub fn relevant(&self) -> Vec<usize> {
        self.indices(|r| matches!(r, BandRole::Relevant))
    }

    pub fn duplicates(&self) -> Vec<usize> {
        self.indices(|r| matches!(r, BandRole::Duplicate { .. }))
    }

    /// `(x_1, x_2)` band indices of each pair.
    pub fn synergy_pairs(&self) -> Vec<(usize, usize)> {
        self.roles
            .iter()
            .enumerate()
            .filter_map(|(i, r)| match *r {
                BandRole::SynergyPair { first, second } if first == i => Some((first, second)),
                _ => None,
            })
            .collect()
    }

    pub fn noise(&self) -> Vec<usize> {
        self.indices(|r| matches!(r, BandRole::Noise))
    }
}

/// Role of each unshuffled slot.
#[derive(Debug, Clone, Copy)]
enum Slot {
    Relevant,
    Duplicate(usize),
    PairFirst(usize),
    PairSecond(usize),
    Noise,
}

fn slots(spec: &SceneSpec) -> Vec<Slot> {
    let mut out = Vec::with_capacity(spec.total_bands());
    out.extend((0..spec.relevant_bands).map(|_| Slot::Relevant));
    out.extend((0..spec.duplicate_bands).map(Slot::Duplicate));
    for p in 0..spec.synergy_pairs {
        out.push(Slot::PairFirst(p));
        out.push(Slot::PairSecond(p));
    }
    out.extend((0..spec.noise_bands).map(|_| Slot::Noise));
    out
}

/// `band_of[slot]`, drawn first from the scene stream.
fn band_permutation(spec: &SceneSpec, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..spec.total_bands()).collect();
    if spec.shuffle_bands {
        perm.shuffle(rng);
    }
    perm
}

fn planted_truth(spec: &SceneSpec, slots: &[Slot], band_of: &[usize]) -> PlantedTruth {
    let pair_base = spec.relevant_bands + spec.duplicate_bands;
    let mut roles = vec![BandRole::Noise; slots.len()];
    for (s, slot) in slots.iter().enumerate() {
        roles[band_of[s]] = match *slot {
            Slot::Relevant => BandRole::Relevant,
            Slot::Duplicate(d) => BandRole::Duplicate {
                of: band_of[d % spec.relevant_bands],
            },
            Slot::PairFirst(p) | Slot::PairSecond(p) => BandRole::SynergyPair {
                first: band_of[pair_base + 2 * p],
                second: band_of[pair_base + 2 * p + 1],
            },
            Slot::Noise => BandRole::Noise,
        };
    }
    PlantedTruth { roles }
}

/// Roles the generator assigns for `spec`, without generating pixels.
pub fn planted_roles(spec: &SceneSpec) -> Result<PlantedTruth> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let band_of = band_permutation(spec, &mut rng);
    Ok(planted_truth(spec, &slots(spec), &band_of))
}

#[derive(Debug, Clone)]
pub struct Scene {
    pub cube: HyperCube,
    pub gt: GroundTruthMap,
    pub truth: PlantedTruth,
}

fn pair_value(level: usize, k: usize) -> f64 {
    SPACING / (2.0 * k as f64) * (level as f64 + 0.5)
}

pub fn generate_scene(spec: &SceneSpec) -> Result<Scene> {
    spec.validate()?;
    let k = spec.class_count;
    let n = spec.pixels();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let band_of = band_permutation(spec, &mut rng);
    let slots = slots(spec);
    let truth = planted_truth(spec, &slots, &band_of);

    // Latent digits per pixel: class, then x_1 of each pair.
    let mut pixel_of_slot: Vec<usize> = (0..n).collect();
    pixel_of_slot.shuffle(&mut rng);
    let width = 1 + spec.synergy_pairs;
    let mut latent = vec![0usize; n * width];
    for (t, &p) in pixel_of_slot.iter().enumerate() {
        // Cells repeat with period K^(1+p); the modulus never needs to
        // exceed n, which keeps large pair counts from overflowing.
        let mut cell = match spec.latent_cells() {
            Some(period) => t % period,
            None => t,
        };
        for d in 0..width {
            latent[p * width + d] = cell % k;
            cell /= k;
        }
    }
    let class_of = |p: usize| latent[p * width];

    let mut values = vec![0f32; spec.total_bands() * n];
    let mut relevant_raw: Vec<Vec<f64>> = Vec::with_capacity(spec.relevant_bands);
    for (s, slot) in slots.iter().enumerate() {
        let band: Vec<f64> = match *slot {
            Slot::Relevant => {
                let b: Vec<f64> = (0..n)
                    .map(|p| {
                        let jitter = if spec.relevant_noise > 0.0 {
                            spec.relevant_noise * SPACING * rng.random_range(-1.0..1.0)
                        } else {
                            0.0
                        };
                        SPACING * (class_of(p) + 1) as f64 + jitter
                    })
                    .collect();
                relevant_raw.push(b.clone());
                b
            }
            Slot::Duplicate(d) => {
                let src = &relevant_raw[d % spec.relevant_bands];
                src.iter()
                    .map(|&v| {
                        if spec.duplicate_noise > 0.0 {
                            v + spec.duplicate_noise * SPACING * rng.random_range(-1.0..1.0)
                        } else {
                            v
                        }
                    })
                    .collect()
            }
            Slot::PairFirst(q) => (0..n).map(|p| pair_value(latent[p * width + 1 + q], k)).collect(),
            Slot::PairSecond(q) => (0..n)
                .map(|p| pair_value((latent[p * width + 1 + q] + class_of(p)) % k, k))
                .collect(),
            Slot::Noise => {
                let levels = spec.noise_levels;
                let mut order: Vec<usize> = (0..n).collect();
                order.shuffle(&mut rng);
                let step = SPACING * k as f64 / levels as f64;
                let mut b = vec![0.0; n];
                for (t, &p) in order.iter().enumerate() {
                    b[p] = (t % levels) as f64 * step;
                }
                b
            }
        };
        let dst = &mut values[band_of[s] * n..(band_of[s] + 1) * n];
        for (d, v) in dst.iter_mut().zip(band) {
            *d = v as f32;
        }
    }

    let cube = HyperCube::new(spec.total_bands(), spec.rows, spec.cols, CubeData::F32(values), None)?;
    let labels = (0..n).map(|p| (class_of(p) + 1) as u16).collect();
    let gt = GroundTruthMap::new(spec.rows, spec.cols, labels)?;
    Ok(Scene { cube, gt, truth })
}

/// Writes `<stem>.hsch`, `<stem>.hscd`, `<stem>.gt` and `<stem>.truth.json`.
pub fn write_scene(stem: impl AsRef<Path>, scene: &Scene) -> Result<()> {
    let stem = stem.as_ref();
    cube_io::write_cube(stem, &scene.cube)?;
    cube_io::write_ground_truth(cube_io::append_ext(stem, cube_io::GROUND_TRUTH_EXT), &scene.gt)?;
    let truth_path = cube_io::append_ext(stem, "truth.json");
    let json = serde_json::to_string_pretty(&scene.truth).expect("truth serializes");
    fs::write(&truth_path, json + "\n").map_err(|e| Error::io(&truth_path, e))
}

/// Exact joint probability table, row-major over `dims`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    pub dims: Vec<usize>,
    pub probs: Vec<f64>,
}

/// Closed-form joint distribution of the requested bands (in order), with
/// the class appended as the last axis when `with_class` is set.
///
/// Available for combinations whose generated sample realizes the
/// distribution exactly: noiseless relevant and duplicate bands, synergy
/// pair members, the class, all provided the pixel count is a multiple of
/// `K^(1+p)`; or one noise band on its own when the pixel count is a
/// multiple of `noise_levels`.
pub fn exact_joint_distribution(spec: &SceneSpec, bands: &[usize], with_class: bool) -> Result<JointDistribution> {
    let truth = planted_roles(spec)?;
    let k = spec.class_count;
    let n = spec.pixels();
    if bands.is_empty() && !with_class {
        return Err(Error::config("no variables requested"));
    }
    if let Some(&b) = bands.iter().find(|&&b| b >= truth.roles.len()) {
        return Err(Error::config(format!("band {b} out of range")));
    }

    if let [b] = *bands {
        if truth.roles[b] == BandRole::Noise {
            if with_class {
                return Err(Error::NoClosedForm(
                    "noise bands are only independent of the class in distribution".into(),
                ));
            }
            let levels = spec.noise_levels;
            if !n.is_multiple_of(levels) {
                return Err(Error::NoClosedForm(format!(
                    "{n} pixels do not split evenly over {levels} noise levels"
                )));
            }
            return Ok(JointDistribution {
                dims: vec![levels],
                probs: vec![1.0 / levels as f64; levels],
            });
        }
    }

    // Each variable as a function of the latent (c, x_1, ..., x_p).
    enum Var {
        Class,
        PairFirst(usize),
        PairSecond(usize),
    }
    let pairs = truth.synergy_pairs();
    let mut vars = Vec::with_capacity(bands.len() + 1);
    for &b in bands {
        let v = match truth.roles[b] {
            BandRole::Relevant if spec.relevant_noise == 0.0 => Var::Class,
            BandRole::Duplicate { .. } if spec.relevant_noise == 0.0 && spec.duplicate_noise == 0.0 => Var::Class,
            BandRole::SynergyPair { first, second } => {
                let q = pairs.iter().position(|&(f, s)| (f, s) == (first, second)).unwrap();
                if b == first {
                    Var::PairFirst(q)
                } else {
                    Var::PairSecond(q)
                }
            }
            BandRole::Noise => {
                return Err(Error::NoClosedForm(
                    "noise bands have a closed form only on their own".into(),
                ))
            }
            _ => return Err(Error::NoClosedForm(format!("band {b} carries continuous noise"))),
        };
        vars.push(v);
    }
    if with_class {
        vars.push(Var::Class);
    }

    let cells = spec
        .latent_cells()
        .filter(|&c| n.is_multiple_of(c))
        .ok_or_else(|| Error::NoClosedForm(format!("{n} pixels are not a multiple of K^(1+p)")))?;
    let width = 1 + spec.synergy_pairs;
    let dims = vec![k; vars.len()];
    let size = k
        .checked_pow(vars.len() as u32)
        .ok_or_else(|| Error::NoClosedForm("table too large".into()))?;
    let mut probs = vec![0.0; size];
    let mut digits = vec![0usize; width];
    for cell in 0..cells {
        let mut rest = cell;
        for d in digits.iter_mut() {
            *d = rest % k;
            rest /= k;
        }
        let idx = vars.iter().fold(0usize, |acc, v| {
            let s = match *v {
                Var::Class => digits[0],
                Var::PairFirst(q) => digits[1 + q],
                Var::PairSecond(q) => (digits[1 + q] + digits[0]) % k,
            };
            acc * k + s
        });
        probs[idx] += 1.0;
    }
    for p in probs.iter_mut() {
        *p /= cells as f64;
    }
    Ok(JointDistribution { dims, probs })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_spec_layout() {
        let spec = SceneSpec::default();
        assert_eq!(spec.total_bands(), 9);
        let scene = generate_scene(&spec).unwrap();
        assert_eq!(scene.cube.bands(), 9);
        let t = &scene.truth;
        assert_eq!(t.relevant().len(), 1);
        assert_eq!(t.duplicates().len(), 2);
        assert_eq!(t.synergy_pairs().len(), 1);
        assert_eq!(t.noise().len(), 4);
        for d in t.duplicates() {
            assert_eq!(t.roles[d], BandRole::Duplicate { of: t.relevant()[0] });
        }
        assert_eq!(planted_roles(&spec).unwrap(), *t);
    }

    #[test]
    fn invalid_specs() {
        for spec in [
            SceneSpec {
                class_count: 1,
                ..SceneSpec::default()
            },
            SceneSpec {
                relevant_bands: 0,
                duplicate_bands: 0,
                synergy_pairs: 0,
                noise_bands: 0,
                ..SceneSpec::default()
            },
            SceneSpec {
                relevant_bands: 0,
                ..SceneSpec::default()
            },
        ] {
            assert!(matches!(generate_scene(&spec), Err(Error::Spec(_))));
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let spec = SceneSpec::default();
        let a = generate_scene(&spec).unwrap();
        let b = generate_scene(&spec).unwrap();
        assert_eq!(a.cube, b.cube);
        assert_eq!(a.gt, b.gt);
        let c = generate_scene(&SceneSpec { seed: 43, ..spec }).unwrap();
        assert_ne!(a.cube, c.cube);
    }

    #[test]
    fn closed_forms() {
        let spec = SceneSpec::default();
        let t = planted_roles(&spec).unwrap();
        let (x1, x2) = t.synergy_pairs()[0];
        let xor = exact_joint_distribution(&spec, &[x1, x2], true).unwrap();
        assert_eq!(xor.dims, vec![2, 2, 2]);
        let quarter = xor.probs.iter().filter(|&&p| p == 0.25).count();
        let zero = xor.probs.iter().filter(|&&p| p == 0.0).count();
        assert_eq!((quarter, zero), (4, 4));

        let diag = exact_joint_distribution(&spec, &[t.relevant()[0]], true).unwrap();
        assert_eq!(diag.probs, vec![0.5, 0.0, 0.0, 0.5]);

        let noise = exact_joint_distribution(&spec, &[t.noise()[0]], false).unwrap();
        assert_eq!(noise.probs, vec![1.0 / 16.0; 16]);

        assert!(matches!(
            exact_joint_distribution(&spec, &[t.noise()[0]], true),
            Err(Error::NoClosedForm(_))
        ));
        assert!(matches!(
            exact_joint_distribution(&spec, &[t.duplicates()[0]], true),
            Err(Error::NoClosedForm(_))
        ));
    }
}
