use bandsel::exec::Execution;
use bandsel::{BandTable, DiscreteVariable, Method, QuantizerConfig, SelectorConfig};
use bandsel_oracle::Problem;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Case {
    raw: Vec<Vec<f64>>,
    class: Vec<u32>,
    classes: u32,
    bins: u32,
    k: usize,
}

/// Small integer-valued bands mixing class-driven, copied and random ones.
fn random_case(seed: u64) -> Case {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(40..160);
    let classes = rng.random_range(2..=4u32);
    let class: Vec<u32> = (0..n).map(|_| rng.random_range(0..classes)).collect();
    let bands = rng.random_range(2..=12usize);
    let mut raw: Vec<Vec<f64>> = Vec::with_capacity(bands);
    for _ in 0..bands {
        let kind = rng.random_range(0..4);
        let band: Vec<f64> = match kind {
            0 => class
                .iter()
                .map(|&c| (c * 3) as f64 + rng.random_range(0..3) as f64)
                .collect(),
            1 if !raw.is_empty() => {
                let src = raw[rng.random_range(0..raw.len())].clone();
                src.iter()
                    .map(|v| v + if rng.random_bool(0.2) { 1.0 } else { 0.0 })
                    .collect()
            }
            2 => {
                let levels = rng.random_range(2..6);
                (0..n).map(|_| rng.random_range(0..levels) as f64).collect()
            }
            _ => class
                .iter()
                .map(|&c| ((c + rng.random_range(0..2)) % classes) as f64 * 2.5)
                .collect(),
        };
        raw.push(band);
    }
    let k = rng.random_range(1..=bands.min(4));
    let bins = rng.random_range(3..=8);
    Case {
        raw,
        class,
        classes,
        bins,
        k,
    }
}

#[test]
fn every_selector_matches_brute_force_rescoring() {
    for seed in 0..100u64 {
        let case = random_case(seed);
        let class_var = DiscreteVariable::new(case.class.clone(), case.classes).unwrap();
        let quant = QuantizerConfig::new(case.bins).unwrap();
        let table = BandTable::new(case.raw.clone(), class_var, quant, Execution::Sequential).unwrap();

        let oracle_bands: Vec<Vec<u32>> = case
            .raw
            .iter()
            .map(|b| bandsel_oracle::quantize(b, case.bins))
            .collect();
        for (i, b) in oracle_bands.iter().enumerate() {
            assert_eq!(table.band(i).symbols(), &b[..], "seed {seed}: quantized band {i}");
        }

        let mut cfg = SelectorConfig::new(case.k);
        cfg.beta = 0.5 + (seed % 4) as f64 * 0.25;
        cfg.threshold = 0.2 + (seed % 5) as f64 * 0.1;
        let problem = Problem {
            bands: &oracle_bands,
            raw: &case.raw,
            class: &case.class,
            bins: case.bins,
            beta: cfg.beta,
            threshold: cfg.threshold,
            eps: cfg.eps,
        };
        for method in Method::ALL {
            let expected = problem.select(method.name(), case.k);
            for exec in [Execution::Sequential, Execution::Parallel] {
                let got = bandsel::selectors::select_with(method, &table, &cfg, exec).unwrap();
                assert_eq!(got.ranked_bands, expected, "seed {seed}, method {method}, {exec:?}");
                assert_eq!(got.exhausted, expected.len() < case.k);
            }
        }
    }
}
