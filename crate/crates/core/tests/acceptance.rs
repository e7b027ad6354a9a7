//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::process::ExitCode;
use std::time::Instant;

use bdat_core::bch::{build_code, CodeParams, Codeword, DecodeOutcome};
use bdat_core::bits::{hamming, BitString};
use bdat_core::commitment::commit_to_codeword;
use bdat_core::evaluation::{
    random_pair_scores, security_report, stage_score_table, Benchmark, Rating, StageKc,
};
use bdat_core::pipeline::{
    binarize_query, deserialize_record, verify_record, EnrollOptions, EnrollSeeds, StageConfig, Store,
};
use bdat_core::randproj::ProjectionKey;
use bdat_core::rng::seeded;
use bdat_core::vectors::{synth_classes, FeatureVector, SynthSpec};
use rand::Rng;
use rand_distr::StandardNormal;

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn all_words(n: usize) -> impl Iterator<Item = BitString> {
    (0..1u64 << n).map(move |w| BitString::from_u64(w, n))
}

fn all_codewords(code: &CodeParams) -> Vec<Codeword> {
    all_words(code.k_msg())
        .map(|m| code.encode(&m).unwrap())
        .collect()
}

fn bch_exhaustive() -> Outcome {
    let start = Instant::now();
    let mut failures = 0;
    let small = build_code(3, 1).unwrap();
    let book = all_codewords(&small);
    for word in all_words(7) {
        let nearest = book
            .iter()
            .min_by_key(|c| hamming(c.bits(), &word).unwrap())
            .unwrap();
        if small.decode(&word).unwrap().codeword() != Some(nearest) {
            failures += 1;
        }
    }
    let code = build_code(4, 2).unwrap();
    let mut patterns: Vec<BitString> = Vec::new();
    for i in 0..15 {
        let mut e = BitString::zeros(15);
        e.flip(i);
        patterns.push(e.clone());
        for j in i + 1..15 {
            let mut e2 = e.clone();
            e2.flip(j);
            patterns.push(e2);
        }
    }
    let mut trials = 0;
    for c in all_codewords(&code) {
        for e in &patterns {
            trials += 1;
            match code.decode(&(c.bits() ^ e)).unwrap() {
                DecodeOutcome::Corrected {
                    codeword,
                    errors_corrected,
                } if codeword == c && errors_corrected == e.weight() => {}
                _ => failures += 1,
            }
        }
    }
    let elapsed = start.elapsed();
    check(
        failures == 0 && patterns.len() == 120 && elapsed.as_secs_f64() < 1.0,
        format!("128 words + {trials} corrupted codewords, {failures} failures, {elapsed:.2?}"),
    )
}

fn min_distance() -> Outcome {
    let code = build_code(4, 2).unwrap();
    let book = all_codewords(&code);
    let mut min_pair = usize::MAX;
    for i in 0..book.len() {
        for j in i + 1..book.len() {
            min_pair = min_pair.min(hamming(book[i].bits(), book[j].bits()).unwrap());
        }
    }
    let min_weight = book
        .iter()
        .map(|c| c.bits().weight())
        .filter(|&w| w > 0)
        .min()
        .unwrap();
    check(
        min_pair >= 5 && min_weight >= 5,
        format!("min pairwise distance {min_pair}, min nonzero weight {min_weight}"),
    )
}

fn orthonormality() -> Outcome {
    let mut worst: f64 = 0.0;
    for (d, k) in [(8, 4), (128, 32), (512, 128)] {
        for seed in 0..5 {
            worst = worst.max(ProjectionKey::generate(seed, d, k).unwrap().max_gram_deviation());
        }
    }
    check(worst < 1e-9, format!("max |R Rt - I| = {worst:.2e}"))
}

fn gaussian(rng: &mut impl Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.sample(StandardNormal)).collect()
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

fn distance_preservation() -> Outcome {
    let key = ProjectionKey::generate(2024, 512, 128).unwrap();
    let mut rng = seeded(77);
    let mut inside = 0;
    for _ in 0..2000 {
        let u = gaussian(&mut rng, 512);
        let v = gaussian(&mut rng, 512);
        let pu = key.project(&u).unwrap().values;
        let pv = key.project(&v).unwrap().values;
        let ratio = distance(&pu, &pv) * key.distance_scale() / distance(&u, &v);
        if (0.75..=1.25).contains(&ratio) {
            inside += 1;
        }
    }
    check(
        inside * 100 >= 2000 * 95,
        format!("{inside}/2000 rescaled distance ratios in [0.75, 1.25]"),
    )
}

fn acceptance_region() -> Outcome {
    let code = build_code(3, 1).unwrap();
    let (mut trials, mut mismatches) = (0, 0);
    for (i, c) in all_codewords(&code).iter().enumerate() {
        for template in all_words(7) {
            let commitment = commit_to_codeword(&template, &code, c, [i as u8; 16]).unwrap();
            for query in all_words(7) {
                trials += 1;
                let accepted = commitment.verify(&code, &query).unwrap().is_accept();
                if accepted != (hamming(&template, &query).unwrap() <= 1) {
                    mismatches += 1;
                }
            }
        }
    }
    check(
        mismatches == 0,
        format!("{trials} (codeword, template, query) triples, {mismatches} mismatches"),
    )
}

fn benchmark_spec(seed: u64) -> SynthSpec {
    SynthSpec {
        seed,
        num_classes: 10,
        samples_per_class: 10,
        dim: 128,
        class_center_scale: 1.0,
        within_sigma: 0.3,
    }
}

fn benchmark(seed: u64) -> Benchmark {
    let data = synth_classes(&benchmark_spec(seed)).unwrap();
    Benchmark::build(&data, &StageConfig::default(), 5, seed).unwrap()
}

const BENCH_SEEDS: [u64; 5] = [1, 2, 3, 4, 5];

fn end_to_end(benches: &[Benchmark]) -> Outcome {
    let rates: Vec<_> = benches.iter().map(|b| b.rates().unwrap()).collect();
    let gar = rates.iter().map(|r| r.genuine_accept_rate).sum::<f64>() / rates.len() as f64;
    let iar = rates.iter().map(|r| r.imposter_accept_rate).sum::<f64>() / rates.len() as f64;
    check(
        gar >= 0.95 && iar <= 0.01,
        format!("mean GAR {gar:.3}, mean IAR {iar:.4} over {} seeds", rates.len()),
    )
}

fn discriminability(benches: &[Benchmark]) -> Outcome {
    let mut wins = 0;
    let mut detail = Vec::new();
    for b in benches {
        let s = stage_score_table(b).unwrap().summary;
        wins += s.binary_exceeds_cancelable as usize;
        detail.push(format!("{:.3} vs {:.3}", s.binary_mean, s.cancelable_mean));
    }
    check(
        wins >= 4,
        format!("binary > cancelable in {wins}/5 seeds ({})", detail.join(", ")),
    )
}

fn security() -> Outcome {
    let r = security_report(&StageKc::preset("paper-novel").unwrap(), "paper-novel", None).unwrap();
    let bits: Vec<Option<u64>> = r.stages.iter().map(|s| s.brute_force_bits).collect();
    let affine: Vec<Rating> = r.stages.iter().map(|s| s.affine_transformation).collect();
    let text = r.to_text();
    let ok = bits == [Some(3771), None, Some(11339), Some(6799)]
        && r.stages.iter().all(|s| s.brute_force == Rating::High)
        && affine == [Rating::Low, Rating::High, Rating::High, Rating::High]
        && ["2^3771", "2^11339", "2^6799"].iter().all(|b| text.contains(b));
    check(ok, format!("bits {bits:?}, affine ratings {affine:?}"))
}

fn fixed() -> EnrollOptions {
    EnrollOptions {
        created_at: Some(0),
        ..Default::default()
    }
}

fn revocability() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let store = Store::open(dir.path(), 5).unwrap();
    let data = synth_classes(&benchmark_spec(9)).unwrap();
    let user: Vec<FeatureVector> = data[..10].to_vec();
    let (train, probes) = user.split_at(5);
    let cfg = StageConfig::default();
    let original = store
        .enroll("u", train, &cfg, EnrollSeeds::from_base(1), &fixed())
        .unwrap();
    let code = cfg.validate().unwrap();
    let n = cfg.n_total() as f64;
    let band = 3.0 * n.sqrt() / 2.0;
    let (mut in_band, mut rejects, mut queries) = (0, 0, 0);
    for i in 0..50u64 {
        let new = store
            .revoke("u", train, EnrollSeeds::from_base(1000 + 3 * i), &fixed())
            .unwrap();
        let dist = hamming(&original.template, &new.template).unwrap() as f64;
        if (dist - n / 2.0).abs() <= band {
            in_band += 1;
        }
        for p in probes {
            let bits = binarize_query(&new.record, &p.values).unwrap();
            queries += 1;
            rejects += !original.record.commitments[0]
                .verify(&code, &bits)
                .unwrap()
                .is_accept() as usize;
        }
    }
    check(
        in_band * 100 >= 50 * 90 && rejects * 100 >= queries * 99,
        format!(
            "{in_band}/50 template distances in {:.1} +/- {band:.1}; old commitment rejected {rejects}/{queries}",
            n / 2.0
        ),
    )
}

fn determinism() -> Outcome {
    let data = synth_classes(&benchmark_spec(11)).unwrap();
    let cfg = StageConfig::default();
    let files: Vec<Vec<u8>> = (0..2)
        .map(|_| {
            let dir = tempfile::tempdir().unwrap();
            let store = Store::open(dir.path(), 3).unwrap();
            store
                .enroll("d", &data[..5], &cfg, EnrollSeeds::from_base(4), &fixed())
                .unwrap();
            std::fs::read(store.record_path("d")).unwrap()
        })
        .collect();
    let identical = files[0] == files[1];
    let mut rng = seeded(123);
    let mut rejected = 0;
    for _ in 0..1000 {
        let mut bytes = files[0].clone();
        let at = rng.random_range(0..bytes.len());
        bytes[at] ^= rng.random_range(1..=255u8);
        match deserialize_record(&bytes) {
            Err(_) => rejected += 1,
            Ok(record) => {
                if verify_record(&record, &data[0].values).is_ok_and(|v| v.accepted) {
                    return Err(format!("corruption at byte {at} still verified"));
                }
            }
        }
    }
    check(
        identical && rejected == 1000,
        format!("records identical: {identical}; {rejected}/1000 corruptions rejected at parse"),
    )
}

fn imposter_distribution() -> Outcome {
    let n = StageConfig::default().n_total();
    let scores = random_pair_scores(n, 1000, 31);
    let mean = scores.iter().sum::<usize>() as f64 / scores.len() as f64;
    let sigma = (n as f64).sqrt() / 2.0 / (scores.len() as f64).sqrt();
    let z = (mean - n as f64 / 2.0) / sigma;
    check(
        z.abs() <= 3.0,
        format!("mean {mean:.3} vs {:.1}, z = {z:.2}", n as f64 / 2.0),
    )
}

fn main() -> ExitCode {
    let start = Instant::now();
    let benches: Vec<Benchmark> = BENCH_SEEDS.iter().map(|&s| benchmark(s)).collect();
    let criteria: Vec<Criterion<'_>> = vec![
        ("1 BCH exhaustive correctness", Box::new(bch_exhaustive)),
        ("2 minimum distance", Box::new(min_distance)),
        ("3 orthonormality", Box::new(orthonormality)),
        ("4 distance preservation", Box::new(distance_preservation)),
        ("5 commitment acceptance region", Box::new(acceptance_region)),
        ("6 end-to-end benchmark", Box::new(|| end_to_end(&benches))),
        (
            "7 discriminability direction",
            Box::new(|| discriminability(&benches)),
        ),
        ("8 security report", Box::new(security)),
        ("9 revocability", Box::new(revocability)),
        ("10 determinism and corruption", Box::new(determinism)),
        ("11 imposter score distribution", Box::new(imposter_distribution)),
    ];
    let mut failed = 0;
    for (name, run) in &criteria {
        match run() {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail}");
            }
        }
    }
    println!(
        "{} of {} criteria passed in {:.1?}",
        criteria.len() - failed,
        criteria.len(),
        start.elapsed()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
