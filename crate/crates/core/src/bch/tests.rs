use super::*;
use proptest::prelude::*;
use rand::Rng;

fn all_codewords(code: &CodeParams) -> Vec<BitString> {
    (0..1u64 << code.k_msg())
        .map(|i| {
            code.encode(&BitString::from_u64(i, code.k_msg()))
                .unwrap()
                .into_bits()
        })
        .collect()
}

/// Nearest codeword by exhaustive search; `None` on a distance tie.
fn brute_nearest(codewords: &[BitString], word: &BitString) -> Option<(BitString, usize)> {
    let mut best: Option<(BitString, usize)> = None;
    let mut tie = false;
    for c in codewords {
        let d = hamming(c, word).unwrap();
        match &best {
            Some((_, bd)) if d > *bd => {}
            Some((_, bd)) if d == *bd => tie = true,
            _ => {
                best = Some((c.clone(), d));
                tie = false;
            }
        }
    }
    if tie {
        None
    } else {
        best
    }
}

/// Remainder of a GF(2) polynomial (bit i = coefficient of x^i) modulo g.
fn gf2_rem(mut p: Vec<bool>, g: &[bool]) -> Vec<bool> {
    let dg = g.len() - 1;
    for i in (dg..p.len()).rev() {
        if p[i] {
            for (j, &gj) in g.iter().enumerate() {
                p[i - dg + j] ^= gj;
            }
        }
    }
    p.truncate(dg);
    p
}

#[test]
fn bch_7_4_generator() {
    let code = build_code(3, 1).unwrap();
    assert_eq!((code.n(), code.k_msg(), code.d_min()), (7, 4, 3));
    // x^3 + x + 1, coefficients of x^0..x^3.
    assert_eq!(code.generator().to_string(), "1101");
}

#[test]
fn bch_15_7_parameters() {
    let code = build_code(4, 2).unwrap();
    assert_eq!((code.n(), code.k_msg()), (15, 7));
    assert_eq!(code.generator().len() - 1, 8);
    // g(x) = (x^4+x+1)(x^4+x^3+x^2+x+1) = x^8+x^7+x^6+x^4+1
    assert_eq!(code.generator().to_string(), "100010111");
}

#[test]
fn generators_divide_x_n_minus_1() {
    for m in 3..=10 {
        for t in 1..=6 {
            let Ok(code) = build_code(m, t) else { continue };
            let mut xn1 = vec![false; code.n() + 1];
            xn1[0] = true;
            xn1[code.n()] = true;
            assert!(
                gf2_rem(xn1, code.generator().as_slice()).iter().all(|&b| !b),
                "m={m} t={t}"
            );
        }
    }
}

#[test]
fn known_dimensions() {
    // Standard narrow-sense primitive BCH dimensions.
    for (m, t, k) in [
        (5, 3, 16),
        (6, 5, 36),
        (6, 3, 45),
        (7, 10, 64),
        (8, 4, 223),
        (10, 1, 1013),
    ] {
        assert_eq!(build_code(m, t).unwrap().k_msg(), k, "m={m} t={t}");
    }
}

#[test]
fn build_errors() {
    assert!(matches!(build_code(3, 3), Err(CodeError::TooManyErrors { .. })));
    assert!(matches!(build_code(3, 4), Err(CodeError::TooManyErrors { .. })));
    assert_eq!(build_code(2, 1), Err(CodeError::UnsupportedDegree(2)));
    assert_eq!(build_code(11, 1), Err(CodeError::UnsupportedDegree(11)));
    assert_eq!(build_code(4, 0), Err(CodeError::ZeroT));
}

#[test]
fn encode_examples() {
    let code = build_code(3, 1).unwrap();
    assert_eq!(
        code.encode(&BitString::zeros(4)).unwrap().bits(),
        &BitString::zeros(7)
    );
    // message 1000 (bit 0 set) is m(x) = 1; x^3 mod (x^3+x+1) = x + 1.
    let c = code.encode(&"1000".parse().unwrap()).unwrap();
    assert_eq!(c.bits().to_string(), "1101000");
    assert!(gf2_rem(c.bits().as_slice().to_vec(), code.generator().as_slice())
        .iter()
        .all(|&b| !b));
    assert_eq!(code.message_of(&c).to_string(), "1000");
    assert!(code.encode(&BitString::zeros(5)).is_err());
}

#[test]
fn encoding_is_injective_and_divisible() {
    let code = build_code(4, 2).unwrap();
    let words = all_codewords(&code);
    let distinct: HashSet<_> = words.iter().collect();
    assert_eq!(distinct.len(), 128);
    for w in &words {
        assert!(gf2_rem(w.as_slice().to_vec(), code.generator().as_slice())
            .iter()
            .all(|&b| !b));
        assert!(code.is_codeword(w).unwrap());
    }
}

#[test]
fn codeword_sets_are_linear_with_min_distance() {
    for (m, t) in [(3, 1), (4, 1), (4, 2), (4, 3)] {
        let code = build_code(m, t).unwrap();
        let words = all_codewords(&code);
        let set: HashSet<_> = words.iter().cloned().collect();
        let min_weight = words.iter().map(|w| w.weight()).filter(|&w| w > 0).min().unwrap();
        assert!(min_weight >= code.d_min(), "m={m} t={t}: {min_weight}");
        for a in &words {
            for b in &words {
                assert!(set.contains(&(a ^ b)));
            }
        }
    }
}

#[test]
fn bch_7_4_decode_matches_brute_force_everywhere() {
    let code = build_code(3, 1).unwrap();
    let words = all_codewords(&code);
    for w in 0..128u64 {
        let word = BitString::from_u64(w, 7);
        // Hamming(7,4) is perfect: every word is within 1 of a unique codeword.
        let (nearest, dist) = brute_nearest(&words, &word).unwrap();
        match code.decode(&word).unwrap() {
            DecodeOutcome::Corrected {
                codeword,
                errors_corrected,
            } => {
                assert_eq!(codeword.bits(), &nearest);
                assert_eq!(errors_corrected, dist);
            }
            DecodeOutcome::Failure => panic!("failure on {word}"),
        }
    }
}

#[test]
fn bch_15_7_corrects_all_weight_two_patterns() {
    let code = build_code(4, 2).unwrap();
    let mut patterns = Vec::new();
    for i in 0..15 {
        patterns.push(vec![i]);
        for j in i + 1..15 {
            patterns.push(vec![i, j]);
        }
    }
    assert_eq!(patterns.len(), 120);
    for c in all_codewords(&code) {
        for p in &patterns {
            let mut w = c.clone();
            p.iter().for_each(|&i| w.flip(i));
            match code.decode(&w).unwrap() {
                DecodeOutcome::Corrected {
                    codeword,
                    errors_corrected,
                } => {
                    assert_eq!(codeword.bits(), &c);
                    assert_eq!(errors_corrected, p.len());
                }
                DecodeOutcome::Failure => panic!("failure on {w}"),
            }
        }
    }
}

#[test]
fn bch_15_7_beyond_t_never_returns_a_non_codeword() {
    let code = build_code(4, 2).unwrap();
    let words = all_codewords(&code);
    for w in 0..1u64 << 15 {
        let word = BitString::from_u64(w, 15);
        match code.decode(&word).unwrap() {
            DecodeOutcome::Corrected {
                codeword,
                errors_corrected,
            } => {
                assert!(errors_corrected <= 2);
                assert_eq!(hamming(codeword.bits(), &word).unwrap(), errors_corrected);
                let (nearest, _) = brute_nearest(&words, &word).unwrap();
                assert_eq!(codeword.bits(), &nearest);
            }
            DecodeOutcome::Failure => {
                let best = words.iter().map(|c| hamming(c, &word).unwrap()).min().unwrap();
                assert!(best > 2);
            }
        }
    }
}

#[test]
fn sampled_correction_on_long_codes() {
    let mut rng = seeded(99);
    for (m, t) in [(6, 5), (7, 10), (8, 8), (10, 12)] {
        let code = build_code(m, t).unwrap();
        let trials = if m >= 8 { 300 } else { 2_000 };
        for _ in 0..trials {
            let msg = BitString::random(&mut rng, code.k_msg());
            let c = code.encode(&msg).unwrap();
            let weight = rng.random_range(0..=code.t());
            let mut w = c.bits().clone();
            for p in index::sample(&mut rng, code.n(), weight) {
                w.flip(p);
            }
            let out = code.decode(&w).unwrap();
            assert_eq!(out.codeword(), Some(&c), "m={m} t={t}");
        }
    }
}

#[test]
fn decode_wrong_length_is_an_error() {
    let code = build_code(3, 1).unwrap();
    assert_eq!(
        code.decode(&BitString::zeros(8)),
        Err(CodeError::WrongLength { expected: 7, got: 8 })
    );
}

#[test]
fn random_codewords_contract() {
    let code = build_code(4, 2).unwrap();
    let one = code.random_codewords(1, 5).unwrap();
    assert!(code.is_codeword(one[0].bits()).unwrap());

    let ten = code.random_codewords(10, 3).unwrap();
    assert_eq!(ten, code.random_codewords(10, 3).unwrap());
    for i in 0..10 {
        for j in i + 1..10 {
            assert!(hamming(ten[i].bits(), ten[j].bits()).unwrap() >= 5);
        }
    }
    let all = code.random_codewords(128, 1).unwrap();
    assert_eq!(all.iter().collect::<HashSet<_>>().len(), 128);

    let small = build_code(3, 1).unwrap();
    assert_eq!(
        small.random_codewords(17, 0),
        Err(CodeError::NotEnoughCodewords {
            requested: 17,
            k_msg: 4
        })
    );

    let long = build_code(6, 5).unwrap();
    let many = long.random_codewords(50, 8).unwrap();
    assert_eq!(many.iter().collect::<HashSet<_>>().len(), 50);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn decode_inverts_bounded_noise_bch_63(
        msg in proptest::collection::vec(any::<bool>(), 36),
        errs in proptest::collection::btree_set(0usize..63, 0..=5),
    ) {
        let code = build_code(6, 5).unwrap();
        let c = code.encode(&BitString::from_bools(msg)).unwrap();
        let mut w = c.bits().clone();
        errs.iter().for_each(|&i| w.flip(i));
        prop_assert_eq!(
            code.decode(&w).unwrap(),
            DecodeOutcome::Corrected { codeword: c, errors_corrected: errs.len() }
        );
    }
}
