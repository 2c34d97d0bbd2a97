use mvplc::turbo::{
    decode, decode_with_stats, depuncture, encode, puncture, CodeRate, Interleaver, PbSize, ParityStreams,
    PuncturePattern, TurboConfig,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn xor(a: &[u8], b: &[u8]) -> Vec<u8> {
    a.iter().zip(b).map(|(x, y)| x ^ y).collect()
}

fn random_bits(rng: &mut ChaCha8Rng, n: usize) -> Vec<u8> {
    (0..n).map(|_| rng.random_range(0..2u8)).collect()
}

fn rates() -> impl Strategy<Value = CodeRate> {
    prop_oneof![
        Just(CodeRate::Half),
        Just(CodeRate::SixteenEighteenths),
        Just(CodeRate::Unpunctured)
    ]
}

/// BPSK over AWGN at the given Eb/N0, LLRs as ln P(1)/P(0).
fn awgn_llrs(coded: &[u8], rate: f64, ebn0_db: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let sigma2 = 1.0 / (2.0 * rate * 10f64.powf(ebn0_db / 10.0));
    coded
        .iter()
        .map(|&b| {
            let n: f64 = rng.sample(StandardNormal);
            let y = (2.0 * b as f64 - 1.0) + sigma2.sqrt() * n;
            2.0 * y / sigma2
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn encoder_is_linear(seed in any::<u64>(), rate in rates()) {
        let cfg = TurboConfig::new(PbSize::Pb16, rate).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_bits(&mut rng, cfg.info_bits());
        let b = random_bits(&mut rng, cfg.info_bits());
        let ca = encode(&a, &cfg).unwrap().to_bits();
        let cb = encode(&b, &cfg).unwrap().to_bits();
        let cab = encode(&xor(&a, &b), &cfg).unwrap().to_bits();
        prop_assert_eq!(cab, xor(&ca, &cb));
    }

    #[test]
    fn noiseless_decode_recovers_info(seed in any::<u64>(), rate in rates()) {
        let cfg = TurboConfig::new(PbSize::Pb72, rate).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let info = random_bits(&mut rng, cfg.info_bits());
        let coded = encode(&info, &cfg).unwrap().to_bits();
        prop_assert_eq!(coded.len(), cfg.coded_bits());
        prop_assert_eq!(&coded[..info.len()], &info[..]);
        let llrs: Vec<f64> = coded.iter().map(|&b| if b == 1 { 3.0 } else { -3.0 }).collect();
        prop_assert_eq!(decode(&llrs, &cfg).unwrap(), info);
    }

    #[test]
    fn depuncture_inverts_puncture(seed in any::<u64>(), rate in rates(), couples in 1usize..200) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut streams = ParityStreams::zeros(couples);
        for s in [&mut streams.p1, &mut streams.q1, &mut streams.p2, &mut streams.q2] {
            *s = random_bits(&mut rng, couples);
        }
        let pattern = PuncturePattern::for_rate(rate);
        let kept = puncture(&streams, &pattern);
        prop_assert_eq!(kept.len(), pattern.kept_count(couples));
        let soft: Vec<f64> = kept.iter().map(|&b| 1.0 + b as f64).collect();
        let back = depuncture(&soft, &pattern, couples).unwrap();
        let pairs = [(&back.p1, &streams.p1), (&back.q1, &streams.q1), (&back.p2, &streams.p2), (&back.q2, &streams.q2)];
        for t in 0..couples {
            let keep = pattern.keeps(t);
            for (slot, (llr, bits)) in pairs.iter().enumerate() {
                if keep[slot] {
                    prop_assert_eq!(llr[t], 1.0 + bits[t] as f64);
                } else {
                    prop_assert_eq!(llr[t], 0.0);
                }
            }
        }
        prop_assert!(depuncture(&[soft.clone(), vec![0.0]].concat(), &pattern, couples).is_err());
    }

    #[test]
    fn interleaver_roundtrip(seed in any::<u64>(), couples in 1usize..300) {
        let il = Interleaver::generate(couples, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let data: Vec<(u8, u8)> = (0..couples).map(|_| (rng.random_range(0..2), rng.random_range(0..2))).collect();
        let there = il.interleave(&data).unwrap();
        prop_assert_eq!(il.deinterleave(&there).unwrap(), data);
        let mut perm = il.permutation().to_vec();
        perm.sort_unstable();
        prop_assert_eq!(perm, (0..couples as u32).collect::<Vec<_>>());
    }
}

#[test]
fn rates_give_expected_lengths() {
    for pb in [PbSize::Pb16, PbSize::Pb72, PbSize::Pb136, PbSize::Pb264, PbSize::Pb520] {
        let k = pb.info_bits();
        assert_eq!(TurboConfig::new(pb, CodeRate::Half).unwrap().coded_bits(), 2 * k);
        assert_eq!(TurboConfig::new(pb, CodeRate::Unpunctured).unwrap().coded_bits(), 3 * k);
        assert_eq!(TurboConfig::new(pb, CodeRate::SixteenEighteenths).unwrap().coded_bits(), k * 18 / 16);
    }
}

#[test]
fn interleaver_text_roundtrip() {
    for pb in [PbSize::Pb16, PbSize::Pb136, PbSize::Pb520] {
        let il = Interleaver::builtin(pb);
        let (pb2, back) = Interleaver::parse(&il.to_text(pb)).unwrap();
        assert_eq!(pb2, pb);
        assert_eq!(back.permutation(), il.permutation());
    }
    assert!(Interleaver::from_permutation(vec![0, 0, 1]).is_err());
}

#[test]
fn wrong_lengths_are_rejected() {
    let cfg = TurboConfig::new(PbSize::Pb16, CodeRate::Half).unwrap();
    assert!(encode(&vec![0; cfg.info_bits() - 2], &cfg).is_err());
    assert!(encode(&vec![2; cfg.info_bits()], &cfg).is_err());
    assert!(decode(&vec![0.0; cfg.coded_bits() + 1], &cfg).is_err());
}

#[test]
fn iterations_lower_the_error_rate() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let base = TurboConfig::new(PbSize::Pb136, CodeRate::Half).unwrap().with_early_stop(false);
    let one = base.clone().with_iterations(1).unwrap();
    let many = base.with_iterations(8).unwrap();
    let (mut err1, mut err8, mut total) = (0usize, 0usize, 0usize);
    for _ in 0..40 {
        let info = random_bits(&mut rng, one.info_bits());
        let coded = encode(&info, &one).unwrap().to_bits();
        let llrs = awgn_llrs(&coded, 0.5, 1.5, &mut rng);
        let count = |out: Vec<u8>| out.iter().zip(&info).filter(|(a, b)| a != b).count();
        err1 += count(decode(&llrs, &one).unwrap());
        err8 += count(decode(&llrs, &many).unwrap());
        total += info.len();
    }
    assert!(err1 > 0, "one iteration made no errors in {total} bits");
    assert!(2 * err8 < err1, "8 iterations {err8} vs 1 iteration {err1} errors");
}

#[test]
fn early_stop_saves_iterations_when_clean() {
    let cfg = TurboConfig::new(PbSize::Pb72, CodeRate::Half).unwrap().with_early_stop(true);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let info = random_bits(&mut rng, cfg.info_bits());
    let coded = encode(&info, &cfg).unwrap().to_bits();
    let llrs = awgn_llrs(&coded, 0.5, 8.0, &mut rng);
    let (out, stats) = decode_with_stats(&llrs, &cfg).unwrap();
    assert_eq!(out, info);
    assert!(stats.iterations < cfg.iterations, "{} iterations", stats.iterations);
}
