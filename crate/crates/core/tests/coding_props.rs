use proptest::prelude::*;

use ccs_radar::coding::{make_interleaver, BitBlock, BitRole, CodeConfig, CodeKind, Permutation};

fn msg(bits: Vec<u8>) -> BitBlock {
    BitBlock::new(bits, BitRole::Message).unwrap()
}

fn config(kind: CodeKind, n: usize, k: usize) -> CodeConfig {
    CodeConfig {
        kind,
        n_code_bits: n,
        n_msg_bits: k,
        interleave: false,
        interleaver_seed: 0,
    }
}

fn permutation(max_len: usize) -> impl Strategy<Value = Permutation> {
    (1..=max_len)
        .prop_flat_map(|n| Just((0..n).collect::<Vec<usize>>()).prop_shuffle())
        .prop_map(|m| Permutation::from_map(m).unwrap())
}

proptest! {
    #[test]
    fn permutation_inverse_roundtrips(p in permutation(64), seed in any::<u64>()) {
        let data: Vec<u64> = (0..p.len() as u64).map(|i| i.wrapping_mul(seed | 1)).collect();
        let there = p.apply_slice(&data).unwrap();
        prop_assert_eq!(p.inverse().apply_slice(&there).unwrap(), data);
        prop_assert_eq!(p.inverse().inverse(), p);
    }

    #[test]
    fn interleaver_keeps_systematic_prefix(k in 1usize..32, extra in 0usize..32, seed in any::<u64>()) {
        let p = make_interleaver(k + extra, k, seed).unwrap();
        prop_assert!(p.map()[..k].iter().enumerate().all(|(i, &v)| i == v));
        prop_assert!(Permutation::from_map(p.map().to_vec()).is_ok());
    }

    #[test]
    fn polar_is_linear_and_systematic(a in prop::collection::vec(0u8..2, 40), b in prop::collection::vec(0u8..2, 40)) {
        let enc = config(CodeKind::Polar, 128, 40).build().unwrap();
        let (ma, mb) = (msg(a.clone()), msg(b));
        let ca = enc.encode_systematic(&ma).unwrap();
        let cb = enc.encode_systematic(&mb).unwrap();
        let cab = enc.encode_systematic(&ma.xor(&mb).unwrap()).unwrap();
        prop_assert_eq!(&ca.bits()[..40], a.as_slice());
        prop_assert_eq!(ca.xor(&cb).unwrap(), cab);
    }

    #[test]
    fn ldpc_codewords_satisfy_parity(a in prop::collection::vec(0u8..2, 48)) {
        let enc = config(CodeKind::Ldpc { seed: 7 }, 96, 48).build().unwrap();
        let ldpc = enc.ldpc().unwrap();
        let c = enc.encode_systematic(&msg(a.clone())).unwrap();
        prop_assert_eq!(&c.bits()[..48], a.as_slice());
        prop_assert!(ldpc.syndrome(c.bits()).iter().all(|&s| s == 0));
    }

    #[test]
    fn repetition_repeats_message(a in prop::collection::vec(0u8..2, 1..20), gamma in 1usize..5) {
        let k = a.len();
        let enc = config(CodeKind::Repetition { gamma }, gamma * k, k).build().unwrap();
        let c = enc.encode_systematic(&msg(a.clone())).unwrap();
        for (i, bit) in c.bits().iter().enumerate() {
            prop_assert_eq!(*bit, a[i % k]);
        }
    }
}
