use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ccs_radar::scene::{
    apply_channel_ofdm, apply_channel_sc, decode_dump, encode_dump, synth_frame, Grid, PathGain, TargetScene,
    Waveform, FRAME_MAGIC,
};

const N: usize = 16;
const M: usize = 4;

fn frame(seed: u64, waveform: Waveform) -> ccs_radar::scene::Frame {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let blocks: Vec<Vec<Complex64>> = (0..M)
        .map(|_| (0..N).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect())
        .collect();
    synth_frame(&blocks, waveform).unwrap()
}

fn path() -> impl Strategy<Value = PathGain> {
    (0..8usize, 1..=M, -2.0f64..2.0).prop_map(|(r, d, g)| PathGain::new(r, d, g))
}

fn scene(targets: Vec<PathGain>, interference: Vec<PathGain>) -> TargetScene {
    TargetScene {
        targets,
        interference: vec![interference],
        noise_variance: 0.0,
        n_max: 8,
    }
}

fn close(a: &Grid, b: &Grid) -> bool {
    a.as_slice().iter().zip(b.as_slice()).all(|(x, y)| (x - y).norm() < 1e-9)
}

fn sum(a: &Grid, b: &Grid) -> Grid {
    let v = a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| x + y).collect();
    Grid::from_vec(a.rows(), a.cols(), v).unwrap()
}

proptest! {
    #[test]
    fn channels_are_linear_in_gains(
        t in prop::collection::vec(path(), 1..4),
        i in prop::collection::vec(path(), 0..3),
        k in -3.0f64..3.0,
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let sc = scene(t, i);
        for waveform in [Waveform::SingleCarrier, Waveform::Ofdm] {
            let (own, other) = (frame(seed, waveform), frame(seed ^ 1, waveform));
            let run = |s: &TargetScene, rng: &mut ChaCha8Rng| match waveform {
                Waveform::Ofdm => apply_channel_ofdm(
                    own.symbols.as_ref().unwrap(), &[other.symbols.as_ref().unwrap()], s, rng,
                ).unwrap(),
                _ => apply_channel_sc(&own, &[&other], s, rng).unwrap(),
            };
            let y = run(&sc, &mut rng);
            let scaled = run(&sc.scaled(k), &mut rng);
            let expect: Vec<Complex64> = y.as_slice().iter().map(|v| v * k).collect();
            prop_assert!(close(&scaled, &Grid::from_vec(N, M, expect).unwrap()));

            let (head, tail) = sc.targets.split_at(1);
            let a = run(&scene(head.to_vec(), sc.interference[0].clone()), &mut rng);
            let b = run(&scene(tail.to_vec(), Vec::new()), &mut rng);
            prop_assert!(close(&y, &sum(&a, &b)));
        }
    }

    #[test]
    fn dump_roundtrips(seed in any::<u64>()) {
        let g = frame(seed, Waveform::SingleCarrier).samples;
        let (magic, back) = decode_dump(&encode_dump(FRAME_MAGIC, &g).unwrap()).unwrap();
        prop_assert_eq!(magic, FRAME_MAGIC);
        prop_assert_eq!(back, g);
    }

    #[test]
    fn dump_decoder_rejects_garbage(bytes in prop::collection::vec(any::<u8>(), 0..128)) {
        if let Ok((_, g)) = decode_dump(&bytes) {
            prop_assert_eq!(bytes.len(), 16 + 16 * g.rows() * g.cols());
        }
    }
}

#[test]
fn single_target_sc_is_shifted_copy() {
    let own = frame(3, Waveform::SingleCarrier);
    let sc = TargetScene {
        targets: vec![PathGain::new(3, M, 0.5)],
        interference: Vec::new(),
        noise_variance: 0.0,
        n_max: 8,
    };
    let y = apply_channel_sc(&own, &[], &sc, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
    for m in 0..M {
        for n in 0..N {
            let expect = if n < 3 { Complex64::new(0.0, 0.0) } else { own.samples.get(n - 3, m) * 0.5 };
            assert!((y.get(n, m) - expect).norm() < 1e-12);
        }
    }
}
