use num_complex::Complex64;
use proptest::prelude::*;

use ccs_radar::correlation::{autocorr, crosscorr, idft_ratio, periodic_variant, pslr, Method};
use ccs_radar::modulation::{Constellation, ConstellationKind};

fn block(kind: ConstellationKind, max_len: usize) -> impl Strategy<Value = Vec<Complex64>> {
    let c = Constellation::new(kind);
    let q = c.bits_per_symbol();
    (1..=max_len).prop_flat_map(move |n| {
        let c = c.clone();
        prop::collection::vec(0u8..2, n * q).prop_map(move |bits| c.map_bits(&bits).unwrap())
    })
}

fn pair(max_len: usize) -> impl Strategy<Value = (Vec<Complex64>, Vec<Complex64>)> {
    (1..=max_len).prop_flat_map(|n| {
        let c = Constellation::new(ConstellationKind::Qam16);
        let sym = prop::sample::select(c.points().to_vec());
        (prop::collection::vec(sym.clone(), n), prop::collection::vec(sym, n))
    })
}

fn close(a: Complex64, b: Complex64) -> bool {
    (a - b).norm() < 1e-9
}

proptest! {
    #[test]
    fn fft_matches_direct((s1, s2) in pair(48)) {
        let n = s1.len() as isize;
        let pairs = [
            (crosscorr(&s1, &s2, Method::Fft).unwrap(), crosscorr(&s1, &s2, Method::Direct).unwrap()),
            (periodic_variant(&s1, &s2, Method::Fft).unwrap(), periodic_variant(&s1, &s2, Method::Direct).unwrap()),
            (idft_ratio(&s1, &s2, Method::Fft).unwrap(), idft_ratio(&s1, &s2, Method::Direct).unwrap()),
        ];
        for (fast, slow) in &pairs {
            for l in -n..n {
                prop_assert!(close(fast.at(l), slow.at(l)), "lag {l}");
            }
        }
    }

    #[test]
    fn autocorrelation_is_hermitian(s in block(ConstellationKind::Qam16, 64)) {
        let p = autocorr(&s, Method::Fft).unwrap();
        let n = s.len() as isize;
        for l in 0..n {
            prop_assert!(close(p.at(-l), p.at(l).conj()));
        }
        prop_assert_eq!(p.at(n), Complex64::new(0.0, 0.0));
        prop_assert_eq!(p.at(-n - 3), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn zero_lag_is_mean_energy(s in block(ConstellationKind::Qam256, 64)) {
        let p = autocorr(&s, Method::Fft).unwrap();
        let e = s.iter().map(|z| z.norm_sqr()).sum::<f64>() / s.len() as f64;
        prop_assert!(close(p.at(0), Complex64::new(e, 0.0)));
    }

    #[test]
    fn periodic_folds_aperiodic((s1, s2) in pair(40)) {
        let n = s1.len() as isize;
        let lin = crosscorr(&s1, &s2, Method::Fft).unwrap();
        let per = periodic_variant(&s1, &s2, Method::Fft).unwrap();
        for l in 0..n {
            prop_assert!(close(per.at(l), lin.at(l) + lin.at(l - n)));
        }
    }

    #[test]
    fn self_ratio_is_delta(s in block(ConstellationKind::Qam16, 64)) {
        let v = idft_ratio(&s, &s, Method::Fft).unwrap();
        prop_assert!(close(v.at(0), Complex64::new(1.0, 0.0)));
        for l in 1..s.len() as isize {
            prop_assert!(v.at(l).norm() < 1e-12);
        }
    }

    #[test]
    fn sidelobes_never_exceed_mainlobe_for_psk(s in block(ConstellationKind::Qpsk, 64)) {
        let p = autocorr(&s, Method::Fft).unwrap();
        prop_assert!(pslr(&p).unwrap().value() >= -1e-9);
    }
}
