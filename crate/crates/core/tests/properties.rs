use gauge_dnls::envelope::{build_envelope, shell_norms};
use gauge_dnls::initial_data::InitialData;
use gauge_dnls::littlewood_paley::max_shell;
use gauge_dnls::spectral::{l2_norm, make_grid, spectral_l2_norm, xs_norm, Grid};
use num_complex::Complex64;
use proptest::prelude::*;

fn grid() -> Grid {
    make_grid(256, 40.0, -20.0).unwrap()
}

fn random(seed: u64, decay: f64, width: f64) -> gauge_dnls::Field {
    InitialData::Random {
        seed,
        decay,
        norm: 1.0,
        window_width: width,
    }
    .build(&grid())
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn parseval_holds(seed in any::<u64>(), decay in 0.0f64..4.0, width in 0.5f64..5.0) {
        let f = random(seed, decay, width);
        prop_assert!((l2_norm(&f) - spectral_l2_norm(&f)).abs() <= 1e-13 * l2_norm(&f));
    }

    #[test]
    fn xs_norm_is_absolutely_homogeneous(seed in any::<u64>(), re in -3.0f64..3.0, im in -3.0f64..3.0, s in 0.5f64..3.0) {
        let f = random(seed, 2.0, 2.0);
        let alpha = Complex64::new(re, im);
        let lhs = xs_norm(&f.scale(alpha), s).value;
        let rhs = alpha.norm() * xs_norm(&f, s).value;
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs));
    }

    #[test]
    fn xs_norm_obeys_triangle_inequality(a in any::<u64>(), b in any::<u64>(), s in 0.5f64..3.0) {
        let f = random(a, 2.0, 2.0);
        let g = random(b, 1.5, 3.0);
        let sum = xs_norm(&f.add(&g).unwrap(), s).value;
        prop_assert!(sum <= (xs_norm(&f, s).value + xs_norm(&g, s).value) * (1.0 + 1e-12));
    }

    // every c_k is attained by some shell: any slowly varying majorant is at least c
    #[test]
    fn envelope_is_minimal(seed in any::<u64>(), decay in 0.5f64..3.0, delta in 0.001f64..0.0099) {
        let f = random(seed, decay, 2.0);
        let s = 1.0;
        let r = gauge_dnls::spectral::sobolev_norm(&f, s);
        let env = build_envelope(&f, s, delta, r).unwrap();
        let a = shell_norms(&f, s, max_shell(f.grid()));
        for (k, &ck) in env.c.iter().enumerate() {
            let witnessed = a.iter().enumerate().any(|(j, &aj)| {
                let candidate = 2f64.powf(-delta * (j as f64 - k as f64).abs()) * aj / r;
                (candidate - ck).abs() <= 1e-15 * ck.max(f64::MIN_POSITIVE)
            });
            prop_assert!(witnessed, "shell {} has no witness", k);
        }
    }

    // P_k(f(2 .)) = (P_{k-1} f)(2 .) for the dyadic shells k >= 2
    #[test]
    fn dilation_shifts_shells(width in 1.0f64..3.0) {
        // a long box keeps the frequency lattice fine against the low-shell cutoffs
        let g = make_grid(4096, 320.0, -160.0).unwrap();
        let wide = InitialData::gaussian(1.0, width, 0.0).build(&g).unwrap();
        let narrow = InitialData::gaussian(1.0, width / 2.0, 0.0).build(&g).unwrap();
        let k_max = max_shell(&g);
        let a = shell_norms(&wide, 0.0, k_max);
        let b = shell_norms(&narrow, 0.0, k_max);
        let top = a.iter().cloned().fold(0.0, f64::max);
        for k in 2..=k_max as usize {
            let expected = a[k - 1] / 2f64.sqrt();
            prop_assert!((b[k] - expected).abs() <= 1e-10 * top, "shell {}: {} vs {}", k, b[k], expected);
        }
    }
}
