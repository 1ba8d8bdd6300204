use num_complex::Complex64;
use proptest::prelude::*;

use qzeros::numlin::ZeroSet;
use qzeros::polyform::{aw_eval, aw_rational_eval, racah_eval, NestedSeries};
use qzeros::qkernel::{qpochhammer, qpochhammer_multi, qpow};
use qzeros::{awspec, racahspec, AWParams, RacahParams};

fn complex(lo: f64, hi: f64) -> impl Strategy<Value = Complex64> {
    (lo..hi, 0.0..std::f64::consts::TAU).prop_map(|(r, t)| Complex64::from_polar(r, t))
}

fn q_strategy() -> impl Strategy<Value = Complex64> {
    prop_oneof![(0.3..0.85f64).prop_map(|q| Complex64::new(q, 0.0)), complex(0.35, 0.8),]
}

fn aw_strategy(max_n: usize) -> impl Strategy<Value = AWParams> {
    (complex(0.3, 2.5), complex(0.3, 2.5), complex(0.3, 2.5), complex(0.3, 2.5), q_strategy(), 1..=max_n)
        .prop_filter_map("inadmissible", |(a, b, c, d, q, n)| AWParams::new(a, b, c, d, q, n).ok())
}

fn racah_strategy(max_n: usize) -> impl Strategy<Value = RacahParams> {
    (complex(0.3, 2.5), complex(0.3, 2.5), complex(0.3, 2.5), complex(0.3, 2.5), q_strategy(), 1..=max_n)
        .prop_filter_map("inadmissible", |(a, b, g, d, q, n)| RacahParams::new(a, b, g, d, q, n).ok())
}

fn close(a: Complex64, b: Complex64, rel: f64) -> bool {
    (a - b).norm() <= rel * a.norm().max(b.norm()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pochhammer_step(c in complex(0.1, 3.0), q in q_strategy(), n in 0usize..12) {
        let next = qpochhammer(c, q, n + 1);
        let step = qpochhammer(c, q, n) * (1.0 - c * qpow(q, n as i64));
        prop_assert!(close(next, step, 1e-12));
    }

    #[test]
    fn multi_pochhammer_is_product(a in complex(0.1, 3.0), b in complex(0.1, 3.0), q in q_strategy(), n in 0usize..10) {
        let joint = qpochhammer_multi(&[a, b], q, n);
        prop_assert!(close(joint, qpochhammer(a, q, n) * qpochhammer(b, q, n), 1e-12));
    }

    #[test]
    fn powers_add(q in q_strategy(), j in -8i64..8, k in -8i64..8) {
        prop_assert!(close(qpow(q, j + k), qpow(q, j) * qpow(q, k), 1e-12));
    }

    #[test]
    fn aw_symmetric_in_parameters(p in aw_strategy(6), x in complex(0.1, 1.5)) {
        let swapped = AWParams { a: p.b, b: p.d, c: p.a, d: p.c, ..p };
        prop_assume!(swapped.validate().is_ok());
        let (v1, _) = aw_eval(&p, x);
        let (v2, _) = aw_eval(&swapped, x);
        let scale = NestedSeries::askey_wilson(&p).term_magnitude(x);
        prop_assert!((v1 - v2).norm() <= 1e-9 * scale.max(v1.norm()), "{v1} vs {v2}");
    }

    #[test]
    fn rational_form_invariant_under_inversion(p in aw_strategy(6), z in complex(0.5, 2.0)) {
        let v1 = aw_rational_eval(&p, z).unwrap();
        let v2 = aw_rational_eval(&p, z.inv()).unwrap();
        prop_assert!(close(v1, v2, 1e-10));
    }

    #[test]
    fn aw_derivative_matches_difference(p in aw_strategy(6), x in complex(0.1, 1.5)) {
        let h = 1e-6;
        let (_, d) = aw_eval(&p, x);
        let fd = (aw_eval(&p, x + h).0 - aw_eval(&p, x - h).0) / (2.0 * h);
        let scale = NestedSeries::askey_wilson(&p).term_magnitude(x);
        prop_assert!((d - fd).norm() <= 1e-5 * scale.max(d.norm()), "{d} vs {fd}");
    }

    #[test]
    fn racah_derivative_matches_difference(p in racah_strategy(6), z in complex(0.1, 3.0)) {
        let h = 1e-6;
        let (_, d) = racah_eval(&p, z);
        let fd = (racah_eval(&p, z + h).0 - racah_eval(&p, z - h).0) / (2.0 * h);
        let scale = NestedSeries::q_racah(&p).term_magnitude(z);
        prop_assert!((d - fd).norm() <= 1e-5 * scale.max(d.norm()), "{d} vs {fd}");
    }

    #[test]
    fn evaluation_agrees_with_series(p in racah_strategy(5), z in complex(0.1, 3.0)) {
        let (v, _) = racah_eval(&p, z);
        let series = NestedSeries::q_racah(&p);
        let (s, _) = series.eval(z);
        prop_assert!((v - s).norm() <= 1e-9 * series.term_magnitude(z).max(1.0), "{v} vs {s}");
    }

    #[test]
    fn aw_matrix_has_closed_form_spectrum(p in aw_strategy(5)) {
        let built = ZeroSet::askey_wilson(&p).and_then(|zs| awspec::build_matrix_m(&p, &zs));
        // random draws can land on near-coincident zeros or a guard; those are reported, not wrong
        prop_assume!(built.is_ok());
        let m = built.unwrap().spectrum_match().unwrap();
        prop_assert!(m.max_rel_gap < 1e-6, "gap {}", m.max_rel_gap);
    }

    #[test]
    fn racah_matrix_has_closed_form_spectrum(p in racah_strategy(5)) {
        let built = ZeroSet::q_racah(&p).and_then(|zs| racahspec::build_matrix_l(&p, &zs));
        prop_assume!(built.is_ok());
        let m = built.unwrap().spectrum_match().unwrap();
        prop_assert!(m.max_rel_gap < 1e-6, "gap {}", m.max_rel_gap);
    }
}
