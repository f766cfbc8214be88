use num_complex::Complex64;
use proptest::prelude::*;

use qfp_core::circuit::{
    best_nn_cx_count, build_aikps, build_deep, build_shallow, decompose_multi_controlled,
    nn_cx_count, transpile_ry_to_rz, Circuit, Gate, Layout,
};
use qfp_core::coeffgen::{aikps_set, subset_sum_set, CoefficientSet, ParamVector};
use qfp_core::sim::{accept_probability_pure, run_pure};
use qfp_core::spectral::acceptance_probability;
use qfp_core::zp::{primes_in_range, Prime};

fn prime(v: u64) -> Prime {
    Prime::new(v).unwrap()
}

fn overlap(a: &Circuit, b: &Circuit) -> f64 {
    let (sa, sb) = (run_pure(a).unwrap(), run_pure(b).unwrap());
    let ip: Complex64 = sa
        .amplitudes()
        .unwrap()
        .iter()
        .zip(sb.amplitudes().unwrap())
        .map(|(u, v)| u.conj() * v)
        .sum();
    ip.norm_sqr()
}

fn max_amp_diff(a: &Circuit, b: &Circuit) -> f64 {
    let (sa, sb) = (run_pure(a).unwrap(), run_pure(b).unwrap());
    sa.amplitudes()
        .unwrap()
        .iter()
        .zip(sb.amplitudes().unwrap())
        .map(|(u, v)| (u - v).norm())
        .fold(0.0, f64::max)
}

fn layering_is_valid(c: &Circuit) -> bool {
    c.layers().iter().all(|layer| {
        let mut seen = vec![false; c.num_qubits()];
        layer
            .iter()
            .flat_map(Gate::qubits)
            .all(|q| !std::mem::replace(&mut seen[q], true))
    })
}

fn small_params() -> impl Strategy<Value = (ParamVector, u64)> {
    let primes: Vec<u64> = primes_in_range(2.5, 257.5)
        .iter()
        .map(|p| p.get())
        .collect();
    (prop::sample::select(primes), 1usize..=6).prop_flat_map(|(p, m)| {
        (prop::collection::vec(0..p, m + 1), 0..3 * p)
            .prop_map(move |(coords, x)| (ParamVector::from_coords(prime(p), &coords).unwrap(), x))
    })
}

fn random_gate(n: usize) -> impl Strategy<Value = Gate> {
    let angle = -7.0f64..7.0;
    let pair = (0..n, 0..n - 1).prop_map(|(a, b)| (a, if b >= a { b + 1 } else { b }));
    prop_oneof![
        (0..n).prop_map(Gate::H),
        (0..n, angle.clone()).prop_map(|(target, angle)| Gate::Ry { target, angle }),
        (pair.clone(), angle, any::<bool>()).prop_map(|((control, target), angle, polarity)| {
            Gate::Cry {
                control,
                target,
                angle,
                polarity,
            }
        }),
        pair.prop_map(|(control, target)| Gate::Cx { control, target }),
    ]
}

fn random_circuit() -> impl Strategy<Value = Circuit> {
    (2usize..=6).prop_flat_map(|n| {
        prop::collection::vec(random_gate(n), 0..40)
            .prop_map(move |gates| Circuit::from_gates(n, gates).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn transpiled_circuits_keep_their_state(c in random_circuit()) {
        let t = transpile_ry_to_rz(&c).unwrap();
        prop_assert!(t.gates().all(|g| matches!(g.kind(), "H" | "RZ" | "PHASE" | "CX")));
        prop_assert!(overlap(&c, &t) >= 1.0 - 1e-9);
    }

    #[test]
    fn text_format_round_trips(c in random_circuit()) {
        prop_assert_eq!(Circuit::from_text(&c.to_text()).unwrap(), c);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn shallow_equals_deep_on_subset_sums((pv, x) in small_params()) {
        let shallow = build_shallow(&pv, x);
        let deep = build_deep(&subset_sum_set(&pv).unwrap(), x);
        prop_assert!(layering_is_valid(&shallow) && layering_is_valid(&deep));
        prop_assert_eq!(shallow.depth(), pv.m() + 2);
        prop_assert!(max_amp_diff(&shallow, &deep) < 1e-9);
    }

    #[test]
    fn decomposition_preserves_deep_circuits((pv, x) in small_params()) {
        let deep = build_deep(&subset_sum_set(&pv).unwrap(), x);
        let flat = decompose_multi_controlled(&deep).unwrap();
        prop_assert!(!flat.has_multi_controlled());
        prop_assert!(max_amp_diff(&deep, &flat) < 1e-9);
    }
}

#[test]
fn deep_smallest_instance() {
    let k = CoefficientSet::explicit(prime(17), vec![3, 5]).unwrap();
    let c = build_deep(&k, 1);
    assert_eq!(c.depth(), 3);
    assert_eq!(c.num_qubits(), 2);
    assert!(matches!(c.layers()[0][..], [Gate::H(0)]));
    match (&c.layers()[1][0], &c.layers()[2][0]) {
        (Gate::Mcry { pattern: a, .. }, Gate::Mcry { pattern: b, .. }) => {
            assert_eq!(a, &vec![true]);
            assert_eq!(b, &vec![false]);
        }
        other => panic!("unexpected layers {other:?}"),
    }
}

#[test]
fn deep_metrics() {
    for m in 1..=6 {
        let k = CoefficientSet::explicit(prime(257), (1..=1u64 << m).collect()).unwrap();
        let metrics = build_deep(&k, 2).metrics();
        assert_eq!(metrics.depth, (1 << m) + 1);
        assert_eq!(metrics.width, m + 1);
        assert_eq!(metrics.rotation_depth, 1 << m);
        assert_eq!(metrics.count("MCRY"), 1 << m);
    }
}

#[test]
fn shallow_depth_for_all_small_m() {
    for m in 1..=10u64 {
        let pv = ParamVector::new(prime(1013), 2, (1..=m).collect()).unwrap();
        let metrics = build_shallow(&pv, 4).metrics();
        assert_eq!(metrics.depth as u64, m + 2);
        assert_eq!(metrics.width as u64, m + 1);
        assert_eq!(metrics.count("CRY") as u64, m);
    }
}

#[test]
fn shallow_zero_word_has_zero_angles() {
    let pv = ParamVector::new(prime(17), 6, vec![4, 8, 12]).unwrap();
    let c = build_shallow(&pv, 0);
    assert!(c.gates().filter_map(Gate::angle).all(|a| a == 0.0));
    let s = run_pure(&c).unwrap();
    let amps = s.amplitudes().unwrap();
    for (i, a) in amps.iter().enumerate() {
        let want = if i < 8 { 1.0 / 8f64.sqrt() } else { 0.0 };
        assert!((a.re - want).abs() < 1e-12 && a.im.abs() < 1e-12);
    }
}

#[test]
fn shallow_routing_costs() {
    let pv = ParamVector::new(prime(17), 6, vec![4]).unwrap();
    let c = build_shallow(&pv, 1);
    let r = nn_cx_count(&c, &Layout::identity(2)).unwrap();
    assert_eq!(r.cx, 2);
    let pv = ParamVector::new(prime(17), 6, vec![4, 8, 12]).unwrap();
    let (_, best) = best_nn_cx_count(&build_shallow(&pv, 1)).unwrap();
    assert!(best.cx <= 12);
    assert!(nn_cx_count(&build_shallow(&pv, 1), &Layout::identity(3)).is_err());
}

#[test]
fn deep_routing_grows_with_size() {
    let mut last = 0;
    for m in 2..=6 {
        let k = CoefficientSet::explicit(prime(1013), (1..=1u64 << m).collect()).unwrap();
        let (_, r) = best_nn_cx_count(&build_deep(&k, 1)).unwrap();
        assert!(r.cx >= 1 << m, "m={m}: {} CX", r.cx);
        assert!(r.cx > last);
        last = r.cx;
    }
}

#[test]
fn aikps_small_instance_realizes_its_coefficients() {
    let p = prime(17);
    let target = aikps_set(p, 0.1).unwrap();
    for x in 0..17 {
        let c = build_aikps(p, 0.1, x).unwrap();
        let realized = CoefficientSet::explicit(p, c.meta.coefficients.clone().unwrap()).unwrap();
        let sim = accept_probability_pure(&c).unwrap();
        assert!((sim - acceptance_probability(&realized, x)).abs() < 1e-9);
    }
    let c = build_aikps(p, 0.1, 1).unwrap();
    let realized = c.meta.coefficients.unwrap();
    // binary weights cover s = 1..=2^w, the set uses s = 1..=S
    let common = target.coeffs().len().min(realized.len());
    assert_eq!(&realized[..common], &target.coeffs()[..common]);
}

#[test]
fn aikps_multi_block_simulation() {
    let p = prime(1013);
    let c = build_aikps(p, 0.5, 7).unwrap();
    assert_eq!(c.num_qubits(), 11);
    let realized = CoefficientSet::explicit(p, c.meta.coefficients.clone().unwrap()).unwrap();
    let sim = accept_probability_pure(&c).unwrap();
    assert!((sim - acceptance_probability(&realized, 7)).abs() < 1e-9);
    let flat = decompose_multi_controlled(&c).unwrap();
    assert!(overlap(&c, &flat) > 1.0 - 1e-9);
}
