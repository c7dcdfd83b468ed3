use proptest::prelude::*;
use setdiv::divergences::{beta_and_dhypo, dmax, dmin, petz, sandwiched, umegaki};
use setdiv::hermitian::{operator_from_json, operator_to_json, Encoding};
use setdiv::measured::dm;
use setdiv::random;
use setdiv::sets::{set_from_json, StateSet};
use setdiv::Hermitian;

fn state(d: usize, seed: u64) -> Hermitian {
    random::density(d, &mut random::rng(seed))
}

fn bits(v: setdiv::Value) -> f64 {
    v.to_f64()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn hex_round_trip_is_exact(d in 1usize..5, seed in any::<u64>()) {
        let h = random::hermitian(d, &mut random::rng(seed));
        let doc = operator_to_json(&h, Encoding::Hex).to_string();
        let back = operator_from_json(&doc).unwrap();
        prop_assert_eq!(back.matrix(), h.matrix());
    }

    #[test]
    fn umegaki_is_nonnegative_and_vanishes_on_the_diagonal(d in 2usize..4, s1 in any::<u64>(), s2 in any::<u64>()) {
        let (r, s) = (state(d, s1), state(d, s2));
        prop_assert!(bits(umegaki(&r, &s).unwrap().value) >= -1e-10);
        prop_assert!(bits(umegaki(&r, &r).unwrap().value).abs() < 1e-9);
    }

    #[test]
    fn umegaki_is_additive_on_products(s1 in any::<u64>(), s2 in any::<u64>(), s3 in any::<u64>(), s4 in any::<u64>()) {
        let (r1, r2, t1, t2) = (state(2, s1), state(2, s2), state(2, s3), state(2, s4));
        let joint = bits(umegaki(&r1.kron(&r2).unwrap(), &t1.kron(&t2).unwrap()).unwrap().value);
        let parts = bits(umegaki(&r1, &t1).unwrap().value) + bits(umegaki(&r2, &t2).unwrap().value);
        prop_assert!((joint - parts).abs() < 1e-8, "{} vs {}", joint, parts);
    }

    #[test]
    fn renyi_orderings(d in 2usize..4, s1 in any::<u64>(), s2 in any::<u64>(), a in 0.55f64..0.95, b in 1.05f64..2.5) {
        let (r, s) = (state(d, s1), state(d, s2));
        let d1 = bits(umegaki(&r, &s).unwrap().value);
        let pa = bits(petz(a, &r, &s).unwrap().value);
        let pb = bits(petz(b, &r, &s).unwrap().value);
        let sa = bits(sandwiched(a, &r, &s).unwrap().value);
        let sb = bits(sandwiched(b, &r, &s).unwrap().value);
        // monotone in α, sandwiched below Petz
        prop_assert!(pa <= d1 + 1e-9 && d1 <= pb + 1e-9);
        prop_assert!(sa <= pa + 1e-9 && sb <= pb + 1e-9);
        prop_assert!(bits(dmin(&r, &s).unwrap().value) <= sa + 1e-9);
        prop_assert!(sb <= bits(dmax(&r, &s).unwrap().value) + 1e-9);
    }

    #[test]
    fn measured_is_below_umegaki(d in 2usize..4, s1 in any::<u64>(), s2 in any::<u64>()) {
        let (r, s) = (state(d, s1), state(d, s2));
        let m = bits(dm(&r, &s).unwrap().value);
        prop_assert!(m >= -1e-9 && m <= bits(umegaki(&r, &s).unwrap().value) + 1e-7);
    }

    #[test]
    fn optimal_test_is_feasible(d in 2usize..4, s1 in any::<u64>(), s2 in any::<u64>(), eps in 0.01f64..0.99) {
        let (r, s) = (state(d, s1), state(d, s2));
        let h = beta_and_dhypo(eps, &r, &s).unwrap();
        prop_assert!(h.test.type1 <= eps + 1e-9);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&h.beta));
        prop_assert!((s.inner(&h.test.m) - h.beta).abs() < 1e-8);
    }

    #[test]
    fn oracle_witnesses_are_members(seed in any::<u64>(), which in 0usize..3) {
        let set = match which {
            0 => StateSet::incoherent(vec![3]).unwrap(),
            1 => StateSet::conditional(2, 2).unwrap(),
            _ => StateSet::hull(vec![state(3, seed ^ 1), state(3, seed ^ 2)]).unwrap(),
        };
        let x = random::hermitian(set.dim(), &mut random::rng(seed)).with_dims(set.dims().to_vec()).unwrap();
        let hi = set.max_linear(&x).unwrap();
        let lo = set.min_linear(&x).unwrap();
        prop_assert!(lo.value <= hi.value + 1e-9);
        prop_assert!(set.contains(&hi.witness, 1e-6).unwrap());
        prop_assert!((x.inner(&hi.witness) - hi.value).abs() < 1e-6);
    }

    #[test]
    fn set_parser_never_panics(text in "\\PC{0,200}") {
        let _ = set_from_json(&text);
        let _ = operator_from_json(&text);
    }

    #[test]
    fn set_parser_survives_near_miss_documents(dim in 0u64..6, kind in prop::sample::select(vec!["singleton", "hull", "incoherent", "rains", "mana", "conditional", "channel_image", "nope"])) {
        let doc = format!(r#"{{"kind": "{kind}", "dim": {dim}, "factors": [{dim}], "identity": [true], "transposed": [false], "d": 3, "qudits": 1}}"#);
        let _ = set_from_json(&doc);
    }
}
