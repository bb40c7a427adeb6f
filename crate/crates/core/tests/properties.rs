use incidence::equimap::apply_relaxed;
use incidence::io::{format_signature, parse_signature, tensor_from_str, tensor_to_string};
use incidence::oracle::{
    enumerate_orbits_unchecked, orbit_weights_to_term_weights, term_weights_to_orbit_weights,
};
use incidence::{
    apply_map, apply_term, decompose, enumerate_terms, permute_tensor, reassemble, Aggregator,
    ConstraintSet, Dim, EquivariantMap, FaceSpace, FaceVector, IncidenceTensor, OrbitSignature,
    Permutation, Position, TensorLayer, TensorSignature,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn signature_strategy() -> impl Strategy<Value = TensorSignature> {
    let dim = (1usize..=2, any::<bool>()).prop_map(|(k, undirected)| Dim::new(k, !undirected));
    (
        prop::collection::vec(dim, 1..=3),
        any::<bool>(),
        any::<u64>(),
    )
        .prop_filter_map("constraint must be satisfiable", |(dims, tie, seed)| {
            let mut groups = Vec::new();
            if tie && dims.len() > 1 {
                let mut r = rng(seed);
                let a = r.random_range(0..dims.len());
                let b = (a + r.random_range(1..dims.len())) % dims.len();
                groups.push(vec![
                    Position::new(a, r.random_range(0..dims[a].face_size)),
                    Position::new(b, r.random_range(0..dims[b].face_size)),
                ]);
            }
            TensorSignature::new(dims, ConstraintSet::new(groups).ok()?).ok()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn map_commutes_with_node_permutations(
        m in 1usize..=3, m2 in 1usize..=3, extra in 0usize..=2, seed in any::<u64>()
    ) {
        let n = m.max(m2) + extra;
        let mut r = rng(seed);
        let map = EquivariantMap::random_integers(
            OrbitSignature::new(vec![(m, 1)], 2).unwrap(),
            OrbitSignature::new(vec![(m2, 1)], 1).unwrap(),
            -5, 5, &mut r,
        );
        let x = FaceVector::random_integers(FaceSpace::new(n, m, true), 2, -9, 9, &mut r);
        let p = Permutation::random(n, &mut r);
        let lhs = apply_map(&map, &[x.permute(&p).unwrap()]).unwrap().remove(0);
        let rhs = apply_map(&map, &[x]).unwrap().remove(0).permute(&p).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn terms_are_linear(m in 1usize..=3, m2 in 0usize..=3, a in -4i32..=4, seed in any::<u64>()) {
        let n = 4;
        let mut r = rng(seed);
        let space = FaceSpace::new(n, m, true);
        let x = FaceVector::random_integers(space, 1, -9, 9, &mut r);
        let y = FaceVector::random_integers(space, 1, -9, 9, &mut r);
        let combo: Vec<f64> = x.values().iter().zip(y.values())
            .map(|(u, v)| f64::from(a) * u + v).collect();
        let combo = FaceVector::from_values(space, 1, combo).unwrap();
        for t in enumerate_terms(m, m2) {
            let fx = apply_term(&t, &x, Aggregator::Sum).unwrap();
            let fy = apply_term(&t, &y, Aggregator::Sum).unwrap();
            let fc = apply_term(&t, &combo, Aggregator::Sum).unwrap();
            for (k, v) in fc.values().iter().enumerate() {
                prop_assert_eq!(*v, f64::from(a) * fx.values()[k] + fy.values()[k]);
            }
        }
    }

    #[test]
    fn decomposition_round_trips(sig in signature_strategy(), n in 3usize..=4, seed in any::<u64>()) {
        let t = IncidenceTensor::random_integers(n, sig, 2, -9, 9, &mut rng(seed));
        prop_assert_eq!(reassemble(&decompose(&t).unwrap()).unwrap(), t);
    }

    #[test]
    fn decomposition_commutes_with_permutations(
        sig in signature_strategy(), n in 3usize..=4, seed in any::<u64>()
    ) {
        let mut r = rng(seed);
        let t = IncidenceTensor::random_integers(n, sig, 1, -9, 9, &mut r);
        let p = Permutation::random(n, &mut r);
        let direct = decompose(&permute_tensor(&t, &p).unwrap()).unwrap().vectors();
        let via = decompose(&t).unwrap().vectors();
        prop_assert_eq!(direct.len(), via.len());
        for (a, b) in direct.iter().zip(&via) {
            prop_assert_eq!(a, &b.permute(&p).unwrap());
        }
    }

    #[test]
    fn layer_on_constrained_tensors_is_equivariant(
        sig in signature_strategy(), n in 3usize..=4, seed in any::<u64>()
    ) {
        let mut r = rng(seed);
        let mut layer = TensorLayer::zeros(sig.clone(), sig.clone(), 1, 1).unwrap();
        layer.map = EquivariantMap::random_integers(
            layer.map.input().clone(), layer.map.output().clone(), -3, 3, &mut r,
        );
        let t = IncidenceTensor::random_integers(n, sig, 1, -9, 9, &mut r);
        let p = Permutation::random(n, &mut r);
        let lhs = layer.apply(&permute_tensor(&t, &p).unwrap()).unwrap();
        let rhs = permute_tensor(&layer.apply(&t).unwrap(), &p).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-9);
    }

    #[test]
    fn orbit_and_term_weights_invert(m in 1usize..=3, m2 in 1usize..=3, seed in any::<u64>()) {
        let terms = enumerate_terms(m, m2);
        let mut r = rng(seed);
        let w: Vec<i64> = (0..terms.len()).map(|_| r.random_range(-9..=9)).collect();
        let o = term_weights_to_orbit_weights(&terms, &w);
        prop_assert_eq!(orbit_weights_to_term_weights(&terms, &o), w);
        prop_assert_eq!(enumerate_orbits_unchecked(m, m2, m + m2).len(), terms.len());
    }

    #[test]
    fn relaxed_layer_commutes_with_axis_swap(n in 2usize..=5, seed in any::<u64>()) {
        // node x node tensor; swapping axes swaps bits 0 and 1 of the subset index
        let mut r = rng(seed);
        let sig = TensorSignature::nodes(2).unwrap();
        let t = IncidenceTensor::random_integers(n, sig.clone(), 1, -9, 9, &mut r);
        let w: Vec<f64> = (0..4).map(|_| f64::from(r.random_range(-4..=4))).collect();
        let swapped_w = vec![w[0], w[2], w[1], w[3]];
        let transpose = |x: &IncidenceTensor| {
            let mut v = vec![0.0; n * n];
            for i in 0..n {
                for j in 0..n {
                    v[j * n + i] = x.get(i * n + j, 0);
                }
            }
            IncidenceTensor::new(n, x.signature().clone(), 1, v).unwrap()
        };
        let lhs = apply_relaxed(&transpose(&t), &swapped_w, 1, Aggregator::Sum).unwrap();
        let rhs = transpose(&apply_relaxed(&t, &w, 1, Aggregator::Sum).unwrap());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn relaxed_layer_commutes_with_node_permutations(n in 2usize..=4, seed in any::<u64>()) {
        let mut r = rng(seed);
        let sig = TensorSignature::new(vec![Dim::node(), Dim::new(2, true)], ConstraintSet::empty()).unwrap();
        let t = IncidenceTensor::random_integers(n, sig, 1, -9, 9, &mut r);
        let w: Vec<f64> = (0..4).map(|_| f64::from(r.random_range(-4..=4))).collect();
        let p = Permutation::random(n, &mut r);
        let lhs = apply_relaxed(&permute_tensor(&t, &p).unwrap(), &w, 1, Aggregator::Sum).unwrap();
        let rhs = permute_tensor(&apply_relaxed(&t, &w, 1, Aggregator::Sum).unwrap(), &p).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn signatures_and_tensors_survive_text(sig in signature_strategy(), seed in any::<u64>()) {
        let text = format_signature(&sig);
        prop_assert_eq!(parse_signature(&text).unwrap(), sig.clone());
        let t = IncidenceTensor::random_integers(3, sig, 2, -9, 9, &mut rng(seed));
        prop_assert_eq!(tensor_from_str(&tensor_to_string(&t)).unwrap(), t);
    }
}
