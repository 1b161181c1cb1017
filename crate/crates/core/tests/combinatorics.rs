use std::cmp::Ordering;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use springer_core::partitions::{
    centraliser_dimension, induced_partition_oracle, mu_sigma, springer_fibre_dimension,
    Composition, LeviDatum, Partition,
};
use springer_core::tableaux::{
    compare, enumerate_standard, nested_from_tableau, random_standard, restrict_tableau, stack,
    tableau_from_nested, NestedPartitionSequence, StandardTableau,
};

fn partition(max_part: usize, max_len: usize) -> impl Strategy<Value = Partition> {
    prop::collection::vec(1..=max_part, 1..=max_len).prop_map(Partition::from_unsorted)
}

fn levi_datum(max_weight: usize, max_blocks: usize) -> impl Strategy<Value = LeviDatum> {
    prop::collection::vec(partition(4, 4), 1..=max_blocks)
        .prop_filter("weight bound", move |b| {
            b.iter().map(Partition::weight).sum::<usize>() <= max_weight
        })
        .prop_map(|b| LeviDatum::from_blocks(b).unwrap())
}

fn random_tuple(d: &LeviDatum, seed: u64) -> Vec<StandardTableau> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    d.blocks()
        .iter()
        .map(|mu| random_standard(mu, &mut rng))
        .collect()
}

/// T^Σ through nested shapes: after the first `offset_k + m` entries the shape
/// is the induced partition of `μ_1, …, μ_{k-1}` and the shape of `σ_k` cut at `m`.
fn stack_via_shapes(d: &LeviDatum, tuple: &[StandardTableau]) -> StandardTableau {
    let mut shapes = vec![Partition::empty()];
    for (k, sigma) in tuple.iter().enumerate() {
        for m in 1..=sigma.weight() {
            let mut blocks: Vec<Partition> = d.blocks()[..k].to_vec();
            blocks.push(restrict_tableau(sigma, m).unwrap().shape().clone());
            shapes.push(mu_sigma(&LeviDatum::from_blocks(blocks).unwrap()));
        }
    }
    tableau_from_nested(&NestedPartitionSequence::new(shapes).unwrap())
}

fn hook_length_count(shape: &Partition) -> u128 {
    let n = shape.weight() as u128;
    let conj = shape.transpose();
    let mut hooks = 1u128;
    for (i, &row) in shape.parts().iter().enumerate() {
        for j in 0..row {
            hooks *= (row - j + conj.part(j) - i - 1) as u128;
        }
    }
    (1..=n).product::<u128>() / hooks
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn stack_output_is_standard(d in levi_datum(30, 8), seed in any::<u64>()) {
        let tuple = random_tuple(&d, seed);
        let out = stack(&d, &tuple).unwrap();
        let revalidated = StandardTableau::new(out.rows().to_vec());
        prop_assert!(revalidated.is_ok(), "{:?}", revalidated);
        prop_assert_eq!(out.shape(), &mu_sigma(&d));
    }

    #[test]
    fn stack_matches_nested_shape_oracle(d in levi_datum(20, 6), seed in any::<u64>()) {
        let tuple = random_tuple(&d, seed);
        prop_assert_eq!(stack(&d, &tuple).unwrap(), stack_via_shapes(&d, &tuple));
    }

    #[test]
    fn stack_prefixes_are_stacks(d in levi_datum(20, 6), seed in any::<u64>()) {
        let tuple = random_tuple(&d, seed);
        let full = stack(&d, &tuple).unwrap();
        for k in 1..=d.num_blocks() {
            let prefix = d.sub_datum(0..k);
            let cut = restrict_tableau(&full, prefix.weight()).unwrap();
            prop_assert_eq!(cut, stack(&prefix, &tuple[..k]).unwrap());
        }
    }

    #[test]
    fn stack_is_associative(d in levi_datum(20, 6), seed in any::<u64>(), cut in 1usize..6) {
        prop_assume!(d.num_blocks() >= 2);
        let cut = cut.min(d.num_blocks() - 1);
        let tuple = random_tuple(&d, seed);
        let n = d.num_blocks();
        let left = d.sub_datum(0..cut);
        let right = d.sub_datum(cut..n);
        let l = stack(&left, &tuple[..cut]).unwrap();
        let r = stack(&right, &tuple[cut..]).unwrap();
        let outer = LeviDatum::from_blocks(vec![l.shape().clone(), r.shape().clone()]).unwrap();
        prop_assert_eq!(stack(&outer, &[l, r]).unwrap(), stack(&d, &tuple).unwrap());
    }

    #[test]
    fn mu_sigma_matches_oracle(d in levi_datum(40, 10)) {
        prop_assert_eq!(mu_sigma(&d), induced_partition_oracle(&d));
    }

    #[test]
    fn codimension_is_preserved(d in levi_datum(40, 10)) {
        let levi: usize = d.blocks().iter().map(centraliser_dimension).sum();
        prop_assert_eq!(levi, centraliser_dimension(&mu_sigma(&d)));
    }

    #[test]
    fn transpose_is_involution(lambda in partition(12, 12)) {
        prop_assert_eq!(lambda.transpose().transpose(), lambda.clone());
        prop_assert_eq!(lambda.transpose().weight(), lambda.weight());
    }

    #[test]
    fn nested_sequence_roundtrip(lambda in partition(5, 5), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sigma = random_standard(&lambda, &mut rng);
        prop_assert_eq!(tableau_from_nested(&nested_from_tableau(&sigma)), sigma);
    }

    #[test]
    fn random_tableaux_are_standard(lambda in partition(8, 8), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sigma = random_standard(&lambda, &mut rng);
        prop_assert!(StandardTableau::new(sigma.rows().to_vec()).is_ok());
        prop_assert_eq!(sigma.shape(), &lambda);
    }
}

#[test]
fn enumeration_counts_match_hook_lengths() {
    for n in 1..=8 {
        for shape in Partition::all(n) {
            let all = enumerate_standard(&shape).unwrap();
            assert_eq!(all.len() as u128, hook_length_count(&shape), "{shape}");
            for w in all.windows(2) {
                assert_eq!(compare(&w[0], &w[1]).unwrap(), Ordering::Less);
            }
        }
    }
}

#[test]
fn compare_is_a_total_order() {
    for n in 1..=6 {
        for shape in Partition::all(n) {
            let all = enumerate_standard(&shape).unwrap();
            for a in &all {
                for b in &all {
                    let ab = compare(a, b).unwrap();
                    assert_eq!(ab, compare(b, a).unwrap().reverse());
                    assert_eq!(ab == Ordering::Equal, a == b);
                    for c in &all {
                        if ab == Ordering::Less && compare(b, c).unwrap() == Ordering::Less {
                            assert_eq!(compare(a, c).unwrap(), Ordering::Less);
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn induced_partition_exhaustive() {
    for n in 1..=10 {
        for d in LeviDatum::all(n) {
            assert_eq!(mu_sigma(&d), induced_partition_oracle(&d), "{d}");
            let levi: usize = d.blocks().iter().map(centraliser_dimension).sum();
            assert_eq!(levi, centraliser_dimension(&mu_sigma(&d)), "{d}");
        }
    }
}

#[test]
fn dimension_identity_exhaustive() {
    for n in 1..=12 {
        for lambda in Partition::all(n) {
            assert_eq!(
                2 * springer_fibre_dimension(&lambda) + n * n,
                n * (n - 1) + centraliser_dimension(&lambda),
                "{lambda}"
            );
        }
    }
}

#[test]
fn transitivity_through_two_stages() {
    for n in 1..=8 {
        for d in LeviDatum::all(n) {
            for cut in 1..d.num_blocks() {
                let left = mu_sigma(&d.sub_datum(0..cut));
                let right = mu_sigma(&d.sub_datum(cut..d.num_blocks()));
                let staged = mu_sigma(&LeviDatum::from_blocks(vec![left, right]).unwrap());
                assert_eq!(staged, mu_sigma(&d), "{d} cut at {cut}");
            }
        }
    }
}

#[test]
fn levi_datum_shape_is_checked() {
    let shape = Composition::parse("3,2").unwrap();
    let blocks = vec![
        Partition::parse("2,1").unwrap(),
        Partition::parse("1").unwrap(),
    ];
    assert!(LeviDatum::new(shape, blocks).is_err());
}
