mod common;

use common::oracle::free_reduce;
use common::{random_automorphism, rng, word};
use freefold::words::{abelian_partial_basis, are_conjugate, AbelianVector, CyclicWord, Word};
use proptest::prelude::*;
use rand::Rng;

fn letters(rank: i32, max_len: usize) -> impl Strategy<Value = Vec<i32>> {
    prop::collection::vec((1..=rank, any::<bool>()).prop_map(|(g, s)| if s { g } else { -g }), 0..max_len)
}

fn values(w: &Word) -> Vec<i32> {
    w.letters().iter().map(|l| l.value()).collect()
}

/// Cancel adjacent inverse pairs, choosing which pair at random each time.
fn cancel_in_random_order(mut w: Vec<i32>, rng: &mut impl Rng) -> Vec<i32> {
    loop {
        let spots: Vec<usize> = (0..w.len().saturating_sub(1)).filter(|&i| w[i] == -w[i + 1]).collect();
        if spots.is_empty() {
            return w;
        }
        let i = spots[rng.gen_range(0..spots.len())];
        w.drain(i..i + 2);
    }
}

proptest! {
    #[test]
    fn reduce_matches_stack_reduction(w in letters(3, 40)) {
        prop_assert_eq!(values(&word(&w, 3)), free_reduce(&w));
    }

    #[test]
    fn reduce_is_independent_of_cancellation_order(w in letters(2, 30), seed in any::<u64>()) {
        let mut r = rng(seed);
        prop_assert_eq!(cancel_in_random_order(w.clone(), &mut r), values(&word(&w, 2)));
    }

    #[test]
    fn multiplication_is_associative(u in letters(3, 12), v in letters(3, 12), x in letters(3, 12)) {
        let (u, v, x) = (word(&u, 3), word(&v, 3), word(&x, 3));
        let left = u.multiply(&v).unwrap().multiply(&x).unwrap();
        let right = u.multiply(&v.multiply(&x).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn inverse_cancels(w in letters(3, 20)) {
        let w = word(&w, 3);
        prop_assert!(w.multiply(&w.inverse()).unwrap().is_identity());
        prop_assert_eq!(w.inverse().inverse(), w);
    }

    #[test]
    fn text_round_trips(w in letters(4, 20)) {
        let w = word(&w, 4);
        prop_assert_eq!(Word::parse(&w.to_string(), 4).unwrap(), w);
    }

    #[test]
    fn conjugates_are_conjugate(w in letters(2, 14), g in letters(2, 8)) {
        let (w, g) = (word(&w, 2), word(&g, 2));
        let c = g.multiply(&w).unwrap().multiply(&g.inverse()).unwrap();
        prop_assert!(are_conjugate(&w, &c).unwrap());
        prop_assert!(are_conjugate(&c, &w).unwrap());
    }

    #[test]
    fn cyclic_reduction_splits_off_a_conjugator(w in letters(2, 20)) {
        let w = word(&w, 2);
        let (g, class) = w.cyclic_reduce();
        let Some(class) = class else { return {
            let _: () = prop_assert!(w.is_identity());
            Ok(())
        } };
        let core = class.to_word();
        prop_assert!(core.is_cyclically_reduced());
        prop_assert!(are_conjugate(&w, &core).unwrap());
        let rebuilt = g.multiply(&core).unwrap().multiply(&g.inverse()).unwrap();
        prop_assert!(are_conjugate(&rebuilt, &w).unwrap());
        prop_assert_eq!(2 * g.len() + core.len(), w.len());
    }

    #[test]
    fn rotations_share_a_class(w in letters(2, 16), k in 0usize..16) {
        let w = word(&w, 2);
        let Some(class) = w.conjugacy_class() else { return Ok(()) };
        let ls = class.letters();
        let k = k % ls.len();
        let mut rotated = ls[k..].to_vec();
        rotated.extend_from_slice(&ls[..k]);
        prop_assert_eq!(CyclicWord::new(rotated, 2).unwrap(), class);
    }

    #[test]
    fn roots_match_period_search(base in letters(2, 6), power in 1usize..4) {
        let base = word(&base, 2);
        let Some(class) = base.pow(power as i64).conjugacy_class() else { return Ok(()) };
        let ls: Vec<i32> = class.letters().iter().map(|l| l.value()).collect();
        let n = ls.len();
        let period = (1..=n).find(|&p| n.is_multiple_of(p) && (0..n).all(|i| ls[i] == ls[(i + p) % n])).unwrap();
        let (root, exponent) = class.extract_root();
        prop_assert_eq!(root.len(), period);
        prop_assert_eq!(exponent, n / period);
        prop_assert!(root.is_root_free());
    }

    #[test]
    fn abelianization_is_a_homomorphism(u in letters(3, 15), v in letters(3, 15)) {
        let (u, v) = (word(&u, 3), word(&v, 3));
        let sum = &u.abelianize() + &v.abelianize();
        prop_assert_eq!(u.multiply(&v).unwrap().abelianize(), sum);
    }

    #[test]
    fn automorphic_images_of_a_basis_are_unimodular(seed in any::<u64>(), steps in 0usize..8) {
        let auto = random_automorphism(&mut rng(seed), 3, steps);
        let vectors: Vec<AbelianVector> = auto.images().iter().map(|w| w.abelianize()).collect();
        prop_assert!(abelian_partial_basis(&vectors));
        prop_assert!(abelian_partial_basis(&vectors[..2]));
    }
}
