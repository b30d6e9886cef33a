use std::collections::BTreeMap;
use std::sync::Arc;

use omegagpd::gen::{random_terms, small_contexts};
use omegagpd::globset::{CellId, DimBound, Table};
use omegagpd::rewrite::{equal_terms, measure, normalize, SearchBudget};
use omegagpd::terms::{boundary, dim_of, parse_surface, signed_gen_count, substitute, Context, Side, Term};
use omegagpd::theta0::{hom_theta0, sum_of};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn tables() -> Vec<Table> {
    Table::enumerate(3, 3)
}

fn sample(seed: u64, max_dim: usize) -> (Arc<Context>, Vec<Term>) {
    let ctxs = small_contexts(max_dim, DimBound::default());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ctx = ctxs[(seed as usize) % ctxs.len()].clone();
    let ts = random_terms(&ctx, &mut rng, max_dim, 60, 12);
    (ctx, ts)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn sums_are_globular(k in 0usize..1000) {
        let ts = tables();
        let t = &ts[k % ts.len()];
        let s = sum_of(t, DimBound::default()).unwrap();
        prop_assert!(s.gs.globular_relations_hold());
        prop_assert_eq!(s.gs.dimension(), Some(t.dimension()));
    }

    #[test]
    fn renaming_commutes_with_boundaries(seed in any::<u64>(), k in 0usize..1000) {
        let bound = DimBound::default();
        let ts = Table::enumerate(3, 2);
        let (s, t) = (&ts[(seed as usize) % ts.len()], &ts[k % ts.len()]);
        let homs = hom_theta0(s, t, bound).unwrap();
        prop_assume!(!homs.is_empty());
        let rho: BTreeMap<CellId, Term> = homs[k % homs.len()]
            .map
            .assignment()
            .into_iter()
            .map(|(a, b)| (a, Term::Gen(b)))
            .collect();
        let from = Context::from_globset(&sum_of(s, bound).unwrap().gs, bound);
        let to = Context::from_globset(&sum_of(t, bound).unwrap().gs, bound);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for u in random_terms(&from, &mut rng, 2, 60, 12).iter().rev().take(20) {
            if dim_of(&from, u).unwrap() == 0 {
                continue;
            }
            for side in [Side::Src, Side::Tgt] {
                let a = boundary(&to, &substitute(u, &rho), side).unwrap();
                let b = substitute(&boundary(&from, u, side).unwrap(), &rho);
                prop_assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn normalization_is_sound(seed in any::<u64>()) {
        let (ctx, ts) = sample(seed, 3);
        let budget = SearchBudget::default();
        for t in ts.iter().rev().take(15) {
            let (n, steps) = normalize(&ctx, t);
            prop_assert_eq!(signed_gen_count(&ctx, t), signed_gen_count(&ctx, &n));
            if dim_of(&ctx, t).unwrap() > 0 {
                for side in [Side::Src, Side::Tgt] {
                    let a = boundary(&ctx, t, side).unwrap();
                    let b = boundary(&ctx, &n, side).unwrap();
                    prop_assert!(equal_terms(&ctx, &a, &b, &budget).is_equal());
                }
            }
            let mut cur = t.clone();
            for s in &steps {
                let next = omegagpd::rewrite::apply_step(&cur, s).unwrap();
                prop_assert!(measure(&ctx, &next) < measure(&ctx, &cur));
                cur = next;
            }
            prop_assert_eq!(cur, n);
        }
    }

    #[test]
    fn printing_round_trips(seed in any::<u64>()) {
        let (_, ts) = sample(seed, 3);
        for t in ts.iter().rev().take(30) {
            let back = parse_surface(&t.to_string()).unwrap().to_raw_term().unwrap();
            prop_assert_eq!(&back, t);
        }
    }
}
