//! Seeded random contexts and well-typed terms.

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::globset::{Cell, CellId, DimBound, GlobSet};
use crate::rewrite::nf;
use crate::terms::{boundary_to, Context, Side, Term};

/// A random graph with at most `max_cells` cells, at least one of them an
/// object.
pub fn random_graph<R: Rng>(rng: &mut R, max_cells: usize) -> GlobSet {
    let total = rng.gen_range(1..=max_cells.max(1));
    let objects = rng.gen_range(1..=total.min(3));
    let mut cells: Vec<Cell> = (0..objects)
        .map(|i| Cell {
            id: CellId::new(&format!("x{i}")),
            dim: 0,
            src: None,
            tgt: None,
        })
        .collect();
    for e in 0..total - objects {
        let (a, b) = (rng.gen_range(0..objects), rng.gen_range(0..objects));
        cells.push(Cell {
            id: CellId::new(&format!("a{e}")),
            dim: 1,
            src: Some(CellId::new(&format!("x{a}"))),
            tgt: Some(CellId::new(&format!("x{b}"))),
        });
    }
    GlobSet::new(cells).expect("graph is globular")
}

struct Entry {
    term: Term,
    src: Vec<Term>,
    tgt: Vec<Term>,
}

fn entry(ctx: &Context, t: Term, d: usize) -> Option<Entry> {
    let mut src = Vec::with_capacity(d);
    let mut tgt = Vec::with_capacity(d);
    for j in 0..d {
        src.push(nf(ctx, &boundary_to(ctx, &t, j, Side::Src).ok()?));
        tgt.push(nf(ctx, &boundary_to(ctx, &t, j, Side::Tgt).ok()?));
    }
    Some(Entry { term: t, src, tgt })
}

/// Well-typed terms of dimension at most `max_dim`, grown from generators,
/// inverses and identities by `rounds` random composition attempts.
/// Composability is decided on normal forms, so every result type checks.
pub fn random_terms<R: Rng>(ctx: &Context, rng: &mut R, max_dim: usize, rounds: usize, max_size: usize) -> Vec<Term> {
    let mut pool: Vec<Vec<Entry>> = (0..=max_dim).map(|_| Vec::new()).collect();
    let mut seen = BTreeSet::new();
    let mut add = |pool: &mut Vec<Vec<Entry>>, t: Term, d: usize| {
        if t.size() <= max_size && seen.insert(t.clone()) {
            if let Some(e) = entry(ctx, t, d) {
                pool[d].push(e);
            }
        }
    };
    for d in 0..=max_dim {
        for c in ctx.cells_of_dim(d) {
            add(&mut pool, Term::Gen(c.clone()), d);
            if d > 0 {
                add(&mut pool, Term::inv(Term::Gen(c.clone())), d);
            }
        }
        if d > 0 {
            let lower: Vec<Term> = pool[d - 1].iter().map(|e| e.term.clone()).collect();
            for t in lower {
                add(&mut pool, Term::id(t), d);
            }
        }
    }
    let dims: Vec<usize> = (1..=max_dim).filter(|&d| !pool[d].is_empty()).collect();
    if dims.is_empty() {
        return pool.into_iter().flatten().map(|e| e.term).collect();
    }
    for _ in 0..rounds {
        let d = *dims.choose(rng).unwrap();
        match rng.gen_range(0..10) {
            0 => {
                let a = pool[d].choose(rng).unwrap().term.clone();
                add(&mut pool, Term::inv(a), d);
            }
            1 if d < max_dim && !pool[d - 1].is_empty() => {
                let a = pool[d - 1].choose(rng).unwrap().term.clone();
                add(&mut pool, Term::id(a), d);
            }
            _ => {
                let j = rng.gen_range(0..d);
                let a = pool[d].choose(rng).unwrap();
                let b = pool[d].choose(rng).unwrap();
                if a.src[j] == b.tgt[j] {
                    let t = Term::comp(j, a.term.clone(), b.term.clone());
                    add(&mut pool, t, d);
                }
            }
        }
    }
    pool.into_iter().flatten().map(|e| e.term).collect()
}

/// Small contexts for property checks: disks and globular sums up to the
/// given dimension.
pub fn small_contexts(max_dim: usize, bound: DimBound) -> Vec<Arc<Context>> {
    let mut out = Vec::new();
    for t in crate::globset::Table::enumerate(3, max_dim) {
        if let Ok(s) = crate::theta0::sum_of(&t, bound) {
            out.push(Context::from_globset(&s.gs, bound));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::terms::type_check;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_terms_type_check() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let g = random_graph(&mut rng, 6);
        assert!(g.len() <= 6);
        let ctx = Context::from_globset(&g, DimBound::default());
        for t in random_terms(&ctx, &mut rng, 1, 200, 12) {
            type_check(&t, &ctx).unwrap();
        }
        let ctxs = small_contexts(2, DimBound::default());
        for ctx in ctxs.iter().take(5) {
            let ts = random_terms(ctx, &mut rng, 2, 200, 12);
            assert!(ts.iter().any(|t| matches!(t, Term::Comp(..))));
            for t in ts {
                type_check(&t, ctx).unwrap();
            }
        }
    }

    #[test]
    fn seeded_runs_repeat() {
        let run = || {
            let mut rng = ChaCha8Rng::seed_from_u64(42);
            let g = random_graph(&mut rng, 6);
            let ctx = Context::from_globset(&g, DimBound::default());
            random_terms(&ctx, &mut rng, 1, 100, 10)
        };
        assert_eq!(run(), run());
    }
}
