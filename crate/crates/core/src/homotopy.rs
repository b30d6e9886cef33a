//! Components, the rank of the free fundamental groupoid, and a bounded
//! search for arrows connecting parallel terms.

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use petgraph::unionfind::UnionFind;
use serde::Serialize;
use thiserror::Error;

use crate::globset::{CellId, GlobSet};
use crate::rewrite::{equal_terms, nf, EqVerdict, SearchBudget};
use crate::terms::{
    boundary, boundary_to, signed_gen_count, Context, Side, Term, TermError, TypedTerm,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HomotopyError {
    #[error("terms are not parallel: {0}")]
    NotParallel(String),
    #[error("a connecting arrow would have dimension {0}, above the bound")]
    DimBoundExceeded(usize),
    #[error(transparent)]
    Term(#[from] TermError),
}

/// Connected components of the objects, with 1-cells as edges.
pub fn pi0(x: &GlobSet) -> Vec<Vec<CellId>> {
    let objs: Vec<usize> = (0..x.len()).filter(|&i| x.cell(i).dim == 0).collect();
    let mut uf = UnionFind::<usize>::new(x.len());
    for i in 0..x.len() {
        if x.cell(i).dim == 1 {
            uf.union(x.src_of(i).unwrap(), x.tgt_of(i).unwrap());
        }
    }
    let mut comps: BTreeMap<usize, Vec<CellId>> = BTreeMap::new();
    for &o in &objs {
        comps.entry(uf.find(o)).or_default().push(x.cell(o).id.clone());
    }
    let mut out: Vec<Vec<CellId>> = comps.into_values().collect();
    for c in &mut out {
        c.sort();
    }
    out.sort();
    out
}

/// `E - V + C` of the underlying graph.
pub fn pi1_free_rank(x: &GlobSet) -> i64 {
    let e = x.count_dim(1) as i64;
    let v = x.count_dim(0) as i64;
    let c = pi0(x).len() as i64;
    e - v + c
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "result", rename_all = "kebab-case")]
pub enum ConnectResult {
    Found {
        h: Term,
        size: usize,
        source_check: &'static str,
        target_check: &'static str,
    },
    NotFoundWithinBudget {
        explored: usize,
        linear_constraint: Option<bool>,
    },
}

impl ConnectResult {
    pub fn found(&self) -> Option<&Term> {
        match self {
            ConnectResult::Found { h, .. } => Some(h),
            _ => None,
        }
    }
}

#[derive(Clone)]
struct Cand {
    term: Term,
    src: Vec<Term>,
    tgt: Vec<Term>,
}

/// Generators of the search: top generators with their inverses, and
/// identities on the endpoints, on lower generators and their inverses.
fn atoms(ctx: &Context, d: usize, ends: &[&Term]) -> Vec<Term> {
    let mut out = BTreeSet::new();
    for c in ctx.cells_of_dim(d + 1) {
        out.insert(Term::Gen(c.clone()));
        out.insert(Term::inv(Term::Gen(c.clone())));
    }
    for e in ends {
        out.insert(Term::id((*e).clone()));
    }
    for k in 0..=d {
        for c in ctx.cells_of_dim(k) {
            let g = Term::Gen(c.clone());
            out.insert(Term::id_n(g.clone(), d + 1 - k));
            if k >= 1 {
                out.insert(Term::id_n(Term::inv(g), d + 1 - k));
            }
        }
    }
    out.into_iter().map(|t| nf(ctx, &t)).collect::<BTreeSet<_>>().into_iter().collect()
}

fn cand(ctx: &Context, t: Term, d: usize) -> Option<Cand> {
    let mut src = Vec::with_capacity(d + 1);
    let mut tgt = Vec::with_capacity(d + 1);
    for j in 0..=d {
        src.push(nf(ctx, &boundary_to(ctx, &t, j, Side::Src).ok()?));
        tgt.push(nf(ctx, &boundary_to(ctx, &t, j, Side::Tgt).ok()?));
    }
    Some(Cand { term: t, src, tgt })
}

/// The linear necessary condition on top-generator counts: the boundary of
/// the count vector of `h` is `cnt(v) - cnt(u)`.
fn count_boundary(ctx: &Context, h: &Term) -> BTreeMap<CellId, i64> {
    let mut out: BTreeMap<CellId, i64> = BTreeMap::new();
    for (c, n) in signed_gen_count(ctx, h).nonzero() {
        let info = ctx.get(&c).expect("generator");
        for (b, sign) in [(&info.tgt, 1), (&info.src, -1)] {
            if let Some(b) = b {
                for (c2, m) in signed_gen_count(ctx, b).nonzero() {
                    *out.entry(c2).or_insert(0) += sign * n * m;
                }
            }
        }
    }
    out.retain(|_, v| *v != 0);
    out
}

fn diff(a: &BTreeMap<CellId, i64>, b: &BTreeMap<CellId, i64>) -> BTreeMap<CellId, i64> {
    let mut out = a.clone();
    for (k, v) in b {
        *out.entry(k.clone()).or_insert(0) -= v;
    }
    out.retain(|_, v| *v != 0);
    out
}

/// Enumerates connecting arrows `u → v` by increasing number of atoms, one
/// per normal form, stopping after `limit` hits.
fn search(
    u: &TypedTerm,
    v: &TypedTerm,
    budget: &SearchBudget,
    limit: usize,
    first_size_only: bool,
) -> Result<(Vec<(Term, usize)>, usize), HomotopyError> {
    let ctx = &*u.ctx;
    let d = u.dim;
    let deadline = Instant::now() + Duration::from_millis(budget.time_cap_ms);
    let want = diff(
        &signed_gen_count(ctx, &v.term).nonzero(),
        &signed_gen_count(ctx, &u.term).nonzero(),
    );
    let nu = nf(ctx, &u.term);
    let nv = nf(ctx, &v.term);
    let mut seen: BTreeSet<Term> = BTreeSet::new();
    let mut by_size: Vec<Vec<Cand>> = vec![Vec::new()];
    let mut hits = Vec::new();
    let mut explored = 0usize;
    let consider = |c: &Cand, size: usize, hits: &mut Vec<(Term, usize)>| {
        if c.src[d] == nu && c.tgt[d] == nv && count_boundary(ctx, &c.term) == want {
            hits.push((c.term.clone(), size));
        }
    };
    let mut level = Vec::new();
    for a in atoms(ctx, d, &[&u.term, &v.term]) {
        if seen.insert(a.clone()) {
            if let Some(c) = cand(ctx, a, d) {
                explored += 1;
                consider(&c, 1, &mut hits);
                level.push(c);
            }
        }
    }
    by_size.push(level);
    for size in 2..=budget.search_size {
        if hits.len() >= limit || (first_size_only && !hits.is_empty()) {
            break;
        }
        let mut level = Vec::new();
        'outer: for left in 1..size {
            let right = size - left;
            for a in &by_size[left] {
                for b in &by_size[right] {
                    for j in 0..=d {
                        if a.src[j] != b.tgt[j] {
                            continue;
                        }
                        if explored >= budget.node_cap || Instant::now() > deadline {
                            break 'outer;
                        }
                        let t = nf(ctx, &Term::comp(j, a.term.clone(), b.term.clone()));
                        if !seen.insert(t.clone()) {
                            continue;
                        }
                        explored += 1;
                        if let Some(c) = cand(ctx, t, d) {
                            consider(&c, size, &mut hits);
                            level.push(c);
                        }
                    }
                }
            }
        }
        by_size.push(level);
    }
    hits.truncate(limit);
    Ok((hits, explored))
}

fn check_parallel(u: &TypedTerm, v: &TypedTerm, budget: &SearchBudget) -> Result<(), HomotopyError> {
    if u.dim != v.dim {
        return Err(HomotopyError::NotParallel(format!(
            "dimensions {} and {}",
            u.dim, v.dim
        )));
    }
    if u.dim + 1 > u.ctx.bound().0 {
        return Err(HomotopyError::DimBoundExceeded(u.dim + 1));
    }
    if u.dim == 0 {
        return Ok(());
    }
    for side in [Side::Src, Side::Tgt] {
        let a = boundary(&u.ctx, &u.term, side)?;
        let b = boundary(&u.ctx, &v.term, side)?;
        let verdict = equal_terms(&u.ctx, &a, &b, budget);
        if !verdict.is_equal() {
            return Err(HomotopyError::NotParallel(format!(
                "{side:?} boundaries {a} and {b} are {}",
                verdict.label()
            )));
        }
    }
    Ok(())
}

fn verify(u: &TypedTerm, v: &TypedTerm, h: &Term, budget: &SearchBudget) -> (EqVerdict, EqVerdict) {
    let ctx = &u.ctx;
    let s = boundary(ctx, h, Side::Src).expect("typed");
    let t = boundary(ctx, h, Side::Tgt).expect("typed");
    (
        equal_terms(ctx, &s, &u.term, budget),
        equal_terms(ctx, &t, &v.term, budget),
    )
}

/// Bounded search for an arrow `h : u → v` one dimension up.
pub fn connect_arrow(u: &TypedTerm, v: &TypedTerm, budget: &SearchBudget) -> Result<ConnectResult, HomotopyError> {
    check_parallel(u, v, budget)?;
    if equal_terms(&u.ctx, &u.term, &v.term, budget).is_equal() {
        return Ok(found(u, v, Term::id(u.term.clone()), 1, budget));
    }
    let (hits, explored) = search(u, v, budget, 1, false)?;
    match hits.into_iter().next() {
        Some((h, size)) => Ok(found(u, v, h, size, budget)),
        None => {
            let ctx = &*u.ctx;
            let linear_constraint = if ctx.cells_of_dim(u.dim + 1).next().is_none() {
                Some(signed_gen_count(ctx, &u.term) == signed_gen_count(ctx, &v.term))
            } else {
                None
            };
            Ok(ConnectResult::NotFoundWithinBudget {
                explored,
                linear_constraint,
            })
        }
    }
}

fn found(u: &TypedTerm, v: &TypedTerm, h: Term, size: usize, budget: &SearchBudget) -> ConnectResult {
    let (s, t) = verify(u, v, &h, budget);
    ConnectResult::Found {
        h,
        size,
        source_check: s.label(),
        target_check: t.label(),
    }
}

/// Every connecting arrow found within the budget, one per normal form,
/// each with verified boundaries.
pub fn all_liftings(
    u: &TypedTerm,
    v: &TypedTerm,
    budget: &SearchBudget,
    limit: usize,
) -> Result<Vec<Term>, HomotopyError> {
    check_parallel(u, v, budget)?;
    let (hits, _) = search(u, v, budget, limit, false)?;
    Ok(verified(u, v, hits, budget))
}

/// The connecting arrows of smallest size, one per normal form.
pub fn minimal_liftings(u: &TypedTerm, v: &TypedTerm, budget: &SearchBudget) -> Result<Vec<Term>, HomotopyError> {
    check_parallel(u, v, budget)?;
    let (hits, _) = search(u, v, budget, usize::MAX, true)?;
    Ok(verified(u, v, hits, budget))
}

fn verified(u: &TypedTerm, v: &TypedTerm, hits: Vec<(Term, usize)>, budget: &SearchBudget) -> Vec<Term> {
    let mut out: Vec<Term> = hits
        .into_iter()
        .map(|(h, _)| h)
        .filter(|h| {
            let (s, t) = verify(u, v, h, budget);
            s.is_equal() && t.is_equal()
        })
        .collect();
    if out.is_empty() && equal_terms(&u.ctx, &u.term, &v.term, budget).is_equal() {
        out.push(Term::id(u.term.clone()));
    }
    out
}

/// Decides whether all the given liftings are pairwise equal.
pub fn uniqueness_check(ctx: &Context, liftings: &[Term], budget: &SearchBudget) -> bool {
    liftings.windows(2).all(|w| equal_terms(ctx, &w[0], &w[1], budget).is_equal())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::globset::{disk, globular_sum, DimBound, Table};
    use crate::terms::type_check;
    use std::sync::Arc;

    fn b() -> DimBound {
        DimBound::default()
    }

    #[test]
    fn components_and_rank() {
        let g = globular_sum(&Table::parse("1 1 / 0").unwrap(), b()).unwrap();
        assert_eq!(pi0(&g.gs).len(), 1);
        let d0 = disk(0, b()).unwrap();
        let two = d0.disjoint_union(&d0, "b.").unwrap();
        assert_eq!(pi0(&two).len(), 2);
        for n in 1..=6 {
            assert_eq!(pi0(&disk(n, b()).unwrap()).len(), 1);
        }
        assert_eq!(pi1_free_rank(&g.gs), 0);
        assert_eq!(pi1_free_rank(&d0), 0);
        let s1 = crate::globset::sphere(1, b()).unwrap().truncate(1);
        assert_eq!(pi1_free_rank(&s1), 1);
    }

    fn d2() -> Arc<Context> {
        Context::from_globset(&disk(2, b()).unwrap(), b())
    }

    #[test]
    fn connect_examples() {
        let c = d2();
        let f = type_check(&Term::gen("s1_1"), &c).unwrap();
        let g = type_check(&Term::gen("t1_1"), &c).unwrap();
        let bud = SearchBudget::default();
        let r = connect_arrow(&f, &g, &bud).unwrap();
        assert_eq!(r.found(), Some(&Term::gen("u1")));
        let r = connect_arrow(&g, &f, &bud).unwrap();
        assert_eq!(r.found(), Some(&Term::inv(Term::gen("u1"))));
        let r = connect_arrow(&f, &f, &bud).unwrap();
        assert_eq!(r.found(), Some(&Term::id(Term::gen("s1_1"))));
        let x = type_check(&Term::gen("s1_0"), &c).unwrap();
        assert!(matches!(
            connect_arrow(&x, &f, &bud),
            Err(HomotopyError::NotParallel(_))
        ));
    }

    #[test]
    fn composite_liftings() {
        let g = globular_sum(&Table::parse("2 2 / 0").unwrap(), b()).unwrap();
        let c = Context::from_globset(&g.gs, b());
        let s = type_check(&Term::comp(0, Term::gen("s1_1"), Term::gen("s2_1")), &c).unwrap();
        let t = type_check(&Term::comp(0, Term::gen("t1_1"), Term::gen("t2_1")), &c).unwrap();
        let r = connect_arrow(&s, &t, &SearchBudget::default()).unwrap();
        let h = r.found().expect("found").clone();
        assert_eq!(h, Term::comp(0, Term::gen("u1"), Term::gen("u2")));
        let all = all_liftings(&s, &t, &SearchBudget::default().doubled(), 8).unwrap();
        assert!(!all.is_empty());
        for (i, h) in all.iter().enumerate() {
            for h2 in &all[i + 1..] {
                let v = equal_terms(&c, h, h2, &SearchBudget::default());
                let cert = v.certificate().expect("joined");
                crate::replay::replay(&c, h, &cert.steps, h2).unwrap();
            }
        }
        assert!(uniqueness_check(&c, &all, &SearchBudget::default()));
    }

    #[test]
    fn unconnected_objects() {
        let g = disk(0, b()).unwrap().disjoint_union(&disk(0, b()).unwrap(), "b.").unwrap();
        let c = Context::from_globset(&g, b());
        let x = type_check(&Term::gen("u1"), &c).unwrap();
        let y = type_check(&Term::gen("b.u1"), &c).unwrap();
        let r = connect_arrow(&x, &y, &SearchBudget::default()).unwrap();
        assert!(matches!(r, ConnectResult::NotFoundWithinBudget { .. }));
    }
}
