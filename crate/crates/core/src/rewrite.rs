//! Equality of terms: oriented rewriting for associativity, units, inverses
//! and functoriality of identities, with the exchange law handled by a
//! greedy pass followed by a bounded bidirectional search.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::globset::CellId;
use crate::terms::{boundary, boundary_to, dim_of, signed_gen_count, Context, Side, Term, TermError, TypedTerm};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchBudget {
    /// Depth of the bidirectional exchange search; 0 disables every use of
    /// the exchange law.
    pub closure_depth: usize,
    pub node_cap: usize,
    pub time_cap_ms: u64,
    /// Largest term size explored by the connecting-arrow search.
    pub search_size: usize,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            closure_depth: 6,
            node_cap: 20_000,
            time_cap_ms: 5_000,
            search_size: 7,
        }
    }
}

impl SearchBudget {
    pub fn doubled(&self) -> SearchBudget {
        SearchBudget {
            closure_depth: self.closure_depth * 2,
            node_cap: self.node_cap * 2,
            time_cap_ms: self.time_cap_ms * 2,
            search_size: self.search_size + 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    InvInv,
    InvId,
    InvComp,
    InvCompLow,
    IdComp,
    UnitLeft,
    UnitRight,
    InvCancel,
    InvCancelAssoc,
    Assoc,
    Exchange,
}

impl Rule {
    pub fn name(self) -> &'static str {
        match self {
            Rule::InvInv => "inv-inv",
            Rule::InvId => "inv-id",
            Rule::InvComp => "inv-comp",
            Rule::InvCompLow => "inv-comp-low",
            Rule::IdComp => "id-comp",
            Rule::UnitLeft => "unit-left",
            Rule::UnitRight => "unit-right",
            Rule::InvCancel => "inv-cancel",
            Rule::InvCancelAssoc => "inv-cancel-assoc",
            Rule::Assoc => "assoc",
            Rule::Exchange => "exchange",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dir {
    Forward,
    Backward,
}

/// One axiom instance applied at `path`. A backward step rewrites `after`
/// into `before`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub rule: Rule,
    pub path: Vec<u8>,
    pub before: Term,
    pub after: Term,
    pub dir: Dir,
}

impl Step {
    pub fn reversed(&self) -> Step {
        Step {
            dir: match self.dir {
                Dir::Forward => Dir::Backward,
                Dir::Backward => Dir::Forward,
            },
            ..self.clone()
        }
    }
}

fn reverse_steps(steps: &[Step]) -> Vec<Step> {
    steps.iter().rev().map(Step::reversed).collect()
}

/// Rewriting steps that carry one term to another.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Certificate {
    pub steps: Vec<Step>,
}

impl Certificate {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn count(&self, rule: Rule) -> usize {
        self.steps.iter().filter(|s| s.rule == rule).count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Witness {
    DimMismatch { left: usize, right: usize },
    BoundaryMismatch { side: Side },
    GenCountMismatch {
        left: BTreeMap<CellId, i64>,
        right: BTreeMap<CellId, i64>,
    },
    WordOracleMismatch { left: String, right: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum EqVerdict {
    Equal(Certificate),
    Distinct(Witness),
    Unknown { reason: String },
}

impl EqVerdict {
    pub fn is_equal(&self) -> bool {
        matches!(self, EqVerdict::Equal(_))
    }

    pub fn is_distinct(&self) -> bool {
        matches!(self, EqVerdict::Distinct(_))
    }

    pub fn is_unknown(&self) -> bool {
        matches!(self, EqVerdict::Unknown { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            EqVerdict::Equal(_) => "equal",
            EqVerdict::Distinct(_) => "distinct",
            EqVerdict::Unknown { .. } => "unknown",
        }
    }

    pub fn certificate(&self) -> Option<&Certificate> {
        match self {
            EqVerdict::Equal(c) => Some(c),
            _ => None,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RewriteError {
    #[error("reduced words are only defined up to dimension 1, got {0}")]
    DimTooHigh(usize),
    #[error(transparent)]
    Term(#[from] TermError),
}

/// `Some(w)` when `t` is an identity on the `j`-dimensional term `w`,
/// possibly spread over lower composites by functoriality.
pub fn collapse(ctx: &Context, t: &Term, j: usize) -> Option<Term> {
    let d = dim_of(ctx, t).ok()?;
    collapse_at(t, d, j)
}

fn collapse_at(t: &Term, d: usize, j: usize) -> Option<Term> {
    if d <= j {
        return Some(t.clone());
    }
    match t {
        Term::Id(x) => collapse_at(x, d - 1, j),
        Term::Comp(k, a, b) if *k < j => Some(Term::comp(
            *k,
            collapse_at(a, d, j)?,
            collapse_at(b, d, j)?,
        )),
        _ => None,
    }
}

fn inverse_pair(ctx: &Context, a: &Term, b: &Term, j: usize) -> bool {
    match (collapse(ctx, a, j + 1), collapse(ctx, b, j + 1)) {
        (Some(ca), Some(cb)) => {
            matches!(&ca, Term::Inv(x) if **x == cb) || matches!(&cb, Term::Inv(x) if **x == ca)
        }
        _ => false,
    }
}

fn root_step(ctx: &Context, t: &Term) -> Option<(Rule, Term)> {
    match t {
        Term::Inv(x) => match &**x {
            Term::Inv(y) => Some((Rule::InvInv, (**y).clone())),
            Term::Id(_) => Some((Rule::InvId, (**x).clone())),
            Term::Comp(j, u, v) => {
                let m = dim_of(ctx, u).ok()?;
                if j + 1 == m {
                    Some((
                        Rule::InvComp,
                        Term::comp(*j, Term::inv((**v).clone()), Term::inv((**u).clone())),
                    ))
                } else {
                    Some((
                        Rule::InvCompLow,
                        Term::comp(*j, Term::inv((**u).clone()), Term::inv((**v).clone())),
                    ))
                }
            }
            Term::Gen(_) => None,
        },
        Term::Id(x) => match &**x {
            Term::Comp(j, u, v) => Some((
                Rule::IdComp,
                Term::comp(*j, Term::id((**u).clone()), Term::id((**v).clone())),
            )),
            _ => None,
        },
        Term::Comp(j, u, v) => {
            let j = *j;
            if collapse(ctx, u, j).is_some() {
                return Some((Rule::UnitLeft, (**v).clone()));
            }
            if collapse(ctx, v, j).is_some() {
                return Some((Rule::UnitRight, (**u).clone()));
            }
            if inverse_pair(ctx, u, v, j) {
                let m = dim_of(ctx, u).ok()?;
                let base = boundary_to(ctx, v, j, Side::Src).ok()?;
                return Some((Rule::InvCancel, Term::id_n(base, m - j)));
            }
            if let Term::Comp(k, b, r) = &**v {
                if *k == j && inverse_pair(ctx, u, b, j) {
                    return Some((Rule::InvCancelAssoc, (**r).clone()));
                }
            }
            if let Term::Comp(k, a, b) = &**u {
                if *k == j {
                    return Some((
                        Rule::Assoc,
                        Term::comp(j, (**a).clone(), Term::comp(j, (**b).clone(), (**v).clone())),
                    ));
                }
            }
            None
        }
        Term::Gen(_) => None,
    }
}

struct Normalizer<'a> {
    ctx: &'a Context,
    steps: Vec<Step>,
}

impl Normalizer<'_> {
    fn norm(&mut self, t: &Term, path: &mut Vec<u8>) -> Term {
        let t = match t {
            Term::Gen(_) => t.clone(),
            Term::Id(x) => {
                path.push(0);
                let x = self.norm(x, path);
                path.pop();
                Term::id(x)
            }
            Term::Inv(x) => {
                path.push(0);
                let x = self.norm(x, path);
                path.pop();
                Term::inv(x)
            }
            Term::Comp(j, u, v) => {
                path.push(0);
                let u = self.norm(u, path);
                path.pop();
                path.push(1);
                let v = self.norm(v, path);
                path.pop();
                Term::comp(*j, u, v)
            }
        };
        match root_step(self.ctx, &t) {
            Some((rule, after)) => {
                self.steps.push(Step {
                    rule,
                    path: path.clone(),
                    before: t,
                    after: after.clone(),
                    dir: Dir::Forward,
                });
                self.norm(&after, path)
            }
            None => t,
        }
    }
}

/// Normal form under the oriented rules, leftmost-innermost.
pub fn normalize(ctx: &Context, t: &Term) -> (Term, Vec<Step>) {
    normalize_at(ctx, t, &[])
}

fn normalize_at(ctx: &Context, t: &Term, prefix: &[u8]) -> (Term, Vec<Step>) {
    let mut n = Normalizer {
        ctx,
        steps: Vec::new(),
    };
    let mut path = prefix.to_vec();
    let nf = n.norm(t, &mut path);
    (nf, n.steps)
}

pub fn normalize_typed(t: &TypedTerm) -> (Term, Vec<Step>) {
    normalize(&t.ctx, &t.term)
}

pub fn nf(ctx: &Context, t: &Term) -> Term {
    normalize(ctx, t).0
}

/// Termination measure for the oriented rules, compared lexicographically:
/// generator occurrences by dimension from the top down, then a polynomial
/// weight, then the total size of left factors of composites.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Measure {
    pub gens_by_dim: Vec<usize>,
    pub weight: u128,
    pub left_weight: usize,
}

pub fn measure(ctx: &Context, t: &Term) -> Measure {
    let top = ctx.bound().0 + 1;
    let mut gens = vec![0usize; top + 1];
    fn poly(t: &Term) -> u128 {
        match t {
            Term::Gen(_) => 2,
            Term::Id(x) | Term::Inv(x) => poly(x).saturating_mul(2),
            Term::Comp(_, u, v) => poly(u).saturating_add(poly(v)).saturating_add(1),
        }
    }
    fn walk(ctx: &Context, t: &Term, gens: &mut [usize], left: &mut usize) {
        match t {
            Term::Gen(c) => {
                let d = ctx.get(c).map(|i| i.dim).unwrap_or(0).min(gens.len() - 1);
                gens[d] += 1;
            }
            Term::Id(x) | Term::Inv(x) => walk(ctx, x, gens, left),
            Term::Comp(_, u, v) => {
                *left += u.size();
                walk(ctx, u, gens, left);
                walk(ctx, v, gens, left);
            }
        }
    }
    let mut left = 0;
    walk(ctx, t, &mut gens, &mut left);
    gens.reverse();
    Measure {
        gens_by_dim: gens,
        weight: poly(t),
        left_weight: left,
    }
}

/// Applies a step to a whole term, in its recorded direction.
pub fn apply_step(t: &Term, s: &Step) -> Option<Term> {
    let (from, to) = match s.dir {
        Dir::Forward => (&s.before, &s.after),
        Dir::Backward => (&s.after, &s.before),
    };
    if t.at(&s.path)? != from {
        return None;
    }
    t.replace_at(&s.path, to.clone())
}

fn composable_at(ctx: &Context, a: &Term, c: &Term, j: usize) -> bool {
    match (
        boundary_to(ctx, a, j, Side::Src),
        boundary_to(ctx, c, j, Side::Tgt),
    ) {
        (Ok(x), Ok(y)) => x == y || nf(ctx, &x) == nf(ctx, &y),
        _ => false,
    }
}

/// `Comp(j, Comp(k,a,b), Comp(k,c,d))` with `k < j` and the new composites
/// typed; returns the exchanged term.
fn exchange_forward(ctx: &Context, t: &Term) -> Option<Term> {
    if let Term::Comp(j, l, r) = t {
        if let (Term::Comp(k, a, b), Term::Comp(k2, c, d)) = (&**l, &**r) {
            if k == k2 && k < j && composable_at(ctx, a, c, *j) && composable_at(ctx, b, d, *j) {
                return Some(Term::comp(
                    *k,
                    Term::comp(*j, (**a).clone(), (**c).clone()),
                    Term::comp(*j, (**b).clone(), (**d).clone()),
                ));
            }
        }
    }
    None
}

/// `Comp(k, Comp(j,a,c), Comp(j,b,d))` with `k < j`, read right to left.
fn exchange_backward(t: &Term) -> Option<Term> {
    if let Term::Comp(k, l, r) = t {
        if let (Term::Comp(j, a, c), Term::Comp(j2, b, d)) = (&**l, &**r) {
            if j == j2 && k < j {
                return Some(Term::comp(
                    *j,
                    Term::comp(*k, (**a).clone(), (**b).clone()),
                    Term::comp(*k, (**c).clone(), (**d).clone()),
                ));
            }
        }
    }
    None
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Move {
    Exchange,
    AssocExchange,
    ExchangeBack,
    /// `A *k B` below the top level, split into two whiskered factors
    /// composed along the top level; `true` puts `A` first.
    Split(bool),
    /// An identity whisker pushed through a higher composite; `true` when the
    /// whisker is on the left.
    Distribute(bool),
}

fn distribute_steps(ctx: &Context, sub: &Term, path: &[u8], left: bool) -> Option<Vec<Step>> {
    let Term::Comp(k, l, r) = sub else { return None };
    let (w, inner) = if left { (l, r) } else { (r, l) };
    let Term::Comp(j, p, q) = &**inner else { return None };
    if j <= k || collapse(ctx, w, *j).is_none() {
        return None;
    }
    let (w, p, q) = ((**w).clone(), (**p).clone(), (**q).clone());
    let ww = Term::comp(*j, w.clone(), w.clone());
    let (mid, result) = if left {
        (
            Term::comp(*k, ww.clone(), (**inner).clone()),
            Term::comp(*j, Term::comp(*k, w.clone(), p), Term::comp(*k, w.clone(), q)),
        )
    } else {
        (
            Term::comp(*k, (**inner).clone(), ww.clone()),
            Term::comp(*j, Term::comp(*k, p, w.clone()), Term::comp(*k, q, w.clone())),
        )
    };
    if exchange_forward(ctx, &result).as_ref() != Some(&mid) {
        return None;
    }
    let mut pw = path.to_vec();
    pw.push(if left { 0 } else { 1 });
    Some(vec![
        unit_step(Rule::UnitLeft, pw, ww, w),
        Step {
            rule: Rule::Exchange,
            path: path.to_vec(),
            before: result,
            after: mid,
            dir: Dir::Backward,
        },
    ])
}

fn unit_step(rule: Rule, path: Vec<u8>, before: Term, after: Term) -> Step {
    Step {
        rule,
        path,
        before,
        after,
        dir: Dir::Backward,
    }
}

fn split_steps(ctx: &Context, sub: &Term, path: &[u8], a_first: bool) -> Option<Vec<Step>> {
    let Term::Comp(k, a, b) = sub else { return None };
    let m = dim_of(ctx, sub).ok()?;
    if *k + 1 >= m || collapse(ctx, a, m - 1).is_some() || collapse(ctx, b, m - 1).is_some() {
        return None;
    }
    let j = m - 1;
    let (a, b) = ((**a).clone(), (**b).clone());
    let id_src = |t: &Term| boundary(ctx, t, Side::Src).ok().map(Term::id);
    let id_tgt = |t: &Term| boundary(ctx, t, Side::Tgt).ok().map(Term::id);
    let (mut p0, mut p1) = (path.to_vec(), path.to_vec());
    p0.push(0);
    p1.push(1);
    let (l, r, ul, ur, result) = if a_first {
        let (sa, tb) = (id_src(&a)?, id_tgt(&b)?);
        let l = Term::comp(j, a.clone(), sa.clone());
        let r = Term::comp(j, tb.clone(), b.clone());
        let res = Term::comp(j, Term::comp(*k, a.clone(), tb), Term::comp(*k, sa, b.clone()));
        (l, r, Rule::UnitRight, Rule::UnitLeft, res)
    } else {
        let (ta, sb) = (id_tgt(&a)?, id_src(&b)?);
        let l = Term::comp(j, ta.clone(), a.clone());
        let r = Term::comp(j, b.clone(), sb.clone());
        let res = Term::comp(j, Term::comp(*k, ta, b.clone()), Term::comp(*k, a.clone(), sb));
        (l, r, Rule::UnitLeft, Rule::UnitRight, res)
    };
    let mid = Term::comp(*k, l.clone(), r.clone());
    if exchange_forward(ctx, &result).as_ref() != Some(&mid) {
        return None;
    }
    Some(vec![
        unit_step(ul, p0, l, a),
        unit_step(ur, p1, r, b),
        Step {
            rule: Rule::Exchange,
            path: path.to_vec(),
            before: result,
            after: mid,
            dir: Dir::Backward,
        },
    ])
}

/// Steps for one exchange move at `path`, with `sub` the subterm there.
fn move_steps(ctx: &Context, sub: &Term, path: &[u8], mv: Move) -> Option<Vec<Step>> {
    match mv {
        Move::Split(a_first) => split_steps(ctx, sub, path, a_first),
        Move::Distribute(left) => distribute_steps(ctx, sub, path, left),
        Move::Exchange => {
            let after = exchange_forward(ctx, sub)?;
            Some(vec![Step {
                rule: Rule::Exchange,
                path: path.to_vec(),
                before: sub.clone(),
                after,
                dir: Dir::Forward,
            }])
        }
        Move::ExchangeBack => {
            let before = exchange_backward(sub)?;
            Some(vec![Step {
                rule: Rule::Exchange,
                path: path.to_vec(),
                before,
                after: sub.clone(),
                dir: Dir::Backward,
            }])
        }
        Move::AssocExchange => {
            let Term::Comp(j, x, rest) = sub else { return None };
            let Term::Comp(j2, y, r) = &**rest else { return None };
            if j != j2 {
                return None;
            }
            let inner = Term::comp(*j, (**x).clone(), (**y).clone());
            let exchanged = exchange_forward(ctx, &inner)?;
            let reassoc = Term::comp(*j, inner.clone(), (**r).clone());
            let mut p0 = path.to_vec();
            p0.push(0);
            Some(vec![
                Step {
                    rule: Rule::Assoc,
                    path: path.to_vec(),
                    before: reassoc,
                    after: sub.clone(),
                    dir: Dir::Backward,
                },
                Step {
                    rule: Rule::Exchange,
                    path: p0,
                    before: inner,
                    after: exchanged,
                    dir: Dir::Forward,
                },
            ])
        }
    }
}

/// Every exchange move of a term, in post-order (leftmost-innermost first).
fn moves(ctx: &Context, t: &Term, kinds: &[Move], path: &mut Vec<u8>, out: &mut Vec<Vec<Step>>) {
    match t {
        Term::Gen(_) => {}
        Term::Id(x) | Term::Inv(x) => {
            path.push(0);
            moves(ctx, x, kinds, path, out);
            path.pop();
        }
        Term::Comp(_, u, v) => {
            path.push(0);
            moves(ctx, u, kinds, path, out);
            path.pop();
            path.push(1);
            moves(ctx, v, kinds, path, out);
            path.pop();
        }
    }
    for &k in kinds {
        if let Some(steps) = move_steps(ctx, t, path, k) {
            out.push(steps);
        }
    }
}

fn first_move(ctx: &Context, t: &Term, kinds: &[Move], path: &mut Vec<u8>) -> Option<Vec<Step>> {
    match t {
        Term::Gen(_) => {}
        Term::Id(x) | Term::Inv(x) => {
            path.push(0);
            let r = first_move(ctx, x, kinds, path);
            path.pop();
            if r.is_some() {
                return r;
            }
        }
        Term::Comp(_, u, v) => {
            path.push(0);
            let r = first_move(ctx, u, kinds, path);
            path.pop();
            if r.is_some() {
                return r;
            }
            path.push(1);
            let r = first_move(ctx, v, kinds, path);
            path.pop();
            if r.is_some() {
                return r;
            }
        }
    }
    kinds.iter().find_map(|&k| move_steps(ctx, t, path, k))
}

/// Applies a move to a normal form and renormalizes.
fn take_move(ctx: &Context, t: &Term, mv: &[Step]) -> Option<(Term, Vec<Step>)> {
    let mut cur = t.clone();
    for s in mv {
        cur = apply_step(&cur, s)?;
    }
    let (n, mut steps) = normalize(ctx, &cur);
    let mut all = mv.to_vec();
    all.append(&mut steps);
    Some((n, all))
}

/// Greedy exchange pass on a normal form: the leftmost-innermost exchange
/// redex is rewritten and the result renormalized, until none remains.
pub fn saturate(ctx: &Context, t: &Term, cap: usize) -> (Term, Vec<Step>) {
    let mut cur = t.clone();
    let mut steps = Vec::new();
    for _ in 0..cap {
        let Some(mv) = first_move(ctx, &cur, &[Move::Exchange, Move::AssocExchange], &mut Vec::new()) else {
            break;
        };
        match take_move(ctx, &cur, &mv) {
            Some((n, mut s)) => {
                steps.append(&mut s);
                cur = n;
            }
            None => break,
        }
    }
    (cur, steps)
}

/// Equality of two typed terms over the same context.
pub fn equal(t: &TypedTerm, u: &TypedTerm, budget: &SearchBudget) -> Result<EqVerdict, TermError> {
    if !(Arc::ptr_eq(&t.ctx, &u.ctx) || *t.ctx == *u.ctx) {
        return Err(TermError::ContextMismatch);
    }
    Ok(equal_terms(&t.ctx, &t.term, &u.term, budget))
}

/// Equality of two terms assumed well typed in `ctx`.
pub fn equal_terms(ctx: &Context, t: &Term, u: &Term, budget: &SearchBudget) -> EqVerdict {
    let deadline = Instant::now() + Duration::from_millis(budget.time_cap_ms);
    equal_rec(ctx, t, u, budget, deadline)
}

fn equal_rec(ctx: &Context, t: &Term, u: &Term, budget: &SearchBudget, deadline: Instant) -> EqVerdict {
    let (dt, du) = match (dim_of(ctx, t), dim_of(ctx, u)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => {
            return EqVerdict::Unknown {
                reason: e.to_string(),
            }
        }
    };
    if dt != du {
        return EqVerdict::Distinct(Witness::DimMismatch { left: dt, right: du });
    }
    if t == u {
        return EqVerdict::Equal(Certificate::default());
    }
    let (nt, st) = normalize(ctx, t);
    let (nu, su) = normalize(ctx, u);
    let join = |mut a: Vec<Step>, b: &[Step]| {
        a.extend(reverse_steps(b));
        EqVerdict::Equal(Certificate { steps: a })
    };
    if nt == nu {
        return join(st, &su);
    }
    if dt <= 1 {
        return match (reduced_word(ctx, t), reduced_word(ctx, u)) {
            (Ok(a), Ok(b)) if a != b => EqVerdict::Distinct(Witness::WordOracleMismatch {
                left: a.to_string(),
                right: b.to_string(),
            }),
            _ => EqVerdict::Unknown {
                reason: "normal forms differ but reduced words agree".into(),
            },
        };
    }
    let mut boundaries_known = true;
    for side in [Side::Src, Side::Tgt] {
        let (Ok(bt), Ok(bu)) = (boundary(ctx, t, side), boundary(ctx, u, side)) else {
            boundaries_known = false;
            continue;
        };
        match equal_rec(ctx, &bt, &bu, budget, deadline) {
            EqVerdict::Distinct(_) => return EqVerdict::Distinct(Witness::BoundaryMismatch { side }),
            EqVerdict::Unknown { .. } => boundaries_known = false,
            EqVerdict::Equal(_) => {}
        }
    }
    if boundaries_known {
        let (ct, cu) = (signed_gen_count(ctx, t), signed_gen_count(ctx, u));
        if ct != cu {
            return EqVerdict::Distinct(Witness::GenCountMismatch {
                left: ct.nonzero(),
                right: cu.nonzero(),
            });
        }
    }
    if budget.closure_depth == 0 {
        return EqVerdict::Unknown {
            reason: "normal forms differ and the exchange search is disabled".into(),
        };
    }
    let (gt, mut sgt) = saturate(ctx, &nt, budget.node_cap);
    let (gu, mut sgu) = saturate(ctx, &nu, budget.node_cap);
    let mut left = st;
    left.append(&mut sgt);
    let mut right = su;
    right.append(&mut sgu);
    if gt == gu {
        return join(left, &right);
    }
    match bidirectional(ctx, &gt, &gu, budget, deadline) {
        Some(mid) => {
            left.extend(mid);
            join(left, &right)
        }
        None => EqVerdict::Unknown {
            reason: format!(
                "no exchange path within depth {} / {} nodes",
                budget.closure_depth, budget.node_cap
            ),
        },
    }
}

struct Side_ {
    seen: HashMap<Term, (Option<Term>, Vec<Step>)>,
    frontier: BTreeSet<Term>,
}

impl Side_ {
    fn new(t: &Term) -> Self {
        let mut seen = HashMap::new();
        seen.insert(t.clone(), (None, Vec::new()));
        Side_ {
            seen,
            frontier: std::iter::once(t.clone()).collect(),
        }
    }

    /// Steps from the root of this side to `t`.
    fn path_to(&self, t: &Term) -> Vec<Step> {
        let mut chunks = Vec::new();
        let mut cur = t.clone();
        while let Some((Some(parent), steps)) = self.seen.get(&cur) {
            chunks.push(steps.clone());
            cur = parent.clone();
        }
        chunks.into_iter().rev().flatten().collect()
    }
}

/// Breadth-first search from both ends over exchange moves in both
/// directions. Frontiers are expanded in sorted order so the result does not
/// depend on hashing.
fn bidirectional(
    ctx: &Context,
    a: &Term,
    b: &Term,
    budget: &SearchBudget,
    deadline: Instant,
) -> Option<Vec<Step>> {
    let mut sides = [Side_::new(a), Side_::new(b)];
    let kinds = [
        Move::Exchange,
        Move::AssocExchange,
        Move::ExchangeBack,
        Move::Split(false),
        Move::Split(true),
        Move::Distribute(true),
        Move::Distribute(false),
    ];
    let mut nodes = 2;
    for level in 0..budget.closure_depth {
        let s = level % 2;
        let frontier = std::mem::take(&mut sides[s].frontier);
        let mut next = BTreeSet::new();
        for t in frontier {
            if Instant::now() > deadline || nodes >= budget.node_cap {
                return None;
            }
            let mut mvs = Vec::new();
            moves(ctx, &t, &kinds, &mut Vec::new(), &mut mvs);
            for mv in mvs {
                let Some((n, steps)) = take_move(ctx, &t, &mv) else { continue };
                if sides[s].seen.contains_key(&n) {
                    continue;
                }
                sides[s].seen.insert(n.clone(), (Some(t.clone()), steps));
                nodes += 1;
                if sides[1 - s].seen.contains_key(&n) {
                    let from_a = sides[0].path_to(&n);
                    let from_b = sides[1].path_to(&n);
                    let mut out = from_a;
                    out.extend(reverse_steps(&from_b));
                    return Some(out);
                }
                next.insert(n);
            }
        }
        sides[s].frontier = next;
        if sides[0].frontier.is_empty() && sides[1].frontier.is_empty() {
            return None;
        }
    }
    None
}

/// A reduced word in the free groupoid on the 1-cells, with its base object.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Word {
    pub base: CellId,
    pub letters: Vec<(CellId, bool)>,
}

impl std::fmt::Display for Word {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "[]@{}", self.base);
        }
        let ls: Vec<String> = self
            .letters
            .iter()
            .map(|(c, pos)| format!("{c}{}", if *pos { "+" } else { "-" }))
            .collect();
        write!(f, "[{}]@{}", ls.join(", "), self.base)
    }
}

/// Flattens a term of dimension at most 1 into its reduced word, first
/// applied letter first.
pub fn reduced_word(ctx: &Context, t: &Term) -> Result<Word, RewriteError> {
    let d = dim_of(ctx, t)?;
    if d > 1 {
        return Err(RewriteError::DimTooHigh(d));
    }
    fn flat(t: &Term, out: &mut Vec<(CellId, bool)>) {
        match t {
            Term::Gen(c) => out.push((c.clone(), true)),
            Term::Id(_) => {}
            Term::Inv(x) => {
                let mut inner = Vec::new();
                flat(x, &mut inner);
                out.extend(inner.into_iter().rev().map(|(c, s)| (c, !s)));
            }
            Term::Comp(_, u, v) => {
                flat(v, out);
                flat(u, out);
            }
        }
    }
    let base = match boundary_to(ctx, t, 0, Side::Src)? {
        Term::Gen(c) => c,
        other => return Err(RewriteError::Term(TermError::ZeroDimensional(other.to_string()))),
    };
    if d == 0 {
        return Ok(Word {
            base,
            letters: Vec::new(),
        });
    }
    let mut raw = Vec::new();
    flat(t, &mut raw);
    let mut stack: Vec<(CellId, bool)> = Vec::new();
    for (c, s) in raw {
        if matches!(stack.last(), Some((c2, s2)) if *c2 == c && *s2 != s) {
            stack.pop();
        } else {
            stack.push((c, s));
        }
    }
    Ok(Word {
        base,
        letters: stack,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::globset::{disk, globular_sum, DimBound, Table};
    use crate::terms::type_check;

    fn ctx(table: &str) -> Arc<Context> {
        let g = globular_sum(&Table::parse(table).unwrap(), DimBound::default()).unwrap();
        Context::from_globset(&g.gs, DimBound::default())
    }

    fn g(s: &str) -> Term {
        Term::gen(s)
    }

    #[test]
    fn normalize_examples() {
        let c = ctx("1 1 / 0");
        let a = g("u2");
        let (n, tr) = normalize(&c, &Term::comp(0, Term::inv(a.clone()), a.clone()));
        assert_eq!(n, Term::id(g("s2_0")));
        assert_eq!(tr[0].rule, Rule::InvCancel);
        let (n, _) = normalize(&c, &Term::comp(0, g("u1"), Term::id(g("s1_0"))));
        assert_eq!(n, g("u1"));

        // three composable arrows in [1,1,1;0,0]: c after b after a
        let c3 = ctx("1 1 1 / 0 0");
        let (a, b, cc) = (g("u3"), g("u2"), g("u1"));
        let left = Term::comp(0, Term::comp(0, cc.clone(), b.clone()), a.clone());
        let (n, tr) = normalize(&c3, &left);
        assert_eq!(n, Term::comp(0, cc, Term::comp(0, b, a)));
        assert_eq!(tr[0].rule, Rule::Assoc);
    }

    #[test]
    fn inverse_pushing() {
        let c = ctx("1 1 / 0");
        let ba = Term::comp(0, g("u1"), g("u2"));
        let (n, _) = normalize(&c, &Term::inv(ba.clone()));
        assert_eq!(n, Term::comp(0, Term::inv(g("u2")), Term::inv(g("u1"))));
        let (n, _) = normalize(&c, &Term::comp(0, Term::inv(ba.clone()), ba));
        assert_eq!(n, Term::id(g("s2_0")));
        let (n, _) = normalize(&c, &Term::inv(Term::inv(g("u1"))));
        assert_eq!(n, g("u1"));
    }

    #[test]
    fn measure_decreases_along_traces() {
        let c = ctx("2 2 / 1");
        let t = Term::inv(Term::comp(
            1,
            Term::comp(1, Term::inv(g("u1")), g("u1")),
            Term::id(Term::comp(0, g("s1_1"), Term::id(g("s1_0")))),
        ));
        type_check(&t, &c).unwrap();
        let (_, steps) = normalize(&c, &t);
        let mut cur = t;
        for s in &steps {
            let next = apply_step(&cur, s).unwrap();
            assert!(measure(&c, &next) < measure(&c, &cur), "{:?}", s.rule);
            cur = next;
        }
    }

    #[test]
    fn interchange_example() {
        // [2,2;0]: alpha = u2 lives on x -> y, beta = u1 on y -> z
        let c = ctx("2 2 / 0");
        let (alpha, beta) = (g("u2"), g("u1"));
        let (a, b) = (g("s2_1"), g("t2_1"));
        let (cc, d) = (g("s1_1"), g("t1_1"));
        let lhs = Term::comp(
            1,
            Term::comp(0, Term::id(d), alpha.clone()),
            Term::comp(0, beta.clone(), Term::id(a)),
        );
        let rhs = Term::comp(
            1,
            Term::comp(0, beta, Term::id(b)),
            Term::comp(0, Term::id(cc), alpha),
        );
        type_check(&lhs, &c).unwrap();
        type_check(&rhs, &c).unwrap();
        let v = equal_terms(&c, &lhs, &rhs, &SearchBudget::default());
        let cert = v.certificate().expect("equal").clone();
        assert!(cert.count(Rule::Exchange) >= 2);
        let nodepth = SearchBudget {
            closure_depth: 0,
            ..Default::default()
        };
        assert!(equal_terms(&c, &lhs, &rhs, &nodepth).is_unknown());
    }

    #[test]
    fn distinct_witnesses() {
        let mut cells = disk(1, DimBound::default()).unwrap().cells().to_vec();
        cells.push(crate::globset::Cell {
            id: "e2".into(),
            dim: 1,
            src: Some("s1_0".into()),
            tgt: Some("t1_0".into()),
        });
        let gs = crate::globset::GlobSet::new(cells).unwrap();
        let c = Context::from_globset(&gs, DimBound::default());
        let v = equal_terms(&c, &g("u1"), &g("e2"), &SearchBudget::default());
        assert!(matches!(v, EqVerdict::Distinct(Witness::WordOracleMismatch { .. })));

        let c2 = ctx("2");
        let v = equal_terms(&c2, &g("s1_1"), &g("u1"), &SearchBudget::default());
        assert!(matches!(v, EqVerdict::Distinct(Witness::DimMismatch { .. })));
        let v = equal_terms(&c2, &g("u1"), &Term::id(g("s1_1")), &SearchBudget::default());
        assert!(matches!(v, EqVerdict::Distinct(Witness::BoundaryMismatch { .. })));
        let v = equal_terms(&c2, &g("u1"), &Term::comp(1, g("u1"), Term::comp(1, Term::inv(g("u1")), g("u1"))), &SearchBudget::default());
        assert!(v.is_equal());
    }

    #[test]
    fn gen_count_witness() {
        // two parallel 2-cells between the same 1-cells
        let mut cells = disk(2, DimBound::default()).unwrap().cells().to_vec();
        cells.push(crate::globset::Cell {
            id: "beta".into(),
            dim: 2,
            src: Some("s1_1".into()),
            tgt: Some("t1_1".into()),
        });
        let gs = crate::globset::GlobSet::new(cells).unwrap();
        let c = Context::from_globset(&gs, DimBound::default());
        let v = equal_terms(&c, &g("u1"), &g("beta"), &SearchBudget::default());
        assert!(matches!(v, EqVerdict::Distinct(Witness::GenCountMismatch { .. })));
    }

    #[test]
    fn words() {
        let c = ctx("1 1 / 0");
        let (a, b) = (g("u2"), g("u1"));
        let w = reduced_word(&c, &Term::comp(0, Term::inv(a.clone()), a.clone())).unwrap();
        assert!(w.letters.is_empty());
        assert_eq!(w.base, CellId::new("s2_0"));
        let w = reduced_word(&c, &Term::comp(0, b.clone(), a.clone())).unwrap();
        assert_eq!(w.letters, vec![(CellId::new("u2"), true), (CellId::new("u1"), true)]);
        let w = reduced_word(&c, &Term::inv(Term::comp(0, b, a))).unwrap();
        assert_eq!(w.letters, vec![(CellId::new("u1"), false), (CellId::new("u2"), false)]);
        let c2 = ctx("2");
        assert!(matches!(
            reduced_word(&c2, &g("u1")),
            Err(RewriteError::DimTooHigh(2))
        ));
    }
}
