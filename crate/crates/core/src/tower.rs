//! Morphisms between free groupoids on globular sums, admissible pairs and
//! their liftings, towers of formal liftings, and the precategory operations.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::globset::{CellId, DimBound, GlobError, Table};
use crate::homotopy::{all_liftings, connect_arrow, minimal_liftings, uniqueness_check, ConnectResult, HomotopyError};
use crate::rewrite::{equal_terms, EqVerdict, SearchBudget};
use crate::terms::{
    boundary_to, parse_term, substitute, type_check_with, validate_assignment, Context, Side, Term,
    TermError, TypedTerm,
};
use crate::theta0::sum_of;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TowerError {
    #[error(transparent)]
    Glob(#[from] GlobError),
    #[error(transparent)]
    Term(#[from] TermError),
    #[error(transparent)]
    Homotopy(#[from] HomotopyError),
    #[error("codomain of the first map is not the domain of the second")]
    DomainMismatch,
    #[error("pair for {cell} is not admissible: {reason}")]
    InadmissiblePair { cell: String, reason: String },
    #[error("no lifting found: {0}")]
    NotFound(String),
    #[error("evaluation stuck at {cell}: {detail}")]
    EvaluationStuck { cell: String, detail: String },
    #[error("bad indices: {0}")]
    IndexError(String),
}

/// The context of the free groupoid on `G_T`.
pub fn sum_context(t: &Table, bound: DimBound) -> Result<Arc<Context>, GlobError> {
    Ok(Context::from_globset(&sum_of(t, bound)?.gs, bound))
}

/// A map `L(G_src) → L(G_dst)`, given by one term per top cell of `G_src`.
#[derive(Debug, Clone)]
pub struct ThetaTildeMor {
    pub src: Table,
    pub dst: Table,
    pub assignment: BTreeMap<CellId, Term>,
    full: BTreeMap<CellId, Term>,
    ctx: Arc<Context>,
}

#[derive(Serialize)]
pub struct MorView<'a> {
    pub src: &'a Table,
    pub dst: &'a Table,
    pub assignment: &'a BTreeMap<CellId, Term>,
}

impl ThetaTildeMor {
    /// Builds and validates a morphism into `ctx`, which is `L(G_dst)`
    /// possibly extended by formal cells.
    pub fn new_in(
        src: Table,
        dst: Table,
        ctx: Arc<Context>,
        assignment: BTreeMap<CellId, Term>,
        budget: &SearchBudget,
    ) -> Result<Self, TowerError> {
        let bound = ctx.bound();
        let sum = sum_of(&src, bound)?;
        let mut full = BTreeMap::new();
        for (l, inj) in sum.injections.iter().enumerate() {
            let top = sum.top(l);
            let img = assignment.get(&top).ok_or_else(|| {
                TermError::IncompatibleAssignment {
                    cell: top.to_string(),
                    detail: "no image".into(),
                }
            })?;
            let n = src.upper()[l];
            for d in inj.domain().cells() {
                let c = inj.apply(&d.id).expect("injection").clone();
                if full.contains_key(&c) {
                    continue;
                }
                let t = if d.dim == n {
                    img.clone()
                } else {
                    let side = if d.id.as_str().starts_with('s') { Side::Src } else { Side::Tgt };
                    boundary_to(&ctx, img, d.dim, side)?
                };
                full.insert(c, t);
            }
        }
        let src_ctx = Context::from_globset(&sum.gs, bound);
        validate_assignment(&src_ctx, &ctx, &full, budget)?;
        let assignment = (0..sum.injections.len())
            .map(|l| {
                let top = sum.top(l);
                let t = full[&top].clone();
                (top, t)
            })
            .collect();
        Ok(ThetaTildeMor {
            src,
            dst,
            assignment,
            full,
            ctx,
        })
    }

    pub fn new(
        src: Table,
        dst: Table,
        assignment: BTreeMap<CellId, Term>,
        bound: DimBound,
        budget: &SearchBudget,
    ) -> Result<Self, TowerError> {
        let ctx = sum_context(&dst, bound)?;
        Self::new_in(src, dst, ctx, assignment, budget)
    }

    /// The morphism out of `[n]` picking the `n`-arrow `t`.
    pub fn from_disk(n: usize, dst: Table, ctx: Arc<Context>, t: Term, budget: &SearchBudget) -> Result<Self, TowerError> {
        let a = BTreeMap::from([(CellId::new("u1"), t)]);
        Self::new_in(Table::disk(n), dst, ctx, a, budget)
    }

    pub fn identity(t: &Table, bound: DimBound) -> Result<Self, TowerError> {
        let sum = sum_of(t, bound)?;
        let a = (0..sum.injections.len())
            .map(|l| (sum.top(l), Term::Gen(sum.top(l))))
            .collect();
        Self::new(t.clone(), t.clone(), a, bound, &SearchBudget::default())
    }

    /// Image of any cell of `G_src`.
    pub fn image(&self, c: &CellId) -> Option<&Term> {
        self.full.get(c)
    }

    pub fn context(&self) -> &Arc<Context> {
        &self.ctx
    }

    /// The single term of a morphism out of a disk.
    pub fn arrow(&self) -> Option<&Term> {
        (self.assignment.len() == 1).then(|| self.assignment.values().next().unwrap())
    }

    pub fn view(&self) -> MorView<'_> {
        MorView {
            src: &self.src,
            dst: &self.dst,
            assignment: &self.assignment,
        }
    }
}

/// `f ∘ g`: first `g`, then `f`.
pub fn compose_theta_tilde(f: &ThetaTildeMor, g: &ThetaTildeMor, budget: &SearchBudget) -> Result<ThetaTildeMor, TowerError> {
    if g.dst != f.src {
        return Err(TowerError::DomainMismatch);
    }
    let a = g
        .assignment
        .iter()
        .map(|(c, t)| (c.clone(), substitute(t, &f.full)))
        .collect();
    ThetaTildeMor::new_in(g.src.clone(), f.dst.clone(), f.ctx.clone(), a, budget)
}

/// Componentwise equality; any undecided component makes the whole
/// comparison undecided.
pub fn mor_equal(a: &ThetaTildeMor, b: &ThetaTildeMor, budget: &SearchBudget) -> &'static str {
    if a.src != b.src || a.dst != b.dst {
        return "distinct";
    }
    let mut unknown = false;
    for (c, t) in &a.assignment {
        match equal_terms(&a.ctx, t, &b.assignment[c], budget) {
            EqVerdict::Distinct(_) => return "distinct",
            EqVerdict::Unknown { .. } => unknown = true,
            EqVerdict::Equal(_) => {}
        }
    }
    if unknown {
        "unknown"
    } else {
        "equal"
    }
}

fn disk_arrow(n: usize, dst: &Table, t: Term, bound: DimBound) -> Result<ThetaTildeMor, TowerError> {
    let ctx = sum_context(dst, bound)?;
    ThetaTildeMor::from_disk(n, dst.clone(), ctx, t, &SearchBudget::default())
}

/// `[i] → [n]` onto the source `i`-face.
pub fn sigma_tilde(i: usize, n: usize, bound: DimBound) -> Result<ThetaTildeMor, TowerError> {
    face_tilde(i, n, "s", bound)
}

/// `[i] → [n]` onto the target `i`-face.
pub fn tau_tilde(i: usize, n: usize, bound: DimBound) -> Result<ThetaTildeMor, TowerError> {
    face_tilde(i, n, "t", bound)
}

fn face_tilde(i: usize, n: usize, side: &str, bound: DimBound) -> Result<ThetaTildeMor, TowerError> {
    if i >= n {
        return Err(TowerError::IndexError(format!("face {i} of [{n}]")));
    }
    disk_arrow(i, &Table::disk(n), Term::gen(&format!("{side}1_{i}")), bound)
}

/// `[i] → [i,i;j]` onto the given copy (1 or 2).
pub fn eps(i: usize, j: usize, copy: usize, bound: DimBound) -> Result<ThetaTildeMor, TowerError> {
    if j >= i || !(1..=2).contains(&copy) {
        return Err(TowerError::IndexError(format!("copy {copy} of [{i},{i};{j}]")));
    }
    disk_arrow(i, &Table::new(vec![i, i], vec![j])?, Term::gen(&format!("u{copy}")), bound)
}

/// `[i-1,i-1;j] → [i,i;j]`, the source (or target) face on both copies.
pub fn face_coprod(i: usize, j: usize, src: bool, bound: DimBound) -> Result<ThetaTildeMor, TowerError> {
    if i < 2 || j + 1 >= i {
        return Err(TowerError::IndexError(format!("coproduct of faces for i={i}, j={j}")));
    }
    let p = if src { "s" } else { "t" };
    let a = BTreeMap::from([
        (CellId::new("u1"), Term::gen(&format!("{p}1_{}", i - 1))),
        (CellId::new("u2"), Term::gen(&format!("{p}2_{}", i - 1))),
    ]);
    ThetaTildeMor::new(
        Table::new(vec![i - 1, i - 1], vec![j])?,
        Table::new(vec![i, i], vec![j])?,
        a,
        bound,
        &SearchBudget::default(),
    )
}

/// Two arrows out of `[n]` into the same target.
#[derive(Debug, Clone)]
pub struct AdmissiblePair {
    pub n: usize,
    pub target: Table,
    pub f: ThetaTildeMor,
    pub g: ThetaTildeMor,
}

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct Admissibility {
    pub admissible: bool,
    pub reason: String,
}

impl AdmissiblePair {
    pub fn new(f: ThetaTildeMor, g: ThetaTildeMor) -> Result<Self, TowerError> {
        let n = f.src.dimension();
        if f.src != Table::disk(n) || g.src != f.src || g.dst != f.dst {
            return Err(TowerError::DomainMismatch);
        }
        Ok(AdmissiblePair {
            n,
            target: f.dst.clone(),
            f,
            g,
        })
    }

    fn ends(&self) -> Result<(TypedTerm, TypedTerm), TermError> {
        let ctx = self.f.context().clone();
        Ok((
            TypedTerm::trusted(ctx.clone(), self.f.arrow().expect("disk").clone())?,
            TypedTerm::trusted(ctx, self.g.arrow().expect("disk").clone())?,
        ))
    }
}

pub fn is_admissible(p: &AdmissiblePair, budget: &SearchBudget) -> Admissibility {
    let no = |reason: String| Admissibility {
        admissible: false,
        reason,
    };
    if p.n > 0 {
        let (Some(a), Some(b)) = (p.f.arrow(), p.g.arrow()) else {
            return no("not a pair of disk arrows".into());
        };
        let ctx = p.f.context();
        for side in [Side::Src, Side::Tgt] {
            let (Ok(x), Ok(y)) = (
                boundary_to(ctx, a, p.n - 1, side),
                boundary_to(ctx, b, p.n - 1, side),
            ) else {
                return no("boundary undefined".into());
            };
            match equal_terms(ctx, &x, &y, budget) {
                EqVerdict::Equal(_) => {}
                EqVerdict::Distinct(_) => return no(format!("not parallel: {x} and {y}")),
                EqVerdict::Unknown { .. } => return no(format!("parallelism undecided: {x} and {y}")),
            }
        }
    }
    let d = p.target.dimension();
    if d > p.n + 1 {
        return no(format!("dimension {d} > {}", p.n + 1));
    }
    Admissibility {
        admissible: true,
        reason: "parallel, and the target dimension is at most n+1".into(),
    }
}

/// A lifting `h : [n+1] → T` of the pair, with `h σ = f` and `h τ = g`
/// checked by the engine.
pub fn lift_in_theta_tilde(p: &AdmissiblePair, budget: &SearchBudget) -> Result<ThetaTildeMor, TowerError> {
    let (u, v) = p.ends()?;
    match connect_arrow(&u, &v, budget)? {
        ConnectResult::Found { h, .. } => {
            ThetaTildeMor::from_disk(p.n + 1, p.target.clone(), p.f.context().clone(), h, budget)
        }
        ConnectResult::NotFoundWithinBudget { explored, .. } => {
            Err(TowerError::NotFound(format!("{explored} candidates explored")))
        }
    }
}

/// Liftings found by independent searches: the first hit under the given
/// and the doubled budget, the inverse of a lifting of the reversed pair, and
/// every smallest lifting.
pub fn independent_liftings(p: &AdmissiblePair, budget: &SearchBudget) -> Result<Vec<Term>, TowerError> {
    let (u, v) = p.ends()?;
    let wide = budget.doubled();
    let mut found = vec![lift_in_theta_tilde(p, budget)?.arrow().unwrap().clone()];
    if let Some(h) = connect_arrow(&u, &v, &wide)?.found() {
        found.push(h.clone());
    }
    if let Some(h) = connect_arrow(&v, &u, &wide)?.found() {
        found.push(Term::inv(h.clone()));
    }
    found.extend(minimal_liftings(&u, &v, &wide)?);
    let mut out = Vec::new();
    for h in found {
        if !out.contains(&h) {
            out.push(h);
        }
    }
    Ok(out)
}

/// Every lifting found by exhaustive search under the doubled budget, up to
/// `limit`, one per normal form.
pub fn enumerated_liftings(p: &AdmissiblePair, budget: &SearchBudget, limit: usize) -> Result<Vec<Term>, TowerError> {
    let (u, v) = p.ends()?;
    Ok(all_liftings(&u, &v, &budget.doubled(), limit)?)
}

pub fn pair_uniqueness(p: &AdmissiblePair, liftings: &[Term], budget: &SearchBudget) -> bool {
    uniqueness_check(p.f.context(), liftings, budget)
}

/// A formally added lifting cell.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct FormalCell {
    pub name: CellId,
    pub n: usize,
    pub target: Table,
    pub f: Term,
    pub g: Term,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq, Eq)]
pub struct ExtPresentation {
    pub stages: Vec<Vec<FormalCell>>,
}

impl ExtPresentation {
    fn cells(&self) -> impl Iterator<Item = &FormalCell> {
        self.stages.iter().flatten()
    }

    /// `L(G_T)` with every formal cell aimed at `T`.
    pub fn context(&self, target: &Table, bound: DimBound) -> Result<Arc<Context>, TowerError> {
        let mut ctx = (*sum_context(target, bound)?).clone();
        for c in self.cells().filter(|c| c.target == *target) {
            let cur = Arc::new(ctx.clone());
            let f = TypedTerm::trusted(cur.clone(), c.f.clone())?;
            let g = TypedTerm::trusted(cur, c.g.clone())?;
            ctx = ctx.extend(c.name.clone(), &f, &g)?;
        }
        Ok(Arc::new(ctx))
    }
}

/// Textual description of a pair to be added to a tower.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairSpec {
    #[serde(default)]
    pub name: Option<String>,
    pub n: usize,
    pub target: Table,
    pub f: String,
    pub g: String,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct TowerSpec {
    pub stages: Vec<Vec<PairSpec>>,
}

/// Parses a pair against the current stage of `ext`.
pub fn build_pair(ext: &ExtPresentation, spec: &PairSpec, bound: DimBound, budget: &SearchBudget) -> Result<AdmissiblePair, TowerError> {
    let ctx = ext.context(&spec.target, bound)?;
    let f = parse_term(&spec.f, &ctx, budget)?;
    let g = parse_term(&spec.g, &ctx, budget)?;
    let f = ThetaTildeMor::from_disk(spec.n, spec.target.clone(), ctx.clone(), f.term, budget)?;
    let g = ThetaTildeMor::from_disk(spec.n, spec.target.clone(), ctx, g.term, budget)?;
    AdmissiblePair::new(f, g)
}

fn push_stage(
    ext: &ExtPresentation,
    pairs: &[AdmissiblePair],
    names: &[Option<String>],
    budget: &SearchBudget,
) -> Result<ExtPresentation, TowerError> {
    let stage = ext.stages.len() + 1;
    let mut taken: BTreeSet<CellId> = ext.cells().map(|c| c.name.clone()).collect();
    let mut cells = Vec::new();
    for (i, p) in pairs.iter().enumerate() {
        let name = match names.get(i).cloned().flatten() {
            Some(n) => CellId::new(&n),
            None => CellId::new(&format!("c{stage}_{i}")),
        };
        if !taken.insert(name.clone()) || p.f.context().contains(&name) {
            return Err(TermError::DuplicateCell(name.to_string()).into());
        }
        let a = is_admissible(p, budget);
        if !a.admissible {
            return Err(TowerError::InadmissiblePair {
                cell: name.to_string(),
                reason: a.reason,
            });
        }
        cells.push(FormalCell {
            name,
            n: p.n,
            target: p.target.clone(),
            f: p.f.arrow().unwrap().clone(),
            g: p.g.arrow().unwrap().clone(),
        });
    }
    let mut out = ext.clone();
    out.stages.push(cells);
    Ok(out)
}

/// Appends a stage with one formal lifting per pair, named `c{stage}_{i}`.
pub fn extend_tower(ext: &ExtPresentation, pairs: &[AdmissiblePair], budget: &SearchBudget) -> Result<ExtPresentation, TowerError> {
    push_stage(ext, pairs, &[], budget)
}

pub fn build_tower(spec: &TowerSpec, bound: DimBound, budget: &SearchBudget) -> Result<ExtPresentation, TowerError> {
    let mut ext = ExtPresentation::default();
    for stage in &spec.stages {
        let pairs = stage
            .iter()
            .map(|s| build_pair(&ext, s, bound, budget))
            .collect::<Result<Vec<_>, _>>()?;
        let names: Vec<Option<String>> = stage.iter().map(|s| s.name.clone()).collect();
        ext = push_stage(&ext, &pairs, &names, budget)?;
    }
    Ok(ext)
}

#[derive(Debug, Clone, Serialize)]
pub struct EvalEntry {
    pub cell: CellId,
    pub stage: usize,
    pub n: usize,
    pub target: Table,
    pub image: Term,
    pub liftings: usize,
    pub unique: bool,
}

/// Interprets every formal cell, stage by stage, as a lifting of its pair
/// with earlier formal cells replaced by their images.
pub fn evaluate_tower(ext: &ExtPresentation, bound: DimBound, budget: &SearchBudget) -> Result<Vec<EvalEntry>, TowerError> {
    let mut images: BTreeMap<CellId, Term> = BTreeMap::new();
    let mut out = Vec::new();
    for (s, stage) in ext.stages.iter().enumerate() {
        let results: Vec<Result<EvalEntry, TowerError>> = stage
            .par_iter()
            .map(|c| {
                let stuck = |detail: String| TowerError::EvaluationStuck {
                    cell: c.name.to_string(),
                    detail,
                };
                let ctx = sum_context(&c.target, bound)?;
                let f = type_check_with(&substitute(&c.f, &images), &ctx, budget).map_err(|e| stuck(e.to_string()))?;
                let g = type_check_with(&substitute(&c.g, &images), &ctx, budget).map_err(|e| stuck(e.to_string()))?;
                let h = match connect_arrow(&f, &g, budget).map_err(|e| stuck(e.to_string()))? {
                    ConnectResult::Found { h, .. } => h,
                    ConnectResult::NotFoundWithinBudget { explored, .. } => {
                        return Err(stuck(format!("no lifting among {explored} candidates")))
                    }
                };
                let mut all = vec![h.clone()];
                for x in all_liftings(&f, &g, budget, 3).map_err(|e| stuck(e.to_string()))? {
                    if !all.contains(&x) {
                        all.push(x);
                    }
                }
                Ok(EvalEntry {
                    cell: c.name.clone(),
                    stage: s + 1,
                    n: c.n,
                    target: c.target.clone(),
                    unique: uniqueness_check(&ctx, &all, budget),
                    liftings: all.len(),
                    image: h,
                })
            })
            .collect();
        for r in results {
            let e = r?;
            images.insert(e.cell.clone(), e.image.clone());
            out.push(e);
        }
    }
    Ok(out)
}

pub struct PrecatOps {
    pub nabla: ThetaTildeMor,
    pub kappa: ThetaTildeMor,
}

fn check_indices(i: usize, j: usize, bound: DimBound) -> Result<(), TowerError> {
    if j >= i || i + 1 > bound.0 {
        return Err(TowerError::IndexError(format!(
            "need j < i and i+1 <= {}, got i={i}, j={j}",
            bound.0
        )));
    }
    Ok(())
}

/// `∇ : [i] → [i,i;j]`, the composite of the two copies along `j`, and
/// `κ : [i+1] → [i]`, the identity on the generator.
pub fn precat_ops(i: usize, j: usize, bound: DimBound) -> Result<PrecatOps, TowerError> {
    check_indices(i, j, bound)?;
    let two = Table::new(vec![i, i], vec![j])?;
    let nabla = disk_arrow(i, &two, Term::comp(j, Term::gen("u1"), Term::gen("u2")), bound)?;
    let kappa = disk_arrow(i + 1, &Table::disk(i), Term::id(Term::gen("u1")), bound)?;
    Ok(PrecatOps { nabla, kappa })
}

#[derive(Debug, Clone, Serialize)]
pub struct PrecatEquation {
    pub name: String,
    pub verdict: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct PrecatReport {
    pub i: usize,
    pub j: usize,
    pub equations: Vec<PrecatEquation>,
    pub all_equal: bool,
}

pub fn verify_precat_equations(i: usize, j: usize, bound: DimBound, budget: &SearchBudget) -> Result<PrecatReport, TowerError> {
    let ops = precat_ops(i, j, bound)?;
    let id_i = ThetaTildeMor::identity(&Table::disk(i), bound)?;
    let mut eqs = Vec::new();
    let mut push = |name: String, a: &ThetaTildeMor, b: &ThetaTildeMor| {
        eqs.push(PrecatEquation {
            name,
            verdict: mor_equal(a, b, budget),
        });
    };
    for (name, face) in [("sigma", sigma_tilde(i, i + 1, bound)?), ("tau", tau_tilde(i, i + 1, bound)?)] {
        let lhs = compose_theta_tilde(&ops.kappa, &face, budget)?;
        push(format!("kappa{i} {name}{} = id", i + 1), &lhs, &id_i);
    }
    let (si, ti) = (sigma_tilde(i - 1, i, bound)?, tau_tilde(i - 1, i, bound)?);
    let nabla_s = compose_theta_tilde(&ops.nabla, &si, budget)?;
    let nabla_t = compose_theta_tilde(&ops.nabla, &ti, budget)?;
    if j + 1 == i {
        let rs = compose_theta_tilde(&eps(i, j, 2, bound)?, &si, budget)?;
        let rt = compose_theta_tilde(&eps(i, j, 1, bound)?, &ti, budget)?;
        push(format!("nabla{i}_{j} sigma{i} = eps2 sigma{i}"), &nabla_s, &rs);
        push(format!("nabla{i}_{j} tau{i} = eps1 tau{i}"), &nabla_t, &rt);
    } else {
        let lower = precat_ops(i - 1, j, bound)?.nabla;
        let rs = compose_theta_tilde(&face_coprod(i, j, true, bound)?, &lower, budget)?;
        let rt = compose_theta_tilde(&face_coprod(i, j, false, bound)?, &lower, budget)?;
        push(format!("nabla{i}_{j} sigma{i} = (sigma{i} + sigma{i}) nabla{}_{j}", i - 1), &nabla_s, &rs);
        push(format!("nabla{i}_{j} tau{i} = (tau{i} + tau{i}) nabla{}_{j}", i - 1), &nabla_t, &rt);
    }
    let id_pair = AdmissiblePair::new(id_i.clone(), id_i.clone())?;
    let lifted = lift_in_theta_tilde(&id_pair, budget)?;
    push(format!("kappa{i} lifts (id, id)"), &lifted, &ops.kappa);
    let nabla_pair = AdmissiblePair::new(nabla_s, nabla_t)?;
    if is_admissible(&nabla_pair, budget).admissible {
        let lifted = lift_in_theta_tilde(&nabla_pair, budget)?;
        push(format!("nabla{i}_{j} lifts its boundary pair"), &lifted, &ops.nabla);
    } else {
        eqs.push(PrecatEquation {
            name: format!("nabla{i}_{j} lifts its boundary pair"),
            verdict: "distinct",
        });
    }
    let all_equal = eqs.iter().all(|e| e.verdict == "equal");
    Ok(PrecatReport {
        i,
        j,
        equations: eqs,
        all_equal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b() -> DimBound {
        DimBound::default()
    }

    fn bud() -> SearchBudget {
        SearchBudget::default()
    }

    fn t(s: &str) -> Table {
        Table::parse(s).unwrap()
    }

    #[test]
    fn composition() {
        let s2 = sigma_tilde(1, 2, b()).unwrap();
        let ops = precat_ops(1, 0, b()).unwrap();
        let c = compose_theta_tilde(&ops.kappa, &s2, &bud()).unwrap();
        let id = ThetaTildeMor::identity(&Table::disk(1), b()).unwrap();
        assert_eq!(mor_equal(&c, &id, &bud()), "equal");
        let c2 = compose_theta_tilde(&ThetaTildeMor::identity(&Table::disk(2), b()).unwrap(), &s2, &bud()).unwrap();
        assert_eq!(mor_equal(&c2, &s2, &bud()), "equal");
        assert!(matches!(
            compose_theta_tilde(&s2, &s2, &bud()),
            Err(TowerError::DomainMismatch)
        ));
    }

    #[test]
    fn admissibility() {
        let p = AdmissiblePair::new(sigma_tilde(1, 2, b()).unwrap(), tau_tilde(1, 2, b()).unwrap()).unwrap();
        assert!(is_admissible(&p, &bud()).admissible);
        let l = lift_in_theta_tilde(&p, &bud()).unwrap();
        assert_eq!(l.arrow(), Some(&Term::gen("u1")));

        let q = AdmissiblePair::new(sigma_tilde(0, 2, b()).unwrap(), tau_tilde(0, 2, b()).unwrap()).unwrap();
        let a = is_admissible(&q, &bud());
        assert!(!a.admissible);
        assert_eq!(a.reason, "dimension 2 > 1");

        let r = AdmissiblePair::new(sigma_tilde(1, 2, b()).unwrap(), sigma_tilde(1, 2, b()).unwrap()).unwrap();
        assert_eq!(lift_in_theta_tilde(&r, &bud()).unwrap().arrow(), Some(&Term::id(Term::gen("s1_1"))));

        let ctx = sum_context(&t("1 1 / 0"), b()).unwrap();
        let f = ThetaTildeMor::from_disk(1, t("1 1 / 0"), ctx.clone(), Term::gen("u1"), &bud()).unwrap();
        let g = ThetaTildeMor::from_disk(1, t("1 1 / 0"), ctx, Term::gen("u2"), &bud()).unwrap();
        assert!(!is_admissible(&AdmissiblePair::new(f, g).unwrap(), &bud()).admissible);
    }

    #[test]
    fn uniqueness_of_disk_liftings() {
        let p = AdmissiblePair::new(sigma_tilde(1, 2, b()).unwrap(), tau_tilde(1, 2, b()).unwrap()).unwrap();
        let a = Term::gen("u1");
        let longer = Term::comp(1, a.clone(), Term::comp(1, Term::inv(a.clone()), a.clone()));
        assert!(pair_uniqueness(&p, &[a, longer], &bud()));
        let ls = independent_liftings(&p, &bud()).unwrap();
        assert!(pair_uniqueness(&p, &ls, &bud()));
    }

    #[test]
    fn towers() {
        let empty = ExtPresentation::default();
        assert!(evaluate_tower(&empty, b(), &bud()).unwrap().is_empty());
        let same = extend_tower(&empty, &[], &bud()).unwrap();
        assert_eq!(same.stages, vec![Vec::<FormalCell>::new()]);

        let spec: TowerSpec = serde_json::from_str(
            r#"{"stages": [
                [{"name": "h", "n": 1, "target": "2", "f": "s1_1", "g": "t1_1"},
                 {"n": 1, "target": "2", "f": "s1_1", "g": "t1_1"}],
                [{"name": "k", "n": 2, "target": "2", "f": "h", "g": "u1"}]
            ]}"#,
        )
        .unwrap();
        let ext = build_tower(&spec, b(), &bud()).unwrap();
        assert_eq!(ext.stages[0].len(), 2);
        assert_ne!(ext.stages[0][0].name, ext.stages[0][1].name);
        let ev = evaluate_tower(&ext, b(), &bud()).unwrap();
        assert_eq!(ev[0].image, Term::gen("u1"));
        assert_eq!(ev[2].image, Term::id(Term::gen("u1")));
        assert!(ev.iter().all(|e| e.unique));

        let bad: TowerSpec = serde_json::from_str(
            r#"{"stages": [[{"n": 0, "target": "2", "f": "s1_0", "g": "t1_0"}]]}"#,
        )
        .unwrap();
        assert!(matches!(
            build_tower(&bad, b(), &bud()),
            Err(TowerError::InadmissiblePair { .. })
        ));
    }

    #[test]
    fn precategory_equations() {
        for (i, j) in [(1, 0), (2, 0), (2, 1)] {
            let r = verify_precat_equations(i, j, b(), &bud()).unwrap();
            assert!(r.all_equal, "{:?}", r.equations);
        }
        assert!(matches!(precat_ops(1, 1, b()), Err(TowerError::IndexError(_))));
    }
}
