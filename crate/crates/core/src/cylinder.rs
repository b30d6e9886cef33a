//! Cylinders between parallel arrows, the identity cylinder, and the
//! cylinder contracting a disk onto its initial object.
//!
//! An `n`-cylinder `z : u ⇝ v` has side arrows `z♭_i`, `z♯_i` of dimension
//! `i` for `1 <= i <= n` and a top arrow of dimension `n+1`. Its boundary
//! equations say
//!
//! ```text
//! s(z^ε_i) = z♯_{i-1} *_{i-2} ( ... (z♯_1 *_0 u^ε_{i-1}))
//! t(z^ε_i) = ((v^ε_{i-1} *_0 z♭_1) *_1 ... ) *_{i-2} z♭_{i-1}
//! ```
//!
//! where the top arrow plays the role of both `z♭_{n+1}` and `z♯_{n+1}`.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::globset::{disk, DimBound, GlobError};
use crate::replay::replay;
use crate::rewrite::{equal_terms, EqVerdict, Rule, SearchBudget};
use crate::terms::{
    boundary, comp_padded, dim_of, type_check_with, Context, Side, Term, TermError, TypedTerm,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CylError {
    #[error("component {component} has dimension {got}, expected {want}")]
    ComponentDimMismatch {
        component: String,
        got: usize,
        want: usize,
    },
    #[error("a 0-cylinder has no boundary cylinders")]
    ZeroCylinder,
    #[error(transparent)]
    Term(#[from] TermError),
    #[error(transparent)]
    Glob(#[from] GlobError),
}

/// Which chain of side arrows (`♭` or `♯`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Eps {
    Flat,
    Sharp,
}

impl Eps {
    pub fn side(self) -> Side {
        match self {
            Eps::Flat => Side::Src,
            Eps::Sharp => Side::Tgt,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Cylinder {
    pub n: usize,
    pub from: Term,
    pub to: Term,
    pub flats: Vec<Term>,
    pub sharps: Vec<Term>,
    pub top: Term,
    #[serde(skip)]
    pub ctx: Arc<Context>,
}

/// `t^ε_i`: iterated boundary below the dimension of `t`, identity padding
/// above it.
pub fn padded_face(ctx: &Context, t: &Term, i: usize, eps: Eps) -> Result<Term, TermError> {
    let d = dim_of(ctx, t)?;
    if i >= d {
        return Ok(Term::id_n(t.clone(), i - d));
    }
    crate::terms::boundary_to(ctx, t, i, eps.side())
}

impl Cylinder {
    fn component(&self, i: usize, eps: Eps) -> &Term {
        if i == self.n + 1 {
            &self.top
        } else {
            match eps {
                Eps::Flat => &self.flats[i - 1],
                Eps::Sharp => &self.sharps[i - 1],
            }
        }
    }

    pub fn check_dims(&self) -> Result<(), CylError> {
        let want = |name: String, t: &Term, d: usize| -> Result<(), CylError> {
            let got = dim_of(&self.ctx, t)?;
            if got != d {
                return Err(CylError::ComponentDimMismatch {
                    component: name,
                    got,
                    want: d,
                });
            }
            Ok(())
        };
        if self.flats.len() != self.n || self.sharps.len() != self.n {
            return Err(CylError::ComponentDimMismatch {
                component: "side arrows".into(),
                got: self.flats.len().min(self.sharps.len()),
                want: self.n,
            });
        }
        want("from".into(), &self.from, self.n)?;
        want("to".into(), &self.to, self.n)?;
        for i in 1..=self.n {
            want(format!("flat {i}"), &self.flats[i - 1], i)?;
            want(format!("sharp {i}"), &self.sharps[i - 1], i)?;
        }
        want("top".into(), &self.top, self.n + 1)
    }

    /// Expected source of `z^ε_i`.
    pub fn source_chain(&self, i: usize, eps: Eps) -> Result<Term, TermError> {
        let mut x = padded_face(&self.ctx, &self.from, i - 1, eps)?;
        for k in 1..i {
            x = comp_padded(&self.ctx, k - 1, self.sharps[k - 1].clone(), x)?;
        }
        Ok(x)
    }

    /// Expected target of `z^ε_i`.
    pub fn target_chain(&self, i: usize, eps: Eps) -> Result<Term, TermError> {
        let mut x = padded_face(&self.ctx, &self.to, i - 1, eps)?;
        for k in 1..i {
            x = comp_padded(&self.ctx, k - 1, x, self.flats[k - 1].clone())?;
        }
        Ok(x)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CylEquation {
    pub i: usize,
    pub component: &'static str,
    pub side: Side,
    pub lhs: Term,
    pub rhs: Term,
    pub verdict: &'static str,
    pub detail: Option<String>,
    pub trace_len: usize,
    pub exchanges: usize,
    pub replayed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<EqVerdict>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CylReport {
    pub n: usize,
    pub valid: bool,
    pub equations: Vec<CylEquation>,
}

fn check_equation(
    ctx: &Arc<Context>,
    lhs: Term,
    rhs: Result<Term, TermError>,
    budget: &SearchBudget,
    keep_trace: bool,
) -> (Term, Term, EqOutcome) {
    let rhs = match rhs {
        Ok(r) => r,
        Err(e) => {
            return (
                lhs,
                Term::gen("?"),
                EqOutcome::ill_typed(&e),
            )
        }
    };
    if let Err(e) = type_check_with(&rhs, ctx, budget) {
        return (lhs, rhs, EqOutcome::ill_typed(&e));
    }
    let v = equal_terms(ctx, &lhs, &rhs, budget);
    let out = EqOutcome::from_verdict(ctx, &lhs, &rhs, v, keep_trace);
    (lhs, rhs, out)
}

/// Summary of one equality check, with the certificate replayed.
#[derive(Debug, Clone, Serialize)]
pub struct EqOutcome {
    pub verdict: &'static str,
    pub detail: Option<String>,
    pub trace_len: usize,
    pub exchanges: usize,
    pub replayed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<EqVerdict>,
}

impl EqOutcome {
    fn ill_typed(e: &TermError) -> Self {
        let verdict = match e {
            TermError::CompUndecided { .. } => "unknown",
            _ => "ill-typed",
        };
        EqOutcome {
            verdict,
            detail: Some(e.to_string()),
            trace_len: 0,
            exchanges: 0,
            replayed: false,
            trace: None,
        }
    }

    pub fn from_verdict(ctx: &Context, lhs: &Term, rhs: &Term, v: EqVerdict, keep_trace: bool) -> Self {
        let (trace_len, exchanges, replayed, detail) = match &v {
            EqVerdict::Equal(c) => {
                let r = replay(ctx, lhs, &c.steps, rhs);
                (
                    c.len(),
                    c.count(Rule::Exchange),
                    r.is_ok(),
                    r.err().map(|e| e.to_string()),
                )
            }
            EqVerdict::Distinct(w) => (0, 0, false, Some(serde_json::to_string(w).unwrap_or_default())),
            EqVerdict::Unknown { reason } => (0, 0, false, Some(reason.clone())),
        };
        EqOutcome {
            verdict: if v.is_equal() && !replayed { "replay-failed" } else { v.label() },
            detail,
            trace_len,
            exchanges,
            replayed,
            trace: keep_trace.then_some(v),
        }
    }

    pub fn ok(&self) -> bool {
        self.verdict == "equal" && self.replayed
    }
}

/// Checks every boundary equation of a cylinder.
pub fn validate_cylinder(z: &Cylinder, budget: &SearchBudget, keep_traces: bool) -> Result<CylReport, CylError> {
    z.check_dims()?;
    let mut jobs = Vec::new();
    for i in 1..=z.n + 1 {
        let comps: &[(Eps, &'static str)] = if i == z.n + 1 {
            &[(Eps::Flat, "top")]
        } else {
            &[(Eps::Flat, "flat"), (Eps::Sharp, "sharp")]
        };
        for &(eps, name) in comps {
            for side in [Side::Src, Side::Tgt] {
                jobs.push((i, eps, name, side));
            }
        }
    }
    let equations = jobs
        .par_iter()
        .map(|&(i, eps, name, side)| -> Result<CylEquation, CylError> {
            let lhs = boundary(&z.ctx, z.component(i, eps), side)?;
            let rhs = match side {
                Side::Src => z.source_chain(i, eps),
                Side::Tgt => z.target_chain(i, eps),
            };
            let (lhs, rhs, out) = check_equation(&z.ctx, lhs, rhs, budget, keep_traces);
            Ok(CylEquation {
                i,
                component: name,
                side,
                lhs,
                rhs,
                verdict: out.verdict,
                detail: out.detail,
                trace_len: out.trace_len,
                exchanges: out.exchanges,
                replayed: out.replayed,
                trace: out.trace,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let valid = equations.iter().all(|e| e.verdict == "equal" && e.replayed);
    Ok(CylReport {
        n: z.n,
        valid,
        equations,
    })
}

/// `τu : u ⇝ u`, with `(τu)^ε_i = 1_{u^ε_{i-1}}`.
pub fn identity_cylinder(u: &TypedTerm) -> Result<Cylinder, CylError> {
    let n = u.dim;
    let ctx = &u.ctx;
    let side = |eps| -> Result<Vec<Term>, TermError> {
        (1..=n)
            .map(|i| Ok(Term::id(padded_face(ctx, &u.term, i - 1, eps)?)))
            .collect()
    };
    Ok(Cylinder {
        n,
        from: u.term.clone(),
        to: u.term.clone(),
        flats: side(Eps::Flat)?,
        sharps: side(Eps::Sharp)?,
        top: Term::id(u.term.clone()),
        ctx: ctx.clone(),
    })
}

/// The `(n-1)`-cylinder with top `z♭_n` (source) or `z♯_n` (target).
pub fn cyl_boundary(z: &Cylinder, side: Side) -> Result<Cylinder, CylError> {
    if z.n == 0 {
        return Err(CylError::ZeroCylinder);
    }
    let eps = match side {
        Side::Src => Eps::Flat,
        Side::Tgt => Eps::Sharp,
    };
    let m = z.n - 1;
    Ok(Cylinder {
        n: m,
        from: padded_face(&z.ctx, &z.from, m, eps)?,
        to: padded_face(&z.ctx, &z.to, m, eps)?,
        flats: z.flats[..m].to_vec(),
        sharps: z.sharps[..m].to_vec(),
        top: z.component(z.n, eps).clone(),
        ctx: z.ctx.clone(),
    })
}

/// The pair `(v, u)` for `z : u ⇝ v`.
pub fn endpoints(z: &Cylinder) -> (Term, Term) {
    (z.to.clone(), z.from.clone())
}

/// The disk `D_n` as a context, with its top generator.
pub fn disk_context(n: usize, bound: DimBound) -> Result<(Arc<Context>, Term), CylError> {
    let d = disk(n, bound)?;
    Ok((Context::from_globset(&d, bound), Term::gen("u1")))
}

/// `F_k = (u♭_k)⁻¹` over `D_n`, with `u♭_{n+1} = 1_u`.
fn inverse_face(ctx: &Context, u: &Term, k: usize) -> Result<Term, TermError> {
    Ok(Term::inv(padded_face(ctx, u, k, Eps::Flat)?))
}

/// `F_1 *_0 (F_2 *_1 ( ... (F_{m-1} *_{m-2} tail)))`, nested to the right.
fn inverse_chain(ctx: &Context, u: &Term, m: usize, tail: Term) -> Result<Term, TermError> {
    let mut x = tail;
    for k in (1..m).rev() {
        x = comp_padded(ctx, k - 1, inverse_face(ctx, u, k)?, x)?;
    }
    Ok(x)
}

/// `c♯_i = F_1 *_0 (F_2 *_1 ( ... (F_{i-1} *_{i-2} F_i)))`.
pub fn contraction_sharp(ctx: &Context, u: &Term, i: usize) -> Result<Term, TermError> {
    inverse_chain(ctx, u, i, inverse_face(ctx, u, i)?)
}

/// The cylinder `c : u ⇝ 1_{u♭_0}` over `D_n`.
pub fn contraction_cylinder(n: usize, bound: DimBound) -> Result<Cylinder, CylError> {
    bound.check(n + 1)?;
    let (ctx, u) = disk_context(n, bound)?;
    let x0 = padded_face(&ctx, &u, 0, Eps::Flat)?;
    let flats = (1..=n).map(|i| Term::id_n(x0.clone(), i)).collect();
    let sharps = (1..=n)
        .map(|i| contraction_sharp(&ctx, &u, i))
        .collect::<Result<_, _>>()?;
    Ok(Cylinder {
        n,
        from: u,
        to: Term::id_n(x0.clone(), n),
        flats,
        sharps,
        top: Term::id_n(x0, n + 1),
        ctx,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LemmaItem {
    pub n: usize,
    pub i: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub j: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<Eps>,
    pub lhs: Term,
    pub rhs: Term,
    #[serde(flatten)]
    pub outcome: EqOutcome,
}

impl LemmaItem {
    pub fn ok(&self) -> bool {
        self.outcome.ok()
    }
}

fn lemma_item(
    ctx: &Arc<Context>,
    key: (usize, usize, Option<usize>, Option<Eps>),
    lhs: Result<Term, TermError>,
    rhs: Result<Term, TermError>,
    budget: &SearchBudget,
) -> LemmaItem {
    let (n, i, j, eps) = key;
    let (lhs, rhs, outcome) = match (lhs, rhs) {
        (Ok(l), Ok(r)) => match type_check_with(&l, ctx, budget) {
            Ok(_) => check_equation(ctx, l.clone(), Ok(r), budget, false),
            Err(e) => (l, r, EqOutcome::ill_typed(&e)),
        },
        (Err(e), _) | (_, Err(e)) => (
            Term::gen("?"),
            Term::gen("?"),
            EqOutcome::ill_typed(&e),
        ),
    };
    LemmaItem {
        n,
        i,
        j,
        eps,
        lhs,
        rhs,
        outcome,
    }
}

/// Over `D_n`, for `1 <= i <= n+1`:
/// `F_1 *_0 ( ... (F_{i-1} *_{i-2} u♭_{i-1})) = 1_{u♭_0}` (padded).
pub fn verify_lemma_target_cyl(n: usize, bound: DimBound, budget: &SearchBudget) -> Result<Vec<LemmaItem>, CylError> {
    bound.check(n)?;
    let (ctx, u) = disk_context(n, bound)?;
    Ok((1..=n + 1)
        .into_par_iter()
        .map(|i| {
            let lhs = padded_face(&ctx, &u, i - 1, Eps::Flat)
                .and_then(|tail| inverse_chain(&ctx, &u, i, tail));
            let rhs = padded_face(&ctx, &u, 0, Eps::Flat).map(|x0| Term::id_n(x0, i - 1));
            lemma_item(&ctx, (n, i, None, None), lhs, rhs, budget)
        })
        .collect())
}

/// Over `D_n`, for `0 <= j < i <= n+1` and both `ε`:
/// `c♯_j *_{j-1} ( ... (c♯_1 *_0 u^ε_{i-1})) = F_1 *_0 ( ... (F_j *_{j-1} u^ε_{i-1}))`.
pub fn verify_lemma_comp_cyl(n: usize, bound: DimBound, budget: &SearchBudget) -> Result<Vec<LemmaItem>, CylError> {
    bound.check(n)?;
    let (ctx, u) = disk_context(n, bound)?;
    let mut keys = Vec::new();
    for i in 1..=n + 1 {
        for j in 0..i {
            for eps in [Eps::Flat, Eps::Sharp] {
                keys.push((i, j, eps));
            }
        }
    }
    Ok(keys
        .into_par_iter()
        .map(|(i, j, eps)| {
            let tail = padded_face(&ctx, &u, i - 1, eps);
            let lhs = tail.clone().and_then(|mut x| {
                for k in 1..=j {
                    x = comp_padded(&ctx, k - 1, contraction_sharp(&ctx, &u, k)?, x)?;
                }
                Ok(x)
            });
            let rhs = tail.and_then(|t| inverse_chain(&ctx, &u, j + 1, t));
            lemma_item(&ctx, (n, i, Some(j), Some(eps)), lhs, rhs, budget)
        })
        .collect())
}

#[derive(Debug, Clone, Serialize)]
pub struct ContractionReport {
    pub n: usize,
    pub cylinder: CylReport,
    pub lemma_target: Vec<LemmaItem>,
    pub top_collapse: LemmaItem,
    pub all_equal: bool,
}

/// Validates the contraction cylinder, the target lemma for every `i`, and
/// `c♯_{n+1} = 1_{u♭_0}`.
pub fn verify_contraction(n: usize, bound: DimBound, budget: &SearchBudget, keep_traces: bool) -> Result<ContractionReport, CylError> {
    let c = contraction_cylinder(n, bound)?;
    let cylinder = validate_cylinder(&c, budget, keep_traces)?;
    let lemma_target = verify_lemma_target_cyl(n, bound, budget)?;
    let x0 = padded_face(&c.ctx, &c.from, 0, Eps::Flat)?;
    let top_collapse = lemma_item(
        &c.ctx,
        (n, n + 1, None, None),
        contraction_sharp(&c.ctx, &c.from, n + 1),
        Ok(Term::id_n(x0, n + 1)),
        budget,
    );
    let all_equal = cylinder.valid && lemma_target.iter().all(LemmaItem::ok) && top_collapse.ok();
    Ok(ContractionReport {
        n,
        cylinder,
        lemma_target,
        top_collapse,
        all_equal,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ContractibilityWitness {
    pub cyl: Cylinder,
    pub id_endpoint: bool,
    pub const_endpoint: bool,
}

/// Packages the contraction cylinder with checks on its endpoints: the
/// source endpoint is the disk generator, the target endpoint equals the
/// iterated identity on the initial object.
pub fn contractibility_witness(n: usize, bound: DimBound, budget: &SearchBudget) -> Result<ContractibilityWitness, CylError> {
    let cyl = contraction_cylinder(n, bound)?;
    let (v, u) = endpoints(&cyl);
    let id_endpoint = u == Term::gen("u1");
    let x0 = padded_face(&cyl.ctx, &u, 0, Eps::Flat)?;
    let const_endpoint = equal_terms(&cyl.ctx, &v, &Term::id_n(x0, n), budget).is_equal();
    Ok(ContractibilityWitness {
        cyl,
        id_endpoint,
        const_endpoint,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::globset::{globular_sum, Table};
    use crate::terms::type_check;

    fn b() -> DimBound {
        DimBound::default()
    }

    #[test]
    fn contraction_components() {
        let c = contraction_cylinder(0, b()).unwrap();
        assert!(c.flats.is_empty());
        assert_eq!(c.top, Term::id(Term::gen("u1")));
        assert_eq!(endpoints(&c), (Term::gen("u1"), Term::gen("u1")));

        let c = contraction_cylinder(1, b()).unwrap();
        assert_eq!(c.flats, vec![Term::id(Term::gen("s1_0"))]);
        assert_eq!(c.sharps, vec![Term::inv(Term::gen("u1"))]);
        assert_eq!(c.top, Term::id_n(Term::gen("s1_0"), 2));

        let c = contraction_cylinder(2, b()).unwrap();
        assert_eq!(
            c.sharps[1],
            Term::comp(
                0,
                Term::id(Term::inv(Term::gen("s1_1"))),
                Term::inv(Term::gen("u1"))
            )
        );
        assert!(contraction_cylinder(6, b()).is_err());
    }

    #[test]
    fn contraction_is_valid_small() {
        for n in 0..=3 {
            let r = verify_contraction(n, b(), &SearchBudget::default(), false).unwrap();
            assert!(r.all_equal, "n = {n}: {}", serde_json::to_string_pretty(&r).unwrap());
        }
    }

    #[test]
    fn identity_cylinders_are_valid() {
        let g = globular_sum(&Table::parse("2 2 / 1").unwrap(), b()).unwrap();
        let ctx = Context::from_globset(&g.gs, b());
        for t in [
            Term::gen("s1_0"),
            Term::gen("u1"),
            Term::comp(1, Term::gen("u1"), Term::gen("u2")),
            Term::inv(Term::gen("t1_1")),
        ] {
            let u = type_check(&t, &ctx).unwrap();
            let z = identity_cylinder(&u).unwrap();
            assert!(validate_cylinder(&z, &SearchBudget::default(), false).unwrap().valid);
            assert_eq!(endpoints(&z), (t.clone(), t));
        }
        let a = type_check(&Term::gen("s1_1"), &ctx).unwrap();
        let z = identity_cylinder(&a).unwrap();
        assert_eq!(z.flats, vec![Term::id(Term::gen("s1_0"))]);
        assert_eq!(z.sharps, vec![Term::id(Term::gen("t1_0"))]);
        assert_eq!(z.top, Term::id(Term::gen("s1_1")));
    }

    #[test]
    fn swapped_sides_fail() {
        let c = contraction_cylinder(1, b()).unwrap();
        let mut bad = c.clone();
        std::mem::swap(&mut bad.flats, &mut bad.sharps);
        let r = validate_cylinder(&bad, &SearchBudget::default(), false).unwrap();
        assert!(!r.valid);
        assert!(r.equations.iter().any(|e| e.verdict == "distinct"));
    }

    #[test]
    fn boundary_cylinders() {
        let c = contraction_cylinder(1, b()).unwrap();
        let s = cyl_boundary(&c, Side::Src).unwrap();
        assert_eq!(s.n, 0);
        assert_eq!(s.top, c.flats[0]);
        assert!(matches!(cyl_boundary(&s, Side::Src), Err(CylError::ZeroCylinder)));

        let c = contraction_cylinder(3, b()).unwrap();
        let nf = |t: &Term| crate::rewrite::nf(&c.ctx, t);
        for outer in [Side::Src, Side::Tgt] {
            let a = cyl_boundary(&cyl_boundary(&c, Side::Src).unwrap(), outer).unwrap();
            let z = cyl_boundary(&cyl_boundary(&c, Side::Tgt).unwrap(), outer).unwrap();
            assert_eq!(nf(&a.top), nf(&z.top));
            assert_eq!(nf(&a.from), nf(&z.from));
            assert_eq!(nf(&a.to), nf(&z.to));
            assert_eq!(a.flats, z.flats);
            assert_eq!(a.sharps, z.sharps);
        }
    }

    #[test]
    fn lemma_small_cases() {
        let items = verify_lemma_target_cyl(3, b(), &SearchBudget::default()).unwrap();
        assert!(items.iter().all(LemmaItem::ok));
        assert_eq!(items[0].outcome.trace_len, 0);
        assert!(items[3].outcome.trace_len >= 3);
        let items = verify_lemma_comp_cyl(3, b(), &SearchBudget::default()).unwrap();
        for it in &items {
            assert!(it.ok(), "{}", serde_json::to_string(it).unwrap());
        }
    }

    #[test]
    fn witness() {
        for n in [0, 1, 4] {
            let w = contractibility_witness(n, b(), &SearchBudget::default()).unwrap();
            assert!(w.id_endpoint && w.const_endpoint);
        }
    }
}
