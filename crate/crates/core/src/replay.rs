//! Replays rewriting certificates, checking that every step is an instance
//! of its axiom scheme. Shares only the term representation and the context
//! with the engine that produced the certificate.

use thiserror::Error;

use crate::rewrite::{nf, Dir, Rule, Step};
use crate::terms::{Context, Term};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReplayError {
    #[error("step {index}: no subterm `{expected}` at the recorded position")]
    Mismatch { index: usize, expected: String },
    #[error("step {index}: not an instance of {rule}: {detail}")]
    NotAnInstance {
        index: usize,
        rule: &'static str,
        detail: String,
    },
    #[error("replay ends at `{got}` instead of `{want}`")]
    WrongEnd { got: String, want: String },
}

fn dimension(ctx: &Context, t: &Term) -> Option<usize> {
    match t {
        Term::Gen(c) => ctx.get(c).map(|i| i.dim),
        Term::Id(x) => dimension(ctx, x).map(|d| d + 1),
        Term::Inv(x) => dimension(ctx, x),
        Term::Comp(_, u, v) => {
            let (a, b) = (dimension(ctx, u)?, dimension(ctx, v)?);
            (a == b).then_some(a)
        }
    }
}

fn face(ctx: &Context, t: &Term, src: bool) -> Option<Term> {
    match t {
        Term::Gen(c) => {
            let i = ctx.get(c)?;
            if src {
                i.src.clone()
            } else {
                i.tgt.clone()
            }
        }
        Term::Id(x) => Some((**x).clone()),
        Term::Inv(x) => face(ctx, x, !src),
        Term::Comp(j, u, v) => {
            let m = dimension(ctx, t)?;
            if j + 1 == m {
                if src {
                    face(ctx, v, true)
                } else {
                    face(ctx, u, false)
                }
            } else {
                Some(Term::comp(*j, face(ctx, u, src)?, face(ctx, v, src)?))
            }
        }
    }
}

fn face_to(ctx: &Context, t: &Term, k: usize, src: bool) -> Option<Term> {
    let mut d = dimension(ctx, t)?;
    let mut cur = t.clone();
    while d > k {
        cur = face(ctx, &cur, src)?;
        d -= 1;
    }
    Some(cur)
}

/// If `t` is degenerate above dimension `k`, the `k`-dimensional term it is
/// an identity on. Identities distribute over composites below `k`.
fn degenerate_base(ctx: &Context, t: &Term, k: usize) -> Option<Term> {
    let d = dimension(ctx, t)?;
    if d == k {
        return Some(t.clone());
    }
    if d < k {
        return None;
    }
    match t {
        Term::Id(x) => degenerate_base(ctx, x, k),
        Term::Comp(i, a, b) if *i < k => Some(Term::comp(
            *i,
            degenerate_base(ctx, a, k)?,
            degenerate_base(ctx, b, k)?,
        )),
        _ => None,
    }
}

fn mutually_inverse(x: &Term, y: &Term) -> bool {
    *x == Term::inv(y.clone()) || *y == Term::inv(x.clone())
}

fn check(ctx: &Context, s: &Step) -> Result<(), String> {
    let (b, a) = (&s.before, &s.after);
    let fail = |d: &str| Err(d.to_string());
    match s.rule {
        Rule::InvInv => match b {
            Term::Inv(x) if matches!(&**x, Term::Inv(y) if **y == *a) => Ok(()),
            _ => fail("expected inv(inv(t)) -> t"),
        },
        Rule::InvId => match b {
            Term::Inv(x) if matches!(&**x, Term::Id(_)) && **x == *a => Ok(()),
            _ => fail("expected inv(id(t)) -> id(t)"),
        },
        Rule::InvComp | Rule::InvCompLow => {
            let Term::Inv(x) = b else { return fail("not an inverse") };
            let Term::Comp(j, u, v) = &**x else { return fail("not an inverse of a composite") };
            let m = dimension(ctx, x).ok_or("untyped")?;
            let top = j + 1 == m;
            let want = if s.rule == Rule::InvComp {
                if !top {
                    return fail("composite is not along the top level");
                }
                Term::comp(*j, Term::inv((**v).clone()), Term::inv((**u).clone()))
            } else {
                if top {
                    return fail("composite is along the top level");
                }
                Term::comp(*j, Term::inv((**u).clone()), Term::inv((**v).clone()))
            };
            if want == *a {
                Ok(())
            } else {
                fail("wrong result")
            }
        }
        Rule::IdComp => match b {
            Term::Id(x) => match &**x {
                Term::Comp(j, u, v)
                    if *a == Term::comp(*j, Term::id((**u).clone()), Term::id((**v).clone())) =>
                {
                    Ok(())
                }
                _ => fail("expected id(u *j v) -> id(u) *j id(v)"),
            },
            _ => fail("not an identity"),
        },
        Rule::UnitLeft | Rule::UnitRight => {
            let Term::Comp(j, u, v) = b else { return fail("not a composite") };
            let (unit, kept) = if s.rule == Rule::UnitLeft { (u, v) } else { (v, u) };
            if **kept != *a {
                return fail("wrong remaining factor");
            }
            if degenerate_base(ctx, unit, *j).is_none() {
                return fail("removed factor is not an identity at this level");
            }
            Ok(())
        }
        Rule::InvCancel => {
            let Term::Comp(j, u, v) = b else { return fail("not a composite") };
            let (Some(x), Some(y)) = (
                degenerate_base(ctx, u, j + 1),
                degenerate_base(ctx, v, j + 1),
            ) else {
                return fail("factors are not padded cells one level up");
            };
            if !mutually_inverse(&x, &y) {
                return fail("factors are not inverse");
            }
            let m = dimension(ctx, b).ok_or("untyped")?;
            let base = face_to(ctx, v, *j, true).ok_or("untyped")?;
            if Term::id_n(base, m - j) == *a {
                Ok(())
            } else {
                fail("result is not the identity on the source")
            }
        }
        Rule::InvCancelAssoc => {
            let Term::Comp(j, u, rest) = b else { return fail("not a composite") };
            let Term::Comp(k, w, r) = &**rest else { return fail("right factor not a composite") };
            if j != k || **r != *a {
                return fail("shape");
            }
            match (
                degenerate_base(ctx, u, j + 1),
                degenerate_base(ctx, w, j + 1),
            ) {
                (Some(x), Some(y)) if mutually_inverse(&x, &y) => Ok(()),
                _ => fail("factors are not inverse"),
            }
        }
        Rule::Assoc => {
            let Term::Comp(j, l, c) = b else { return fail("not a composite") };
            let Term::Comp(k, x, y) = &**l else { return fail("left factor not a composite") };
            if j == k && *a == Term::comp(*j, (**x).clone(), Term::comp(*j, (**y).clone(), (**c).clone())) {
                Ok(())
            } else {
                fail("shape")
            }
        }
        Rule::Exchange => {
            let Term::Comp(j, l, r) = b else { return fail("not a composite") };
            let (Term::Comp(k, p, q), Term::Comp(k2, x, y)) = (&**l, &**r) else {
                return fail("factors are not composites");
            };
            if k != k2 || k >= j {
                return fail("levels");
            }
            let want = Term::comp(
                *k,
                Term::comp(*j, (**p).clone(), (**x).clone()),
                Term::comp(*j, (**q).clone(), (**y).clone()),
            );
            if want != *a {
                return fail("shape");
            }
            for (left, right) in [(p, x), (q, y)] {
                let s = face_to(ctx, left, *j, true).ok_or("untyped")?;
                let t = face_to(ctx, right, *j, false).ok_or("untyped")?;
                if s != t && nf(ctx, &s) != nf(ctx, &t) {
                    return fail("exchanged composites are not composable");
                }
            }
            Ok(())
        }
    }
}

/// Replays `steps` from `start` and checks that the result is `end`.
pub fn replay(ctx: &Context, start: &Term, steps: &[Step], end: &Term) -> Result<(), ReplayError> {
    let mut cur = start.clone();
    for (index, s) in steps.iter().enumerate() {
        check(ctx, s).map_err(|detail| ReplayError::NotAnInstance {
            index,
            rule: s.rule.name(),
            detail,
        })?;
        let (from, to) = match s.dir {
            Dir::Forward => (&s.before, &s.after),
            Dir::Backward => (&s.after, &s.before),
        };
        if cur.at(&s.path) != Some(from) {
            return Err(ReplayError::Mismatch {
                index,
                expected: from.to_string(),
            });
        }
        cur = cur.replace_at(&s.path, to.clone()).expect("path exists");
    }
    if cur != *end {
        return Err(ReplayError::WrongEnd {
            got: cur.to_string(),
            want: end.to_string(),
        });
    }
    Ok(())
}
