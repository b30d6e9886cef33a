//! Terms of the free strict ω-groupoid on a globular set.
//!
//! `Comp(j, u, v)` composes along dimension `j` with `v` applied first, so
//! `s_j(u) = t_j(v)` and the composite runs from the `v` side to the `u` side.
//! `Inv(t)` is the inverse of an `m`-arrow for composition along `m-1`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::globset::{CellId, DimBound, GlobSet};
use crate::rewrite::{self, EqVerdict, SearchBudget};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Gen(CellId),
    Id(Arc<Term>),
    Comp(usize, Arc<Term>, Arc<Term>),
    Inv(Arc<Term>),
}

impl Term {
    pub fn gen(name: &str) -> Term {
        Term::Gen(CellId::new(name))
    }

    pub fn id(t: Term) -> Term {
        Term::Id(Arc::new(t))
    }

    pub fn inv(t: Term) -> Term {
        Term::Inv(Arc::new(t))
    }

    pub fn comp(j: usize, u: Term, v: Term) -> Term {
        Term::Comp(j, Arc::new(u), Arc::new(v))
    }

    /// `Id` applied `k` times.
    pub fn id_n(t: Term, k: usize) -> Term {
        (0..k).fold(t, |acc, _| Term::id(acc))
    }

    pub fn size(&self) -> usize {
        match self {
            Term::Gen(_) => 1,
            Term::Id(t) | Term::Inv(t) => 1 + t.size(),
            Term::Comp(_, u, v) => 1 + u.size() + v.size(),
        }
    }

    /// Subterm at a child-index path (`Id`/`Inv`: 0; `Comp`: 0 = left, 1 = right).
    pub fn at(&self, path: &[u8]) -> Option<&Term> {
        match path.split_first() {
            None => Some(self),
            Some((&i, rest)) => match (self, i) {
                (Term::Id(t) | Term::Inv(t), 0) => t.at(rest),
                (Term::Comp(_, u, _), 0) => u.at(rest),
                (Term::Comp(_, _, v), 1) => v.at(rest),
                _ => None,
            },
        }
    }

    /// Replaces the subterm at `path`.
    pub fn replace_at(&self, path: &[u8], new: Term) -> Option<Term> {
        match path.split_first() {
            None => Some(new),
            Some((&i, rest)) => match (self, i) {
                (Term::Id(t), 0) => Some(Term::id(t.replace_at(rest, new)?)),
                (Term::Inv(t), 0) => Some(Term::inv(t.replace_at(rest, new)?)),
                (Term::Comp(j, u, v), 0) => {
                    Some(Term::Comp(*j, Arc::new(u.replace_at(rest, new)?), v.clone()))
                }
                (Term::Comp(j, u, v), 1) => {
                    Some(Term::Comp(*j, u.clone(), Arc::new(v.replace_at(rest, new)?)))
                }
                _ => None,
            },
        }
    }

    pub fn generators(&self, out: &mut Vec<CellId>) {
        match self {
            Term::Gen(c) => out.push(c.clone()),
            Term::Id(t) | Term::Inv(t) => t.generators(out),
            Term::Comp(_, u, v) => {
                u.generators(out);
                v.generators(out);
            }
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Gen(c) => write!(f, "{c}"),
            Term::Id(t) => write!(f, "id({t})"),
            Term::Inv(t) => write!(f, "inv({t})"),
            Term::Comp(j, u, v) => write!(f, "({u} *{j} {v})"),
        }
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl Serialize for Term {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Term {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        let surf = parse_surface(&s).map_err(serde::de::Error::custom)?;
        surf.to_raw_term().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TermError {
    #[error("unknown cell `{0}`")]
    UnknownCell(String),
    #[error("not composable at `{at}`: {detail}")]
    CompNotComposable { at: String, detail: String },
    #[error("composability at `{at}` undecided within budget: {detail}")]
    CompUndecided { at: String, detail: String },
    #[error("dimension mismatch at `{at}`: {detail}")]
    DimMismatch { at: String, detail: String },
    #[error("inverse of an object at `{0}`")]
    InvOnObject(String),
    #[error("dimension {dim} exceeds the bound {bound} at `{at}`")]
    DimBoundExceeded { at: String, dim: usize, bound: usize },
    #[error("objects have no boundary: `{0}`")]
    ZeroDimensional(String),
    #[error("incompatible assignment for `{cell}`: {detail}")]
    IncompatibleAssignment { cell: String, detail: String },
    #[error("context mismatch")]
    ContextMismatch,
    #[error("duplicate cell `{0}`")]
    DuplicateCell(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellInfo {
    pub dim: usize,
    pub src: Option<Term>,
    pub tgt: Option<Term>,
}

/// Generating cells with term-valued boundaries. Built from a globular set,
/// possibly extended with formal cells whose boundaries are composite terms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Context {
    cells: BTreeMap<CellId, CellInfo>,
    bound: DimBound,
}

impl Context {
    pub fn from_globset(gs: &GlobSet, bound: DimBound) -> Arc<Context> {
        let cells = gs
            .cells()
            .iter()
            .map(|c| {
                (
                    c.id.clone(),
                    CellInfo {
                        dim: c.dim,
                        src: c.src.clone().map(Term::Gen),
                        tgt: c.tgt.clone().map(Term::Gen),
                    },
                )
            })
            .collect();
        Arc::new(Context { cells, bound })
    }

    pub fn bound(&self) -> DimBound {
        self.bound
    }

    pub fn get(&self, c: &CellId) -> Option<&CellInfo> {
        self.cells.get(c)
    }

    pub fn cells(&self) -> impl Iterator<Item = (&CellId, &CellInfo)> {
        self.cells.iter()
    }

    pub fn cells_of_dim(&self, d: usize) -> impl Iterator<Item = &CellId> {
        self.cells
            .iter()
            .filter(move |(_, i)| i.dim == d)
            .map(|(c, _)| c)
    }

    pub fn contains(&self, c: &CellId) -> bool {
        self.cells.contains_key(c)
    }

    /// Adds a generator with the given (already checked, parallel) boundary.
    pub fn extend(&self, id: CellId, src: &TypedTerm, tgt: &TypedTerm) -> Result<Context, TermError> {
        if self.cells.contains_key(&id) {
            return Err(TermError::DuplicateCell(id.to_string()));
        }
        if src.dim != tgt.dim {
            return Err(TermError::DimMismatch {
                at: id.to_string(),
                detail: format!("boundaries of dimensions {} and {}", src.dim, tgt.dim),
            });
        }
        self.bound
            .check(src.dim + 1)
            .map_err(|_| TermError::DimBoundExceeded {
                at: id.to_string(),
                dim: src.dim + 1,
                bound: self.bound.0,
            })?;
        let mut next = self.clone();
        next.cells.insert(
            id,
            CellInfo {
                dim: src.dim + 1,
                src: Some(src.term.clone()),
                tgt: Some(tgt.term.clone()),
            },
        );
        Ok(next)
    }

    /// Adds a generator without any checks on its boundary.
    pub fn extend_unchecked(&mut self, id: CellId, info: CellInfo) {
        self.cells.insert(id, info);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Src,
    Tgt,
}

impl Side {
    pub fn flip(self) -> Side {
        match self {
            Side::Src => Side::Tgt,
            Side::Tgt => Side::Src,
        }
    }
}

/// Dimension of a term, assuming its generators are in `ctx`.
pub fn dim_of(ctx: &Context, t: &Term) -> Result<usize, TermError> {
    match t {
        Term::Gen(c) => ctx
            .get(c)
            .map(|i| i.dim)
            .ok_or_else(|| TermError::UnknownCell(c.to_string())),
        Term::Id(x) => Ok(dim_of(ctx, x)? + 1),
        Term::Inv(x) => dim_of(ctx, x),
        Term::Comp(_, u, _) => dim_of(ctx, u),
    }
}

/// Syntactic boundary of a term of dimension at least 1; the result is
/// not reduced.
pub fn boundary(ctx: &Context, t: &Term, side: Side) -> Result<Term, TermError> {
    match t {
        Term::Gen(c) => {
            let info = ctx
                .get(c)
                .ok_or_else(|| TermError::UnknownCell(c.to_string()))?;
            let b = match side {
                Side::Src => &info.src,
                Side::Tgt => &info.tgt,
            };
            b.clone()
                .ok_or_else(|| TermError::ZeroDimensional(t.to_string()))
        }
        Term::Id(x) => Ok((**x).clone()),
        Term::Inv(x) => boundary(ctx, x, side.flip()),
        Term::Comp(j, u, v) => {
            let m = dim_of(ctx, u)?;
            if m == 0 {
                return Err(TermError::ZeroDimensional(t.to_string()));
            }
            if *j + 1 == m {
                match side {
                    Side::Src => boundary(ctx, v, Side::Src),
                    Side::Tgt => boundary(ctx, u, Side::Tgt),
                }
            } else {
                Ok(Term::comp(
                    *j,
                    boundary(ctx, u, side)?,
                    boundary(ctx, v, side)?,
                ))
            }
        }
    }
}

/// `s_k` / `t_k`: the boundary iterated down to dimension `k`.
pub fn boundary_to(ctx: &Context, t: &Term, k: usize, side: Side) -> Result<Term, TermError> {
    let mut d = dim_of(ctx, t)?;
    let mut cur = t.clone();
    while d > k {
        cur = boundary(ctx, &cur, side)?;
        d -= 1;
    }
    Ok(cur)
}

/// A type-checked term together with its context.
#[derive(Clone, Debug)]
pub struct TypedTerm {
    pub term: Term,
    pub dim: usize,
    pub src: Option<Term>,
    pub tgt: Option<Term>,
    pub ctx: Arc<Context>,
}

impl TypedTerm {
    pub fn boundary(&self, side: Side) -> Result<TypedTerm, TermError> {
        let b = match side {
            Side::Src => self.src.clone(),
            Side::Tgt => self.tgt.clone(),
        }
        .ok_or_else(|| TermError::ZeroDimensional(self.term.to_string()))?;
        TypedTerm::trusted(self.ctx.clone(), b)
    }

    /// Wraps a term known to be well typed (e.g. produced by a rewrite step).
    pub fn trusted(ctx: Arc<Context>, term: Term) -> Result<TypedTerm, TermError> {
        let dim = dim_of(&ctx, &term)?;
        let (src, tgt) = if dim == 0 {
            (None, None)
        } else {
            (
                Some(boundary(&ctx, &term, Side::Src)?),
                Some(boundary(&ctx, &term, Side::Tgt)?),
            )
        };
        Ok(TypedTerm {
            term,
            dim,
            src,
            tgt,
            ctx,
        })
    }
}

impl fmt::Display for TypedTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.term)
    }
}

/// Type checks with the default search budget.
pub fn type_check(t: &Term, ctx: &Arc<Context>) -> Result<TypedTerm, TermError> {
    type_check_with(t, ctx, &SearchBudget::default())
}

/// Type checks a term; composability is decided by the equality engine, and
/// an undecided boundary comparison counts as not composable.
pub fn type_check_with(
    t: &Term,
    ctx: &Arc<Context>,
    budget: &SearchBudget,
) -> Result<TypedTerm, TermError> {
    check_rec(t, ctx, budget)?;
    TypedTerm::trusted(ctx.clone(), t.clone())
}

fn check_rec(t: &Term, ctx: &Arc<Context>, budget: &SearchBudget) -> Result<usize, TermError> {
    let dim = match t {
        Term::Gen(c) => ctx
            .get(c)
            .map(|i| i.dim)
            .ok_or_else(|| TermError::UnknownCell(c.to_string()))?,
        Term::Id(x) => check_rec(x, ctx, budget)? + 1,
        Term::Inv(x) => {
            let d = check_rec(x, ctx, budget)?;
            if d == 0 {
                return Err(TermError::InvOnObject(t.to_string()));
            }
            d
        }
        Term::Comp(j, u, v) => {
            let du = check_rec(u, ctx, budget)?;
            let dv = check_rec(v, ctx, budget)?;
            if du != dv {
                return Err(TermError::DimMismatch {
                    at: t.to_string(),
                    detail: format!("factors of dimensions {du} and {dv}"),
                });
            }
            if *j >= du {
                return Err(TermError::CompNotComposable {
                    at: t.to_string(),
                    detail: format!("level {j} is not below dimension {du}"),
                });
            }
            let a = boundary_to(ctx, u, *j, Side::Src)?;
            let b = boundary_to(ctx, v, *j, Side::Tgt)?;
            match rewrite::equal_terms(ctx, &a, &b, budget) {
                EqVerdict::Equal(_) => {}
                EqVerdict::Unknown { reason } => {
                    return Err(TermError::CompUndecided {
                        at: t.to_string(),
                        detail: format!("source {a} of the left factor vs target {b} of the right factor: {reason}"),
                    })
                }
                other => {
                    return Err(TermError::CompNotComposable {
                        at: t.to_string(),
                        detail: format!(
                            "source {a} of the left factor vs target {b} of the right factor: {}",
                            other.label()
                        ),
                    })
                }
            }
            du
        }
    };
    if dim > ctx.bound().0 {
        return Err(TermError::DimBoundExceeded {
            at: t.to_string(),
            dim,
            bound: ctx.bound().0,
        });
    }
    Ok(dim)
}

/// `u♭_i` / `u♯_i`: iterated boundary for `i <= dim`, identity padding above.
pub fn iterated_boundary(t: &TypedTerm, i: usize, side: Side) -> Term {
    if i <= t.dim {
        boundary_to(&t.ctx, &t.term, i, side).expect("typed term has boundaries")
    } else {
        Term::id_n(t.term.clone(), i - t.dim)
    }
}

/// Signed counts of top-dimensional generators. Zero entries are kept but
/// ignored by equality.
#[derive(Debug, Clone, Default, Serialize)]
pub struct GenCount {
    pub counts: BTreeMap<CellId, i64>,
}

impl GenCount {
    pub fn nonzero(&self) -> BTreeMap<CellId, i64> {
        self.counts
            .iter()
            .filter(|(_, &v)| v != 0)
            .map(|(k, &v)| (k.clone(), v))
            .collect()
    }
}

impl PartialEq for GenCount {
    fn eq(&self, other: &Self) -> bool {
        self.nonzero() == other.nonzero()
    }
}

impl Eq for GenCount {}

pub fn signed_gen_count(ctx: &Context, t: &Term) -> GenCount {
    fn go(t: &Term, sign: i64, out: &mut BTreeMap<CellId, i64>) {
        match t {
            Term::Gen(c) => *out.entry(c.clone()).or_insert(0) += sign,
            Term::Id(_) => {}
            Term::Inv(x) => go(x, -sign, out),
            Term::Comp(_, u, v) => {
                go(u, sign, out);
                go(v, sign, out);
            }
        }
    }
    let _ = ctx;
    let mut counts = BTreeMap::new();
    go(t, 1, &mut counts);
    GenCount { counts }
}

/// Replaces generators by terms; unmapped generators are kept.
pub fn substitute(t: &Term, rho: &BTreeMap<CellId, Term>) -> Term {
    match t {
        Term::Gen(c) => rho.get(c).cloned().unwrap_or_else(|| t.clone()),
        Term::Id(x) => Term::id(substitute(x, rho)),
        Term::Inv(x) => Term::inv(substitute(x, rho)),
        Term::Comp(j, u, v) => Term::comp(*j, substitute(u, rho), substitute(v, rho)),
    }
}

/// Validates an assignment from the generators of `src` to terms over
/// `dst`: dimensions are preserved and boundaries are carried to
/// engine-equal boundaries.
pub fn validate_assignment(
    src: &Context,
    dst: &Arc<Context>,
    rho: &BTreeMap<CellId, Term>,
    budget: &SearchBudget,
) -> Result<(), TermError> {
    for (c, info) in src.cells() {
        let img = rho.get(c).ok_or_else(|| TermError::IncompatibleAssignment {
            cell: c.to_string(),
            detail: "no image".into(),
        })?;
        let typed = type_check_with(img, dst, budget).map_err(|e| {
            TermError::IncompatibleAssignment {
                cell: c.to_string(),
                detail: e.to_string(),
            }
        })?;
        if typed.dim != info.dim {
            return Err(TermError::IncompatibleAssignment {
                cell: c.to_string(),
                detail: format!("dimension {} for a {}-cell", typed.dim, info.dim),
            });
        }
        for (side, b) in [(Side::Src, &info.src), (Side::Tgt, &info.tgt)] {
            if let Some(b) = b {
                let want = substitute(b, rho);
                let got = boundary(dst, img, side)?;
                if !rewrite::equal_terms(dst, &want, &got, budget).is_equal() {
                    return Err(TermError::IncompatibleAssignment {
                        cell: c.to_string(),
                        detail: format!("{side:?} boundary {got} should be {want}"),
                    });
                }
            }
        }
    }
    Ok(())
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("parse error at line {line}, column {col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

/// Surface syntax: names, `id(..)`, `inv(..)`, `1_x`, and heterogeneous
/// composites `u *k v`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Surface {
    Name(String),
    Id(Box<Surface>),
    Inv(Box<Surface>),
    Unit(Box<Surface>),
    Comp(usize, Box<Surface>, Box<Surface>),
}

impl Surface {
    /// Reads the surface tree as a term without any padding.
    pub fn to_raw_term(&self) -> Result<Term, TermError> {
        Ok(match self {
            Surface::Name(n) => Term::gen(n),
            Surface::Id(x) | Surface::Unit(x) => Term::id(x.to_raw_term()?),
            Surface::Inv(x) => Term::inv(x.to_raw_term()?),
            Surface::Comp(j, u, v) => Term::comp(*j, u.to_raw_term()?, v.to_raw_term()?),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(usize),
    Star,
    LParen,
    RParen,
    UnitPrefix,
    End,
}

struct Lexer {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
}

fn lex(text: &str) -> Result<Lexer, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut toks = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        if c == '\n' {
            line += 1;
            col = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        let start = i;
        let tok = if c.is_ascii_alphabetic() {
            while i < chars.len()
                && (chars[i].is_ascii_alphanumeric() || matches!(chars[i], '_' | '\'' | '.'))
            {
                i += 1;
            }
            Tok::Ident(chars[start..i].iter().collect())
        } else if c == '1' && chars.get(i + 1) == Some(&'_') {
            i += 2;
            Tok::UnitPrefix
        } else if c.is_ascii_digit() {
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            Tok::Int(s.parse().map_err(|_| ParseError {
                line: l0,
                col: c0,
                msg: format!("integer `{s}` out of range"),
            })?)
        } else {
            i += 1;
            match c {
                '*' => Tok::Star,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                _ => {
                    return Err(ParseError {
                        line: l0,
                        col: c0,
                        msg: format!("unexpected character `{c}`"),
                    })
                }
            }
        };
        col += i - start;
        toks.push((tok, l0, c0));
    }
    toks.push((Tok::End, line, col));
    Ok(Lexer { toks, pos: 0 })
}

impl Lexer {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.pos + 1).min(self.toks.len() - 1)].0
    }

    fn err(&self, msg: &str) -> ParseError {
        let (_, line, col) = self.toks[self.pos];
        ParseError {
            line,
            col,
            msg: msg.to_string(),
        }
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(self.err(&format!("expected {what}")))
        }
    }

    fn expr(&mut self) -> Result<Surface, ParseError> {
        let mut lhs = self.atom()?;
        while *self.peek() == Tok::Star {
            self.bump();
            let level = match self.bump() {
                Tok::Int(k) => k,
                _ => {
                    return Err(self.err("expected a composition level after `*`"));
                }
            };
            let rhs = self.atom()?;
            lhs = Surface::Comp(level, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn atom(&mut self) -> Result<Surface, ParseError> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                if (name == "id" || name == "inv") && *self.peek2() == Tok::LParen {
                    self.bump();
                    self.bump();
                    let inner = self.expr()?;
                    self.expect(Tok::RParen, "`)`")?;
                    Ok(if name == "id" {
                        Surface::Id(Box::new(inner))
                    } else {
                        Surface::Inv(Box::new(inner))
                    })
                } else {
                    self.bump();
                    Ok(Surface::Name(name))
                }
            }
            Tok::UnitPrefix => {
                self.bump();
                Ok(Surface::Unit(Box::new(self.atom()?)))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Tok::End => Err(self.err("unexpected end of input")),
            _ => Err(self.err("expected a term")),
        }
    }
}

pub fn parse_surface(text: &str) -> Result<Surface, ParseError> {
    let mut lx = lex(text)?;
    let e = lx.expr()?;
    if *lx.peek() != Tok::End {
        return Err(lx.err("trailing input"));
    }
    Ok(e)
}

/// Resolves surface sugar: heterogeneous composites are padded with
/// identities up to the larger dimension.
pub fn elaborate(s: &Surface, ctx: &Context) -> Result<Term, TermError> {
    elab(s, ctx).map(|(t, _)| t)
}

/// Elaborates and then pads the result with identities up to dimension `dim`.
pub fn elaborate_at(s: &Surface, ctx: &Context, dim: usize) -> Result<Term, TermError> {
    let (t, d) = elab(s, ctx)?;
    if d > dim {
        return Err(TermError::DimMismatch {
            at: t.to_string(),
            detail: format!("dimension {d} above requested {dim}"),
        });
    }
    Ok(Term::id_n(t, dim - d))
}

fn elab(s: &Surface, ctx: &Context) -> Result<(Term, usize), TermError> {
    match s {
        Surface::Name(n) => {
            let c = CellId::new(n);
            let d = ctx
                .get(&c)
                .map(|i| i.dim)
                .ok_or_else(|| TermError::UnknownCell(n.clone()))?;
            Ok((Term::Gen(c), d))
        }
        Surface::Id(x) | Surface::Unit(x) => {
            let (t, d) = elab(x, ctx)?;
            Ok((Term::id(t), d + 1))
        }
        Surface::Inv(x) => {
            let (t, d) = elab(x, ctx)?;
            if d == 0 {
                return Err(TermError::InvOnObject(t.to_string()));
            }
            Ok((Term::inv(t), d))
        }
        Surface::Comp(k, u, v) => {
            let (tu, du) = elab(u, ctx)?;
            let (tv, dv) = elab(v, ctx)?;
            if *k >= du.min(dv) {
                return Err(TermError::CompNotComposable {
                    at: format!("({tu} *{k} {tv})"),
                    detail: format!("level {k} is not below dimensions {du} and {dv}"),
                });
            }
            let m = du.max(dv);
            Ok((
                Term::comp(*k, Term::id_n(tu, m - du), Term::id_n(tv, m - dv)),
                m,
            ))
        }
    }
}

/// `a *k b` with identity padding of the lower-dimensional factor.
pub fn comp_padded(ctx: &Context, k: usize, a: Term, b: Term) -> Result<Term, TermError> {
    let (da, db) = (dim_of(ctx, &a)?, dim_of(ctx, &b)?);
    let m = da.max(db);
    Ok(Term::comp(k, Term::id_n(a, m - da), Term::id_n(b, m - db)))
}

/// Parses, elaborates and type checks surface text.
pub fn parse_term(text: &str, ctx: &Arc<Context>, budget: &SearchBudget) -> Result<TypedTerm, TermError> {
    let s = parse_surface(text)?;
    let t = elaborate(&s, ctx)?;
    type_check_with(&t, ctx, budget)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::globset::{globular_sum, Table};

    fn ctx(table: &str) -> Arc<Context> {
        let g = globular_sum(&Table::parse(table).unwrap(), DimBound::default()).unwrap();
        Context::from_globset(&g.gs, DimBound::default())
    }

    fn g(s: &str) -> Term {
        Term::gen(s)
    }

    // In [1,1;0]: a = u2 : s2_0 -> s1_0 and b = u1 : s1_0 -> t1_0.
    #[test]
    fn boundary_examples() {
        let c = ctx("1 1 / 0");
        let (a, b) = (g("u2"), g("u1"));
        let ba = Term::comp(0, b.clone(), a.clone());
        assert_eq!(boundary(&c, &ba, Side::Src).unwrap(), g("s2_0"));
        assert_eq!(boundary(&c, &ba, Side::Tgt).unwrap(), g("t1_0"));
        assert_eq!(boundary(&c, &Term::id(a.clone()), Side::Src).unwrap(), a);
        assert_eq!(
            boundary(&c, &Term::inv(a.clone()), Side::Src).unwrap(),
            g("s1_0")
        );
        assert!(matches!(
            boundary(&c, &g("s1_0"), Side::Src),
            Err(TermError::ZeroDimensional(_))
        ));
    }

    #[test]
    fn type_check_examples() {
        let c = ctx("1 1 / 0");
        let (a, b) = (g("u2"), g("u1"));
        assert!(matches!(
            type_check(&Term::comp(0, a.clone(), b.clone()), &c),
            Err(TermError::CompNotComposable { .. })
        ));
        let tt = type_check(&Term::comp(0, b, a.clone()), &c).unwrap();
        assert_eq!(tt.dim, 1);
        assert_eq!(tt.src, Some(g("s2_0")));
        assert_eq!(tt.tgt, Some(g("t1_0")));
        assert!(matches!(
            type_check(&Term::inv(g("s1_0")), &c),
            Err(TermError::InvOnObject(_))
        ));
        assert!(matches!(
            type_check(&g("nope"), &c),
            Err(TermError::UnknownCell(_))
        ));
        assert!(matches!(
            type_check(&Term::comp(0, Term::id(a.clone()), a), &c),
            Err(TermError::DimMismatch { .. })
        ));
        let deep = Term::id_n(g("u1"), 6);
        assert!(matches!(
            type_check(&deep, &c),
            Err(TermError::DimBoundExceeded { .. })
        ));
    }

    #[test]
    fn elaboration_pads() {
        // [2,1;0]: u1 is a 2-cell, u2 a 1-cell glued below it
        let c = ctx("2 1 / 0");
        let s = parse_surface("s1_1 *0 u1").unwrap();
        assert_eq!(
            elaborate(&s, &c).unwrap(),
            Term::comp(0, Term::id(g("s1_1")), g("u1"))
        );
        let s = parse_surface("1_x").unwrap();
        let mut cc = (*c).clone();
        cc.extend_unchecked(
            CellId::new("x"),
            CellInfo {
                dim: 0,
                src: None,
                tgt: None,
            },
        );
        assert_eq!(
            elaborate_at(&s, &cc, 2).unwrap(),
            Term::id(Term::id(g("x")))
        );
        let s = parse_surface("u1 *0 u2").unwrap();
        let t = elaborate(&s, &c).unwrap();
        assert_eq!(t, Term::comp(0, g("u1"), Term::id(g("u2"))));
        type_check(&t, &c).unwrap();
    }

    #[test]
    fn parser() {
        assert_eq!(
            parse_surface("inv(a) *0 a").unwrap(),
            Surface::Comp(
                0,
                Box::new(Surface::Inv(Box::new(Surface::Name("a".into())))),
                Box::new(Surface::Name("a".into()))
            )
        );
        assert_eq!(
            parse_surface("id(id(x))").unwrap(),
            Surface::Id(Box::new(Surface::Id(Box::new(Surface::Name("x".into())))))
        );
        let e = parse_surface("a *").unwrap_err();
        assert_eq!((e.line, e.col), (1, 4));
        let e = parse_surface("a *0\n  (b").unwrap_err();
        assert_eq!(e.line, 2);
        // left associative
        assert_eq!(
            parse_surface("a*0b *0 c").unwrap(),
            Surface::Comp(
                0,
                Box::new(Surface::Comp(
                    0,
                    Box::new(Surface::Name("a".into())),
                    Box::new(Surface::Name("b".into()))
                )),
                Box::new(Surface::Name("c".into()))
            )
        );
        assert!(parse_surface("a b").is_err());
        assert!(parse_surface("a # b").is_err());
    }

    #[test]
    fn printing_round_trips() {
        let t = Term::comp(1, Term::inv(g("a")), Term::id(Term::comp(0, g("b"), g("c"))));
        let back = parse_surface(&t.to_string()).unwrap().to_raw_term().unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn gen_counts() {
        let c = ctx("1 1 / 0");
        let (a, b) = (g("u2"), g("u1"));
        let cnt = signed_gen_count(&c, &Term::comp(0, Term::inv(a.clone()), a.clone()));
        assert_eq!(cnt.counts.get(&CellId::new("u2")), Some(&0));
        assert_eq!(cnt, GenCount::default());
        let cnt = signed_gen_count(&c, &Term::comp(0, b, a.clone()));
        assert_eq!(cnt.nonzero().len(), 2);
        assert!(signed_gen_count(&c, &Term::id(a)).counts.is_empty());
    }

    #[test]
    fn substitution() {
        let d1 = ctx("1");
        let path = ctx("1 1 / 0");
        let ba = Term::comp(0, g("u1"), g("u2"));
        let mut rho = BTreeMap::new();
        rho.insert(CellId::new("u1"), ba.clone());
        rho.insert(CellId::new("s1_0"), g("s2_0"));
        rho.insert(CellId::new("t1_0"), g("t1_0"));
        validate_assignment(&d1, &path, &rho, &SearchBudget::default()).unwrap();
        assert_eq!(
            substitute(&Term::inv(g("u1")), &rho),
            Term::inv(ba.clone())
        );
        assert_eq!(substitute(&Term::id(g("u1")), &rho), Term::id(ba));
        rho.insert(CellId::new("s1_0"), g("s1_0"));
        assert!(validate_assignment(&d1, &path, &rho, &SearchBudget::default()).is_err());
    }

    #[test]
    fn iterated_boundaries() {
        let c = ctx("2");
        let u = type_check(&g("u1"), &c).unwrap();
        assert_eq!(iterated_boundary(&u, 1, Side::Src), g("s1_1"));
        assert_eq!(iterated_boundary(&u, 2, Side::Tgt), g("u1"));
        let a = type_check(&g("s1_1"), &c).unwrap();
        assert_eq!(
            iterated_boundary(&a, 3, Side::Tgt),
            Term::id(Term::id(g("s1_1")))
        );
    }
}
