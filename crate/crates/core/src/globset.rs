//! Finite globular sets, disks, spheres, tables of dimensions and globular
//! sums computed as explicit colimits.
//!
//! Cells of a globular sum `G_T` carry canonical names derived from the
//! summand that owns them:
//!
//! * `u{l}` is the top cell of summand `l` (1-based),
//! * `s{l}_{k}` / `t{l}_{k}` are the iterated source / target of `u{l}` in
//!   dimension `k`.
//!
//! A cell shared by several summands keeps the name it has in the summand of
//! lowest index. `disk(n)` uses the names of the width-one table `[n]`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Default bound on every dimension handled by a run.
pub const DEFAULT_DIM_BOUND: usize = 6;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GlobError {
    #[error("table rows have incompatible lengths: {upper} upper entries, {lower} lower entries")]
    Shape { upper: usize, lower: usize },
    #[error("table inequality violated at column {column}: {detail}")]
    Inequality { column: usize, detail: String },
    #[error("dimension {dim} exceeds the configured bound {bound}")]
    DimBoundExceeded { dim: usize, bound: usize },
    #[error("unknown cell `{0}`")]
    UnknownCell(String),
    #[error("duplicate cell `{0}`")]
    DuplicateCell(String),
    #[error("cell `{cell}`: {detail}")]
    InvalidCell { cell: String, detail: String },
    #[error("globular relation fails at cell `{0}`")]
    GlobularRelation(String),
    #[error("map does not commute with boundaries at cell `{0}`")]
    NotAMap(String),
    #[error("domain/codomain mismatch in map composition")]
    DomainMismatch,
    #[error("cannot parse table `{0}`")]
    Parse(String),
}

/// Run-level bound on dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimBound(pub usize);

impl Default for DimBound {
    fn default() -> Self {
        DimBound(DEFAULT_DIM_BOUND)
    }
}

impl DimBound {
    pub fn check(self, dim: usize) -> Result<(), GlobError> {
        if dim > self.0 {
            Err(GlobError::DimBoundExceeded { dim, bound: self.0 })
        } else {
            Ok(())
        }
    }
}

/// Name of a cell, unique within its globular set.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellId(Arc<str>);

impl CellId {
    pub fn new(name: &str) -> Self {
        CellId(Arc::from(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for CellId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for CellId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for CellId {
    fn from(s: &str) -> Self {
        CellId::new(s)
    }
}

impl Serialize for CellId {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for CellId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Ok(CellId::new(&s))
    }
}

/// Width and dimension of a validated table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TableInfo {
    pub width: usize,
    pub dimension: usize,
}

/// Checks the inequality chain `i_l > i'_l < i_{l+1}`.
pub fn validate_table(upper: &[usize], lower: &[usize]) -> Result<TableInfo, GlobError> {
    if upper.is_empty() || lower.len() + 1 != upper.len() {
        return Err(GlobError::Shape {
            upper: upper.len(),
            lower: lower.len(),
        });
    }
    for (l, &low) in lower.iter().enumerate() {
        if upper[l] <= low {
            return Err(GlobError::Inequality {
                column: l + 1,
                detail: format!("{} > {} fails", upper[l], low),
            });
        }
        if low >= upper[l + 1] {
            return Err(GlobError::Inequality {
                column: l + 1,
                detail: format!("{} < {} fails", low, upper[l + 1]),
            });
        }
    }
    let dimension = upper.iter().copied().max().unwrap_or(0);
    Ok(TableInfo {
        width: upper.len(),
        dimension,
    })
}

/// A table of dimensions. Always valid once constructed.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Table {
    upper: Vec<usize>,
    lower: Vec<usize>,
}

impl Table {
    pub fn new(upper: Vec<usize>, lower: Vec<usize>) -> Result<Self, GlobError> {
        validate_table(&upper, &lower)?;
        Ok(Table { upper, lower })
    }

    pub fn disk(n: usize) -> Self {
        Table {
            upper: vec![n],
            lower: vec![],
        }
    }

    pub fn upper(&self) -> &[usize] {
        &self.upper
    }

    pub fn lower(&self) -> &[usize] {
        &self.lower
    }

    pub fn width(&self) -> usize {
        self.upper.len()
    }

    pub fn dimension(&self) -> usize {
        self.upper.iter().copied().max().unwrap_or(0)
    }

    /// Parses `"1 2 / 0"`; a width-one table may omit the slash.
    pub fn parse(text: &str) -> Result<Self, GlobError> {
        let bad = || GlobError::Parse(text.to_string());
        let (up, low) = match text.split_once('/') {
            Some((a, b)) => (a, b),
            None => (text, ""),
        };
        let nums = |s: &str| -> Result<Vec<usize>, GlobError> {
            s.split_whitespace()
                .map(|w| w.parse::<usize>().map_err(|_| bad()))
                .collect()
        };
        let upper = nums(up)?;
        let lower = nums(low)?;
        Table::new(upper, lower)
    }

    /// All valid tables with width in `1..=max_width` and entries `<= max_dim`.
    pub fn enumerate(max_width: usize, max_dim: usize) -> Vec<Table> {
        let mut out = Vec::new();
        for width in 1..=max_width {
            let mut upper = vec![0; width];
            let mut lower = vec![0; width - 1];
            enumerate_rec(&mut upper, &mut lower, 0, max_dim, &mut out);
        }
        out
    }
}

fn enumerate_rec(
    upper: &mut Vec<usize>,
    lower: &mut Vec<usize>,
    pos: usize,
    max_dim: usize,
    out: &mut Vec<Table>,
) {
    if pos == upper.len() {
        if validate_table(upper, lower).is_ok() {
            out.push(Table {
                upper: upper.clone(),
                lower: lower.clone(),
            });
        }
        return;
    }
    for d in 0..=max_dim {
        upper[pos] = d;
        if pos == 0 {
            enumerate_rec(upper, lower, pos + 1, max_dim, out);
        } else {
            for low in 0..d.min(upper[pos - 1]) {
                lower[pos - 1] = low;
                enumerate_rec(upper, lower, pos + 1, max_dim, out);
            }
        }
    }
}

impl fmt::Display for Table {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[usize]| {
            v.iter()
                .map(|d| d.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        };
        if self.lower.is_empty() {
            write!(f, "{}", join(&self.upper))
        } else {
            write!(f, "{} / {}", join(&self.upper), join(&self.lower))
        }
    }
}

impl fmt::Debug for Table {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self)
    }
}

impl Serialize for Table {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Table {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Table::parse(&s).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cell {
    pub id: CellId,
    pub dim: usize,
    pub src: Option<CellId>,
    pub tgt: Option<CellId>,
}

/// A finite globular set. Cells are kept sorted by `(dim, id)`.
#[derive(Clone)]
pub struct GlobSet {
    cells: Vec<Cell>,
    src_idx: Vec<Option<usize>>,
    tgt_idx: Vec<Option<usize>>,
    index: HashMap<CellId, usize>,
}

impl PartialEq for GlobSet {
    fn eq(&self, other: &Self) -> bool {
        self.cells == other.cells
    }
}

impl Eq for GlobSet {}

impl fmt::Debug for GlobSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.cells.iter()).finish()
    }
}

impl GlobSet {
    /// Builds and validates a globular set.
    pub fn new(mut cells: Vec<Cell>) -> Result<Self, GlobError> {
        cells.sort_by(|a, b| (a.dim, &a.id).cmp(&(b.dim, &b.id)));
        let mut index = HashMap::with_capacity(cells.len());
        for (i, c) in cells.iter().enumerate() {
            if index.insert(c.id.clone(), i).is_some() {
                return Err(GlobError::DuplicateCell(c.id.to_string()));
            }
        }
        let lookup = |c: &Cell, b: &Option<CellId>, what: &str| -> Result<Option<usize>, GlobError> {
            match (c.dim, b) {
                (0, None) => Ok(None),
                (0, Some(_)) => Err(GlobError::InvalidCell {
                    cell: c.id.to_string(),
                    detail: format!("object with a {what}"),
                }),
                (_, None) => Err(GlobError::InvalidCell {
                    cell: c.id.to_string(),
                    detail: format!("missing {what}"),
                }),
                (d, Some(b)) => {
                    let i = *index
                        .get(b)
                        .ok_or_else(|| GlobError::UnknownCell(b.to_string()))?;
                    if cells[i].dim + 1 != d {
                        return Err(GlobError::InvalidCell {
                            cell: c.id.to_string(),
                            detail: format!("{what} `{b}` has the wrong dimension"),
                        });
                    }
                    Ok(Some(i))
                }
            }
        };
        let mut src_idx = Vec::with_capacity(cells.len());
        let mut tgt_idx = Vec::with_capacity(cells.len());
        for c in &cells {
            src_idx.push(lookup(c, &c.src, "source")?);
            tgt_idx.push(lookup(c, &c.tgt, "target")?);
        }
        let gs = GlobSet {
            cells,
            src_idx,
            tgt_idx,
            index,
        };
        for i in 0..gs.cells.len() {
            if gs.cells[i].dim >= 2 {
                let (s, t) = (gs.src_idx[i].unwrap(), gs.tgt_idx[i].unwrap());
                if gs.src_idx[s] != gs.src_idx[t] || gs.tgt_idx[s] != gs.tgt_idx[t] {
                    return Err(GlobError::GlobularRelation(gs.cells[i].id.to_string()));
                }
            }
        }
        Ok(gs)
    }

    pub fn empty() -> Self {
        GlobSet::new(Vec::new()).expect("empty globular set")
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn get(&self, id: &CellId) -> Option<&Cell> {
        self.index.get(id).map(|&i| &self.cells[i])
    }

    pub fn index_of(&self, id: &CellId) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn cell(&self, i: usize) -> &Cell {
        &self.cells[i]
    }

    pub fn src_of(&self, i: usize) -> Option<usize> {
        self.src_idx[i]
    }

    pub fn tgt_of(&self, i: usize) -> Option<usize> {
        self.tgt_idx[i]
    }

    pub fn dimension(&self) -> Option<usize> {
        self.cells.iter().map(|c| c.dim).max()
    }

    pub fn cells_of_dim(&self, dim: usize) -> impl Iterator<Item = &Cell> {
        self.cells.iter().filter(move |c| c.dim == dim)
    }

    pub fn count_dim(&self, dim: usize) -> usize {
        self.cells_of_dim(dim).count()
    }

    /// Checks the globular relations on every cell of dimension at least 2.
    pub fn globular_relations_hold(&self) -> bool {
        (0..self.cells.len()).all(|i| {
            self.cells[i].dim < 2 || {
                let (s, t) = (self.src_idx[i].unwrap(), self.tgt_idx[i].unwrap());
                self.src_idx[s] == self.src_idx[t] && self.tgt_idx[s] == self.tgt_idx[t]
            }
        })
    }

    /// Disjoint union; cells of `other` are renamed with `prefix`.
    pub fn disjoint_union(&self, other: &GlobSet, prefix: &str) -> Result<GlobSet, GlobError> {
        let rn = |c: &CellId| CellId::new(&format!("{prefix}{c}"));
        let mut cells = self.cells.clone();
        cells.extend(other.cells.iter().map(|c| Cell {
            id: rn(&c.id),
            dim: c.dim,
            src: c.src.as_ref().map(rn),
            tgt: c.tgt.as_ref().map(rn),
        }));
        GlobSet::new(cells)
    }

    /// Restriction to cells of dimension `<= dim`.
    pub fn truncate(&self, dim: usize) -> GlobSet {
        GlobSet::new(self.cells.iter().filter(|c| c.dim <= dim).cloned().collect())
            .expect("truncation of a globular set")
    }
}

#[derive(Serialize, Deserialize)]
struct GlobSetJson {
    cells: Vec<Cell>,
}

impl Serialize for GlobSet {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        GlobSetJson {
            cells: self.cells.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for GlobSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = GlobSetJson::deserialize(d)?;
        GlobSet::new(raw.cells).map_err(serde::de::Error::custom)
    }
}

fn disk_cell_name(summand: usize, dim: usize, side: Side) -> CellId {
    match side {
        Side::Top => CellId::new(&format!("u{summand}")),
        Side::Src => CellId::new(&format!("s{summand}_{dim}")),
        Side::Tgt => CellId::new(&format!("t{summand}_{dim}")),
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Side {
    Src,
    Tgt,
    Top,
}

fn named_disk(n: usize, summand: usize) -> GlobSet {
    let mut cells = Vec::with_capacity(2 * n + 1);
    for k in 0..n {
        for side in [Side::Src, Side::Tgt] {
            let (src, tgt) = if k == 0 {
                (None, None)
            } else {
                (
                    Some(disk_cell_name(summand, k - 1, Side::Src)),
                    Some(disk_cell_name(summand, k - 1, Side::Tgt)),
                )
            };
            cells.push(Cell {
                id: disk_cell_name(summand, k, side),
                dim: k,
                src,
                tgt,
            });
        }
    }
    cells.push(Cell {
        id: disk_cell_name(summand, n, Side::Top),
        dim: n,
        src: (n > 0).then(|| disk_cell_name(summand, n - 1, Side::Src)),
        tgt: (n > 0).then(|| disk_cell_name(summand, n - 1, Side::Tgt)),
    });
    GlobSet::new(cells).expect("disk is a globular set")
}

/// The representable globular set `D_n`.
pub fn disk(n: usize, bound: DimBound) -> Result<GlobSet, GlobError> {
    bound.check(n)?;
    Ok(named_disk(n, 1))
}

/// The boundary `S_m` of `D_{m+1}`; `m = -1` gives the empty globular set.
pub fn sphere(m: isize, bound: DimBound) -> Result<GlobSet, GlobError> {
    if m < -1 {
        return Err(GlobError::Parse(format!("sphere dimension {m}")));
    }
    let n = (m + 1) as usize;
    bound.check(n)?;
    let d = named_disk(n, 1);
    let top = disk_cell_name(1, n, Side::Top);
    Ok(GlobSet::new(d.cells.into_iter().filter(|c| c.id != top).collect())
        .expect("sphere is a globular set"))
}

/// A morphism of globular sets, stored as an index map.
#[derive(Clone)]
pub struct GlobMap {
    dom: Arc<GlobSet>,
    cod: Arc<GlobSet>,
    img: Vec<usize>,
}

impl PartialEq for GlobMap {
    fn eq(&self, other: &Self) -> bool {
        self.img == other.img
            && (Arc::ptr_eq(&self.dom, &other.dom) || self.dom == other.dom)
            && (Arc::ptr_eq(&self.cod, &other.cod) || self.cod == other.cod)
    }
}

impl Eq for GlobMap {}

impl fmt::Debug for GlobMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.assignment()).finish()
    }
}

impl GlobMap {
    /// Validates dimension preservation and commutation with boundaries.
    pub fn new(
        dom: Arc<GlobSet>,
        cod: Arc<GlobSet>,
        assignment: &BTreeMap<CellId, CellId>,
    ) -> Result<Self, GlobError> {
        let mut img = Vec::with_capacity(dom.len());
        for c in dom.cells() {
            let target = assignment
                .get(&c.id)
                .ok_or_else(|| GlobError::UnknownCell(c.id.to_string()))?;
            let j = cod
                .index_of(target)
                .ok_or_else(|| GlobError::UnknownCell(target.to_string()))?;
            img.push(j);
        }
        let m = GlobMap { dom, cod, img };
        m.validate()?;
        Ok(m)
    }

    pub fn identity(gs: Arc<GlobSet>) -> Self {
        GlobMap {
            img: (0..gs.len()).collect(),
            dom: gs.clone(),
            cod: gs,
        }
    }

    pub fn validate(&self) -> Result<(), GlobError> {
        for (i, &j) in self.img.iter().enumerate() {
            let c = self.dom.cell(i);
            if self.cod.cell(j).dim != c.dim
                || self.dom.src_of(i).map(|s| self.img[s]) != self.cod.src_of(j)
                || self.dom.tgt_of(i).map(|t| self.img[t]) != self.cod.tgt_of(j)
            {
                return Err(GlobError::NotAMap(c.id.to_string()));
            }
        }
        Ok(())
    }

    pub fn domain(&self) -> &Arc<GlobSet> {
        &self.dom
    }

    pub fn codomain(&self) -> &Arc<GlobSet> {
        &self.cod
    }

    pub fn image_index(&self, i: usize) -> usize {
        self.img[i]
    }

    pub fn apply(&self, c: &CellId) -> Option<&CellId> {
        self.dom
            .index_of(c)
            .map(|i| &self.cod.cell(self.img[i]).id)
    }

    pub fn assignment(&self) -> BTreeMap<CellId, CellId> {
        self.img
            .iter()
            .enumerate()
            .map(|(i, &j)| (self.dom.cell(i).id.clone(), self.cod.cell(j).id.clone()))
            .collect()
    }

    /// `self ∘ g`: first `g`, then `self`.
    pub fn compose(&self, g: &GlobMap) -> Result<GlobMap, GlobError> {
        if !(Arc::ptr_eq(&g.cod, &self.dom) || *g.cod == *self.dom) {
            return Err(GlobError::DomainMismatch);
        }
        Ok(GlobMap {
            dom: g.dom.clone(),
            cod: self.cod.clone(),
            img: g.img.iter().map(|&j| self.img[j]).collect(),
        })
    }

    pub fn is_bijective(&self) -> bool {
        if self.dom.len() != self.cod.len() {
            return false;
        }
        let mut seen = vec![false; self.cod.len()];
        self.img.iter().all(|&j| !std::mem::replace(&mut seen[j], true))
    }

    pub(crate) fn from_raw(dom: Arc<GlobSet>, cod: Arc<GlobSet>, img: Vec<usize>) -> Self {
        GlobMap { dom, cod, img }
    }
}

/// Composes two maps, `f ∘ g`.
pub fn compose_glob_maps(f: &GlobMap, g: &GlobMap) -> Result<GlobMap, GlobError> {
    f.compose(g)
}

struct MapSearch<'a> {
    x: &'a GlobSet,
    y: &'a GlobSet,
    order: Vec<usize>,
    asg: Vec<Option<usize>>,
    used: Vec<usize>,
    injective: bool,
    out: Vec<Vec<usize>>,
    limit: usize,
}

impl MapSearch<'_> {
    fn force(&mut self, xi: usize, yj: usize, trail: &mut Vec<usize>) -> bool {
        if let Some(cur) = self.asg[xi] {
            return cur == yj;
        }
        if self.x.cell(xi).dim != self.y.cell(yj).dim {
            return false;
        }
        if self.injective && self.used[yj] > 0 {
            return false;
        }
        self.asg[xi] = Some(yj);
        self.used[yj] += 1;
        trail.push(xi);
        match (self.x.src_of(xi), self.x.tgt_of(xi)) {
            (Some(s), Some(t)) => {
                let (ys, yt) = (self.y.src_of(yj).unwrap(), self.y.tgt_of(yj).unwrap());
                self.force(s, ys, trail) && self.force(t, yt, trail)
            }
            _ => true,
        }
    }

    fn undo(&mut self, trail: &[usize]) {
        for &xi in trail {
            if let Some(yj) = self.asg[xi].take() {
                self.used[yj] -= 1;
            }
        }
    }

    fn run(&mut self, pos: usize) {
        if self.out.len() >= self.limit {
            return;
        }
        if pos == self.order.len() {
            self.out.push(self.asg.iter().map(|a| a.unwrap()).collect());
            return;
        }
        let xi = self.order[pos];
        if self.asg[xi].is_some() {
            self.run(pos + 1);
            return;
        }
        let dim = self.x.cell(xi).dim;
        for yj in 0..self.y.len() {
            if self.y.cell(yj).dim != dim {
                continue;
            }
            let mut trail = Vec::new();
            if self.force(xi, yj, &mut trail) {
                self.run(pos + 1);
            }
            self.undo(&trail);
        }
    }
}

fn search_maps(x: &GlobSet, y: &GlobSet, injective: bool, limit: usize) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x.cell(b).dim.cmp(&x.cell(a).dim).then(a.cmp(&b)));
    let mut s = MapSearch {
        x,
        y,
        order,
        asg: vec![None; x.len()],
        used: vec![0; y.len()],
        injective,
        out: Vec::new(),
        limit,
    };
    s.run(0);
    s.out
}

/// Every morphism of globular sets `X → Y`, by backtracking from the top
/// dimension down (assigning a cell forces its whole boundary).
pub fn enumerate_glob_maps(x: &Arc<GlobSet>, y: &Arc<GlobSet>) -> Vec<GlobMap> {
    search_maps(x, y, false, usize::MAX)
        .into_iter()
        .map(|img| GlobMap::from_raw(x.clone(), y.clone(), img))
        .collect()
}

/// Finds an isomorphism `X → Y` if one exists.
pub fn find_isomorphism(x: &Arc<GlobSet>, y: &Arc<GlobSet>) -> Option<GlobMap> {
    if x.len() != y.len() {
        return None;
    }
    search_maps(x, y, true, 1)
        .into_iter()
        .next()
        .map(|img| GlobMap::from_raw(x.clone(), y.clone(), img))
}

/// The pushout of `X ← A → Y`, computed with union-find on cells.
///
/// Classes containing a cell of `X` keep the smallest such name; the other
/// classes take the name of their `Y` cell passed through `rename`.
pub fn pushout(
    left: &GlobMap,
    right: &GlobMap,
    rename: impl Fn(&CellId) -> CellId,
) -> Result<(Arc<GlobSet>, GlobMap, GlobMap), GlobError> {
    if !(Arc::ptr_eq(left.domain(), right.domain()) || left.domain() == right.domain()) {
        return Err(GlobError::DomainMismatch);
    }
    let (x, y) = (left.codomain().clone(), right.codomain().clone());
    let nx = x.len();
    let mut uf = UnionFind::<usize>::new(nx + y.len());
    for a in 0..left.domain().len() {
        uf.union(left.image_index(a), nx + right.image_index(a));
    }
    let name_of = |e: usize| -> CellId {
        if e < nx {
            x.cell(e).id.clone()
        } else {
            rename(&y.cell(e - nx).id)
        }
    };
    // representative name per class: smallest X name, otherwise the Y name
    let mut class_name: HashMap<usize, (bool, CellId)> = HashMap::new();
    for e in 0..nx + y.len() {
        let root = uf.find(e);
        let cand = (e >= nx, name_of(e));
        class_name
            .entry(root)
            .and_modify(|cur| {
                if cand < *cur {
                    *cur = cand.clone();
                }
            })
            .or_insert(cand);
    }
    let final_name = |e: usize| class_name[&uf.find(e)].1.clone();
    let mut seen = HashMap::new();
    let mut cells = Vec::new();
    for e in 0..nx + y.len() {
        let name = final_name(e);
        if seen.contains_key(&name) {
            continue;
        }
        let (dim, s, t) = if e < nx {
            (x.cell(e).dim, x.src_of(e), x.tgt_of(e))
        } else {
            let c = e - nx;
            (y.cell(c).dim, y.src_of(c).map(|i| i + nx), y.tgt_of(c).map(|i| i + nx))
        };
        seen.insert(name.clone(), ());
        cells.push(Cell {
            id: name,
            dim,
            src: s.map(final_name),
            tgt: t.map(final_name),
        });
    }
    let p = Arc::new(GlobSet::new(cells)?);
    let lx = GlobMap::from_raw(
        x.clone(),
        p.clone(),
        (0..nx).map(|e| p.index_of(&final_name(e)).unwrap()).collect(),
    );
    let ly = GlobMap::from_raw(
        y.clone(),
        p.clone(),
        (0..y.len())
            .map(|c| p.index_of(&final_name(c + nx)).unwrap())
            .collect(),
    );
    lx.validate()?;
    ly.validate()?;
    Ok((p, lx, ly))
}

/// Inclusion `D_k → D_n` (k <= n) onto the iterated source (`src = true`) or
/// target face of the disk with summand index `summand`.
fn face_inclusion(
    small: &Arc<GlobSet>,
    big: &Arc<GlobSet>,
    k: usize,
    summand: usize,
    src: bool,
) -> GlobMap {
    let n = big.dimension().unwrap_or(0);
    let mut asg = BTreeMap::new();
    for c in small.cells() {
        let target = if c.dim == k {
            if k == n {
                disk_cell_name(summand, n, Side::Top)
            } else {
                disk_cell_name(summand, k, if src { Side::Src } else { Side::Tgt })
            }
        } else {
            let side = if c.id.as_str().starts_with('s') {
                Side::Src
            } else {
                Side::Tgt
            };
            disk_cell_name(summand, c.dim, side)
        };
        asg.insert(c.id.clone(), target);
    }
    GlobMap::new(small.clone(), big.clone(), &asg).expect("face inclusion is a map")
}

/// `σ^k_n` (or `τ^k_n`) as a map between the canonical disks.
pub fn disk_face(k: usize, n: usize, src: bool) -> GlobMap {
    let small = Arc::new(named_disk(k, 1));
    let big = Arc::new(named_disk(n, 1));
    face_inclusion(&small, &big, k, 1, src)
}

/// The globular sum `G_T` with its cocone legs `D_{i_l} → G_T`.
#[derive(Debug, Clone)]
pub struct GlobularSum {
    pub table: Table,
    pub gs: Arc<GlobSet>,
    pub injections: Vec<GlobMap>,
}

impl GlobularSum {
    /// Name of the top cell of summand `l` (0-based).
    pub fn top(&self, l: usize) -> CellId {
        self.injections[l]
            .apply(&disk_cell_name(1, self.table.upper()[l], Side::Top))
            .expect("top cell")
            .clone()
    }
}

/// The globular sum of a table, by iterated pushout along the zigzag:
/// summand `l+1` is attached by its target face to the source face of
/// summand `l`.
pub fn globular_sum(table: &Table, bound: DimBound) -> Result<GlobularSum, GlobError> {
    bound.check(table.dimension())?;
    let up = table.upper();
    let low = table.lower();
    let first = Arc::new(named_disk(up[0], 1));
    let mut gs = first.clone();
    let mut injections = vec![GlobMap::identity(first)];
    for l in 0..low.len() {
        let k = low[l];
        let glue = Arc::new(named_disk(k, 0));
        let prev_disk = injections[l].domain().clone();
        let to_prev = face_inclusion(&glue, &prev_disk, k, l + 1, true);
        let left = injections[l].compose(&to_prev)?;
        let next = Arc::new(named_disk(up[l + 1], l + 2));
        let right = face_inclusion(&glue, &next, k, l + 2, false);
        let (p, lx, ly) = pushout(&left, &right, |c| c.clone())?;
        injections = injections
            .iter()
            .map(|inj| lx.compose(inj))
            .collect::<Result<_, _>>()?;
        injections.push(ly);
        gs = p;
    }
    // summand disks are exposed with the canonical disk names
    let injections = injections
        .into_iter()
        .enumerate()
        .map(|(l, inj)| {
            let canon = Arc::new(named_disk(up[l], 1));
            let local = inj.domain().clone();
            let rename = GlobMap::from_raw(
                canon.clone(),
                local.clone(),
                canon
                    .cells()
                    .iter()
                    .map(|c| {
                        let name = c.id.as_str();
                        let renamed = format!("{}{}{}", &name[..1], l + 1, &name[2..]);
                        local.index_of(&CellId::new(&renamed)).unwrap()
                    })
                    .collect(),
            );
            inj.compose(&rename)
        })
        .collect::<Result<_, _>>()?;
    Ok(GlobularSum {
        table: table.clone(),
        gs,
        injections,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b() -> DimBound {
        DimBound::default()
    }

    fn t(s: &str) -> Table {
        Table::parse(s).unwrap()
    }

    #[test]
    fn table_validation() {
        let info = validate_table(&[1, 2], &[0]).unwrap();
        assert_eq!(info, TableInfo { width: 2, dimension: 2 });
        let info = validate_table(&[0], &[]).unwrap();
        assert_eq!(info, TableInfo { width: 1, dimension: 0 });
        assert!(matches!(
            validate_table(&[1, 1], &[1]),
            Err(GlobError::Inequality { .. })
        ));
        assert!(matches!(
            validate_table(&[1, 1], &[]),
            Err(GlobError::Shape { .. })
        ));
        assert!(matches!(validate_table(&[], &[]), Err(GlobError::Shape { .. })));
    }

    #[test]
    fn table_text_syntax() {
        assert_eq!(t("1 2 / 0").to_string(), "1 2 / 0");
        assert_eq!(t("3").to_string(), "3");
        assert_eq!(t("3 /").to_string(), "3");
        assert!(Table::parse("1 x / 0").is_err());
        assert!(Table::parse("1 1 / 1").is_err());
    }

    #[test]
    fn disk_and_sphere_sizes() {
        for n in 0..=6 {
            let d = disk(n, b()).unwrap();
            assert_eq!(d.len(), 2 * n + 1);
            assert_eq!(d.count_dim(n), 1);
            for k in 0..n {
                assert_eq!(d.count_dim(k), 2);
            }
            assert!(d.globular_relations_hold());
        }
        assert!(matches!(disk(7, b()), Err(GlobError::DimBoundExceeded { .. })));
        assert!(sphere(-1, b()).unwrap().is_empty());
        assert_eq!(sphere(0, b()).unwrap().len(), 2);
        assert_eq!(sphere(1, b()).unwrap().len(), 4);
        assert!(sphere(6, b()).is_err());
    }

    #[test]
    fn globular_sum_examples() {
        let g = globular_sum(&t("1"), b()).unwrap();
        assert_eq!(*g.gs, disk(1, b()).unwrap());

        let g = globular_sum(&t("1 1 / 0"), b()).unwrap();
        assert_eq!(g.gs.count_dim(0), 3);
        assert_eq!(g.gs.count_dim(1), 2);
        // summand 2 is glued by its target onto the source of summand 1
        let u2 = g.gs.get(&"u2".into()).unwrap();
        assert_eq!(u2.tgt, Some("s1_0".into()));
        assert_eq!(u2.src, Some("s2_0".into()));

        let g = globular_sum(&t("2 1 / 0"), b()).unwrap();
        assert_eq!(g.gs.len(), 7);
        assert_eq!(
            (g.gs.count_dim(0), g.gs.count_dim(1), g.gs.count_dim(2)),
            (3, 3, 1)
        );

        let g = globular_sum(&t("2 2 / 1"), b()).unwrap();
        assert_eq!(g.gs.len(), 7);
        assert_eq!(g.gs.get(&"u2".into()).unwrap().tgt, Some("s1_1".into()));
    }

    #[test]
    fn cocone_legs_are_maps_and_jointly_surjective() {
        for table in Table::enumerate(3, 3) {
            let g = globular_sum(&table, b()).unwrap();
            assert!(g.gs.globular_relations_hold());
            let mut hit = vec![false; g.gs.len()];
            for inj in &g.injections {
                inj.validate().unwrap();
                for i in 0..inj.domain().len() {
                    hit[inj.image_index(i)] = true;
                }
            }
            assert!(hit.iter().all(|&h| h), "{table:?}");
        }
    }

    #[test]
    fn width_one_sums_are_disks() {
        for n in 0..=6 {
            let g = globular_sum(&Table::disk(n), b()).unwrap();
            assert_eq!(*g.gs, disk(n, b()).unwrap());
        }
    }

    #[test]
    fn map_enumeration_examples() {
        let d0 = Arc::new(disk(0, b()).unwrap());
        let d1 = Arc::new(disk(1, b()).unwrap());
        let g = globular_sum(&t("1 1 / 0"), b()).unwrap().gs;
        assert_eq!(enumerate_glob_maps(&d0, &g).len(), 3);
        assert_eq!(enumerate_glob_maps(&d1, &d0).len(), 0);
        let maps = enumerate_glob_maps(&d1, &d1);
        assert_eq!(maps.len(), 1);
        assert_eq!(maps[0], GlobMap::identity(d1.clone()));
        for m in enumerate_glob_maps(&d1, &g) {
            m.validate().unwrap();
        }
    }

    #[test]
    fn composition_laws() {
        let d1 = Arc::new(disk(1, b()).unwrap());
        let only = enumerate_glob_maps(&d1, &d1).remove(0);
        assert_eq!(only.compose(&only).unwrap(), only);

        let g = globular_sum(&t("2 1 / 0"), b()).unwrap().gs;
        let id = GlobMap::identity(g.clone());
        for m in enumerate_glob_maps(&d1, &g) {
            assert_eq!(id.compose(&m).unwrap(), m);
        }
        let d0 = Arc::new(disk(0, b()).unwrap());
        let m = enumerate_glob_maps(&d0, &d1).remove(0);
        assert_eq!(m.compose(&id), Err(GlobError::DomainMismatch));
    }

    #[test]
    fn map_validator_rejects_non_maps() {
        let d1 = Arc::new(disk(1, b()).unwrap());
        let mut asg = BTreeMap::new();
        asg.insert("s1_0".into(), "s1_0".into());
        asg.insert("t1_0".into(), "s1_0".into());
        asg.insert("u1".into(), "u1".into());
        assert!(matches!(
            GlobMap::new(d1.clone(), d1, &asg),
            Err(GlobError::NotAMap(_))
        ));
    }

    #[test]
    fn globset_json_round_trip_and_validation() {
        let g = globular_sum(&t("2 1 / 0"), b()).unwrap().gs;
        let text = serde_json::to_string(&*g).unwrap();
        let back: GlobSet = serde_json::from_str(&text).unwrap();
        assert_eq!(back, *g);

        let bad = r#"{"cells":[{"id":"x","dim":0,"src":null,"tgt":null},
            {"id":"y","dim":0,"src":null,"tgt":null},
            {"id":"f","dim":1,"src":"x","tgt":"y"},
            {"id":"g","dim":1,"src":"y","tgt":"x"},
            {"id":"a","dim":2,"src":"f","tgt":"g"}]}"#;
        assert!(serde_json::from_str::<GlobSet>(bad).is_err());
    }

    #[test]
    fn table_enumeration_counts() {
        // widths <= 3 with entries <= 2: 3 + 5 + 13
        assert_eq!(Table::enumerate(3, 2).len(), 21);
        assert!(Table::enumerate(6, 1)
            .iter()
            .all(|t| t.dimension() <= 1));
    }
}
