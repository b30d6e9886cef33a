//! The category of tables with globular-set maps between their globular sums.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use serde::Serialize;
use thiserror::Error;

use crate::globset::{
    enumerate_glob_maps, find_isomorphism, globular_sum, pushout, CellId, DimBound, GlobError,
    GlobMap, GlobSet, GlobularSum, Table,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Theta0Error {
    #[error(transparent)]
    Glob(#[from] GlobError),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("glue dimensions: expected {expected}, got {got}")]
    GlueCount { expected: usize, got: usize },
}

type SumCache = Mutex<HashMap<Table, Arc<GlobularSum>>>;
type HomCache = Mutex<HashMap<(Table, Table), Arc<Vec<Theta0Mor>>>>;

fn sum_cache() -> &'static SumCache {
    static C: OnceLock<SumCache> = OnceLock::new();
    C.get_or_init(Default::default)
}

fn hom_cache() -> &'static HomCache {
    static C: OnceLock<HomCache> = OnceLock::new();
    C.get_or_init(Default::default)
}

/// Memoized globular sum; the bound is checked on every call.
pub fn sum_of(table: &Table, bound: DimBound) -> Result<Arc<GlobularSum>, GlobError> {
    bound.check(table.dimension())?;
    if let Some(s) = sum_cache().lock().unwrap().get(table) {
        return Ok(s.clone());
    }
    let s = Arc::new(globular_sum(table, bound)?);
    Ok(sum_cache()
        .lock()
        .unwrap()
        .entry(table.clone())
        .or_insert(s)
        .clone())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Theta0Mor {
    pub src: Table,
    pub dst: Table,
    pub map: GlobMap,
}

impl Theta0Mor {
    pub fn identity(t: &Table, bound: DimBound) -> Result<Self, GlobError> {
        let s = sum_of(t, bound)?;
        Ok(Theta0Mor {
            src: t.clone(),
            dst: t.clone(),
            map: GlobMap::identity(s.gs.clone()),
        })
    }

    /// `self ∘ g`.
    pub fn compose(&self, g: &Theta0Mor) -> Result<Theta0Mor, GlobError> {
        if g.dst != self.src {
            return Err(GlobError::DomainMismatch);
        }
        Ok(Theta0Mor {
            src: g.src.clone(),
            dst: self.dst.clone(),
            map: self.map.compose(&g.map)?,
        })
    }
}

#[derive(Serialize)]
pub struct HomReport {
    pub source: Table,
    pub target: Table,
    pub count: usize,
    pub morphisms: Vec<std::collections::BTreeMap<CellId, CellId>>,
}

/// `Hom(G_S, G_T)`, memoized.
pub fn hom_theta0(s: &Table, t: &Table, bound: DimBound) -> Result<Arc<Vec<Theta0Mor>>, GlobError> {
    let key = (s.clone(), t.clone());
    if let Some(h) = hom_cache().lock().unwrap().get(&key) {
        return Ok(h.clone());
    }
    let gs = sum_of(s, bound)?;
    let gt = sum_of(t, bound)?;
    let homs: Vec<Theta0Mor> = enumerate_glob_maps(&gs.gs, &gt.gs)
        .into_iter()
        .map(|map| Theta0Mor {
            src: s.clone(),
            dst: t.clone(),
            map,
        })
        .collect();
    let homs = Arc::new(homs);
    Ok(hom_cache()
        .lock()
        .unwrap()
        .entry(key)
        .or_insert(homs)
        .clone())
}

pub fn hom_report(s: &Table, t: &Table, bound: DimBound) -> Result<HomReport, GlobError> {
    let homs = hom_theta0(s, t, bound)?;
    Ok(HomReport {
        source: s.clone(),
        target: t.clone(),
        count: homs.len(),
        morphisms: homs.iter().map(|m| m.map.assignment()).collect(),
    })
}

/// Checks that `f` and `g`, both out of `[n]`, agree on the source and on
/// the target `(n-1)`-face.
pub fn is_globally_parallel(n: usize, f: &Theta0Mor, g: &Theta0Mor) -> Result<bool, Theta0Error> {
    let disk = Table::disk(n);
    if f.src != disk || g.src != disk {
        return Err(Theta0Error::ShapeMismatch(format!(
            "expected maps out of [{n}], got [{:?}] and [{:?}]",
            f.src, g.src
        )));
    }
    if f.dst != g.dst {
        return Err(Theta0Error::ShapeMismatch("targets differ".into()));
    }
    if n == 0 {
        return Ok(true);
    }
    let faces = [format!("s1_{}", n - 1), format!("t1_{}", n - 1)];
    Ok(faces.iter().all(|c| {
        let c = CellId::new(c);
        f.map.apply(&c) == g.map.apply(&c)
    }))
}

/// Concatenates tables, inserting `glue_dims` as the lower entries between
/// consecutive parts.
pub fn table_of_sum(tables: &[Table], glue_dims: &[usize]) -> Result<Table, Theta0Error> {
    if tables.is_empty() || glue_dims.len() + 1 != tables.len() {
        return Err(Theta0Error::GlueCount {
            expected: tables.len().saturating_sub(1),
            got: glue_dims.len(),
        });
    }
    let mut upper = tables[0].upper().to_vec();
    let mut lower = tables[0].lower().to_vec();
    for (t, &g) in tables[1..].iter().zip(glue_dims) {
        lower.push(g);
        upper.extend_from_slice(t.upper());
        lower.extend_from_slice(t.lower());
    }
    Ok(Table::new(upper, lower)?)
}

/// Pastes the globular sums of `parts` directly: the first summand of part
/// `p+1` is glued by its target face onto the source face of the last summand
/// of part `p`. Cells of later parts are prefixed `p{index}.`.
pub fn paste_parts(
    parts: &[Table],
    glue_dims: &[usize],
    bound: DimBound,
) -> Result<Arc<GlobSet>, Theta0Error> {
    if parts.is_empty() || glue_dims.len() + 1 != parts.len() {
        return Err(Theta0Error::GlueCount {
            expected: parts.len().saturating_sub(1),
            got: glue_dims.len(),
        });
    }
    let first = sum_of(&parts[0], bound)?;
    let mut acc = first.gs.clone();
    let mut last_leg = first.injections.last().unwrap().clone();
    for (p, (part, &k)) in parts[1..].iter().zip(glue_dims).enumerate() {
        let next = sum_of(part, bound)?;
        let last_dim = last_leg.domain().dimension().unwrap_or(0);
        let first_dim = next.injections[0].domain().dimension().unwrap_or(0);
        if k >= last_dim || k >= first_dim {
            return Err(Theta0Error::Glob(GlobError::Inequality {
                column: p + 1,
                detail: format!("glue dimension {k} too large"),
            }));
        }
        let glue = Arc::new(crate::globset::disk(k, bound)?);
        let to_last = last_leg.compose(&crate::globset::disk_face(k, last_dim, true))?;
        let to_next = next.injections[0].compose(&crate::globset::disk_face(k, first_dim, false))?;
        let to_last = GlobMap::from_raw(
            glue.clone(),
            to_last.codomain().clone(),
            (0..glue.len()).map(|i| to_last.image_index(i)).collect(),
        );
        let to_next = GlobMap::from_raw(
            glue.clone(),
            to_next.codomain().clone(),
            (0..glue.len()).map(|i| to_next.image_index(i)).collect(),
        );
        let prefix = format!("p{}.", p + 1);
        let (pushed, _lx, ly) = pushout(&to_last, &to_next, |c| {
            CellId::new(&format!("{prefix}{c}"))
        })?;
        last_leg = ly.compose(next.injections.last().unwrap())?;
        acc = pushed;
    }
    Ok(acc)
}

/// Checks `globularSum(tableOfSum(parts))` against the direct pasting.
pub fn sum_matches_pasting(
    parts: &[Table],
    glue_dims: &[usize],
    bound: DimBound,
) -> Result<bool, Theta0Error> {
    let t = table_of_sum(parts, glue_dims)?;
    let direct = paste_parts(parts, glue_dims, bound)?;
    let viasum = sum_of(&t, bound)?;
    Ok(find_isomorphism(&viasum.gs, &direct).is_some())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: &str) -> Table {
        Table::parse(s).unwrap()
    }

    fn b() -> DimBound {
        DimBound::default()
    }

    #[test]
    fn hom_examples() {
        assert_eq!(hom_theta0(&t("0"), &t("1 1 / 0"), b()).unwrap().len(), 3);
        assert_eq!(hom_theta0(&t("1"), &t("0"), b()).unwrap().len(), 0);
        assert_eq!(hom_theta0(&t("1"), &t("1"), b()).unwrap().len(), 1);
    }

    #[test]
    fn object_count_identity() {
        for table in Table::enumerate(3, 2) {
            let objs = sum_of(&table, b()).unwrap().gs.count_dim(0);
            assert_eq!(hom_theta0(&t("0"), &table, b()).unwrap().len(), objs);
        }
    }

    #[test]
    fn parallelism() {
        let target = t("1 1 / 0");
        let homs = hom_theta0(&t("0"), &target, b()).unwrap();
        assert!(is_globally_parallel(0, &homs[0], &homs[1]).unwrap());
        assert!(matches!(
            is_globally_parallel(1, &homs[0], &homs[1]),
            Err(Theta0Error::ShapeMismatch(_))
        ));
        let d1 = hom_theta0(&t("1"), &t("2"), b()).unwrap();
        // the two faces of the 2-disk share endpoints
        assert_eq!(d1.len(), 2);
        for f in d1.iter() {
            for g in d1.iter() {
                assert!(is_globally_parallel(1, f, g).unwrap());
            }
        }
        let into_path = hom_theta0(&t("1"), &t("1 1 / 0"), b()).unwrap();
        assert!(!is_globally_parallel(1, &into_path[0], &into_path[1]).unwrap());
    }

    #[test]
    fn table_sums() {
        assert_eq!(table_of_sum(&[t("1"), t("1")], &[0]).unwrap(), t("1 1 / 0"));
        assert_eq!(table_of_sum(&[t("2"), t("1")], &[0]).unwrap(), t("2 1 / 0"));
        assert_eq!(
            table_of_sum(&[t("1 1 / 0"), t("2")], &[0]).unwrap(),
            t("1 1 2 / 0 0")
        );
        assert!(table_of_sum(&[t("1"), t("1")], &[1]).is_err());
        for (parts, glue) in [
            (vec![t("1"), t("1")], vec![0]),
            (vec![t("2"), t("1")], vec![0]),
            (vec![t("1 1 / 0"), t("2")], vec![0]),
            (vec![t("2 2 / 1"), t("3"), t("1")], vec![0, 0]),
        ] {
            assert!(sum_matches_pasting(&parts, &glue, b()).unwrap());
        }
    }

    #[test]
    fn composition_is_unital() {
        let s = t("1");
        let target = t("2 1 / 0");
        let id = Theta0Mor::identity(&target, b()).unwrap();
        for f in hom_theta0(&s, &target, b()).unwrap().iter() {
            assert_eq!(id.compose(f).unwrap(), *f);
        }
    }
}
