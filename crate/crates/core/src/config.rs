//! Run configuration and textual descriptions of inputs.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cylinder::Cylinder;
use crate::globset::{disk, DimBound, GlobError, GlobSet, Table};
use crate::rewrite::SearchBudget;
use crate::terms::{parse_term, Context, TermError};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed configuration: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error(transparent)]
    Glob(#[from] GlobError),
    #[error(transparent)]
    Term(#[from] TermError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Text,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Suites {
    pub lemma_target: bool,
    pub lemma_comp: bool,
    pub contraction: bool,
    pub witness: bool,
    pub precat: bool,
    pub dim1: bool,
    pub admissibility: bool,
    pub liftings: bool,
}

impl Default for Suites {
    fn default() -> Self {
        Suites {
            lemma_target: true,
            lemma_comp: true,
            contraction: true,
            witness: true,
            precat: true,
            dim1: true,
            admissibility: true,
            liftings: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub dim_bound: usize,
    pub budget: SearchBudget,
    pub suites: Suites,
    pub max_lemma_n: usize,
    pub max_contraction_n: usize,
    pub max_precat_i: usize,
    pub max_dim1_width: usize,
    pub format: OutputFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            dim_bound: 6,
            budget: SearchBudget::default(),
            suites: Suites::default(),
            max_lemma_n: 6,
            max_contraction_n: 5,
            max_precat_i: 3,
            max_dim1_width: 6,
            format: OutputFormat::Json,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let c: RunConfig = serde_json::from_str(&text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.dim_bound < 2 {
            return Err(ConfigError::Invalid("dimension bound must be at least 2".into()));
        }
        let b = &self.budget;
        if b.node_cap == 0 || b.time_cap_ms == 0 || b.search_size == 0 {
            return Err(ConfigError::Invalid("node cap, time cap and search size must be positive".into()));
        }
        Ok(())
    }

    pub fn bound(&self) -> DimBound {
        DimBound(self.dim_bound)
    }
}

/// Where the generators of a term live.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ContextSpec {
    Table(Table),
    Disk(usize),
    Globset(GlobSet),
}

impl ContextSpec {
    pub fn globset(&self, bound: DimBound) -> Result<GlobSet, GlobError> {
        match self {
            ContextSpec::Table(t) => Ok((*crate::theta0::sum_of(t, bound)?.gs).clone()),
            ContextSpec::Disk(n) => disk(*n, bound),
            ContextSpec::Globset(g) => {
                if let Some(d) = g.dimension() {
                    bound.check(d)?;
                }
                Ok(g.clone())
            }
        }
    }

    pub fn context(&self, bound: DimBound) -> Result<Arc<Context>, GlobError> {
        Ok(Context::from_globset(&self.globset(bound)?, bound))
    }
}

/// A cylinder written as surface terms.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CylinderSpec {
    pub context: ContextSpec,
    pub n: usize,
    pub from: String,
    pub to: String,
    pub flats: Vec<String>,
    pub sharps: Vec<String>,
    pub top: String,
}

impl CylinderSpec {
    pub fn build(&self, bound: DimBound, budget: &SearchBudget) -> Result<Cylinder, ConfigError> {
        let ctx = self.context.context(bound)?;
        let p = |s: &str| parse_term(s, &ctx, budget).map(|t| t.term);
        Ok(Cylinder {
            n: self.n,
            from: p(&self.from)?,
            to: p(&self.to)?,
            flats: self.flats.iter().map(|s| p(s)).collect::<Result<_, _>>()?,
            sharps: self.sharps.iter().map(|s| p(s)).collect::<Result<_, _>>()?,
            top: p(&self.top)?,
            ctx,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_validation() {
        let c: RunConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(c, RunConfig::default());
        c.validate().unwrap();
        let c: RunConfig = serde_json::from_str(r#"{"dim_bound": 1}"#).unwrap();
        assert!(c.validate().is_err());
        let c: RunConfig = serde_json::from_str(r#"{"budget": {"closure_depth": 0}}"#).unwrap();
        assert_eq!(c.budget.closure_depth, 0);
        assert_eq!(c.budget.node_cap, SearchBudget::default().node_cap);
        c.validate().unwrap();
    }

    #[test]
    fn context_specs() {
        let s: ContextSpec = serde_json::from_str(r#"{"table": "1 1 / 0"}"#).unwrap();
        assert_eq!(s.globset(DimBound::default()).unwrap().len(), 5);
        let s: ContextSpec = serde_json::from_str(r#"{"disk": 7}"#).unwrap();
        assert!(s.globset(DimBound::default()).is_err());
    }
}
