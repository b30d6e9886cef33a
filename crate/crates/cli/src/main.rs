use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context as _, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use omegagpd::config::{ContextSpec, CylinderSpec, OutputFormat, RunConfig};
use omegagpd::corpus::{default_items, run_corpus, CorpusItem};
use omegagpd::cylinder::{contractibility_witness, validate_cylinder, verify_contraction};
use omegagpd::globset::{GlobSet, Table};
use omegagpd::homotopy::{connect_arrow, pi0, pi1_free_rank, ConnectResult, HomotopyError};
use omegagpd::rewrite::{equal, normalize_typed, EqVerdict};
use omegagpd::terms::{parse_term, TermError, TypedTerm};
use omegagpd::theta0::hom_report;
use omegagpd::tower::{build_tower, evaluate_tower, ExtPresentation, TowerError, TowerSpec};

/// Symbolic kernel for free strict omega-groupoids.
///
/// Exit codes: 0 success, 1 verification failure, 2 input error,
/// 3 distinct (eq), 4 undecided within budget.
#[derive(Parser)]
#[command(name = "ogpd", version)]
struct Cli {
    /// JSON run configuration; command-line flags override it.
    #[arg(long, env = "OGPD_CONFIG", global = true)]
    config: Option<PathBuf>,
    /// Global dimension bound.
    #[arg(long, global = true)]
    dim_bound: Option<usize>,
    /// Depth of the exchange-law search; 0 disables it.
    #[arg(long, global = true)]
    closure_depth: Option<usize>,
    /// Node cap for the exchange-law and lifting searches.
    #[arg(long, global = true)]
    node_cap: Option<usize>,
    /// Wall-clock cap per equality query, in milliseconds.
    #[arg(long, global = true)]
    time_cap_ms: Option<u64>,
    /// Largest lifting candidate, counted in atoms.
    #[arg(long, global = true)]
    search_size: Option<usize>,
    /// Output format.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Args, Clone)]
#[group(required = true, multiple = false)]
struct Ctx {
    /// Globular sum of a table, e.g. "2 1 / 0".
    #[arg(long)]
    table: Option<String>,
    /// The n-disk.
    #[arg(long)]
    disk: Option<usize>,
    /// Globular set in JSON form: {"cells": [...]}.
    #[arg(long)]
    globset: Option<PathBuf>,
}

impl Ctx {
    fn spec(&self) -> Result<ContextSpec> {
        if let Some(t) = &self.table {
            return Ok(ContextSpec::Table(Table::parse(t)?));
        }
        if let Some(n) = self.disk {
            return Ok(ContextSpec::Disk(n));
        }
        let path = self.globset.as_ref().expect("clap enforces one source");
        let g: GlobSet = serde_json::from_str(&read(path)?).with_context(|| format!("parsing {}", path.display()))?;
        Ok(ContextSpec::Globset(g))
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Type check a term and print its dimension and boundaries.
    Check {
        term: String,
        #[command(flatten)]
        ctx: Ctx,
    },
    /// Normalize a term.
    Nf {
        term: String,
        #[command(flatten)]
        ctx: Ctx,
        /// Include the rewrite trace.
        #[arg(long)]
        trace: bool,
    },
    /// Decide equality of two terms.
    Eq {
        left: String,
        right: String,
        #[command(flatten)]
        ctx: Ctx,
        /// Include the certificate.
        #[arg(long)]
        trace: bool,
    },
    /// Search for an arrow between two parallel terms.
    Connect {
        from: String,
        to: String,
        #[command(flatten)]
        ctx: Ctx,
    },
    /// Components (level 0) or free fundamental groupoid rank (level 1).
    Pi {
        #[arg(long, value_parser = clap::value_parser!(u8).range(0..=1))]
        level: u8,
        #[command(flatten)]
        ctx: Ctx,
    },
    /// Maps between globular sums.
    Theta0 {
        #[command(subcommand)]
        cmd: Theta0Cmd,
    },
    /// Cylinders.
    Cyl {
        #[command(subcommand)]
        cmd: CylCmd,
    },
    /// Towers of formal liftings.
    Tower {
        #[command(subcommand)]
        cmd: TowerCmd,
    },
    /// Run the verification corpus.
    Corpus {
        /// JSON list of items to run instead of the configured suites.
        #[arg(long)]
        items: Option<PathBuf>,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Record per-item wall-clock times (reports are then not byte-stable).
        #[arg(long)]
        timings: bool,
    },
}

#[derive(Subcommand)]
enum Theta0Cmd {
    /// All maps G_S -> G_T.
    Hom { source: String, target: String },
}

#[derive(Subcommand)]
enum CylCmd {
    /// Check the globular equations of a cylinder given as JSON.
    Verify {
        file: PathBuf,
        #[arg(long)]
        traces: bool,
    },
    /// Build and verify the contraction cylinder of the n-disk.
    Contract {
        n: usize,
        #[arg(long)]
        traces: bool,
    },
}

#[derive(Subcommand)]
enum TowerCmd {
    /// Validate a staged list of pairs and print the presentation.
    Build {
        #[arg(long)]
        stages: PathBuf,
    },
    /// Interpret every formal cell of a presentation.
    Eval { file: PathBuf },
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn config(cli: &Cli) -> Result<RunConfig> {
    let mut c = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(n) = cli.dim_bound {
        c.dim_bound = n;
    }
    let b = &mut c.budget;
    if let Some(x) = cli.closure_depth {
        b.closure_depth = x;
    }
    if let Some(x) = cli.node_cap {
        b.node_cap = x;
    }
    if let Some(x) = cli.time_cap_ms {
        b.time_cap_ms = x;
    }
    if let Some(x) = cli.search_size {
        b.search_size = x;
    }
    match cli.format {
        Some(Format::Json) => c.format = OutputFormat::Json,
        Some(Format::Text) => c.format = OutputFormat::Text,
        None => {}
    }
    c.validate()?;
    Ok(c)
}

/// A term that failed to parse is an input error; one that failed to type
/// check is a verification failure.
enum Typed {
    Ok(TypedTerm),
    Ill(TermError),
}

fn typed(text: &str, spec: &ContextSpec, cfg: &RunConfig) -> Result<Typed> {
    let ctx = spec.context(cfg.bound())?;
    match parse_term(text, &ctx, &cfg.budget) {
        Ok(t) => Ok(Typed::Ok(t)),
        Err(e @ (TermError::Parse(_) | TermError::UnknownCell(_))) => bail!(e),
        Err(e) => Ok(Typed::Ill(e)),
    }
}

struct Out {
    value: Value,
    text: String,
    code: u8,
}

fn out(value: Value, text: impl Into<String>, code: u8) -> Out {
    Out {
        value,
        text: text.into(),
        code,
    }
}

fn ill(e: TermError) -> Out {
    let code = if matches!(e, TermError::CompUndecided { .. }) { 4 } else { 1 };
    out(json!({"error": e.to_string()}), format!("ill-typed: {e}"), code)
}

macro_rules! typed_or_fail {
    ($e:expr) => {
        match $e {
            Typed::Ok(t) => t,
            Typed::Ill(e) => return Ok(ill(e)),
        }
    };
}

fn run(cli: &Cli, cfg: &RunConfig) -> Result<Out> {
    let bound = cfg.bound();
    let budget = &cfg.budget;
    match &cli.cmd {
        Cmd::Check { term, ctx } => {
            let t = typed_or_fail!(typed(term, &ctx.spec()?, cfg)?);
            let show = |x: &Option<_>| x.as_ref().map(|t: &omegagpd::terms::Term| t.to_string());
            let text = match (&t.src, &t.tgt) {
                (Some(s), Some(g)) => format!("{} : {s} -> {g} ({}-cell)", t.term, t.dim),
                _ => format!("{} : object", t.term),
            };
            Ok(out(
                json!({"term": t.term, "dim": t.dim, "src": show(&t.src), "tgt": show(&t.tgt)}),
                text,
                0,
            ))
        }
        Cmd::Nf { term, ctx, trace } => {
            let t = typed_or_fail!(typed(term, &ctx.spec()?, cfg)?);
            let (n, steps) = normalize_typed(&t);
            let mut v = json!({"term": t.term, "nf": n, "steps": steps.len()});
            if *trace {
                v["trace"] = serde_json::to_value(&steps)?;
            }
            Ok(out(v, n.to_string(), 0))
        }
        Cmd::Eq { left, right, ctx, trace } => {
            let spec = ctx.spec()?;
            let a = typed_or_fail!(typed(left, &spec, cfg)?);
            let b = typed_or_fail!(typed(right, &spec, cfg)?);
            let v = equal(&a, &b, budget)?;
            let code = match &v {
                EqVerdict::Equal(_) => 0,
                EqVerdict::Distinct(_) => 3,
                EqVerdict::Unknown { .. } => 4,
            };
            let mut j = json!({"verdict": v.label()});
            match &v {
                EqVerdict::Equal(c) => {
                    j["certificate_len"] = json!(c.len());
                    if *trace {
                        j["certificate"] = serde_json::to_value(&c.steps)?;
                    }
                }
                EqVerdict::Distinct(w) => j["witness"] = serde_json::to_value(w)?,
                EqVerdict::Unknown { reason } => j["reason"] = json!(reason),
            }
            Ok(out(j, v.label(), code))
        }
        Cmd::Connect { from, to, ctx } => {
            let spec = ctx.spec()?;
            let a = typed_or_fail!(typed(from, &spec, cfg)?);
            let b = typed_or_fail!(typed(to, &spec, cfg)?);
            match connect_arrow(&a, &b, budget) {
                Ok(r) => {
                    let (text, code) = match &r {
                        ConnectResult::Found { h, .. } => (h.to_string(), 0),
                        ConnectResult::NotFoundWithinBudget { .. } => ("not found within budget".into(), 4),
                    };
                    Ok(out(serde_json::to_value(&r)?, text, code))
                }
                Err(e @ HomotopyError::NotParallel(_)) => Ok(out(json!({"error": e.to_string()}), e.to_string(), 1)),
                Err(e) => bail!(e),
            }
        }
        Cmd::Pi { level, ctx } => {
            let g = ctx.spec()?.globset(bound)?.truncate(1);
            if *level == 0 {
                let c = pi0(&g);
                Ok(out(json!({"components": c}), format!("{} components", c.len()), 0))
            } else {
                let r = pi1_free_rank(&g);
                Ok(out(json!({"rank": r}), format!("rank {r}"), 0))
            }
        }
        Cmd::Theta0 {
            cmd: Theta0Cmd::Hom { source, target },
        } => {
            let r = hom_report(&Table::parse(source)?, &Table::parse(target)?, bound)?;
            Ok(out(serde_json::to_value(&r)?, format!("{} maps", r.count), 0))
        }
        Cmd::Cyl {
            cmd: CylCmd::Verify { file, traces },
        } => {
            let spec: CylinderSpec = serde_json::from_str(&read(file)?).context("parsing cylinder")?;
            let z = spec.build(bound, budget)?;
            let r = validate_cylinder(&z, budget, *traces)?;
            let unknown = r.equations.iter().any(|e| e.verdict == "unknown");
            let code = if r.valid {
                0
            } else if unknown && r.equations.iter().all(|e| matches!(e.verdict, "equal" | "unknown")) {
                4
            } else {
                1
            };
            let text = format!("valid: {} ({} equations)", r.valid, r.equations.len());
            Ok(out(serde_json::to_value(&r)?, text, code))
        }
        Cmd::Cyl {
            cmd: CylCmd::Contract { n, traces },
        } => {
            let r = verify_contraction(*n, bound, budget, *traces)?;
            let w = contractibility_witness(*n, bound, budget)?;
            let ok = r.all_equal && w.id_endpoint && w.const_endpoint;
            let v = json!({
                "report": r,
                "witness": {"id_endpoint": w.id_endpoint, "const_endpoint": w.const_endpoint},
            });
            Ok(out(v, format!("contraction of D{n}: {}", if ok { "ok" } else { "failed" }), if ok { 0 } else { 1 }))
        }
        Cmd::Tower {
            cmd: TowerCmd::Build { stages },
        } => {
            let spec: TowerSpec = serde_json::from_str(&read(stages)?).context("parsing stages")?;
            match build_tower(&spec, bound, budget) {
                Ok(ext) => {
                    let n: usize = ext.stages.iter().map(Vec::len).sum();
                    Ok(out(serde_json::to_value(&ext)?, format!("{} stages, {n} cells", ext.stages.len()), 0))
                }
                Err(e @ TowerError::InadmissiblePair { .. }) => Ok(out(json!({"error": e.to_string()}), e.to_string(), 1)),
                Err(e) => bail!(e),
            }
        }
        Cmd::Tower {
            cmd: TowerCmd::Eval { file },
        } => {
            let ext: ExtPresentation = serde_json::from_str(&read(file)?).context("parsing tower")?;
            match evaluate_tower(&ext, bound, budget) {
                Ok(entries) => {
                    let text = entries
                        .iter()
                        .map(|e| format!("{} |-> {}", e.cell, e.image))
                        .collect::<Vec<_>>()
                        .join("\n");
                    Ok(out(json!({"cells": entries}), text, 0))
                }
                Err(e @ TowerError::EvaluationStuck { .. }) => Ok(out(json!({"error": e.to_string()}), e.to_string(), 4)),
                Err(e) => bail!(e),
            }
        }
        Cmd::Corpus { items, out: dest, timings } => {
            let list: Vec<CorpusItem> = match items {
                Some(p) => serde_json::from_str(&read(p)?).with_context(|| format!("parsing {}", p.display()))?,
                None => default_items(cfg),
            };
            let r = run_corpus(cfg, list, *timings);
            let s = &r.summary;
            let text = format!("pass {} fail {} unknown {} error {}", s.pass, s.fail, s.unknown, s.error);
            let code = r.exit_code() as u8;
            let v = serde_json::to_value(&r)?;
            if let Some(p) = dest {
                std::fs::write(p, serde_json::to_string_pretty(&v)? + "\n")
                    .with_context(|| format!("writing {}", p.display()))?;
                return Ok(out(json!({"summary": s, "written": p}), text, code));
            }
            Ok(out(v, text, code))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match config(&cli).and_then(|cfg| Ok((run(&cli, &cfg)?, cfg.format))) {
        Ok((o, format)) => {
            match format {
                OutputFormat::Text => println!("{}", o.text),
                OutputFormat::Json => println!("{}", serde_json::to_string_pretty(&o.value).expect("json")),
            }
            ExitCode::from(o.code)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
