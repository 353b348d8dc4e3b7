use std::fs;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use statlink_core::corpus::{
    Corpus, FixtureStore, Gateway, HttpBackend, HttpConfig, Mode, DEFAULT_SPARQL_ENDPOINT, DEFAULT_WIKI_ENDPOINT,
};
use statlink_core::events::EventStore;
use statlink_core::relatedness::{expand, DEFAULT_MAX_CANDIDATES, DEFAULT_SR_THRESHOLD};
use statlink_core::stats::load_statistics;
use statlink_core::timeline::{build_all, map_concept, MappingMode, MappingTable, StopWords, REPORT_FILE};
use statlink_core::{BuildOptions, Catalog, ExpansionConfig};

use crate::api;
use crate::state::{AppState, CATALOG_FILE, OBSERVATIONS_FILE};

#[derive(Debug, Parser)]
#[command(name = "statlink", version, about = "Statistics linked to historical events")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate statistics files and stage canonical copies in the build directory.
    Ingest {
        #[arg(long)]
        catalog: PathBuf,
        #[arg(long)]
        observations: PathBuf,
        #[command(flatten)]
        build: BuildDirArg,
    },
    /// Expand each mapped indicator's concept and write the scored keywords as JSON lines.
    Expand {
        #[command(flatten)]
        build: BuildDirArg,
        #[command(flatten)]
        mapping: MappingArgs,
        #[command(flatten)]
        corpus: CorpusArgs,
        #[command(flatten)]
        expansion: ExpansionArgs,
        /// Output file; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build timelines for all mapped indicators, plus the run report.
    Build {
        #[command(flatten)]
        build: BuildDirArg,
        #[arg(long, env = "STATLINK_EVENTS")]
        events: PathBuf,
        #[command(flatten)]
        mapping: MappingArgs,
        #[command(flatten)]
        corpus: CorpusArgs,
        #[command(flatten)]
        expansion: ExpansionArgs,
    },
    /// Serve the JSON API (and the UI bundle, if given).
    Serve {
        #[command(flatten)]
        build: BuildDirArg,
        #[arg(long, env = "STATLINK_STATIC_DIR")]
        static_dir: Option<PathBuf>,
        #[arg(long, env = "STATLINK_HOST", default_value = "127.0.0.1")]
        host: String,
        #[arg(long, env = "STATLINK_PORT", default_value_t = 8080)]
        port: u16,
    },
    /// Print hit counts, distance and relatedness of two terms.
    Sr {
        a: String,
        b: String,
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long)]
        w_total: Option<u64>,
    },
    /// Print the ranked expansion of one concept.
    Related {
        concept: String,
        #[command(flatten)]
        corpus: CorpusArgs,
        #[command(flatten)]
        expansion: ExpansionArgs,
    },
}

#[derive(Debug, Args)]
pub struct BuildDirArg {
    #[arg(long, env = "STATLINK_BUILD_DIR", default_value = "build")]
    pub build_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct MappingArgs {
    /// Tab-separated `indicator_id<TAB>article_title` file.
    #[arg(long, env = "STATLINK_MAPPINGS")]
    pub mappings: Option<PathBuf>,
    #[arg(long, default_value = "manual")]
    pub mapping_mode: MappingMode,
    /// Stop-word list (one per line); the bundled English list by default.
    #[arg(long)]
    pub stop_words: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CorpusArgs {
    /// Fixture file (JSON lines) for replay and record modes.
    #[arg(long, env = "STATLINK_FIXTURES")]
    pub fixtures: Option<PathBuf>,
    #[arg(long, env = "STATLINK_CORPUS_MODE", default_value = "replay")]
    pub mode: Mode,
    #[arg(long, env = "STATLINK_WIKI_ENDPOINT", default_value = DEFAULT_WIKI_ENDPOINT)]
    pub wiki_endpoint: String,
    #[arg(long, env = "STATLINK_SPARQL_ENDPOINT", default_value = DEFAULT_SPARQL_ENDPOINT)]
    pub sparql_endpoint: String,
    /// Minimum delay between live requests, in milliseconds.
    #[arg(long, env = "STATLINK_RATE_LIMIT_MS", default_value_t = 100)]
    pub rate_limit_ms: u64,
}

#[derive(Debug, Args)]
pub struct ExpansionArgs {
    #[arg(long, default_value_t = DEFAULT_SR_THRESHOLD)]
    pub threshold: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_CANDIDATES)]
    pub max_candidates: usize,
    /// Article total W; asked from the corpus when absent.
    #[arg(long)]
    pub w_total: Option<u64>,
}

impl CorpusArgs {
    pub fn gateway(&self) -> anyhow::Result<Gateway> {
        let fixtures = || {
            self.fixtures.as_deref().with_context(|| format!("{:?} mode needs --fixtures", self.mode).to_lowercase())
        };
        let backend = || -> anyhow::Result<Box<HttpBackend>> {
            let config = HttpConfig {
                wiki_endpoint: self.wiki_endpoint.clone(),
                sparql_endpoint: self.sparql_endpoint.clone(),
                rate_limit: Duration::from_millis(self.rate_limit_ms),
                ..HttpConfig::default()
            };
            Ok(Box::new(HttpBackend::new(config)?))
        };
        Ok(match self.mode {
            Mode::Replay => Gateway::replay(FixtureStore::load(fixtures()?)?),
            Mode::Record => Gateway::record(backend()?, FixtureStore::open_for_record(fixtures()?)?),
            Mode::Live => Gateway::live(backend()?),
        })
    }
}

impl ExpansionArgs {
    fn config(&self, corpus: &Gateway) -> anyhow::Result<ExpansionConfig> {
        let w_total = match self.w_total {
            Some(w) => w,
            None => corpus.total_articles().context("asking the corpus for the article total")?,
        };
        Ok(ExpansionConfig::new(w_total, self.threshold, self.max_candidates)?)
    }
}

impl MappingArgs {
    fn table(&self) -> anyhow::Result<MappingTable> {
        match &self.mappings {
            Some(path) if !path.is_file() => bail!("no mappings file at {}", path.display()),
            Some(path) => Ok(MappingTable::load(path)?),
            None if self.mapping_mode == MappingMode::Manual => {
                bail!("no mappings file given; pass --mappings or use --mapping-mode auto")
            }
            None => Ok(MappingTable::default()),
        }
    }

    fn stop_words(&self) -> anyhow::Result<StopWords> {
        Ok(match &self.stop_words {
            Some(path) => StopWords::load(path)?,
            None => StopWords::default(),
        })
    }
}

fn staged_catalog(build_dir: &Path) -> anyhow::Result<Catalog> {
    let catalog = build_dir.join(CATALOG_FILE);
    if !catalog.is_file() {
        bail!("no staged statistics in {}; run `ingest` first", build_dir.display());
    }
    Ok(load_statistics(catalog, build_dir.join(OBSERVATIONS_FILE))?)
}

/// Run one command, writing its normal output to `out`.
pub fn run(cli: Cli, out: &mut dyn Write) -> anyhow::Result<()> {
    match cli.command {
        Command::Ingest { catalog, observations, build } => {
            let cat: Catalog = load_statistics(&catalog, &observations)?;
            let dir = &build.build_dir;
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            let write = |name: &str, f: &dyn Fn(&mut Vec<u8>) -> Result<(), csv::Error>| -> anyhow::Result<()> {
                let mut bytes = Vec::new();
                f(&mut bytes)?;
                let path = dir.join(name);
                fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))
            };
            write(CATALOG_FILE, &|b| cat.write_catalog_csv(b))?;
            write(OBSERVATIONS_FILE, &|b| cat.write_observations_csv(b))?;
            writeln!(
                out,
                "staged {} indicators and {} observations in {}",
                cat.indicators().len(),
                cat.observation_count(),
                dir.display()
            )?;
        }
        Command::Expand { build, mapping, corpus, expansion, out: target } => {
            let cat = staged_catalog(&build.build_dir)?;
            let table = mapping.table()?;
            let stop = mapping.stop_words()?;
            let gw = corpus.gateway()?;
            let config = expansion.config(&gw)?;
            let mut lines = Vec::new();
            let mut indicators: Vec<_> = cat.indicators().iter().collect();
            indicators.sort_by(|a, b| a.id.cmp(&b.id));
            let mut summary = Vec::new();
            for indicator in indicators {
                let m = match map_concept(indicator, &table, mapping.mapping_mode, &gw, &stop) {
                    Ok(m) => m,
                    Err(e) => {
                        summary.push(format!("{}\tskipped: {e}", indicator.id));
                        continue;
                    }
                };
                let exp = expand(&gw, &m.article_title, &config)?;
                exp.write_jsonl(&mut lines)?;
                summary.push(format!("{}\t{}\t{} keywords", indicator.id, m.article_title, exp.keywords.len()));
            }
            match target {
                Some(path) => {
                    fs::write(&path, &lines).with_context(|| format!("writing {}", path.display()))?;
                    for line in summary {
                        writeln!(out, "{line}")?;
                    }
                }
                None => out.write_all(&lines)?,
            }
        }
        Command::Build { build, events, mapping, corpus, expansion } => {
            let table = mapping.table()?;
            let cat = staged_catalog(&build.build_dir)?;
            let store = EventStore::load(&events)?;
            let gw = corpus.gateway()?;
            let options = BuildOptions {
                mode: mapping.mapping_mode,
                config: expansion.config(&gw)?,
                stop_words: mapping.stop_words()?,
                out_dir: build.build_dir.clone(),
            };
            let report = build_all(&cat, &table, &gw, &store, &options)?;
            writeln!(
                out,
                "built {} timelines ({} skipped); mean keywords {:.3}, mean events {:.3}; report in {}",
                report.rows.len(),
                report.skipped.len(),
                report.mean_keywords,
                report.mean_events,
                build.build_dir.join(REPORT_FILE).display()
            )?;
            for s in &report.skipped {
                writeln!(out, "skipped {}: {}", s.indicator_id, s.reason)?;
            }
        }
        Command::Serve { build, static_dir, host, port } => {
            let state = AppState::from_build_dir(&build.build_dir)?;
            let addr: SocketAddr =
                format!("{host}:{port}").parse().with_context(|| format!("bad listen address {host}:{port}"))?;
            let runtime = tokio::runtime::Runtime::new().context("starting the async runtime")?;
            runtime.block_on(serve(state, addr, static_dir, out))?;
        }
        Command::Sr { a, b, corpus, w_total } => {
            let gw = corpus.gateway()?;
            let a_hits = gw.hit_count(&a)?;
            let b_hits = gw.hit_count(&b)?;
            let co_hits = gw.co_hit_count(&a, &b)?;
            let w = match w_total {
                Some(w) => w,
                None => gw.total_articles()?,
            };
            let ngd = statlink_core::ngd(a_hits, b_hits, co_hits, w)?;
            let sr = statlink_core::relatedness::sr_from_ngd(ngd);
            writeln!(
                out,
                "a_hits\t{a_hits}\nb_hits\t{b_hits}\nco_hits\t{co_hits}\nw_total\t{w}\nngd\t{ngd}\nsr\t{sr}"
            )?;
        }
        Command::Related { concept, corpus, expansion } => {
            let gw = corpus.gateway()?;
            let config = expansion.config(&gw)?;
            let exp = expand(&gw, &concept, &config)?;
            for (rank, k) in exp.keywords.iter().enumerate() {
                let sources: Vec<&str> = k.sources.iter().map(|s| s.as_str()).collect();
                writeln!(out, "{}\t{}\t{:.6}\t{:.6}\t{}", rank + 1, k.label, k.sr, k.ngd, sources.join(","))?;
            }
        }
    }
    Ok(())
}

async fn serve(
    state: AppState,
    addr: SocketAddr,
    static_dir: Option<PathBuf>,
    out: &mut dyn Write,
) -> anyhow::Result<()> {
    if let Some(dir) = &static_dir {
        if !dir.is_dir() {
            bail!("static directory {} does not exist", dir.display());
        }
    }
    let app = api::router(state.clone(), static_dir.as_deref());
    let listener = tokio::net::TcpListener::bind(addr).await.with_context(|| format!("binding {addr}"))?;
    writeln!(out, "listening on http://{}", listener.local_addr()?)?;
    out.flush()?;
    #[cfg(unix)]
    tokio::spawn(reload_on_hangup(state));
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .context("serving")?;
    Ok(())
}

/// SIGHUP reloads the build directory; a failed reload keeps the old state.
#[cfg(unix)]
async fn reload_on_hangup(state: AppState) {
    use tokio::signal::unix::{signal, SignalKind};
    let Ok(mut hangups) = signal(SignalKind::hangup()) else { return };
    while hangups.recv().await.is_some() {
        let state = state.clone();
        match tokio::task::spawn_blocking(move || state.reload()).await {
            Ok(Ok(())) => eprintln!("reloaded build directory"),
            Ok(Err(e)) => eprintln!("reload failed, keeping previous state: {e:#}"),
            Err(e) => eprintln!("reload failed: {e}"),
        }
    }
}
