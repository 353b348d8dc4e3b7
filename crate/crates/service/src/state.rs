use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use anyhow::{bail, Context};
use statlink_core::stats::load_statistics;
use statlink_core::timeline::{TimelineDoc, TIMELINES_DIR};
use statlink_core::Catalog;

/// Staged copies written by `ingest`, read by `build` and `serve`.
pub const CATALOG_FILE: &str = "catalog.csv";
pub const OBSERVATIONS_FILE: &str = "observations.csv";

/// Everything the API serves, loaded once from a build directory.
#[derive(Debug)]
pub struct Snapshot {
    pub catalog: Catalog,
    pub timelines: BTreeMap<String, TimelineDoc>,
}

impl Snapshot {
    pub fn load(build_dir: &Path) -> anyhow::Result<Self> {
        if !build_dir.is_dir() {
            bail!("build directory {} does not exist (run `ingest` and `build` first)", build_dir.display());
        }
        let catalog = load_statistics(build_dir.join(CATALOG_FILE), build_dir.join(OBSERVATIONS_FILE))
            .with_context(|| format!("loading statistics from {}", build_dir.display()))?;
        let mut timelines = BTreeMap::new();
        let dir = build_dir.join(TIMELINES_DIR);
        if dir.is_dir() {
            let mut paths: Vec<PathBuf> = std::fs::read_dir(&dir)
                .with_context(|| format!("reading {}", dir.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "json"))
                .collect();
            paths.sort();
            for path in paths {
                let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
                let doc: TimelineDoc =
                    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
                timelines.insert(doc.indicator_id.clone(), doc);
            }
        }
        Ok(Snapshot { catalog, timelines })
    }
}

/// Shared handle to the current snapshot. Readers clone the inner `Arc`
/// and never see a partially loaded state; `replace` swaps in a new one.
#[derive(Debug, Clone)]
pub struct AppState {
    current: Arc<RwLock<Arc<Snapshot>>>,
    build_dir: Option<PathBuf>,
}

impl AppState {
    pub fn new(snapshot: Snapshot) -> Self {
        AppState { current: Arc::new(RwLock::new(Arc::new(snapshot))), build_dir: None }
    }

    pub fn from_build_dir(build_dir: impl Into<PathBuf>) -> anyhow::Result<Self> {
        let build_dir = build_dir.into();
        let snapshot = Snapshot::load(&build_dir)?;
        Ok(AppState { build_dir: Some(build_dir), ..Self::new(snapshot) })
    }

    pub fn snapshot(&self) -> Arc<Snapshot> {
        self.current.read().expect("snapshot lock").clone()
    }

    pub fn replace(&self, snapshot: Snapshot) {
        *self.current.write().expect("snapshot lock") = Arc::new(snapshot);
    }

    /// Load the build directory again. On failure the old snapshot stays.
    pub fn reload(&self) -> anyhow::Result<()> {
        let Some(dir) = &self.build_dir else { bail!("state was not loaded from a build directory") };
        let snapshot = Snapshot::load(dir)?;
        self.replace(snapshot);
        Ok(())
    }
}
