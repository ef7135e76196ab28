//! One JSON document per record under the data directory.
//!
//! ```text
//! <data-dir>/scenarios/<id>.json
//! <data-dir>/runs/<id>.json
//! ```
//!
//! Writes go to a temporary file in the same directory which is then renamed
//! over the target, so readers never see a partial document.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use altbudget_core::budget::MultiYearScenario;
use altbudget_core::ga::GenerationStats;
use altbudget_core::pipeline::{BudgetAnchors, OperationalAnchors, RunConfig, SolutionReport};
use chrono::{DateTime, Utc};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use uuid::Uuid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Pending,
    Running,
    Done,
    Cancelled,
    Failed,
}

impl RunStatus {
    pub fn is_terminal(self) -> bool {
        matches!(self, Self::Done | Self::Cancelled | Self::Failed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run_id: Uuid,
    pub config: RunConfig,
    pub status: RunStatus,
    pub trace: Vec<GenerationStats>,
    pub results: Vec<SolutionReport>,
    #[serde(default)]
    pub error: Option<String>,
    pub created_at: DateTime<Utc>,
    #[serde(default)]
    pub started_at: Option<DateTime<Utc>>,
    #[serde(default)]
    pub finished_at: Option<DateTime<Utc>>,
}

impl RunRecord {
    pub fn new(config: RunConfig) -> Self {
        Self {
            run_id: Uuid::new_v4(),
            config,
            status: RunStatus::Pending,
            trace: Vec::new(),
            results: Vec::new(),
            error: None,
            created_at: Utc::now(),
            started_at: None,
            finished_at: None,
        }
    }

    /// Moves the status forward. Backward moves and moves out of a terminal
    /// state are refused.
    pub fn advance(&mut self, to: RunStatus) -> bool {
        if self.status.is_terminal() || to <= self.status {
            return false;
        }
        match to {
            RunStatus::Running => self.started_at = Some(Utc::now()),
            s if s.is_terminal() => self.finished_at = Some(Utc::now()),
            _ => {}
        }
        self.status = to;
        true
    }
}

/// Anchors stored with a scenario: a pair of budgets or a pair of genes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScenarioAnchors {
    Budget(BudgetAnchors),
    Genes(OperationalAnchors),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioRecord {
    pub scenario_id: Uuid,
    pub name: String,
    pub scenario: MultiYearScenario,
    #[serde(default)]
    pub anchors: Option<ScenarioAnchors>,
    pub created_at: DateTime<Utc>,
}

#[derive(Debug, Clone)]
pub struct Store {
    root: PathBuf,
}

const SCENARIOS: &str = "scenarios";
const RUNS: &str = "runs";

impl Store {
    pub fn open(root: impl Into<PathBuf>) -> io::Result<Self> {
        let root = root.into();
        fs::create_dir_all(root.join(SCENARIOS))?;
        fs::create_dir_all(root.join(RUNS))?;
        Ok(Self { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn path(&self, kind: &str, id: Uuid) -> PathBuf {
        self.root.join(kind).join(format!("{id}.json"))
    }

    fn write<T: Serialize>(&self, kind: &str, id: Uuid, value: &T) -> io::Result<()> {
        let dir = self.root.join(kind);
        let mut tmp = tempfile::NamedTempFile::new_in(&dir)?;
        serde_json::to_writer_pretty(&mut tmp, value)?;
        tmp.write_all(b"\n")?;
        tmp.as_file().sync_all()?;
        tmp.persist(self.path(kind, id)).map_err(|e| e.error)?;
        Ok(())
    }

    fn read<T: DeserializeOwned>(&self, kind: &str, id: Uuid) -> io::Result<Option<T>> {
        let path = self.path(kind, id);
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e),
        };
        match serde_json::from_slice(&bytes) {
            Ok(v) => Ok(Some(v)),
            Err(e) => {
                tracing::warn!(path = %path.display(), error = %e, "skipping unreadable record");
                Ok(None)
            }
        }
    }

    /// Every readable record of a kind, oldest file name first. Files that
    /// fail to parse are logged and skipped.
    fn list<T: DeserializeOwned>(&self, kind: &str) -> io::Result<Vec<T>> {
        let mut paths: Vec<PathBuf> = fs::read_dir(self.root.join(kind))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        paths.sort();
        let mut out = Vec::with_capacity(paths.len());
        for path in paths {
            let parsed = fs::read(&path)
                .map_err(|e| e.to_string())
                .and_then(|b| serde_json::from_slice(&b).map_err(|e| e.to_string()));
            match parsed {
                Ok(v) => out.push(v),
                Err(e) => {
                    tracing::warn!(path = %path.display(), error = %e, "skipping unreadable record")
                }
            }
        }
        Ok(out)
    }

    pub fn put_scenario(&self, record: &ScenarioRecord) -> io::Result<()> {
        self.write(SCENARIOS, record.scenario_id, record)
    }

    pub fn scenario(&self, id: Uuid) -> io::Result<Option<ScenarioRecord>> {
        self.read(SCENARIOS, id)
    }

    pub fn scenarios(&self) -> io::Result<Vec<ScenarioRecord>> {
        let mut all: Vec<ScenarioRecord> = self.list(SCENARIOS)?;
        all.sort_by(|a, b| {
            a.created_at
                .cmp(&b.created_at)
                .then(a.scenario_id.cmp(&b.scenario_id))
        });
        Ok(all)
    }

    pub fn put_run(&self, record: &RunRecord) -> io::Result<()> {
        self.write(RUNS, record.run_id, record)
    }

    pub fn run(&self, id: Uuid) -> io::Result<Option<RunRecord>> {
        self.read(RUNS, id)
    }

    pub fn runs(&self) -> io::Result<Vec<RunRecord>> {
        let mut all: Vec<RunRecord> = self.list(RUNS)?;
        all.sort_by(|a, b| {
            a.created_at
                .cmp(&b.created_at)
                .then(a.run_id.cmp(&b.run_id))
        });
        Ok(all)
    }

    /// Marks runs left pending or running by a previous process as failed.
    /// Returns how many were changed.
    pub fn fail_interrupted(&self) -> io::Result<usize> {
        let mut changed = 0;
        for mut run in self.runs()? {
            if !run.status.is_terminal() {
                run.advance(RunStatus::Failed);
                run.error = Some("interrupted by a service restart".into());
                self.put_run(&run)?;
                changed += 1;
            }
        }
        Ok(changed)
    }
}
