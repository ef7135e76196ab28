//! Background execution of runs with live progress snapshots.

use std::collections::HashMap;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex, RwLock};

use altbudget_core::budget::MultiYearScenario;
use altbudget_core::ga::{GenerationStats, ProgressSink};
use altbudget_core::pipeline::{
    execute_prepared, prepare, PipelineError, Prepared, RunConfig, ScenarioResolver,
};
use tokio::sync::{watch, Semaphore};
use uuid::Uuid;

use crate::store::{RunRecord, RunStatus, Store};

/// State of a run owned by this process.
pub struct LiveRun {
    record: RwLock<RunRecord>,
    cancel: AtomicBool,
    version: watch::Sender<u64>,
}

impl LiveRun {
    fn new(record: RunRecord) -> Self {
        Self {
            record: RwLock::new(record),
            cancel: AtomicBool::new(false),
            version: watch::Sender::new(0),
        }
    }

    pub fn snapshot(&self) -> RunRecord {
        self.record.read().unwrap().clone()
    }

    /// Generations recorded from index `from` on, and the status.
    pub fn progress_since(&self, from: usize) -> (Vec<GenerationStats>, RunStatus) {
        let r = self.record.read().unwrap();
        (r.trace.get(from..).unwrap_or_default().to_vec(), r.status)
    }

    pub fn subscribe(&self) -> watch::Receiver<u64> {
        self.version.subscribe()
    }

    fn update(&self, f: impl FnOnce(&mut RunRecord)) {
        f(&mut self.record.write().unwrap());
        self.version.send_modify(|v| *v += 1);
    }
}

struct LiveSink(Arc<LiveRun>);

impl ProgressSink for LiveSink {
    fn on_generation(&mut self, stats: &GenerationStats) {
        self.0.update(|r| r.trace.push(*stats));
    }

    fn cancelled(&self) -> bool {
        self.0.cancel.load(Ordering::Relaxed)
    }
}

/// Resolves scenario ids against the store.
pub struct StoreResolver<'a>(pub &'a Store);

impl ScenarioResolver for StoreResolver<'_> {
    fn resolve(&self, name: &str) -> Result<MultiYearScenario, String> {
        let id = Uuid::parse_str(name).map_err(|_| format!("'{name}' is not a scenario id"))?;
        match self.0.scenario(id) {
            Ok(Some(rec)) => Ok(rec.scenario),
            Ok(None) => Err("no such scenario".into()),
            Err(e) => Err(e.to_string()),
        }
    }
}

pub enum CancelOutcome {
    Requested,
    AlreadyFinished(RunStatus),
    Unknown,
}

/// Owns the runs started by this process. At most `workers` run at once;
/// the others wait as pending.
pub struct Executor {
    store: Store,
    live: Mutex<HashMap<Uuid, Arc<LiveRun>>>,
    slots: Arc<Semaphore>,
}

impl Executor {
    pub fn new(store: Store, workers: usize) -> Self {
        Self {
            store,
            live: Mutex::new(HashMap::new()),
            slots: Arc::new(Semaphore::new(workers.max(1))),
        }
    }

    pub fn store(&self) -> &Store {
        &self.store
    }

    pub fn live(&self, id: Uuid) -> Option<Arc<LiveRun>> {
        self.live.lock().unwrap().get(&id).cloned()
    }

    /// Current record, from memory if the run is ours, else from disk.
    pub fn record(&self, id: Uuid) -> std::io::Result<Option<RunRecord>> {
        match self.live(id) {
            Some(l) => Ok(Some(l.snapshot())),
            None => self.store.run(id),
        }
    }

    fn persist(&self, run: &LiveRun) {
        if let Err(e) = self.store.put_run(&run.snapshot()) {
            tracing::warn!(error = %e, "could not persist run record");
        }
    }

    /// Validates `config` and queues it. Must be called inside a Tokio
    /// runtime.
    pub fn submit(self: &Arc<Self>, config: RunConfig) -> Result<Uuid, PipelineError> {
        let prepared = prepare(&config, &StoreResolver(&self.store))?;
        let record = RunRecord::new(config);
        let id = record.run_id;
        let live = Arc::new(LiveRun::new(record));
        self.live.lock().unwrap().insert(id, live.clone());
        self.persist(&live);
        let this = self.clone();
        tokio::spawn(async move { this.drive(live, prepared).await });
        Ok(id)
    }

    async fn drive(self: Arc<Self>, live: Arc<LiveRun>, prepared: Prepared) {
        let _permit = self
            .slots
            .clone()
            .acquire_owned()
            .await
            .expect("semaphore is never closed");
        if live.cancel.load(Ordering::Relaxed) {
            let mut r = live.snapshot();
            r.advance(RunStatus::Cancelled);
            if let Err(e) = self.store.put_run(&r) {
                tracing::warn!(error = %e, "could not persist run record");
            }
            live.update(|cur| *cur = r);
            return;
        }
        live.update(|r| {
            r.advance(RunStatus::Running);
        });
        self.persist(&live);

        let ga = live.snapshot().config.ga;
        let sink_run = live.clone();
        let outcome = tokio::task::spawn_blocking(move || {
            execute_prepared(&prepared, &ga, &mut LiveSink(sink_run))
        })
        .await;
        let mut r = live.snapshot();
        match outcome {
            Ok(Ok(out)) => {
                r.trace = out.trace;
                r.results = out.results;
                r.advance(if out.cancelled {
                    RunStatus::Cancelled
                } else {
                    RunStatus::Done
                });
            }
            Ok(Err(e)) => {
                r.error = Some(e.to_string());
                r.advance(RunStatus::Failed);
            }
            Err(e) => {
                r.error = Some(format!("run task aborted: {e}"));
                r.advance(RunStatus::Failed);
            }
        }
        // on disk before observers see the final status
        if let Err(e) = self.store.put_run(&r) {
            tracing::warn!(error = %e, "could not persist run record");
        }
        live.update(|cur| *cur = r);
    }

    pub fn cancel(&self, id: Uuid) -> std::io::Result<CancelOutcome> {
        if let Some(live) = self.live(id) {
            let status = live.snapshot().status;
            if status.is_terminal() {
                return Ok(CancelOutcome::AlreadyFinished(status));
            }
            live.cancel.store(true, Ordering::Relaxed);
            return Ok(CancelOutcome::Requested);
        }
        Ok(match self.store.run(id)? {
            // runs on disk but not live belong to an earlier process and
            // were failed at startup
            Some(rec) => CancelOutcome::AlreadyFinished(rec.status),
            None => CancelOutcome::Unknown,
        })
    }
}
