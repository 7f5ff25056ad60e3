//! Asynchronous jobs: a FIFO worker pool, per-job state machine and an
//! append-only event log that any number of subscribers can replay.

use std::sync::{Arc, Mutex};
use std::thread;

use crossbeam_channel::{unbounded, Sender};
use serde::{Deserialize, Serialize};
use tokio::sync::Notify;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JobKind {
    Translate,
    Register,
    Stitch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JobState {
    Queued,
    Running,
    Done,
    Failed,
}

impl JobState {
    pub fn is_terminal(self) -> bool {
        matches!(self, JobState::Done | JobState::Failed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Progress {
    pub epoch: usize,
    pub loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobSnapshot {
    pub id: String,
    pub kind: JobKind,
    pub state: JobState,
    pub progress: Option<Progress>,
    pub result_ref: Option<String>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum JobEvent {
    Progress(Progress),
    Finished(JobSnapshot),
}

struct Inner {
    snapshot: JobSnapshot,
    events: Vec<JobEvent>,
}

pub struct Job {
    inner: Mutex<Inner>,
    notify: Notify,
}

impl Job {
    pub fn new(id: String, kind: JobKind) -> Arc<Self> {
        let snapshot = JobSnapshot { id, kind, state: JobState::Queued, progress: None, result_ref: None, error: None };
        Arc::new(Self { inner: Mutex::new(Inner { snapshot, events: Vec::new() }), notify: Notify::new() })
    }

    fn lock(&self) -> std::sync::MutexGuard<'_, Inner> {
        self.inner.lock().unwrap_or_else(|e| e.into_inner())
    }

    pub fn id(&self) -> String {
        self.lock().snapshot.id.clone()
    }

    pub fn snapshot(&self) -> JobSnapshot {
        self.lock().snapshot.clone()
    }

    pub fn mark_running(&self) {
        let mut g = self.lock();
        if g.snapshot.state == JobState::Queued {
            g.snapshot.state = JobState::Running;
        }
    }

    pub fn progress(&self, p: Progress) {
        {
            let mut g = self.lock();
            if g.snapshot.state.is_terminal() {
                return;
            }
            g.snapshot.progress = Some(p);
            g.events.push(JobEvent::Progress(p));
        }
        self.notify.notify_waiters();
    }

    /// Moves to `done` (with `result_ref`) or `failed`; later calls are ignored.
    pub fn finish(&self, outcome: Result<String, String>) {
        {
            let mut g = self.lock();
            if g.snapshot.state.is_terminal() {
                return;
            }
            match outcome {
                Ok(r) => {
                    g.snapshot.state = JobState::Done;
                    g.snapshot.result_ref = Some(r);
                }
                Err(e) => {
                    g.snapshot.state = JobState::Failed;
                    g.snapshot.error = Some(e);
                }
            }
            let snap = g.snapshot.clone();
            g.events.push(JobEvent::Finished(snap));
        }
        self.notify.notify_waiters();
    }

    /// Events from index `from` on; waits until at least one exists.
    pub async fn events_from(&self, from: usize) -> Vec<JobEvent> {
        loop {
            let notified = self.notify.notified();
            {
                let g = self.lock();
                if g.events.len() > from {
                    return g.events[from..].to_vec();
                }
            }
            notified.await;
        }
    }

    pub fn events(&self) -> Vec<JobEvent> {
        self.lock().events.clone()
    }
}

type Task = Box<dyn FnOnce() + Send + 'static>;

/// Fixed set of worker threads draining one FIFO queue.
pub struct JobPool {
    tx: Option<Sender<Task>>,
    handles: Vec<thread::JoinHandle<()>>,
}

impl JobPool {
    pub fn new(workers: usize) -> Self {
        let (tx, rx) = unbounded::<Task>();
        let handles = (0..workers.max(1))
            .map(|i| {
                let rx = rx.clone();
                thread::Builder::new()
                    .name(format!("flimreg-worker-{i}"))
                    .spawn(move || {
                        while let Ok(task) = rx.recv() {
                            task();
                        }
                    })
                    .expect("spawn worker thread")
            })
            .collect();
        Self { tx: Some(tx), handles }
    }

    /// Queues `work` for `job`; a panic inside `work` fails the job.
    pub fn submit<F>(&self, job: Arc<Job>, work: F)
    where
        F: FnOnce(&Job) -> Result<String, String> + Send + 'static,
    {
        let task: Task = Box::new(move || {
            job.mark_running();
            let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| work(&job)))
                .unwrap_or_else(|_| Err("job panicked".to_string()));
            job.finish(outcome);
        });
        if let Some(tx) = &self.tx {
            // the receivers live as long as the pool
            let _ = tx.send(task);
        }
    }
}

impl Drop for JobPool {
    fn drop(&mut self) {
        self.tx.take();
        for h in self.handles.drain(..) {
            let _ = h.join();
        }
    }
}
