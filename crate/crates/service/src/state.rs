//! Projects on disk and the in-memory caches and job tables around them.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use flimreg_core::datamodel::{load_hypercube, load_rgb, Hypercube, ProjectSession, RgbImage, PROJECT_FILE};
use flimreg_core::pipeline::RegistrationInputs;
use flimreg_core::registration::RegressionResult;

use crate::error::{ApiError, ApiResult};
use crate::jobs::{Job, JobPool};

/// What a finished job left behind for later requests.
pub enum Artifact {
    Registration { result: RegressionResult, inputs: RegistrationInputs },
    Image { png: PathBuf },
}

pub struct JobEntry {
    pub job: Arc<Job>,
    pub artifact: Mutex<Option<Arc<Artifact>>>,
}

pub struct Project {
    pub id: String,
    pub dir: PathBuf,
    /// Single writer (accept, registering inputs), many readers.
    pub session: RwLock<ProjectSession>,
    slide: Mutex<Option<(PathBuf, Arc<RgbImage>)>>,
    cubes: Mutex<HashMap<String, Arc<Hypercube>>>,
    jobs: RwLock<BTreeMap<String, Arc<JobEntry>>>,
    next_job: Mutex<u64>,
}

fn lock<T>(m: &Mutex<T>) -> std::sync::MutexGuard<'_, T> {
    m.lock().unwrap_or_else(|e| e.into_inner())
}

/// Largest `n` among names `<prefix>n` in `dir`.
fn max_numbered(dir: &Path, prefix: &str) -> u64 {
    fs::read_dir(dir)
        .map(|entries| {
            entries
                .filter_map(|e| e.ok()?.file_name().to_str()?.strip_prefix(prefix)?.parse::<u64>().ok())
                .max()
                .unwrap_or(0)
        })
        .unwrap_or(0)
}

impl Project {
    fn open(id: String, dir: PathBuf, session: ProjectSession) -> Arc<Self> {
        let next = max_numbered(&dir.join("jobs"), "job-") + 1;
        Arc::new(Self {
            id,
            dir,
            session: RwLock::new(session),
            slide: Mutex::new(None),
            cubes: Mutex::new(HashMap::new()),
            jobs: RwLock::new(BTreeMap::new()),
            next_job: Mutex::new(next),
        })
    }

    pub fn project_file(&self) -> PathBuf {
        self.dir.join(PROJECT_FILE)
    }

    pub fn read_session(&self) -> ProjectSession {
        self.session.read().unwrap_or_else(|e| e.into_inner()).clone()
    }

    /// Applies `f` to a copy of the session, saves it atomically and only
    /// then publishes it.
    pub fn update_session<R>(&self, f: impl FnOnce(&mut ProjectSession) -> ApiResult<R>) -> ApiResult<R> {
        let mut guard = self.session.write().unwrap_or_else(|e| e.into_inner());
        let mut next = guard.clone();
        let out = f(&mut next)?;
        if next != *guard {
            next.save_atomic(&self.project_file()).map_err(ApiError::persist)?;
            *guard = next;
        }
        Ok(out)
    }

    pub fn slide(&self) -> ApiResult<Arc<RgbImage>> {
        let wsi = self
            .read_session()
            .wsi
            .ok_or_else(|| ApiError::new(axum::http::StatusCode::CONFLICT, "UnknownWsi", "project has no slide yet"))?;
        let mut cache = lock(&self.slide);
        if let Some((path, img)) = cache.as_ref() {
            if *path == wsi.path {
                return Ok(img.clone());
            }
        }
        let img = Arc::new(load_rgb(&wsi.path)?);
        *cache = Some((wsi.path.clone(), img.clone()));
        Ok(img)
    }

    pub fn cube(&self, tile_id: &str) -> ApiResult<Arc<Hypercube>> {
        let manifest = self
            .read_session()
            .hypercube(tile_id)
            .map(|h| h.manifest.clone())
            .ok_or_else(|| ApiError::unknown("Tile", tile_id))?;
        if let Some(c) = lock(&self.cubes).get(tile_id) {
            return Ok(c.clone());
        }
        let cube = Arc::new(load_hypercube(&manifest)?);
        lock(&self.cubes).insert(tile_id.to_string(), cube.clone());
        Ok(cube)
    }

    pub fn new_job_id(&self) -> String {
        let mut n = lock(&self.next_job);
        let id = format!("job-{n}");
        *n += 1;
        id
    }

    pub fn job_dir(&self, job_id: &str) -> PathBuf {
        self.dir.join("jobs").join(job_id)
    }

    pub fn insert_job(&self, entry: Arc<JobEntry>) {
        let id = entry.job.id();
        self.jobs.write().unwrap_or_else(|e| e.into_inner()).insert(id, entry);
    }

    pub fn job(&self, job_id: &str) -> ApiResult<Arc<JobEntry>> {
        self.jobs
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .get(job_id)
            .cloned()
            .ok_or_else(|| ApiError::unknown("Job", job_id))
    }
}

impl JobEntry {
    pub fn artifact(&self) -> Option<Arc<Artifact>> {
        lock(&self.artifact).clone()
    }

    pub fn set_artifact(&self, a: Artifact) {
        *lock(&self.artifact) = Some(Arc::new(a));
    }
}

pub struct AppState {
    pub data_dir: PathBuf,
    pub pool: JobPool,
    projects: RwLock<BTreeMap<String, Arc<Project>>>,
    next_project: Mutex<u64>,
}

impl AppState {
    /// Opens (creating if needed) the data directory and every project in it.
    pub fn open(data_dir: &Path, workers: usize) -> flimreg_core::Result<Arc<Self>> {
        let root = data_dir.join("projects");
        fs::create_dir_all(&root).map_err(|e| flimreg_core::Error::Io { path: root.clone(), source: e })?;
        let mut projects = BTreeMap::new();
        for entry in fs::read_dir(&root).map_err(|e| flimreg_core::Error::Io { path: root.clone(), source: e })? {
            let Ok(entry) = entry else { continue };
            let dir = entry.path();
            let file = dir.join(PROJECT_FILE);
            if !file.is_file() {
                continue;
            }
            let id = entry.file_name().to_string_lossy().into_owned();
            match ProjectSession::load(&file) {
                Ok(session) => {
                    projects.insert(id.clone(), Project::open(id, dir, session));
                }
                Err(e) => log::warn!("skipping project {}: {e}", dir.display()),
            }
        }
        let next = max_numbered(&root, "p") + 1;
        Ok(Arc::new(Self {
            data_dir: data_dir.to_path_buf(),
            pool: JobPool::new(workers),
            projects: RwLock::new(projects),
            next_project: Mutex::new(next),
        }))
    }

    pub fn create_project(&self) -> ApiResult<Arc<Project>> {
        let id = {
            let mut n = lock(&self.next_project);
            let id = format!("p{n}");
            *n += 1;
            id
        };
        let dir = self.data_dir.join("projects").join(&id);
        fs::create_dir_all(&dir).map_err(|e| ApiError::persist(flimreg_core::Error::Io { path: dir.clone(), source: e }))?;
        let session = ProjectSession::default();
        session.save_atomic(&dir.join(PROJECT_FILE)).map_err(ApiError::persist)?;
        let project = Project::open(id.clone(), dir, session);
        self.projects.write().unwrap_or_else(|e| e.into_inner()).insert(id, project.clone());
        Ok(project)
    }

    pub fn project(&self, id: &str) -> ApiResult<Arc<Project>> {
        self.projects
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::unknown("Project", id))
    }
}
