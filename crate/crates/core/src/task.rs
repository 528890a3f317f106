//! Task and run files: chunk tables, candidate orderings, reading evidence
//! and agent parameters in TOML.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Deserialize;
use thiserror::Error;

use crate::agent::{
    AgentConfig, EpisodeSetup, Horizon, ReadAhead, Selection, Strategy,
};
use crate::categorical::Categorical;
use crate::inference::{GenerativeModel, PreferenceVector};
use crate::model::{
    CandidateSpace, Chunk, ChunkId, ChunkTable, ModelError, ReadingEvidenceModel,
    DEFAULT_CONTENT_RELIABILITY, UNINFORMATIVE_RELIABILITY,
};
use crate::trace::ExportFormat;

pub const SCHEMA_VERSION: u32 = 1;

const TABLE2: &str = include_str!("../tasks/table2.toml");

#[derive(Debug, Error)]
pub enum TaskError {
    #[error("{path}: {reason}")]
    Io { path: PathBuf, reason: String },
    #[error("{0}")]
    Syntax(String),
    #[error("schema {found} is not supported (expected {SCHEMA_VERSION})")]
    Schema { found: u32 },
    #[error("field `{field}`: {reason}")]
    Field { field: String, reason: String },
    #[error("field `{field}`: {source}")]
    Model {
        field: &'static str,
        source: ModelError,
    },
}

fn field(field: impl Into<String>, reason: impl Into<String>) -> TaskError {
    TaskError::Field {
        field: field.into(),
        reason: reason.into(),
    }
}

fn read(path: &Path) -> Result<String, TaskError> {
    std::fs::read_to_string(path).map_err(|e| TaskError::Io {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })
}

fn parse_toml<'de, T: Deserialize<'de>>(text: &'de str) -> Result<T, TaskError> {
    toml::from_str(text).map_err(|e| TaskError::Syntax(e.to_string()))
}

fn check_schema(found: u32) -> Result<(), TaskError> {
    if found == SCHEMA_VERSION {
        Ok(())
    } else {
        Err(TaskError::Schema { found })
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TaskFile {
    schema: u32,
    name: String,
    latent: String,
    source_order: Vec<u8>,
    chunks: Vec<ChunkEntry>,
    orderings: Vec<OrderingEntry>,
    #[serde(default)]
    preferences: PreferenceEntry,
}

#[derive(Debug, Deserialize, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
enum KindEntry {
    Content,
    Punctuation,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChunkEntry {
    id: u8,
    kind: KindEntry,
    #[serde(default)]
    source: String,
    target: String,
    host: Option<u8>,
    reliability: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct OrderingEntry {
    label: String,
    slots: Vec<u8>,
    prior: Option<f64>,
    #[serde(default)]
    preference: f64,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct PreferenceEntry {
    progress_bonus: Option<f64>,
    inconsistency_penalty: Option<f64>,
}

/// A validated task: the candidate space, its reading channel, preferences
/// over completed translations and the ordering the source text favours.
#[derive(Debug, Clone)]
pub struct Task {
    pub name: String,
    pub space: Arc<CandidateSpace>,
    pub evidence: ReadingEvidenceModel,
    pub prefs: PreferenceVector,
    pub latent: usize,
}

impl Task {
    pub fn parse(text: &str) -> Result<Self, TaskError> {
        let file: TaskFile = parse_toml(text)?;
        check_schema(file.schema)?;
        Self::from_file(file)
    }

    pub fn load(path: &Path) -> Result<Self, TaskError> {
        Self::parse(&read(path)?)
    }

    /// The bundled six-ordering English–Japanese task.
    pub fn table2() -> Self {
        Self::parse(TABLE2).expect("bundled task is valid")
    }

    pub fn table2_source() -> &'static str {
        TABLE2
    }

    fn from_file(file: TaskFile) -> Result<Self, TaskError> {
        let chunks = file
            .chunks
            .iter()
            .map(|c| match c.kind {
                KindEntry::Content => Chunk::content(c.id, &c.source, &c.target),
                KindEntry::Punctuation => Chunk::punctuation(c.id, &c.target, c.host),
            })
            .collect();
        let source_order = file.source_order.iter().map(|&c| ChunkId(c)).collect();
        let table = ChunkTable::new(chunks, source_order).map_err(|source| TaskError::Model {
            field: "chunks",
            source,
        })?;

        let rows = file
            .orderings
            .iter()
            .map(|o| (o.label.clone(), o.slots.iter().map(|&c| ChunkId(c)).collect()))
            .collect();
        let mut space = CandidateSpace::build(table, rows).map_err(|source| TaskError::Model {
            field: "orderings",
            source,
        })?;

        let priors: Vec<Option<f64>> = file.orderings.iter().map(|o| o.prior).collect();
        if priors.iter().any(Option::is_some) {
            let weights: Option<Vec<f64>> = priors.into_iter().collect();
            let weights =
                weights.ok_or_else(|| field("orderings.prior", "give a prior for every ordering or none"))?;
            let prior = Categorical::from_weights(weights)
                .map_err(|e| field("orderings.prior", e.to_string()))?;
            space = space.with_prior(prior).map_err(|source| TaskError::Model {
                field: "orderings.prior",
                source,
            })?;
        }

        let n = space.len();
        let mut reliability = BTreeMap::new();
        for c in &file.chunks {
            let default = match c.kind {
                KindEntry::Content => DEFAULT_CONTENT_RELIABILITY,
                KindEntry::Punctuation => UNINFORMATIVE_RELIABILITY,
            };
            reliability.insert(ChunkId(c.id), c.reliability.unwrap_or(default));
        }
        let evidence = ReadingEvidenceModel::new(reliability, n).map_err(|source| {
            TaskError::Model {
                field: "chunks.reliability",
                source,
            }
        })?;

        let latent = space.index_of(&file.latent).map_err(|source| TaskError::Model {
            field: "latent",
            source,
        })?;

        let mut prefs = PreferenceVector::flat(n);
        prefs.log_pref = file.orderings.iter().map(|o| o.preference).collect();
        if let Some(b) = file.preferences.progress_bonus {
            prefs.progress_bonus = b;
        }
        if let Some(p) = file.preferences.inconsistency_penalty {
            prefs.inconsistency_penalty = p;
        }
        if let Some(i) = prefs.log_pref.iter().position(|v| !v.is_finite()) {
            return Err(field(format!("orderings[{i}].preference"), "must be finite"));
        }

        Ok(Self {
            name: file.name,
            space: Arc::new(space),
            evidence,
            prefs,
            latent,
        })
    }

    pub fn model(&self) -> GenerativeModel {
        GenerativeModel::new(Arc::clone(&self.space), self.evidence.clone())
    }

    /// Same task with every content chunk at reliability `r`.
    pub fn with_content_reliability(mut self, r: f64) -> Self {
        self.evidence = self.evidence.with_content_reliability(self.space.table(), r);
        self
    }
}

#[derive(Debug, Deserialize, Clone, PartialEq)]
#[serde(untagged)]
enum HorizonEntry {
    Steps(usize),
    Named(String),
}

#[derive(Debug, Deserialize, Clone, Default, PartialEq)]
#[serde(deny_unknown_fields)]
struct TimingEntry {
    fixation_ms: Option<u64>,
    keystroke_ms: Option<u64>,
    pause_ms: Option<u64>,
    delete_ms: Option<u64>,
    consult_ms: Option<u64>,
}

/// A preset name plus any parameter overrides.
#[derive(Debug, Deserialize, Clone, Default, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct AgentBlock {
    preset: Option<String>,
    w_e: Option<f64>,
    w_p: Option<f64>,
    horizon: Option<HorizonEntry>,
    read_ahead: Option<String>,
    gamma_max: Option<f64>,
    gamma_min: Option<f64>,
    gamma_sensitivity: Option<f64>,
    zeta_base: Option<f64>,
    zeta_min: Option<f64>,
    zeta_max: Option<f64>,
    zeta_sensitivity: Option<f64>,
    beta: Option<f64>,
    theta_entropy: Option<f64>,
    theta_gamma: Option<f64>,
    revision: Option<bool>,
    selection: Option<String>,
    max_policies: Option<usize>,
    #[serde(default)]
    timing: TimingEntry,
}

impl AgentBlock {
    pub fn preset(name: &str) -> Self {
        Self {
            preset: Some(name.to_string()),
            ..Self::default()
        }
    }

    /// Reads a standalone agent file (`schema` plus the block's fields).
    pub fn load(path: &Path) -> Result<Self, TaskError> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct AgentFile {
            schema: u32,
            #[serde(flatten)]
            agent: AgentBlock,
        }
        let text = read(path)?;
        let file: AgentFile = parse_toml(&text)?;
        check_schema(file.schema)?;
        Ok(file.agent)
    }

    fn has_overrides(&self) -> bool {
        let bare = Self {
            preset: self.preset.clone(),
            ..Self::default()
        };
        *self != bare
    }

    pub fn resolve(&self) -> Result<AgentConfig, TaskError> {
        let name = self.preset.as_deref().unwrap_or("head_starter");
        let strategy =
            Strategy::parse(name).ok_or_else(|| field("agent.preset", format!("unknown preset {name:?}")))?;
        let mut cfg = AgentConfig::preset(strategy);
        if self.has_overrides() {
            cfg.strategy = Strategy::Custom;
        }
        let set = |slot: &mut f64, v: Option<f64>, name: &str| -> Result<(), TaskError> {
            if let Some(v) = v {
                if !v.is_finite() {
                    return Err(field(format!("agent.{name}"), "must be finite"));
                }
                *slot = v;
            }
            Ok(())
        };
        set(&mut cfg.weights.epistemic, self.w_e, "w_e")?;
        set(&mut cfg.weights.pragmatic, self.w_p, "w_p")?;
        let a = &mut cfg.affect;
        set(&mut a.gamma_max, self.gamma_max, "gamma_max")?;
        set(&mut a.gamma_min, self.gamma_min, "gamma_min")?;
        set(&mut a.gamma_sensitivity, self.gamma_sensitivity, "gamma_sensitivity")?;
        set(&mut a.zeta_base, self.zeta_base, "zeta_base")?;
        set(&mut a.zeta_min, self.zeta_min, "zeta_min")?;
        set(&mut a.zeta_max, self.zeta_max, "zeta_max")?;
        set(&mut a.zeta_sensitivity, self.zeta_sensitivity, "zeta_sensitivity")?;
        set(&mut a.beta, self.beta, "beta")?;
        set(&mut cfg.theta_entropy, self.theta_entropy, "theta_entropy")?;
        set(&mut cfg.theta_gamma, self.theta_gamma, "theta_gamma")?;

        if !(0.0 < a.gamma_min && a.gamma_min <= a.gamma_max) {
            return Err(field("agent.gamma_min", "need 0 < gamma_min <= gamma_max"));
        }
        if !(0.0 < a.zeta_min && a.zeta_min <= a.zeta_base && a.zeta_base <= a.zeta_max) {
            return Err(field("agent.zeta_base", "need 0 < zeta_min <= zeta_base <= zeta_max"));
        }
        if !(0.0..=1.0).contains(&a.beta) {
            return Err(field("agent.beta", "must lie in [0, 1]"));
        }

        if let Some(h) = &self.horizon {
            cfg.horizon = match h {
                HorizonEntry::Steps(n) if *n >= 1 => Horizon::Fixed(*n),
                HorizonEntry::Named(s) if s == "unread" => Horizon::UnreadChunks { max: 4 },
                _ => return Err(field("agent.horizon", "expected an integer >= 1 or \"unread\"")),
            };
        }
        if let Some(r) = &self.read_ahead {
            cfg.read_ahead = match r.as_str() {
                "on_demand" => ReadAhead::OnDemand,
                "full" => ReadAhead::Full,
                _ => return Err(field("agent.read_ahead", "expected \"on_demand\" or \"full\"")),
            };
        }
        if let Some(s) = &self.selection {
            cfg.selection = match s.as_str() {
                "argmax" => Selection::Argmax,
                "sample" => Selection::Sample,
                _ => return Err(field("agent.selection", "expected \"argmax\" or \"sample\"")),
            };
        }
        if let Some(r) = self.revision {
            cfg.revision = r;
        }
        if let Some(m) = self.max_policies {
            if m < 2 {
                return Err(field("agent.max_policies", "must be at least 2"));
            }
            cfg.max_policies = m;
        }
        let t = &self.timing;
        let timing = &mut cfg.timing;
        for (slot, v) in [
            (&mut timing.fixation_ms, t.fixation_ms),
            (&mut timing.keystroke_ms, t.keystroke_ms),
            (&mut timing.pause_ms, t.pause_ms),
            (&mut timing.delete_ms, t.delete_ms),
            (&mut timing.consult_ms, t.consult_ms),
        ] {
            if let Some(v) = v {
                *slot = v;
            }
        }
        Ok(cfg)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunFile {
    schema: u32,
    task: Option<PathBuf>,
    latent: Option<String>,
    #[serde(default)]
    cues: BTreeMap<String, String>,
    reliability: Option<f64>,
    seeds: Vec<u64>,
    #[serde(default = "default_max_steps")]
    max_steps: usize,
    output: Option<PathBuf>,
    #[serde(default = "default_formats")]
    formats: Vec<String>,
    #[serde(default)]
    agent: AgentBlock,
}

fn default_max_steps() -> usize {
    100
}

fn default_formats() -> Vec<String> {
    vec!["tsv".into(), "svg".into()]
}

/// Everything a simulation run needs, validated.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub task: Task,
    pub agent: AgentConfig,
    pub setup: EpisodeSetup,
    pub seeds: Vec<u64>,
    pub max_steps: usize,
    pub output: Option<PathBuf>,
    pub formats: Vec<ExportFormat>,
}

impl RunConfig {
    /// Parses a run file. A relative `task` path is resolved against
    /// `base`; without one the bundled task is used.
    pub fn parse(text: &str, base: &Path) -> Result<Self, TaskError> {
        let file: RunFile = parse_toml(text)?;
        check_schema(file.schema)?;
        let mut task = match &file.task {
            Some(p) => Task::load(&base.join(p))?,
            None => Task::table2(),
        };
        if let Some(r) = file.reliability {
            if !(0.0..=1.0).contains(&r) {
                return Err(field("reliability", "must lie in [0, 1]"));
            }
            task = task.with_content_reliability(r);
        }
        let latent = match &file.latent {
            Some(l) => task.space.index_of(l).map_err(|source| TaskError::Model {
                field: "latent",
                source,
            })?,
            None => task.latent,
        };
        let mut setup = EpisodeSetup::new(latent);
        for (chunk, label) in &file.cues {
            let id: u8 = chunk
                .parse()
                .map_err(|_| field(format!("cues.{chunk}"), "key must be a chunk id"))?;
            if task.space.table().get(ChunkId(id)).is_none() {
                return Err(field(format!("cues.{chunk}"), "no such chunk"));
            }
            let cue = task.space.index_of(label).map_err(|source| TaskError::Model {
                field: "cues",
                source,
            })?;
            setup = setup.with_cue(ChunkId(id), cue);
        }
        if file.seeds.is_empty() {
            return Err(field("seeds", "need at least one seed"));
        }
        let formats = file
            .formats
            .iter()
            .map(|f| f.parse().map_err(|e: crate::trace::TraceError| field("formats", e.to_string())))
            .collect::<Result<_, _>>()?;
        Ok(Self {
            agent: file.agent.resolve()?,
            task,
            setup,
            seeds: file.seeds,
            max_steps: file.max_steps,
            output: file.output.map(|o| base.join(o)),
            formats,
        })
    }

    pub fn load(path: &Path) -> Result<Self, TaskError> {
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&read(path)?, base)
    }
}
