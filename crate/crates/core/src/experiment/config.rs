use std::fmt::Write as _;
use std::path::PathBuf;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::consensus::WalkEdges;
use crate::sim::{CostModel, GenerationPolicy, Protocol, SimConfig, Topology, TopologyError, NS_PER_MS};
use crate::streaming::Combiner;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Line { line: usize, msg: String },
    #[error("{0}")]
    Invalid(String),
    #[error("topology: {0}")]
    Topology(#[from] TopologyError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

/// Every knob of one experiment. Unset keys keep the defaults below.
///
/// | key | default | meaning |
/// |---|---|---|
/// | `topology` | `3-clique` | built-in topology name |
/// | `topology_file` | unset | topology file, overrides `topology` |
/// | `protocol` | `direct-signal` | or `direct-mail` |
/// | `n_accounts` | 1000 | half fund the spends, half receive them |
/// | `txn_count` | 5000 | spend transactions |
/// | `bundle_size` | 20 | transactions per block; above 1 they form a bundle |
/// | `seed` | 0 | |
/// | `alpha` | 0.001 | random walk sharpness |
/// | `h` | 5 | genesis forwarding threshold |
/// | `forward_every` | 0 | insertions between forwarding checks, 0 disables |
/// | `difficulty` | 8 | proof of work leading zero bits |
/// | `latency_ms` | 10 | per link |
/// | `jitter_ms` | 0 | uniform extra delay per message |
/// | `drop_rate` | 0 | message loss probability |
/// | `timeout_hops` | 5 | pull timeout in link latencies |
/// | `walk` | `approvers` | or `parental` |
/// | `combiner` | `max` | or `min` |
/// | `poisson_gap_ms` | 0 | mean gap between blocks, 0 generates back to back |
/// | `hash_ns` `block_ns` `txn_ns` `insert_ns` `touch_ns` | see [`CostModel`] | simulated compute costs |
/// | `trace` | false | record every message |
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub topology: String,
    pub topology_file: Option<PathBuf>,
    pub protocol: Protocol,
    pub n_accounts: u64,
    pub txn_count: u64,
    pub bundle_size: usize,
    pub seed: u64,
    pub alpha: f64,
    pub h: u64,
    pub forward_every: u64,
    pub difficulty: u32,
    pub latency_ms: u64,
    pub jitter_ms: u64,
    pub drop_rate: f64,
    pub timeout_hops: u64,
    pub walk: WalkEdges,
    pub combiner: Combiner,
    pub poisson_gap_ms: u64,
    pub costs: CostModel,
    pub trace: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let sim = SimConfig::default();
        ExperimentConfig {
            topology: "3-clique".into(),
            topology_file: None,
            protocol: sim.protocol,
            n_accounts: 1_000,
            txn_count: 5_000,
            bundle_size: 20,
            seed: sim.seed,
            alpha: sim.alpha,
            h: sim.forward_h,
            forward_every: sim.forward_every,
            difficulty: sim.difficulty,
            latency_ms: sim.latency_ns / NS_PER_MS,
            jitter_ms: 0,
            drop_rate: sim.drop_rate,
            timeout_hops: sim.timeout_hops,
            walk: sim.walk,
            combiner: sim.combiner,
            poisson_gap_ms: 0,
            costs: sim.costs,
            trace: sim.trace,
        }
    }
}

fn parse_num<T: std::str::FromStr>(v: &str) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    v.parse::<T>().map_err(|e| format!("{v:?}: {e}"))
}

fn parse_bool(v: &str) -> Result<bool, String> {
    match v {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(format!("expected true or false, got {v:?}")),
    }
}

fn protocol_name(p: Protocol) -> &'static str {
    match p {
        Protocol::DirectSignal => "direct-signal",
        Protocol::DirectMail => "direct-mail",
    }
}

fn walk_name(w: WalkEdges) -> &'static str {
    match w {
        WalkEdges::Approvers => "approvers",
        WalkEdges::Parental => "parental",
    }
}

fn combiner_name(c: Combiner) -> &'static str {
    match c {
        Combiner::Max => "max",
        Combiner::Min => "min",
    }
}

impl ExperimentConfig {
    /// `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = ExperimentConfig::default();
        let mut seen = std::collections::BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| ConfigError::Line { line: line_no, msg };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected key = value, got {line:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            if let Some(prev) = seen.insert(key.to_string(), line_no) {
                return Err(err(format!("{key} already set on line {prev}")));
            }
            cfg.set(key, value).map_err(err)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn set(&mut self, key: &str, v: &str) -> Result<(), String> {
        match key {
            "topology" => self.topology = v.to_string(),
            "topology_file" => self.topology_file = Some(PathBuf::from(v)),
            "protocol" => {
                self.protocol = match v {
                    "direct-signal" => Protocol::DirectSignal,
                    "direct-mail" => Protocol::DirectMail,
                    _ => return Err(format!("unknown protocol {v:?}")),
                }
            }
            "n_accounts" => self.n_accounts = parse_num(v)?,
            "txn_count" => self.txn_count = parse_num(v)?,
            "bundle_size" => self.bundle_size = parse_num(v)?,
            "seed" => self.seed = parse_num(v)?,
            "alpha" => self.alpha = parse_num(v)?,
            "h" => self.h = parse_num(v)?,
            "forward_every" => self.forward_every = parse_num(v)?,
            "difficulty" => self.difficulty = parse_num(v)?,
            "latency_ms" => self.latency_ms = parse_num(v)?,
            "jitter_ms" => self.jitter_ms = parse_num(v)?,
            "drop_rate" => self.drop_rate = parse_num(v)?,
            "timeout_hops" => self.timeout_hops = parse_num(v)?,
            "walk" => {
                self.walk = match v {
                    "approvers" => WalkEdges::Approvers,
                    "parental" => WalkEdges::Parental,
                    _ => return Err(format!("unknown walk {v:?}")),
                }
            }
            "combiner" => {
                self.combiner = match v {
                    "max" => Combiner::Max,
                    "min" => Combiner::Min,
                    _ => return Err(format!("unknown combiner {v:?}")),
                }
            }
            "poisson_gap_ms" => self.poisson_gap_ms = parse_num(v)?,
            "hash_ns" => self.costs.hash_ns = parse_num(v)?,
            "block_ns" => self.costs.block_ns = parse_num(v)?,
            "txn_ns" => self.costs.txn_ns = parse_num(v)?,
            "insert_ns" => self.costs.insert_ns = parse_num(v)?,
            "touch_ns" => self.costs.touch_ns = parse_num(v)?,
            "trace" => self.trace = parse_bool(v)?,
            _ => return Err(format!("unknown key {key:?}")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if self.n_accounts < 2 || !self.n_accounts.is_multiple_of(2) {
            return bad(format!("n_accounts must be even and at least 2, got {}", self.n_accounts));
        }
        if self.txn_count == 0 {
            return bad("txn_count must be positive".into());
        }
        // Every funded output is split evenly, so it must stay positive.
        if self.outputs_per_account() > super::workload::RAMP_AMOUNT {
            return bad(format!("txn_count {} too large for {} accounts", self.txn_count, self.n_accounts));
        }
        if self.bundle_size == 0 {
            return bad("bundle_size must be positive".into());
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return bad(format!("alpha must be non-negative, got {}", self.alpha));
        }
        if !(0.0..1.0).contains(&self.drop_rate) {
            return bad(format!("drop_rate must lie in [0, 1), got {}", self.drop_rate));
        }
        if self.difficulty > 24 {
            return bad(format!("difficulty above 24 bits is not supported, got {}", self.difficulty));
        }
        if self.latency_ms == 0 {
            return bad("latency_ms must be positive".into());
        }
        if self.timeout_hops == 0 {
            return bad("timeout_hops must be positive".into());
        }
        if self.topology_file.is_none() {
            Topology::builtin(&self.topology)?;
        }
        Ok(())
    }

    pub fn group_size(&self) -> u64 {
        self.n_accounts / 2
    }

    /// Spend pairs; an odd count leaves the last spend unpaired.
    pub fn pair_count(&self) -> u64 {
        self.txn_count.div_ceil(2)
    }

    pub fn outputs_per_account(&self) -> u64 {
        self.pair_count().div_ceil(self.group_size().max(1))
    }

    pub fn load_topology(&self) -> Result<Topology, ConfigError> {
        match &self.topology_file {
            None => Ok(Topology::builtin(&self.topology)?),
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
                    path: path.clone(),
                    source,
                })?;
                Ok(Topology::parse(&self.topology, &text)?)
            }
        }
    }

    pub fn sim_config(&self) -> SimConfig {
        SimConfig {
            protocol: self.protocol,
            latency_ns: self.latency_ms * NS_PER_MS,
            jitter_ns: self.jitter_ms * NS_PER_MS,
            drop_rate: self.drop_rate,
            timeout_hops: self.timeout_hops,
            difficulty: self.difficulty,
            alpha: self.alpha,
            walk: self.walk,
            combiner: self.combiner,
            seed: self.seed,
            costs: self.costs,
            generation: match self.poisson_gap_ms {
                0 => GenerationPolicy::Saturated,
                ms => GenerationPolicy::Poisson { mean_gap_ns: ms * NS_PER_MS },
            },
            forward_every: self.forward_every,
            forward_h: self.h,
            trace: self.trace,
        }
    }

    /// Every setting, one sorted `key=value` line each. Parsing the result
    /// gives back an equal config.
    pub fn normalized(&self) -> String {
        let mut kv: Vec<(&str, String)> = vec![
            ("alpha", format!("{:?}", self.alpha)),
            ("block_ns", self.costs.block_ns.to_string()),
            ("bundle_size", self.bundle_size.to_string()),
            ("combiner", combiner_name(self.combiner).into()),
            ("difficulty", self.difficulty.to_string()),
            ("drop_rate", format!("{:?}", self.drop_rate)),
            ("forward_every", self.forward_every.to_string()),
            ("h", self.h.to_string()),
            ("hash_ns", self.costs.hash_ns.to_string()),
            ("insert_ns", self.costs.insert_ns.to_string()),
            ("jitter_ms", self.jitter_ms.to_string()),
            ("latency_ms", self.latency_ms.to_string()),
            ("n_accounts", self.n_accounts.to_string()),
            ("poisson_gap_ms", self.poisson_gap_ms.to_string()),
            ("protocol", protocol_name(self.protocol).into()),
            ("seed", self.seed.to_string()),
            ("timeout_hops", self.timeout_hops.to_string()),
            ("topology", self.topology.clone()),
            ("touch_ns", self.costs.touch_ns.to_string()),
            ("trace", self.trace.to_string()),
            ("txn_count", self.txn_count.to_string()),
            ("txn_ns", self.costs.txn_ns.to_string()),
            ("walk", walk_name(self.walk).into()),
        ];
        if let Some(p) = &self.topology_file {
            kv.push(("topology_file", p.display().to_string()));
        }
        kv.sort();
        let mut out = String::new();
        for (k, v) in kv {
            let _ = writeln!(out, "{k}={v}");
        }
        out
    }

    /// SHA-256 over the normalized config followed by the topology itself,
    /// so a changed topology file changes the hash.
    pub fn hash(&self, topo: &Topology) -> String {
        let mut h = Sha256::new();
        h.update(self.normalized().as_bytes());
        h.update(topo.to_text().as_bytes());
        hex::encode(h.finalize())
    }
}

pub(crate) fn protocol_label(p: Protocol) -> &'static str {
    protocol_name(p)
}
