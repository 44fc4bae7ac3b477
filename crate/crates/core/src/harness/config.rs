//! Experiment configuration and the flat `key = value` config-file format.
//!
//! ```text
//! # comment
//! [experiment]
//! encoding = amplitude
//! entanglement = ring
//! width = 6
//! depth = 4
//! seeds = 1,2,3
//! data = data/digits.csv
//! out = results
//! subset = 200
//!
//! [train]
//! max_epochs = 100
//! batch_size = 16
//! initial_lr = 0.01
//!
//! [grid]
//! amplitude_widths = 6,8,10,12,14
//! angle_widths = 8,10,12,14
//! depths = 2,4,6,8,10
//! entanglements = ring,none
//! skip = amplitude:none:14
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::ansatz::{AnsatzSpec, Entanglement};
use crate::data::DIGIT_FEATURES;
use crate::encoding::Encoding;
use crate::error::{LabError, Result};
use crate::training::TrainConfig;

/// Smallest register that holds the 64 pixel amplitudes.
pub const MIN_AMPLITUDE_WIDTH: usize = 6;
/// Smallest PCA dimension used with angle encoding.
pub const MIN_ANGLE_WIDTH: usize = 8;

pub const DEFAULT_SEEDS: [u64; 3] = [1, 2, 3];

/// One cell of a sweep: pipeline, circuit and training settings plus seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub encoding: Encoding,
    pub entanglement: Entanglement,
    pub width: usize,
    pub depth: usize,
    pub seeds: Vec<u64>,
    pub train: TrainConfig,
    pub data: PathBuf,
    pub out: PathBuf,
    /// Keep only the first M rows of the data file.
    pub subset: Option<usize>,
}

impl ExperimentConfig {
    pub fn spec(&self) -> AnsatzSpec {
        AnsatzSpec { width: self.width, depth: self.depth, entanglement: self.entanglement }
    }

    pub fn validate(&self) -> Result<()> {
        match self.encoding {
            Encoding::Amplitude if self.width < MIN_AMPLITUDE_WIDTH => {
                return Err(LabError::Config(format!(
                    "amplitude encoding of {DIGIT_FEATURES} features needs 2^n ≥ {DIGIT_FEATURES}, i.e. n ≥ {MIN_AMPLITUDE_WIDTH} (got n = {})",
                    self.width
                )));
            }
            Encoding::Angle if self.width < MIN_ANGLE_WIDTH => {
                return Err(LabError::Config(format!(
                    "angle encoding uses n = PCA components and needs n ≥ {MIN_ANGLE_WIDTH} (got n = {})",
                    self.width
                )));
            }
            Encoding::Angle if self.width > DIGIT_FEATURES => {
                return Err(LabError::Config(format!(
                    "angle encoding cannot keep more than {DIGIT_FEATURES} PCA components (got n = {})",
                    self.width
                )));
            }
            _ => {}
        }
        self.spec().validate().map_err(|e| LabError::Config(e.to_string()))?;
        if self.seeds.is_empty() {
            return Err(LabError::Config("at least one seed is required".into()));
        }
        if self.subset == Some(0) {
            return Err(LabError::Config("subset must be at least 1".into()));
        }
        self.train.validate()
    }

    /// Canonical identity of the cell: everything that determines its results.
    pub fn cell_key(&self) -> String {
        let t = &self.train;
        format!(
            "encoding={};entanglement={};width={};depth={};seeds={};subset={};max_epochs={};batch_size={};initial_lr={};lr_factor={};lr_patience={};stop_patience={};beta1={};beta2={};eps={}",
            self.encoding,
            self.entanglement,
            self.width,
            self.depth,
            join(&self.seeds),
            self.subset.map_or_else(|| "all".to_string(), |m| m.to_string()),
            t.max_epochs,
            t.batch_size,
            t.initial_lr,
            t.lr_factor,
            t.lr_patience,
            t.stop_patience,
            t.adam_beta1,
            t.adam_beta2,
            t.adam_eps,
        )
    }
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

/// Which cells a sweep runs.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub amplitude_widths: Vec<usize>,
    pub angle_widths: Vec<usize>,
    pub depths: Vec<usize>,
    pub entanglements: Vec<Entanglement>,
    /// (encoding, entanglement, width) combinations left out.
    pub skip: Vec<(Encoding, Entanglement, usize)>,
}

impl Default for GridSpec {
    /// Widths 6–14 (amplitude) and 8–14 (angle), depths 2–10, both ansatz
    /// families; unentangled amplitude encoding stops at n = 12.
    fn default() -> Self {
        Self {
            amplitude_widths: vec![6, 8, 10, 12, 14],
            angle_widths: vec![8, 10, 12, 14],
            depths: vec![2, 4, 6, 8, 10],
            entanglements: vec![Entanglement::Ring, Entanglement::Unentangled],
            skip: vec![(Encoding::Amplitude, Entanglement::Unentangled, 14)],
        }
    }
}

impl GridSpec {
    /// Expands the grid around `template`, which supplies seeds, training
    /// settings and paths.
    pub fn expand(&self, template: &ExperimentConfig) -> Vec<ExperimentConfig> {
        let mut cells = Vec::new();
        for (encoding, widths) in
            [(Encoding::Amplitude, &self.amplitude_widths), (Encoding::Angle, &self.angle_widths)]
        {
            for &entanglement in &self.entanglements {
                for &width in widths {
                    if self.skip.contains(&(encoding, entanglement, width)) {
                        continue;
                    }
                    for &depth in &self.depths {
                        cells.push(ExperimentConfig { encoding, entanglement, width, depth, ..template.clone() });
                    }
                }
            }
        }
        cells
    }
}

/// Parsed `[section]` → key → value map.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    sections: BTreeMap<String, BTreeMap<String, String>>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| LabError::io(format!("reading config {}", path.display()), e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut sections: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
        let mut current = String::from("experiment");
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                current = name.trim().to_ascii_lowercase();
                if !["experiment", "train", "grid"].contains(&current.as_str()) {
                    return Err(LabError::Config(format!("line {}: unknown section [{current}]", i + 1)));
                }
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| LabError::Config(format!("line {}: expected `key = value`", i + 1)))?;
            sections
                .entry(current.clone())
                .or_default()
                .insert(key.trim().to_ascii_lowercase(), value.trim().to_string());
        }
        Ok(Self { sections })
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.sections.get(section).and_then(|s| s.get(key)).map(String::as_str)
    }

    fn check_keys(&self, section: &str, allowed: &[&str]) -> Result<()> {
        if let Some(s) = self.sections.get(section) {
            if let Some(bad) = s.keys().find(|k| !allowed.contains(&k.as_str())) {
                return Err(LabError::Config(format!("unknown key `{bad}` in [{section}]")));
            }
        }
        Ok(())
    }

    /// Applies `[experiment]` and `[train]` values onto `cfg`.
    pub fn apply(&self, cfg: &mut ExperimentConfig) -> Result<()> {
        self.check_keys(
            "experiment",
            &["encoding", "entanglement", "width", "depth", "seeds", "seed", "data", "out", "subset"],
        )?;
        self.check_keys(
            "train",
            &[
                "max_epochs", "batch_size", "initial_lr", "lr_factor", "lr_patience", "stop_patience",
                "adam_beta1", "adam_beta2", "adam_eps",
            ],
        )?;
        self.check_keys(
            "grid",
            &["amplitude_widths", "angle_widths", "depths", "entanglements", "skip"],
        )?;
        let e = "experiment";
        if let Some(v) = self.get(e, "encoding") {
            cfg.encoding = v.parse()?;
        }
        if let Some(v) = self.get(e, "entanglement") {
            cfg.entanglement = v.parse()?;
        }
        if let Some(v) = self.get(e, "width") {
            cfg.width = parse_num("width", v)?;
        }
        if let Some(v) = self.get(e, "depth") {
            cfg.depth = parse_num("depth", v)?;
        }
        if let Some(v) = self.get(e, "seeds") {
            cfg.seeds = parse_list("seeds", v)?;
        }
        if let Some(v) = self.get(e, "seed") {
            cfg.seeds = vec![parse_num("seed", v)?];
        }
        if let Some(v) = self.get(e, "data") {
            cfg.data = PathBuf::from(v);
        }
        if let Some(v) = self.get(e, "out") {
            cfg.out = PathBuf::from(v);
        }
        if let Some(v) = self.get(e, "subset") {
            cfg.subset = Some(parse_num("subset", v)?);
        }
        let t = &mut cfg.train;
        let s = "train";
        macro_rules! set {
            ($field:ident) => {
                if let Some(v) = self.get(s, stringify!($field)) {
                    t.$field = parse_num(stringify!($field), v)?;
                }
            };
        }
        set!(max_epochs);
        set!(batch_size);
        set!(initial_lr);
        set!(lr_factor);
        set!(lr_patience);
        set!(stop_patience);
        set!(adam_beta1);
        set!(adam_beta2);
        set!(adam_eps);
        Ok(())
    }

    /// `[grid]` on top of the default grid.
    pub fn grid(&self) -> Result<GridSpec> {
        let mut g = GridSpec::default();
        let s = "grid";
        if let Some(v) = self.get(s, "amplitude_widths") {
            g.amplitude_widths = parse_list("amplitude_widths", v)?;
        }
        if let Some(v) = self.get(s, "angle_widths") {
            g.angle_widths = parse_list("angle_widths", v)?;
        }
        if let Some(v) = self.get(s, "depths") {
            g.depths = parse_list("depths", v)?;
        }
        if let Some(v) = self.get(s, "entanglements") {
            g.entanglements = split_list(v).map(str::parse).collect::<Result<_>>()?;
        }
        if let Some(v) = self.get(s, "skip") {
            g.skip = split_list(v)
                .map(|item| {
                    let parts: Vec<&str> = item.split(':').collect();
                    match parts.as_slice() {
                        [enc, ent, w] => Ok((enc.parse()?, ent.parse()?, parse_num("skip width", w)?)),
                        _ => Err(LabError::Config(format!(
                            "skip entry `{item}` must be encoding:entanglement:width"
                        ))),
                    }
                })
                .collect::<Result<_>>()?;
        }
        Ok(g)
    }
}

fn split_list(v: &str) -> impl Iterator<Item = &str> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty())
}

pub(crate) fn parse_num<N: std::str::FromStr>(key: &str, v: &str) -> Result<N> {
    v.trim().parse().map_err(|_| LabError::Config(format!("`{key}`: cannot parse `{v}`")))
}

pub(crate) fn parse_list<N: std::str::FromStr>(key: &str, v: &str) -> Result<Vec<N>> {
    split_list(v).map(|item| parse_num(key, item)).collect()
}
