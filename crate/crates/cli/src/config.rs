//! Run configuration: a flat TOML file, overridden by flags, embedded in every summary.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Values a config file may set. Anything missing falls back to the flag or
/// the command's own default.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    /// Present in configs written back by a run; informational only.
    pub command: Option<String>,
    pub depth: Option<usize>,
    pub eval_depth: Option<usize>,
    pub epsilons: Option<Vec<f64>>,
    pub pairs: Option<usize>,
    pub seed: Option<u64>,
    pub h_min: Option<f64>,
    pub radius: Option<f64>,
    pub mesh_step: Option<f64>,
    pub scale: Option<f64>,
    pub out: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        toml::from_str(&text).map_err(|e| format!("bad config {}: {e}", path.display()))
    }

    /// Flags win over the file.
    pub fn overlay(self, flags: FileConfig) -> FileConfig {
        FileConfig {
            command: None,
            depth: flags.depth.or(self.depth),
            eval_depth: flags.eval_depth.or(self.eval_depth),
            epsilons: flags.epsilons.or(self.epsilons),
            pairs: flags.pairs.or(self.pairs),
            seed: flags.seed.or(self.seed),
            h_min: flags.h_min.or(self.h_min),
            radius: flags.radius.or(self.radius),
            mesh_step: flags.mesh_step.or(self.mesh_step),
            scale: flags.scale.or(self.scale),
            out: flags.out.or(self.out),
        }
    }
}

/// The fully resolved configuration of one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    pub depth: usize,
    pub eval_depth: usize,
    pub epsilons: Vec<f64>,
    pub pairs: usize,
    pub seed: u64,
    pub h_min: f64,
    pub radius: f64,
    pub mesh_step: f64,
    pub scale: f64,
    pub out: PathBuf,
}

impl RunConfig {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is plain data")
    }

    pub fn sha256(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config is plain data");
        format!("{:x}", Sha256::digest(bytes))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let file: FileConfig = toml::from_str("depth = 4\nseed = 9\nepsilons = [0.5]").unwrap();
        let flags = FileConfig {
            depth: Some(6),
            ..Default::default()
        };
        let merged = file.overlay(flags);
        assert_eq!(merged.depth, Some(6));
        assert_eq!(merged.seed, Some(9));
        assert_eq!(merged.epsilons, Some(vec![0.5]));
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(toml::from_str::<FileConfig>("detph = 4").is_err());
    }

    #[test]
    fn round_trip_and_hash() {
        let c = RunConfig {
            command: "curve build".into(),
            depth: 5,
            eval_depth: 12,
            epsilons: vec![0.5, 0.25, 0.1],
            pairs: 10_000,
            seed: 7,
            h_min: 1.0 / 1024.0,
            radius: 2.5,
            mesh_step: 1.0 / 32.0,
            scale: 0.5,
            out: "out".into(),
        };
        let back: RunConfig = toml::from_str(&c.to_toml()).unwrap();
        let as_file: FileConfig = toml::from_str(&c.to_toml()).unwrap();
        assert_eq!(as_file.depth, Some(5));
        assert_eq!(back, c);
        assert_eq!(back.sha256(), c.sha256());
        let other = RunConfig {
            seed: 8,
            ..c.clone()
        };
        assert_ne!(other.sha256(), c.sha256());
    }
}
