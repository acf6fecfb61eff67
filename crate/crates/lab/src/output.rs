//! Seeded streams and output files.

use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{ExperimentConfig, Resolved};
use crate::{Result, VERSION};

/// Stream `stream` of the generator seeded by `seed`.
pub fn task_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Provenance block carried by every output.
#[derive(Debug, Clone, Serialize)]
pub struct Stamp {
    pub version: &'static str,
    pub config_hash: String,
    pub seed: u64,
    pub config: ExperimentConfig,
}

impl Stamp {
    pub fn new(res: &Resolved) -> Self {
        Self {
            version: VERSION,
            config_hash: res.hash(),
            seed: res.config.seed,
            config: res.config.clone(),
        }
    }
}

pub fn output_path(res: &Resolved, name: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(&res.config.output_dir)?;
    Ok(res.config.output_dir.join(name))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
