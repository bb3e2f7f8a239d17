//! Run manifest: config hash, seeds and SHA-256 digests of every input and
//! output file. It carries no timestamps or absolute output locations, so
//! two runs of one config produce byte-identical manifests.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use intimacy_core::seed::module_seed;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::DATA_FORMAT_VERSION;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Serialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Serialize)]
pub struct ModuleSeeds {
    pub split: u64,
    pub augment: u64,
    pub hash: u64,
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub toolkit_version: &'static str,
    pub data_format_version: u32,
    pub config_hash: String,
    pub seed: u64,
    pub module_seeds: ModuleSeeds,
    pub config: ExperimentConfig,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
}

pub fn digest(path: &Path, shown_as: String) -> Result<FileDigest> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(FileDigest {
        path: shown_as,
        sha256: hex::encode(Sha256::digest(&bytes)),
        bytes: bytes.len() as u64,
    })
}

/// Input files named by the config; a stopword directory contributes each
/// of its files in name order.
fn input_files(config: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let p = &config.paths;
    let mut files: Vec<PathBuf> = [&p.train, &p.test, &p.lexicon, &p.references]
        .into_iter()
        .flatten()
        .cloned()
        .collect();
    if let Some(dir) = &p.stopwords {
        let mut entries: Vec<PathBuf> = fs::read_dir(dir)
            .with_context(|| format!("listing {}", dir.display()))?
            .map(|e| e.map(|e| e.path()))
            .collect::<std::io::Result<_>>()?;
        entries.retain(|e| e.is_file());
        entries.sort();
        files.extend(entries);
    }
    Ok(files)
}

/// Builds the manifest for `outputs` (paths relative to the output
/// directory) and writes it as `manifest.json` in that directory.
pub fn write_manifest(config: &ExperimentConfig, outputs: &[PathBuf]) -> Result<Manifest> {
    let out_dir = &config.paths.output_dir;
    let inputs = input_files(config)?
        .iter()
        .map(|p| digest(p, p.display().to_string()))
        .collect::<Result<Vec<_>>>()?;
    let mut rel: Vec<&PathBuf> = outputs.iter().collect();
    rel.sort();
    rel.dedup();
    let outputs = rel
        .into_iter()
        .map(|r| digest(&out_dir.join(r), portable(r)))
        .collect::<Result<Vec<_>>>()?;
    let manifest = Manifest {
        toolkit_version: env!("CARGO_PKG_VERSION"),
        data_format_version: DATA_FORMAT_VERSION,
        config_hash: config.hash(),
        seed: config.seed,
        module_seeds: ModuleSeeds {
            split: module_seed(config.seed, "split"),
            augment: module_seed(config.seed, "augment"),
            hash: module_seed(config.seed, "hash"),
        },
        config: config.without_output_dir(),
        inputs,
        outputs,
    };
    crate::commands::write_json(&manifest, &out_dir.join(MANIFEST_FILE))?;
    Ok(manifest)
}

fn portable(path: &Path) -> String {
    path.components()
        .map(|c| c.as_os_str().to_string_lossy())
        .collect::<Vec<_>>()
        .join("/")
}
