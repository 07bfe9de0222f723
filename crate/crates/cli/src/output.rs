//! Output-file assembly: region CSVs, sidecar manifests, plot data blocks.

use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use secrecy_lab::{GridSpec, RateRegion, TripleRegion};

/// Provenance record written next to every output file.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub formula: Option<String>,
    pub channel_digest: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub tool_version: String,
    pub duration_ms: u128,
    pub conjectured: bool,
    pub outputs: Vec<OutputRef>,
}

#[derive(Debug, Serialize)]
pub struct OutputRef {
    pub file: String,
    pub sha256: String,
}

impl RunManifest {
    pub fn new(subcommand: &str, channel_digest: &str) -> Self {
        RunManifest {
            subcommand: subcommand.to_string(),
            formula: None,
            channel_digest: channel_digest.to_string(),
            grid: None,
            seed: None,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            duration_ms: 0,
            conjectured: false,
            outputs: Vec::new(),
        }
    }

    pub fn record_output(&mut self, path: &Path, bytes: &[u8]) {
        let mut hasher = Sha256::new();
        hasher.update(bytes);
        let digest = hasher.finalize();
        let mut hex = String::with_capacity(64);
        for b in digest {
            hex.push_str(&format!("{b:02x}"));
        }
        self.outputs.push(OutputRef {
            file: path
                .file_name()
                .map(|f| f.to_string_lossy().into_owned())
                .unwrap_or_default(),
            sha256: hex,
        });
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        let mut text = serde_json::to_string_pretty(self).expect("manifest json");
        text.push('\n');
        std::fs::write(path, text)
    }
}

/// 12 significant digits, reproducible across runs.
pub fn sig12(v: f64) -> String {
    format!("{v:.11e}")
}

pub fn region_csv(region: &RateRegion) -> String {
    let mut out = String::from("r1,re\n");
    for p in &region.hull {
        out.push_str(&sig12(p.r1));
        out.push(',');
        out.push_str(&sig12(p.re));
        out.push('\n');
    }
    out
}

pub fn triple_csv(region: &TripleRegion) -> String {
    let mut out = String::from("r1,re,r0\n");
    for (r0, slice) in &region.slices {
        for p in &slice.hull {
            out.push_str(&sig12(p.r1));
            out.push(',');
            out.push_str(&sig12(p.re));
            out.push(',');
            out.push_str(&sig12(*r0));
            out.push('\n');
        }
    }
    out
}

/// One whitespace-separated block per series, blank-line separated, with a
/// `# series: <name>` comment heading each block.
pub fn dat_blocks(series: &[(&str, Vec<(f64, f64)>)]) -> String {
    let mut out = String::new();
    for (i, (name, rows)) in series.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        out.push_str(&format!("# series: {name}\n"));
        for (a, b) in rows {
            out.push_str(&sig12(*a));
            out.push(' ');
            out.push_str(&sig12(*b));
            out.push('\n');
        }
    }
    out
}

pub fn out_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}
