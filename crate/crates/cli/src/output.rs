//! CSV emission: comma-separated, 17 significant digits, one comment line
//! carrying the fingerprint of `(config, seed, command)`.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use sha2::{Digest, Sha256};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone)]
pub struct Fingerprint {
    pub hex: String,
    pub seed: u64,
}

impl Fingerprint {
    pub fn new(canonical_config: &str, seed: u64, command: &str) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(canonical_config.as_bytes());
        hasher.update(format!("\nseed={seed}\ncommand={command}\nversion={VERSION}\n").as_bytes());
        let digest = hasher.finalize();
        let hex = digest[..16].iter().fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        });
        Fingerprint { hex, seed }
    }

    pub fn header(&self) -> String {
        format!("# sigexec {VERSION} fingerprint={} seed={}", self.hex, self.seed)
    }
}

pub fn number(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn render(fingerprint: &Fingerprint, columns: &[String], rows: &[Vec<f64>]) -> String {
    let mut out = String::with_capacity(rows.len() * columns.len() * 24 + 128);
    out.push_str(&fingerprint.header());
    out.push('\n');
    out.push_str(&columns.join(","));
    out.push('\n');
    for row in rows {
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&number(*v));
        }
        out.push('\n');
    }
    out
}

/// Writes to `path`, or stdout when `None`.
pub fn write(path: Option<&Path>, text: &str) -> std::io::Result<()> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(p, text)
        }
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    }
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}
