use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::error::CliError;
use crate::settings::Settings;

/// Round-trip-safe decimal text: 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Collects the files a command writes so the manifest can list them.
pub struct Outputs {
    dir: PathBuf,
    files: Vec<String>,
}

impl Outputs {
    pub fn new(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf(), files: Vec::new() })
    }

    /// Writes one headered CSV table. `comment`, when given, becomes a leading
    /// `# ...` line.
    pub fn table(&mut self, name: &str, comment: Option<&str>, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
        let mut file = File::create(self.dir.join(name))?;
        if let Some(c) = comment {
            writeln!(file, "# {c}")?;
        }
        let mut w = csv::Writer::from_writer(file);
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()?;
        self.files.push(name.to_string());
        Ok(())
    }
}

#[derive(Serialize)]
struct RunManifest<'a> {
    command: &'a str,
    version: &'a str,
    config: &'a Settings,
    outputs: &'a [String],
    results: &'a serde_json::Value,
    notes: &'a [String],
    wall_seconds: f64,
}

/// Written last, after every output file exists.
pub fn write_manifest(
    outputs: Outputs,
    command: &str,
    config: &Settings,
    results: &serde_json::Value,
    notes: &[String],
    started: Instant,
) -> Result<PathBuf, CliError> {
    let m = RunManifest {
        command,
        version: env!("CARGO_PKG_VERSION"),
        config,
        outputs: &outputs.files,
        results,
        notes,
        wall_seconds: started.elapsed().as_secs_f64(),
    };
    let path = outputs.dir.join("manifest.json");
    std::fs::write(&path, serde_json::to_string_pretty(&m)? + "\n")?;
    Ok(path)
}
