//! Shared plumbing for the subcommands: error classes that map onto exit
//! codes, root-seed resolution, bundle-directory loading, and output headers.

use std::path::{Path, PathBuf};

use sniffy_core::env::bundle::{load_bundle, EnvBundle};
use sniffy_core::Genome;

/// Command failures, split by exit code: `Usage` exits 1 (a malformed
/// request), `Data` exits 2 (inputs that could not be read, produced, or
/// verified).
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) => m,
        }
    }
}

impl From<sniffy_core::Error> for CliError {
    fn from(e: sniffy_core::Error) -> Self {
        match e {
            // Config errors describe a bad request (out-of-range knob,
            // inconsistent options); everything else is broken data or IO.
            sniffy_core::Error::Config(m) => CliError::Usage(m),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

pub fn data(msg: impl Into<String>) -> CliError {
    CliError::Data(msg.into())
}

/// Root seed: `--seed` flag, else the `SNIFFY_SEED` environment variable,
/// else 0.
pub fn resolve_seed(flag: Option<u64>) -> Result<u64> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var("SNIFFY_SEED") {
        Ok(v) => v.trim().parse().map_err(|_| {
            usage(format!(
                "SNIFFY_SEED must be an unsigned integer seed, got {v:?}"
            ))
        }),
        Err(std::env::VarError::NotPresent) => Ok(0),
        Err(std::env::VarError::NotUnicode(_)) => {
            Err(usage("SNIFFY_SEED is set but is not valid UTF-8"))
        }
    }
}

/// Load every `*.gdm` bundle in a directory, sorted by file name so the
/// environment order is stable across runs and machines.
pub fn load_bundle_dir(dir: &Path) -> Result<Vec<(String, EnvBundle)>> {
    let entries = std::fs::read_dir(dir)
        .map_err(|e| data(format!("cannot read bundle directory {}: {e}", dir.display())))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "gdm"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(data(format!(
            "no .gdm bundles found in {}",
            dir.display()
        )));
    }
    let mut out = Vec::with_capacity(files.len());
    for path in files {
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        let bundle = load_bundle(&path)
            .map_err(|e| data(format!("cannot load bundle {name}: {e}")))?;
        out.push((name, bundle));
    }
    Ok(out)
}

/// Resolve a genome argument: the built-in preset names, or a preset file.
pub fn resolve_genome(spec: &str) -> Result<Genome> {
    match spec {
        "manual" => Ok(Genome::manual()),
        "evolved" => Ok(Genome::evolved()),
        path => Genome::load_preset(Path::new(path))
            .map_err(|e| data(format!("cannot load genome preset {path}: {e}"))),
    }
}

/// Standard output-file header: names the producing subcommand and the root
/// seed, plus subcommand-specific fields. Never includes timestamps or
/// absolute paths, so identical invocations yield identical bytes.
pub fn file_header(command: &str, root_seed: u64, extra: &[(&str, String)]) -> String {
    let mut s = format!("# sniffy {command}\n# root-seed: {root_seed}\n");
    for (k, v) in extra {
        s.push_str(&format!("# {k}: {v}\n"));
    }
    s
}

/// Parse an on/off switch (also accepts true/false).
pub fn parse_on_off(name: &str, value: &str) -> Result<bool> {
    match value {
        "on" | "true" => Ok(true),
        "off" | "false" => Ok(false),
        other => Err(usage(format!(
            "{name} must be \"on\" or \"off\", got {other:?}"
        ))),
    }
}
