use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use qcext::quadrature::SchemeParams;
use serde::Serialize;
use serde_json::{json, Value};

/// Run metadata embedded in every artifact.
#[derive(Debug, Clone, Serialize)]
pub struct Meta {
    pub command: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spec_hash: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spec: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scheme: Option<SchemeParams>,
    pub seed: u64,
}

impl Meta {
    pub fn new(command: &'static str, seed: u64) -> Self {
        Meta { command, spec_hash: None, spec: None, scheme: None, seed }
    }

    pub fn with_spec(mut self, spec: &qcext::MapSpec) -> Self {
        self.spec_hash = Some(spec.hash());
        self.spec = Some(spec.to_json());
        self
    }

    pub fn with_scheme(mut self, scheme: SchemeParams) -> Self {
        self.scheme = Some(scheme);
        self
    }

    /// One `# key=value ...` line for CSV artifacts.
    pub fn csv_line(&self) -> String {
        let mut parts = vec![format!("command={}", self.command)];
        if let Some(h) = &self.spec_hash {
            parts.push(format!("spec_hash={h}"));
        }
        if let Some(s) = &self.scheme {
            parts.push(format!("method={} resolution={} scheme_seed={}", s.method.name(), s.resolution, s.seed));
            parts.push(format!("scheme_hash={}", s.hash()));
        }
        parts.push(format!("seed={}", self.seed));
        format!("# {}\n", parts.join(" "))
    }
}

pub enum Artifact {
    /// CSV text: a header line followed by rows.
    Csv { body: String, rows_only_on_stdout: bool },
    Json(Value),
}

pub fn emit(meta: &Meta, artifact: Artifact, out: Option<&Path>) -> Result<()> {
    let (stdout_text, file_text) = match artifact {
        Artifact::Json(result) => {
            let doc = json!({ "meta": meta, "result": result });
            let text = format!("{}\n", serde_json::to_string_pretty(&doc)?);
            (text.clone(), text)
        }
        Artifact::Csv { body, rows_only_on_stdout } => {
            let file = format!("{}{}", meta.csv_line(), body);
            let stdout = if rows_only_on_stdout {
                body.split_once('\n').map_or(String::new(), |(_, rows)| rows.to_string())
            } else {
                body
            };
            (stdout, file)
        }
    };
    match out {
        Some(path) => fs::write(path, file_text).with_context(|| format!("writing {}", path.display()))?,
        None => {
            let mut lock = std::io::stdout().lock();
            lock.write_all(stdout_text.as_bytes())?;
            lock.flush()?;
        }
    }
    Ok(())
}

/// Renders a CSV writer callback into a string.
pub fn csv_string<F>(write: F) -> Result<String>
where
    F: FnOnce(&mut Vec<u8>) -> qcext::Result<()>,
{
    let mut buf = Vec::new();
    write(&mut buf)?;
    Ok(String::from_utf8(buf)?)
}
