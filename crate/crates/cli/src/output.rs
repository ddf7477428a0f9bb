use std::io::Write;
use std::path::Path;

use serde_json::Value;

use crate::CliError;

/// Writes `bytes` to `path` through a temporary file in the same directory
/// followed by a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| CliError::Io(e.error))?;
    Ok(())
}

/// Emits the artifact and the one-line summary. With `--out` the artifact
/// goes to the file and the summary to stdout; otherwise the artifact goes to
/// stdout and the summary to stderr.
pub fn emit(out: Option<&Path>, artifact: &str, mut summary: Value) -> Result<(), CliError> {
    if let Value::Object(map) = &mut summary {
        map.insert("status".into(), Value::from("ok"));
        map.insert("out".into(), out.map(|p| Value::from(p.display().to_string())).unwrap_or(Value::Null));
    }
    match out {
        Some(path) => {
            write_atomic(path, artifact.as_bytes())?;
            println!("{summary}");
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(artifact.as_bytes())?;
            lock.flush()?;
            eprintln!("{summary}");
        }
    }
    Ok(())
}

pub fn json_pretty<T: serde::Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Validation(e.to_string()))?;
    s.push('\n');
    Ok(s)
}
