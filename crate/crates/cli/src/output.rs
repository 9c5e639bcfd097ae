use std::io::Write;
use std::path::Path;

use serde_json::{json, Value};

/// A report with a header naming the tool, its version, the command and
/// the full configuration.
pub fn document(command: &str, config: &Value, body: Value) -> Value {
    json!({
        "header": {
            "tool": "adelic",
            "version": env!("CARGO_PKG_VERSION"),
            "command": command,
            "config": config,
        },
        "body": body,
    })
}

/// Writes to a temporary file next to `path` and renames it into place,
/// so a failed run leaves no partial file behind.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        tmp.as_file().set_permissions(std::fs::Permissions::from_mode(0o644))?;
    }
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
