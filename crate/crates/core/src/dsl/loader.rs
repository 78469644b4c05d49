use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

/// Resolves and reads `include` targets.
pub trait SourceLoader {
    /// Path of `target` as written in `from`.
    fn resolve(&self, from: &str, target: &str) -> String;

    /// Key used for include-cycle detection.
    fn identity(&self, path: &str) -> String {
        path.to_string()
    }

    fn load(&self, path: &str) -> Result<String, String>;
}

/// Refuses every include.
pub struct NoIncludes;

impl SourceLoader for NoIncludes {
    fn resolve(&self, _from: &str, target: &str) -> String {
        target.to_string()
    }

    fn load(&self, _path: &str) -> Result<String, String> {
        Err("includes are not available for in-memory input".into())
    }
}

/// Reads includes from disk, relative to the including file.
pub struct FsLoader;

impl SourceLoader for FsLoader {
    fn resolve(&self, from: &str, target: &str) -> String {
        let target = Path::new(target);
        if target.is_absolute() {
            return target.display().to_string();
        }
        let base = Path::new(from).parent().unwrap_or(Path::new(""));
        base.join(target).display().to_string()
    }

    fn identity(&self, path: &str) -> String {
        std::fs::canonicalize(path)
            .unwrap_or_else(|_| PathBuf::from(path))
            .display()
            .to_string()
    }

    fn load(&self, path: &str) -> Result<String, String> {
        std::fs::read_to_string(path).map_err(|e| e.to_string())
    }
}

/// In-memory file set, keyed by path. Paths are used verbatim.
#[derive(Debug, Default, Clone)]
pub struct MemoryLoader {
    pub files: BTreeMap<String, String>,
}

impl MemoryLoader {
    pub fn with(mut self, path: &str, text: &str) -> Self {
        self.files.insert(path.to_string(), text.to_string());
        self
    }
}

impl SourceLoader for MemoryLoader {
    fn resolve(&self, _from: &str, target: &str) -> String {
        target.to_string()
    }

    fn load(&self, path: &str) -> Result<String, String> {
        self.files
            .get(path)
            .cloned()
            .ok_or_else(|| format!("no such file {path:?}"))
    }
}
