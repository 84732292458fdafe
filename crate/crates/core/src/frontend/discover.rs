use std::path::{Path, PathBuf};

use globset::{GlobBuilder, GlobSet, GlobSetBuilder};
use thiserror::Error;
use walkdir::WalkDir;

use crate::config::ProjectConfig;

#[derive(Debug, Error)]
pub enum DiscoveryError {
    #[error("project root {} does not exist", .0.display())]
    MissingRoot(PathBuf),
    #[error("project root {} is not a directory", .0.display())]
    NotADirectory(PathBuf),
    #[error("cannot read {}: {message}", path.display())]
    Unreadable { path: PathBuf, message: String },
    #[error("invalid exclude glob {glob:?}: {message}")]
    BadGlob { glob: String, message: String },
}

/// A source file found under the project root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModuleFile {
    /// Full path on disk.
    pub path: PathBuf,
    /// Path relative to the root, `/`-separated.
    pub relative: String,
    /// Dotted module name, e.g. `pkg.sub.mod`; `pkg/__init__.py` is `pkg`.
    pub module_name: String,
    pub is_package: bool,
}

/// Lists the modules under `root`, sorted by relative path.
pub fn discover_modules(root: &Path, config: &ProjectConfig) -> Result<Vec<ModuleFile>, DiscoveryError> {
    if !root.exists() {
        return Err(DiscoveryError::MissingRoot(root.to_path_buf()));
    }
    if !root.is_dir() {
        return Err(DiscoveryError::NotADirectory(root.to_path_buf()));
    }
    let excludes = build_globset(&config.exclude)?;
    let mut found = Vec::new();
    let walker = WalkDir::new(root)
        .follow_links(false)
        .sort_by_file_name()
        .into_iter()
        .filter_entry(|entry| {
            let rel = entry.path().strip_prefix(root).unwrap_or(entry.path());
            rel.as_os_str().is_empty() || !excludes.is_match(rel)
        });
    for entry in walker {
        let entry = entry.map_err(|err| DiscoveryError::Unreadable {
            path: err.path().unwrap_or(root).to_path_buf(),
            message: err.to_string(),
        })?;
        if !entry.file_type().is_file() {
            continue;
        }
        let path = entry.path();
        if path.extension().and_then(|e| e.to_str()) != Some(config.extension.as_str()) {
            continue;
        }
        let rel = path.strip_prefix(root).unwrap_or(path);
        let relative = rel
            .components()
            .map(|c| c.as_os_str().to_string_lossy())
            .collect::<Vec<_>>()
            .join("/");
        let (module_name, is_package) = module_name_for(&relative, &config.extension);
        found.push(ModuleFile {
            path: path.to_path_buf(),
            relative,
            module_name,
            is_package,
        });
    }
    found.sort_by(|a, b| a.relative.cmp(&b.relative));
    Ok(found)
}

fn build_globset(globs: &[String]) -> Result<GlobSet, DiscoveryError> {
    let mut builder = GlobSetBuilder::new();
    for glob in globs {
        let parsed = GlobBuilder::new(glob)
            .literal_separator(true)
            .build()
            .map_err(|err| DiscoveryError::BadGlob {
                glob: glob.clone(),
                message: err.to_string(),
            })?;
        builder.add(parsed);
    }
    builder.build().map_err(|err| DiscoveryError::BadGlob {
        glob: globs.join(","),
        message: err.to_string(),
    })
}

/// Module name for a relative path. Whitespace in file names is replaced by
/// `_` so that the name stays a valid qualified name.
pub(crate) fn module_name_for(relative: &str, extension: &str) -> (String, bool) {
    let mut parts: Vec<&str> = relative.split('/').collect();
    let last = parts.pop().unwrap_or_default();
    let stem = last
        .strip_suffix(extension)
        .and_then(|s| s.strip_suffix('.'))
        .unwrap_or(last);
    let is_package = stem == "__init__" && !parts.is_empty();
    if !is_package {
        parts.push(stem);
    }
    let name = parts
        .join(".")
        .chars()
        .map(|c| if c.is_whitespace() { '_' } else { c })
        .collect();
    (name, is_package)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    #[test]
    fn names_from_paths() {
        assert_eq!(module_name_for("a/b/c.py", "py"), ("a.b.c".into(), false));
        assert_eq!(module_name_for("a/b/__init__.py", "py"), ("a.b".into(), true));
        assert_eq!(module_name_for("main.py", "py"), ("main".into(), false));
        assert_eq!(module_name_for("__init__.py", "py"), ("__init__".into(), false));
    }

    #[test]
    fn sorted_and_excluded() {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path();
        for file in ["b.py", "a/x.py", "a/__init__.py", "tests/t.py", "notes.txt"] {
            let path = root.join(file);
            fs::create_dir_all(path.parent().unwrap()).unwrap();
            fs::write(path, "").unwrap();
        }
        let config = ProjectConfig {
            exclude: vec!["tests".into()],
            ..Default::default()
        };
        let found = discover_modules(root, &config).unwrap();
        let names: Vec<_> = found.iter().map(|m| m.relative.as_str()).collect();
        assert_eq!(names, ["a/__init__.py", "a/x.py", "b.py"]);
        assert!(found[0].is_package);
        assert_eq!(found[0].module_name, "a");
    }

    #[test]
    fn glob_patterns_match_files() {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path();
        for file in ["keep.py", "pkg/gen_x.py", "pkg/y.py"] {
            let path = root.join(file);
            fs::create_dir_all(path.parent().unwrap()).unwrap();
            fs::write(path, "").unwrap();
        }
        let config = ProjectConfig {
            exclude: vec!["pkg/gen_*.py".into()],
            ..Default::default()
        };
        let found = discover_modules(root, &config).unwrap();
        assert_eq!(found.len(), 2);
    }

    #[test]
    fn missing_root_is_an_error() {
        let err = discover_modules(Path::new("/no/such/dir"), &ProjectConfig::default());
        assert!(matches!(err, Err(DiscoveryError::MissingRoot(_))));
    }
}
