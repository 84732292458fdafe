//! Name normalization used to compare edges produced by different tools.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::DependencyEdge;
use crate::config::{parse_bool, read_kv_file, ConfigError, KvEntry};

/// Characters that may not be used as the inner-class separator, because the
/// other rewrite rules already give them a meaning.
const RESERVED_SEPARATORS: &[char] = &['(', ')', '/', '\\', ':', '.'];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizationProfile {
    /// Drop trailing `(...)` parameter lists.
    pub strip_signatures: bool,
    /// Rewrite `dir/file.ext::member` style names to dotted module paths.
    pub path_to_module: bool,
    /// Separator rewritten to `.`, e.g. `$` in `Outer$Inner`.
    pub inner_class_separator: Option<char>,
    pub case_fold: bool,
    /// Compare on the name pair only.
    pub drop_kind: bool,
}

impl Default for NormalizationProfile {
    fn default() -> Self {
        NormalizationProfile {
            strip_signatures: false,
            path_to_module: false,
            inner_class_separator: Some('$'),
            case_fold: false,
            drop_kind: true,
        }
    }
}

impl NormalizationProfile {
    pub fn from_kv(entries: &[KvEntry]) -> Result<Self, ConfigError> {
        let mut profile = NormalizationProfile::default();
        for entry in entries {
            match entry.key.as_str() {
                "strip_signatures" => profile.strip_signatures = parse_bool(entry)?,
                "path_to_module" => profile.path_to_module = parse_bool(entry)?,
                "case_fold" => profile.case_fold = parse_bool(entry)?,
                "drop_kind" => profile.drop_kind = parse_bool(entry)?,
                "inner_class_separator" => {
                    profile.inner_class_separator = parse_separator(entry)?;
                }
                _ => {
                    return Err(ConfigError::UnknownKey {
                        line: entry.line,
                        key: entry.key.clone(),
                    })
                }
            }
        }
        Ok(profile)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        Self::from_kv(&read_kv_file(path)?)
    }

    /// Normalizes one qualified name. Idempotent for every profile accepted
    /// by [`NormalizationProfile::from_kv`].
    pub fn normalize_name(&self, name: &str) -> String {
        let mut out = name.trim().to_string();
        // Each rewrite can expose work for the other, e.g. `f()/`.
        loop {
            let before = out.clone();
            if self.strip_signatures {
                out = strip_signatures(&out);
            }
            if self.path_to_module {
                out = path_to_module(&out);
            }
            if out == before {
                break;
            }
        }
        if let Some(sep) = self.inner_class_separator {
            if !RESERVED_SEPARATORS.contains(&sep) {
                out = out.replace(sep, ".");
            }
        }
        if self.case_fold {
            out = out.to_lowercase();
        }
        out
    }

    /// Key for a raw name pair; `kind` is appended unless `drop_kind` is set.
    pub fn key_for(&self, source: &str, target: &str, kind: Option<&str>) -> String {
        let mut key = format!("{}->{}", self.normalize_name(source), self.normalize_name(target));
        if !self.drop_kind {
            if let Some(kind) = kind {
                key.push('|');
                key.push_str(kind);
            }
        }
        key
    }
}

fn parse_separator(entry: &KvEntry) -> Result<Option<char>, ConfigError> {
    if entry.value.eq_ignore_ascii_case("none") || entry.value.is_empty() {
        return Ok(None);
    }
    let mut chars = entry.value.chars();
    match (chars.next(), chars.next()) {
        (Some(c), None) if !RESERVED_SEPARATORS.contains(&c) && !c.is_whitespace() => Ok(Some(c)),
        _ => Err(ConfigError::InvalidValue {
            line: entry.line,
            key: entry.key.clone(),
            message: format!(
                "expected a single character other than {RESERVED_SEPARATORS:?}, found {:?}",
                entry.value
            ),
        }),
    }
}

/// `"SRC->TGT"` under `profile`, with `|kind` appended when the profile
/// keeps kinds.
pub fn canonical_key(edge: &DependencyEdge, profile: &NormalizationProfile) -> String {
    profile.key_for(
        edge.source().qualified_name(),
        edge.target().qualified_name(),
        Some(edge.kind().as_str()),
    )
}

/// Removes trailing balanced `(...)` groups, repeatedly.
fn strip_signatures(name: &str) -> String {
    let mut s = name.trim_end();
    while s.ends_with(')') {
        let mut depth = 0usize;
        let mut open = None;
        for (idx, ch) in s.char_indices().rev() {
            match ch {
                ')' => depth += 1,
                '(' => {
                    depth -= 1;
                    if depth == 0 {
                        open = Some(idx);
                        break;
                    }
                }
                _ => {}
            }
        }
        match open {
            Some(idx) => s = s[..idx].trim_end(),
            None => break,
        }
    }
    s.to_string()
}

const SOURCE_EXTENSIONS: &[&str] = &[
    "py", "pyi", "java", "kt", "scala", "js", "jsx", "ts", "tsx", "rb", "go", "rs", "ext",
];

/// `src/pkg/mod.ext::f` becomes `src.pkg.mod.f`.
///
/// With a `::` member separator the extension of the path part is always
/// dropped; without one, only known source extensions are dropped, since a
/// trailing `.x` may just be a member name.
fn path_to_module(name: &str) -> String {
    let (path, member) = match name.split_once("::") {
        Some((path, member)) => (path, Some(member)),
        None => (name, None),
    };
    let has_separator = path.contains('/') || path.contains('\\');
    if member.is_none() && !has_separator {
        return name.to_string();
    }
    let mut segments: Vec<&str> = path
        .split(['/', '\\'])
        .filter(|s| !s.is_empty() && *s != ".")
        .collect();
    if let Some(last) = segments.last_mut() {
        if let Some((stem, ext)) = last.rsplit_once('.') {
            if !stem.is_empty() && (member.is_some() || SOURCE_EXTENSIONS.contains(&ext)) {
                *last = stem;
            }
        }
    }
    if let Some(member) = member {
        segments.extend(
            member
                .split("::")
                .flat_map(|part| part.split(['/', '\\']))
                .filter(|s| !s.is_empty()),
        );
    }
    segments.join(".")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{EdgeKind, EntityKind, EntityRef};
    use proptest::prelude::*;

    fn edge(src: &str, tgt: &str) -> DependencyEdge {
        DependencyEdge::new(
            EntityRef::internal(src, EntityKind::Function, "x", None).unwrap(),
            EntityRef::external(tgt, EntityKind::Function).unwrap(),
            EdgeKind::Call,
            1,
        )
        .unwrap()
    }

    #[test]
    fn signature_and_inner_class_rules() {
        let profile = NormalizationProfile {
            strip_signatures: true,
            ..Default::default()
        };
        assert_eq!(
            canonical_key(&edge("a.B$C.m(int)", "a.D.n"), &profile),
            "a.B.C.m->a.D.n"
        );
    }

    #[test]
    fn default_profile_is_identity_on_plain_names() {
        let profile = NormalizationProfile::default();
        assert_eq!(canonical_key(&edge("m.f", "m.g"), &profile), "m.f->m.g");
    }

    #[test]
    fn keeps_kind_when_asked() {
        let profile = NormalizationProfile {
            drop_kind: false,
            ..Default::default()
        };
        assert_eq!(canonical_key(&edge("m.f", "m.g"), &profile), "m.f->m.g|call");
    }

    /// Hand-written table, fixed before the rules were implemented.
    #[test]
    fn path_to_module_table() {
        let table = [
            ("src/pkg/mod.ext::f", "src.pkg.mod.f"),
            ("pkg/mod.py", "pkg.mod"),
            ("pkg\\mod.py::C::m", "pkg.mod.C.m"),
            ("./a/b.java::X", "a.b.X"),
            ("pkg/mod.f", "pkg.mod.f"),
            ("m.f", "m.f"),
            ("mod.ext::", "mod"),
        ];
        for (input, expected) in table {
            assert_eq!(path_to_module(input), expected, "input {input}");
        }
        let profile = NormalizationProfile {
            path_to_module: true,
            ..Default::default()
        };
        assert_eq!(
            canonical_key(&edge("src/pkg/mod.ext::f", "x.y"), &profile),
            "src.pkg.mod.f->x.y"
        );
    }

    #[test]
    fn strip_nested_and_repeated_groups() {
        assert_eq!(strip_signatures("f(a(b), c)"), "f");
        assert_eq!(strip_signatures("f(a)(b)"), "f");
        assert_eq!(strip_signatures("f(a"), "f(a");
        assert_eq!(strip_signatures("g)"), "g)");
    }

    #[test]
    fn separator_validation() {
        let entries = crate::config::parse_kv("inner_class_separator = /").unwrap();
        assert!(NormalizationProfile::from_kv(&entries).is_err());
        let entries = crate::config::parse_kv("inner_class_separator = none").unwrap();
        assert_eq!(
            NormalizationProfile::from_kv(&entries)
                .unwrap()
                .inner_class_separator,
            None
        );
    }

    fn any_profile() -> impl Strategy<Value = NormalizationProfile> {
        (
            any::<bool>(),
            any::<bool>(),
            prop::option::of(prop::sample::select(vec!['$', '#', '@'])),
            any::<bool>(),
            any::<bool>(),
        )
            .prop_map(|(s, p, sep, c, d)| NormalizationProfile {
                strip_signatures: s,
                path_to_module: p,
                inner_class_separator: sep,
                case_fold: c,
                drop_kind: d,
            })
    }

    proptest! {
        #[test]
        fn normalization_is_idempotent(
            profile in any_profile(),
            name in "[a-zA-Z_$#@./\\\\:()]{1,24}",
        ) {
            let once = profile.normalize_name(&name);
            let twice = profile.normalize_name(&once);
            prop_assert_eq!(once, twice);
        }
    }
}
