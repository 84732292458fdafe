use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ModelError;

/// 1-based source range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Span {
    pub start_line: u32,
    pub start_col: u32,
    pub end_line: u32,
    pub end_col: u32,
}

impl Span {
    pub fn new(start_line: u32, start_col: u32, end_line: u32, end_col: u32) -> Self {
        Span {
            start_line,
            start_col,
            end_line,
            end_col,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntityKind {
    Module,
    Class,
    Function,
    Lambda,
    Variable,
    Attribute,
    Unknown,
}

impl EntityKind {
    pub const ALL: [EntityKind; 7] = [
        EntityKind::Module,
        EntityKind::Class,
        EntityKind::Function,
        EntityKind::Lambda,
        EntityKind::Variable,
        EntityKind::Attribute,
        EntityKind::Unknown,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EntityKind::Module => "module",
            EntityKind::Class => "class",
            EntityKind::Function => "function",
            EntityKind::Lambda => "lambda",
            EntityKind::Variable => "variable",
            EntityKind::Attribute => "attribute",
            EntityKind::Unknown => "unknown",
        }
    }
}

impl fmt::Display for EntityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EntityKind {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EntityKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| ModelError::UnknownEntityKind(s.to_string()))
    }
}

/// A code element referenced by a dependency edge.
///
/// An entity is external exactly when it has no project file. The flag is
/// derived from `file` rather than stored, so the two can never disagree.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EntityRef {
    qualified_name: String,
    kind: EntityKind,
    file: String,
    span: Option<Span>,
}

impl EntityRef {
    /// A project entity defined in `file` (project-relative, non-empty).
    pub fn internal(
        qualified_name: impl Into<String>,
        kind: EntityKind,
        file: impl Into<String>,
        span: Option<Span>,
    ) -> Result<Self, ModelError> {
        let file = file.into();
        if file.is_empty() {
            return Err(ModelError::MissingFile);
        }
        Self::build(qualified_name.into(), kind, file, span)
    }

    /// An entity outside the analysed project.
    pub fn external(qualified_name: impl Into<String>, kind: EntityKind) -> Result<Self, ModelError> {
        Self::build(qualified_name.into(), kind, String::new(), None)
    }

    /// Internal or external depending on whether `file` is empty.
    pub fn with_file(
        qualified_name: impl Into<String>,
        kind: EntityKind,
        file: impl Into<String>,
        span: Option<Span>,
    ) -> Result<Self, ModelError> {
        Self::build(qualified_name.into(), kind, file.into(), span)
    }

    fn build(
        qualified_name: String,
        kind: EntityKind,
        file: String,
        span: Option<Span>,
    ) -> Result<Self, ModelError> {
        validate_name(&qualified_name)?;
        Ok(EntityRef {
            qualified_name,
            kind,
            file,
            span,
        })
    }

    pub fn qualified_name(&self) -> &str {
        &self.qualified_name
    }

    pub fn kind(&self) -> EntityKind {
        self.kind
    }

    pub fn file(&self) -> &str {
        &self.file
    }

    pub fn span(&self) -> Option<Span> {
        self.span
    }

    pub fn is_external(&self) -> bool {
        self.file.is_empty()
    }

    /// Drops the project file, turning the entity into an external one.
    pub fn into_external(mut self) -> Self {
        self.file.clear();
        self.span = None;
        self
    }

    pub fn with_kind(mut self, kind: EntityKind) -> Self {
        self.kind = kind;
        self
    }
}

impl fmt::Display for EntityRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.qualified_name)
    }
}

pub(crate) fn validate_name(name: &str) -> Result<(), ModelError> {
    if name.is_empty() {
        return Err(ModelError::EmptyName);
    }
    if name.chars().any(char::is_whitespace) {
        return Err(ModelError::WhitespaceInName(name.to_string()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn external_iff_file_empty() {
        let e = EntityRef::external("os.path", EntityKind::Module).unwrap();
        assert!(e.is_external());
        let i = EntityRef::internal("m.f", EntityKind::Function, "m.py", None).unwrap();
        assert!(!i.is_external());
        assert!(i.into_external().is_external());
        assert_eq!(
            EntityRef::internal("m.f", EntityKind::Function, "", None),
            Err(ModelError::MissingFile)
        );
    }

    #[test]
    fn names_must_be_nonempty_without_whitespace() {
        assert_eq!(
            EntityRef::external("", EntityKind::Unknown),
            Err(ModelError::EmptyName)
        );
        assert!(matches!(
            EntityRef::external("a b", EntityKind::Unknown),
            Err(ModelError::WhitespaceInName(_))
        ));
        assert!(EntityRef::external("m.<lambda:3:5>", EntityKind::Lambda).is_ok());
    }

    #[test]
    fn kind_strings_round_trip() {
        for kind in EntityKind::ALL {
            assert_eq!(kind.as_str().parse::<EntityKind>().unwrap(), kind);
        }
        assert!("widget".parse::<EntityKind>().is_err());
    }
}
