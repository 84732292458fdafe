//! Builtin names and the table of builtin higher-order callables.

use std::collections::BTreeMap;
use std::path::Path;

use crate::config::{parse_kv, ConfigError};

/// Names that resolve to `builtins.<name>` when no scope binds them.
pub const BUILTIN_NAMES: &[&str] = &[
    "abs",
    "aiter",
    "all",
    "anext",
    "any",
    "ascii",
    "bin",
    "bool",
    "breakpoint",
    "bytearray",
    "bytes",
    "callable",
    "chr",
    "classmethod",
    "compile",
    "complex",
    "delattr",
    "dict",
    "dir",
    "divmod",
    "enumerate",
    "eval",
    "exec",
    "filter",
    "float",
    "format",
    "frozenset",
    "getattr",
    "globals",
    "hasattr",
    "hash",
    "help",
    "hex",
    "id",
    "input",
    "int",
    "isinstance",
    "issubclass",
    "iter",
    "len",
    "list",
    "locals",
    "map",
    "max",
    "memoryview",
    "min",
    "next",
    "object",
    "oct",
    "open",
    "ord",
    "pow",
    "print",
    "property",
    "range",
    "repr",
    "reversed",
    "round",
    "set",
    "setattr",
    "slice",
    "sorted",
    "staticmethod",
    "str",
    "sum",
    "super",
    "tuple",
    "type",
    "vars",
    "zip",
    "__import__",
    "__name__",
    "__file__",
    "__doc__",
    "NotImplemented",
    "Ellipsis",
    "BaseException",
    "BaseExceptionGroup",
    "Exception",
    "ExceptionGroup",
    "ArithmeticError",
    "AssertionError",
    "AttributeError",
    "BufferError",
    "EOFError",
    "FloatingPointError",
    "GeneratorExit",
    "ImportError",
    "ModuleNotFoundError",
    "IndexError",
    "KeyError",
    "KeyboardInterrupt",
    "LookupError",
    "MemoryError",
    "NameError",
    "NotImplementedError",
    "OSError",
    "EnvironmentError",
    "IOError",
    "OverflowError",
    "RecursionError",
    "ReferenceError",
    "RuntimeError",
    "StopIteration",
    "StopAsyncIteration",
    "SyntaxError",
    "IndentationError",
    "TabError",
    "SystemError",
    "SystemExit",
    "TypeError",
    "UnboundLocalError",
    "UnicodeError",
    "UnicodeDecodeError",
    "UnicodeEncodeError",
    "UnicodeTranslateError",
    "ValueError",
    "ZeroDivisionError",
    "ConnectionError",
    "BrokenPipeError",
    "ConnectionAbortedError",
    "ConnectionRefusedError",
    "ConnectionResetError",
    "FileExistsError",
    "FileNotFoundError",
    "InterruptedError",
    "IsADirectoryError",
    "NotADirectoryError",
    "PermissionError",
    "ProcessLookupError",
    "TimeoutError",
    "Warning",
    "UserWarning",
    "DeprecationWarning",
    "PendingDeprecationWarning",
    "SyntaxWarning",
    "RuntimeWarning",
    "FutureWarning",
    "ImportWarning",
    "UnicodeWarning",
    "BytesWarning",
    "ResourceWarning",
];

pub fn is_builtin(name: &str) -> bool {
    BUILTIN_NAMES.contains(&name)
}

/// Where a builtin takes callables it will call.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CallbackArgs {
    pub positions: Vec<usize>,
    pub keywords: Vec<String>,
}

/// Builtins that call some of their arguments. Each callback is called with
/// one element of each remaining positional argument.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HigherOrderTable {
    entries: BTreeMap<String, CallbackArgs>,
}

impl Default for HigherOrderTable {
    fn default() -> Self {
        Self::parse("map = 0\nfilter = 0\nsorted = key\nmin = key\nmax = key\n")
            .expect("default table parses")
    }
}

impl HigherOrderTable {
    /// Parses lines of the form `name = 0, key`: positional indices and
    /// keyword names of callback arguments.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        for entry in parse_kv(text)? {
            let mut args = CallbackArgs::default();
            for part in entry.value.split(',').map(str::trim).filter(|p| !p.is_empty()) {
                match part.parse::<usize>() {
                    Ok(pos) => args.positions.push(pos),
                    Err(_) if part.chars().all(|c| c.is_alphanumeric() || c == '_') => {
                        args.keywords.push(part.to_string())
                    }
                    Err(_) => {
                        return Err(ConfigError::InvalidValue {
                            line: entry.line,
                            key: entry.key.clone(),
                            message: format!("expected an index or keyword, found {part:?}"),
                        })
                    }
                }
            }
            entries.insert(entry.key.clone(), args);
        }
        Ok(HigherOrderTable { entries })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|err| ConfigError::Unreadable {
            path: path.display().to_string(),
            message: err.to_string(),
        })?;
        Self::parse(&text)
    }

    /// Callback arguments of builtin `name` (without the `builtins.` prefix).
    pub fn get(&self, name: &str) -> Option<&CallbackArgs> {
        self.entries.get(name)
    }
}

/// How the result of a builtin call relates to its arguments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum BuiltinResult {
    /// The argument at this position, as is.
    Argument(usize),
    /// One element of the argument at this position.
    ElementOf(usize),
    /// A new sequence of the callback's results.
    CallbackResults,
}

pub(crate) fn builtin_result(name: &str) -> Option<BuiltinResult> {
    use BuiltinResult::*;
    Some(match name {
        "list" | "tuple" | "set" | "frozenset" | "iter" | "reversed" | "sorted" => Argument(0),
        "filter" => Argument(1),
        "next" | "min" | "max" => ElementOf(0),
        "map" => CallbackResults,
        _ => return None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_table() {
        let t = HigherOrderTable::default();
        assert_eq!(t.get("map").unwrap().positions, [0]);
        assert_eq!(t.get("sorted").unwrap().keywords, ["key"]);
        assert!(t.get("len").is_none());
    }

    #[test]
    fn rejects_garbage() {
        assert!(HigherOrderTable::parse("map = 0, -x").is_err());
    }
}
