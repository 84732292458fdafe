//! The syntax tree the analysis works on.
//!
//! It covers the subset of the language that affects references. Operators,
//! literals other than strings, and annotations are folded into
//! [`ExprKind::Operation`] / [`ExprKind::Constant`]. Constructs with no
//! counterpart here become [`StmtKind::Opaque`], which still carries any
//! nested statements so their references are not lost.

use crate::model::Span;

/// Identifies an expression or definition within one module.
pub type NodeId = u32;

#[derive(Debug, Clone, PartialEq)]
pub struct Stmt {
    pub span: Span,
    pub kind: StmtKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StmtKind {
    FunctionDef(Box<FunctionDef>),
    ClassDef(Box<ClassDef>),
    Assign {
        targets: Vec<Expr>,
        value: Expr,
    },
    AugAssign {
        target: Expr,
        value: Expr,
    },
    /// An annotated name without a value; binds nothing at runtime.
    Declare {
        target: Expr,
    },
    Return(Option<Expr>),
    Delete(Vec<Expr>),
    For {
        target: Expr,
        iter: Expr,
        body: Vec<Stmt>,
        orelse: Vec<Stmt>,
    },
    While {
        test: Expr,
        body: Vec<Stmt>,
        orelse: Vec<Stmt>,
    },
    If {
        test: Expr,
        body: Vec<Stmt>,
        orelse: Vec<Stmt>,
    },
    With {
        items: Vec<WithItem>,
        body: Vec<Stmt>,
    },
    Raise {
        exc: Option<Expr>,
        cause: Option<Expr>,
    },
    Try {
        body: Vec<Stmt>,
        handlers: Vec<ExceptHandler>,
        orelse: Vec<Stmt>,
        finalbody: Vec<Stmt>,
    },
    Assert {
        test: Expr,
        msg: Option<Expr>,
    },
    Import(Vec<ImportName>),
    ImportFrom {
        module: Option<String>,
        level: u32,
        names: Vec<ImportName>,
    },
    Global(Vec<String>),
    Nonlocal(Vec<String>),
    Expr(Expr),
    Pass,
    Break,
    Continue,
    Opaque {
        construct: &'static str,
        exprs: Vec<Expr>,
        body: Vec<Stmt>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FunctionDef {
    pub id: NodeId,
    pub name: String,
    pub params: Parameters,
    pub body: Vec<Stmt>,
    pub decorators: Vec<Expr>,
    pub is_async: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassDef {
    pub id: NodeId,
    pub name: String,
    pub bases: Vec<Expr>,
    pub keywords: Vec<Keyword>,
    pub body: Vec<Stmt>,
    pub decorators: Vec<Expr>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Parameters {
    /// Positional-only and regular parameters, in order.
    pub positional: Vec<Param>,
    pub vararg: Option<Param>,
    pub kwonly: Vec<Param>,
    pub kwarg: Option<Param>,
}

impl Parameters {
    pub fn iter(&self) -> impl Iterator<Item = &Param> {
        self.positional
            .iter()
            .chain(self.vararg.iter())
            .chain(self.kwonly.iter())
            .chain(self.kwarg.iter())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub name: String,
    pub default: Option<Expr>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WithItem {
    pub context: Expr,
    pub target: Option<Expr>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExceptHandler {
    pub span: Span,
    pub class: Option<Expr>,
    pub name: Option<String>,
    pub body: Vec<Stmt>,
}

/// One name in an import statement. For `import a.b` the name is `a.b`;
/// for `from m import *` it is `*`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImportName {
    pub name: String,
    pub alias: Option<String>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    pub id: NodeId,
    pub span: Span,
    pub kind: ExprKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Name(String),
    Attribute {
        value: Box<Expr>,
        attr: String,
    },
    Call {
        func: Box<Expr>,
        args: Vec<Expr>,
        keywords: Vec<Keyword>,
    },
    Lambda(Box<Lambda>),
    Dict(Vec<DictEntry>),
    Subscript {
        value: Box<Expr>,
        index: Box<Expr>,
    },
    Str(String),
    Constant,
    /// List, tuple or set display.
    Sequence(Vec<Expr>),
    Comprehension(Box<Comprehension>),
    Yield(Option<Box<Expr>>),
    YieldFrom(Box<Expr>),
    Await(Box<Expr>),
    Starred(Box<Expr>),
    NamedExpr {
        target: Box<Expr>,
        value: Box<Expr>,
    },
    IfExp {
        test: Box<Expr>,
        body: Box<Expr>,
        orelse: Box<Expr>,
    },
    /// `a or b`: the value is one of the operands.
    BoolOp(Vec<Expr>),
    /// Arithmetic, comparison, formatting, slicing: operands are evaluated
    /// but the result is not a reference.
    Operation(Vec<Expr>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Keyword {
    /// `None` for `**mapping`.
    pub name: Option<String>,
    pub value: Expr,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DictEntry {
    /// `None` for `**mapping`.
    pub key: Option<Expr>,
    pub value: Expr,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lambda {
    pub params: Parameters,
    pub body: Expr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComprehensionKind {
    List,
    Set,
    Dict,
    Generator,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comprehension {
    pub kind: ComprehensionKind,
    /// The element, or the key for dict comprehensions.
    pub element: Expr,
    /// The value of dict comprehensions.
    pub value: Option<Expr>,
    pub clauses: Vec<ComprehensionClause>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComprehensionClause {
    pub target: Expr,
    pub iter: Expr,
    pub ifs: Vec<Expr>,
}

impl Expr {
    /// Direct sub-expressions, in evaluation order. Nested scopes (lambda
    /// bodies, comprehensions) are included.
    pub fn children(&self) -> Vec<&Expr> {
        let mut out = Vec::new();
        match &self.kind {
            ExprKind::Name(_) | ExprKind::Str(_) | ExprKind::Constant => {}
            ExprKind::Attribute { value, .. } => out.push(&**value),
            ExprKind::Call { func, args, keywords } => {
                out.push(&**func);
                out.extend(args);
                out.extend(keywords.iter().map(|k| &k.value));
            }
            ExprKind::Lambda(lambda) => {
                out.extend(lambda.params.iter().filter_map(|p| p.default.as_ref()));
                out.push(&lambda.body);
            }
            ExprKind::Dict(entries) => {
                for entry in entries {
                    out.extend(entry.key.as_ref());
                    out.push(&entry.value);
                }
            }
            ExprKind::Subscript { value, index } => {
                out.push(&**value);
                out.push(&**index);
            }
            ExprKind::Sequence(elts) | ExprKind::BoolOp(elts) | ExprKind::Operation(elts) => out.extend(elts),
            ExprKind::Comprehension(comp) => {
                for clause in &comp.clauses {
                    out.push(&clause.iter);
                    out.push(&clause.target);
                    out.extend(&clause.ifs);
                }
                out.push(&comp.element);
                out.extend(comp.value.as_ref());
            }
            ExprKind::Yield(value) => out.extend(value.as_deref()),
            ExprKind::YieldFrom(value) | ExprKind::Await(value) | ExprKind::Starred(value) => {
                out.push(&**value)
            }
            ExprKind::NamedExpr { target, value } => {
                out.push(&**value);
                out.push(&**target);
            }
            ExprKind::IfExp { test, body, orelse } => {
                out.push(&**test);
                out.push(&**body);
                out.push(&**orelse);
            }
        }
        out
    }
}

/// Counts opaque statements anywhere below `stmts`.
pub fn count_opaque(stmts: &[Stmt]) -> usize {
    stmts.iter().map(count_opaque_stmt).sum()
}

fn count_opaque_stmt(stmt: &Stmt) -> usize {
    let own = usize::from(matches!(stmt.kind, StmtKind::Opaque { .. }));
    own + child_blocks(stmt).into_iter().map(count_opaque).sum::<usize>()
}

/// The statement blocks nested directly inside `stmt`.
pub fn child_blocks(stmt: &Stmt) -> Vec<&[Stmt]> {
    match &stmt.kind {
        StmtKind::FunctionDef(def) => vec![&def.body],
        StmtKind::ClassDef(def) => vec![&def.body],
        StmtKind::For { body, orelse, .. }
        | StmtKind::While { body, orelse, .. }
        | StmtKind::If { body, orelse, .. } => vec![body, orelse],
        StmtKind::With { body, .. } => vec![body],
        StmtKind::Try {
            body,
            handlers,
            orelse,
            finalbody,
        } => {
            let mut blocks: Vec<&[Stmt]> = vec![body];
            blocks.extend(handlers.iter().map(|h| h.body.as_slice()));
            blocks.push(orelse);
            blocks.push(finalbody);
            blocks
        }
        StmtKind::Opaque { body, .. } => vec![body],
        _ => Vec::new(),
    }
}
