//! Lowering from the full parser tree to [`super::ast`].

use rustpython_parser::ast::{self as py, Ranged};
use rustpython_parser::text_size::TextRange;

use super::ast::*;
use crate::model::Span;

/// Byte offset to 1-based (line, column) with columns counted in chars.
pub(crate) struct LineIndex<'a> {
    source: &'a str,
    starts: Vec<usize>,
}

impl<'a> LineIndex<'a> {
    pub(crate) fn new(source: &'a str) -> Self {
        let mut starts = vec![0];
        starts.extend(
            source
                .bytes()
                .enumerate()
                .filter(|(_, b)| *b == b'\n')
                .map(|(i, _)| i + 1),
        );
        LineIndex { source, starts }
    }

    pub(crate) fn position(&self, offset: usize) -> (u32, u32) {
        let offset = offset.min(self.source.len());
        let line = self.starts.partition_point(|&s| s <= offset) - 1;
        let start = self.starts[line];
        let col = self
            .source
            .get(start..offset)
            .map(|s| s.chars().count())
            .unwrap_or(offset - start);
        (line as u32 + 1, col as u32 + 1)
    }

    fn span(&self, range: TextRange) -> Span {
        let (sl, sc) = self.position(usize::from(range.start()));
        let (el, ec) = self.position(usize::from(range.end()));
        Span::new(sl, sc, el, ec)
    }
}

pub(crate) struct Lowerer<'a> {
    index: LineIndex<'a>,
    next_id: NodeId,
}

impl<'a> Lowerer<'a> {
    pub(crate) fn new(source: &'a str) -> Self {
        Lowerer {
            index: LineIndex::new(source),
            next_id: 0,
        }
    }

    pub(crate) fn node_count(&self) -> NodeId {
        self.next_id
    }

    fn fresh(&mut self) -> NodeId {
        let id = self.next_id;
        self.next_id += 1;
        id
    }

    pub(crate) fn lower_suite(&mut self, stmts: &[py::Stmt]) -> Vec<Stmt> {
        stmts.iter().map(|s| self.stmt(s)).collect()
    }

    fn stmt(&mut self, stmt: &py::Stmt) -> Stmt {
        let span = self.index.span(stmt.range());
        let kind = match stmt {
            py::Stmt::FunctionDef(def) => StmtKind::FunctionDef(Box::new(FunctionDef {
                id: self.fresh(),
                name: def.name.to_string(),
                decorators: self.exprs(&def.decorator_list),
                params: self.params(&def.args),
                body: self.lower_suite(&def.body),
                is_async: false,
            })),
            py::Stmt::AsyncFunctionDef(def) => StmtKind::FunctionDef(Box::new(FunctionDef {
                id: self.fresh(),
                name: def.name.to_string(),
                decorators: self.exprs(&def.decorator_list),
                params: self.params(&def.args),
                body: self.lower_suite(&def.body),
                is_async: true,
            })),
            py::Stmt::ClassDef(def) => StmtKind::ClassDef(Box::new(ClassDef {
                id: self.fresh(),
                name: def.name.to_string(),
                decorators: self.exprs(&def.decorator_list),
                bases: self.exprs(&def.bases),
                keywords: self.keywords(&def.keywords),
                body: self.lower_suite(&def.body),
            })),
            py::Stmt::Return(ret) => StmtKind::Return(ret.value.as_deref().map(|e| self.expr(e))),
            py::Stmt::Delete(del) => StmtKind::Delete(self.exprs(&del.targets)),
            py::Stmt::Assign(assign) => StmtKind::Assign {
                value: self.expr(&assign.value),
                targets: self.exprs(&assign.targets),
            },
            py::Stmt::AugAssign(aug) => StmtKind::AugAssign {
                value: self.expr(&aug.value),
                target: self.expr(&aug.target),
            },
            py::Stmt::AnnAssign(ann) => match &ann.value {
                Some(value) => StmtKind::Assign {
                    value: self.expr(value),
                    targets: vec![self.expr(&ann.target)],
                },
                None => StmtKind::Declare {
                    target: self.expr(&ann.target),
                },
            },
            py::Stmt::For(f) => StmtKind::For {
                iter: self.expr(&f.iter),
                target: self.expr(&f.target),
                body: self.lower_suite(&f.body),
                orelse: self.lower_suite(&f.orelse),
            },
            py::Stmt::AsyncFor(f) => StmtKind::For {
                iter: self.expr(&f.iter),
                target: self.expr(&f.target),
                body: self.lower_suite(&f.body),
                orelse: self.lower_suite(&f.orelse),
            },
            py::Stmt::While(w) => StmtKind::While {
                test: self.expr(&w.test),
                body: self.lower_suite(&w.body),
                orelse: self.lower_suite(&w.orelse),
            },
            py::Stmt::If(i) => StmtKind::If {
                test: self.expr(&i.test),
                body: self.lower_suite(&i.body),
                orelse: self.lower_suite(&i.orelse),
            },
            py::Stmt::With(w) => StmtKind::With {
                items: self.with_items(&w.items),
                body: self.lower_suite(&w.body),
            },
            py::Stmt::AsyncWith(w) => StmtKind::With {
                items: self.with_items(&w.items),
                body: self.lower_suite(&w.body),
            },
            py::Stmt::Raise(r) => StmtKind::Raise {
                exc: r.exc.as_deref().map(|e| self.expr(e)),
                cause: r.cause.as_deref().map(|e| self.expr(e)),
            },
            py::Stmt::Try(t) => self.try_stmt(&t.body, &t.handlers, &t.orelse, &t.finalbody),
            py::Stmt::TryStar(t) => self.try_stmt(&t.body, &t.handlers, &t.orelse, &t.finalbody),
            py::Stmt::Assert(a) => StmtKind::Assert {
                test: self.expr(&a.test),
                msg: a.msg.as_deref().map(|e| self.expr(e)),
            },
            py::Stmt::Import(imp) => {
                StmtKind::Import(imp.names.iter().map(|alias| self.import_name(alias)).collect())
            }
            py::Stmt::ImportFrom(imp) => StmtKind::ImportFrom {
                module: imp.module.as_ref().map(|m| m.to_string()),
                level: imp.level.map(|l| l.to_u32()).unwrap_or(0),
                names: imp.names.iter().map(|alias| self.import_name(alias)).collect(),
            },
            py::Stmt::Global(g) => StmtKind::Global(g.names.iter().map(|n| n.to_string()).collect()),
            py::Stmt::Nonlocal(n) => StmtKind::Nonlocal(n.names.iter().map(|n| n.to_string()).collect()),
            py::Stmt::Expr(e) => StmtKind::Expr(self.expr(&e.value)),
            py::Stmt::Pass(_) => StmtKind::Pass,
            py::Stmt::Break(_) => StmtKind::Break,
            py::Stmt::Continue(_) => StmtKind::Continue,
            py::Stmt::Match(m) => {
                let mut exprs = vec![self.expr(&m.subject)];
                let mut body = Vec::new();
                for case in &m.cases {
                    if let Some(guard) = &case.guard {
                        exprs.push(self.expr(guard));
                    }
                    body.extend(self.lower_suite(&case.body));
                }
                StmtKind::Opaque {
                    construct: "match",
                    exprs,
                    body,
                }
            }
            py::Stmt::TypeAlias(_) => StmtKind::Opaque {
                construct: "type alias",
                exprs: Vec::new(),
                body: Vec::new(),
            },
        };
        Stmt { span, kind }
    }

    fn try_stmt(
        &mut self,
        body: &[py::Stmt],
        handlers: &[py::ExceptHandler],
        orelse: &[py::Stmt],
        finalbody: &[py::Stmt],
    ) -> StmtKind {
        let body = self.lower_suite(body);
        let handlers = handlers
            .iter()
            .map(|h| {
                let py::ExceptHandler::ExceptHandler(h) = h;
                ExceptHandler {
                    span: self.index.span(h.range),
                    class: h.type_.as_deref().map(|e| self.expr(e)),
                    name: h.name.as_ref().map(|n| n.to_string()),
                    body: self.lower_suite(&h.body),
                }
            })
            .collect();
        StmtKind::Try {
            body,
            handlers,
            orelse: self.lower_suite(orelse),
            finalbody: self.lower_suite(finalbody),
        }
    }

    fn import_name(&mut self, alias: &py::Alias) -> ImportName {
        ImportName {
            name: alias.name.to_string(),
            alias: alias.asname.as_ref().map(|a| a.to_string()),
            span: self.index.span(alias.range),
        }
    }

    fn with_items(&mut self, items: &[py::WithItem]) -> Vec<WithItem> {
        items
            .iter()
            .map(|item| WithItem {
                context: self.expr(&item.context_expr),
                target: item.optional_vars.as_deref().map(|e| self.expr(e)),
            })
            .collect()
    }

    fn params(&mut self, args: &py::Arguments) -> Parameters {
        let positional = args
            .posonlyargs
            .iter()
            .chain(args.args.iter())
            .map(|a| self.param_with_default(a))
            .collect();
        let vararg = args.vararg.as_deref().map(|a| self.param(a, None));
        let kwonly = args
            .kwonlyargs
            .iter()
            .map(|a| self.param_with_default(a))
            .collect();
        let kwarg = args.kwarg.as_deref().map(|a| self.param(a, None));
        Parameters {
            positional,
            vararg,
            kwonly,
            kwarg,
        }
    }

    fn param_with_default(&mut self, arg: &py::ArgWithDefault) -> Param {
        let default = arg.default.as_deref().map(|e| self.expr(e));
        self.param(&arg.def, default)
    }

    fn param(&mut self, arg: &py::Arg, default: Option<Expr>) -> Param {
        Param {
            name: arg.arg.to_string(),
            default,
            span: self.index.span(arg.range),
        }
    }

    fn keywords(&mut self, keywords: &[py::Keyword]) -> Vec<Keyword> {
        keywords
            .iter()
            .map(|k| Keyword {
                name: k.arg.as_ref().map(|a| a.to_string()),
                value: self.expr(&k.value),
            })
            .collect()
    }

    fn exprs(&mut self, exprs: &[py::Expr]) -> Vec<Expr> {
        exprs.iter().map(|e| self.expr(e)).collect()
    }

    fn boxed(&mut self, expr: &py::Expr) -> Box<Expr> {
        Box::new(self.expr(expr))
    }

    fn expr(&mut self, expr: &py::Expr) -> Expr {
        let span = self.index.span(expr.range());
        let id = self.fresh();
        let kind = match expr {
            py::Expr::Name(n) => ExprKind::Name(n.id.to_string()),
            py::Expr::Attribute(a) => ExprKind::Attribute {
                value: self.boxed(&a.value),
                attr: a.attr.to_string(),
            },
            py::Expr::Call(c) => ExprKind::Call {
                func: self.boxed(&c.func),
                args: self.exprs(&c.args),
                keywords: self.keywords(&c.keywords),
            },
            py::Expr::Lambda(l) => ExprKind::Lambda(Box::new(Lambda {
                params: self.params(&l.args),
                body: self.expr(&l.body),
            })),
            py::Expr::Dict(d) => ExprKind::Dict(
                d.keys
                    .iter()
                    .zip(&d.values)
                    .map(|(k, v)| DictEntry {
                        key: k.as_ref().map(|k| self.expr(k)),
                        value: self.expr(v),
                    })
                    .collect(),
            ),
            py::Expr::Subscript(s) => ExprKind::Subscript {
                value: self.boxed(&s.value),
                index: self.boxed(&s.slice),
            },
            py::Expr::Constant(c) => match &c.value {
                py::Constant::Str(s) => ExprKind::Str(s.clone()),
                _ => ExprKind::Constant,
            },
            py::Expr::List(l) => ExprKind::Sequence(self.exprs(&l.elts)),
            py::Expr::Tuple(t) => ExprKind::Sequence(self.exprs(&t.elts)),
            py::Expr::Set(s) => ExprKind::Sequence(self.exprs(&s.elts)),
            py::Expr::ListComp(c) => self.comprehension(ComprehensionKind::List, &c.elt, None, &c.generators),
            py::Expr::SetComp(c) => self.comprehension(ComprehensionKind::Set, &c.elt, None, &c.generators),
            py::Expr::GeneratorExp(c) => {
                self.comprehension(ComprehensionKind::Generator, &c.elt, None, &c.generators)
            }
            py::Expr::DictComp(c) => {
                self.comprehension(ComprehensionKind::Dict, &c.key, Some(&c.value), &c.generators)
            }
            py::Expr::Yield(y) => ExprKind::Yield(y.value.as_deref().map(|e| self.boxed(e))),
            py::Expr::YieldFrom(y) => ExprKind::YieldFrom(self.boxed(&y.value)),
            py::Expr::Await(a) => ExprKind::Await(self.boxed(&a.value)),
            py::Expr::Starred(s) => ExprKind::Starred(self.boxed(&s.value)),
            py::Expr::NamedExpr(n) => ExprKind::NamedExpr {
                value: self.boxed(&n.value),
                target: self.boxed(&n.target),
            },
            py::Expr::IfExp(i) => ExprKind::IfExp {
                test: self.boxed(&i.test),
                body: self.boxed(&i.body),
                orelse: self.boxed(&i.orelse),
            },
            py::Expr::BoolOp(b) => ExprKind::BoolOp(self.exprs(&b.values)),
            py::Expr::BinOp(b) => ExprKind::Operation(vec![self.expr(&b.left), self.expr(&b.right)]),
            py::Expr::UnaryOp(u) => ExprKind::Operation(vec![self.expr(&u.operand)]),
            py::Expr::Compare(c) => {
                let mut operands = vec![self.expr(&c.left)];
                operands.extend(self.exprs(&c.comparators));
                ExprKind::Operation(operands)
            }
            py::Expr::JoinedStr(j) => ExprKind::Operation(self.exprs(&j.values)),
            py::Expr::FormattedValue(f) => {
                let mut operands = vec![self.expr(&f.value)];
                if let Some(spec) = &f.format_spec {
                    operands.push(self.expr(spec));
                }
                ExprKind::Operation(operands)
            }
            py::Expr::Slice(s) => ExprKind::Operation(
                [&s.lower, &s.upper, &s.step]
                    .into_iter()
                    .flatten()
                    .map(|e| self.expr(e))
                    .collect(),
            ),
        };
        Expr { id, span, kind }
    }

    fn comprehension(
        &mut self,
        kind: ComprehensionKind,
        element: &py::Expr,
        value: Option<&py::Expr>,
        generators: &[py::Comprehension],
    ) -> ExprKind {
        let clauses = generators
            .iter()
            .map(|g| ComprehensionClause {
                iter: self.expr(&g.iter),
                target: self.expr(&g.target),
                ifs: self.exprs(&g.ifs),
            })
            .collect();
        ExprKind::Comprehension(Box::new(Comprehension {
            kind,
            element: self.expr(element),
            value: value.map(|v| self.expr(v)),
            clauses,
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn positions_are_one_based_chars() {
        let src = "ab\nxé = 1\n";
        let index = LineIndex::new(src);
        assert_eq!(index.position(0), (1, 1));
        assert_eq!(index.position(3), (2, 1));
        // 'é' is two bytes; '=' sits at char column 4.
        assert_eq!(index.position(7), (2, 4));
    }
}
