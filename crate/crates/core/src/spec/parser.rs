// SPDX-License-Identifier: Apache-2.0

use super::ast::*;
use super::fault::{FaultKind, SpecFault};
use super::lexer::{tokenize, Tok, Token};

pub const DUAL_ACCESS_MSG: &str =
    "map fields are written with brackets and read with parentheses: use `field[i] = v`, not `field(i) = v`";

const RESERVED: &[&str] = &[
    "if", "elif", "else", "for", "while", "with", "try", "except", "finally", "lambda", "class", "pass", "del",
    "global", "nonlocal", "assert", "yield", "raise", "in", "is", "None", "break", "continue", "async", "await",
];

pub fn parse_spec(text: &str) -> Result<SpecAst, SpecFault> {
    let toks = tokenize(text)?;
    let mut p = Parser { toks, pos: 0 };
    p.file()
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

fn fail<T>(span: Span, msg: impl Into<String>) -> Result<T, SpecFault> {
    Err(SpecFault::new(FaultKind::ParseError, msg, span))
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        &self.toks[(self.pos + n).min(self.toks.len() - 1)].tok
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn is_op(&self, op: &str) -> bool {
        matches!(self.peek(), Tok::Op(o) if *o == op)
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Name(n) if n == kw)
    }

    fn eat_op(&mut self, op: &str) -> bool {
        if self.is_op(op) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_op(&mut self, op: &str) -> Result<Span, SpecFault> {
        if self.is_op(op) {
            Ok(self.bump().span)
        } else {
            fail(self.span(), format!("expected `{op}`, found {}", describe(self.peek())))
        }
    }

    fn expect_name(&mut self) -> Result<(String, Span), SpecFault> {
        match self.peek().clone() {
            Tok::Name(n) => {
                let s = self.bump().span;
                Ok((n, s))
            }
            other => fail(self.span(), format!("expected a name, found {}", describe(&other))),
        }
    }

    fn expect_line_end(&mut self) -> Result<(), SpecFault> {
        match self.peek() {
            Tok::Newline => {
                self.bump();
                Ok(())
            }
            Tok::Eof => Ok(()),
            other => fail(self.span(), format!("expected end of line, found {}", describe(other))),
        }
    }

    fn skip_newlines(&mut self) {
        while matches!(self.peek(), Tok::Newline) {
            self.bump();
        }
    }

    fn skip_line(&mut self) {
        while !matches!(self.peek(), Tok::Newline | Tok::Eof) {
            self.bump();
        }
        self.skip_newlines();
    }

    fn file(&mut self) -> Result<SpecAst, SpecFault> {
        loop {
            self.skip_newlines();
            if self.is_kw("import") || self.is_kw("from") {
                self.skip_line();
            } else if matches!(self.peek(), Tok::Str) {
                self.bump();
                self.expect_line_end()?;
            } else {
                break;
            }
        }
        let span = self.span();
        if !self.is_kw("def") {
            return fail(span, format!("expected `def`, found {}", describe(self.peek())));
        }
        self.bump();
        let (name, _) = self.expect_name()?;
        self.expect_op("(")?;
        let mut params = Vec::new();
        while !self.is_op(")") {
            let (pname, pspan) = self.expect_name()?;
            if self.eat_op(":") {
                self.expr()?;
            }
            params.push(Param { name: pname, span: pspan });
            if !self.eat_op(",") {
                break;
            }
        }
        self.expect_op(")")?;
        if self.eat_op("->") {
            self.expr()?;
        }
        self.expect_op(":")?;
        if !matches!(self.peek(), Tok::Newline) {
            return fail(self.span(), "the function body must start on a new line");
        }
        self.skip_newlines();
        if params.is_empty() {
            return fail(span, "a spec takes the pre-state as its first parameter");
        }

        let mut body = Vec::new();
        while !matches!(self.peek(), Tok::Eof) {
            if let Some(Stmt::Return { .. }) = body.last() {
                if self.is_kw("def") {
                    return fail(self.span(), "only one `def` is allowed per spec");
                }
                return fail(self.span(), "statement after `return`");
            }
            if matches!(self.peek(), Tok::Str) {
                self.bump();
                self.expect_line_end()?;
                self.skip_newlines();
                continue;
            }
            body.push(self.stmt()?);
            self.skip_newlines();
        }
        if !matches!(body.last(), Some(Stmt::Return { .. })) {
            return fail(self.span(), "the spec must end with `return cond, util.If(cond, new, old)`");
        }
        Ok(SpecAst { name, params, body, span })
    }

    fn stmt(&mut self) -> Result<Stmt, SpecFault> {
        let span = self.span();
        if let Tok::Name(kw) = self.peek() {
            if kw == "return" {
                self.bump();
                let first = self.expr()?;
                let mut values = vec![first];
                while self.eat_op(",") {
                    if matches!(self.peek(), Tok::Newline | Tok::Eof) {
                        break;
                    }
                    values.push(self.expr()?);
                }
                if values.len() == 1 {
                    if let ExprKind::Tuple(xs) = &values[0].kind {
                        values = xs.clone();
                    }
                }
                self.expect_line_end()?;
                return Ok(Stmt::Return { values, span });
            }
            if kw == "def" {
                return fail(span, "nested function definitions are not supported");
            }
            if RESERVED.contains(&kw.as_str()) {
                return fail(span, format!("`{kw}` is not supported in specifications"));
            }
        }
        let target = self.expr()?;
        let stmt = if self.eat_op("=") {
            check_target(&target)?;
            let value = self.expr()?;
            if self.is_op("=") {
                return fail(self.span(), "chained assignment is not supported");
            }
            Stmt::Assign { target, value, span }
        } else if self.is_op("+=") || self.is_op("-=") {
            let op = if self.bump().tok == Tok::Op("+=") { AugOp::Add } else { AugOp::Sub };
            check_target(&target)?;
            let value = self.expr()?;
            Stmt::AugAssign { target, op, value, span }
        } else {
            return fail(span, "expression statement has no effect; expected an assignment or `return`");
        };
        self.expect_line_end()?;
        Ok(stmt)
    }

    fn expr(&mut self) -> Result<Expr, SpecFault> {
        self.or_expr()
    }

    fn or_expr(&mut self) -> Result<Expr, SpecFault> {
        let mut lhs = self.and_expr()?;
        while self.is_kw("or") {
            let span = self.bump().span;
            let rhs = self.and_expr()?;
            lhs = Expr::new(ExprKind::Binary(BinOp::Or, Box::new(lhs), Box::new(rhs)), span);
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> Result<Expr, SpecFault> {
        let mut lhs = self.not_expr()?;
        while self.is_kw("and") {
            let span = self.bump().span;
            let rhs = self.not_expr()?;
            lhs = Expr::new(ExprKind::Binary(BinOp::And, Box::new(lhs), Box::new(rhs)), span);
        }
        Ok(lhs)
    }

    fn not_expr(&mut self) -> Result<Expr, SpecFault> {
        if self.is_kw("not") {
            let span = self.bump().span;
            let inner = self.not_expr()?;
            return Ok(Expr::new(ExprKind::Unary(UnOp::Not, Box::new(inner)), span));
        }
        self.comparison()
    }

    fn comparison(&mut self) -> Result<Expr, SpecFault> {
        let lhs = self.binary(5)?;
        let Some(op) = self.cmp_op() else { return Ok(lhs) };
        let span = self.bump().span;
        let rhs = self.binary(5)?;
        if self.cmp_op().is_some() {
            return fail(self.span(), "chained comparisons are not supported");
        }
        Ok(Expr::new(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), span))
    }

    fn cmp_op(&self) -> Option<BinOp> {
        Some(match self.peek() {
            Tok::Op("==") => BinOp::Eq,
            Tok::Op("!=") => BinOp::Ne,
            Tok::Op("<") => BinOp::Lt,
            Tok::Op(">") => BinOp::Gt,
            Tok::Op("<=") => BinOp::Le,
            Tok::Op(">=") => BinOp::Ge,
            _ => return None,
        })
    }

    fn bin_op(&self) -> Option<BinOp> {
        Some(match self.peek() {
            Tok::Op("|") => BinOp::BitOr,
            Tok::Op("^") => BinOp::BitXor,
            Tok::Op("&") => BinOp::BitAnd,
            Tok::Op("<<") => BinOp::Shl,
            Tok::Op(">>") => BinOp::Shr,
            Tok::Op("+") => BinOp::Add,
            Tok::Op("-") => BinOp::Sub,
            Tok::Op("*") => BinOp::Mul,
            Tok::Op("/") => BinOp::Div,
            Tok::Op("%") => BinOp::Mod,
            _ => return None,
        })
    }

    /// Left-associative binary operators at or above `min` precedence.
    fn binary(&mut self, min: u8) -> Result<Expr, SpecFault> {
        if min > 10 {
            return self.unary();
        }
        let mut lhs = self.binary(min + 1)?;
        while let Some(op) = self.bin_op().filter(|op| op.precedence() == min) {
            let span = self.bump().span;
            let rhs = self.binary(min + 1)?;
            lhs = Expr::new(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), span);
        }
        if self.is_op("//") || self.is_op("**") || self.is_op("@") {
            return fail(self.span(), format!("operator {} is not supported", describe(self.peek())));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, SpecFault> {
        let op = match self.peek() {
            Tok::Op("-") => Some(UnOp::Neg),
            Tok::Op("~") => Some(UnOp::Invert),
            _ => None,
        };
        if let Some(op) = op {
            let span = self.bump().span;
            let inner = self.unary()?;
            return Ok(Expr::new(ExprKind::Unary(op, Box::new(inner)), span));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr, SpecFault> {
        let mut e = self.atom()?;
        loop {
            let span = self.span();
            if self.eat_op("(") {
                let mut args = Vec::new();
                while !self.is_op(")") {
                    if matches!(self.peek(), Tok::Name(_)) && matches!(self.peek_at(1), Tok::Op("=")) {
                        return fail(self.span(), "keyword arguments are not supported");
                    }
                    args.push(self.expr()?);
                    if !self.eat_op(",") {
                        break;
                    }
                }
                self.expect_op(")")?;
                e = Expr::new(ExprKind::Call(Box::new(e), args), span);
            } else if self.eat_op("[") {
                let idx = self.expr()?;
                if self.is_op(":") || self.is_op(",") {
                    return fail(self.span(), "slices and multi-dimensional subscripts are not supported");
                }
                self.expect_op("]")?;
                e = Expr::new(ExprKind::Index(Box::new(e), Box::new(idx)), span);
            } else if self.eat_op(".") {
                let (attr, _) = self.expect_name()?;
                e = Expr::new(ExprKind::Attr(Box::new(e), attr), span);
            } else {
                return Ok(e);
            }
        }
    }

    fn atom(&mut self) -> Result<Expr, SpecFault> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Name(n) => {
                if matches!(n.as_str(), "and" | "or" | "not" | "def" | "return" | "import" | "from")
                    || RESERVED.contains(&n.as_str())
                {
                    return fail(span, format!("unexpected keyword `{n}`"));
                }
                self.bump();
                Ok(Expr::new(
                    match n.as_str() {
                        "True" => ExprKind::Bool(true),
                        "False" => ExprKind::Bool(false),
                        _ => ExprKind::Name(n),
                    },
                    span,
                ))
            }
            Tok::Int { value, hex } => {
                self.bump();
                Ok(Expr::new(ExprKind::Int { value, hex }, span))
            }
            Tok::Op("(") => {
                self.bump();
                if self.eat_op(")") {
                    return Ok(Expr::new(ExprKind::Tuple(vec![]), span));
                }
                let first = self.expr()?;
                if self.eat_op(")") {
                    return Ok(first);
                }
                let mut items = vec![first];
                while self.eat_op(",") {
                    if self.is_op(")") {
                        break;
                    }
                    items.push(self.expr()?);
                }
                self.expect_op(")")?;
                Ok(Expr::new(ExprKind::Tuple(items), span))
            }
            Tok::Str => fail(span, "string literals are not allowed in expressions"),
            other => fail(span, format!("expected an expression, found {}", describe(&other))),
        }
    }
}

fn check_target(t: &Expr) -> Result<(), SpecFault> {
    match &t.kind {
        ExprKind::Name(_) => Ok(()),
        ExprKind::Attr(base, _) | ExprKind::Index(base, _) => check_target(base),
        ExprKind::Call(..) => fail(t.span, DUAL_ACCESS_MSG),
        ExprKind::Tuple(_) => fail(t.span, "tuple assignment is not supported"),
        _ => fail(t.span, "invalid assignment target"),
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Name(n) => format!("`{n}`"),
        Tok::Int { value, .. } => format!("`{value}`"),
        Tok::Str => "a string literal".into(),
        Tok::Newline => "end of line".into(),
        Tok::Op(o) => format!("`{o}`"),
        Tok::Eof => "end of input".into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_spec() {
        let ast = parse_spec("def f(old):\n    cond = z3.And(True)\n    return cond, util.If(cond, old, old)\n").unwrap();
        assert_eq!(ast.name, "f");
        assert_eq!(ast.body.len(), 2);
        assert!(ast.writes().is_empty());
        assert!(ast.copy_stmt().is_none());
    }

    #[test]
    fn precedence() {
        let ast = parse_spec("def f(old, a):\n    c = a + 1 << 2 | 3 == a\n    return c, util.If(c, old, old)\n").unwrap();
        let Stmt::Assign { value, .. } = &ast.body[0] else { panic!() };
        let ExprKind::Binary(BinOp::Eq, lhs, _) = &value.kind else { panic!("{value:?}") };
        assert!(matches!(lhs.kind, ExprKind::Binary(BinOp::BitOr, ..)));
    }

    #[test]
    fn parenthesized_write_names_the_rule() {
        let e = parse_spec("def f(old, pn, index, value):\n    new = old.copy()\n    new.pages[pn].data(index) = value\n    return True, util.If(True, new, old)\n")
            .unwrap_err();
        assert_eq!(e.kind, FaultKind::ParseError);
        assert!(e.message.contains("brackets"));
        assert_eq!(e.line, 3);
    }

    #[test]
    fn imports_and_docstrings_are_skipped() {
        let src = "import z3\nfrom x import y\n\ndef f(old):\n    \"\"\"doc\"\"\"\n    return True, util.If(True, old, old)\n";
        assert!(parse_spec(src).is_ok());
    }

    #[test]
    fn rejections() {
        for src in [
            "def f(old):\n    while x:\n    return True, old\n",
            "def f(old):\n    cond = a < b < c\n    return cond, old\n",
            "def f(old):\n    cond = True\n",
            "def f(old):\n    return True, old\n    x = 1\n",
            "def f(old):\n    return True, old\ndef g(old):\n    return True, old\n",
            "def f():\n    return True, True\n",
            "cond = True\n",
        ] {
            assert_eq!(parse_spec(src).unwrap_err().kind, FaultKind::ParseError, "{src}");
        }
    }

    #[test]
    fn parenthesized_return_tuple() {
        let ast = parse_spec("def f(old):\n    return (True, util.If(True, old, old))\n").unwrap();
        let Stmt::Return { values, .. } = &ast.body[0] else { panic!() };
        assert_eq!(values.len(), 2);
    }
}
