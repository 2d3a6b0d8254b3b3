// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeSet;

use super::ast::*;
use super::lexer::{tokenize, CTok, CToken};
use super::{CError, CErrorKind};

const SCALAR_TYPES: &[&str] =
    &["int", "long", "unsigned", "pid_t", "pn_t", "fd_t", "size_t", "ssize_t", "off_t", "uint64_t", "uintptr_t", "int64_t"];

const UNSUPPORTED_KEYWORDS: &[&str] =
    &["while", "for", "do", "goto", "switch", "case", "break", "continue", "else", "sizeof", "static", "const", "volatile"];

pub fn parse_impl(text: &str) -> Result<ImplAst, CError> {
    let toks = tokenize(text)?;
    let mut p = CParser { toks, pos: 0, locals: BTreeSet::new() };
    p.function()
}

/// Parses a standalone expression (used for helper templates).
pub fn parse_c_expr(text: &str) -> Result<CExpr, CError> {
    let toks = tokenize(text)?;
    let mut p = CParser { toks, pos: 0, locals: BTreeSet::new() };
    let e = p.expr()?;
    if p.peek() != &CTok::Eof {
        return Err(p.err(CErrorKind::Syntax, "trailing tokens after expression"));
    }
    Ok(e)
}

struct CParser {
    toks: Vec<CToken>,
    pos: usize,
    locals: BTreeSet<String>,
}

impl CParser {
    fn peek(&self) -> &CTok {
        &self.toks[self.pos].tok
    }

    fn peek2(&self) -> &CTok {
        &self.toks[(self.pos + 1).min(self.toks.len() - 1)].tok
    }

    fn span(&self) -> CSpan {
        self.toks[self.pos].span
    }

    fn bump(&mut self) -> CToken {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err(&self, kind: CErrorKind, msg: impl Into<String>) -> CError {
        CError::new(kind, msg, self.span())
    }

    fn is(&self, p: &str) -> bool {
        matches!(self.peek(), CTok::Punct(x) if *x == p)
    }

    fn is_ident(&self, name: &str) -> bool {
        matches!(self.peek(), CTok::Ident(x) if x == name)
    }

    fn eat(&mut self, p: &str) -> bool {
        if self.is(p) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, p: &str) -> Result<(), CError> {
        if self.eat(p) {
            Ok(())
        } else {
            Err(self.err(CErrorKind::Syntax, format!("expected `{p}`, found {}", describe(self.peek()))))
        }
    }

    fn ident(&mut self) -> Result<String, CError> {
        match self.peek().clone() {
            CTok::Ident(n) => {
                self.bump();
                Ok(n)
            }
            other => Err(self.err(CErrorKind::Syntax, format!("expected an identifier, found {}", describe(&other)))),
        }
    }

    fn function(&mut self) -> Result<ImplAst, CError> {
        if !self.is_ident("int") {
            return Err(self.err(CErrorKind::Syntax, "a syscall must be declared `int name(...)`"));
        }
        self.bump();
        let name = self.ident()?;
        self.expect("(")?;
        let mut params = Vec::new();
        if self.is_ident("void") && matches!(self.peek2(), CTok::Punct(")")) {
            self.bump();
        }
        while !self.is(")") {
            let span = self.span();
            let ty = self.ident()?;
            if !SCALAR_TYPES.contains(&ty.as_str()) {
                return Err(CError::new(CErrorKind::UnsupportedConstruct, format!("parameter type `{ty}`"), span));
            }
            if self.is("*") {
                return Err(self.err(CErrorKind::UnsupportedConstruct, "pointer parameters are not supported"));
            }
            let pname = self.ident()?;
            self.locals.insert(pname.clone());
            params.push(CParam { ty, name: pname, span });
            if !self.eat(",") {
                break;
            }
        }
        self.expect(")")?;
        self.expect("{")?;
        let mut locals = Vec::new();
        let mut body = Vec::new();
        while !self.is("}") {
            if self.peek() == &CTok::Eof {
                return Err(self.err(CErrorKind::Syntax, "unexpected end of input inside function body"));
            }
            if matches!(body.last(), Some(CStmt::ReturnZero { .. })) {
                return Err(self.err(CErrorKind::Syntax, "statement after `return 0;`"));
            }
            self.statement(&mut locals, &mut body)?;
        }
        self.expect("}")?;
        if self.peek() != &CTok::Eof {
            return Err(self.err(CErrorKind::Syntax, "only one function per file"));
        }
        if !matches!(body.last(), Some(CStmt::ReturnZero { .. })) {
            return Err(self.err(CErrorKind::Syntax, "the function must end with `return 0;`"));
        }
        Ok(ImplAst { name, params, locals, body, dropped_ghosts: vec![] })
    }

    fn statement(&mut self, locals: &mut Vec<CDecl>, body: &mut Vec<CStmt>) -> Result<(), CError> {
        let span = self.span();
        let CTok::Ident(word) = self.peek().clone() else {
            if self.is("{") {
                return Err(self.err(CErrorKind::UnsupportedConstruct, "nested blocks are only allowed around an error return"));
            }
            if self.is("*") || self.is("++") || self.is("--") {
                return Err(self.err(CErrorKind::UnsupportedConstruct, "pointer dereference and increments are not supported"));
            }
            return Err(self.err(CErrorKind::Syntax, format!("unexpected {}", describe(self.peek()))));
        };
        if UNSUPPORTED_KEYWORDS.contains(&word.as_str()) {
            return Err(self.err(CErrorKind::UnsupportedConstruct, format!("`{word}` is outside the supported C subset")));
        }
        match word.as_str() {
            "struct" => {
                self.bump();
                let sname = self.ident()?;
                loop {
                    let dspan = self.span();
                    if !self.eat("*") {
                        return Err(self.err(CErrorKind::UnsupportedConstruct, "struct values are not supported; declare a pointer"));
                    }
                    let n = self.ident()?;
                    self.locals.insert(n.clone());
                    locals.push(CDecl { ty: DeclType::StructPtr(sname.clone()), name: n.clone(), span: dspan });
                    if self.eat("=") {
                        let value = self.expr()?;
                        body.push(CStmt::Bind { name: n, op: AssignOp::Set, value, span: dspan });
                    }
                    if !self.eat(",") {
                        break;
                    }
                }
                self.expect(";")
            }
            t if SCALAR_TYPES.contains(&t) => {
                self.bump();
                loop {
                    let dspan = self.span();
                    if self.is("*") {
                        return Err(self.err(CErrorKind::UnsupportedConstruct, "scalar pointers are not supported"));
                    }
                    let n = self.ident()?;
                    self.locals.insert(n.clone());
                    locals.push(CDecl { ty: DeclType::Scalar(word.clone()), name: n.clone(), span: dspan });
                    if self.eat("=") {
                        let value = self.expr()?;
                        body.push(CStmt::Bind { name: n, op: AssignOp::Set, value, span: dspan });
                    }
                    if !self.eat(",") {
                        break;
                    }
                }
                self.expect(";")
            }
            "if" => {
                self.bump();
                self.expect("(")?;
                let cond = self.expr()?;
                self.expect(")")?;
                let braced = self.eat("{");
                if !self.is_ident("return") {
                    return Err(self.err(CErrorKind::UnsupportedConstruct, "an `if` body may only return an error code"));
                }
                self.bump();
                if !self.eat("-") {
                    return Err(self.err(CErrorKind::UnsupportedConstruct, "an `if` body must return a negated error code"));
                }
                let errno = self.ident()?;
                self.expect(";")?;
                if braced {
                    self.expect("}")?;
                }
                if self.is_ident("else") {
                    return Err(self.err(CErrorKind::UnsupportedConstruct, "`else` is outside the supported C subset"));
                }
                body.push(CStmt::ErrorCheck { cond, errno, span });
                Ok(())
            }
            "return" => {
                self.bump();
                match self.peek() {
                    CTok::Int(0) => {
                        self.bump();
                        self.expect(";")?;
                        body.push(CStmt::ReturnZero { span });
                        Ok(())
                    }
                    _ => Err(self.err(CErrorKind::UnsupportedConstruct, "only `return 0;` may appear outside an error check")),
                }
            }
            _ => {
                if matches!(self.peek2(), CTok::Punct("(")) {
                    let e = self.postfix()?;
                    let CExpr::Call(name, args, _) = e else {
                        return Err(CError::new(CErrorKind::Syntax, "expected a call statement", span));
                    };
                    self.expect(";")?;
                    body.push(CStmt::HelperCall { name, args, span });
                    return Ok(());
                }
                let target = self.postfix()?;
                let op = match self.peek() {
                    CTok::Punct("=") => AssignOp::Set,
                    CTok::Punct("+=") => AssignOp::Add,
                    CTok::Punct("-=") => AssignOp::Sub,
                    CTok::Punct("|=") => AssignOp::Or,
                    CTok::Punct("++" | "--" | "*=" | "/=" | "%=" | "&=" | "^=" | "<<=" | ">>=") => {
                        return Err(self.err(CErrorKind::UnsupportedConstruct, format!("operator {}", describe(self.peek()))))
                    }
                    other => return Err(self.err(CErrorKind::Syntax, format!("expected an assignment, found {}", describe(other)))),
                };
                self.bump();
                let value = self.expr()?;
                self.expect(";")?;
                match target {
                    CExpr::Name(n, _) if self.locals.contains(&n) => body.push(CStmt::Bind { name: n, op, value, span }),
                    t => body.push(CStmt::Assign { target: t, op, value, span }),
                }
                Ok(())
            }
        }
    }

    fn expr(&mut self) -> Result<CExpr, CError> {
        let e = self.binary(1)?;
        if self.is("?") {
            return Err(self.err(CErrorKind::UnsupportedConstruct, "the conditional operator is not supported"));
        }
        Ok(e)
    }

    fn bin_op(&self) -> Option<(CBinOp, u8)> {
        let CTok::Punct(p) = self.peek() else { return None };
        Some(match *p {
            "||" => (CBinOp::LogOr, 1),
            "&&" => (CBinOp::LogAnd, 2),
            "|" => (CBinOp::BitOr, 3),
            "^" => (CBinOp::BitXor, 4),
            "&" => (CBinOp::BitAnd, 5),
            "==" => (CBinOp::Eq, 6),
            "!=" => (CBinOp::Ne, 6),
            "<" => (CBinOp::Lt, 7),
            ">" => (CBinOp::Gt, 7),
            "<=" => (CBinOp::Le, 7),
            ">=" => (CBinOp::Ge, 7),
            "<<" => (CBinOp::Shl, 8),
            ">>" => (CBinOp::Shr, 8),
            "+" => (CBinOp::Add, 9),
            "-" => (CBinOp::Sub, 9),
            "*" => (CBinOp::Mul, 10),
            "/" => (CBinOp::Div, 10),
            "%" => (CBinOp::Mod, 10),
            _ => return None,
        })
    }

    fn binary(&mut self, min: u8) -> Result<CExpr, CError> {
        if min > 10 {
            return self.unary();
        }
        let mut lhs = self.binary(min + 1)?;
        while let Some((op, _)) = self.bin_op().filter(|(_, p)| *p == min) {
            self.bump();
            let rhs = self.binary(min + 1)?;
            lhs = CExpr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<CExpr, CError> {
        let op = match self.peek() {
            CTok::Punct("!") => CUnOp::Not,
            CTok::Punct("-") => CUnOp::Neg,
            CTok::Punct("~") => CUnOp::BitNot,
            CTok::Punct("&") => return Err(self.err(CErrorKind::UnsupportedConstruct, "address-of is not supported")),
            CTok::Punct("*") => return Err(self.err(CErrorKind::UnsupportedConstruct, "pointer dereference is not supported")),
            CTok::Punct("++" | "--") => return Err(self.err(CErrorKind::UnsupportedConstruct, "increment operators are not supported")),
            _ => return self.postfix(),
        };
        self.bump();
        let inner = self.unary()?;
        Ok(CExpr::Unary(op, Box::new(inner)))
    }

    fn postfix(&mut self) -> Result<CExpr, CError> {
        let mut e = self.primary()?;
        loop {
            let span = self.span();
            if self.eat("->") {
                let f = self.ident()?;
                e = CExpr::Arrow(Box::new(e), f, span);
            } else if self.eat("[") {
                let idx = self.expr()?;
                self.expect("]")?;
                e = CExpr::Index(Box::new(e), Box::new(idx), span);
            } else if self.is(".") {
                return Err(self.err(CErrorKind::UnsupportedConstruct, "struct member access with `.`; use a pointer and `->`"));
            } else if self.is("++") || self.is("--") {
                return Err(self.err(CErrorKind::UnsupportedConstruct, "increment operators are not supported"));
            } else {
                return Ok(e);
            }
        }
    }

    fn primary(&mut self) -> Result<CExpr, CError> {
        let span = self.span();
        match self.peek().clone() {
            CTok::Int(v) => {
                self.bump();
                Ok(CExpr::Int(v))
            }
            CTok::Ident(n) => {
                if UNSUPPORTED_KEYWORDS.contains(&n.as_str()) {
                    return Err(self.err(CErrorKind::UnsupportedConstruct, format!("`{n}` is outside the supported C subset")));
                }
                self.bump();
                if self.eat("(") {
                    let mut args = Vec::new();
                    while !self.is(")") {
                        args.push(self.expr()?);
                        if !self.eat(",") {
                            break;
                        }
                    }
                    self.expect(")")?;
                    return Ok(CExpr::Call(n, args, span));
                }
                Ok(CExpr::Name(n, span))
            }
            CTok::Punct("(") => {
                self.bump();
                if let CTok::Ident(n) = self.peek() {
                    if SCALAR_TYPES.contains(&n.as_str()) || n == "struct" {
                        return Err(self.err(CErrorKind::UnsupportedConstruct, "casts are not supported"));
                    }
                }
                let e = self.expr()?;
                self.expect(")")?;
                Ok(e)
            }
            other => Err(self.err(CErrorKind::Syntax, format!("expected an expression, found {}", describe(&other)))),
        }
    }
}

fn describe(t: &CTok) -> String {
    match t {
        CTok::Ident(n) => format!("`{n}`"),
        CTok::Int(v) => format!("`{v}`"),
        CTok::Punct(p) => format!("`{p}`"),
        CTok::Eof => "end of input".into(),
    }
}
