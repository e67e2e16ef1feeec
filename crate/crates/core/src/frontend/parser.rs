//! Recursive-descent parser for FPL.

use super::ast::*;
use super::lexer::{tokenize, Spanned, Token};
use super::Diagnostic;

pub fn parse_program(source: &str) -> Result<Program, Diagnostic> {
    let tokens = tokenize(source)?;
    let mut p = Parser { source, tokens, pos: 0 };
    p.program()
}

/// Parses a standalone expression (used by declarative model files).
pub fn parse_expression(source: &str) -> Result<Expr, Diagnostic> {
    let tokens = tokenize(source)?;
    let mut p = Parser { source, tokens, pos: 0 };
    let e = p.expr()?;
    p.expect(Token::Eof, "end of expression")?;
    Ok(e)
}

struct Parser<'a> {
    source: &'a str,
    tokens: Vec<Spanned>,
    pos: usize,
}

type PResult<T> = Result<T, Diagnostic>;

impl<'a> Parser<'a> {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos].token
    }

    fn loc(&self) -> Loc {
        self.tokens[self.pos].loc
    }

    fn advance(&mut self) -> Spanned {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, t: &Token) -> bool {
        if self.peek() == t {
            self.advance();
            true
        } else {
            false
        }
    }

    fn error<T>(&self, what: &str) -> PResult<T> {
        Err(Diagnostic::at(
            self.source,
            self.loc(),
            format!("expected {what}, found {}", self.peek().describe()),
        ))
    }

    fn expect(&mut self, t: Token, what: &str) -> PResult<Loc> {
        if *self.peek() == t {
            Ok(self.advance().loc)
        } else {
            self.error(what)
        }
    }

    fn ident(&mut self, what: &str) -> PResult<(String, Loc)> {
        match self.peek().clone() {
            Token::Ident(s) => {
                let loc = self.advance().loc;
                Ok((s, loc))
            }
            _ => self.error(what),
        }
    }

    fn program(&mut self) -> PResult<Program> {
        let mut functions = Vec::new();
        loop {
            match self.peek() {
                Token::Func => functions.push(self.function()?),
                Token::Eof if !functions.is_empty() => break,
                _ => return self.error("function"),
            }
        }
        Ok(Program { functions })
    }

    fn function(&mut self) -> PResult<FunctionDef> {
        let loc = self.expect(Token::Func, "`func`")?;
        let (name, _) = self.ident("function name")?;
        self.expect(Token::LParen, "`(`")?;
        let mut params = Vec::new();
        if !self.eat(&Token::RParen) {
            loop {
                params.push(self.param()?);
                if self.eat(&Token::Comma) {
                    continue;
                }
                self.expect(Token::RParen, "`,` or `)`")?;
                break;
            }
        }
        let return_kind = if self.eat(&Token::Colon) {
            match self.peek() {
                Token::Ident(s) if s == "real" => {
                    self.advance();
                    ReturnKind::Real
                }
                Token::Ident(s) if s == "void" => {
                    self.advance();
                    ReturnKind::Void
                }
                _ => return self.error("`real` or `void`"),
            }
        } else {
            ReturnKind::Void
        };
        self.expect(Token::LBrace, "`{`")?;
        let mut locals = Vec::new();
        let mut body = Vec::new();
        while !self.eat(&Token::RBrace) {
            if *self.peek() == Token::Var {
                locals.push(self.var_decl()?);
            } else {
                body.push(self.stmt()?);
            }
        }
        Ok(FunctionDef { name, params, return_kind, locals, body, loc })
    }

    fn param(&mut self) -> PResult<Param> {
        let loc = self.loc();
        let direction = if self.eat(&Token::Inout) { Direction::Inout } else { Direction::In };
        let (name, _) = self.ident("parameter name")?;
        self.expect(Token::Colon, "`:`")?;
        let ty = self.type_spec()?;
        Ok(Param { name, ty, direction, loc })
    }

    fn var_decl(&mut self) -> PResult<VarDecl> {
        let loc = self.expect(Token::Var, "`var`")?;
        let (name, _) = self.ident("variable name")?;
        self.expect(Token::Colon, "`:`")?;
        let ty = self.type_spec()?;
        self.expect(Token::Semi, "`;`")?;
        Ok(VarDecl { name, ty, loc })
    }

    fn type_spec(&mut self) -> PResult<TypeSpec> {
        let (name, _) = match self.peek() {
            Token::Ident(_) => self.ident("type")?,
            _ => return self.error("type"),
        };
        match name.as_str() {
            "real" => {
                if self.eat(&Token::LBracket) {
                    let len = self.expr()?;
                    self.expect(Token::RBracket, "`]`")?;
                    Ok(TypeSpec::RealArray(len))
                } else {
                    Ok(TypeSpec::Real)
                }
            }
            "int" => Ok(TypeSpec::Int),
            "bool" => Ok(TypeSpec::Bool),
            _ => {
                self.pos -= 1;
                self.error("type (`real`, `int` or `bool`)")
            }
        }
    }

    fn block(&mut self) -> PResult<Vec<Stmt>> {
        self.expect(Token::LBrace, "`{`")?;
        let mut body = Vec::new();
        while !self.eat(&Token::RBrace) {
            if *self.peek() == Token::Var {
                return Err(Diagnostic::at(
                    self.source,
                    self.loc(),
                    "variable declarations are only allowed at function level".into(),
                ));
            }
            body.push(self.stmt()?);
        }
        Ok(body)
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        let loc = self.loc();
        let kind = match self.peek().clone() {
            Token::For => {
                self.advance();
                let (index, _) = self.ident("loop index")?;
                self.expect(Token::In, "`in`")?;
                let lo = self.expr()?;
                self.expect(Token::DotDot, "`..`")?;
                let hi = self.expr()?;
                let body = self.block()?;
                StmtKind::For { index, lo, hi, body }
            }
            Token::While => {
                self.advance();
                let cond = self.expr()?;
                let body = self.block()?;
                StmtKind::While { cond, body }
            }
            Token::If => return self.if_stmt(),
            Token::Return => {
                self.advance();
                let value = if *self.peek() == Token::Semi { None } else { Some(self.expr()?) };
                self.expect(Token::Semi, "`;`")?;
                StmtKind::Return(value)
            }
            Token::Ident(name) => {
                self.advance();
                if self.eat(&Token::LParen) {
                    let args = self.args()?;
                    self.expect(Token::Semi, "`;`")?;
                    StmtKind::Call { name, args }
                } else {
                    let index = if self.eat(&Token::LBracket) {
                        let i = self.expr()?;
                        self.expect(Token::RBracket, "`]`")?;
                        Some(i)
                    } else {
                        None
                    };
                    self.expect(Token::Assign, "`=`")?;
                    let value = self.expr()?;
                    self.expect(Token::Semi, "`;`")?;
                    StmtKind::Assign { target: LValue { name, index, loc }, value }
                }
            }
            _ => return self.error("statement"),
        };
        Ok(Stmt { kind, loc })
    }

    fn if_stmt(&mut self) -> PResult<Stmt> {
        let loc = self.expect(Token::If, "`if`")?;
        let cond = self.expr()?;
        let then_body = self.block()?;
        let else_body = if self.eat(&Token::Else) {
            if *self.peek() == Token::If {
                vec![self.if_stmt()?]
            } else {
                self.block()?
            }
        } else {
            Vec::new()
        };
        Ok(Stmt { kind: StmtKind::If { cond, then_body, else_body }, loc })
    }

    fn args(&mut self) -> PResult<Vec<Expr>> {
        let mut args = Vec::new();
        if self.eat(&Token::RParen) {
            return Ok(args);
        }
        loop {
            args.push(self.expr()?);
            if self.eat(&Token::Comma) {
                continue;
            }
            self.expect(Token::RParen, "`,` or `)`")?;
            return Ok(args);
        }
    }

    pub fn expr(&mut self) -> PResult<Expr> {
        self.binary(1)
    }

    fn binary_op(&self) -> Option<BinaryOp> {
        Some(match self.peek() {
            Token::OrOr => BinaryOp::Or,
            Token::AndAnd => BinaryOp::And,
            Token::Lt => BinaryOp::Lt,
            Token::Le => BinaryOp::Le,
            Token::Gt => BinaryOp::Gt,
            Token::Ge => BinaryOp::Ge,
            Token::EqEq => BinaryOp::Eq,
            Token::Ne => BinaryOp::Ne,
            Token::Plus => BinaryOp::Add,
            Token::Minus => BinaryOp::Sub,
            Token::Star => BinaryOp::Mul,
            Token::Slash => BinaryOp::Div,
            _ => return None,
        })
    }

    /// Precedence climbing. Comparisons do not chain.
    fn binary(&mut self, min_prec: u8) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.binary_op() {
            let prec = op.precedence();
            if prec < min_prec {
                break;
            }
            let loc = self.advance().loc;
            let rhs = self.binary(prec + 1)?;
            if op.is_comparison() {
                if let Some(next) = self.binary_op() {
                    if next.is_comparison() {
                        return Err(Diagnostic::at(
                            self.source,
                            self.loc(),
                            "comparison operators cannot be chained".into(),
                        ));
                    }
                }
            }
            lhs = Expr::new(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), loc);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Expr> {
        let loc = self.loc();
        if self.eat(&Token::Minus) {
            let e = self.unary()?;
            return Ok(Expr::new(ExprKind::Unary(UnaryOp::Neg, Box::new(e)), loc));
        }
        if self.eat(&Token::Bang) {
            let e = self.unary()?;
            return Ok(Expr::new(ExprKind::Unary(UnaryOp::Not, Box::new(e)), loc));
        }
        self.primary()
    }

    fn primary(&mut self) -> PResult<Expr> {
        let loc = self.loc();
        let kind = match self.peek().clone() {
            Token::Real(v) => {
                self.advance();
                ExprKind::Real(v)
            }
            Token::Int(v) => {
                self.advance();
                ExprKind::Int(v)
            }
            Token::True => {
                self.advance();
                ExprKind::Bool(true)
            }
            Token::False => {
                self.advance();
                ExprKind::Bool(false)
            }
            Token::LParen => {
                self.advance();
                let e = self.expr()?;
                self.expect(Token::RParen, "`)`")?;
                return Ok(e);
            }
            Token::Ident(name) => {
                self.advance();
                if self.eat(&Token::LParen) {
                    ExprKind::Call(name, self.args()?)
                } else if self.eat(&Token::LBracket) {
                    let i = self.expr()?;
                    self.expect(Token::RBracket, "`]`")?;
                    ExprKind::Index(name, Box::new(i))
                } else {
                    ExprKind::Var(name)
                }
            }
            _ => return self.error("expression"),
        };
        Ok(Expr::new(kind, loc))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence() {
        let e = parse_expression("a + b * c - d").unwrap();
        let ExprKind::Binary(BinaryOp::Sub, lhs, _) = &e.kind else { panic!("{e:?}") };
        let ExprKind::Binary(BinaryOp::Add, _, mul) = &lhs.kind else { panic!() };
        assert!(matches!(mul.kind, ExprKind::Binary(BinaryOp::Mul, _, _)));
    }

    #[test]
    fn unary_binds_tighter_than_mul() {
        let e = parse_expression("-a * b").unwrap();
        assert!(matches!(e.kind, ExprKind::Binary(BinaryOp::Mul, _, _)));
    }

    #[test]
    fn chained_comparison_rejected() {
        let err = parse_expression("a < b < c").unwrap_err();
        assert!(err.message.contains("chained"));
    }

    #[test]
    fn else_if_nests() {
        let p = parse_program("func f(x: real): real { if x < 0.0 { x = 1.0; } else if x > 1.0 { x = 2.0; } return x; }")
            .unwrap();
        let StmtKind::If { else_body, .. } = &p.functions[0].body[0].kind else { panic!() };
        assert!(matches!(else_body[0].kind, StmtKind::If { .. }));
    }

    #[test]
    fn nested_var_rejected() {
        let err = parse_program("func f(x: real) { if x < 1.0 { var y: real; } }").unwrap_err();
        assert!(err.message.contains("function level"));
    }
}
