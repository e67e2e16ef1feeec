use super::ast::Loc;
use super::Diagnostic;

#[derive(Debug, Clone, PartialEq)]
pub enum Token {
    Ident(String),
    Real(f64),
    Int(i64),
    // keywords
    Func,
    Var,
    For,
    In,
    While,
    If,
    Else,
    Return,
    Inout,
    True,
    False,
    // punctuation
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Comma,
    Colon,
    Semi,
    DotDot,
    Assign,
    Plus,
    Minus,
    Star,
    Slash,
    Lt,
    Le,
    Gt,
    Ge,
    EqEq,
    Ne,
    AndAnd,
    OrOr,
    Bang,
    Eof,
}

impl Token {
    pub fn describe(&self) -> String {
        match self {
            Token::Ident(s) => format!("identifier `{s}`"),
            Token::Real(v) => format!("number `{v:?}`"),
            Token::Int(v) => format!("integer `{v}`"),
            Token::Eof => "end of input".to_string(),
            other => format!("`{}`", other.text()),
        }
    }

    fn text(&self) -> &'static str {
        match self {
            Token::Func => "func",
            Token::Var => "var",
            Token::For => "for",
            Token::In => "in",
            Token::While => "while",
            Token::If => "if",
            Token::Else => "else",
            Token::Return => "return",
            Token::Inout => "inout",
            Token::True => "true",
            Token::False => "false",
            Token::LParen => "(",
            Token::RParen => ")",
            Token::LBrace => "{",
            Token::RBrace => "}",
            Token::LBracket => "[",
            Token::RBracket => "]",
            Token::Comma => ",",
            Token::Colon => ":",
            Token::Semi => ";",
            Token::DotDot => "..",
            Token::Assign => "=",
            Token::Plus => "+",
            Token::Minus => "-",
            Token::Star => "*",
            Token::Slash => "/",
            Token::Lt => "<",
            Token::Le => "<=",
            Token::Gt => ">",
            Token::Ge => ">=",
            Token::EqEq => "==",
            Token::Ne => "!=",
            Token::AndAnd => "&&",
            Token::OrOr => "||",
            Token::Bang => "!",
            Token::Ident(_) | Token::Real(_) | Token::Int(_) | Token::Eof => "",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spanned {
    pub token: Token,
    pub loc: Loc,
}

pub fn tokenize(source: &str) -> Result<Vec<Spanned>, Diagnostic> {
    Lexer::new(source).run()
}

struct Lexer<'a> {
    source: &'a str,
    chars: Vec<char>,
    pos: usize,
    line: u32,
    col: u32,
}

impl<'a> Lexer<'a> {
    fn new(source: &'a str) -> Self {
        Lexer { source, chars: source.chars().collect(), pos: 0, line: 1, col: 1 }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek2(&self) -> Option<char> {
        self.chars.get(self.pos + 1).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.get(self.pos).copied()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn error(&self, loc: Loc, message: String) -> Diagnostic {
        Diagnostic::at(self.source, loc, message)
    }

    fn run(mut self) -> Result<Vec<Spanned>, Diagnostic> {
        let mut out = Vec::new();
        loop {
            self.skip_trivia();
            let loc = Loc::new(self.line, self.col);
            let Some(c) = self.peek() else {
                out.push(Spanned { token: Token::Eof, loc });
                return Ok(out);
            };
            let token = if c.is_ascii_alphabetic() || c == '_' {
                self.ident()
            } else if c.is_ascii_digit() || (c == '.' && self.peek2().is_some_and(|d| d.is_ascii_digit())) {
                self.number(loc)?
            } else {
                self.punct(loc)?
            };
            out.push(Spanned { token, loc });
        }
    }

    fn skip_trivia(&mut self) {
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('/') if self.peek2() == Some('/') => {
                    while let Some(c) = self.peek() {
                        if c == '\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                _ => return,
            }
        }
    }

    fn ident(&mut self) -> Token {
        let mut s = String::new();
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == '_' {
                s.push(c);
                self.bump();
            } else {
                break;
            }
        }
        match s.as_str() {
            "func" => Token::Func,
            "var" => Token::Var,
            "for" => Token::For,
            "in" => Token::In,
            "while" => Token::While,
            "if" => Token::If,
            "else" => Token::Else,
            "return" => Token::Return,
            "inout" => Token::Inout,
            "true" => Token::True,
            "false" => Token::False,
            _ => Token::Ident(s),
        }
    }

    fn number(&mut self, loc: Loc) -> Result<Token, Diagnostic> {
        let mut s = String::new();
        let mut is_real = false;
        while let Some(c) = self.peek() {
            if c.is_ascii_digit() {
                s.push(c);
                self.bump();
            } else if c == '.' && self.peek2() != Some('.') && !is_real {
                is_real = true;
                s.push(c);
                self.bump();
            } else {
                break;
            }
        }
        if matches!(self.peek(), Some('e') | Some('E')) {
            let sign = self.peek2();
            let digit_after = |lx: &Self, off: usize| lx.chars.get(lx.pos + off).is_some_and(|d| d.is_ascii_digit());
            let exponent = match sign {
                Some('+') | Some('-') => digit_after(self, 2),
                _ => digit_after(self, 1),
            };
            if exponent {
                is_real = true;
                s.push('e');
                self.bump();
                if matches!(self.peek(), Some('+') | Some('-')) {
                    s.push(self.bump().unwrap());
                }
                while let Some(c) = self.peek() {
                    if !c.is_ascii_digit() {
                        break;
                    }
                    s.push(c);
                    self.bump();
                }
            }
        }
        if is_real {
            // std parsing is correctly rounded (nearest, ties to even)
            s.parse::<f64>()
                .map(Token::Real)
                .map_err(|_| self.error(loc, format!("malformed number `{s}`")))
        } else {
            s.parse::<i64>()
                .map(Token::Int)
                .map_err(|_| self.error(loc, format!("integer literal `{s}` out of range")))
        }
    }

    fn punct(&mut self, loc: Loc) -> Result<Token, Diagnostic> {
        let c = self.bump().unwrap();
        let next = self.peek();
        let two = |lx: &mut Self, t: Token| {
            lx.bump();
            Ok(t)
        };
        match (c, next) {
            ('.', Some('.')) => two(self, Token::DotDot),
            ('<', Some('=')) => two(self, Token::Le),
            ('>', Some('=')) => two(self, Token::Ge),
            ('=', Some('=')) => two(self, Token::EqEq),
            ('!', Some('=')) => two(self, Token::Ne),
            ('&', Some('&')) => two(self, Token::AndAnd),
            ('|', Some('|')) => two(self, Token::OrOr),
            ('(', _) => Ok(Token::LParen),
            (')', _) => Ok(Token::RParen),
            ('{', _) => Ok(Token::LBrace),
            ('}', _) => Ok(Token::RBrace),
            ('[', _) => Ok(Token::LBracket),
            (']', _) => Ok(Token::RBracket),
            (',', _) => Ok(Token::Comma),
            (':', _) => Ok(Token::Colon),
            (';', _) => Ok(Token::Semi),
            ('=', _) => Ok(Token::Assign),
            ('+', _) => Ok(Token::Plus),
            ('-', _) => Ok(Token::Minus),
            ('*', _) => Ok(Token::Star),
            ('/', _) => Ok(Token::Slash),
            ('<', _) => Ok(Token::Lt),
            ('>', _) => Ok(Token::Gt),
            ('!', _) => Ok(Token::Bang),
            _ => Err(self.error(loc, format!("unexpected character `{c}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<Token> {
        tokenize(src).unwrap().into_iter().map(|s| s.token).collect()
    }

    #[test]
    fn numbers() {
        assert_eq!(
            kinds("1 2.5 1e-5 3.0e2 .5"),
            vec![Token::Int(1), Token::Real(2.5), Token::Real(1e-5), Token::Real(300.0), Token::Real(0.5), Token::Eof]
        );
    }

    #[test]
    fn range_is_not_a_decimal_point() {
        assert_eq!(kinds("0..n"), vec![Token::Int(0), Token::DotDot, Token::Ident("n".into()), Token::Eof]);
    }

    #[test]
    fn comments_and_positions() {
        let toks = tokenize("// hello\n  x = 1;").unwrap();
        assert_eq!(toks[0].loc, Loc::new(2, 3));
        assert_eq!((toks[0].loc.line, toks[0].loc.col), (2, 3));
        assert_eq!(toks[1].token, Token::Assign);
    }

    #[test]
    fn bad_char() {
        let err = tokenize("x = 1 # 2").unwrap_err();
        assert_eq!((err.loc.line, err.loc.col), (1, 7));
        assert!(err.message.contains('#'));
    }

    #[test]
    fn literal_rounding_is_nearest_even() {
        // 2^53 + 1 is a tie between 2^53 and 2^53 + 2
        assert_eq!(kinds("9007199254740993.0")[0], Token::Real(9007199254740992.0));
    }
}
