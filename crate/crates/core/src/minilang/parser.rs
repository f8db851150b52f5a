use thiserror::Error;

use super::ast::{BinOp, Expr, Node, Program, Stmt, StmtKind, UnOp};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at {line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Int(i64),
    Ident(String),
    Op(&'static str),
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Assign,
    Newline,
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

const OPS: [&str; 15] = [
    "<=", ">=", "==", "!=", "&&", "||", "+", "-", "*", "/", "%", "<", ">", "!", "=",
];

fn lex(source: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    for (lineno, raw) in source.lines().enumerate() {
        let line = lineno + 1;
        let text = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        };
        let chars: Vec<char> = text.chars().collect();
        let mut i = 0;
        let mut emitted = false;
        while i < chars.len() {
            let c = chars[i];
            let col = i + 1;
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            emitted = true;
            if c.is_ascii_digit() {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let lit: String = chars[start..i].iter().collect();
                let value = lit.parse::<i64>().map_err(|_| ParseError {
                    line,
                    col,
                    message: format!("integer literal `{lit}` out of range"),
                })?;
                out.push(Token { tok: Tok::Int(value), line, col });
                continue;
            }
            if c.is_ascii_alphabetic() || c == '_' {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                out.push(Token { tok: Tok::Ident(word), line, col });
                continue;
            }
            let simple = match c {
                '(' => Some(Tok::LParen),
                ')' => Some(Tok::RParen),
                '{' => Some(Tok::LBrace),
                '}' => Some(Tok::RBrace),
                ',' => Some(Tok::Comma),
                _ => None,
            };
            if let Some(tok) = simple {
                out.push(Token { tok, line, col });
                i += 1;
                continue;
            }
            let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
            let op = OPS.iter().find(|op| rest.starts_with(**op));
            match op {
                Some(&"=") => {
                    out.push(Token { tok: Tok::Assign, line, col });
                    i += 1;
                }
                Some(op) => {
                    out.push(Token { tok: Tok::Op(op), line, col });
                    i += op.len();
                }
                None => {
                    return Err(ParseError {
                        line,
                        col,
                        message: format!("unexpected character `{c}`"),
                    })
                }
            }
        }
        if emitted {
            out.push(Token { tok: Tok::Newline, line, col: chars.len() + 1 });
        }
    }
    let line = source.lines().count() + 1;
    out.push(Token { tok: Tok::Eof, line, col: 1 });
    Ok(out)
}

const KEYWORDS: [&str; 5] = ["if", "else", "while", "output", "input"];

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    next_index: usize,
    inputs: Vec<String>,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        let t = self.peek();
        Err(ParseError { line: t.line, col: t.col, message: message.into() })
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ParseError> {
        if self.peek().tok == want {
            self.bump();
            Ok(())
        } else {
            self.err(format!("expected {what}, found {}", describe(&self.peek().tok)))
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match &self.peek().tok {
            Tok::Ident(w) if !KEYWORDS.contains(&w.as_str()) => {
                let w = w.clone();
                self.bump();
                Ok(w)
            }
            other => self.err(format!("expected identifier, found {}", describe(other))),
        }
    }

    fn end_of_line(&mut self) -> Result<(), ParseError> {
        match self.peek().tok {
            Tok::Newline => {
                self.bump();
                Ok(())
            }
            Tok::Eof => Ok(()),
            ref other => self.err(format!("expected end of line, found {}", describe(other))),
        }
    }

    /// Parses statements until a closing brace (when `nested`) or end of input.
    fn block(&mut self, nested: bool) -> Result<Vec<Node>, ParseError> {
        let mut nodes = Vec::new();
        loop {
            match &self.peek().tok {
                Tok::Eof => {
                    if nested {
                        return self.err("unbalanced braces: missing `}`");
                    }
                    return Ok(nodes);
                }
                Tok::RBrace => {
                    if !nested {
                        return self.err("unbalanced braces: unexpected `}`");
                    }
                    return Ok(nodes);
                }
                Tok::Newline => {
                    self.bump();
                }
                Tok::Ident(w) if w == "input" => {
                    if nested {
                        return self.err("`input` declarations must be at top level");
                    }
                    self.bump();
                    loop {
                        let name = self.ident()?;
                        if !self.inputs.contains(&name) {
                            self.inputs.push(name);
                        }
                        if self.peek().tok == Tok::Comma {
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    self.end_of_line()?;
                }
                _ => nodes.push(self.statement()?),
            }
        }
    }

    fn take_index(&mut self) -> Stmt {
        self.next_index += 1;
        Stmt(self.next_index)
    }

    fn statement(&mut self) -> Result<Node, ParseError> {
        let word = match &self.peek().tok {
            Tok::Ident(w) => w.clone(),
            other => return self.err(format!("expected statement, found {}", describe(other))),
        };
        match word.as_str() {
            "if" => {
                self.bump();
                let index = self.take_index();
                let cond = self.expr(0)?;
                self.expect(Tok::LBrace, "`{`")?;
                self.end_of_line()?;
                let then_body = self.block(true)?;
                self.expect(Tok::RBrace, "`}`")?;
                let mut else_body = Vec::new();
                if matches!(&self.peek().tok, Tok::Ident(w) if w == "else") {
                    self.bump();
                    self.expect(Tok::LBrace, "`{`")?;
                    self.end_of_line()?;
                    else_body = self.block(true)?;
                    self.expect(Tok::RBrace, "`}`")?;
                }
                self.end_of_line()?;
                Ok(Node { index, kind: StmtKind::If { cond, then_body, else_body } })
            }
            "while" => {
                self.bump();
                let index = self.take_index();
                let cond = self.expr(0)?;
                self.expect(Tok::LBrace, "`{`")?;
                self.end_of_line()?;
                let body = self.block(true)?;
                self.expect(Tok::RBrace, "`}`")?;
                self.end_of_line()?;
                Ok(Node { index, kind: StmtKind::While { cond, body } })
            }
            "output" => {
                self.bump();
                let index = self.take_index();
                self.expect(Tok::LParen, "`(`")?;
                let var = self.ident()?;
                self.expect(Tok::RParen, "`)`")?;
                self.end_of_line()?;
                Ok(Node { index, kind: StmtKind::Output { var } })
            }
            "else" => self.err("`else` without matching `if`"),
            _ => {
                let var = self.ident()?;
                self.expect(Tok::Assign, "`=`")?;
                let index = self.take_index();
                let expr = self.expr(0)?;
                self.end_of_line()?;
                Ok(Node { index, kind: StmtKind::Assign { var, expr } })
            }
        }
    }

    fn expr(&mut self, min_prec: u8) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match &self.peek().tok {
                Tok::Op(s) => match BinOp::from_symbol(s) {
                    Some(op) => op,
                    None => break,
                },
                _ => break,
            };
            let prec = op.precedence();
            if prec < min_prec || prec == 0 {
                break;
            }
            self.bump();
            let rhs = self.expr(prec + 1)?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        match self.peek().tok.clone() {
            Tok::Op("-") => {
                self.bump();
                let inner = self.unary()?;
                Ok(match inner {
                    Expr::Int(v) => Expr::Int(v.wrapping_neg()),
                    other => Expr::Unary(UnOp::Neg, Box::new(other)),
                })
            }
            Tok::Op("!") => {
                self.bump();
                Ok(Expr::Unary(UnOp::Not, Box::new(self.unary()?)))
            }
            Tok::Int(v) => {
                self.bump();
                Ok(Expr::Int(v))
            }
            Tok::Ident(_) => Ok(Expr::Var(self.ident()?)),
            Tok::LParen => {
                self.bump();
                let e = self.expr(0)?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            other => self.err(format!("expected expression, found {}", describe(&other))),
        }
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Int(v) => format!("integer `{v}`"),
        Tok::Ident(w) => format!("`{w}`"),
        Tok::Op(o) => format!("`{o}`"),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::LBrace => "`{`".into(),
        Tok::RBrace => "`}`".into(),
        Tok::Comma => "`,`".into(),
        Tok::Assign => "`=`".into(),
        Tok::Newline => "end of line".into(),
        Tok::Eof => "end of input".into(),
    }
}

/// Parses mini-language source. Statements are numbered in source order.
pub fn parse(source: &str) -> Result<Program, ParseError> {
    let toks = lex(source)?;
    let mut p = Parser { toks, pos: 0, next_index: 0, inputs: Vec::new() };
    let body = p.block(false)?;
    Ok(Program::from_parts(p.inputs, body, p.next_index))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn straight_line_program_is_numbered() {
        let p = parse("a = 2\nb = 3\nout = a * b\n").unwrap();
        assert_eq!(p.len(), 3);
        let idx: Vec<_> = p.statements().iter().map(|n| n.index).collect();
        assert_eq!(idx, vec![Stmt(1), Stmt(2), Stmt(3)]);
    }

    #[test]
    fn nested_blocks_number_in_source_order() {
        let src = "input x\nif x > 0 {\n  y = 1\n} else {\n  y = 2\n}\nwhile y < 5 {\n  y = y + 1\n}\noutput(y)\n";
        let p = parse(src).unwrap();
        assert_eq!(p.len(), 6);
        assert_eq!(p.inputs, vec!["x".to_string()]);
        assert_eq!(p.statement(Stmt(3)).unwrap().head(), "y = 2");
        assert_eq!(p.statement(Stmt(5)).unwrap().head(), "y = y + 1");
    }

    #[test]
    fn unbalanced_braces_are_rejected() {
        let err = parse("if 1 {\n a = 1\n").unwrap_err();
        assert!(err.message.contains("unbalanced"), "{err}");
        let err = parse("a = 1\n}\n").unwrap_err();
        assert_eq!((err.line, err.col), (2, 1));
    }

    #[test]
    fn reports_line_and_column() {
        let err = parse("a = 1\nb = 2 +\n").unwrap_err();
        assert_eq!(err.line, 2);
        let err = parse("a = $\n").unwrap_err();
        assert_eq!((err.line, err.col), (1, 5));
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let p = parse("# header\n\na = 1 # trailing\n\n").unwrap();
        assert_eq!(p.len(), 1);
    }

    #[test]
    fn precedence_and_associativity() {
        let p = parse("a = 1 - 2 - 3 * 4\n").unwrap();
        assert_eq!(p.statement(Stmt(1)).unwrap().head(), "a = 1 - 2 - 3 * 4");
        let p = parse("a = 1 - (2 - 3)\n").unwrap();
        assert_eq!(p.statement(Stmt(1)).unwrap().head(), "a = 1 - (2 - 3)");
    }

    #[test]
    fn source_round_trips() {
        let src = "input x, y\na = -x + 3\nif a > 0 && y != 2 {\n    b = a % 3\n} else {\n    b = (-4)\n}\noutput(b)\n";
        let p = parse(src).unwrap();
        let again = parse(&p.to_source()).unwrap();
        assert_eq!(p, again);
    }
}
