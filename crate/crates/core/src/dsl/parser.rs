use std::collections::HashMap;

use super::ast::{BinOp, Expr, GenProgram, Kind, Statement, FUNCTIONS, INPUTS};
use super::lexer::{tokenize, Tok, Token};
use super::DslError;

/// Parses and type-checks a program.
///
/// Grammar: zero or more `name = expr` lines followed by `return expr`.
/// Names are single-assignment and must be bound before use.
pub fn parse(source: &str) -> Result<GenProgram, DslError> {
    let tokens = tokenize(source)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        env: INPUTS.iter().map(|(n, k)| (n.to_string(), *k)).collect(),
    };
    let (statements, result) = parser.program()?;

    for stmt in &statements {
        check(&stmt.expr, &mut vec![format!("statement `{}`", stmt.name)])?;
    }
    check(&result, &mut vec!["return".to_string()])?;
    if result.kind() != Kind::Vector {
        return Err(DslError::Type {
            path: "return".into(),
            expected: Kind::Vector,
            message: "the program must return a vector".into(),
        });
    }

    Ok(GenProgram {
        statements,
        result,
        source_text: source.to_string(),
    })
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    env: HashMap<String, Kind>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn next(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error_here(&self, message: impl Into<String>) -> DslError {
        let t = &self.tokens[self.pos];
        DslError::Syntax {
            line: t.line,
            col: t.col,
            message: message.into(),
        }
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), DslError> {
        if *self.peek() == want {
            self.next();
            Ok(())
        } else {
            Err(self.error_here(format!("expected {what}, found {}", self.peek().describe())))
        }
    }

    fn skip_newlines(&mut self) {
        while *self.peek() == Tok::Newline {
            self.next();
        }
    }

    fn program(&mut self) -> Result<(Vec<Statement>, Expr), DslError> {
        let mut statements = Vec::new();
        loop {
            self.skip_newlines();
            match self.peek().clone() {
                Tok::Ident(name) if name == "return" => {
                    self.next();
                    let result = self.expr()?;
                    self.skip_newlines();
                    if *self.peek() != Tok::Eof {
                        return Err(self.error_here(format!(
                            "expected end of program after `return`, found {}",
                            self.peek().describe()
                        )));
                    }
                    return Ok((statements, result));
                }
                Tok::Ident(name) => {
                    self.next();
                    if INPUTS.iter().any(|(n, _)| *n == name) {
                        return Err(DslError::Redefinition(name));
                    }
                    if FUNCTIONS.contains(&name.as_str()) {
                        return Err(DslError::ReservedName(name));
                    }
                    if self.env.contains_key(&name) {
                        return Err(DslError::Redefinition(name));
                    }
                    self.expect(Tok::Assign, "`=`")?;
                    let expr = self.expr()?;
                    if !matches!(self.peek(), Tok::Newline | Tok::Eof) {
                        return Err(self.error_here(format!(
                            "expected end of line, found {}",
                            self.peek().describe()
                        )));
                    }
                    self.env.insert(name.clone(), expr.kind());
                    statements.push(Statement { name, expr });
                }
                Tok::Eof => return Err(self.error_here("expected `return` statement")),
                other => {
                    return Err(self
                        .error_here(format!("expected a statement, found {}", other.describe())))
                }
            }
        }
    }

    fn expr(&mut self) -> Result<Expr, DslError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.next();
            let rhs = self.term()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<Expr, DslError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.next();
            let rhs = self.unary()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> Result<Expr, DslError> {
        if *self.peek() != Tok::Minus {
            return self.primary();
        }
        self.next();
        if let Tok::Number(v) = *self.peek() {
            self.next();
            return Ok(Expr::Const(-v));
        }
        let operand = self.unary()?;
        Ok(Expr::binary(BinOp::Sub, Expr::Const(0.0), operand))
    }

    fn primary(&mut self) -> Result<Expr, DslError> {
        let start = self.pos;
        let token = self.next();
        match token.tok.clone() {
            Tok::Number(v) => Ok(Expr::Const(v)),
            Tok::LParen => {
                let inner = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Tok::Ident(name) if *self.peek() == Tok::LParen => {
                self.next();
                self.call(&name, &token)
            }
            Tok::Ident(name) => {
                if FUNCTIONS.contains(&name.as_str()) {
                    return Err(DslError::Syntax {
                        line: token.line,
                        col: token.col,
                        message: format!("`{name}` is a function and must be called"),
                    });
                }
                match self.env.get(&name) {
                    Some(Kind::Vector) => Ok(Expr::VectorVar(name)),
                    Some(Kind::Scalar) => Ok(Expr::ScalarVar(name)),
                    None => Err(DslError::UnboundIdentifier(name)),
                }
            }
            other => {
                self.pos = start;
                Err(self.error_here(format!(
                    "expected an expression, found {}",
                    other.describe()
                )))
            }
        }
    }

    /// Parses call arguments after the opening parenthesis.
    fn call(&mut self, name: &str, at: &Token) -> Result<Expr, DslError> {
        let syntax = |message: String| DslError::Syntax {
            line: at.line,
            col: at.col,
            message,
        };
        match name {
            "rand" => {
                let lo = self.constant()?;
                self.expect(Tok::Comma, "`,`")?;
                let hi = self.constant()?;
                self.expect(Tok::RParen, "`)`")?;
                return Ok(Expr::RandUniform { lo, hi });
            }
            "choice" => {
                let branches = self.args(Tok::Semi)?;
                if branches.is_empty() {
                    return Err(syntax("`choice` needs at least one branch".into()));
                }
                return Ok(Expr::Choice(branches));
            }
            _ => {}
        }

        let arity = match name {
            "dot" | "max" | "min" => 2,
            "norm2" => 1,
            "randn" => 0,
            _ => return Err(syntax(format!("unknown function `{name}`"))),
        };
        let args = self.args(Tok::Comma)?;
        if args.len() != arity {
            return Err(syntax(format!(
                "`{name}` takes {arity} argument(s), got {}",
                args.len()
            )));
        }
        let mut args = args.into_iter().map(Box::new);
        let mut arg = || args.next().expect("arity checked");
        Ok(match name {
            "dot" => Expr::Dot(arg(), arg()),
            "max" => Expr::Max(arg(), arg()),
            "min" => Expr::Min(arg(), arg()),
            "norm2" => Expr::Norm2(arg()),
            _ => Expr::RandNormal,
        })
    }

    fn args(&mut self, separator: Tok) -> Result<Vec<Expr>, DslError> {
        let mut args = Vec::new();
        if *self.peek() == Tok::RParen {
            self.next();
            return Ok(args);
        }
        loop {
            args.push(self.expr()?);
            let t = self.peek().clone();
            if t == separator {
                self.next();
            } else if t == Tok::RParen {
                self.next();
                return Ok(args);
            } else {
                return Err(self.error_here(format!(
                    "expected {} or `)`, found {}",
                    separator.describe(),
                    t.describe()
                )));
            }
        }
    }

    fn constant(&mut self) -> Result<f64, DslError> {
        let negative = if *self.peek() == Tok::Minus {
            self.next();
            true
        } else {
            false
        };
        match *self.peek() {
            Tok::Number(v) => {
                self.next();
                Ok(if negative { -v } else { v })
            }
            _ => Err(self.error_here(format!(
                "`rand` bounds must be numeric literals, found {}",
                self.peek().describe()
            ))),
        }
    }
}

fn check(expr: &Expr, path: &mut Vec<String>) -> Result<(), DslError> {
    let expect = |e: &Expr, want: Kind, path: &mut Vec<String>, slot: &str| {
        path.push(slot.to_string());
        let res = check(e, path).and_then(|()| {
            if e.kind() == want {
                Ok(())
            } else {
                Err(DslError::Type {
                    path: path.join("."),
                    expected: want,
                    message: format!("found a {}", e.kind()),
                })
            }
        });
        path.pop();
        res
    };

    match expr {
        Expr::VectorVar(_)
        | Expr::ScalarVar(_)
        | Expr::Const(_)
        | Expr::RandNormal
        | Expr::RandUniform { .. } => Ok(()),
        Expr::Binary { op, lhs, rhs } => {
            path.push(format!("{}.lhs", op.name()));
            check(lhs, path)?;
            path.pop();
            if *op == BinOp::Div {
                expect(rhs, Kind::Scalar, path, "Div.rhs")
            } else {
                path.push(format!("{}.rhs", op.name()));
                check(rhs, path)?;
                path.pop();
                Ok(())
            }
        }
        Expr::Dot(a, b) => {
            expect(a, Kind::Vector, path, "dot.0")?;
            expect(b, Kind::Vector, path, "dot.1")
        }
        Expr::Norm2(a) => expect(a, Kind::Vector, path, "norm2.0"),
        Expr::Max(a, b) => {
            expect(a, Kind::Scalar, path, "max.0")?;
            expect(b, Kind::Scalar, path, "max.1")
        }
        Expr::Min(a, b) => {
            expect(a, Kind::Scalar, path, "min.0")?;
            expect(b, Kind::Scalar, path, "min.1")
        }
        Expr::Choice(branches) => {
            let want = branches[0].kind();
            for (i, b) in branches.iter().enumerate() {
                expect(b, want, path, &format!("choice.{i}"))?;
            }
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_program() {
        let p = parse("d = x0 - x1\nreturn x1 + s * d").unwrap();
        assert_eq!(p.statements().len(), 1);
        assert_eq!(
            p.statements()[0].expr,
            Expr::binary(
                BinOp::Sub,
                Expr::VectorVar("x0".into()),
                Expr::VectorVar("x1".into())
            )
        );
        assert_eq!(
            *p.result(),
            Expr::binary(
                BinOp::Add,
                Expr::VectorVar("x1".into()),
                Expr::binary(
                    BinOp::Mul,
                    Expr::ScalarVar("s".into()),
                    Expr::VectorVar("d".into())
                )
            )
        );
    }

    #[test]
    fn unbound_reference() {
        assert_eq!(
            parse("return x1 + s * (d)").unwrap_err(),
            DslError::UnboundIdentifier("d".into())
        );
        assert_eq!(
            parse("a = b\nb = x1\nreturn a").unwrap_err(),
            DslError::UnboundIdentifier("b".into())
        );
    }

    #[test]
    fn vector_denominator_is_a_type_error() {
        match parse("return x0 / x1").unwrap_err() {
            DslError::Type { path, expected, .. } => {
                assert_eq!(path, "return.Div.rhs");
                assert_eq!(expected, Kind::Scalar);
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn scalar_result_is_rejected() {
        assert!(matches!(
            parse("return norm2(x0)"),
            Err(DslError::Type {
                expected: Kind::Vector,
                ..
            })
        ));
    }

    #[test]
    fn call_argument_kinds() {
        assert!(matches!(
            parse("return x0 * dot(x0, s)"),
            Err(DslError::Type { .. })
        ));
        assert!(matches!(
            parse("return x0 * max(x0, s)"),
            Err(DslError::Type { .. })
        ));
        assert!(matches!(
            parse("return choice(x0; s)"),
            Err(DslError::Type {
                expected: Kind::Vector,
                ..
            })
        ));
        assert!(parse("return x0 * max(norm2(x0), min(s, 2))").is_ok());
    }

    #[test]
    fn single_assignment() {
        assert_eq!(
            parse("a = x0\na = x1\nreturn a").unwrap_err(),
            DslError::Redefinition("a".into())
        );
        assert_eq!(
            parse("s = 1\nreturn x0").unwrap_err(),
            DslError::Redefinition("s".into())
        );
        assert_eq!(
            parse("dot = 1\nreturn x0").unwrap_err(),
            DslError::ReservedName("dot".into())
        );
    }

    #[test]
    fn syntax_errors_carry_positions() {
        match parse("d = x0 -\nreturn d").unwrap_err() {
            DslError::Syntax { line, col, .. } => assert_eq!((line, col), (1, 9)),
            e => panic!("unexpected {e:?}"),
        }
        match parse("d = x0").unwrap_err() {
            DslError::Syntax { message, .. } => assert!(message.contains("return")),
            e => panic!("unexpected {e:?}"),
        }
        assert!(matches!(
            parse("return x0\nd = x1"),
            Err(DslError::Syntax { .. })
        ));
        assert!(matches!(
            parse("return dot(x0)"),
            Err(DslError::Syntax { .. })
        ));
        assert!(matches!(
            parse("return x0 * rand(s, 1)"),
            Err(DslError::Syntax { .. })
        ));
        assert!(matches!(
            parse("return foo(x0)"),
            Err(DslError::Syntax { .. })
        ));
    }

    #[test]
    fn unary_minus() {
        let p = parse("return -0.5 * x0 + -x1").unwrap();
        assert_eq!(
            *p.result(),
            Expr::binary(
                BinOp::Add,
                Expr::binary(BinOp::Mul, Expr::Const(-0.5), Expr::VectorVar("x0".into())),
                Expr::binary(BinOp::Sub, Expr::Const(0.0), Expr::VectorVar("x1".into())),
            )
        );
    }

    #[test]
    fn comments_and_blank_lines() {
        let p = parse("# header\n\nd = x0 - x1 # diff\n\nreturn x1 + d\n\n").unwrap();
        assert_eq!(p.statements().len(), 1);
    }
}
