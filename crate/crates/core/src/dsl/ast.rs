use std::fmt;

use serde::{Deserialize, Serialize};

/// Static kind of a DSL value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Kind {
    Scalar,
    Vector,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kind::Scalar => f.write_str("scalar"),
            Kind::Vector => f.write_str("vector"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    pub fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
        }
    }

    pub(crate) fn name(self) -> &'static str {
        match self {
            BinOp::Add => "Add",
            BinOp::Sub => "Sub",
            BinOp::Mul => "Mul",
            BinOp::Div => "Div",
        }
    }
}

/// Expression tree. Arithmetic between a vector and a scalar broadcasts
/// the scalar; vector-vector `Mul` is elementwise.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    VectorVar(String),
    ScalarVar(String),
    Const(f64),
    Binary {
        op: BinOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    Dot(Box<Expr>, Box<Expr>),
    Norm2(Box<Expr>),
    Max(Box<Expr>, Box<Expr>),
    Min(Box<Expr>, Box<Expr>),
    /// One standard-normal scalar draw.
    RandNormal,
    /// One uniform scalar draw from `[lo, hi)`.
    RandUniform {
        lo: f64,
        hi: f64,
    },
    /// Evaluates exactly one branch, picked uniformly per evaluation.
    Choice(Vec<Expr>),
}

impl Expr {
    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Self {
        Expr::Binary {
            op,
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
        }
    }

    /// Kind of the expression, assuming it type-checks.
    pub fn kind(&self) -> Kind {
        match self {
            Expr::VectorVar(_) => Kind::Vector,
            Expr::ScalarVar(_)
            | Expr::Const(_)
            | Expr::Dot(..)
            | Expr::Norm2(_)
            | Expr::Max(..)
            | Expr::Min(..)
            | Expr::RandNormal
            | Expr::RandUniform { .. } => Kind::Scalar,
            Expr::Binary { lhs, rhs, .. } => {
                if lhs.kind() == Kind::Vector || rhs.kind() == Kind::Vector {
                    Kind::Vector
                } else {
                    Kind::Scalar
                }
            }
            Expr::Choice(branches) => branches.first().map_or(Kind::Scalar, Expr::kind),
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        1 + match self {
            Expr::Binary { lhs, rhs, .. }
            | Expr::Dot(lhs, rhs)
            | Expr::Max(lhs, rhs)
            | Expr::Min(lhs, rhs) => lhs.size() + rhs.size(),
            Expr::Norm2(e) => e.size(),
            Expr::Choice(branches) => branches.iter().map(Expr::size).sum(),
            _ => 0,
        }
    }

    pub fn visit_mut(&mut self, f: &mut impl FnMut(&mut Expr)) {
        f(self);
        match self {
            Expr::Binary { lhs, rhs, .. }
            | Expr::Dot(lhs, rhs)
            | Expr::Max(lhs, rhs)
            | Expr::Min(lhs, rhs) => {
                lhs.visit_mut(f);
                rhs.visit_mut(f);
            }
            Expr::Norm2(e) => e.visit_mut(f),
            Expr::Choice(branches) => branches.iter_mut().for_each(|b| b.visit_mut(f)),
            _ => {}
        }
    }

    pub fn visit(&self, f: &mut impl FnMut(&Expr)) {
        f(self);
        match self {
            Expr::Binary { lhs, rhs, .. }
            | Expr::Dot(lhs, rhs)
            | Expr::Max(lhs, rhs)
            | Expr::Min(lhs, rhs) => {
                lhs.visit(f);
                rhs.visit(f);
            }
            Expr::Norm2(e) => e.visit(f),
            Expr::Choice(branches) => branches.iter().for_each(|b| b.visit(f)),
            _ => {}
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Statement {
    pub name: String,
    pub expr: Expr,
}

/// A parsed, type-checked `generate` program.
///
/// Equality compares the statements and result only; `source_text` is
/// whatever text the program was parsed from.
#[derive(Debug, Clone)]
pub struct GenProgram {
    pub(crate) statements: Vec<Statement>,
    pub(crate) result: Expr,
    pub(crate) source_text: String,
}

impl GenProgram {
    pub fn statements(&self) -> &[Statement] {
        &self.statements
    }

    pub fn result(&self) -> &Expr {
        &self.result
    }

    pub fn source_text(&self) -> &str {
        &self.source_text
    }

    pub fn node_count(&self) -> usize {
        self.statements.iter().map(|s| s.expr.size()).sum::<usize>() + self.result.size()
    }
}

impl PartialEq for GenProgram {
    fn eq(&self, other: &Self) -> bool {
        self.statements == other.statements && self.result == other.result
    }
}

/// The names bound by the caller on every evaluation.
pub const INPUTS: [(&str, Kind); 4] = [
    ("x0", Kind::Vector),
    ("x1", Kind::Vector),
    ("noise", Kind::Vector),
    ("s", Kind::Scalar),
];

pub(crate) const FUNCTIONS: [&str; 7] = ["dot", "norm2", "max", "min", "randn", "rand", "choice"];
