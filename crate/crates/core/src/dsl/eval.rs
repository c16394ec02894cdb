use rand::Rng;
use rand_distr::StandardNormal;

use super::ast::{BinOp, Expr, GenProgram};
use super::DslError;
use crate::domain::InputVector;

/// Bindings for one evaluation of a program.
pub struct EvalContext<'a, R: Rng + ?Sized> {
    pub x0: &'a InputVector,
    pub x1: &'a InputVector,
    pub noise: &'a InputVector,
    pub s: f64,
    pub rng: &'a mut R,
}

#[derive(Debug, Clone, PartialEq)]
enum Value {
    Scalar(f64),
    Vector(Vec<f64>),
}

/// Runs the program and returns its (unclamped) result.
///
/// Random draws happen in statement order and, within an expression,
/// left to right; a `choice` draws its branch index before evaluating the
/// branch and skips the draws of the other branches. Uniform draws use
/// `lo + (hi - lo) * u` and branch selection uses `floor(u * n)`, with `u`
/// the generator's standard `f64` sample.
pub fn evaluate<R: Rng + ?Sized>(
    program: &GenProgram,
    ctx: &mut EvalContext<'_, R>,
) -> Result<InputVector, DslError> {
    let n = ctx.x0.len();
    if ctx.x1.len() != n || ctx.noise.len() != n {
        return Err(DslError::ContextShape {
            x0: ctx.x0.len(),
            x1: ctx.x1.len(),
            noise: ctx.noise.len(),
        });
    }

    let mut evaluator = Evaluator {
        ctx,
        locals: Vec::with_capacity(program.statements.len()),
    };
    for stmt in &program.statements {
        let value = evaluator.eval(&stmt.expr)?;
        evaluator.locals.push((stmt.name.as_str(), value));
    }
    match evaluator.eval(&program.result)? {
        Value::Vector(data) => Ok(InputVector::new(data, evaluator.ctx.x0.shape())
            .expect("result length follows the inputs")),
        // parse() rejects scalar results
        Value::Scalar(v) => Ok(InputVector::new(vec![v; n], evaluator.ctx.x0.shape())
            .expect("broadcast length follows the inputs")),
    }
}

struct Evaluator<'p, 'c, 'a, R: Rng + ?Sized> {
    ctx: &'c mut EvalContext<'a, R>,
    locals: Vec<(&'p str, Value)>,
}

impl<'p, R: Rng + ?Sized> Evaluator<'p, '_, '_, R> {
    fn lookup(&self, name: &str) -> Value {
        match name {
            "x0" => Value::Vector(self.ctx.x0.data().to_vec()),
            "x1" => Value::Vector(self.ctx.x1.data().to_vec()),
            "noise" => Value::Vector(self.ctx.noise.data().to_vec()),
            "s" => Value::Scalar(self.ctx.s),
            _ => self
                .locals
                .iter()
                .find(|(n, _)| *n == name)
                .map(|(_, v)| v.clone())
                .expect("parse() binds every identifier"),
        }
    }

    fn scalar(&mut self, e: &'p Expr) -> Result<f64, DslError> {
        match self.eval(e)? {
            Value::Scalar(v) => Ok(v),
            Value::Vector(_) => unreachable!("type-checked"),
        }
    }

    fn vector(&mut self, e: &'p Expr) -> Result<Vec<f64>, DslError> {
        match self.eval(e)? {
            Value::Vector(v) => Ok(v),
            Value::Scalar(_) => unreachable!("type-checked"),
        }
    }

    fn eval(&mut self, e: &'p Expr) -> Result<Value, DslError> {
        let value = match e {
            Expr::VectorVar(name) | Expr::ScalarVar(name) => self.lookup(name),
            Expr::Const(v) => Value::Scalar(*v),
            Expr::Binary { op, lhs, rhs } => {
                let a = self.eval(lhs)?;
                let b = self.eval(rhs)?;
                arith(*op, a, b)?
            }
            Expr::Dot(a, b) => {
                let a = self.vector(a)?;
                let b = self.vector(b)?;
                Value::Scalar(a.iter().zip(&b).map(|(x, y)| x * y).sum())
            }
            Expr::Norm2(a) => {
                let a = self.vector(a)?;
                Value::Scalar(a.iter().map(|x| x * x).sum::<f64>().sqrt())
            }
            Expr::Max(a, b) => {
                let a = self.scalar(a)?;
                let b = self.scalar(b)?;
                Value::Scalar(a.max(b))
            }
            Expr::Min(a, b) => {
                let a = self.scalar(a)?;
                let b = self.scalar(b)?;
                Value::Scalar(a.min(b))
            }
            Expr::RandNormal => Value::Scalar(self.ctx.rng.sample(StandardNormal)),
            Expr::RandUniform { lo, hi } => {
                let u: f64 = self.ctx.rng.gen();
                Value::Scalar(lo + (hi - lo) * u)
            }
            Expr::Choice(branches) => {
                let u: f64 = self.ctx.rng.gen();
                let idx = ((u * branches.len() as f64) as usize).min(branches.len() - 1);
                self.eval(&branches[idx])?
            }
        };
        ensure_finite(&value)?;
        Ok(value)
    }
}

fn ensure_finite(value: &Value) -> Result<(), DslError> {
    let ok = match value {
        Value::Scalar(v) => v.is_finite(),
        Value::Vector(v) => v.iter().all(|x| x.is_finite()),
    };
    if ok {
        Ok(())
    } else {
        Err(DslError::Numeric("non-finite intermediate value".into()))
    }
}

fn apply(op: BinOp, a: f64, b: f64) -> f64 {
    match op {
        BinOp::Add => a + b,
        BinOp::Sub => a - b,
        BinOp::Mul => a * b,
        BinOp::Div => a / b,
    }
}

fn arith(op: BinOp, a: Value, b: Value) -> Result<Value, DslError> {
    if op == BinOp::Div && b == Value::Scalar(0.0) {
        return Err(DslError::Numeric("division by zero".into()));
    }
    Ok(match (a, b) {
        (Value::Scalar(a), Value::Scalar(b)) => Value::Scalar(apply(op, a, b)),
        (Value::Vector(mut a), Value::Scalar(b)) => {
            a.iter_mut().for_each(|x| *x = apply(op, *x, b));
            Value::Vector(a)
        }
        (Value::Scalar(a), Value::Vector(mut b)) => {
            b.iter_mut().for_each(|y| *y = apply(op, a, *y));
            Value::Vector(b)
        }
        (Value::Vector(mut a), Value::Vector(b)) => {
            a.iter_mut()
                .zip(&b)
                .for_each(|(x, y)| *x = apply(op, *x, *y));
            Value::Vector(a)
        }
    })
}
