use std::collections::{HashMap, HashSet};

use rand::Rng;

use crate::dsl::{parse, pretty_print, Expr, GenProgram, Kind, Statement, INITIAL_SOURCE, INPUTS};
use crate::evolution::{GenerationContext, GeneratorError, ProgramGenerator};
use crate::seed::{derive, rng_from};

/// Hand-written programs the mock hands out at initialization.
pub const MOCK_BANK: [&str; 12] = [
    INITIAL_SOURCE,
    "return x1 + s * (x0 - x1)",
    "d = x0 - x1\nreturn x1 + s * d + s * noise",
    "return x1 + 0.5 * s * noise",
    "d = x0 - x1\nn = norm2(d)\nreturn x1 + s * d / n + s * noise",
    "return x1 + 2 * s * (x0 - x1) - s * noise",
    "d = x0 - x1\nstep = min(s, 0.1)\nreturn x1 + step * d + 0.3 * step * noise",
    "d = x0 - x1\nproj = dot(noise, d) / max(dot(d, d), 1e-12)\nreturn x1 + s * (noise - proj * d) + 0.5 * s * d",
    "r = rand(0.9, 1.1)\nreturn r * x1 + (1 - r) * x0",
    "return choice(x1 + s * noise; x1 - s * noise; x1 + s * (x0 - x1))",
    "m = randn()\nreturn x1 + s * m * (x0 - x1) + s * noise",
    "d = x0 - x1\nnorm = max(norm2(d), 1)\nreturn x1 + 1.5 * s * d / norm + 0.5 * s * noise",
];

/// Deterministic offline generator.
///
/// - `init_program` cycles through [`MOCK_BANK`], starting at an offset
///   picked by the seed.
/// - `crossover` keeps a prefix of the first parent's statements and the
///   rest of the second's, split at a seeded index. References left
///   without a definition are rebound to `x1` (vectors) or `s` (scalars),
///   and clashing names are renamed.
/// - `mutate` scales one constant by a factor drawn from `[0.9, 1.1)`.
///
/// Everything depends only on the seed and the call's context.
#[derive(Debug, Clone)]
pub struct MockGenerator {
    seed: u64,
}

impl MockGenerator {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    fn rng(&self, ctx: &GenerationContext, salt: u64) -> crate::seed::SeededRng {
        rng_from(derive(&[self.seed, ctx.seed, salt]))
    }
}

impl ProgramGenerator for MockGenerator {
    fn init_program(&mut self, ctx: &GenerationContext) -> Result<String, GeneratorError> {
        let offset = (self.seed % MOCK_BANK.len() as u64) as usize;
        let idx = (offset + ctx.slot + ctx.attempt as usize) % MOCK_BANK.len();
        Ok(MOCK_BANK[idx].to_string())
    }

    fn crossover(
        &mut self,
        parent_a: &str,
        parent_b: &str,
        ctx: &GenerationContext,
    ) -> Result<String, GeneratorError> {
        let (a, b) = match (parse(parent_a), parse(parent_b)) {
            (Ok(a), Ok(b)) => (a, b),
            (Ok(_), Err(_)) => return Ok(parent_a.to_string()),
            (Err(_), _) => return Ok(parent_b.to_string()),
        };
        let max_split = a.statements.len().min(b.statements.len());
        let split = self.rng(ctx, 1).gen_range(0..=max_split);
        Ok(pretty_print(&splice(&a, &b, split)))
    }

    fn mutate(&mut self, parent: &str, ctx: &GenerationContext) -> Result<String, GeneratorError> {
        let Ok(mut program) = parse(parent) else {
            return Ok(parent.to_string());
        };
        let mut count = 0;
        for_each_expr(&mut program, |e| {
            e.visit_mut(&mut |node| {
                if matches!(node, Expr::Const(_)) {
                    count += 1;
                }
            })
        });
        if count > 0 {
            let mut rng = self.rng(ctx, 2);
            let target = rng.gen_range(0..count);
            let factor = 0.9 + 0.2 * rng.gen::<f64>();
            let mut seen = 0;
            for_each_expr(&mut program, |e| {
                e.visit_mut(&mut |node| {
                    if let Expr::Const(v) = node {
                        if seen == target {
                            *v *= factor;
                        }
                        seen += 1;
                    }
                })
            });
        }
        Ok(pretty_print(&program))
    }
}

fn for_each_expr(program: &mut GenProgram, mut f: impl FnMut(&mut Expr)) {
    for stmt in &mut program.statements {
        f(&mut stmt.expr);
    }
    f(&mut program.result);
}

/// `a`'s first `split` statements, then `b`'s remaining statements and
/// result, with references repaired.
fn splice(a: &GenProgram, b: &GenProgram, split: usize) -> GenProgram {
    let mut statements: Vec<Statement> = a.statements[..split].to_vec();
    let mut bound: HashMap<String, Kind> = statements
        .iter()
        .map(|s| (s.name.clone(), s.expr.kind()))
        .collect();
    let b_names: HashSet<&str> = b.statements.iter().map(|s| s.name.as_str()).collect();
    let mut renamed: HashMap<String, String> = HashMap::new();

    for stmt in &b.statements[split..] {
        let mut expr = stmt.expr.clone();
        repair(&mut expr, &renamed, &bound);
        let mut name = stmt.name.clone();
        let mut i = 1;
        while bound.contains_key(&name) || (name != stmt.name && b_names.contains(name.as_str())) {
            name = format!("{}_{i}", stmt.name);
            i += 1;
        }
        bound.insert(name.clone(), expr.kind());
        renamed.insert(stmt.name.clone(), name.clone());
        statements.push(Statement { name, expr });
    }
    let mut result = b.result.clone();
    repair(&mut result, &renamed, &bound);

    let mut program = GenProgram {
        statements,
        result,
        source_text: String::new(),
    };
    program.source_text = pretty_print(&program);
    program
}

fn repair(expr: &mut Expr, renamed: &HashMap<String, String>, bound: &HashMap<String, Kind>) {
    expr.visit_mut(&mut |node| {
        let (name, kind) = match node {
            Expr::VectorVar(n) => (n, Kind::Vector),
            Expr::ScalarVar(n) => (n, Kind::Scalar),
            _ => return,
        };
        if INPUTS.iter().any(|(input, _)| input == name) {
            return;
        }
        if let Some(new) = renamed.get(name.as_str()) {
            *name = new.clone();
        } else if bound.get(name.as_str()) != Some(&kind) {
            *node = match kind {
                Kind::Vector => Expr::VectorVar("x1".into()),
                Kind::Scalar => Expr::ScalarVar("s".into()),
            };
        }
    });
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(seed: u64) -> GenerationContext {
        GenerationContext {
            generation: 1,
            slot: 0,
            attempt: 0,
            seed,
            fitness_a: None,
            fitness_b: None,
        }
    }

    #[test]
    fn bank_programs_parse() {
        for src in MOCK_BANK {
            parse(src).unwrap_or_else(|e| panic!("{src}: {e}"));
        }
    }

    #[test]
    fn self_crossover_is_identity() {
        let mut g = MockGenerator::new(4);
        for src in MOCK_BANK {
            for seed in 0..8 {
                let child = g.crossover(src, src, &ctx(seed)).unwrap();
                assert_eq!(parse(&child).unwrap(), parse(src).unwrap());
            }
        }
    }

    #[test]
    fn crossover_repairs_dangling_references() {
        let a = "u = x0 * 2\nreturn u";
        let b = "d = norm2(x0)\ne = x1 * d\nreturn e + x0";
        let child = splice(&parse(a).unwrap(), &parse(b).unwrap(), 1);
        // `d` was defined in b's dropped prefix and is a scalar
        assert_eq!(
            pretty_print(&child),
            "u = (x0 * 2.0)\ne = (x1 * s)\nreturn (e + x0)\n"
        );
    }

    #[test]
    fn crossover_renames_clashes() {
        let a = "d = x0 - x1\nreturn d";
        let b = "t = s\nd = x1 * t\nreturn d";
        let child = splice(&parse(a).unwrap(), &parse(b).unwrap(), 1);
        assert_eq!(
            pretty_print(&child),
            "d = (x0 - x1)\nd_1 = (x1 * s)\nreturn d_1\n"
        );
    }

    #[test]
    fn crossover_and_mutation_always_parse() {
        let mut g = MockGenerator::new(9);
        for (i, a) in MOCK_BANK.iter().enumerate() {
            for (j, b) in MOCK_BANK.iter().enumerate() {
                let c = ctx((i * 12 + j) as u64);
                let child = g.crossover(a, b, &c).unwrap();
                parse(&child).unwrap_or_else(|e| panic!("{child}: {e}"));
                let mutated = g.mutate(&child, &c).unwrap();
                parse(&mutated).unwrap_or_else(|e| panic!("{mutated}: {e}"));
            }
        }
    }

    #[test]
    fn mutation_scales_one_constant() {
        let mut g = MockGenerator::new(1);
        let out = parse(&g.mutate("return x1 * 2 + 3 * x0", &ctx(5)).unwrap()).unwrap();
        let mut consts = Vec::new();
        out.result().visit(&mut |e| {
            if let Expr::Const(v) = e {
                consts.push(*v)
            }
        });
        let changed: Vec<_> = consts
            .iter()
            .zip([2.0, 3.0])
            .filter(|(a, b)| **a != *b)
            .collect();
        assert_eq!(changed.len(), 1);
        let (new, old) = changed[0];
        assert!(*new >= 0.9 * old && *new < 1.1 * old);
    }

    #[test]
    fn same_seed_same_sequence() {
        let run = |seed| {
            let mut g = MockGenerator::new(seed);
            (0..5u64)
                .map(|i| {
                    let c = ctx(i);
                    let x = g
                        .crossover(MOCK_BANK[i as usize], MOCK_BANK[7], &c)
                        .unwrap();
                    g.mutate(&x, &c).unwrap()
                })
                .collect::<Vec<_>>()
        };
        assert_eq!(run(3), run(3));
    }
}
