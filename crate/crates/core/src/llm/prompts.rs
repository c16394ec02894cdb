use std::fmt;

use super::LlmError;

/// Reference for the program language, appended to every prompt.
pub const GRAMMAR_REFERENCE: &str = "\
## Program language

A program is a list of single-assignment statements followed by one
`return` line. Write one statement per line.

    name = expression
    return expression

Inputs: `x0` (vector), `x1` (vector), `noise` (vector), `s` (scalar).
Every other name must be assigned before it is used and cannot be
reassigned. The program must return a vector of the same size as `x0`.

Expressions:
- numbers such as `2`, `0.5`, `1e-3`, and unary minus
- `+ - * /`: scalars broadcast over vectors, vector * vector is
  elementwise, and the right side of `/` must be a scalar
- `dot(v, w)` is a scalar, `norm2(v)` is the L2 norm of a vector
- `max(a, b)` and `min(a, b)` on scalars
- `randn()` draws a standard normal scalar, `rand(lo, hi)` a uniform
  scalar between two numeric literals
- `choice(e1; e2; ...)` evaluates one branch picked uniformly at random
- `#` starts a comment

Example:

```gen
d = x0 - x1
norm = max(norm2(d), norm2(noise))
return x1 + s * (d + d / norm) + s * (noise + s * (noise / norm))
```

Reply with exactly one fenced ```gen code block containing the program
and nothing else.
";

const INITIALIZATION: &str = "\
Given an image x0, its adversarial image x1, and a random normal noise \
noise, you need to design an algorithm to combine them to search for a new \
adversarial example x_new. s ranges from 0.5 to 1.5. It gets larger when \
this algorithm outputs more adversarial examples, and vice versa. It can \
be used to control the step size of the search. Operations you may use \
include: adding, subtracting, multiplying, dividing, dot product, and l2 \
norm computation. Design a novel algorithm with various search \
techniques. Your program is run without further assistance, so it must \
follow the language below exactly.

{grammar_reference}";

const CROSSOVER: &str = "\
Combine the two programs below into one improved program. Each program \
maps an image x0, its adversarial image x1, a random normal noise noise \
and a step scalar s to a new candidate adversarial example. Lower \
fitness (the mean L2 distance reached) is better. Keep the ideas that \
make the stronger program work and borrow what helps from the other.

Program A (fitness {fitness_a}):

```gen
{parent_a}
```

Program B (fitness {fitness_b}):

```gen
{parent_b}
```

{grammar_reference}";

const MUTATION: &str = "\
Make a small modification to the program below so that it finds closer \
adversarial examples. The program maps an image x0, its adversarial \
image x1, a random normal noise noise and a step scalar s to a new \
candidate adversarial example. Lower fitness (the mean L2 distance \
reached) is better. Change a constant, a term or one statement; keep \
the rest.

Program (fitness {fitness_a}):

```gen
{parent_a}
```

{grammar_reference}";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PromptRole {
    Initialization,
    Crossover,
    Mutation,
}

impl PromptRole {
    /// Placeholders a template for this role must contain.
    pub fn placeholders(self) -> &'static [&'static str] {
        match self {
            PromptRole::Initialization => &["{grammar_reference}"],
            PromptRole::Crossover => &[
                "{parent_a}",
                "{parent_b}",
                "{fitness_a}",
                "{fitness_b}",
                "{grammar_reference}",
            ],
            PromptRole::Mutation => &["{parent_a}", "{fitness_a}", "{grammar_reference}"],
        }
    }
}

impl fmt::Display for PromptRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PromptRole::Initialization => "initialization",
            PromptRole::Crossover => "crossover",
            PromptRole::Mutation => "mutation",
        })
    }
}

/// Values substituted into a template.
#[derive(Debug, Clone, Default)]
pub struct PromptValues<'a> {
    pub parent_a: &'a str,
    pub parent_b: &'a str,
    pub fitness_a: Option<f64>,
    pub fitness_b: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PromptTemplate {
    role: PromptRole,
    text: String,
}

impl PromptTemplate {
    pub fn new(role: PromptRole, text: impl Into<String>) -> Result<Self, LlmError> {
        let text = text.into();
        if let Some(missing) = role.placeholders().iter().find(|p| !text.contains(*p)) {
            return Err(LlmError::Template(format!(
                "{role} template lacks {missing}"
            )));
        }
        Ok(Self { role, text })
    }

    pub fn initialization() -> Self {
        Self::new(PromptRole::Initialization, INITIALIZATION).expect("built-in template")
    }

    pub fn crossover() -> Self {
        Self::new(PromptRole::Crossover, CROSSOVER).expect("built-in template")
    }

    pub fn mutation() -> Self {
        Self::new(PromptRole::Mutation, MUTATION).expect("built-in template")
    }

    pub fn role(&self) -> PromptRole {
        self.role
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    /// Substitutes every placeholder. The grammar reference goes in last
    /// so program text can never inject one.
    pub fn render(&self, values: &PromptValues<'_>) -> String {
        let fitness =
            |v: Option<f64>| v.map_or_else(|| "unknown".to_string(), |v| format!("{v:.6}"));
        self.text
            .replace("{fitness_a}", &fitness(values.fitness_a))
            .replace("{fitness_b}", &fitness(values.fitness_b))
            .replace("{parent_a}", values.parent_a.trim_end())
            .replace("{parent_b}", values.parent_b.trim_end())
            .replacen("{grammar_reference}", GRAMMAR_REFERENCE, 1)
    }
}

pub fn render_initialization_prompt() -> String {
    PromptTemplate::initialization().render(&PromptValues::default())
}
