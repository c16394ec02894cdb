//! Reference `generate` programs shipped with the library.

use super::ast::GenProgram;
use super::parser::parse;

/// Step toward the original along `d` and its normalized copy, plus noise
/// at two scales. `norm` guards the normalization with the noise norm.
pub const FINAL_SOURCE: &str = "\
d = x0 - x1
norm = max(norm2(d), norm2(noise))
return x1 + s * (d + d / norm) + s * (noise + s * (noise / norm))
";

/// Interpolate toward the original, jitter with scaled noise, then add,
/// subtract or multiply a second noise term picked at random.
pub const INITIAL_SOURCE: &str = "\
n0 = randn()
x = s * x0 + (1 - s) * x1 + n0 * noise
n1 = rand(0.5, 1.5)
return choice(x + n1 * noise; x - n1 * noise; x * (n1 * noise))
";

pub fn built_in_final() -> GenProgram {
    parse(FINAL_SOURCE).expect("built-in program parses")
}

pub fn built_in_initial() -> GenProgram {
    parse(INITIAL_SOURCE).expect("built-in program parses")
}

/// Resolves `final` / `initial` to a built-in program.
pub fn built_in(name: &str) -> Option<GenProgram> {
    match name {
        "final" => Some(built_in_final()),
        "initial" => Some(built_in_initial()),
        _ => None,
    }
}
