//! Writes a problem file, reads it back and stores the solution.

use mjls::generators::random_spd_problem;
use mjls::io::{format_solution, parse_problem, format_problem};
use mjls::{solve, Method, SolveOptions};

fn main() -> mjls::Result<()> {
    let text = format_problem(&random_spd_problem(3, 11)?);
    print!("{text}");
    let p = parse_problem(&text)?;
    let (x, _) = solve(&p, Method::Direct, &SolveOptions::default())?;
    print!("{}", format_solution(&x));
    Ok(())
}
