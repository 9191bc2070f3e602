//! Plain-text problem, system and solution files.
//!
//! ```text
//! MJLS <n> <N>
//! <N rows of Γ>
//! A 1
//! <n rows of n values>
//! Y 1
//! <n rows of n values>
//! ...
//! ```
//!
//! `#` starts a comment, blank lines are ignored and values are separated by
//! whitespace. System files carry `B i`, `C i` and `MU` sections instead of
//! `Y i`; solution files carry `X i` sections and no coupling rows.
//! Values are written with 17 significant digits, so reading a written file
//! reproduces every entry exactly.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::generators::MjlsSystem;
use crate::linalg::Matrix;
use crate::model::{CouplingKind, CouplingMatrix, MjlsProblem, ModeTuple, SymTuple};

const PROBLEM_TAG: &str = "MJLS";
const SOLUTION_TAG: &str = "MJLS-SOLUTION";

struct Line<'a> {
    number: usize,
    tokens: Vec<&'a str>,
}

fn lines(text: &str) -> Vec<Line<'_>> {
    text.lines()
        .enumerate()
        .filter_map(|(i, raw)| {
            let body = raw.split('#').next().unwrap_or("");
            let tokens: Vec<&str> = body.split_whitespace().collect();
            (!tokens.is_empty()).then_some(Line { number: i + 1, tokens })
        })
        .collect()
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn parse_usize(tok: &str, line: usize, what: &str) -> Result<usize> {
    tok.parse().map_err(|_| parse_err(line, format!("expected {what}, found `{tok}`")))
}

fn parse_row(line: &Line) -> Result<Vec<f64>> {
    line.tokens
        .iter()
        .map(|t| {
            let v: f64 = t.parse().map_err(|_| parse_err(line.number, format!("invalid number `{t}`")))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(parse_err(line.number, format!("non-finite value `{t}`")))
            }
        })
        .collect()
}

fn is_keyword(tok: &str) -> bool {
    matches!(tok, "A" | "Y" | "B" | "C" | "X" | "MU")
}

/// A labelled block of numeric rows.
struct Section {
    line: usize,
    rows: Vec<Vec<f64>>,
}

struct Document {
    n: usize,
    modes: usize,
    gamma: Option<(usize, Matrix)>,
    sections: BTreeMap<(String, usize), Section>,
}

fn parse_document(text: &str, tag: &str, with_gamma: bool) -> Result<Document> {
    let all = lines(text);
    let mut it = all.iter().peekable();
    let header = it.next().ok_or_else(|| parse_err(1, "empty file"))?;
    if header.tokens.len() != 3 || header.tokens[0] != tag {
        return Err(parse_err(header.number, format!("expected header `{tag} n N`")));
    }
    let n = parse_usize(header.tokens[1], header.number, "dimension n")?;
    let modes = parse_usize(header.tokens[2], header.number, "mode count N")?;
    if n == 0 || modes == 0 {
        return Err(parse_err(header.number, "n and N must be positive"));
    }

    let gamma = if with_gamma {
        let first = it.peek().map(|l| l.number).unwrap_or(header.number + 1);
        let mut g = Matrix::zeros(modes, modes);
        for i in 0..modes {
            let line = it.next().ok_or_else(|| parse_err(header.number, "missing coupling rows"))?;
            let row = parse_row(line)?;
            if row.len() != modes {
                return Err(parse_err(line.number, format!("coupling row has {} values, expected {modes}", row.len())));
            }
            for (j, v) in row.into_iter().enumerate() {
                g[(i, j)] = v;
            }
        }
        Some((first, g))
    } else {
        None
    };

    let mut sections = BTreeMap::new();
    while let Some(line) = it.next() {
        let key = line.tokens[0];
        if !is_keyword(key) {
            return Err(parse_err(line.number, format!("expected a section header, found `{key}`")));
        }
        let index = if key == "MU" {
            if line.tokens.len() != 1 {
                return Err(parse_err(line.number, "`MU` takes no index"));
            }
            0
        } else {
            if line.tokens.len() != 2 {
                return Err(parse_err(line.number, format!("expected `{key} i`")));
            }
            let i = parse_usize(line.tokens[1], line.number, "mode index")?;
            if i == 0 || i > modes {
                return Err(parse_err(line.number, format!("mode index {i} outside 1..={modes}")));
            }
            i
        };
        let mut rows = Vec::new();
        while let Some(next) = it.peek() {
            if is_keyword(next.tokens[0]) {
                break;
            }
            rows.push(parse_row(next)?);
            it.next();
        }
        let section = Section { line: line.number, rows };
        if sections.insert((key.to_string(), index), section).is_some() {
            return Err(parse_err(line.number, format!("duplicate section `{key} {index}`")));
        }
    }
    Ok(Document { n, modes, gamma, sections })
}

impl Document {
    fn matrix(&self, key: &str, i: usize, rows: Option<usize>, cols: Option<usize>) -> Result<Matrix> {
        let s = self
            .sections
            .get(&(key.to_string(), i))
            .ok_or_else(|| parse_err(0, format!("missing section `{key} {i}`")))?;
        if s.rows.is_empty() {
            return Err(parse_err(s.line, format!("section `{key} {i}` is empty")));
        }
        let r = rows.unwrap_or(s.rows.len());
        let c = cols.unwrap_or(s.rows[0].len());
        if s.rows.len() != r {
            return Err(parse_err(s.line, format!("section `{key} {i}` has {} rows, expected {r}", s.rows.len())));
        }
        for (k, row) in s.rows.iter().enumerate() {
            if row.len() != c {
                return Err(parse_err(
                    s.line + k + 1,
                    format!("row of `{key} {i}` has {} values, expected {c}", row.len()),
                ));
            }
        }
        Ok(Matrix::from_fn(r, c, |a, b| s.rows[a][b]))
    }

    fn tuple(&self, key: &str, rows: Option<usize>, cols: Option<usize>) -> Result<Vec<Matrix>> {
        (1..=self.modes).map(|i| self.matrix(key, i, rows, cols)).collect()
    }

    fn coupling(&self) -> Result<CouplingMatrix> {
        let (line, g) = self.gamma.clone().expect("document parsed with coupling rows");
        CouplingMatrix::with_kind(g.clone(), CouplingKind::RateMatrix)
            .or_else(|_| CouplingMatrix::with_kind(g, CouplingKind::General))
            .map_err(|e| parse_err(line, e.to_string()))
    }

    fn reject_unknown(&self, allowed: &[&str]) -> Result<()> {
        match self.sections.iter().find(|((k, _), _)| !allowed.contains(&k.as_str())) {
            Some(((k, i), s)) => Err(parse_err(s.line, format!("section `{k} {i}` is not allowed here"))),
            None => Ok(()),
        }
    }

    fn block_line(&self, key: &str) -> usize {
        self.sections.iter().find(|((k, _), _)| k == key).map(|(_, s)| s.line).unwrap_or(0)
    }
}

/// Parses a problem file.
pub fn parse_problem(text: &str) -> Result<MjlsProblem> {
    let doc = parse_document(text, PROBLEM_TAG, true)?;
    doc.reject_unknown(&["A", "Y"])?;
    let n = doc.n;
    let a = ModeTuple::new(doc.tuple("A", Some(n), Some(n))?).map_err(|e| parse_err(doc.block_line("A"), e.to_string()))?;
    let y = SymTuple::new(doc.tuple("Y", Some(n), Some(n))?).map_err(|e| parse_err(doc.block_line("Y"), e.to_string()))?;
    MjlsProblem::new(a, y, doc.coupling()?)
}

/// Parses a system file (`A`, `B`, `C` per mode plus `MU`).
pub fn parse_system(text: &str) -> Result<MjlsSystem> {
    let doc = parse_document(text, PROBLEM_TAG, true)?;
    doc.reject_unknown(&["A", "B", "C", "MU"])?;
    let n = doc.n;
    let a = doc.tuple("A", Some(n), Some(n))?;
    let b = doc.tuple("B", Some(n), None)?;
    let c = doc.tuple("C", None, Some(n))?;
    let line = |k: &str| doc.block_line(k);
    let wrap = |k: &'static str| move |e: Error| parse_err(line(k), e.to_string());
    let mu = doc.matrix("MU", 0, Some(1), Some(doc.modes))?;
    MjlsSystem::new(
        ModeTuple::new(a).map_err(wrap("A"))?,
        ModeTuple::new(b).map_err(wrap("B"))?,
        ModeTuple::new(c).map_err(wrap("C"))?,
        doc.coupling()?,
        mu.iter().copied().collect(),
    )
    .map_err(wrap("MU"))
}

/// Contents of a file that may hold either a problem or a system.
#[derive(Debug, Clone)]
pub enum InputFile {
    Problem(MjlsProblem),
    System(MjlsSystem),
}

/// Parses a problem or a system file, telling them apart by their sections.
pub fn parse_input(text: &str) -> Result<InputFile> {
    let is_system = lines(text).iter().any(|l| matches!(l.tokens[0], "B" | "C" | "MU"));
    if is_system {
        parse_system(text).map(InputFile::System)
    } else {
        parse_problem(text).map(InputFile::Problem)
    }
}

/// Parses a solution file (`X i` sections).
pub fn parse_solution(text: &str) -> Result<SymTuple> {
    let doc = parse_document(text, SOLUTION_TAG, false)?;
    doc.reject_unknown(&["X"])?;
    SymTuple::new(doc.tuple("X", Some(doc.n), Some(doc.n))?).map_err(|e| parse_err(doc.block_line("X"), e.to_string()))
}

fn push_row<'a>(out: &mut String, values: impl IntoIterator<Item = &'a f64>) {
    let mut first = true;
    for v in values {
        if !first {
            out.push(' ');
        }
        first = false;
        let _ = write!(out, "{v:.16e}");
    }
    out.push('\n');
}

fn push_matrix(out: &mut String, key: &str, i: usize, m: &Matrix) {
    let _ = writeln!(out, "{key} {i}");
    for r in 0..m.nrows() {
        push_row(out, m.row(r).transpose().iter());
    }
}

fn push_header(out: &mut String, tag: &str, n: usize, modes: usize, gamma: Option<&Matrix>) {
    let _ = writeln!(out, "{tag} {n} {modes}");
    if let Some(g) = gamma {
        for r in 0..g.nrows() {
            push_row(out, g.row(r).transpose().iter());
        }
    }
}

pub fn format_problem(p: &MjlsProblem) -> String {
    let mut out = String::new();
    push_header(&mut out, PROBLEM_TAG, p.dim(), p.modes(), Some(p.gamma().matrix()));
    for i in 0..p.modes() {
        push_matrix(&mut out, "A", i + 1, &p.a()[i]);
        push_matrix(&mut out, "Y", i + 1, &p.y()[i]);
    }
    out
}

pub fn format_system(sys: &MjlsSystem) -> String {
    let mut out = String::new();
    push_header(&mut out, PROBLEM_TAG, sys.dim(), sys.modes(), Some(sys.gamma().matrix()));
    for i in 0..sys.modes() {
        push_matrix(&mut out, "A", i + 1, &sys.a()[i]);
        push_matrix(&mut out, "B", i + 1, &sys.b()[i]);
        push_matrix(&mut out, "C", i + 1, &sys.c()[i]);
    }
    out.push_str("MU\n");
    push_row(&mut out, sys.mu().iter());
    out
}

pub fn format_solution(x: &SymTuple) -> String {
    let mut out = String::new();
    push_header(&mut out, SOLUTION_TAG, x.dim(), x.modes(), None);
    for (i, b) in x.blocks().iter().enumerate() {
        push_matrix(&mut out, "X", i + 1, b);
    }
    out
}

pub fn read_input(path: impl AsRef<Path>) -> Result<InputFile> {
    parse_input(&std::fs::read_to_string(path)?)
}

pub fn read_problem(path: impl AsRef<Path>) -> Result<MjlsProblem> {
    parse_problem(&std::fs::read_to_string(path)?)
}

pub fn read_system(path: impl AsRef<Path>) -> Result<MjlsSystem> {
    parse_system(&std::fs::read_to_string(path)?)
}

pub fn read_solution(path: impl AsRef<Path>) -> Result<SymTuple> {
    parse_solution(&std::fs::read_to_string(path)?)
}

pub fn write_problem(path: impl AsRef<Path>, p: &MjlsProblem) -> Result<()> {
    Ok(std::fs::write(path, format_problem(p))?)
}

pub fn write_system(path: impl AsRef<Path>, sys: &MjlsSystem) -> Result<()> {
    Ok(std::fs::write(path, format_system(sys))?)
}

pub fn write_solution(path: impl AsRef<Path>, x: &SymTuple) -> Result<()> {
    Ok(std::fs::write(path, format_solution(x))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{cart_system, known_example, CartConfig};
    use proptest::prelude::*;

    #[test]
    fn known_example_round_trip() {
        let (p, x) = known_example();
        assert_eq!(parse_problem(&format_problem(&p)).unwrap(), p);
        assert_eq!(parse_solution(&format_solution(&x)).unwrap(), x);
    }

    #[test]
    fn system_round_trip() {
        let sys = cart_system(&CartConfig::new(2)).unwrap();
        assert_eq!(parse_system(&format_system(&sys)).unwrap(), sys);
    }

    #[test]
    fn comments_and_blank_lines() {
        let text = "# scalar example\nMJLS 1 1\n-1   # gamma\n\nA 1\n-2\nY 1\n 3.5\n";
        let p = parse_problem(text).unwrap();
        assert_eq!(p.y()[0][(0, 0)], 3.5);
        assert_eq!(p.a()[0][(0, 0)], -2.0);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let bad_value = "MJLS 1 1\n-1\nA 1\n-2\nY 1\nabc\n";
        assert!(matches!(parse_problem(bad_value), Err(Error::Parse { line: 6, .. })));
        let short_row = "MJLS 2 1\n-1\nA 1\n-1 0\n0\nY 1\n1 0\n0 1\n";
        assert!(matches!(parse_problem(short_row), Err(Error::Parse { line: 5, .. })));
        let bad_gamma = "MJLS 1 1\n1\nA 1\n-2\nY 1\n1\n";
        assert!(matches!(parse_problem(bad_gamma), Err(Error::Parse { line: 2, .. })));
        let asym = "MJLS 2 1\n-1\nA 1\n-1 0\n0 -1\nY 1\n1 2\n0 1\n";
        assert!(matches!(parse_problem(asym), Err(Error::Parse { line: 6, .. })));
        assert!(matches!(parse_problem("MJLS x 1\n"), Err(Error::Parse { line: 1, .. })));
        let dup = "MJLS 1 1\n-1\nA 1\n-2\nA 1\n-2\nY 1\n1\n";
        assert!(matches!(parse_problem(dup), Err(Error::Parse { line: 5, .. })));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn random_problem_round_trips_exactly(
            n in 1usize..4,
            modes in 1usize..4,
            raw in proptest::collection::vec(-1e6f64..1e6, 64),
            tiny in proptest::collection::vec(-1e-300f64..1e-300, 8),
        ) {
            let mut vals = raw.iter().chain(tiny.iter()).cycle();
            let a: Vec<Matrix> = (0..modes).map(|_| Matrix::from_fn(n, n, |_, _| *vals.next().unwrap())).collect();
            let y: Vec<Matrix> = (0..modes).map(|_| {
                let m = Matrix::from_fn(n, n, |_, _| *vals.next().unwrap());
                (&m + m.transpose()) * 0.5
            }).collect();
            let g = Matrix::from_fn(modes, modes, |i, j| {
                let v = vals.next().unwrap().abs();
                if i == j { -v - 1e-3 } else { v }
            });
            let p = MjlsProblem::new(
                ModeTuple::new(a).unwrap(),
                SymTuple::new(y).unwrap(),
                CouplingMatrix::new(g).unwrap(),
            ).unwrap();
            prop_assert_eq!(parse_problem(&format_problem(&p)).unwrap(), p);
        }
    }
}
