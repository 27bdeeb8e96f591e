//! Reader for the LP-format subset written by `render_lp`.

use std::collections::HashMap;

use thiserror::Error;

use crate::assemble::{ObjectiveSense, Sense};

use super::standard::{SfRow, StandardForm};

#[derive(Debug, Error, Clone, PartialEq)]
#[error("line {line}: {message}")]
pub struct LpParseError {
    pub line: usize,
    pub message: String,
}

fn err<T>(line: usize, message: impl Into<String>) -> Result<T, LpParseError> {
    Err(LpParseError { line, message: message.into() })
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(f64),
    Plus,
    Minus,
    Colon,
    Cmp(Sense),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    None,
    Objective,
    Constraints,
    Bounds,
    Generals,
    Binaries,
    End,
}

fn section_header(line: &str) -> Option<Section> {
    let l = line.trim().to_ascii_lowercase();
    let l = l.split_whitespace().collect::<Vec<_>>().join(" ");
    Some(match l.as_str() {
        "minimize" | "minimise" | "minimum" | "min" | "maximize" | "maximise" | "maximum" | "max" => Section::Objective,
        "subject to" | "such that" | "st" | "s.t." | "st." => Section::Constraints,
        "bounds" | "bound" => Section::Bounds,
        "generals" | "general" | "gen" | "integers" => Section::Generals,
        "binaries" | "binary" | "bin" => Section::Binaries,
        "end" => Section::End,
        _ => return None,
    })
}

fn tokenize(line: &str, no: usize) -> Result<Vec<Tok>, LpParseError> {
    let chars: Vec<char> = line.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' => i += 1,
            '+' => {
                out.push(Tok::Plus);
                i += 1;
            }
            '-' => {
                out.push(Tok::Minus);
                i += 1;
            }
            ':' => {
                out.push(Tok::Colon);
                i += 1;
            }
            '<' | '>' | '=' => {
                let next = chars.get(i + 1).copied();
                let (sense, width) = match (c, next) {
                    ('<', Some('=')) | ('=', Some('<')) => (Sense::Le, 2),
                    ('>', Some('=')) | ('=', Some('>')) => (Sense::Ge, 2),
                    ('<', _) => (Sense::Le, 1),
                    ('>', _) => (Sense::Ge, 1),
                    _ => (Sense::Eq, 1),
                };
                out.push(Tok::Cmp(sense));
                i += width;
            }
            c if c.is_ascii_digit() || c == '.' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                if i < chars.len() && matches!(chars[i], 'e' | 'E') {
                    let mut k = i + 1;
                    if k < chars.len() && matches!(chars[k], '+' | '-') {
                        k += 1;
                    }
                    if k < chars.len() && chars[k].is_ascii_digit() {
                        i = k;
                        while i < chars.len() && chars[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text: String = chars[start..i].iter().collect();
                let v = text.parse::<f64>().or_else(|_| err(no, format!("bad number `{text}`")))?;
                out.push(Tok::Num(v));
            }
            c if c.is_ascii_alphabetic() || "_!\"#$%&()/,;?@'`{}|~".contains(c) => {
                let start = i;
                while i < chars.len() && !matches!(chars[i], ' ' | '\t' | '+' | '-' | ':' | '<' | '>' | '=') {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                match word.to_ascii_lowercase().as_str() {
                    "inf" | "infinity" => out.push(Tok::Num(f64::INFINITY)),
                    _ => out.push(Tok::Ident(word)),
                }
            }
            _ => return err(no, format!("unexpected character `{c}`")),
        }
    }
    Ok(out)
}

#[derive(Default)]
struct Vars {
    index: HashMap<String, usize>,
    names: Vec<String>,
}

impl Vars {
    fn get(&mut self, name: &str) -> usize {
        if let Some(&j) = self.index.get(name) {
            return j;
        }
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), self.names.len() - 1);
        self.names.len() - 1
    }
}

/// A token stream spanning lines, for constructs that may wrap.
struct Stream {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Stream {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|(t, _)| t)
    }

    fn line(&self) -> usize {
        self.toks.get(self.pos).or_else(|| self.toks.last()).map_or(0, |(_, l)| *l)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        self.pos += 1;
        t
    }

    /// Optional `name:` label.
    fn label(&mut self) -> Option<String> {
        if let (Some(Tok::Ident(name)), Some(Tok::Colon)) = (self.peek(), self.peek_at(1)) {
            let name = name.clone();
            self.pos += 2;
            return Some(name);
        }
        None
    }

    /// Linear terms up to the next comparison or the end of the stream.
    fn linear(&mut self, vars: &mut Vars) -> Result<Vec<(usize, f64)>, LpParseError> {
        let mut terms = Vec::new();
        let mut first = true;
        while let Some(t) = self.peek() {
            if matches!(t, Tok::Cmp(_)) {
                break;
            }
            let line = self.line();
            let mut sign = 1.0;
            let mut signed = false;
            while let Some(Tok::Plus | Tok::Minus) = self.peek() {
                if self.next() == Some(Tok::Minus) {
                    sign = -sign;
                }
                signed = true;
            }
            if !first && !signed {
                return err(line, "expected `+` or `-` between terms");
            }
            let coef = match self.peek() {
                Some(Tok::Num(v)) => {
                    let v = *v;
                    self.pos += 1;
                    v
                }
                _ => 1.0,
            };
            match self.next() {
                Some(Tok::Ident(name)) => terms.push((vars.get(&name), sign * coef)),
                Some(t) => return err(line, format!("expected a variable, found {t:?}")),
                None => return err(line, "expression ends without a variable"),
            }
            first = false;
        }
        Ok(terms)
    }

    fn signed_number(&mut self) -> Result<f64, LpParseError> {
        let line = self.line();
        let mut sign = 1.0;
        while let Some(Tok::Plus | Tok::Minus) = self.peek() {
            if self.next() == Some(Tok::Minus) {
                sign = -sign;
            }
        }
        match self.next() {
            Some(Tok::Num(v)) => Ok(sign * v),
            other => err(line, format!("expected a number, found {other:?}")),
        }
    }
}

fn merge(terms: Vec<(usize, f64)>) -> Vec<(usize, f64)> {
    let mut out: Vec<(usize, f64)> = Vec::new();
    for (j, c) in terms {
        match out.iter_mut().find(|(k, _)| *k == j) {
            Some(t) => t.1 += c,
            None => out.push((j, c)),
        }
    }
    out
}

/// Parses LP text into a standard form. Columns follow first appearance.
pub fn parse_lp(text: &str) -> Result<StandardForm, LpParseError> {
    let mut section = Section::None;
    let mut sense = None;
    let mut objective_toks = Vec::new();
    let mut constraint_toks = Vec::new();
    let mut bound_lines = Vec::new();
    let mut generals = Vec::new();
    let mut binaries = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let no = i + 1;
        let line = raw.split('\\').next().unwrap_or("");
        if line.trim().is_empty() {
            continue;
        }
        if let Some(s) = section_header(line) {
            if s == Section::Objective {
                if sense.is_some() {
                    return err(no, "second objective section");
                }
                let lower = line.trim().to_ascii_lowercase();
                sense =
                    Some(if lower.starts_with("max") { ObjectiveSense::Maximize } else { ObjectiveSense::Minimize });
            }
            section = s;
            continue;
        }
        let toks = tokenize(line, no)?;
        match section {
            Section::None => return err(no, "content before the objective section"),
            Section::End => return err(no, "content after `End`"),
            Section::Objective => objective_toks.extend(toks.into_iter().map(|t| (t, no))),
            Section::Constraints => constraint_toks.extend(toks.into_iter().map(|t| (t, no))),
            Section::Bounds => bound_lines.push((toks, no)),
            Section::Generals | Section::Binaries => {
                for t in toks {
                    match t {
                        Tok::Ident(n) if section == Section::Generals => generals.push((n, no)),
                        Tok::Ident(n) => binaries.push((n, no)),
                        other => return err(no, format!("expected a variable name, found {other:?}")),
                    }
                }
            }
        }
    }
    let Some(sense) = sense else {
        return err(1, "missing `Minimize` or `Maximize` section");
    };
    if section != Section::End {
        return err(text.lines().count(), "missing `End`");
    }

    let mut vars = Vars::default();
    let mut obj = Stream { toks: objective_toks, pos: 0 };
    obj.label();
    let obj_terms = merge(obj.linear(&mut vars)?);
    if obj.peek().is_some() {
        return err(obj.line(), "unexpected comparison in the objective");
    }

    let mut rows = Vec::new();
    let mut cons = Stream { toks: constraint_toks, pos: 0 };
    while cons.peek().is_some() {
        let line = cons.line();
        let name = cons.label().unwrap_or_else(|| format!("R{}", rows.len() + 1));
        let terms = merge(cons.linear(&mut vars)?);
        let row_sense = match cons.next() {
            Some(Tok::Cmp(s)) => s,
            _ => return err(line, format!("constraint `{name}` has no comparison")),
        };
        let rhs = cons.signed_number()?;
        if !rhs.is_finite() {
            return err(line, format!("constraint `{name}` has an infinite right-hand side"));
        }
        rows.push(SfRow { name, coefs: terms, sense: row_sense, rhs });
    }

    let mut bounds: Vec<(usize, Option<f64>, Option<f64>, usize)> = Vec::new();
    for (toks, no) in bound_lines {
        let mut s = Stream { toks: toks.into_iter().map(|t| (t, no)).collect(), pos: 0 };
        let starts_with_number = matches!(s.peek(), Some(Tok::Num(_) | Tok::Plus | Tok::Minus));
        if starts_with_number {
            // l <= x [<= u]
            let l = s.signed_number()?;
            match s.next() {
                Some(Tok::Cmp(Sense::Le)) => {}
                _ => return err(no, "expected `<=` after the lower bound"),
            }
            let Some(Tok::Ident(name)) = s.next() else {
                return err(no, "expected a variable name");
            };
            let j = vars.get(&name);
            let u = match s.next() {
                None => None,
                Some(Tok::Cmp(Sense::Le)) => Some(s.signed_number()?),
                _ => return err(no, "expected `<=` before the upper bound"),
            };
            bounds.push((j, Some(l), u, no));
        } else {
            let Some(Tok::Ident(name)) = s.next() else {
                return err(no, "expected a variable name");
            };
            let j = vars.get(&name);
            match s.next() {
                Some(Tok::Ident(w)) if w.eq_ignore_ascii_case("free") => {
                    bounds.push((j, Some(f64::NEG_INFINITY), Some(f64::INFINITY), no))
                }
                Some(Tok::Cmp(Sense::Ge)) => bounds.push((j, Some(s.signed_number()?), None, no)),
                Some(Tok::Cmp(Sense::Le)) => bounds.push((j, None, Some(s.signed_number()?), no)),
                Some(Tok::Cmp(Sense::Eq)) => {
                    let v = s.signed_number()?;
                    bounds.push((j, Some(v), Some(v), no));
                }
                _ => return err(no, format!("cannot read the bound on `{name}`")),
            }
        }
        if s.peek().is_some() {
            return err(no, "trailing tokens in bound");
        }
    }
    let mut integer_cols: Vec<(usize, bool)> = generals.iter().map(|(n, _)| (vars.get(n), false)).collect();
    integer_cols.extend(binaries.iter().map(|(n, _)| (vars.get(n), true)));

    let n = vars.names.len();
    let mut objective = vec![0.0; n];
    for (j, c) in obj_terms {
        objective[j] += c;
    }
    let mut lower = vec![0.0; n];
    let mut upper = vec![f64::INFINITY; n];
    let mut integer = vec![false; n];
    for (j, binary) in integer_cols {
        integer[j] = true;
        if binary {
            upper[j] = 1.0;
        }
    }
    for (j, l, u, no) in bounds {
        if let Some(l) = l {
            lower[j] = l;
        }
        if let Some(u) = u {
            // A negative upper bound alone makes the default lower bound meaningless.
            if u < 0.0 && l.is_none() && lower[j] == 0.0 {
                lower[j] = f64::NEG_INFINITY;
            }
            upper[j] = u;
        }
        if lower[j] > upper[j] || lower[j] == f64::INFINITY || upper[j] == f64::NEG_INFINITY {
            return err(no, format!("empty bounds on `{}`", vars.names[j]));
        }
    }
    Ok(StandardForm { sense, objective, rows, lower, upper, integer, names: vars.names })
}
