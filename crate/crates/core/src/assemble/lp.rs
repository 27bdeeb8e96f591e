//! CPLEX LP file rendering.

use std::fmt::Write;

use super::model::{fmt_num, Domain, ModelIr, ObjectiveSense, Term};

const TERMS_PER_LINE: usize = 8;

/// Maps a name onto `[A-Za-z0-9_]`, never starting with a digit.
pub fn sanitize_name(name: &str) -> String {
    let mut out: String = name.chars().map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' }).collect();
    if out.is_empty() || out.starts_with(|c: char| c.is_ascii_digit()) {
        out.insert(0, 'n');
    }
    out
}

fn write_terms(out: &mut String, m: &ModelIr, terms: &[Term]) {
    if terms.is_empty() {
        // LP readers reject an empty left-hand side.
        let first = m.vars.first().map_or("x_1", |v| v.name.as_str());
        write!(out, " 0 {first}").unwrap();
        return;
    }
    for (i, t) in terms.iter().enumerate() {
        if i > 0 && i % TERMS_PER_LINE == 0 {
            out.push_str("\n   ");
        }
        let sign = if t.coef < 0.0 { '-' } else { '+' };
        let mag = t.coef.abs();
        if i == 0 && sign == '+' {
            out.push(' ');
        } else {
            write!(out, " {sign} ").unwrap();
        }
        if mag != 1.0 {
            write!(out, "{} ", fmt_num(mag)).unwrap();
        }
        out.push_str(&m.vars[t.var].name);
    }
}

pub fn render_lp(m: &ModelIr) -> String {
    let mut out = String::new();
    out.push_str(match m.objective.sense {
        ObjectiveSense::Minimize => "Minimize\n",
        ObjectiveSense::Maximize => "Maximize\n",
    });
    out.push_str(" obj:");
    write_terms(&mut out, m, &m.objective.terms);
    out.push_str("\nSubject To\n");
    for row in m.rows() {
        write!(out, " {}:", sanitize_name(&row.name)).unwrap();
        write_terms(&mut out, m, &row.terms);
        writeln!(out, " {} {}", row.sense.symbol(), fmt_num(row.rhs)).unwrap();
    }
    out.push_str("Bounds\n");
    for v in &m.vars {
        if v.domain == Domain::Binary {
            continue;
        }
        match v.upper {
            Some(u) => writeln!(out, " {} <= {} <= {}", fmt_num(v.lower), v.name, fmt_num(u)).unwrap(),
            None => writeln!(out, " {} >= {}", v.name, fmt_num(v.lower)).unwrap(),
        }
    }
    let names = |d: Domain| -> Vec<&str> { m.vars.iter().filter(|v| v.domain == d).map(|v| v.name.as_str()).collect() };
    for (header, d) in [("Generals", Domain::NonnegInteger), ("Binaries", Domain::Binary)] {
        let list = names(d);
        if list.is_empty() {
            continue;
        }
        writeln!(out, "{header}").unwrap();
        for chunk in list.chunks(TERMS_PER_LINE) {
            writeln!(out, " {}", chunk.join(" ")).unwrap();
        }
    }
    out.push_str("End\n");
    out
}
