//! LaTeX rendering: sets, parameters, variables, objective, constraints.

use std::fmt::Write;

use super::model::{fmt_num, Domain, ModelIr, ObjectiveSense, Param, ParamValues, Term};

/// Escapes text for use outside math mode.
fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' | '%' | '$' | '#' | '_' | '{' | '}' => {
                out.push('\\');
                out.push(c);
            }
            '~' => out.push_str("\\textasciitilde{}"),
            '^' => out.push_str("\\textasciicircum{}"),
            '\\' => out.push_str("\\textbackslash{}"),
            _ => out.push(c),
        }
    }
    out
}

fn symbol(s: &str) -> String {
    if s == "lb" {
        "\\mathrm{lb}".into()
    } else {
        s.to_string()
    }
}

fn var_tex(m: &ModelIr, j: usize) -> String {
    let v = &m.vars[j];
    let idx: Vec<String> = v.index.iter().map(u32::to_string).collect();
    format!("{}_{{{}}}", v.family, idx.join(","))
}

fn linear(m: &ModelIr, terms: &[Term]) -> String {
    if terms.is_empty() {
        return "0".into();
    }
    let mut out = String::new();
    for (i, t) in terms.iter().enumerate() {
        let (sign, mag) = if t.coef < 0.0 { ("-", -t.coef) } else { ("+", t.coef) };
        match (i, sign) {
            (0, "-") => out.push('-'),
            (0, _) => {}
            _ => write!(out, " {sign} ").unwrap(),
        }
        if mag != 1.0 {
            write!(out, "{} ", fmt_num(mag)).unwrap();
        }
        out.push_str(&var_tex(m, t.var));
    }
    out
}

fn letter(set: &str) -> &'static str {
    match set {
        "T" => "t",
        "S" => "s",
        "O" => "o",
        "K" => "k",
        _ => "i",
    }
}

fn index_letters(p: &Param) -> String {
    p.indices.iter().map(|s| letter(s)).collect::<Vec<_>>().join(",")
}

fn domain_tex(d: Domain) -> &'static str {
    match d {
        Domain::NonnegInteger => "\\mathbb{Z}_{\\geq 0}",
        Domain::NonnegContinuous => "\\mathbb{R}_{\\geq 0}",
        Domain::Binary => "\\{0, 1\\}",
    }
}

fn vector(v: &[f64]) -> String {
    v.iter().map(|&x| fmt_num(x)).collect::<Vec<_>>().join(", ")
}

fn matrix(rows: &[Vec<f64>]) -> String {
    let body: Vec<String> =
        rows.iter().map(|r| r.iter().map(|&x| fmt_num(x)).collect::<Vec<_>>().join(" & ")).collect();
    format!("\\begin{{pmatrix}}\n{}\n\\end{{pmatrix}}", body.join(" \\\\\n"))
}

pub fn render_latex(m: &ModelIr) -> String {
    let mut out = String::new();
    out.push_str("\\documentclass{article}\n\\usepackage{amsmath,amssymb}\n\\setcounter{MaxMatrixCols}{64}\n\\begin{document}\n\n");

    out.push_str("\\section*{Sets}\n\\begin{itemize}\n");
    for s in &m.sets {
        match &s.subset_of {
            Some(parent) => {
                writeln!(
                    out,
                    "  \\item ${} = \\{{{}\\}} \\subseteq {parent}$: {}",
                    s.symbol,
                    s.members.join(", "),
                    escape(&s.description)
                )
                .unwrap();
            }
            None if s.symbol == "O" => {
                writeln!(out, "  \\item $O = \\{{{}\\}}$: {}", s.members.join(", "), escape(&s.description)).unwrap();
            }
            None => {
                let ids: Vec<String> = (1..=s.members.len()).map(|i| i.to_string()).collect();
                writeln!(out, "  \\item ${} = \\{{{}\\}}$: {}", s.symbol, ids.join(", "), escape(&s.description))
                    .unwrap();
                if s.members.iter().any(|l| !l.is_empty()) {
                    out.push_str("  \\begin{itemize}\n");
                    for (i, label) in s.members.iter().enumerate() {
                        writeln!(out, "    \\item {}: {}", i + 1, escape(label)).unwrap();
                    }
                    out.push_str("  \\end{itemize}\n");
                }
            }
        }
    }
    out.push_str("\\end{itemize}\n\n");

    out.push_str("\\section*{Parameters}\n");
    if m.params.is_empty() {
        out.push_str("None.\n");
    }
    for p in &m.params {
        let sym = symbol(&p.symbol);
        let letters = index_letters(p);
        let domain: Vec<String> =
            p.indices.iter().zip(letters.split(',')).map(|(set, l)| format!("{l} \\in {set}")).collect();
        match &p.values {
            ParamValues::Scalar(x) => {
                writeln!(out, "${sym} = {}$: {}.\n", fmt_num(*x), escape(&p.description)).unwrap();
            }
            ParamValues::Vector(v) => {
                writeln!(
                    out,
                    "${sym}_{{{letters}}}$, ${}$: {}.\n\\[\n{sym} = ({})\n\\]\n",
                    domain.join(", "),
                    escape(&p.description),
                    vector(v)
                )
                .unwrap();
            }
            ParamValues::Matrix(rows) => {
                writeln!(
                    out,
                    "${sym}_{{{letters}}}$, ${}$: {} (rows $t$, columns $s$).\n\\[\n{sym} = {}\n\\]\n",
                    domain.join(", "),
                    escape(&p.description),
                    matrix(rows)
                )
                .unwrap();
            }
            ParamValues::Tensor3(t) => {
                writeln!(out, "${sym}_{{{letters}}}$, ${}$: {}.", domain.join(", "), escape(&p.description)).unwrap();
                let slices = t.first().map_or(0, Vec::len);
                for o in 0..slices {
                    let slice: Vec<Vec<f64>> = t.iter().map(|per_o| per_o[o].clone()).collect();
                    writeln!(out, "\\[\n{sym}_{{\\cdot,{o},\\cdot}} = {}\n\\]", matrix(&slice)).unwrap();
                }
                out.push('\n');
            }
        }
    }

    out.push_str("\\section*{Decision Variables}\n\\begin{itemize}\n");
    for f in &m.var_families {
        let letters: Vec<&str> = f.indices.iter().map(|s| letter(s)).collect();
        let domain = domain_tex(f.domain);
        let over: Vec<String> = f.indices.iter().zip(&letters).map(|(s, l)| format!("{l} \\in {s}")).collect();
        writeln!(
            out,
            "  \\item ${}_{{{}}} \\in {domain}$, ${}$: {}",
            f.symbol,
            letters.join(","),
            over.join(", "),
            escape(&f.description)
        )
        .unwrap();
    }
    out.push_str("\\end{itemize}\n\n");

    out.push_str("\\section*{Objective}\n");
    let sense = match m.objective.sense {
        ObjectiveSense::Minimize => "\\min",
        ObjectiveSense::Maximize => "\\max",
    };
    writeln!(
        out,
        "Minimise the {}.\n\\[\n{}\n\\]\n\\[\n{sense} \\; {}\n\\]\n",
        escape(&m.objective.description),
        m.objective.template,
        linear(m, &m.objective.terms)
    )
    .unwrap();

    out.push_str("\\section*{Constraints}\n");
    for c in &m.constraints {
        writeln!(
            out,
            "\\subsection*{{{}}}\n{}.\n\\[\n{}\n\\]",
            escape(&c.label),
            capitalise(&escape(&c.description)),
            c.template
        )
        .unwrap();
        out.push_str("\\begin{align*}\n");
        let rows: Vec<String> = c
            .rows
            .iter()
            .map(|r| {
                format!(
                    "{} &{} {} && \\text{{({})}}",
                    linear(m, &r.terms),
                    r.sense.latex(),
                    fmt_num(r.rhs),
                    escape(&r.name)
                )
            })
            .collect();
        out.push_str(&rows.join(" \\\\\n"));
        out.push_str("\n\\end{align*}\n\n");
    }
    out.push_str("\\subsection*{domains}\n\\begin{gather*}\n");
    let domains: Vec<String> = m
        .var_families
        .iter()
        .map(|f| {
            let letters: Vec<&str> = f.indices.iter().map(|s| letter(s)).collect();
            let over: Vec<String> = f.indices.iter().zip(&letters).map(|(s, l)| format!("{l} \\in {s}")).collect();
            format!(
                "{}_{{{}}} \\in {} \\quad \\forall {}",
                f.symbol,
                letters.join(","),
                domain_tex(f.domain),
                over.join(", ")
            )
        })
        .collect();
    out.push_str(&domains.join(" \\\\\n"));
    out.push_str("\n\\end{gather*}\n\n\\end{document}\n");
    out
}

fn capitalise(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(first) => first.to_uppercase().collect::<String>() + c.as_str(),
        None => String::new(),
    }
}
