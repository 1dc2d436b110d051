//! LP file format: writer and a parser for the subset the writer emits
//! (linear rows, a bracketed quadratic objective, bounds, binaries).

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use super::{Group, MipModel, ObjectiveSense, Sense, VarType};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpParseError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("unsupported section {0}")]
    Unsupported(String),
}

fn num(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v}")
    }
}

fn push_term(out: &mut String, first: bool, coef: f64, body: &str) {
    let sign = if coef < 0.0 { "-" } else { "+" };
    if first {
        if coef < 0.0 {
            write!(out, "- {} {body}", num(-coef)).unwrap();
        } else {
            write!(out, "{} {body}", num(coef)).unwrap();
        }
    } else {
        write!(out, " {sign} {} {body}", num(coef.abs())).unwrap();
    }
}

pub fn write_lp(m: &MipModel) -> String {
    let mut out = String::new();
    let name = |j: usize| m.variables[j].name.as_str();
    out.push_str(match m.sense {
        ObjectiveSense::Minimize => "Minimize\n",
        ObjectiveSense::Maximize => "Maximize\n",
    });
    let mut obj = String::new();
    let mut first = true;
    for &(j, c) in &m.objective {
        push_term(&mut obj, first, c, name(j));
        first = false;
    }
    if !m.quadratic.is_empty() {
        obj.push_str(if first { "[ " } else { " + [ " });
        for (k, &(i, j, q)) in m.quadratic.iter().enumerate() {
            let body = if i == j { format!("{} ^ 2", name(i)) } else { format!("{} * {}", name(i), name(j)) };
            push_term(&mut obj, k == 0, 2.0 * q, &body);
        }
        obj.push_str(" ] / 2");
        first = false;
    }
    if m.constant != 0.0 {
        if first {
            obj.push_str(&num(m.constant));
        } else {
            write!(obj, " {} {}", if m.constant < 0.0 { "-" } else { "+" }, num(m.constant.abs())).unwrap();
        }
        first = false;
    }
    if first && !m.variables.is_empty() {
        obj = format!("0 {}", name(0));
    }
    writeln!(out, " obj: {obj}").unwrap();

    if !m.constraints.is_empty() {
        out.push_str("Subject To\n");
        for c in &m.constraints {
            let mut row = String::new();
            for (k, &(j, a)) in c.terms.iter().enumerate() {
                push_term(&mut row, k == 0, a, name(j));
            }
            if c.terms.is_empty() {
                write!(row, "0 {}", name(0)).unwrap();
            }
            let op = match c.sense {
                Sense::Le => "<=",
                Sense::Ge => ">=",
                Sense::Eq => "=",
            };
            writeln!(out, " {}: {row} {op} {}", c.name, num(c.rhs)).unwrap();
        }
    }

    let bounds: Vec<String> = m
        .variables
        .iter()
        .filter_map(|v| {
            let default = match v.var_type {
                VarType::Binary => (0.0, 1.0),
                VarType::Continuous => (0.0, f64::INFINITY),
            };
            if (v.lower, v.upper) == default {
                None
            } else if v.lower == f64::NEG_INFINITY && v.upper == f64::INFINITY {
                Some(format!(" {} free", v.name))
            } else if v.lower == v.upper {
                Some(format!(" {} = {}", v.name, num(v.lower)))
            } else {
                Some(format!(" {} <= {} <= {}", num(v.lower), v.name, num(v.upper)))
            }
        })
        .collect();
    if !bounds.is_empty() {
        out.push_str("Bounds\n");
        for b in bounds {
            out.push_str(&b);
            out.push('\n');
        }
    }
    let binaries: Vec<&str> = m.binaries().map(name).collect();
    if !binaries.is_empty() {
        out.push_str("Binaries\n");
        for chunk in binaries.chunks(8) {
            writeln!(out, " {}", chunk.join(" ")).unwrap();
        }
    }
    out.push_str("End\n");
    out
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    None,
    Objective,
    Constraints,
    Bounds,
    Binaries,
}

/// Group implied by the names the model builders use.
fn group_for(name: &str) -> Group {
    const ASSIGNMENT: [&str; 7] = ["z_", "lam_", "bm_", "ibl_", "ibr_", "cvx_", "one_"];
    if ASSIGNMENT.iter().any(|p| name.starts_with(p)) {
        Group::Assignment
    } else if name.starts_with("link") {
        Group::Linking
    } else {
        Group::Motion
    }
}

struct Parser {
    model: MipModel,
    seen_bounds: HashMap<usize, ()>,
}

impl Parser {
    fn var(&mut self, name: &str) -> usize {
        match self.model.var(name) {
            Some(j) => j,
            None => self.model.add_var(name, 0.0, f64::INFINITY, VarType::Continuous, group_for(name)),
        }
    }
}

fn parse_num(tok: &str) -> Option<f64> {
    let t = tok.to_ascii_lowercase();
    match t.as_str() {
        "inf" | "+inf" | "infinity" | "+infinity" => Some(f64::INFINITY),
        "-inf" | "-infinity" => Some(f64::NEG_INFINITY),
        _ if t.starts_with(|c: char| c.is_ascii_digit() || c == '.' || c == '-' || c == '+') => t.parse().ok(),
        _ => None,
    }
}

fn section_of(line: &str) -> Option<Section> {
    let l = line.trim().to_ascii_lowercase();
    match l.as_str() {
        "minimize" | "minimise" | "min" | "maximize" | "maximise" | "max" => Some(Section::Objective),
        "subject to" | "such that" | "st" | "s.t." => Some(Section::Constraints),
        "bounds" | "bound" => Some(Section::Bounds),
        "binaries" | "binary" | "bin" => Some(Section::Binaries),
        _ => None,
    }
}

type Linear = Vec<(String, f64)>;
type Quad = Vec<(String, String, f64)>;

/// Parses `[sign] [coef] name` terms, numeric constants and one bracketed
/// quadratic block, stopping at a comparison operator.
fn parse_expr(tokens: &[&str], pos: &mut usize, line: usize) -> Result<(Linear, Quad, f64), LpParseError> {
    let err = |msg: String| LpParseError::Syntax { line, msg };
    let mut lin = Vec::new();
    let mut quad = Vec::new();
    let mut constant = 0.0;
    let mut sign = 1.0;
    let mut coef: Option<f64> = None;
    while *pos < tokens.len() {
        let t = tokens[*pos];
        match t {
            "<=" | ">=" | "=" | "=<" | "=>" | "<" | ">" => break,
            "+" => {}
            "-" => sign = -sign,
            "[" => {
                *pos += 1;
                let mut qsign = 1.0;
                let mut qcoef: Option<f64> = None;
                loop {
                    let t = *tokens.get(*pos).ok_or_else(|| err("unterminated quadratic block".into()))?;
                    match t {
                        "]" => break,
                        "+" => {}
                        "-" => qsign = -qsign,
                        _ => {
                            if let Some(v) = parse_num(t) {
                                qcoef = Some(qcoef.unwrap_or(1.0) * v);
                            } else {
                                let c = qsign * qcoef.unwrap_or(1.0);
                                match (tokens.get(*pos + 1), tokens.get(*pos + 2)) {
                                    (Some(&"^"), Some(&"2")) => {
                                        quad.push((t.to_string(), t.to_string(), c));
                                        *pos += 2;
                                    }
                                    (Some(&"*"), Some(other)) => {
                                        quad.push((t.to_string(), other.to_string(), c));
                                        *pos += 2;
                                    }
                                    _ => return Err(err(format!("bad quadratic term at {t}"))),
                                }
                                qsign = 1.0;
                                qcoef = None;
                            }
                        }
                    }
                    *pos += 1;
                }
                let scale = if tokens.get(*pos + 1) == Some(&"/") {
                    let d = tokens.get(*pos + 2).and_then(|t| parse_num(t)).ok_or_else(|| err("bad divisor".into()))?;
                    *pos += 2;
                    d
                } else {
                    1.0
                };
                for q in &mut quad {
                    q.2 *= sign / scale;
                }
                sign = 1.0;
            }
            _ => {
                if let Some(v) = parse_num(t) {
                    if coef.is_some() {
                        // Two numbers in a row: the first was a constant.
                        constant += sign * coef.unwrap();
                        sign = 1.0;
                    }
                    coef = Some(v);
                } else {
                    lin.push((t.to_string(), sign * coef.unwrap_or(1.0)));
                    sign = 1.0;
                    coef = None;
                }
            }
        }
        *pos += 1;
        // A number followed by an operator or the end is a constant.
        if let Some(c) = coef {
            let next = tokens.get(*pos).copied();
            if matches!(next, None | Some("+") | Some("-") | Some("<=") | Some(">=") | Some("=") | Some("=<") | Some("=>") | Some("<") | Some(">")) {
                constant += sign * c;
                sign = 1.0;
                coef = None;
            }
        }
    }
    Ok((lin, quad, constant))
}

pub fn parse_lp(text: &str) -> Result<MipModel, LpParseError> {
    let mut p = Parser { model: MipModel::new(), seen_bounds: HashMap::new() };
    let mut section = Section::None;
    let mut pending: Vec<(usize, String)> = Vec::new();
    let mut binaries: Vec<String> = Vec::new();

    // Objective and constraints may span lines: collect their text first.
    let mut objective_text = String::new();
    let mut constraint_lines: Vec<(usize, String)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('\\').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if line.eq_ignore_ascii_case("end") {
            break;
        }
        if let Some(s) = section_of(line) {
            if s == Section::Objective && line.to_ascii_lowercase().starts_with("max") {
                p.model.sense = ObjectiveSense::Maximize;
            }
            section = s;
            continue;
        }
        let lower = line.to_ascii_lowercase();
        if ["general", "generals", "gen", "semi-continuous", "sos"].contains(&lower.as_str()) {
            return Err(LpParseError::Unsupported(line.to_string()));
        }
        match section {
            Section::None => {
                return Err(LpParseError::Syntax { line: line_no, msg: "content before any section".into() })
            }
            Section::Objective => {
                objective_text.push(' ');
                objective_text.push_str(line);
            }
            Section::Constraints => {
                let starts_new = line.contains(':') || constraint_lines.is_empty() || {
                    let last = &constraint_lines.last().unwrap().1;
                    has_rhs(last)
                };
                if starts_new {
                    constraint_lines.push((line_no, line.to_string()));
                } else {
                    let last = constraint_lines.last_mut().unwrap();
                    last.1.push(' ');
                    last.1.push_str(line);
                }
            }
            Section::Bounds => pending.push((line_no, line.to_string())),
            Section::Binaries => binaries.extend(line.split_whitespace().map(str::to_string)),
        }
    }

    // Objective.
    let tokens = tokenize(&objective_text);
    let mut toks: Vec<&str> = tokens.iter().map(String::as_str).collect();
    if let Some(first) = toks.first() {
        if first.ends_with(':') {
            toks.remove(0);
        }
    }
    let mut pos = 0;
    let (lin, quad, constant) = parse_expr(&toks, &mut pos, 1)?;
    for (n, c) in lin {
        let j = p.var(&n);
        p.model.objective.push((j, c));
    }
    for (a, b, q) in quad {
        let (i, j) = (p.var(&a), p.var(&b));
        p.model.quadratic.push((i, j, q));
    }
    p.model.constant = constant;

    // Constraints.
    for (k, (line_no, text)) in constraint_lines.iter().enumerate() {
        let tokens = tokenize(text);
        let mut toks: Vec<&str> = tokens.iter().map(String::as_str).collect();
        let name = if toks.first().is_some_and(|t| t.ends_with(':')) {
            toks.remove(0).trim_end_matches(':').to_string()
        } else {
            format!("R{}", k + 1)
        };
        let mut pos = 0;
        let (lin, quad, constant) = parse_expr(&toks, &mut pos, *line_no)?;
        if !quad.is_empty() {
            return Err(LpParseError::Unsupported("quadratic constraint".into()));
        }
        let sense = match toks.get(pos) {
            Some(&"<=") | Some(&"=<") | Some(&"<") => Sense::Le,
            Some(&">=") | Some(&"=>") | Some(&">") => Sense::Ge,
            Some(&"=") => Sense::Eq,
            _ => return Err(LpParseError::Syntax { line: *line_no, msg: "missing comparison".into() }),
        };
        pos += 1;
        let rhs_tokens = &toks[pos..];
        let rhs = match rhs_tokens {
            [v] => parse_num(v),
            ["-", v] => parse_num(v).map(|x| -x),
            ["+", v] => parse_num(v),
            _ => None,
        }
        .ok_or_else(|| LpParseError::Syntax { line: *line_no, msg: "bad right-hand side".into() })?;
        let terms = lin.into_iter().map(|(n, c)| (p.var(&n), c)).collect();
        p.model.add_constraint(name, terms, sense, rhs - constant, Group::Motion);
        let group = group_for(&p.model.constraints.last().unwrap().name);
        p.model.constraints.last_mut().unwrap().group = group;
    }

    // Binaries before bounds so explicit binary bounds override [0, 1].
    for b in &binaries {
        let j = p.var(b);
        let v = &mut p.model.variables[j];
        v.var_type = VarType::Binary;
        if !p.seen_bounds.contains_key(&j) {
            v.lower = 0.0;
            v.upper = 1.0;
        }
    }
    for (line_no, text) in pending {
        let tokens = tokenize(&text);
        let toks: Vec<&str> = tokens.iter().map(String::as_str).collect();
        let err = || LpParseError::Syntax { line: line_no, msg: format!("bad bound: {text}") };
        let (name, lo, hi): (&str, Option<f64>, Option<f64>) = match toks.as_slice() {
            [n, f] if f.eq_ignore_ascii_case("free") => (n, Some(f64::NEG_INFINITY), Some(f64::INFINITY)),
            [l, "<=", n, "<=", u] => (n, Some(parse_num(l).ok_or_else(err)?), Some(parse_num(u).ok_or_else(err)?)),
            [l, "<=", n] if parse_num(l).is_some() => (n, parse_num(l), None),
            [n, "<=", u] => (n, None, Some(parse_num(u).ok_or_else(err)?)),
            [n, ">=", l] => (n, Some(parse_num(l).ok_or_else(err)?), None),
            [n, "=", v] => {
                let v = parse_num(v).ok_or_else(err)?;
                (n, Some(v), Some(v))
            }
            _ => return Err(err()),
        };
        let j = p.var(name);
        p.seen_bounds.insert(j, ());
        let v = &mut p.model.variables[j];
        if let Some(l) = lo {
            v.lower = l;
        }
        if let Some(u) = hi {
            v.upper = u;
        }
    }
    Ok(p.model)
}

fn has_rhs(text: &str) -> bool {
    let toks = tokenize(text);
    toks.iter().position(|t| matches!(t.as_str(), "<=" | ">=" | "=" | "=<" | "=>" | "<" | ">")).is_some_and(|k| k + 1 < toks.len())
}

/// Whitespace split that also separates operators glued to operands.
fn tokenize(text: &str) -> Vec<String> {
    let mut spaced = String::with_capacity(text.len() + 16);
    let chars: Vec<char> = text.chars().collect();
    let mut k = 0;
    while k < chars.len() {
        let c = chars[k];
        let two: String = chars[k..(k + 2).min(chars.len())].iter().collect();
        if ["<=", ">=", "=<", "=>"].contains(&two.as_str()) {
            spaced.push_str(&format!(" {two} "));
            k += 2;
            continue;
        }
        match c {
            '<' | '>' | '=' | '[' | ']' | '^' | '*' | '/' => spaced.push_str(&format!(" {c} ")),
            '+' | '-' => {
                // Keep exponents such as 1e-7 and signed bounds intact.
                let prev = if k > 0 { chars[k - 1] } else { ' ' };
                let exponent = (prev == 'e' || prev == 'E') && k >= 2 && (chars[k - 2].is_ascii_digit() || chars[k - 2] == '.');
                if exponent {
                    spaced.push(c);
                } else {
                    spaced.push_str(&format!(" {c} "));
                }
            }
            _ => spaced.push(c),
        }
        k += 1;
    }
    // Re-attach a lone sign to a following number or inf in bound-like
    // positions is unnecessary: the expression parser handles signs, and
    // bound parsing sees "-" "inf" below.
    let raw: Vec<String> = spaced.split_whitespace().map(str::to_string).collect();
    let mut out: Vec<String> = Vec::with_capacity(raw.len());
    for t in raw {
        let glue = matches!(out.last().map(String::as_str), Some("-") | Some("+"))
            && parse_num(&t).is_some()
            && matches!(out.len().checked_sub(2).map(|i| out[i].as_str()), None | Some("<=") | Some(">=") | Some("=") | Some("=<") | Some("=>"));
        if glue {
            let sign = out.pop().unwrap();
            out.push(format!("{sign}{t}"));
        } else {
            out.push(t);
        }
    }
    out
}
