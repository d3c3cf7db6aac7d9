//! CPLEX LP text output, plus a reader for the same subset.
//!
//! The reader understands exactly what [`emit_lp`] writes and exists to check
//! the round trip; it is not a general LP-format parser.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use exactlin_core::normalize::terms;
use exactlin_core::solve::LinearProblem;
use exactlin_core::{
    Constraint, CoreError, Domain, Expr, LinearForm, Model, Relation, Sense, VarDecl,
};

const LINE_WIDTH: usize = 200;

/// Formats a number with 12 significant digits, trimming trailing zeros.
pub fn fmt_num(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{v:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let fixed = format!("{v:.decimals$}");
        trim_zeros(&fixed).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn linear(e: &Expr, location: &str) -> Result<LinearForm, CoreError> {
    if let Some(f) = LinearForm::from_expr(e) {
        return Ok(f);
    }
    for (i, t) in terms(e).into_iter().enumerate() {
        if LinearForm::from_expr(t).is_none() {
            return Err(CoreError::NotLinear(format!("{location}.term[{}]", i + 1)));
        }
    }
    Err(CoreError::NotLinear(location.to_string()))
}

struct Lines {
    out: String,
    width: usize,
}

impl Lines {
    fn push(&mut self, piece: &str) {
        if self.width + piece.len() > LINE_WIDTH {
            self.out.push_str("\n   ");
            self.width = 3;
        }
        self.out.push_str(piece);
        self.width += piece.len();
    }
}

fn write_terms(lines: &mut Lines, f: &LinearForm, order: &[String], constant: bool) {
    let mut first = true;
    let mut piece = |c: f64, name: Option<&str>, first: &mut bool| {
        let sign = if c < 0.0 { "-" } else { "+" };
        let mag = c.abs();
        let body = match name {
            Some(n) if mag == 1.0 => n.to_string(),
            Some(n) => format!("{} {n}", fmt_num(mag)),
            None => fmt_num(mag),
        };
        let text = match (*first, sign) {
            (true, "+") => format!(" {body}"),
            (true, _) => format!(" - {body}"),
            (false, s) => format!(" {s} {body}"),
        };
        *first = false;
        lines.push(&text);
    };
    for v in order {
        let c = f.coeff(v);
        if c != 0.0 {
            piece(c, Some(v), &mut first);
        }
    }
    if constant && f.constant != 0.0 {
        piece(f.constant, None, &mut first);
    }
    if first {
        match order.first() {
            Some(v) => lines.push(&format!(" 0 {v}")),
            None => lines.push(" 0"),
        }
    }
}

/// Writes a linear model in CPLEX LP format.
///
/// Variables appear in declaration order; numbers carry 12 significant digits.
pub fn emit_lp(model: &Model) -> Result<String, CoreError> {
    let model = model.normalized()?;
    let order: Vec<String> = model.vars.iter().map(|v| v.name.clone()).collect();
    let obj = linear(&model.objective, "objective")?;
    let mut rows = Vec::with_capacity(model.constraints.len());
    for c in &model.constraints {
        let lhs = linear(&c.lhs, &format!("{}.lhs", c.name))?;
        let rhs = linear(&c.rhs, &format!("{}.rhs", c.name))?;
        rows.push((c, lhs.minus(&rhs)));
    }

    let mut lines = Lines { out: String::new(), width: 0 };
    lines.out.push_str(match model.sense {
        Sense::Minimize => "Minimize\n",
        Sense::Maximize => "Maximize\n",
    });
    lines.push(" obj:");
    write_terms(&mut lines, &obj, &order, true);
    lines.out.push_str("\nSubject To\n");
    for (c, f) in &rows {
        lines.width = 0;
        lines.push(&format!(" {}:", c.name));
        write_terms(&mut lines, f, &order, false);
        lines.push(&format!(" {} {}", c.rel.symbol(), fmt_num(-f.constant + 0.0)));
        lines.out.push('\n');
    }
    let mut out = lines.out;
    out.push_str("Bounds\n");
    for v in &model.vars {
        let (l, u) = (v.lower, v.upper);
        if v.domain == Domain::Binary && l == 0.0 && u == 1.0 {
            continue;
        }
        let line = match (l.is_finite(), u.is_finite()) {
            (false, false) => format!(" {} free\n", v.name),
            _ if l == u => format!(" {} = {}\n", v.name, fmt_num(l)),
            (true, false) => format!(" {} >= {}\n", v.name, fmt_num(l)),
            _ => format!(" {} <= {} <= {}\n", fmt_num(l), v.name, fmt_num(u)),
        };
        out.push_str(&line);
    }
    for (title, domain) in [("Binary", Domain::Binary), ("General", Domain::Integer)] {
        let names: Vec<&str> =
            model.vars.iter().filter(|v| v.domain == domain).map(|v| v.name.as_str()).collect();
        if !names.is_empty() {
            let _ = writeln!(out, "{title}");
            for n in names {
                let _ = writeln!(out, " {n}");
            }
        }
    }
    out.push_str("End\n");
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Section {
    Objective,
    Constraints,
    Bounds,
    Binary,
    General,
}

fn parse_num(s: &str) -> Result<f64, String> {
    match s {
        "inf" | "+inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        _ => s.parse().map_err(|_| format!("bad number `{s}`")),
    }
}

/// Parses `[+|-] [coef] [name]` sequences into a linear form.
fn parse_terms(tokens: &[&str], form: &mut LinearForm, order: &mut Vec<String>) -> Result<(), String> {
    let mut sign = 1.0;
    let mut coef: Option<f64> = None;
    let flush = |form: &mut LinearForm, sign: f64, coef: Option<f64>| {
        if let Some(c) = coef {
            form.constant += sign * c;
        }
    };
    for tok in tokens {
        match *tok {
            "+" => {
                flush(form, sign, coef.take());
                sign = 1.0;
            }
            "-" => {
                flush(form, sign, coef.take());
                sign = -1.0;
            }
            t if t.starts_with(|c: char| c.is_ascii_digit() || c == '.') => {
                if coef.is_some() {
                    return Err(format!("two numbers in a row near `{t}`"));
                }
                coef = Some(parse_num(t)?);
            }
            name => {
                let c = sign * coef.take().unwrap_or(1.0);
                *form.coeffs.entry(name.to_string()).or_insert(0.0) += c;
                if !order.iter().any(|o| o == name) {
                    order.push(name.to_string());
                }
                sign = 1.0;
            }
        }
    }
    flush(form, sign, coef);
    Ok(())
}

/// Reads LP text produced by [`emit_lp`] back into a model.
pub fn read_lp(text: &str) -> Result<Model, String> {
    let mut sense = None;
    let mut section = None;
    let mut statements: Vec<(Section, String)> = Vec::new();
    for raw in text.lines() {
        let line = raw.split('\\').next().unwrap_or("");
        match line.trim() {
            "" => continue,
            "Minimize" => {
                sense = Some(Sense::Minimize);
                section = Some(Section::Objective);
            }
            "Maximize" => {
                sense = Some(Sense::Maximize);
                section = Some(Section::Objective);
            }
            "Subject To" => section = Some(Section::Constraints),
            "Bounds" => section = Some(Section::Bounds),
            "Binary" => section = Some(Section::Binary),
            "General" => section = Some(Section::General),
            "End" => break,
            body => {
                let s = section.ok_or_else(|| format!("text outside a section: `{body}`"))?;
                let continuation = raw.starts_with("   ") && matches!(s, Section::Objective | Section::Constraints);
                match statements.last_mut() {
                    Some((last, text)) if continuation && *last == s => {
                        text.push(' ');
                        text.push_str(body);
                    }
                    _ => statements.push((s, body.to_string())),
                }
            }
        }
    }
    let sense = sense.ok_or("missing Minimize/Maximize")?;

    let mut order = Vec::new();
    let mut objective = LinearForm::constant(0.0);
    let mut rows = Vec::new();
    let mut bounds: BTreeMap<String, (f64, f64)> = BTreeMap::new();
    let mut domains: BTreeMap<String, Domain> = BTreeMap::new();
    for (s, body) in statements {
        let toks: Vec<&str> = body.split_whitespace().collect();
        match s {
            Section::Objective => {
                let rest = toks.strip_prefix(&["obj:"]).ok_or("objective must be labelled `obj:`")?;
                parse_terms(rest, &mut objective, &mut order)?;
            }
            Section::Constraints => {
                let (name, rest) = toks.split_first().ok_or("empty constraint")?;
                let name = name.strip_suffix(':').ok_or_else(|| format!("unlabelled row `{body}`"))?;
                let at = rest
                    .iter()
                    .position(|t| matches!(*t, "<=" | ">=" | "="))
                    .ok_or_else(|| format!("row `{name}` has no relation"))?;
                let rel = match rest[at] {
                    "<=" => Relation::Le,
                    ">=" => Relation::Ge,
                    _ => Relation::Eq,
                };
                let mut lhs = LinearForm::constant(0.0);
                parse_terms(&rest[..at], &mut lhs, &mut order)?;
                let rhs = match &rest[at + 1..] {
                    [v] => parse_num(v)?,
                    [s, v] if *s == "-" => -parse_num(v)?,
                    _ => return Err(format!("row `{name}` has a malformed right-hand side")),
                };
                rows.push((name.to_string(), lhs, rel, rhs));
            }
            Section::Bounds => {
                let (name, lo, hi) = match toks.as_slice() {
                    [n, "free"] => (*n, f64::NEG_INFINITY, f64::INFINITY),
                    [n, "=", v] => (*n, parse_num(v)?, parse_num(v)?),
                    [n, ">=", v] => (*n, parse_num(v)?, f64::INFINITY),
                    [n, "<=", v] => (*n, 0.0, parse_num(v)?),
                    [l, "<=", n, "<=", u] => (*n, parse_num(l)?, parse_num(u)?),
                    _ => return Err(format!("bad bound `{body}`")),
                };
                bounds.insert(name.to_string(), (lo, hi));
                if !order.iter().any(|o| o == name) {
                    order.push(name.to_string());
                }
            }
            Section::Binary | Section::General => {
                for n in toks {
                    let d = if s == Section::Binary { Domain::Binary } else { Domain::Integer };
                    domains.insert(n.to_string(), d);
                    if !order.iter().any(|o| o == n) {
                        order.push(n.to_string());
                    }
                }
            }
        }
    }

    let mut model = Model::new(sense, objective.to_expr());
    for name in &order {
        let domain = domains.get(name).copied().unwrap_or(Domain::Continuous);
        let default = if domain == Domain::Binary { (0.0, 1.0) } else { (0.0, f64::INFINITY) };
        let (lo, hi) = bounds.get(name).copied().unwrap_or(default);
        model.vars.push(VarDecl::new(name.clone(), domain, lo, hi));
    }
    for (name, lhs, rel, rhs) in rows {
        model.constraints.push(Constraint::new(name, lhs.to_expr(), rel, Expr::Const(rhs)));
    }
    model.normalized().map_err(|e| e.to_string())
}

/// Emits `model`, reads the text back and compares the dense data.
///
/// Variable order, bounds, integrality, sense, objective and every row must
/// agree to a relative `1e-9`.
pub fn check_round_trip(model: &Model) -> Result<(), String> {
    let text = emit_lp(model).map_err(|e| e.to_string())?;
    let back = read_lp(&text)?;
    let a = LinearProblem::from_model(model).map_err(|e| e.to_string())?;
    let mut b = LinearProblem::from_model(&back).map_err(|e| e.to_string())?;
    // Variables that never appear in any row or bound line are not recoverable by name order alone.
    if a.names != b.names {
        let index: BTreeMap<&str, usize> = b.names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
        if a.names.len() != b.names.len() || a.names.iter().any(|n| !index.contains_key(n.as_str())) {
            return Err(format!("variables differ: {:?} vs {:?}", a.names, b.names));
        }
        let perm: Vec<usize> = a.names.iter().map(|n| index[n.as_str()]).collect();
        let apply = |xs: &[f64]| perm.iter().map(|&j| xs[j]).collect::<Vec<_>>();
        b.lower = apply(&b.lower);
        b.upper = apply(&b.upper);
        b.cost = apply(&b.cost);
        b.integer = perm.iter().map(|&j| b.integer[j]).collect();
        for r in &mut b.rows {
            r.coeffs = apply(&r.coeffs);
        }
        b.names = a.names.clone();
    }
    let close = |x: f64, y: f64| x == y || (x - y).abs() <= 1e-9 * (1.0 + x.abs().max(y.abs()));
    let all_close = |xs: &[f64], ys: &[f64]| xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| close(*x, *y));
    if a.sense != b.sense || !close(a.offset, b.offset) || !all_close(&a.cost, &b.cost) {
        return Err("objective differs".into());
    }
    if !all_close(&a.lower, &b.lower) || !all_close(&a.upper, &b.upper) || a.integer != b.integer {
        return Err("bounds or integrality differ".into());
    }
    if a.rows.len() != b.rows.len() {
        return Err(format!("row count {} vs {}", a.rows.len(), b.rows.len()));
    }
    for (r, s) in a.rows.iter().zip(&b.rows) {
        if r.name != s.name || r.rel != s.rel || !close(r.rhs, s.rhs) || !all_close(&r.coeffs, &s.coeffs) {
            return Err(format!("row `{}` differs", r.name));
        }
    }
    Ok(())
}
