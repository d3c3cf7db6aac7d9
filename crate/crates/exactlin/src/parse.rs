//! Reader for the `.nlm` text model format.
//!
//! ```text
//! # comment
//! param cap = 7
//! var b binary
//! var x continuous [0, 10]
//! maximize: 3*b + 2*x - abs(x - 4)
//! s.t. budget: 2*b + x <= cap
//! ```
//!
//! Statements start with `var`, `param`, `minimize:`/`maximize:` or `s.t.`;
//! line breaks are ordinary whitespace. Identifiers may be used before they
//! are declared.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use exactlin_core::{Constraint, Domain, Expr, Model, MonoFn, Relation, Sense, VarDecl};

/// Maximum nesting of parentheses, calls and unary operators.
pub const MAX_DEPTH: usize = 200;

const KEYWORDS: &[&str] = &[
    "var", "param", "binary", "integer", "continuous", "minimize", "maximize", "inf", "abs", "min",
    "max", "exp", "log", "sqrt",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseDiagnostic {
    pub line: usize,
    pub column: usize,
    pub message: String,
    pub severity: Severity,
}

impl ParseDiagnostic {
    fn error(pos: Pos, message: impl Into<String>) -> Self {
        ParseDiagnostic { line: pos.line, column: pos.column, message: message.into(), severity: Severity::Error }
    }

    fn warning(pos: Pos, message: impl Into<String>) -> Self {
        ParseDiagnostic { line: pos.line, column: pos.column, message: message.into(), severity: Severity::Warning }
    }
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{}:{}: {sev}: {}", self.line, self.column, self.message)
    }
}

/// A successfully parsed model with normalized expressions.
#[derive(Debug, Clone)]
pub struct Parsed {
    pub model: Model,
    pub warnings: Vec<ParseDiagnostic>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Pos {
    line: usize,
    column: usize,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(f64),
    Plus,
    Minus,
    Star,
    Slash,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Colon,
    Eq,
    Le,
    Ge,
    SuchThat,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Num(n) => write!(f, "number {n}"),
            Tok::Plus => f.write_str("`+`"),
            Tok::Minus => f.write_str("`-`"),
            Tok::Star => f.write_str("`*`"),
            Tok::Slash => f.write_str("`/`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::LBracket => f.write_str("`[`"),
            Tok::RBracket => f.write_str("`]`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::Eq => f.write_str("`=`"),
            Tok::Le => f.write_str("`<=`"),
            Tok::Ge => f.write_str("`>=`"),
            Tok::SuchThat => f.write_str("`s.t.`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, Pos)>, ParseDiagnostic> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, column: col };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                i += 1;
                col += 1;
            }
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            's' if chars[i..].starts_with(&['s', '.', 't', '.']) => {
                i += 4;
                col += 4;
                out.push((Tok::SuchThat, pos));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                col += i - start;
                out.push((Tok::Ident(chars[start..i].iter().collect()), pos));
            }
            c if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        while j < chars.len() && chars[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let s: String = chars[start..i].iter().collect();
                col += i - start;
                match s.parse::<f64>() {
                    Ok(v) if v.is_finite() => out.push((Tok::Num(v), pos)),
                    Ok(_) => return Err(ParseDiagnostic::error(pos, format!("number `{s}` out of range"))),
                    Err(_) => return Err(ParseDiagnostic::error(pos, format!("malformed number `{s}`"))),
                }
            }
            '<' | '>' => {
                if chars.get(i + 1) != Some(&'=') {
                    return Err(ParseDiagnostic::error(pos, format!("expected `{c}=`")));
                }
                i += 2;
                col += 2;
                out.push((if c == '<' { Tok::Le } else { Tok::Ge }, pos));
            }
            _ => {
                let tok = match c {
                    '+' => Tok::Plus,
                    '-' => Tok::Minus,
                    '*' => Tok::Star,
                    '/' => Tok::Slash,
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    '[' => Tok::LBracket,
                    ']' => Tok::RBracket,
                    ',' => Tok::Comma,
                    ':' => Tok::Colon,
                    '=' => Tok::Eq,
                    _ => return Err(ParseDiagnostic::error(pos, format!("unexpected character {c:?}"))),
                };
                i += 1;
                col += 1;
                out.push((tok, pos));
            }
        }
    }
    out.push((Tok::Eof, Pos { line, column: col }));
    Ok(out)
}

struct VarStmt {
    decl: VarDecl,
    pos: Pos,
}

struct ParamStmt {
    name: String,
    value: f64,
    pos: Pos,
}

struct ExprStmt {
    expr: Expr,
    pos: Pos,
}

struct ConStmt {
    name: String,
    lhs: Expr,
    rel: Relation,
    rhs: Expr,
    pos: Pos,
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
    depth: usize,
    vars: Vec<VarStmt>,
    params: Vec<ParamStmt>,
    objectives: Vec<(Sense, ExprStmt)>,
    constraints: Vec<ConStmt>,
    /// Every identifier used inside an expression.
    uses: Vec<(String, Pos)>,
}

type PResult<T> = Result<T, ParseDiagnostic>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> PResult<Pos> {
        let (t, p) = self.bump();
        if t == want {
            Ok(p)
        } else {
            Err(ParseDiagnostic::error(p, format!("expected {want}, found {t}")))
        }
    }

    fn name(&mut self, what: &str) -> PResult<(String, Pos)> {
        match self.bump() {
            (Tok::Ident(s), p) if KEYWORDS.contains(&s.as_str()) => {
                Err(ParseDiagnostic::error(p, format!("`{s}` is reserved and cannot name a {what}")))
            }
            (Tok::Ident(s), p) => Ok((s, p)),
            (t, p) => Err(ParseDiagnostic::error(p, format!("expected {what} name, found {t}"))),
        }
    }

    fn statements(&mut self) -> PResult<()> {
        loop {
            let (tok, pos) = self.bump();
            match tok {
                Tok::Eof => return Ok(()),
                Tok::Ident(kw) if kw == "var" => self.var_stmt(pos)?,
                Tok::Ident(kw) if kw == "param" => self.param_stmt(pos)?,
                Tok::Ident(kw) if kw == "minimize" || kw == "maximize" => {
                    let sense = if kw == "minimize" { Sense::Minimize } else { Sense::Maximize };
                    self.expect(Tok::Colon)?;
                    let expr = self.expr()?;
                    self.objectives.push((sense, ExprStmt { expr, pos }));
                }
                Tok::SuchThat => {
                    let (name, _) = self.name("constraint")?;
                    self.expect(Tok::Colon)?;
                    let lhs = self.expr()?;
                    let rel = match self.bump() {
                        (Tok::Le, _) => Relation::Le,
                        (Tok::Ge, _) => Relation::Ge,
                        (Tok::Eq, _) => Relation::Eq,
                        (t, p) => {
                            return Err(ParseDiagnostic::error(
                                p,
                                format!("expected `<=`, `>=` or `=`, found {t}"),
                            ))
                        }
                    };
                    let rhs = self.expr()?;
                    self.constraints.push(ConStmt { name, lhs, rel, rhs, pos });
                }
                t => {
                    return Err(ParseDiagnostic::error(
                        pos,
                        format!("expected `var`, `param`, `minimize:`, `maximize:` or `s.t.`, found {t}"),
                    ))
                }
            }
        }
    }

    fn var_stmt(&mut self, pos: Pos) -> PResult<()> {
        let (name, _) = self.name("variable")?;
        let domain = match self.bump() {
            (Tok::Ident(d), _) if d == "binary" => Domain::Binary,
            (Tok::Ident(d), _) if d == "integer" => Domain::Integer,
            (Tok::Ident(d), _) if d == "continuous" => Domain::Continuous,
            (t, p) => {
                return Err(ParseDiagnostic::error(
                    p,
                    format!("expected `binary`, `integer` or `continuous`, found {t}"),
                ))
            }
        };
        let (mut lo, mut hi) = match domain {
            Domain::Binary => (0.0, 1.0),
            _ => (0.0, f64::INFINITY),
        };
        if *self.peek() == Tok::LBracket {
            let bpos = self.pos();
            self.bump();
            lo = self.bound()?;
            self.expect(Tok::Comma)?;
            hi = self.bound()?;
            self.expect(Tok::RBracket)?;
            if lo > hi {
                return Err(ParseDiagnostic::error(bpos, format!("empty bounds [{lo}, {hi}] on `{name}`")));
            }
            if domain == Domain::Binary && (lo < 0.0 || hi > 1.0) {
                return Err(ParseDiagnostic::error(
                    bpos,
                    format!("binary variable `{name}` has bounds outside [0,1]"),
                ));
            }
        }
        self.vars.push(VarStmt { decl: VarDecl::new(name, domain, lo, hi), pos });
        Ok(())
    }

    fn signed_number(&mut self) -> PResult<f64> {
        let mut sign = 1.0;
        loop {
            match self.peek() {
                Tok::Minus => sign = -sign,
                Tok::Plus => {}
                _ => break,
            }
            self.bump();
        }
        match self.bump() {
            (Tok::Num(v), _) => Ok(sign * v),
            (Tok::Ident(s), _) if s == "inf" => Ok(sign * f64::INFINITY),
            (t, p) => Err(ParseDiagnostic::error(p, format!("expected a number, found {t}"))),
        }
    }

    fn bound(&mut self) -> PResult<f64> {
        self.signed_number()
    }

    fn param_stmt(&mut self, pos: Pos) -> PResult<()> {
        let (name, _) = self.name("parameter")?;
        self.expect(Tok::Eq)?;
        let vpos = self.pos();
        let value = self.signed_number()?;
        if !value.is_finite() {
            return Err(ParseDiagnostic::error(vpos, format!("parameter `{name}` must be finite")));
        }
        self.params.push(ParamStmt { name, value, pos });
        Ok(())
    }

    fn enter(&mut self) -> PResult<()> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(ParseDiagnostic::error(self.pos(), "expression nested too deeply"));
        }
        Ok(())
    }

    fn expr(&mut self) -> PResult<Expr> {
        let mut terms = vec![self.term()?];
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    terms.push(self.term()?);
                }
                Tok::Minus => {
                    self.bump();
                    terms.push(Expr::Neg(Box::new(self.term()?)));
                }
                _ => break,
            }
        }
        Ok(if terms.len() == 1 { terms.pop().unwrap() } else { Expr::Sum(terms) })
    }

    fn term(&mut self) -> PResult<Expr> {
        let mut num = vec![self.unary()?];
        let mut den = Vec::new();
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    num.push(self.unary()?);
                }
                Tok::Slash => {
                    self.bump();
                    den.push(self.unary()?);
                }
                _ => break,
            }
        }
        let product = |mut xs: Vec<Expr>| if xs.len() == 1 { xs.pop().unwrap() } else { Expr::Prod(xs) };
        let num = product(num);
        Ok(if den.is_empty() { num } else { Expr::Quot(Box::new(num), Box::new(product(den))) })
    }

    fn unary(&mut self) -> PResult<Expr> {
        match self.peek() {
            Tok::Minus => {
                self.bump();
                self.enter()?;
                let e = self.unary()?;
                self.depth -= 1;
                Ok(match e {
                    Expr::Const(c) => Expr::Const(-c),
                    e => Expr::Neg(Box::new(e)),
                })
            }
            Tok::Plus => {
                self.bump();
                self.enter()?;
                let e = self.unary()?;
                self.depth -= 1;
                Ok(e)
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> PResult<Expr> {
        let (tok, pos) = self.bump();
        match tok {
            Tok::Num(v) => Ok(Expr::Const(v)),
            Tok::LParen => {
                self.enter()?;
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                self.depth -= 1;
                Ok(e)
            }
            Tok::Ident(name) if *self.peek() == Tok::LParen => {
                self.bump();
                self.enter()?;
                let mut args = vec![self.expr()?];
                while *self.peek() == Tok::Comma {
                    self.bump();
                    args.push(self.expr()?);
                }
                self.expect(Tok::RParen)?;
                self.depth -= 1;
                let unary = |args: Vec<Expr>, f: fn(Expr) -> Expr| -> PResult<Expr> {
                    match <[Expr; 1]>::try_from(args) {
                        Ok([a]) => Ok(f(a)),
                        Err(_) => Err(ParseDiagnostic::error(pos, format!("`{name}` takes one argument"))),
                    }
                };
                match name.as_str() {
                    "abs" => unary(args, Expr::abs),
                    "exp" => unary(args, |a| Expr::mono(MonoFn::Exp, a)),
                    "log" => unary(args, |a| Expr::mono(MonoFn::Log, a)),
                    "sqrt" => unary(args, |a| Expr::mono(MonoFn::Sqrt, a)),
                    "min" => Ok(Expr::min(args)),
                    "max" => Ok(Expr::max(args)),
                    _ => Err(ParseDiagnostic::error(pos, format!("unknown function `{name}`"))),
                }
            }
            Tok::Ident(name) if KEYWORDS.contains(&name.as_str()) => {
                Err(ParseDiagnostic::error(pos, format!("unexpected keyword `{name}` in expression")))
            }
            Tok::Ident(name) => {
                self.uses.push((name.clone(), pos));
                Ok(Expr::Var(name))
            }
            t => Err(ParseDiagnostic::error(pos, format!("expected an expression, found {t}"))),
        }
    }
}

/// Parses `.nlm` text into a validated model with normalized expressions.
///
/// Returns every error found (syntax errors stop at the first); warnings are
/// returned alongside a successful model.
pub fn parse_model(text: &str) -> Result<Parsed, Vec<ParseDiagnostic>> {
    let toks = lex(text).map_err(|d| vec![d])?;
    let mut p = Parser {
        toks,
        at: 0,
        depth: 0,
        vars: Vec::new(),
        params: Vec::new(),
        objectives: Vec::new(),
        constraints: Vec::new(),
        uses: Vec::new(),
    };
    p.statements().map_err(|d| vec![d])?;
    resolve(p)
}

fn resolve(p: Parser) -> Result<Parsed, Vec<ParseDiagnostic>> {
    let mut errors = Vec::new();
    let mut warnings = Vec::new();

    let mut declared: BTreeMap<&str, Pos> = BTreeMap::new();
    for (name, pos) in p
        .vars
        .iter()
        .map(|v| (v.decl.name.as_str(), v.pos))
        .chain(p.params.iter().map(|q| (q.name.as_str(), q.pos)))
    {
        if let Some(first) = declared.get(name) {
            let (a, b) = if (first.line, first.column) < (pos.line, pos.column) { (*first, pos) } else { (pos, *first) };
            errors.push(ParseDiagnostic::error(
                b,
                format!("duplicate declaration of `{name}` (first declared at line {})", a.line),
            ));
        } else {
            declared.insert(name, pos);
        }
    }
    let params: BTreeSet<&str> = p.params.iter().map(|q| q.name.as_str()).collect();

    let mut used = BTreeSet::new();
    for (name, pos) in &p.uses {
        if declared.contains_key(name.as_str()) {
            used.insert(name.as_str());
        } else {
            errors.push(ParseDiagnostic::error(*pos, format!("unknown identifier `{name}`")));
        }
    }

    let mut seen = BTreeSet::new();
    for c in &p.constraints {
        if !seen.insert(c.name.as_str()) || declared.contains_key(c.name.as_str()) {
            errors.push(ParseDiagnostic::error(c.pos, format!("duplicate declaration of `{}`", c.name)));
        }
    }

    let objective = match p.objectives.as_slice() {
        [] => {
            errors.push(ParseDiagnostic::error(Pos { line: 1, column: 1 }, "missing objective"));
            None
        }
        [(sense, o), rest @ ..] => {
            for (_, extra) in rest {
                errors.push(ParseDiagnostic::error(extra.pos, "more than one objective"));
            }
            Some((*sense, o))
        }
    };

    for v in &p.vars {
        if !used.contains(v.decl.name.as_str()) {
            warnings.push(ParseDiagnostic::warning(v.pos, format!("variable `{}` is never used", v.decl.name)));
        }
    }
    if !errors.is_empty() {
        errors.sort_by_key(|d| (d.line, d.column));
        return Err(errors);
    }
    let (sense, objective) = objective.expect("checked above");

    let resolve_expr = |e: &Expr| e.substitute(&|n| params.contains(n).then(|| Expr::param(n)));
    let mut model = Model::new(sense, resolve_expr(&objective.expr));
    for v in &p.vars {
        model.vars.push(v.decl.clone());
    }
    for q in &p.params {
        model = model.with_param(q.name.clone(), q.value);
    }
    for c in &p.constraints {
        model.constraints.push(Constraint::new(c.name.clone(), resolve_expr(&c.lhs), c.rel, resolve_expr(&c.rhs)));
    }

    let values = model.param_map();
    let norm = |e: &Expr, pos: Pos| {
        exactlin_core::normalize(e, &values).map_err(|err| ParseDiagnostic::error(pos, err.to_string()))
    };
    match norm(&model.objective, objective.pos) {
        Ok(e) => model.objective = e,
        Err(d) => errors.push(d),
    }
    for (c, stmt) in model.constraints.iter_mut().zip(&p.constraints) {
        match (norm(&c.lhs, stmt.pos), norm(&c.rhs, stmt.pos)) {
            (Ok(l), Ok(r)) => {
                c.lhs = l;
                c.rhs = r;
            }
            (Err(d), _) | (_, Err(d)) => errors.push(d),
        }
    }
    if !errors.is_empty() {
        return Err(errors);
    }
    if let Err(e) = model.validate() {
        return Err(vec![ParseDiagnostic::error(Pos { line: 1, column: 1 }, e.to_string())]);
    }
    warnings.sort_by_key(|d| (d.line, d.column));
    Ok(Parsed { model, warnings })
}

fn bound_text(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v}")
    }
}

/// Prints a model in `.nlm` syntax; `parse_model` reads it back.
pub fn to_nlm(model: &Model) -> String {
    let mut s = String::new();
    for p in &model.params {
        s.push_str(&format!("param {} = {}\n", p.name, p.value));
    }
    for v in &model.vars {
        s.push_str(&format!(
            "var {} {} [{}, {}]\n",
            v.name,
            v.domain.name(),
            bound_text(v.lower),
            bound_text(v.upper)
        ));
    }
    s.push_str(&format!("{}: {}\n", model.sense.name(), model.objective));
    for c in &model.constraints {
        s.push_str(&format!("s.t. {}: {} {} {}\n", c.name, c.lhs, c.rel.symbol(), c.rhs));
    }
    s
}
