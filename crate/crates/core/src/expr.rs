use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::ops;

/// Strictly monotone scalar functions that may wrap an affine argument.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MonoFn {
    Exp,
    Log,
    Sqrt,
}

impl MonoFn {
    pub fn name(self) -> &'static str {
        match self {
            MonoFn::Exp => "exp",
            MonoFn::Log => "log",
            MonoFn::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "exp" => Some(MonoFn::Exp),
            "log" => Some(MonoFn::Log),
            "sqrt" => Some(MonoFn::Sqrt),
            _ => None,
        }
    }

    /// All supported functions are strictly increasing on their domain.
    pub fn is_increasing(self) -> bool {
        true
    }

    /// Applies the function, returning `None` outside its domain.
    pub fn apply(self, x: f64) -> Option<f64> {
        match self {
            MonoFn::Exp => Some(libm::exp(x)),
            MonoFn::Log if x > 0.0 => Some(libm::log(x)),
            MonoFn::Sqrt if x >= 0.0 => Some(libm::sqrt(x)),
            _ => None,
        }
    }

    /// Inverse on the function's range, `None` when `y` is not attained.
    pub fn inverse(self, y: f64) -> Option<f64> {
        match self {
            MonoFn::Exp if y > 0.0 => Some(libm::log(y)),
            MonoFn::Log => Some(libm::exp(y)),
            MonoFn::Sqrt if y >= 0.0 => Some(y * y),
            _ => None,
        }
    }

    /// Whether `x` lies in the domain given only a lower bound on it.
    pub fn domain_ok(self, lower: f64) -> bool {
        match self {
            MonoFn::Exp => true,
            MonoFn::Log => lower > 0.0,
            MonoFn::Sqrt => lower >= 0.0,
        }
    }
}

impl fmt::Display for MonoFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Immutable expression tree.
#[derive(Debug, Clone)]
pub enum Expr {
    Const(f64),
    Param(String),
    Var(String),
    Sum(Vec<Expr>),
    Prod(Vec<Expr>),
    Neg(Box<Expr>),
    Abs(Box<Expr>),
    Min(Vec<Expr>),
    Max(Vec<Expr>),
    Quot(Box<Expr>, Box<Expr>),
    Mono(MonoFn, Box<Expr>),
}

impl Expr {
    pub fn var(name: impl Into<String>) -> Self {
        Expr::Var(name.into())
    }

    pub fn param(name: impl Into<String>) -> Self {
        Expr::Param(name.into())
    }

    pub fn abs(arg: Expr) -> Self {
        Expr::Abs(Box::new(arg))
    }

    pub fn min(args: Vec<Expr>) -> Self {
        Expr::Min(args)
    }

    pub fn max(args: Vec<Expr>) -> Self {
        Expr::Max(args)
    }

    pub fn quot(num: Expr, den: Expr) -> Self {
        Expr::Quot(Box::new(num), Box::new(den))
    }

    pub fn mono(func: MonoFn, arg: Expr) -> Self {
        Expr::Mono(func, Box::new(arg))
    }

    fn rank(&self) -> u8 {
        match self {
            Expr::Const(_) => 0,
            Expr::Param(_) => 1,
            Expr::Var(_) => 2,
            Expr::Sum(_) => 3,
            Expr::Prod(_) => 4,
            Expr::Neg(_) => 5,
            Expr::Abs(_) => 6,
            Expr::Min(_) => 7,
            Expr::Max(_) => 8,
            Expr::Quot(..) => 9,
            Expr::Mono(..) => 10,
        }
    }

    pub fn as_const(&self) -> Option<f64> {
        match self {
            Expr::Const(c) => Some(*c),
            _ => None,
        }
    }

    pub fn as_var(&self) -> Option<&str> {
        match self {
            Expr::Var(v) => Some(v),
            _ => None,
        }
    }

    /// True for the six pattern constructors.
    pub fn is_pattern_atom(&self) -> bool {
        matches!(
            self,
            Expr::Abs(_) | Expr::Min(_) | Expr::Max(_) | Expr::Quot(..) | Expr::Mono(..)
        )
    }

    pub fn children(&self) -> Vec<&Expr> {
        match self {
            Expr::Const(_) | Expr::Param(_) | Expr::Var(_) => Vec::new(),
            Expr::Sum(xs) | Expr::Prod(xs) | Expr::Min(xs) | Expr::Max(xs) => xs.iter().collect(),
            Expr::Neg(a) | Expr::Abs(a) | Expr::Mono(_, a) => vec![a.as_ref()],
            Expr::Quot(n, d) => vec![n.as_ref(), d.as_ref()],
        }
    }

    /// Visits every node in pre-order.
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        for c in self.children() {
            c.visit(f);
        }
    }

    pub fn contains_var(&self) -> bool {
        let mut found = false;
        self.visit(&mut |e| {
            if matches!(e, Expr::Var(_)) {
                found = true;
            }
        });
        found
    }

    pub fn contains_pattern(&self) -> bool {
        let mut found = false;
        self.visit(&mut |e| {
            if e.is_pattern_atom() {
                found = true;
            }
        });
        found
    }

    /// Names of all referenced variables, in first-occurrence order.
    pub fn var_names(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        self.visit(&mut |e| {
            if let Expr::Var(v) = e {
                if !out.contains(&v.as_str()) {
                    out.push(v);
                }
            }
        });
        out
    }

    /// Replaces every variable for which `f` returns a value.
    pub fn substitute(&self, f: &impl Fn(&str) -> Option<Expr>) -> Expr {
        let map_vec = |xs: &[Expr]| xs.iter().map(|x| x.substitute(f)).collect();
        match self {
            Expr::Var(v) => f(v).unwrap_or_else(|| self.clone()),
            Expr::Const(_) | Expr::Param(_) => self.clone(),
            Expr::Sum(xs) => Expr::Sum(map_vec(xs)),
            Expr::Prod(xs) => Expr::Prod(map_vec(xs)),
            Expr::Min(xs) => Expr::Min(map_vec(xs)),
            Expr::Max(xs) => Expr::Max(map_vec(xs)),
            Expr::Neg(a) => Expr::Neg(Box::new(a.substitute(f))),
            Expr::Abs(a) => Expr::Abs(Box::new(a.substitute(f))),
            Expr::Mono(func, a) => Expr::Mono(*func, Box::new(a.substitute(f))),
            Expr::Quot(n, d) => Expr::quot(n.substitute(f), d.substitute(f)),
        }
    }
}

fn cmp_slices(a: &[Expr], b: &[Expr]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.cmp(y) {
            Ordering::Equal => {}
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

impl Ord for Expr {
    fn cmp(&self, other: &Self) -> Ordering {
        use Expr::*;
        match (self, other) {
            (Const(a), Const(b)) => a.total_cmp(b),
            (Param(a), Param(b)) | (Var(a), Var(b)) => a.cmp(b),
            (Sum(a), Sum(b)) | (Prod(a), Prod(b)) | (Min(a), Min(b)) | (Max(a), Max(b)) => {
                cmp_slices(a, b)
            }
            (Neg(a), Neg(b)) | (Abs(a), Abs(b)) => a.cmp(b),
            (Quot(n1, d1), Quot(n2, d2)) => n1.cmp(n2).then_with(|| d1.cmp(d2)),
            (Mono(f1, a1), Mono(f2, a2)) => f1.cmp(f2).then_with(|| a1.cmp(a2)),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl PartialOrd for Expr {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Expr {}

impl From<f64> for Expr {
    fn from(c: f64) -> Self {
        Expr::Const(c)
    }
}

impl From<&str> for Expr {
    fn from(v: &str) -> Self {
        Expr::Var(v.into())
    }
}

impl ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::Sum(vec![self, rhs])
    }
}

impl ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::Sum(vec![self, Expr::Neg(Box::new(rhs))])
    }
}

impl ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::Prod(vec![self, rhs])
    }
}

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }
}

fn write_list(f: &mut fmt::Formatter<'_>, name: &str, xs: &[Expr]) -> fmt::Result {
    write!(f, "{name}(")?;
    for (i, x) in xs.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{x}")?;
    }
    f.write_str(")")
}

fn write_const(f: &mut fmt::Formatter<'_>, c: f64) -> fmt::Result {
    if c < 0.0 {
        write!(f, "({c})")
    } else {
        write!(f, "{c}")
    }
}

/// Prints in the textual model syntax, so output can be parsed back.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write_const(f, *c),
            Expr::Param(p) | Expr::Var(p) => f.write_str(p),
            Expr::Sum(xs) => {
                if xs.is_empty() {
                    return f.write_str("0");
                }
                f.write_str("(")?;
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" + ")?;
                    }
                    write!(f, "{x}")?;
                }
                f.write_str(")")
            }
            Expr::Prod(xs) => {
                if xs.is_empty() {
                    return f.write_str("1");
                }
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" * ")?;
                    }
                    write!(f, "{x}")?;
                }
                Ok(())
            }
            Expr::Neg(a) => write!(f, "-({a})"),
            Expr::Abs(a) => write!(f, "abs({a})"),
            Expr::Min(xs) => write_list(f, "min", xs),
            Expr::Max(xs) => write_list(f, "max", xs),
            Expr::Quot(n, d) => write!(f, "({n}) / ({d})"),
            Expr::Mono(func, a) => write!(f, "{func}({a})"),
        }
    }
}
