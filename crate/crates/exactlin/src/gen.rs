//! Seeded random models with a known set of planted patterns.
//!
//! Every variable is bounded and every constraint is built around a random
//! reference point that satisfies it, so generated models are feasible,
//! bounded and small enough for the enumeration oracle.

use std::collections::{BTreeMap, BTreeSet};

use exactlin_core::{
    evaluate, normalize, Constraint, LinearForm, Expr, Model, MonoFn, PatternKind, Relation, Sense, VarDecl,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::InstanceAnnotation;
use crate::error::{Error, Result};

/// Number of planted occurrences per kind, for every generated model.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TemplateMix {
    pub counts: BTreeMap<PatternKind, usize>,
}

impl TemplateMix {
    /// A mix with no patterns: purely linear models (with parameter products).
    pub fn linear() -> Self {
        TemplateMix::default()
    }

    pub fn with(mut self, kind: PatternKind, n: usize) -> Self {
        if n > 0 {
            self.counts.insert(kind, n);
        }
        self
    }

    /// Parses `kind:count` pairs separated by commas, e.g. `abs:1,min:2`.
    pub fn parse(s: &str) -> Result<Self> {
        let mut mix = TemplateMix::default();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, n) = part.split_once(':').unwrap_or((part, "1"));
            let kind = PatternKind::from_name(k.trim())
                .ok_or_else(|| Error::Invalid(format!("unknown pattern kind `{k}`")))?;
            let n: usize = n.trim().parse().map_err(|_| Error::Invalid(format!("bad count in `{part}`")))?;
            mix = mix.with(kind, n);
        }
        Ok(mix)
    }

    fn validate(&self) -> Result<()> {
        let frac = self.counts.get(&PatternKind::LinearFractional).copied().unwrap_or(0);
        if frac > 1 || (frac == 1 && self.counts.len() > 1) {
            return Err(Error::Invalid("a fractional objective must be the only pattern".into()));
        }
        if self.counts.values().sum::<usize>() > 8 {
            return Err(Error::Invalid("at most 8 planted occurrences per model".into()));
        }
        if self.counts.get(&PatternKind::Bilinear).copied().unwrap_or(0) > 6 {
            return Err(Error::Invalid("at most 6 planted products per model".into()));
        }
        Ok(())
    }
}

/// Generates `count` models, each planting exactly the occurrences in `mix`.
pub fn gen_models(seed: u64, count: usize, mix: &TemplateMix) -> Result<Vec<(Model, InstanceAnnotation)>> {
    if count == 0 {
        return Err(Error::Invalid("count must be at least 1".into()));
    }
    mix.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let m = Generator::new(&mut rng, mix).build(&mut rng, mix);
            Ok((m, annotation(mix, seed, i)))
        })
        .collect()
}

/// Generates `count` models with a random mix each.
pub fn gen_mixed(seed: u64, count: usize) -> Vec<(Model, InstanceAnnotation)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let mix = random_mix(&mut rng);
            let m = Generator::new(&mut rng, &mix).build(&mut rng, &mix);
            (m, annotation(&mix, seed, i))
        })
        .collect()
}

fn random_mix(rng: &mut ChaCha8Rng) -> TemplateMix {
    if rng.gen_bool(0.1) {
        return TemplateMix::default().with(PatternKind::LinearFractional, 1);
    }
    let mut kinds = vec![
        PatternKind::Bilinear,
        PatternKind::Min,
        PatternKind::Max,
        PatternKind::Abs,
        PatternKind::Monotone,
    ];
    kinds.shuffle(rng);
    let n = rng.gen_range(1..=3);
    kinds.into_iter().take(n).fold(TemplateMix::default(), |m, k| m.with(k, rng.gen_range(1..=2)))
}

fn annotation(mix: &TemplateMix, seed: u64, i: usize) -> InstanceAnnotation {
    InstanceAnnotation {
        expected_kinds: mix.counts.keys().copied().collect(),
        source: format!("generated seed={seed} index={i}"),
    }
}

struct Generator {
    xs: Vec<VarDecl>,
    bs: Vec<VarDecl>,
    ns: Vec<VarDecl>,
    point: BTreeMap<String, f64>,
    objective: Vec<Expr>,
    constraints: Vec<Constraint>,
    atoms: BTreeSet<Expr>,
    p: f64,
}

fn c(v: f64) -> Expr {
    Expr::Const(v)
}

fn coef(rng: &mut ChaCha8Rng) -> f64 {
    let v = rng.gen_range(1..=5) as f64;
    if rng.gen_bool(0.5) {
        v
    } else {
        -v
    }
}

impl Generator {
    fn new(rng: &mut ChaCha8Rng, mix: &TemplateMix) -> Self {
        let fractional = mix.counts.contains_key(&PatternKind::LinearFractional);
        let bilinear = mix.counts.get(&PatternKind::Bilinear).copied().unwrap_or(0);
        let nx = rng.gen_range(2..=4);
        let nb = if fractional { 0 } else { rng.gen_range(bilinear.min(3)..=3) };
        let nn = if fractional { 0 } else { rng.gen_range(0..=1) };
        let mut point = BTreeMap::new();
        let xs: Vec<VarDecl> = (0..nx)
            .map(|i| {
                let lo = rng.gen_range(-4..=2) as f64;
                let hi = lo + rng.gen_range(1..=6) as f64;
                let name = format!("x{i}");
                point.insert(name.clone(), rng.gen_range(lo..=hi));
                VarDecl::continuous(name, lo, hi)
            })
            .collect();
        let bs: Vec<VarDecl> = (0..nb)
            .map(|i| {
                let name = format!("b{i}");
                point.insert(name.clone(), if rng.gen_bool(0.5) { 1.0 } else { 0.0 });
                VarDecl::binary(name)
            })
            .collect();
        let ns: Vec<VarDecl> = (0..nn)
            .map(|i| {
                let name = format!("n{i}");
                point.insert(name.clone(), rng.gen_range(0..=3) as f64);
                VarDecl::integer(name, 0.0, 3.0)
            })
            .collect();
        let p = rng.gen_range(1..=4) as f64;
        Generator { xs, bs, ns, point, objective: Vec::new(), constraints: Vec::new(), atoms: BTreeSet::new(), p }
    }

    fn value(&self, e: &Expr) -> f64 {
        evaluate(e, &self.point, &BTreeMap::from([("p".to_string(), self.p)])).expect("generated expressions are total")
    }

    /// Random affine expression over one or two continuous variables.
    fn affine(&self, rng: &mut ChaCha8Rng) -> Expr {
        let k = rng.gen_range(1..=2.min(self.xs.len()));
        let mut picked: Vec<&VarDecl> = self.xs.choose_multiple(rng, k).collect();
        picked.sort_by(|a, b| a.name.cmp(&b.name));
        let mut parts: Vec<Expr> = picked.iter().map(|v| c(coef(rng)) * Expr::var(v.name.as_str())).collect();
        parts.push(c(rng.gen_range(-3..=3) as f64));
        Expr::Sum(parts)
    }

    /// Affine expression that is at least 1 on the box.
    fn positive_affine(&self, rng: &mut ChaCha8Rng) -> Expr {
        let mut parts = vec![c(1.0 + rng.gen_range(0..=2) as f64)];
        for v in &self.xs {
            let k = rng.gen_range(0..=3) as f64;
            if k > 0.0 {
                parts.push(c(k) * (Expr::var(v.name.as_str()) - c(v.lower)));
            }
        }
        if parts.len() == 1 {
            let v = &self.xs[0];
            parts.push(Expr::var(v.name.as_str()) - c(v.lower));
        }
        Expr::Sum(parts)
    }

    fn linear_part(&self, rng: &mut ChaCha8Rng) -> Expr {
        let mut parts = Vec::new();
        for v in self.xs.iter().chain(&self.ns) {
            if rng.gen_bool(0.6) {
                parts.push(c(coef(rng)) * Expr::var(v.name.as_str()));
            }
        }
        Expr::Sum(parts)
    }

    /// A distinct `abs`/`min`/`max` atom.
    fn atom(&mut self, rng: &mut ChaCha8Rng, kind: PatternKind) -> Expr {
        loop {
            let e = match kind {
                PatternKind::Abs => Expr::abs(self.affine(rng)),
                PatternKind::Min | PatternKind::Max => {
                    let n = rng.gen_range(2..=3);
                    let args: Vec<Expr> = (0..n).map(|_| self.affine(rng)).collect();
                    if kind == PatternKind::Min {
                        Expr::min(args)
                    } else {
                        Expr::max(args)
                    }
                }
                _ => unreachable!("not a piecewise kind"),
            };
            let n = normalize(&e, &BTreeMap::new()).expect("small expression");
            let shape_ok = match (&n, kind) {
                (Expr::Abs(_), PatternKind::Abs) => true,
                (Expr::Min(a), PatternKind::Min) | (Expr::Max(a), PatternKind::Max) => a.len() >= 2,
                _ => false,
            };
            if shape_ok && self.atoms.insert(n.clone()) {
                return n;
            }
        }
    }

    /// Adds `lhs rel rhs` with the right-hand side chosen so the reference point is feasible.
    fn feasible_row(&mut self, rng: &mut ChaCha8Rng, lhs: Expr, allow_eq: bool) {
        let at = self.value(&lhs);
        let slack = rng.gen_range(0.0..2.0);
        let (rel, rhs) = match rng.gen_range(0..if allow_eq { 3 } else { 2 }) {
            0 => (Relation::Le, at + slack),
            1 => (Relation::Ge, at - slack),
            _ => (Relation::Eq, at),
        };
        let name = format!("r{}", self.constraints.len());
        self.constraints.push(Constraint::new(name, lhs, rel, c(rhs)));
    }

    fn build(mut self, rng: &mut ChaCha8Rng, mix: &TemplateMix) -> Model {
        let sense = if rng.gen_bool(0.5) { Sense::Minimize } else { Sense::Maximize };
        // A parameter times a variable is linear and must never be flagged.
        self.objective.push(Expr::param("p") * Expr::var(self.xs[0].name.as_str()));
        self.objective.push(self.linear_part(rng));
        for v in &self.bs.clone() {
            self.objective.push(c(coef(rng)) * Expr::var(v.name.as_str()));
        }
        let budget = self.linear_part(rng) + Expr::param("p") * Expr::var(self.xs[1].name.as_str());
        self.feasible_row(rng, budget, false);

        let mut pairs: Vec<(usize, usize)> =
            (0..self.bs.len()).flat_map(|b| (0..self.xs.len()).map(move |x| (b, x))).collect();
        pairs.shuffle(rng);
        let mut monotone_objective = None;
        for (&kind, &count) in &mix.counts {
            for k in 0..count {
                match kind {
                    PatternKind::Bilinear => {
                        let (b, x) = pairs[k];
                        let term = c(coef(rng))
                            * Expr::var(self.bs[b].name.as_str())
                            * Expr::var(self.xs[x].name.as_str());
                        if rng.gen_bool(0.5) {
                            self.objective.push(term);
                        } else {
                            let lhs = term + self.linear_part(rng);
                            self.feasible_row(rng, lhs, false);
                        }
                    }
                    PatternKind::Abs | PatternKind::Min | PatternKind::Max => {
                        let atom = self.atom(rng, kind);
                        let term = c(coef(rng)) * atom;
                        if rng.gen_bool(0.5) {
                            self.objective.push(term);
                        } else {
                            let lhs = term + self.linear_part(rng);
                            self.feasible_row(rng, lhs, kind == PatternKind::Abs);
                        }
                    }
                    PatternKind::LinearFractional => {
                        let num = loop {
                            let num = self.linear_part(rng) + self.affine(rng);
                            let form = normalize(&num, &BTreeMap::new()).ok().and_then(|n| LinearForm::from_expr(&n));
                            if form.is_some_and(|f| !f.is_constant()) {
                                break num;
                            }
                        };
                        let den = self.positive_affine(rng);
                        self.objective = vec![Expr::quot(num, den)];
                    }
                    PatternKind::Monotone => {
                        let func = *[MonoFn::Exp, MonoFn::Log, MonoFn::Sqrt].choose(rng).expect("non-empty");
                        let mut g = self.positive_affine(rng);
                        if func == MonoFn::Exp {
                            g = c(0.05) * g;
                        }
                        let alone = mix.counts.len() == 1 && count == 1;
                        if alone && rng.gen_bool(0.5) {
                            monotone_objective = Some(Expr::mono(func, g));
                            continue;
                        }
                        let at = self.value(&Expr::mono(func, g.clone()));
                        let (rel, rhs) = if rng.gen_bool(0.5) {
                            (Relation::Le, at * (1.0 + rng.gen_range(0.0..0.5)))
                        } else {
                            (Relation::Ge, at * (1.0 - rng.gen_range(0.0..0.5)))
                        };
                        let name = format!("r{}", self.constraints.len());
                        self.constraints.push(Constraint::new(name, Expr::mono(func, g), rel, c(rhs)));
                    }
                }
            }
        }

        let objective = monotone_objective.unwrap_or_else(|| Expr::Sum(self.objective.clone()));
        let mut m = Model::new(sense, objective).with_param("p", self.p);
        m.vars = self.xs.into_iter().chain(self.bs).chain(self.ns).collect();
        m.constraints = self.constraints;
        m
    }
}
