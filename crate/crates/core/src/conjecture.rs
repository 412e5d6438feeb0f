//! Template-based conjecture generation.
//!
//! Functions reachable from the goal are collected into a pool, and each of
//! the sixteen templates below is instantiated with every type-correct
//! choice of pool symbols.

use crate::evaluator::ValueEnumerator;
use crate::frontend::{collect_fun_syms, Problem, Theory};
use crate::kernel::{Formula, Ident, Prop, Sort, Subst, Term, BOOL};
use serde::Serialize;
use std::collections::HashSet;
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Template {
    Associativity,
    IdentityElement,
    Commutativity,
    IdempotentElement,
    Idempotency,
    Distributivity,
    AntiDistributivity,
    Homomorphism,
    Transitivity,
    Symmetry,
    Connexity,
    Reflexivity,
    Square,
    SwapUnary,
    Projection,
    CompositeCommutativity,
}

impl Template {
    pub const ALL: [Template; 16] = [
        Template::Associativity,
        Template::IdentityElement,
        Template::Commutativity,
        Template::IdempotentElement,
        Template::Idempotency,
        Template::Distributivity,
        Template::AntiDistributivity,
        Template::Homomorphism,
        Template::Transitivity,
        Template::Symmetry,
        Template::Connexity,
        Template::Reflexivity,
        Template::Square,
        Template::SwapUnary,
        Template::Projection,
        Template::CompositeCommutativity,
    ];

    /// Prefix used when naming proved lemmas.
    pub fn lemma_prefix(self) -> &'static str {
        match self {
            Template::Associativity => "associativity",
            Template::IdentityElement => "identity",
            Template::Commutativity => "commutativity",
            Template::IdempotentElement => "idempotent_Element",
            Template::Idempotency => "idempotency",
            Template::Distributivity => "distributivity",
            Template::AntiDistributivity => "anti_Distributivity",
            Template::Homomorphism => "homomorphism",
            Template::Transitivity => "transitivity",
            Template::Symmetry => "symmetry",
            Template::Connexity => "connexity",
            Template::Reflexivity => "reflexivity",
            Template::Square => "square",
            Template::SwapUnary => "swap_Unary",
            Template::Projection => "projection",
            Template::CompositeCommutativity => "composite_Commutativity",
        }
    }

    pub fn uses_f(self) -> bool {
        !self.is_relational()
    }

    pub fn uses_g(self) -> bool {
        matches!(
            self,
            Template::Distributivity
                | Template::AntiDistributivity
                | Template::Homomorphism
                | Template::SwapUnary
                | Template::CompositeCommutativity
        )
    }

    pub fn uses_r(self) -> bool {
        self.is_relational()
    }

    pub fn uses_e(self) -> bool {
        matches!(self, Template::IdentityElement | Template::IdempotentElement)
    }

    pub fn is_relational(self) -> bool {
        matches!(
            self,
            Template::Transitivity | Template::Symmetry | Template::Connexity | Template::Reflexivity
        )
    }
}

impl fmt::Display for Template {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.lemma_prefix())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize)]
pub struct Instantiation {
    pub f: Option<String>,
    pub g: Option<String>,
    pub r: Option<String>,
    pub e: Option<String>,
    /// Identity element on the right-hand argument.
    pub right: bool,
    /// Equation emitted with its sides swapped.
    pub flipped: bool,
    /// The mirrored (right) distributivity variant.
    pub mirrored: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Status {
    Pending,
    Refuted(Subst),
    Proved(String),
    Unproved,
}

#[derive(Clone, Debug)]
pub struct Conjecture {
    /// Index in generation order.
    pub id: usize,
    pub template: Template,
    pub inst: Instantiation,
    pub statement: Formula,
    pub status: Status,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FunctionPool {
    pub functions: Vec<Ident>,
    pub constructors: Vec<Ident>,
}

fn push_unique(v: &mut Vec<Ident>, s: Ident) {
    if !v.contains(&s) {
        v.push(s);
    }
}

/// Functions reachable from the goal through definition bodies, plus the
/// constructors of every sort reachable from their signatures.
pub fn collect_pool(problem: &Problem) -> FunctionPool {
    let th = &problem.theory;
    let mut functions = Vec::new();
    let mut from_goal = Vec::new();
    problem.goal.body.map_terms(&mut |t| {
        collect_fun_syms(&th.sig, t, &mut from_goal);
        t.clone()
    });
    for f in from_goal {
        push_unique(&mut functions, f);
    }
    let mut i = 0;
    while i < functions.len() {
        for g in th.callees(&functions[i]) {
            push_unique(&mut functions, g);
        }
        i += 1;
    }

    let mut sorts: Vec<Sort> = Vec::new();
    for f in &functions {
        let info = th.sig.get(f).unwrap();
        for s in info.args.iter().chain(std::iter::once(&info.result)) {
            if !sorts.contains(s) {
                sorts.push(s.clone());
            }
        }
    }
    let mut j = 0;
    while j < sorts.len() {
        for c in th.sig.constructors(&sorts[j]).to_vec() {
            for s in &th.sig.get(&c).unwrap().args {
                if !sorts.contains(s) {
                    sorts.push(s.clone());
                }
            }
        }
        j += 1;
    }

    let mut constructors = Vec::new();
    let decl_order = th
        .datatypes
        .iter()
        .map(|d| d.sort.clone())
        .chain(std::iter::once(Sort::bool()));
    for s in decl_order {
        if sorts.contains(&s) {
            for c in th.sig.constructors(&s) {
                push_unique(&mut constructors, c.clone());
            }
        }
    }
    FunctionPool {
        functions,
        constructors,
    }
}

#[derive(Clone, Debug)]
pub struct GenOptions {
    /// Largest element candidate (node count) for `e` slots.
    pub elem_size: usize,
    /// Also emit mirrored distributivity.
    pub extra_templates: bool,
}

impl Default for GenOptions {
    fn default() -> Self {
        GenOptions {
            elem_size: 2,
            extra_templates: false,
        }
    }
}

#[derive(Clone)]
struct Sym {
    name: String,
    args: Vec<Sort>,
    result: Sort,
}

impl Sym {
    fn unary(&self) -> Option<(&Sort, &Sort)> {
        match self.args.as_slice() {
            [a] => Some((a, &self.result)),
            _ => None,
        }
    }

    fn binary(&self) -> Option<(&Sort, &Sort, &Sort)> {
        match self.args.as_slice() {
            [a, b] => Some((a, b, &self.result)),
            _ => None,
        }
    }

    fn ap(&self, args: Vec<Term>) -> Term {
        Term::app(&self.name, args)
    }
}

struct Gen<'a> {
    out: Vec<Conjecture>,
    seen: HashSet<String>,
    theory: &'a Theory,
}

impl Gen<'_> {
    fn emit(&mut self, template: Template, inst: Instantiation, body: Prop) {
        let statement = Formula::close(body).canonical();
        debug_assert!(self.theory.sig.check_formula(&statement).is_ok());
        if !self.seen.insert(statement.to_string()) {
            return;
        }
        self.out.push(Conjecture {
            id: self.out.len(),
            template,
            inst,
            statement,
            status: Status::Pending,
        });
    }

    /// Emits `l = r` and, unless it is the same up to renaming, `r = l`.
    fn emit_eq(&mut self, template: Template, inst: Instantiation, l: Term, r: Term, flip: bool) {
        self.emit(template, inst.clone(), Prop::Eq(l.clone(), r.clone()));
        if flip {
            self.emit(
                template,
                Instantiation {
                    flipped: true,
                    ..inst
                },
                Prop::Eq(r, l),
            );
        }
    }
}

/// Instantiates every template over the pool, in template order and then
/// pool order. Statements identical up to variable renaming are emitted
/// once.
pub fn generate_conjectures(pool: &FunctionPool, theory: &Theory, opts: &GenOptions) -> Vec<Conjecture> {
    let sig = &theory.sig;
    let mk = |name: &Ident| {
        let info = sig.get(name).unwrap();
        Sym {
            name: name.to_string(),
            args: info.args.clone(),
            result: info.result.clone(),
        }
    };
    // Slot candidates for f and g: pool functions, then constructors that
    // take arguments. The built-in Bool constructors are filtered out.
    let slot: Vec<Sym> = pool
        .functions
        .iter()
        .chain(pool.constructors.iter().filter(|c| {
            sig.get(c).map(|i| i.result.name() != BOOL).unwrap_or(false)
        }))
        .map(mk)
        .filter(|s| !s.args.is_empty())
        .collect();
    let relations: Vec<Sym> = pool
        .functions
        .iter()
        .map(mk)
        .filter(|s| matches!(s.binary(), Some((a, b, r)) if a == b && r.name() == BOOL))
        .collect();

    let mut en = ValueEnumerator::new(sig);
    let mut elems = |s: &Sort| en.up_to(s, opts.elem_size);

    let v = |n: &str, s: &Sort| Term::var(n, s);
    let mut g = Gen {
        out: Vec::new(),
        seen: HashSet::new(),
        theory,
    };
    let inst_f = |f: &Sym| Instantiation {
        f: Some(f.name.clone()),
        ..Default::default()
    };
    let inst_fg = |f: &Sym, h: &Sym| Instantiation {
        f: Some(f.name.clone()),
        g: Some(h.name.clone()),
        ..Default::default()
    };

    for t in Template::ALL {
        match t {
            Template::Associativity => {
                for f in &slot {
                    if let Some((a, b, r)) = f.binary() {
                        if a == b && b == r {
                            let (x, y, z) = (v("x", a), v("y", a), v("z", a));
                            let l = f.ap(vec![f.ap(vec![x.clone(), y.clone()]), z.clone()]);
                            let rr = f.ap(vec![x, f.ap(vec![y, z])]);
                            g.emit_eq(t, inst_f(f), l, rr, true);
                        }
                    }
                }
            }
            Template::IdentityElement => {
                for f in &slot {
                    if let Some((a, b, r)) = f.binary() {
                        if b == r {
                            for e in elems(a) {
                                let x = v("x", b);
                                let inst = Instantiation {
                                    e: Some(e.to_string()),
                                    ..inst_f(f)
                                };
                                g.emit(t, inst, Prop::Eq(f.ap(vec![e, x.clone()]), x));
                            }
                        }
                        if a == r {
                            for e in elems(b) {
                                let x = v("x", a);
                                let inst = Instantiation {
                                    e: Some(e.to_string()),
                                    right: true,
                                    ..inst_f(f)
                                };
                                g.emit(t, inst, Prop::Eq(f.ap(vec![x.clone(), e]), x));
                            }
                        }
                    }
                }
            }
            Template::Commutativity => {
                for f in &slot {
                    if let Some((a, b, _)) = f.binary() {
                        if a == b {
                            let (x, y) = (v("x", a), v("y", a));
                            g.emit_eq(
                                t,
                                inst_f(f),
                                f.ap(vec![x.clone(), y.clone()]),
                                f.ap(vec![y, x]),
                                true,
                            );
                        }
                    }
                }
            }
            Template::IdempotentElement => {
                for f in &slot {
                    if let Some((a, b, r)) = f.binary() {
                        if a == b && b == r {
                            for e in elems(a) {
                                let inst = Instantiation {
                                    e: Some(e.to_string()),
                                    ..inst_f(f)
                                };
                                g.emit(t, inst, Prop::Eq(f.ap(vec![e.clone(), e.clone()]), e));
                            }
                        }
                    }
                }
            }
            Template::Idempotency => {
                for f in &slot {
                    if let Some((a, b, r)) = f.binary() {
                        if a == b && b == r {
                            let x = v("x", a);
                            g.emit(t, inst_f(f), Prop::Eq(f.ap(vec![x.clone(), x.clone()]), x));
                        }
                    }
                }
            }
            Template::Distributivity => {
                // f (x, g (y, z)) = g (f (x, y), f (x, z))
                for f in &slot {
                    for h in &slot {
                        let (Some((fa, fb, fr)), Some((ga, gb, gr))) = (f.binary(), h.binary()) else {
                            continue;
                        };
                        if fb == fr && ga == gb && gb == gr && fb == ga {
                            let (x, y, z) = (v("x", fa), v("y", fb), v("z", fb));
                            let l = f.ap(vec![x.clone(), h.ap(vec![y.clone(), z.clone()])]);
                            let r = h.ap(vec![f.ap(vec![x.clone(), y]), f.ap(vec![x, z])]);
                            g.emit_eq(t, inst_fg(f, h), l, r, true);
                        }
                        if opts.extra_templates && fa == fr && ga == gb && gb == gr && fa == ga {
                            // f (g (y, z), x) = g (f (y, x), f (z, x))
                            let (x, y, z) = (v("x", fb), v("y", fa), v("z", fa));
                            let l = f.ap(vec![h.ap(vec![y.clone(), z.clone()]), x.clone()]);
                            let r = h.ap(vec![f.ap(vec![y, x.clone()]), f.ap(vec![z, x])]);
                            let inst = Instantiation {
                                mirrored: true,
                                ..inst_fg(f, h)
                            };
                            g.emit_eq(t, inst, l, r, true);
                        }
                    }
                }
            }
            Template::AntiDistributivity | Template::Homomorphism => {
                // f (g (x, y)) = g (f y, f x)   /   g (f x, f y)
                for f in &slot {
                    for h in &slot {
                        let (Some((fa, fr)), Some((ga, gb, gr))) = (f.unary(), h.binary()) else {
                            continue;
                        };
                        if fa == fr && ga == gb && gb == gr && fa == ga {
                            let (x, y) = (v("x", fa), v("y", fa));
                            let l = f.ap(vec![h.ap(vec![x.clone(), y.clone()])]);
                            let r = if t == Template::AntiDistributivity {
                                h.ap(vec![f.ap(vec![y]), f.ap(vec![x])])
                            } else {
                                h.ap(vec![f.ap(vec![x]), f.ap(vec![y])])
                            };
                            g.emit_eq(t, inst_fg(f, h), l, r, true);
                        }
                    }
                }
            }
            Template::Transitivity | Template::Symmetry | Template::Connexity | Template::Reflexivity => {
                for rel in &relations {
                    let a = &rel.args[0];
                    let (x, y, z) = (v("x", a), v("y", a), v("z", a));
                    let r = |p: &Term, q: &Term| Prop::Atom(rel.ap(vec![p.clone(), q.clone()]));
                    let body = match t {
                        Template::Transitivity => {
                            Prop::Implies(vec![r(&x, &y), r(&y, &z)], Box::new(r(&x, &z)))
                        }
                        Template::Symmetry => Prop::Implies(vec![r(&x, &y)], Box::new(r(&y, &x))),
                        Template::Connexity => {
                            Prop::Or(vec![r(&x, &y), r(&y, &x), Prop::Eq(x.clone(), y.clone())])
                        }
                        _ => r(&x, &x),
                    };
                    let inst = Instantiation {
                        r: Some(rel.name.clone()),
                        ..Default::default()
                    };
                    g.emit(t, inst, body);
                }
            }
            Template::Square | Template::Projection => {
                for f in &slot {
                    if let Some((a, r)) = f.unary() {
                        if a == r {
                            let x = v("x", a);
                            let ffx = f.ap(vec![f.ap(vec![x.clone()])]);
                            let rhs = if t == Template::Square { x } else { f.ap(vec![x]) };
                            g.emit_eq(t, inst_f(f), ffx, rhs, true);
                        }
                    }
                }
            }
            Template::SwapUnary => {
                // f (x, g y) = f (g x, y)
                for f in &slot {
                    for h in &slot {
                        let (Some((fa, fb, _)), Some((ga, gr))) = (f.binary(), h.unary()) else {
                            continue;
                        };
                        if fa == fb && ga == gr && fa == ga {
                            let (x, y) = (v("x", fa), v("y", fa));
                            let l = f.ap(vec![x.clone(), h.ap(vec![y.clone()])]);
                            let r = f.ap(vec![h.ap(vec![x]), y]);
                            g.emit_eq(t, inst_fg(f, h), l, r, true);
                        }
                    }
                }
            }
            Template::CompositeCommutativity => {
                // f (g (x, y)) = f (g (y, x))
                for f in &slot {
                    for h in &slot {
                        let (Some((fa, _)), Some((ga, gb, gr))) = (f.unary(), h.binary()) else {
                            continue;
                        };
                        if ga == gb && gr == fa {
                            let (x, y) = (v("x", ga), v("y", ga));
                            let l = f.ap(vec![h.ap(vec![x.clone(), y.clone()])]);
                            let r = f.ap(vec![h.ap(vec![y, x])]);
                            g.emit_eq(t, inst_fg(f, h), l, r, true);
                        }
                    }
                }
            }
        }
    }
    g.out
}
