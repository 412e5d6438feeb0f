use super::{Ident, KernelError, Result, Signature, Sort, Subst, Term, FALSE, TRUE};
use std::fmt;

/// Quantifier-free formula body.
///
/// Child positions: `Eq` has lhs at 0 and rhs at 1; `Atom` has its term at
/// 0; `Implies` lists hypotheses first and the conclusion last; `Or` and
/// `And` number their members. Below a term, positions index arguments.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Prop {
    Eq(Term, Term),
    Atom(Term),
    Implies(Vec<Prop>, Box<Prop>),
    Or(Vec<Prop>),
    /// Produced by constructor injectivity; also accepted by the parser.
    And(Vec<Prop>),
}

/// A universally closed formula.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Formula {
    pub vars: Vec<(Ident, Sort)>,
    pub body: Prop,
}

/// What a position addresses.
#[derive(Debug, Clone, Copy)]
pub enum Node<'a> {
    Prop(&'a Prop),
    Term(&'a Term),
}

impl Prop {
    pub fn t() -> Prop {
        Prop::Atom(Term::constant(TRUE))
    }

    pub fn f() -> Prop {
        Prop::Atom(Term::constant(FALSE))
    }

    pub fn is_true(&self) -> bool {
        matches!(self, Prop::Atom(t) if t.head() == Some(TRUE))
    }

    pub fn is_false(&self) -> bool {
        matches!(self, Prop::Atom(t) if t.head() == Some(FALSE))
    }

    pub fn size(&self) -> usize {
        match self {
            Prop::Eq(l, r) => 1 + l.size() + r.size(),
            Prop::Atom(t) => t.size(),
            Prop::Implies(hs, c) => 1 + hs.iter().map(Prop::size).sum::<usize>() + c.size(),
            Prop::Or(ps) | Prop::And(ps) => 1 + ps.iter().map(Prop::size).sum::<usize>(),
        }
    }

    pub fn free_vars(&self) -> Vec<(Ident, Sort)> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut Vec<(Ident, Sort)>) {
        match self {
            Prop::Eq(l, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
            Prop::Atom(t) => t.collect_vars(out),
            Prop::Implies(hs, c) => {
                hs.iter().for_each(|h| h.collect_vars(out));
                c.collect_vars(out);
            }
            Prop::Or(ps) | Prop::And(ps) => ps.iter().for_each(|p| p.collect_vars(out)),
        }
    }

    pub fn contains_var(&self, v: &str) -> bool {
        self.free_vars().iter().any(|(n, _)| &**n == v)
    }

    pub fn map_terms(&self, f: &mut impl FnMut(&Term) -> Term) -> Prop {
        match self {
            Prop::Eq(l, r) => Prop::Eq(f(l), f(r)),
            Prop::Atom(t) => Prop::Atom(f(t)),
            Prop::Implies(hs, c) => Prop::Implies(
                hs.iter().map(|h| h.map_terms(f)).collect(),
                Box::new(c.map_terms(f)),
            ),
            Prop::Or(ps) => Prop::Or(ps.iter().map(|p| p.map_terms(f)).collect()),
            Prop::And(ps) => Prop::And(ps.iter().map(|p| p.map_terms(f)).collect()),
        }
    }

    pub fn substitute(&self, s: &Subst) -> Prop {
        self.map_terms(&mut |t| s.apply(t))
    }

    pub fn substitute_checked(&self, sig: &Signature, s: &Subst) -> Result<Prop> {
        let mut err = None;
        let p = self.map_terms(&mut |t| match s.apply_checked(sig, t) {
            Ok(t) => t,
            Err(e) => {
                err.get_or_insert(e);
                t.clone()
            }
        });
        match err {
            Some(e) => Err(e),
            None => Ok(p),
        }
    }

    fn prop_children(&self) -> Option<Vec<&Prop>> {
        match self {
            Prop::Implies(hs, c) => Some(hs.iter().chain(std::iter::once(&**c)).collect()),
            Prop::Or(ps) | Prop::And(ps) => Some(ps.iter().collect()),
            _ => None,
        }
    }

    pub fn node_at(&self, path: &[usize]) -> Result<Node<'_>> {
        let bad = || KernelError::InvalidPosition(path.to_vec());
        let Some((&i, rest)) = path.split_first() else {
            return Ok(Node::Prop(self));
        };
        match self {
            Prop::Eq(l, r) => {
                let t = match i {
                    0 => l,
                    1 => r,
                    _ => return Err(bad()),
                };
                t.subterm_at(rest).map(Node::Term).map_err(|_| bad())
            }
            Prop::Atom(t) if i == 0 => t.subterm_at(rest).map(Node::Term).map_err(|_| bad()),
            Prop::Atom(_) => Err(bad()),
            _ => {
                let ch = self.prop_children().unwrap_or_default();
                let c = ch.get(i).ok_or_else(bad)?;
                c.node_at(rest).map_err(|_| bad())
            }
        }
    }

    pub fn term_at(&self, path: &[usize]) -> Result<&Term> {
        match self.node_at(path)? {
            Node::Term(t) => Ok(t),
            Node::Prop(_) => Err(KernelError::NotATerm),
        }
    }

    pub fn prop_at(&self, path: &[usize]) -> Result<&Prop> {
        match self.node_at(path)? {
            Node::Prop(p) => Ok(p),
            Node::Term(_) => Err(KernelError::NotAProp),
        }
    }

    /// Replace the term at `path` without sort checking.
    pub fn replace_term_at_unchecked(&self, path: &[usize], repl: Term) -> Result<Prop> {
        let bad = || KernelError::InvalidPosition(path.to_vec());
        let (&i, rest) = path.split_first().ok_or(KernelError::NotATerm)?;
        match self {
            Prop::Eq(l, r) => match i {
                0 => Ok(Prop::Eq(l.replace_at_unchecked(rest, repl)?, r.clone())),
                1 => Ok(Prop::Eq(l.clone(), r.replace_at_unchecked(rest, repl)?)),
                _ => Err(bad()),
            },
            Prop::Atom(t) if i == 0 => Ok(Prop::Atom(t.replace_at_unchecked(rest, repl)?)),
            Prop::Atom(_) => Err(bad()),
            _ => self.update_child(i, |c| c.replace_term_at_unchecked(rest, repl)),
        }
    }

    pub fn replace_term_at(&self, sig: &Signature, path: &[usize], repl: Term) -> Result<Prop> {
        let old = self.term_at(path)?;
        let expected = sig.sort_of(old)?;
        let found = sig.sort_of(&repl)?;
        if expected != found {
            return Err(KernelError::SortMismatch { expected, found });
        }
        self.replace_term_at_unchecked(path, repl)
    }

    pub fn replace_prop_at(&self, path: &[usize], repl: Prop) -> Result<Prop> {
        match path.split_first() {
            None => Ok(repl),
            Some((&i, rest)) => match self {
                Prop::Eq(..) | Prop::Atom(_) => Err(KernelError::NotAProp),
                _ => self.update_child(i, |c| c.replace_prop_at(rest, repl)),
            },
        }
    }

    fn update_child(&self, i: usize, f: impl FnOnce(&Prop) -> Result<Prop>) -> Result<Prop> {
        let bad = || KernelError::InvalidPosition(vec![i]);
        match self {
            Prop::Implies(hs, c) => {
                if i < hs.len() {
                    let mut hs = hs.clone();
                    hs[i] = f(&hs[i])?;
                    Ok(Prop::Implies(hs, c.clone()))
                } else if i == hs.len() {
                    Ok(Prop::Implies(hs.clone(), Box::new(f(c)?)))
                } else {
                    Err(bad())
                }
            }
            Prop::Or(ps) | Prop::And(ps) => {
                let mut ps = ps.clone();
                let slot = ps.get_mut(i).ok_or_else(bad)?;
                *slot = f(slot)?;
                Ok(if matches!(self, Prop::Or(_)) {
                    Prop::Or(ps)
                } else {
                    Prop::And(ps)
                })
            }
            _ => Err(bad()),
        }
    }

    /// Every term position (pre-order within each term), left to right.
    pub fn term_positions(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        self.walk_term_positions(&mut Vec::new(), &mut out);
        out
    }

    fn walk_term_positions(&self, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let mut push_term = |i: usize, t: &Term, cur: &mut Vec<usize>| {
            for p in t.positions() {
                let mut full = cur.clone();
                full.push(i);
                full.extend(p);
                out.push(full);
            }
        };
        match self {
            Prop::Eq(l, r) => {
                push_term(0, l, cur);
                push_term(1, r, cur);
            }
            Prop::Atom(t) => push_term(0, t, cur),
            _ => {
                for (i, c) in self.prop_children().unwrap_or_default().into_iter().enumerate() {
                    cur.push(i);
                    c.walk_term_positions(cur, out);
                    cur.pop();
                }
            }
        }
    }

    /// Every formula-node position, children before parents.
    pub fn prop_positions_postorder(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        self.walk_props(&mut Vec::new(), &mut out);
        out
    }

    fn walk_props(&self, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        for (i, c) in self.prop_children().unwrap_or_default().into_iter().enumerate() {
            cur.push(i);
            c.walk_props(cur, out);
            cur.pop();
        }
        out.push(cur.clone());
    }
}

impl Formula {
    pub fn new(vars: Vec<(Ident, Sort)>, body: Prop) -> Self {
        Formula { vars, body }
    }

    /// Closes `body` over its free variables in first-occurrence order.
    pub fn close(body: Prop) -> Self {
        Formula {
            vars: body.free_vars(),
            body,
        }
    }

    /// Free variables of the body that the binder does not bind.
    pub fn free_vars(&self) -> Vec<(Ident, Sort)> {
        self.body
            .free_vars()
            .into_iter()
            .filter(|(n, _)| !self.vars.iter().any(|(b, _)| b == n))
            .collect()
    }

    /// Every name occurring anywhere, bound or free.
    pub fn all_names(&self) -> Vec<Ident> {
        let mut v: Vec<Ident> = self.vars.iter().map(|(n, _)| n.clone()).collect();
        v.extend(self.body.free_vars().into_iter().map(|(n, _)| n));
        v
    }

    /// Substitutes free variables only; bound names are left alone. The
    /// caller guarantees no capture (replacement terms avoid bound names).
    pub fn substitute_free(&self, s: &Subst) -> Formula {
        let mut s = s.clone();
        for (b, _) in &self.vars {
            s.remove(b);
        }
        Formula {
            vars: self.vars.clone(),
            body: self.body.substitute(&s),
        }
    }

    /// Renames bound variables to `var_1, var_2, ...` in order of first
    /// occurrence in the body; unused binders are dropped.
    pub fn canonical(&self) -> Formula {
        let occ = self.body.free_vars();
        let mut s = Subst::new();
        let mut vars = Vec::new();
        for (name, sort) in &occ {
            if self.vars.iter().any(|(b, _)| b == name) {
                let fresh = format!("var_{}", vars.len() + 1);
                s.insert(name.clone(), Term::var(&fresh, sort));
                vars.push((Ident::from(fresh.as_str()), sort.clone()));
            }
        }
        Formula {
            vars,
            body: self.body.substitute(&s),
        }
    }
}

impl fmt::Display for Prop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |f: &mut fmt::Formatter<'_>, head: &str, ps: &[&Prop]| {
            write!(f, "({head}")?;
            for p in ps {
                write!(f, " {p}")?;
            }
            write!(f, ")")
        };
        match self {
            Prop::Eq(l, r) => write!(f, "(= {l} {r})"),
            Prop::Atom(t) => write!(f, "{t}"),
            Prop::Implies(hs, c) => {
                let mut v: Vec<&Prop> = hs.iter().collect();
                v.push(c);
                list(f, "=>", &v)
            }
            Prop::Or(ps) => list(f, "or", &ps.iter().collect::<Vec<_>>()),
            Prop::And(ps) => list(f, "and", &ps.iter().collect::<Vec<_>>()),
        }
    }
}

impl fmt::Debug for Prop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.vars.is_empty() {
            return write!(f, "{}", self.body);
        }
        write!(f, "(forall (")?;
        for (i, (n, s)) in self.vars.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "({n} {s})")?;
        }
        write!(f, ") {})", self.body)
    }
}

impl fmt::Debug for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
