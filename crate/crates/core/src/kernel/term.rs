use super::{Ident, KernelError, Result, Signature, Sort, Subst};
use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

/// A first-order term. Symbols are constructors or defined functions and
/// are always fully applied.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Var { name: Ident, sort: Sort },
    App { sym: Ident, args: Vec<Term> },
}

impl Term {
    pub fn var(name: &str, sort: &Sort) -> Term {
        Term::Var {
            name: Arc::from(name),
            sort: sort.clone(),
        }
    }

    pub fn app(sym: &str, args: Vec<Term>) -> Term {
        Term::App {
            sym: Arc::from(sym),
            args,
        }
    }

    pub fn constant(sym: &str) -> Term {
        Term::app(sym, vec![])
    }

    pub fn head(&self) -> Option<&str> {
        match self {
            Term::App { sym, .. } => Some(sym),
            Term::Var { .. } => None,
        }
    }

    pub fn args(&self) -> &[Term] {
        match self {
            Term::App { args, .. } => args,
            Term::Var { .. } => &[],
        }
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var { .. })
    }

    /// Total node count.
    pub fn size(&self) -> usize {
        match self {
            Term::Var { .. } => 1,
            Term::App { args, .. } => 1 + args.iter().map(Term::size).sum::<usize>(),
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var { .. } => false,
            Term::App { args, .. } => args.iter().all(Term::is_ground),
        }
    }

    pub fn contains_var(&self, v: &str) -> bool {
        match self {
            Term::Var { name, .. } => &**name == v,
            Term::App { args, .. } => args.iter().any(|a| a.contains_var(v)),
        }
    }

    pub fn contains_sym(&self, s: &str) -> bool {
        match self {
            Term::Var { .. } => false,
            Term::App { sym, args } => &**sym == s || args.iter().any(|a| a.contains_sym(s)),
        }
    }

    /// Variables in first-occurrence (left to right) order, without repeats.
    pub fn vars(&self) -> Vec<(Ident, Sort)> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    pub(crate) fn collect_vars(&self, out: &mut Vec<(Ident, Sort)>) {
        match self {
            Term::Var { name, sort } => {
                if !out.iter().any(|(n, _)| n == name) {
                    out.push((name.clone(), sort.clone()));
                }
            }
            Term::App { args, .. } => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    /// Every occurrence position (pre-order).
    pub fn positions(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut cur = Vec::new();
        self.walk_positions(&mut cur, &mut out);
        out
    }

    fn walk_positions(&self, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        out.push(cur.clone());
        for (i, a) in self.args().iter().enumerate() {
            cur.push(i);
            a.walk_positions(cur, out);
            cur.pop();
        }
    }

    pub fn subterm_at(&self, path: &[usize]) -> Result<&Term> {
        let mut t = self;
        for &i in path {
            t = t
                .args()
                .get(i)
                .ok_or_else(|| KernelError::InvalidPosition(path.to_vec()))?;
        }
        Ok(t)
    }

    /// Functional update without sort checking.
    pub fn replace_at_unchecked(&self, path: &[usize], repl: Term) -> Result<Term> {
        match path.split_first() {
            None => Ok(repl),
            Some((&i, rest)) => match self {
                Term::App { sym, args } if i < args.len() => {
                    let mut args = args.clone();
                    args[i] = args[i].replace_at_unchecked(rest, repl)?;
                    Ok(Term::App {
                        sym: sym.clone(),
                        args,
                    })
                }
                _ => Err(KernelError::InvalidPosition(path.to_vec())),
            },
        }
    }

    /// Functional update; the replacement must have the sort of the
    /// addressed subterm.
    pub fn replace_at(&self, sig: &Signature, path: &[usize], repl: Term) -> Result<Term> {
        let old = self.subterm_at(path)?;
        let expected = sig.sort_of(old)?;
        let found = sig.sort_of(&repl)?;
        if expected != found {
            return Err(KernelError::SortMismatch { expected, found });
        }
        self.replace_at_unchecked(path, repl)
    }

    /// One-way matching: binds variables of `self` (the pattern) only.
    /// Repeated pattern variables must match identical subterms.
    pub fn matches(&self, sig: &Signature, subject: &Term) -> Option<Subst> {
        let mut s = Subst::new();
        if self.match_into(sig, subject, &mut s) {
            Some(s)
        } else {
            None
        }
    }

    pub fn match_into(&self, sig: &Signature, subject: &Term, s: &mut Subst) -> bool {
        match self {
            Term::Var { name, sort } => {
                match sig.head_sort(subject) {
                    Ok(ss) if &ss == sort => {}
                    _ => return false,
                }
                match s.get(name) {
                    Some(bound) => bound == subject,
                    None => {
                        s.insert(name.clone(), subject.clone());
                        true
                    }
                }
            }
            Term::App { sym, args } => match subject {
                Term::App {
                    sym: ssym,
                    args: sargs,
                } if sym == ssym && args.len() == sargs.len() => args
                    .iter()
                    .zip(sargs)
                    .all(|(p, t)| p.match_into(sig, t, s)),
                _ => false,
            },
        }
    }

    /// Whether some instance of `subject` could match `pattern`: false only
    /// on a definite constructor clash. Subject variables and
    /// function-headed subterms may evaluate to anything.
    pub fn may_match(sig: &Signature, pattern: &Term, subject: &Term) -> bool {
        match (pattern, subject) {
            (Term::Var { .. }, _) => true,
            (_, Term::Var { .. }) => true,
            (Term::App { sym: p, args: pa }, Term::App { sym: s, args: sa }) => {
                if p == s && pa.len() == sa.len() {
                    pa.iter().zip(sa).all(|(x, y)| Term::may_match(sig, x, y))
                } else {
                    !sig.is_constructor(s)
                }
            }
        }
    }

    /// Strict subterm test (proper subterm, not equal).
    pub fn is_strict_subterm_of(&self, other: &Term) -> bool {
        other
            .args()
            .iter()
            .any(|a| a == self || self.is_strict_subterm_of(a))
    }
}

/// Total order used for ordered (permutative) rewriting: smaller size
/// first; among equal sizes, symbol name, then arguments compared with
/// larger arguments first so constructor-headed subterms drift to the
/// left, toward the recursion positions of most definitions.
pub fn term_order(a: &Term, b: &Term) -> Ordering {
    a.size().cmp(&b.size()).then_with(|| same_size_order(a, b))
}

fn same_size_order(a: &Term, b: &Term) -> Ordering {
    match (a, b) {
        (Term::App { .. }, Term::Var { .. }) => Ordering::Less,
        (Term::Var { .. }, Term::App { .. }) => Ordering::Greater,
        (Term::Var { name: x, .. }, Term::Var { name: y, .. }) => x.cmp(y),
        (Term::App { sym: f, args: xs }, Term::App { sym: g, args: ys }) => {
            f.cmp(g).then_with(|| xs.len().cmp(&ys.len())).then_with(|| {
                for (x, y) in xs.iter().zip(ys) {
                    let o = y.size().cmp(&x.size()).then_with(|| same_size_order(x, y));
                    if o != Ordering::Equal {
                        return o;
                    }
                }
                Ordering::Equal
            })
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var { name, .. } => write!(f, "{name}"),
            Term::App { sym, args } if args.is_empty() => write!(f, "{sym}"),
            Term::App { sym, args } => {
                write!(f, "({sym}")?;
                for a in args {
                    write!(f, " {a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
