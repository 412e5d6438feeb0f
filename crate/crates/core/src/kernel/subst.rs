use super::{Ident, KernelError, Result, Signature, Term};
use std::collections::BTreeMap;
use std::fmt;

/// Simultaneous substitution from variable names to terms.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct Subst(BTreeMap<Ident, Term>);

impl Subst {
    pub fn new() -> Self {
        Subst(BTreeMap::new())
    }

    pub fn get(&self, name: &str) -> Option<&Term> {
        self.0.get(name)
    }

    pub fn insert(&mut self, name: Ident, t: Term) -> Option<Term> {
        self.0.insert(name, t)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.0.contains_key(name)
    }

    pub fn remove(&mut self, name: &str) -> Option<Term> {
        self.0.remove(name)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Ident, &Term)> {
        self.0.iter()
    }

    pub fn apply(&self, t: &Term) -> Term {
        match t {
            Term::Var { name, .. } => self.0.get(name).cloned().unwrap_or_else(|| t.clone()),
            Term::App { sym, args } => Term::App {
                sym: sym.clone(),
                args: args.iter().map(|a| self.apply(a)).collect(),
            },
        }
    }

    /// Like [`Subst::apply`], but rejects bindings whose sort differs from the
    /// variable they replace.
    pub fn apply_checked(&self, sig: &Signature, t: &Term) -> Result<Term> {
        match t {
            Term::Var { name, sort } => match self.0.get(name) {
                None => Ok(t.clone()),
                Some(r) => {
                    let found = sig.sort_of(r)?;
                    if &found != sort {
                        return Err(KernelError::SortMismatch {
                            expected: sort.clone(),
                            found,
                        });
                    }
                    Ok(r.clone())
                }
            },
            Term::App { sym, args } => Ok(Term::App {
                sym: sym.clone(),
                args: args
                    .iter()
                    .map(|a| self.apply_checked(sig, a))
                    .collect::<Result<_>>()?,
            }),
        }
    }

    /// `self.then(other)` applied to `t` equals `other.apply(&self.apply(t))`.
    pub fn then(&self, other: &Subst) -> Subst {
        let mut out: BTreeMap<Ident, Term> = self
            .0
            .iter()
            .map(|(k, v)| (k.clone(), other.apply(v)))
            .collect();
        for (k, v) in &other.0 {
            out.entry(k.clone()).or_insert_with(|| v.clone());
        }
        Subst(out)
    }
}

impl FromIterator<(Ident, Term)> for Subst {
    fn from_iter<I: IntoIterator<Item = (Ident, Term)>>(iter: I) -> Self {
        Subst(iter.into_iter().collect())
    }
}

impl fmt::Debug for Subst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (k, v)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{k}↦{v}")?;
        }
        f.write_str("}")
    }
}
