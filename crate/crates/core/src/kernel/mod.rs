//! First-order terms, formulas, substitutions and the symbol signature.
//!
//! Everything here is immutable once built and can be shared freely
//! between threads.

mod formula;
mod subst;
mod term;

pub use formula::{Formula, Node, Prop};
pub use subst::Subst;
pub use term::{term_order, Term};

use indexmap::IndexMap;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

/// Interned-ish identifier. Cloning is a refcount bump.
pub type Ident = Arc<str>;

pub const BOOL: &str = "Bool";
pub const TRUE: &str = "true";
pub const FALSE: &str = "false";

/// A monomorphic sort such as `Nat` or `List`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sort(pub Ident);

impl Sort {
    pub fn new(name: &str) -> Self {
        Sort(Arc::from(name))
    }

    pub fn bool() -> Self {
        Sort::new(BOOL)
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A path of child indices; the root is the empty path.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Position(pub Vec<usize>);

impl Position {
    pub fn root() -> Self {
        Position(Vec::new())
    }

    pub fn child(&self, i: usize) -> Self {
        let mut p = self.0.clone();
        p.push(i);
        Position(p)
    }
}

impl From<Vec<usize>> for Position {
    fn from(v: Vec<usize>) -> Self {
        Position(v)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KernelError {
    #[error("invalid position {0:?}")]
    InvalidPosition(Vec<usize>),
    #[error("sort mismatch: expected {expected}, found {found}")]
    SortMismatch { expected: Sort, found: Sort },
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(Ident),
    #[error("symbol `{sym}` expects {expected} arguments, got {found}")]
    Arity {
        sym: Ident,
        expected: usize,
        found: usize,
    },
    #[error("variable `{0}` is not bound")]
    UnboundVar(Ident),
    #[error("position addresses a formula node, not a term")]
    NotATerm,
    #[error("position addresses a term, not a formula node")]
    NotAProp,
}

pub type Result<T> = std::result::Result<T, KernelError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SymbolKind {
    Constructor,
    Function,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolInfo {
    pub kind: SymbolKind,
    pub args: Vec<Sort>,
    pub result: Sort,
}

/// Symbol table: sorts with their constructors, and every symbol's type.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Signature {
    /// Declared sorts in declaration order, each with its constructors.
    pub sorts: IndexMap<Sort, Vec<Ident>>,
    pub symbols: IndexMap<Ident, SymbolInfo>,
}

impl Default for Signature {
    fn default() -> Self {
        Self::new()
    }
}

impl Signature {
    /// A signature holding only the built-in `Bool` sort.
    pub fn new() -> Self {
        let mut sig = Signature {
            sorts: IndexMap::new(),
            symbols: IndexMap::new(),
        };
        sig.sorts
            .insert(Sort::bool(), vec![Arc::from(TRUE), Arc::from(FALSE)]);
        for c in [TRUE, FALSE] {
            sig.symbols.insert(
                Arc::from(c),
                SymbolInfo {
                    kind: SymbolKind::Constructor,
                    args: vec![],
                    result: Sort::bool(),
                },
            );
        }
        sig
    }

    pub fn get(&self, sym: &str) -> Option<&SymbolInfo> {
        self.symbols.get(sym)
    }

    pub fn is_constructor(&self, sym: &str) -> bool {
        matches!(self.get(sym), Some(i) if i.kind == SymbolKind::Constructor)
    }

    pub fn is_function(&self, sym: &str) -> bool {
        matches!(self.get(sym), Some(i) if i.kind == SymbolKind::Function)
    }

    pub fn constructors(&self, sort: &Sort) -> &[Ident] {
        self.sorts.get(sort).map(|v| v.as_slice()).unwrap_or(&[])
    }

    /// Sort of a term, checking arities and argument sorts along the way.
    pub fn sort_of(&self, t: &Term) -> Result<Sort> {
        match t {
            Term::Var { sort, .. } => Ok(sort.clone()),
            Term::App { sym, args } => {
                let info = self
                    .get(sym)
                    .ok_or_else(|| KernelError::UnknownSymbol(sym.clone()))?;
                if info.args.len() != args.len() {
                    return Err(KernelError::Arity {
                        sym: sym.clone(),
                        expected: info.args.len(),
                        found: args.len(),
                    });
                }
                for (a, expected) in args.iter().zip(&info.args) {
                    let found = self.sort_of(a)?;
                    if &found != expected {
                        return Err(KernelError::SortMismatch {
                            expected: expected.clone(),
                            found,
                        });
                    }
                }
                Ok(info.result.clone())
            }
        }
    }

    /// Sort of the root symbol only, without descending into arguments.
    pub fn head_sort(&self, t: &Term) -> Result<Sort> {
        match t {
            Term::Var { sort, .. } => Ok(sort.clone()),
            Term::App { sym, .. } => self
                .get(sym)
                .map(|i| i.result.clone())
                .ok_or_else(|| KernelError::UnknownSymbol(sym.clone())),
        }
    }

    pub fn check_prop(&self, p: &Prop) -> Result<()> {
        match p {
            Prop::Eq(l, r) => {
                let ls = self.sort_of(l)?;
                let rs = self.sort_of(r)?;
                if ls != rs {
                    return Err(KernelError::SortMismatch {
                        expected: ls,
                        found: rs,
                    });
                }
                Ok(())
            }
            Prop::Atom(t) => {
                let s = self.sort_of(t)?;
                if s != Sort::bool() {
                    return Err(KernelError::SortMismatch {
                        expected: Sort::bool(),
                        found: s,
                    });
                }
                Ok(())
            }
            Prop::Implies(hs, c) => {
                for h in hs {
                    self.check_prop(h)?;
                }
                self.check_prop(c)
            }
            Prop::Or(ps) | Prop::And(ps) => ps.iter().try_for_each(|p| self.check_prop(p)),
        }
    }

    /// Well-sortedness plus closedness: every free variable is bound by the binder.
    pub fn check_formula(&self, f: &Formula) -> Result<()> {
        self.check_prop(&f.body)?;
        for (name, sort) in f.body.free_vars() {
            match f.vars.iter().find(|(n, _)| *n == name) {
                None => return Err(KernelError::UnboundVar(name)),
                Some((_, s)) if *s != sort => {
                    return Err(KernelError::SortMismatch {
                        expected: s.clone(),
                        found: sort,
                    })
                }
                _ => {}
            }
        }
        Ok(())
    }
}
