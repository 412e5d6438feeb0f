//! Self-contained problem files: datatypes, equational function
//! definitions and a single goal, written as s-expressions.
//!
//! ```text
//! (datatype Nat (Z) (S Nat))
//! (fun add ((Nat Nat) Nat)
//!   ((add Z m) m)
//!   ((add (S n) m) (S (add n m))))
//! (goal (forall ((n Nat)) (even (add n n))))
//! ```

use crate::kernel::{
    Formula, Ident, Prop, Signature, Sort, SymbolInfo, SymbolKind, Term,
};
use crate::sexpr::{read_all, Loc, SExpr};
use indexmap::IndexMap;
use std::collections::{HashMap, HashSet};
use std::fmt::{self, Write as _};
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DiagCode {
    Lexical,
    Syntax,
    /// Arity or sort errors, including unbound variables.
    Sort,
    NonStructural,
    Duplicate,
    MissingGoal,
    /// Pattern-shape violations: non-linear or function-headed patterns.
    Pattern,
    Uninhabited,
}

impl DiagCode {
    pub fn code(self) -> &'static str {
        match self {
            DiagCode::Lexical => "E001",
            DiagCode::Syntax => "E002",
            DiagCode::Sort => "E003",
            DiagCode::NonStructural => "E004",
            DiagCode::Duplicate => "E005",
            DiagCode::MissingGoal => "E006",
            DiagCode::Pattern => "E007",
            DiagCode::Uninhabited => "E008",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{loc}: error[{}]: {message}", code.code())]
pub struct Diagnostic {
    pub code: DiagCode,
    pub loc: Loc,
    pub message: String,
}

fn diag<T>(code: DiagCode, loc: Loc, message: impl Into<String>) -> Result<T, Diagnostic> {
    Err(Diagnostic {
        code,
        loc,
        message: message.into(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DatatypeDecl {
    pub sort: Sort,
    pub constructors: Vec<(Ident, Vec<Sort>)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Equation {
    pub lhs: Term,
    pub rhs: Term,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunctionDef {
    pub name: Ident,
    pub args: Vec<Sort>,
    pub result: Sort,
    /// Ordered; the first matching equation applies.
    pub equations: Vec<Equation>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Theory {
    pub sig: Signature,
    /// User datatypes in declaration order (the built-in `Bool` is not listed).
    pub datatypes: Vec<DatatypeDecl>,
    pub functions: IndexMap<Ident, FunctionDef>,
}

impl Theory {
    pub fn function(&self, name: &str) -> Option<&FunctionDef> {
        self.functions.get(name)
    }

    /// Argument positions on which some equation of `f` pattern-matches
    /// with a constructor.
    pub fn matching_positions(&self, f: &str) -> Vec<usize> {
        let Some(def) = self.function(f) else {
            return vec![];
        };
        (0..def.args.len())
            .filter(|&i| def.equations.iter().any(|e| !e.lhs.args()[i].is_var()))
            .collect()
    }

    /// Functions called in the body of `f`, in order of first appearance.
    pub fn callees(&self, f: &str) -> Vec<Ident> {
        let mut out = Vec::new();
        if let Some(def) = self.function(f) {
            for eq in &def.equations {
                collect_fun_syms(&self.sig, &eq.rhs, &mut out);
            }
        }
        out
    }
}

pub(crate) fn collect_fun_syms(sig: &Signature, t: &Term, out: &mut Vec<Ident>) {
    if let Term::App { sym, args } = t {
        if sig.is_function(sym) && !out.contains(sym) {
            out.push(sym.clone());
        }
        for a in args {
            collect_fun_syms(sig, a, out);
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Problem {
    pub name: String,
    pub theory: Theory,
    pub goal: Formula,
}

struct Parser {
    sig: Signature,
}

/// Variable scope for one equation or formula.
#[derive(Default)]
struct Scope {
    vars: HashMap<String, Sort>,
    /// When set, unknown identifiers become fresh pattern variables.
    binding: bool,
}

impl Parser {
    fn ident<'a>(&self, e: &'a SExpr, what: &str) -> Result<&'a str, Diagnostic> {
        match e.as_atom() {
            Some(a) if a.starts_with(|c: char| c.is_ascii_alphabetic() || c == '_') => Ok(a),
            _ => diag(DiagCode::Syntax, e.loc(), format!("expected {what}")),
        }
    }

    fn sort(&self, e: &SExpr) -> Result<Sort, Diagnostic> {
        let name = self.ident(e, "a sort name")?;
        let s = Sort::new(name);
        if !self.sig.sorts.contains_key(&s) {
            return diag(DiagCode::Sort, e.loc(), format!("undeclared sort `{name}`"));
        }
        Ok(s)
    }

    fn term(&self, e: &SExpr, expected: Option<&Sort>, scope: &mut Scope) -> Result<Term, Diagnostic> {
        let (head, args, loc) = match e {
            SExpr::Atom(a, loc) => (a.as_str(), &[][..], *loc),
            SExpr::List(items, loc) => match items.split_first() {
                Some((h, rest)) => (self.ident(h, "a function or constructor")?, rest, *loc),
                None => return diag(DiagCode::Syntax, *loc, "empty application"),
            },
        };
        if !head.starts_with(|c: char| c.is_ascii_alphabetic() || c == '_') {
            return diag(DiagCode::Syntax, loc, format!("`{head}` is not an identifier"));
        }
        let check = |found: &Sort| -> Result<(), Diagnostic> {
            match expected {
                Some(exp) if exp != found => diag(
                    DiagCode::Sort,
                    loc,
                    format!("expected sort {exp}, found {found}"),
                ),
                _ => Ok(()),
            }
        };
        if let Some(info) = self.sig.get(head) {
            if info.args.len() != args.len() {
                return diag(
                    DiagCode::Sort,
                    loc,
                    format!(
                        "`{head}` expects {} arguments, got {}",
                        info.args.len(),
                        args.len()
                    ),
                );
            }
            check(&info.result)?;
            let args = args
                .iter()
                .zip(&info.args)
                .map(|(a, s)| self.term(a, Some(s), scope))
                .collect::<Result<_, _>>()?;
            return Ok(Term::app(head, args));
        }
        if matches!(e, SExpr::List(..)) {
            return diag(DiagCode::Sort, loc, format!("unknown function `{head}`"));
        }
        if let Some(s) = scope.vars.get(head) {
            if scope.binding {
                return diag(
                    DiagCode::Pattern,
                    loc,
                    format!("variable `{head}` repeated in pattern"),
                );
            }
            let s = s.clone();
            check(&s)?;
            return Ok(Term::var(head, &s));
        }
        if !scope.binding {
            return diag(DiagCode::Sort, loc, format!("unbound variable `{head}`"));
        }
        let Some(s) = expected else {
            return diag(DiagCode::Sort, loc, format!("cannot infer the sort of `{head}`"));
        };
        scope.vars.insert(head.to_string(), s.clone());
        Ok(Term::var(head, s))
    }

    fn body(&self, e: &SExpr, scope: &mut Scope, top: bool) -> Result<Prop, Diagnostic> {
        if let Some(args) = e.tagged("=") {
            let [l, r] = args else {
                return diag(DiagCode::Syntax, e.loc(), "`=` takes two terms");
            };
            let lt = self.term(l, None, scope)?;
            let ls = self.sig.sort_of(&lt).expect("parsed terms are well-sorted");
            let rt = self.term(r, Some(&ls), scope)?;
            return Ok(Prop::Eq(lt, rt));
        }
        if let Some(args) = e.tagged("=>") {
            if args.len() < 2 || !top {
                return diag(
                    DiagCode::Syntax,
                    e.loc(),
                    "`=>` needs hypotheses and a conclusion and may not be nested",
                );
            }
            let (concl, hyps) = args.split_last().unwrap();
            let hyps = hyps
                .iter()
                .map(|h| {
                    let p = self.body(h, scope, false)?;
                    match p {
                        Prop::Eq(..) | Prop::Atom(_) => Ok(p),
                        _ => diag(
                            DiagCode::Syntax,
                            h.loc(),
                            "hypotheses must be equations or boolean terms",
                        ),
                    }
                })
                .collect::<Result<_, _>>()?;
            return Ok(Prop::Implies(hyps, Box::new(self.body(concl, scope, false)?)));
        }
        for (kw, is_or) in [("or", true), ("and", false)] {
            if let Some(args) = e.tagged(kw) {
                if args.is_empty() {
                    return diag(DiagCode::Syntax, e.loc(), format!("`{kw}` needs arguments"));
                }
                let ps = args
                    .iter()
                    .map(|a| self.body(a, scope, false))
                    .collect::<Result<Vec<_>, _>>()?;
                return Ok(if is_or { Prop::Or(ps) } else { Prop::And(ps) });
            }
        }
        if e.tagged("forall").is_some() {
            return diag(DiagCode::Syntax, e.loc(), "nested quantifiers are not supported");
        }
        Ok(Prop::Atom(self.term(e, Some(&Sort::bool()), scope)?))
    }

    fn formula(&self, e: &SExpr) -> Result<Formula, Diagnostic> {
        let mut scope = Scope::default();
        if let Some(args) = e.tagged("forall") {
            let [binders, body] = args else {
                return diag(DiagCode::Syntax, e.loc(), "malformed `forall`");
            };
            let mut vars = Vec::new();
            for b in binders.as_list().unwrap_or(&[]) {
                let [n, s] = b.as_list().unwrap_or(&[]) else {
                    return diag(DiagCode::Syntax, b.loc(), "binder must be `(NAME SORT)`");
                };
                let name = self.ident(n, "a variable name")?;
                if self.sig.get(name).is_some() || scope.vars.contains_key(name) {
                    return diag(DiagCode::Duplicate, n.loc(), format!("`{name}` already bound"));
                }
                let sort = self.sort(s)?;
                scope.vars.insert(name.to_string(), sort.clone());
                vars.push((Ident::from(name), sort));
            }
            if vars.is_empty() {
                return diag(DiagCode::Syntax, binders.loc(), "empty binder list");
            }
            let body = self.body(body, &mut scope, true)?;
            return Ok(Formula { vars, body });
        }
        Ok(Formula {
            vars: vec![],
            body: self.body(e, &mut scope, true)?,
        })
    }
}

/// Parses and fully validates a problem file.
pub fn parse_problem(text: &str, name: &str) -> Result<Problem, Diagnostic> {
    let forms = read_all(text).map_err(|e| Diagnostic {
        code: DiagCode::Lexical,
        loc: e.loc(),
        message: e.to_string(),
    })?;
    let mut p = Parser {
        sig: Signature::new(),
    };

    // Pass 1: sorts.
    for f in &forms {
        if let Some(args) = f.tagged("datatype") {
            let Some(name) = args.first() else {
                return diag(DiagCode::Syntax, f.loc(), "datatype needs a name");
            };
            let name = p.ident(name, "a sort name")?;
            let s = Sort::new(name);
            if p.sig.sorts.contains_key(&s) {
                return diag(DiagCode::Duplicate, f.loc(), format!("sort `{name}` declared twice"));
            }
            p.sig.sorts.insert(s, vec![]);
        }
    }

    // Pass 2: constructor and function signatures.
    let mut datatypes = Vec::new();
    let mut fun_forms = Vec::new();
    let mut goal_form = None;
    for f in &forms {
        if let Some(args) = f.tagged("datatype") {
            let sort = Sort::new(p.ident(&args[0], "a sort name")?);
            if args.len() < 2 {
                return diag(DiagCode::Syntax, f.loc(), "datatype needs constructors");
            }
            let mut ctors = Vec::new();
            for c in &args[1..] {
                let Some([cn, cargs @ ..]) = c.as_list() else {
                    return diag(DiagCode::Syntax, c.loc(), "constructor must be `(NAME SORT*)`");
                };
                let cname = p.ident(cn, "a constructor name")?;
                if p.sig.get(cname).is_some() {
                    return diag(DiagCode::Duplicate, cn.loc(), format!("symbol `{cname}` declared twice"));
                }
                let cargs = cargs.iter().map(|s| p.sort(s)).collect::<Result<Vec<_>, _>>()?;
                p.sig.symbols.insert(
                    Ident::from(cname),
                    SymbolInfo {
                        kind: SymbolKind::Constructor,
                        args: cargs.clone(),
                        result: sort.clone(),
                    },
                );
                p.sig.sorts[&sort].push(Ident::from(cname));
                ctors.push((Ident::from(cname), cargs));
            }
            datatypes.push(DatatypeDecl {
                sort,
                constructors: ctors,
            });
        } else if let Some(args) = f.tagged("fun") {
            let [name, sig, eqs @ ..] = args else {
                return diag(DiagCode::Syntax, f.loc(), "malformed `fun`");
            };
            let fname = p.ident(name, "a function name")?;
            if p.sig.get(fname).is_some() {
                return diag(DiagCode::Duplicate, name.loc(), format!("symbol `{fname}` declared twice"));
            }
            let Some([arg_sorts, result]) = sig.as_list() else {
                return diag(DiagCode::Syntax, sig.loc(), "signature must be `((SORT*) SORT)`");
            };
            let Some(arg_sorts) = arg_sorts.as_list() else {
                return diag(DiagCode::Syntax, arg_sorts.loc(), "argument sorts must be a list");
            };
            let args = arg_sorts.iter().map(|s| p.sort(s)).collect::<Result<Vec<_>, _>>()?;
            let result = p.sort(result)?;
            if eqs.is_empty() {
                return diag(DiagCode::Syntax, f.loc(), format!("`{fname}` has no equations"));
            }
            p.sig.symbols.insert(
                Ident::from(fname),
                SymbolInfo {
                    kind: SymbolKind::Function,
                    args,
                    result,
                },
            );
            fun_forms.push((Ident::from(fname), eqs, f.loc()));
        } else if let Some(args) = f.tagged("goal") {
            if goal_form.is_some() {
                return diag(DiagCode::Duplicate, f.loc(), "more than one goal");
            }
            let [g] = args else {
                return diag(DiagCode::Syntax, f.loc(), "`goal` takes one formula");
            };
            goal_form = Some(g);
        } else {
            return diag(DiagCode::Syntax, f.loc(), "expected `datatype`, `fun` or `goal`");
        }
    }

    check_inhabited(&datatypes, &forms)?;

    // Pass 3: equations.
    let mut functions = IndexMap::new();
    for (fname, eqs, _) in &fun_forms {
        let info = p.sig.get(fname).unwrap().clone();
        let mut equations = Vec::new();
        for eq in eqs.iter() {
            let Some([lhs, rhs]) = eq.as_list() else {
                return diag(DiagCode::Syntax, eq.loc(), "equation must be `(PATTERN TERM)`");
            };
            let mut scope = Scope {
                vars: HashMap::new(),
                binding: true,
            };
            let l = p.term(lhs, Some(&info.result), &mut scope)?;
            if l.head() != Some(&**fname) {
                return diag(
                    DiagCode::Pattern,
                    lhs.loc(),
                    format!("equation for `{fname}` must start with `{fname}`"),
                );
            }
            for a in l.args() {
                if let Some(bad) = find_function(&p.sig, a) {
                    return diag(
                        DiagCode::Pattern,
                        lhs.loc(),
                        format!("function `{bad}` may not appear in a pattern"),
                    );
                }
            }
            scope.binding = false;
            let r = p.term(rhs, Some(&info.result), &mut scope)?;
            equations.push(Equation { lhs: l, rhs: r });
        }
        functions.insert(
            fname.clone(),
            FunctionDef {
                name: fname.clone(),
                args: info.args.clone(),
                result: info.result.clone(),
                equations,
            },
        );
    }

    let theory = Theory {
        sig: p.sig.clone(),
        datatypes,
        functions,
    };
    for (fname, _, loc) in &fun_forms {
        check_structural(&theory, fname, *loc)?;
    }

    let Some(goal_form) = goal_form else {
        return diag(DiagCode::MissingGoal, Loc { line: 1, col: 1 }, "no `goal` in file");
    };
    let goal = p.formula(goal_form)?;
    Ok(Problem {
        name: name.to_string(),
        theory,
        goal,
    })
}

fn find_function(sig: &Signature, t: &Term) -> Option<Ident> {
    match t {
        Term::Var { .. } => None,
        Term::App { sym, args } => {
            if sig.is_function(sym) {
                Some(sym.clone())
            } else {
                args.iter().find_map(|a| find_function(sig, a))
            }
        }
    }
}

fn check_inhabited(dts: &[DatatypeDecl], forms: &[SExpr]) -> Result<(), Diagnostic> {
    let mut inhabited: HashSet<Sort> = HashSet::from([Sort::bool()]);
    loop {
        let before = inhabited.len();
        for d in dts {
            if d.constructors
                .iter()
                .any(|(_, args)| args.iter().all(|a| inhabited.contains(a)))
            {
                inhabited.insert(d.sort.clone());
            }
        }
        if inhabited.len() == before {
            break;
        }
    }
    for d in dts {
        if !inhabited.contains(&d.sort) {
            let loc = forms
                .iter()
                .find(|f| {
                    f.tagged("datatype")
                        .and_then(|a| a.first())
                        .and_then(SExpr::as_atom)
                        == Some(d.sort.name())
                })
                .map(SExpr::loc)
                .unwrap_or_default();
            return diag(
                DiagCode::Uninhabited,
                loc,
                format!("datatype `{}` has no finite values (needs a base constructor)", d.sort),
            );
        }
    }
    Ok(())
}

/// Calls to functions of the same call-graph component, as
/// (lhs arguments of the caller, arguments of the call).
fn recursive_calls(theory: &Theory, comp: &HashSet<Ident>) -> Vec<(Vec<Term>, Vec<Term>)> {
    fn walk(t: &Term, comp: &HashSet<Ident>, lhs: &[Term], out: &mut Vec<(Vec<Term>, Vec<Term>)>) {
        if let Term::App { sym, args } = t {
            if comp.contains(sym) {
                out.push((lhs.to_vec(), args.clone()));
            }
            for a in args {
                walk(a, comp, lhs, out);
            }
        }
    }
    let mut out = Vec::new();
    for f in comp {
        for eq in &theory.functions[f].equations {
            walk(&eq.rhs, comp, eq.lhs.args(), &mut out);
        }
    }
    out
}

fn reaches(theory: &Theory, from: &str, to: &str) -> bool {
    let mut seen = HashSet::new();
    let mut stack = theory.callees(from);
    while let Some(g) = stack.pop() {
        if &*g == to {
            return true;
        }
        if seen.insert(g.clone()) {
            stack.extend(theory.callees(&g));
        }
    }
    false
}

/// Termination check: within each recursive component there must be a
/// lexicographic sequence of argument positions such that every call
/// leaves the earlier positions unchanged and passes a strict subterm of
/// the caller's pattern at the next one.
fn check_structural(theory: &Theory, f: &Ident, loc: Loc) -> Result<(), Diagnostic> {
    if !reaches(theory, f, f) {
        return Ok(());
    }
    let comp: HashSet<Ident> = theory
        .functions
        .keys()
        .filter(|g| *g == f || (reaches(theory, f, g) && reaches(theory, g, f)))
        .cloned()
        .collect();
    let arity = comp
        .iter()
        .map(|g| theory.functions[g].args.len())
        .min()
        .unwrap_or(0);
    let mut calls = recursive_calls(theory, &comp);
    let mut used = vec![false; arity];
    while !calls.is_empty() {
        let pick = (0..arity).filter(|&i| !used[i]).find(|&i| {
            calls.iter().all(|(l, c)| c[i] == l[i] || c[i].is_strict_subterm_of(&l[i]))
                && calls.iter().any(|(l, c)| c[i].is_strict_subterm_of(&l[i]))
        });
        let Some(i) = pick else {
            return diag(
                DiagCode::NonStructural,
                loc,
                format!("recursion in `{f}` is not structural on any argument"),
            );
        };
        used[i] = true;
        calls.retain(|(l, c)| !c[i].is_strict_subterm_of(&l[i]));
    }
    Ok(())
}

/// Renders a problem in the concrete syntax accepted by [`parse_problem`].
pub fn pretty_problem(p: &Problem) -> String {
    let mut out = String::new();
    for d in &p.theory.datatypes {
        write!(out, "(datatype {}", d.sort).unwrap();
        for (c, args) in &d.constructors {
            write!(out, " ({c}").unwrap();
            for a in args {
                write!(out, " {a}").unwrap();
            }
            out.push(')');
        }
        out.push_str(")\n");
    }
    for f in p.theory.functions.values() {
        write!(out, "(fun {} ((", f.name).unwrap();
        let sorts: Vec<String> = f.args.iter().map(|s| s.to_string()).collect();
        write!(out, "{}) {})", sorts.join(" "), f.result).unwrap();
        for eq in &f.equations {
            write!(out, "\n  ({} {})", eq.lhs, eq.rhs).unwrap();
        }
        out.push_str(")\n");
    }
    writeln!(out, "(goal {})", p.goal).unwrap();
    out
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&pretty_problem(self))
    }
}

/// Parses a term against a theory; free identifiers take their sorts from
/// `vars`.
pub fn parse_term(theory: &Theory, text: &str, vars: &[(&str, Sort)]) -> Result<Term, Diagnostic> {
    let forms = read_all(text).map_err(|e| Diagnostic {
        code: DiagCode::Lexical,
        loc: e.loc(),
        message: e.to_string(),
    })?;
    let [e] = forms.as_slice() else {
        return diag(DiagCode::Syntax, Loc::default(), "expected exactly one term");
    };
    let p = Parser {
        sig: theory.sig.clone(),
    };
    let mut scope = Scope {
        vars: vars.iter().map(|(n, s)| (n.to_string(), s.clone())).collect(),
        binding: false,
    };
    p.term(e, None, &mut scope)
}

/// Parses a closed formula against a theory.
pub fn parse_formula(theory: &Theory, text: &str) -> Result<Formula, Diagnostic> {
    let forms = read_all(text).map_err(|e| Diagnostic {
        code: DiagCode::Lexical,
        loc: e.loc(),
        message: e.to_string(),
    })?;
    let [e] = forms.as_slice() else {
        return diag(DiagCode::Syntax, Loc::default(), "expected exactly one formula");
    };
    parse_formula_sexpr(&theory.sig, e)
}

pub(crate) fn parse_formula_sexpr(sig: &Signature, e: &SExpr) -> Result<Formula, Diagnostic> {
    Parser { sig: sig.clone() }.formula(e)
}

/// Parses a term where every variable's sort is inferred from its position
/// (`expected` gives the sort of the whole term).
pub(crate) fn parse_term_inferred(
    sig: &Signature,
    e: &SExpr,
    expected: &Sort,
) -> Result<Term, Diagnostic> {
    let p = Parser { sig: sig.clone() };
    let mut scope = Scope {
        vars: HashMap::new(),
        binding: true,
    };
    p.term_inferred(e, expected, &mut scope)
}

impl Parser {
    // Like `term` with binding on, but repeated variables are allowed as
    // long as their sorts agree.
    fn term_inferred(&self, e: &SExpr, expected: &Sort, scope: &mut Scope) -> Result<Term, Diagnostic> {
        if let Some(a) = e.as_atom() {
            if self.sig.get(a).is_none() {
                self.ident(e, "a variable")?;
                if let Some(s) = scope.vars.get(a) {
                    if s != expected {
                        return diag(DiagCode::Sort, e.loc(), format!("`{a}` used at two sorts"));
                    }
                }
                scope.vars.insert(a.to_string(), expected.clone());
                return Ok(Term::var(a, expected));
            }
        }
        let (head, args) = match e {
            SExpr::Atom(a, _) => (a.as_str(), &[][..]),
            SExpr::List(items, loc) => match items.split_first() {
                Some((h, rest)) => (self.ident(h, "a symbol")?, rest),
                None => return diag(DiagCode::Syntax, *loc, "empty application"),
            },
        };
        let Some(info) = self.sig.get(head) else {
            return diag(DiagCode::Sort, e.loc(), format!("unknown symbol `{head}`"));
        };
        if info.args.len() != args.len() || &info.result != expected {
            return diag(DiagCode::Sort, e.loc(), format!("ill-sorted use of `{head}`"));
        }
        let args = args
            .iter()
            .zip(info.args.clone())
            .map(|(a, s)| self.term_inferred(a, &s, scope))
            .collect::<Result<_, _>>()?;
        Ok(Term::app(head, args))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub const EVEN_ADD: &str = include_str!("../corpus/even_add.tbc");

    #[test]
    fn parses_even_add() {
        let p = parse_problem(EVEN_ADD, "even_add").unwrap();
        assert_eq!(
            p.theory.functions.keys().map(|k| k.to_string()).collect::<Vec<_>>(),
            vec!["add", "even"]
        );
        assert_eq!(p.goal.to_string(), "(forall ((n Nat)) (even (add n n)))");
        assert!(matches!(p.goal.body, Prop::Atom(_)));
        assert_eq!(p.theory.matching_positions("add"), vec![0]);
        assert_eq!(p.theory.matching_positions("even"), vec![0]);
    }

    #[test]
    fn unbound_rhs_variable() {
        let src = "(datatype Nat (Z) (S Nat))
(fun f ((Nat) Nat) ((f x) y))
(goal (= Z Z))";
        let e = parse_problem(src, "bad").unwrap_err();
        assert_eq!(e.code, DiagCode::Sort);
        assert_eq!(e.loc, Loc { line: 2, col: 27 });
    }

    #[test]
    fn non_structural_recursion_rejected() {
        let src = "(datatype Nat (Z) (S Nat))
(fun loop ((Nat) Nat) ((loop x) (loop x)))
(goal (= Z Z))";
        assert_eq!(parse_problem(src, "bad").unwrap_err().code, DiagCode::NonStructural);
        let swap = "(datatype Nat (Z) (S Nat))
(fun g ((Nat Nat) Nat) ((g (S x) y) (g x (S y))) ((g Z (S y)) (g (S Z) y)) ((g Z Z) Z))
(goal (= Z Z))";
        assert_eq!(parse_problem(swap, "bad").unwrap_err().code, DiagCode::NonStructural);
    }

    #[test]
    fn lexicographic_recursion_accepted() {
        let src = "(datatype Nat (Z) (S Nat))
(fun ack ((Nat Nat) Nat)
  ((ack Z n) (S n))
  ((ack (S m) Z) (ack m (S Z)))
  ((ack (S m) (S n)) (ack m (ack (S m) n))))
(goal (= (ack Z Z) (S Z)))";
        assert!(parse_problem(src, "ack").is_ok());
    }

    #[test]
    fn mutual_recursion_with_common_measure() {
        let src = "(datatype Nat (Z) (S Nat))
(fun ev ((Nat) Bool) ((ev Z) true) ((ev (S n)) (od n)))
(fun od ((Nat) Bool) ((od Z) false) ((od (S n)) (ev n)))
(goal (forall ((n Nat)) (ev (S (S n)))))";
        assert!(parse_problem(src, "evod").is_ok());
    }

    #[test]
    fn diagnostics_are_distinct() {
        let lex = parse_problem("(datatype Nat (Z) (S Nat)) #", "x").unwrap_err();
        assert_eq!(lex.code, DiagCode::Lexical);
        let dup = parse_problem("(datatype Nat (Z) (Z Nat)) (goal (= Z Z))", "x").unwrap_err();
        assert_eq!(dup.code, DiagCode::Duplicate);
        let missing = parse_problem("(datatype Nat (Z) (S Nat))", "x").unwrap_err();
        assert_eq!(missing.code, DiagCode::MissingGoal);
        let arity = parse_problem("(datatype Nat (Z) (S Nat)) (goal (= (S Z Z) Z))", "x").unwrap_err();
        assert_eq!(arity.code, DiagCode::Sort);
        let nonlinear = parse_problem(
            "(datatype Nat (Z) (S Nat)) (fun f ((Nat Nat) Nat) ((f x x) x)) (goal (= Z Z))",
            "x",
        )
        .unwrap_err();
        assert_eq!(nonlinear.code, DiagCode::Pattern);
        let empty = parse_problem("(datatype T (C T)) (goal (= Z Z))", "x").unwrap_err();
        assert_eq!(empty.code, DiagCode::Uninhabited);
        let free = parse_problem("(datatype Nat (Z) (S Nat)) (goal (= x Z))", "x").unwrap_err();
        assert_eq!(free.code, DiagCode::Sort);
    }

    #[test]
    fn pretty_print_round_trip() {
        let p = parse_problem(EVEN_ADD, "even_add").unwrap();
        let printed = pretty_problem(&p);
        assert_eq!(parse_problem(&printed, "even_add").unwrap(), p);
        let t = parse_term(&p.theory, "(S (S Z))", &[]).unwrap();
        assert_eq!(t.to_string(), "(S (S Z))");
    }

    #[test]
    fn prints_commutativity_statement() {
        let p = parse_problem(EVEN_ADD, "even_add").unwrap();
        let f = parse_formula(
            &p.theory,
            "(forall ((var_1 Nat) (var_2 Nat)) (= (add var_1 var_2) (add var_2 var_1)))",
        )
        .unwrap();
        assert_eq!(
            f.to_string(),
            "(forall ((var_1 Nat) (var_2 Nat)) (= (add var_1 var_2) (add var_2 var_1)))"
        );
    }
}
