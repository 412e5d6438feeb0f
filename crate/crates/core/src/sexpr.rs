//! S-expression reader shared by problem files and proof bundles.

use std::fmt;
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Loc {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Loc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SExpr {
    Atom(String, Loc),
    List(Vec<SExpr>, Loc),
}

impl SExpr {
    pub fn loc(&self) -> Loc {
        match self {
            SExpr::Atom(_, l) | SExpr::List(_, l) => *l,
        }
    }

    pub fn as_atom(&self) -> Option<&str> {
        match self {
            SExpr::Atom(s, _) => Some(s),
            SExpr::List(..) => None,
        }
    }

    pub fn as_list(&self) -> Option<&[SExpr]> {
        match self {
            SExpr::List(v, _) => Some(v),
            SExpr::Atom(..) => None,
        }
    }

    /// A list whose first element is the given keyword atom.
    pub fn tagged(&self, head: &str) -> Option<&[SExpr]> {
        match self.as_list() {
            Some([SExpr::Atom(h, _), rest @ ..]) if h == head => Some(rest),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReadError {
    #[error("{loc}: unexpected character `{ch}`")]
    BadChar { ch: char, loc: Loc },
    #[error("{loc}: unbalanced `)`")]
    Unbalanced { loc: Loc },
    #[error("{loc}: unclosed `(`")]
    Unclosed { loc: Loc },
}

impl ReadError {
    pub fn loc(&self) -> Loc {
        match self {
            ReadError::BadChar { loc, .. }
            | ReadError::Unbalanced { loc }
            | ReadError::Unclosed { loc } => *loc,
        }
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

/// Reads every top-level expression. Identifiers follow
/// `[A-Za-z_][A-Za-z0-9_']*`; the operator atoms `=`, `=>`, `->`, `<-` and
/// unsigned integers are also accepted. `;` starts a line comment.
pub fn read_all(src: &str) -> Result<Vec<SExpr>, ReadError> {
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0;
    let (mut line, mut col) = (1, 1);
    let mut stack: Vec<(Vec<SExpr>, Loc)> = Vec::new();
    let mut top = Vec::new();

    macro_rules! bump {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }

    while i < chars.len() {
        let c = chars[i];
        let loc = Loc { line, col };
        if c.is_whitespace() {
            bump!();
        } else if c == ';' {
            while i < chars.len() && chars[i] != '\n' {
                bump!();
            }
        } else if c == '(' {
            stack.push((Vec::new(), loc));
            bump!();
        } else if c == ')' {
            let (items, open) = stack.pop().ok_or(ReadError::Unbalanced { loc })?;
            let e = SExpr::List(items, open);
            match stack.last_mut() {
                Some((parent, _)) => parent.push(e),
                None => top.push(e),
            }
            bump!();
        } else {
            let start = i;
            if is_ident_start(c) {
                while i < chars.len() && is_ident_char(chars[i]) {
                    bump!();
                }
            } else if c.is_ascii_digit() {
                while i < chars.len() && chars[i].is_ascii_digit() {
                    bump!();
                }
            } else if c == '=' {
                bump!();
                if i < chars.len() && chars[i] == '>' {
                    bump!();
                }
            } else if (c == '-' && chars.get(i + 1) == Some(&'>'))
                || (c == '<' && chars.get(i + 1) == Some(&'-'))
            {
                bump!();
                bump!();
            } else {
                return Err(ReadError::BadChar { ch: c, loc });
            }
            if i < chars.len() && !(chars[i].is_whitespace() || "();".contains(chars[i])) {
                return Err(ReadError::BadChar {
                    ch: chars[i],
                    loc: Loc { line, col },
                });
            }
            let atom = SExpr::Atom(chars[start..i].iter().collect(), loc);
            match stack.last_mut() {
                Some((parent, _)) => parent.push(atom),
                None => top.push(atom),
            }
        }
    }
    if let Some((_, open)) = stack.pop() {
        return Err(ReadError::Unclosed { loc: open });
    }
    Ok(top)
}
