//! Ground terms: the values carried by every atom, element id, attribute
//! value and operation argument.
//!
//! The concrete syntax is the usual ASP ground-term syntax. Rendering is
//! canonical (no whitespace, singleton tuples as `(a,)`) and parsing the
//! rendered text always gives back the same term.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// A ground symbolic term.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Number(i64),
    Constant(String),
    Str(String),
    /// Invariant: `args` is nonempty. Use [`Term::function`] to build one.
    Function(String, Vec<Term>),
    Tuple(Vec<Term>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at position {position}: expected {expected}")]
pub struct SyntaxError {
    pub position: usize,
    pub expected: String,
}

impl Term {
    pub fn number(n: i64) -> Term {
        Term::Number(n)
    }

    pub fn constant(name: impl Into<String>) -> Term {
        Term::Constant(name.into())
    }

    pub fn string(text: impl Into<String>) -> Term {
        Term::Str(text.into())
    }

    /// Builds a function term; an empty argument list gives a constant.
    pub fn function(name: impl Into<String>, args: Vec<Term>) -> Term {
        if args.is_empty() {
            Term::Constant(name.into())
        } else {
            Term::Function(name.into(), args)
        }
    }

    pub fn tuple(args: Vec<Term>) -> Term {
        Term::Tuple(args)
    }

    pub fn bool_const(value: bool) -> Term {
        Term::constant(if value { "true" } else { "false" })
    }

    /// Predicate name of a constant or function term.
    pub fn name(&self) -> Option<&str> {
        match self {
            Term::Constant(n) | Term::Function(n, _) => Some(n),
            _ => None,
        }
    }

    /// Argument list of a function or tuple; empty for everything else.
    pub fn args(&self) -> &[Term] {
        match self {
            Term::Function(_, a) | Term::Tuple(a) => a,
            _ => &[],
        }
    }

    pub fn arity(&self) -> usize {
        self.args().len()
    }

    /// Signature of a term usable as an atom.
    pub fn signature(&self) -> Option<Signature> {
        self.name().map(|n| Signature::new(n, self.arity()))
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Term::Str(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_number(&self) -> Option<i64> {
        match self {
            Term::Number(n) => Some(*n),
            _ => None,
        }
    }

    /// The constants `true` / `false`.
    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Term::Constant(c) if c == "true" => Some(true),
            Term::Constant(c) if c == "false" => Some(false),
            _ => None,
        }
    }

    /// Text without surrounding quotes: string content, digits, or the
    /// canonical rendering for compound terms.
    pub fn unquoted(&self) -> String {
        match self {
            Term::Str(s) => s.clone(),
            other => other.to_string(),
        }
    }

    fn kind_rank(&self) -> u8 {
        match self {
            Term::Number(_) => 0,
            Term::Constant(_) => 1,
            Term::Str(_) => 2,
            Term::Function(..) | Term::Tuple(_) => 3,
        }
    }

    /// Name used when ordering compound terms; tuples sort as the empty name.
    fn compound_name(&self) -> &str {
        match self {
            Term::Function(n, _) => n,
            _ => "",
        }
    }
}

/// Parses a complete ground term; surrounding whitespace is allowed.
pub fn parse_term(text: &str) -> Result<Term, SyntaxError> {
    let mut p = Parser::new(text);
    p.skip_ws();
    if p.at_end() {
        return Err(p.error("a term"));
    }
    let t = p.term()?;
    p.skip_ws();
    if !p.at_end() {
        return Err(p.error("end of input"));
    }
    Ok(t)
}

/// Canonical rendering.
pub fn render_term(t: &Term) -> String {
    t.to_string()
}

pub fn compare_terms(a: &Term, b: &Term) -> Ordering {
    a.cmp(b)
}

pub fn match_signature(t: &Term, sig: &Signature) -> bool {
    match t {
        Term::Constant(n) => sig.arity == 0 && *n == sig.name,
        Term::Function(n, args) => *n == sig.name && args.len() == sig.arity,
        _ => false,
    }
}

impl Ord for Term {
    fn cmp(&self, other: &Self) -> Ordering {
        let rank = self.kind_rank().cmp(&other.kind_rank());
        if rank != Ordering::Equal {
            return rank;
        }
        match (self, other) {
            (Term::Number(a), Term::Number(b)) => a.cmp(b),
            (Term::Constant(a), Term::Constant(b)) => a.cmp(b),
            (Term::Str(a), Term::Str(b)) => a.cmp(b),
            _ => self
                .compound_name()
                .cmp(other.compound_name())
                .then_with(|| self.arity().cmp(&other.arity()))
                .then_with(|| self.args().cmp(other.args())),
        }
    }
}

impl PartialOrd for Term {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn write_args(f: &mut fmt::Formatter<'_>, args: &[Term]) -> fmt::Result {
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        write!(f, "{a}")?;
    }
    Ok(())
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Number(n) => write!(f, "{n}"),
            Term::Constant(c) => f.write_str(c),
            Term::Str(s) => {
                f.write_str("\"")?;
                for ch in s.chars() {
                    match ch {
                        '"' => f.write_str("\\\"")?,
                        '\\' => f.write_str("\\\\")?,
                        '\n' => f.write_str("\\n")?,
                        c => write!(f, "{c}")?,
                    }
                }
                f.write_str("\"")
            }
            Term::Function(name, args) => {
                write!(f, "{name}(")?;
                write_args(f, args)?;
                f.write_str(")")
            }
            Term::Tuple(args) => {
                f.write_str("(")?;
                write_args(f, args)?;
                if args.len() == 1 {
                    f.write_str(",")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl FromStr for Term {
    type Err = SyntaxError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_term(s)
    }
}

/// Returns true for identifiers of the form `_*[a-z][A-Za-z0-9_']*`.
pub fn is_identifier(s: &str) -> bool {
    let rest = s.trim_start_matches('_');
    let mut chars = rest.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Parser { src, pos: 0 }
    }

    fn error(&self, expected: &str) -> SyntaxError {
        SyntaxError {
            position: self.pos,
            expected: expected.to_string(),
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_whitespace()) {
            self.bump();
        }
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn term(&mut self) -> Result<Term, SyntaxError> {
        self.skip_ws();
        match self.peek() {
            Some(c) if c.is_ascii_digit() || c == '-' => self.number(),
            Some('"') => self.string(),
            Some('(') => self.tuple(),
            Some(c) if c == '_' || c.is_ascii_lowercase() => self.symbol(),
            _ => Err(self.error("a term")),
        }
    }

    fn number(&mut self) -> Result<Term, SyntaxError> {
        let start = self.pos;
        if self.peek() == Some('-') {
            self.bump();
            self.skip_ws();
        }
        let digits_start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.bump();
        }
        if self.pos == digits_start {
            return Err(self.error("a digit"));
        }
        let digits = &self.src[digits_start..self.pos];
        let negative = self.src[start..digits_start].starts_with('-');
        let text = if negative {
            format!("-{digits}")
        } else {
            digits.to_string()
        };
        text.parse::<i64>().map(Term::Number).map_err(|_| SyntaxError {
            position: start,
            expected: "an integer in range".into(),
        })
    }

    fn string(&mut self) -> Result<Term, SyntaxError> {
        self.bump();
        let mut out = String::new();
        loop {
            match self.bump() {
                None => return Err(self.error("closing quote")),
                Some('"') => return Ok(Term::Str(out)),
                Some('\\') => match self.bump() {
                    Some('"') => out.push('"'),
                    Some('\\') => out.push('\\'),
                    Some('n') => out.push('\n'),
                    _ => return Err(self.error("escape sequence")),
                },
                Some(c) => out.push(c),
            }
        }
    }

    fn symbol(&mut self) -> Result<Term, SyntaxError> {
        let start = self.pos;
        while self.peek() == Some('_') {
            self.bump();
        }
        match self.peek() {
            Some(c) if c.is_ascii_lowercase() => {}
            _ => return Err(self.error("an identifier")),
        }
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '_' || c == '\'')
        {
            self.bump();
        }
        let name = self.src[start..self.pos].to_string();
        let save = self.pos;
        self.skip_ws();
        if self.peek() == Some('(') {
            self.bump();
            let args = self.arg_list()?;
            if args.is_empty() {
                return Err(self.error("a function argument"));
            }
            Ok(Term::Function(name, args))
        } else {
            self.pos = save;
            Ok(Term::Constant(name))
        }
    }

    /// Parses `t1,...,tn)` after an opening parenthesis.
    fn arg_list(&mut self) -> Result<Vec<Term>, SyntaxError> {
        let mut args = Vec::new();
        if self.eat(')') {
            return Ok(args);
        }
        loop {
            args.push(self.term()?);
            if self.eat(',') {
                continue;
            }
            if self.eat(')') {
                return Ok(args);
            }
            return Err(self.error("',' or ')'"));
        }
    }

    fn tuple(&mut self) -> Result<Term, SyntaxError> {
        self.bump();
        if self.eat(')') {
            return Ok(Term::Tuple(Vec::new()));
        }
        let mut args = vec![self.term()?];
        loop {
            if self.eat(')') {
                // `(t)` is a parenthesized term, not a tuple
                return Ok(if args.len() == 1 {
                    args.pop().unwrap()
                } else {
                    Term::Tuple(args)
                });
            }
            if !self.eat(',') {
                return Err(self.error("',' or ')'"));
            }
            if self.eat(')') {
                return Ok(Term::Tuple(args));
            }
            args.push(self.term()?);
        }
    }
}

/// A predicate signature `name/arity`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Signature {
    pub name: String,
    pub arity: usize,
}

impl Signature {
    pub fn new(name: impl Into<String>, arity: usize) -> Self {
        Signature {
            name: name.into(),
            arity,
        }
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.name, self.arity)
    }
}
