//! Reader for proof documents and terms.
//!
//! Surface syntax is desugared on the way in, so every term that leaves the
//! parser uses only canonical names: `and` becomes `^`, `equal` becomes
//! `==`, `car` becomes `first`, `app` becomes nested `bin-app`, `match`
//! becomes nested `if`, abbreviations are expanded, and so on.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use thiserror::Error;

use crate::ast::*;
use crate::term::{apply_subst, Subst, Term, Value};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub message: String,
    pub line: usize,
    pub col: usize,
    pub span: Span,
}

impl ParseError {
    fn at(span: Span, message: impl Into<String>) -> ParseError {
        ParseError { message: message.into(), line: span.line, col: span.col, span }
    }
}

type PResult<T> = Result<T, ParseError>;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Open,
    Close,
    LBrace,
    RBrace,
    Comma,
    Colon,
    Quote,
    Str(String),
    Atom(String),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    span: Span,
}

fn lex(src: &str) -> PResult<Vec<Token>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let advance = |i: &mut usize, line: &mut usize, col: &mut usize, c: u8| {
        *i += 1;
        if c == b'\n' {
            *line += 1;
            *col = 1;
        } else if c & 0xC0 != 0x80 {
            *col += 1;
        }
    };
    while i < bytes.len() {
        let c = bytes[i];
        let start = Span { start: i, end: i + 1, line, col };
        match c {
            b' ' | b'\t' | b'\r' | b'\n' => advance(&mut i, &mut line, &mut col, c),
            b';' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    let b = bytes[i];
                    advance(&mut i, &mut line, &mut col, b);
                }
            }
            b'(' | b')' | b'{' | b'}' | b',' | b'\'' => {
                let tok = match c {
                    b'(' => Tok::Open,
                    b')' => Tok::Close,
                    b'{' => Tok::LBrace,
                    b'}' => Tok::RBrace,
                    b',' => Tok::Comma,
                    _ => Tok::Quote,
                };
                out.push(Token { tok, span: start });
                advance(&mut i, &mut line, &mut col, c);
            }
            b'"' => {
                advance(&mut i, &mut line, &mut col, c);
                let mut s = String::new();
                loop {
                    if i >= bytes.len() {
                        return Err(ParseError::at(start, "unterminated string"));
                    }
                    let d = bytes[i];
                    if d == b'"' {
                        advance(&mut i, &mut line, &mut col, d);
                        break;
                    }
                    if d == b'\\' && i + 1 < bytes.len() {
                        advance(&mut i, &mut line, &mut col, d);
                    }
                    let ch_len = utf8_len(bytes[i]);
                    s.push_str(&src[i..i + ch_len]);
                    for _ in 0..ch_len {
                        let b = bytes[i];
                        advance(&mut i, &mut line, &mut col, b);
                    }
                }
                out.push(Token { tok: Tok::Str(s), span: Span { end: i, ..start } });
            }
            _ => {
                let s0 = i;
                while i < bytes.len() && !b" \t\r\n;(){},'\"".contains(&bytes[i]) {
                    let b = bytes[i];
                    advance(&mut i, &mut line, &mut col, b);
                }
                let text = &src[s0..i];
                if text.len() > 1 && text.ends_with(':') && !text.starts_with(':') {
                    let name_end = i - 1;
                    out.push(Token {
                        tok: Tok::Atom(src[s0..name_end].to_string()),
                        span: Span { end: name_end, ..start },
                    });
                    let colon = Span { start: name_end, end: i, line, col: col - 1 };
                    out.push(Token { tok: Tok::Colon, span: colon });
                } else if text == ":" {
                    out.push(Token { tok: Tok::Colon, span: Span { end: i, ..start } });
                } else {
                    out.push(Token { tok: Tok::Atom(text.to_string()), span: Span { end: i, ..start } });
                }
            }
        }
    }
    Ok(out)
}

fn utf8_len(b: u8) -> usize {
    match b {
        0..=0x7F => 1,
        0xC0..=0xDF => 2,
        0xE0..=0xEF => 3,
        _ => 4,
    }
}

/// A raw s-expression, kept with spans until it is elaborated.
#[derive(Debug, Clone)]
enum Sx {
    Atom(String, Span),
    Str(String, Span),
    List(Vec<Sx>, Span),
    Quote(Box<Sx>, Span),
}

impl Sx {
    fn span(&self) -> Span {
        match self {
            Sx::Atom(_, s) | Sx::Str(_, s) | Sx::List(_, s) | Sx::Quote(_, s) => *s,
        }
    }

    fn atom(&self) -> Option<&str> {
        match self {
            Sx::Atom(a, _) => Some(a),
            _ => None,
        }
    }
}

pub fn parse_rational(s: &str) -> Option<BigRational> {
    let (neg, body) = match s.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (n, d) = match body.split_once('/') {
        Some((n, d)) => (n, d),
        None => (body, "1"),
    };
    let digits = |x: &str| !x.is_empty() && x.bytes().all(|b| b.is_ascii_digit());
    if !digits(n) || !digits(d) {
        return None;
    }
    let n: BigInt = n.parse().ok()?;
    let d: BigInt = d.parse().ok()?;
    if d == BigInt::from(0) {
        return None;
    }
    let r = BigRational::new(n, d);
    Some(if neg { -r } else { r })
}

#[derive(Debug, Clone)]
struct Abbrev {
    params: Vec<String>,
    body: Term,
}

struct Parser<'a> {
    src: &'a str,
    toks: Vec<Token>,
    pos: usize,
    abbrevs: BTreeMap<String, Abbrev>,
}

fn canonical_symbol(s: &str) -> String {
    s.to_ascii_lowercase()
}

fn right_nest(f: &str, mut args: Vec<Term>, unit: Term) -> Term {
    match args.len() {
        0 => unit,
        1 => args.pop().unwrap(),
        _ => {
            let last = args.pop().unwrap();
            args.into_iter().rev().fold(last, |acc, a| Term::app(f, vec![a, acc]))
        }
    }
}

impl<'a> Parser<'a> {
    fn eof_span(&self) -> Span {
        let n = self.src.len();
        let line = self.src.lines().count().max(1);
        Span { start: n, end: n, line, col: 1 }
    }

    fn peek(&self) -> Option<&Token> {
        self.toks.get(self.pos)
    }

    fn peek_at(&self, k: usize) -> Option<&Token> {
        self.toks.get(self.pos + k)
    }

    fn here(&self) -> Span {
        self.peek().map(|t| t.span).unwrap_or_else(|| self.eof_span())
    }

    fn last_span(&self) -> Span {
        self.toks[self.pos.saturating_sub(1)].span
    }

    fn peek_word(&self, k: usize) -> Option<String> {
        match self.peek_at(k).map(|t| &t.tok) {
            Some(Tok::Atom(a)) => Some(a.to_ascii_lowercase()),
            _ => None,
        }
    }

    fn is_word(&self, k: usize, w: &str) -> bool {
        self.peek_word(k).as_deref() == Some(w)
    }

    fn expect(&mut self, want: Tok, what: &str) -> PResult<Span> {
        match self.peek() {
            Some(t) if t.tok == want => {
                let s = t.span;
                self.pos += 1;
                Ok(s)
            }
            _ => Err(ParseError::at(self.here(), format!("expected {what}"))),
        }
    }

    fn expect_word(&mut self, w: &str) -> PResult<Span> {
        if self.is_word(0, w) {
            self.pos += 1;
            Ok(self.last_span())
        } else {
            Err(ParseError::at(self.here(), format!("expected `{w}`")))
        }
    }

    fn read_sx(&mut self) -> PResult<Sx> {
        let Some(t) = self.peek().cloned() else {
            return Err(ParseError::at(self.eof_span(), "unexpected end of input"));
        };
        self.pos += 1;
        match t.tok {
            Tok::Atom(a) => Ok(Sx::Atom(a, t.span)),
            Tok::Str(s) => Ok(Sx::Str(s, t.span)),
            Tok::Quote => {
                let inner = self.read_sx()?;
                let span = t.span.to(inner.span());
                Ok(Sx::Quote(Box::new(inner), span))
            }
            Tok::Open => {
                let mut items = Vec::new();
                loop {
                    match self.peek().map(|t| &t.tok) {
                        None => return Err(ParseError::at(t.span, "unbalanced parenthesis")),
                        Some(Tok::Close) => {
                            self.pos += 1;
                            return Ok(Sx::List(items, t.span.to(self.last_span())));
                        }
                        Some(Tok::Colon) => {
                            // keywords such as `:tl` are lexed as one atom; a bare
                            // colon inside a form is kept as an atom too.
                            let s = self.here();
                            self.pos += 1;
                            items.push(Sx::Atom(":".into(), s));
                        }
                        _ => items.push(self.read_sx()?),
                    }
                }
            }
            _ => Err(ParseError::at(t.span, "unexpected token")),
        }
    }

    fn datum(&self, sx: &Sx) -> PResult<Value> {
        Ok(match sx {
            Sx::Atom(a, _) => {
                if let Some(r) = parse_rational(a) {
                    Value::Rat(r)
                } else {
                    match canonical_symbol(a).as_str() {
                        "t" => Value::True,
                        "nil" => Value::Nil,
                        s => Value::Sym(s.to_string()),
                    }
                }
            }
            Sx::Str(s, _) => Value::Str(s.clone()),
            Sx::Quote(inner, _) => Value::list(vec![Value::Sym("quote".into()), self.datum(inner)?]),
            Sx::List(items, span) => {
                if let Some(dot) = items.iter().position(|x| x.atom() == Some(".")) {
                    if dot + 2 != items.len() || dot == 0 {
                        return Err(ParseError::at(*span, "malformed dotted list"));
                    }
                    let tail = self.datum(&items[dot + 1])?;
                    let mut v = tail;
                    for x in items[..dot].iter().rev() {
                        v = Value::cons(self.datum(x)?, v);
                    }
                    v
                } else {
                    Value::list(items.iter().map(|x| self.datum(x)).collect::<PResult<_>>()?)
                }
            }
        })
    }

    fn term(&self, sx: &Sx) -> PResult<Term> {
        match sx {
            Sx::Atom(a, span) => {
                if let Some(r) = parse_rational(a) {
                    return Ok(Term::Const(Value::Rat(r)));
                }
                let s = canonical_symbol(a);
                if s.starts_with(':') || s == "." {
                    return Err(ParseError::at(*span, format!("unexpected `{a}` in a term")));
                }
                Ok(match s.as_str() {
                    "t" => Term::t(),
                    "nil" => Term::nil(),
                    _ => Term::Var(s),
                })
            }
            Sx::Str(s, _) => Ok(Term::Const(Value::Str(s.clone()))),
            Sx::Quote(inner, _) => Ok(Term::Const(self.datum(inner)?)),
            Sx::List(items, span) => {
                let Some((head, rest)) = items.split_first() else {
                    return Ok(Term::nil());
                };
                let Some(h) = head.atom() else {
                    return Err(ParseError::at(head.span(), "function position must be a symbol"));
                };
                let f = canonical_symbol(h);
                if f == "match" {
                    return self.compile_match(rest, *span);
                }
                let args = rest.iter().map(|x| self.term(x)).collect::<PResult<Vec<_>>>()?;
                self.apply(&f, args, *span)
            }
        }
    }

    fn apply(&self, f: &str, mut args: Vec<Term>, span: Span) -> PResult<Term> {
        let arity = |n: usize| -> PResult<()> {
            if args.len() == n {
                Ok(())
            } else {
                Err(ParseError::at(span, format!("{f} expects {n} arguments, got {}", args.len())))
            }
        };
        if let Some(ab) = self.abbrevs.get(f) {
            arity(ab.params.len())?;
            let s: Subst = ab.params.iter().cloned().zip(args).collect();
            return Ok(apply_subst(&s, &ab.body));
        }
        let two = |args: &mut Vec<Term>| (args.remove(0), args.remove(0));
        Ok(match f {
            "and" | "^" => Term::and(args),
            "or" | "v" => Term::or(args),
            "implies" | "=>" => {
                arity(2)?;
                Term::app("=>", args)
            }
            "iff" | "<=>" => {
                arity(2)?;
                Term::app("<=>", args)
            }
            "not" | "!" => {
                arity(1)?;
                Term::not(args.remove(0))
            }
            "equal" | "eq" | "eql" | "=" | "==" => {
                arity(2)?;
                Term::app("==", args)
            }
            "!=" | "/=" => {
                arity(2)?;
                let (a, b) = two(&mut args);
                Term::not(Term::eq(a, b))
            }
            ">" => {
                arity(2)?;
                let (a, b) = two(&mut args);
                Term::app("<", vec![b, a])
            }
            "<=" => {
                arity(2)?;
                let (a, b) = two(&mut args);
                Term::not(Term::app("<", vec![b, a]))
            }
            ">=" => {
                arity(2)?;
                let (a, b) = two(&mut args);
                Term::not(Term::app("<", vec![a, b]))
            }
            "+" => right_nest("+", args, Term::int(0)),
            "*" => right_nest("*", args, Term::int(1)),
            "-" => match args.len() {
                1 => Term::app("-", args),
                2 => {
                    let (a, b) = two(&mut args);
                    Term::app("+", vec![a, Term::app("-", vec![b])])
                }
                _ => return Err(ParseError::at(span, "- expects 1 or 2 arguments")),
            },
            "car" => {
                arity(1)?;
                Term::app("first", args)
            }
            "cdr" => {
                arity(1)?;
                Term::app("rest", args)
            }
            "app" | "append" | "bin-app" if f != "bin-app" || args.len() != 2 => {
                right_nest("bin-app", args, Term::nil())
            }
            "list" => args.into_iter().rev().fold(Term::nil(), |acc, a| Term::app("cons", vec![a, acc])),
            "if" => {
                arity(3)?;
                Term::app("if", args)
            }
            "quote" => return Err(ParseError::at(span, "use 'datum for quoted data")),
            _ => Term::App(f.to_string(), args),
        })
    }

    /// `(match x clause...)` over the list patterns `()`, `(e . es)` and a
    /// catch-all variable.
    fn compile_match(&self, rest: &[Sx], span: Span) -> PResult<Term> {
        let Some((scrut, clauses)) = rest.split_first() else {
            return Err(ParseError::at(span, "match needs a scrutinee"));
        };
        let x = self.term(scrut)?;
        enum Pat {
            Empty,
            Cons(Option<String>, Option<String>),
            Any(Option<String>),
        }
        let var_of = |sx: &Sx| -> PResult<Option<String>> {
            match sx.atom().map(canonical_symbol) {
                Some(v) if v == "_" => Ok(None),
                Some(v) if !v.starts_with(':') && parse_rational(&v).is_none() && v != "t" && v != "nil" => Ok(Some(v)),
                _ => Err(ParseError::at(sx.span(), "pattern variable expected")),
            }
        };
        let mut arms = Vec::new();
        for c in clauses {
            let Sx::List(parts, cspan) = c else {
                return Err(ParseError::at(c.span(), "match clause must be (pattern body)"));
            };
            if parts.len() != 2 {
                return Err(ParseError::at(*cspan, "match clause must be (pattern body)"));
            }
            let pat = match &parts[0] {
                Sx::List(p, _) if p.is_empty() => Pat::Empty,
                Sx::Atom(a, _) if canonical_symbol(a) == "nil" => Pat::Empty,
                Sx::List(p, ps) if p.len() == 3 && p[1].atom() == Some(".") => {
                    Pat::Cons(var_of(&p[0])?, var_of(&p[2])?)
                }
                Sx::List(_, ps) => return Err(ParseError::at(*ps, "unsupported pattern")),
                other => Pat::Any(var_of(other)?),
            };
            arms.push((pat, self.term(&parts[1])?));
        }
        let mut out: Option<Term> = None;
        let n = arms.len();
        let mut seen_empty = false;
        let mut compiled = Vec::new();
        for (i, (pat, body)) in arms.into_iter().enumerate() {
            let last = i + 1 == n;
            let (test, body) = match pat {
                Pat::Empty => {
                    seen_empty = true;
                    (Some(Term::app("endp", vec![x.clone()])), body)
                }
                Pat::Cons(h, t) => {
                    let mut s = Subst::new();
                    if let Some(h) = h {
                        s.insert(h, Term::app("first", vec![x.clone()]));
                    }
                    if let Some(t) = t {
                        s.insert(t, Term::app("rest", vec![x.clone()]));
                    }
                    let body = apply_subst(&s, &body);
                    let test = if last && seen_empty { None } else { Some(Term::app("consp", vec![x.clone()])) };
                    (test, body)
                }
                Pat::Any(v) => {
                    let mut s = Subst::new();
                    if let Some(v) = v {
                        s.insert(v, x.clone());
                    }
                    (None, apply_subst(&s, &body))
                }
            };
            compiled.push((test, body));
            if compiled.last().unwrap().0.is_none() {
                break;
            }
        }
        for (test, body) in compiled.into_iter().rev() {
            out = Some(match (test, out) {
                (None, _) => body,
                (Some(c), None) => Term::app("if", vec![c, body, Term::nil()]),
                (Some(c), Some(e)) => Term::app("if", vec![c, body, e]),
            });
        }
        out.ok_or_else(|| ParseError::at(span, "match without clauses"))
    }

    fn params(&self, sx: &Sx) -> PResult<Vec<(String, String)>> {
        let Sx::List(items, _) = sx else {
            return Err(ParseError::at(sx.span(), "parameter list expected"));
        };
        let mut out: Vec<(String, String)> = Vec::new();
        let mut pending = 0usize;
        for it in items {
            let a = it.atom().ok_or_else(|| ParseError::at(it.span(), "parameter expected"))?;
            let a = canonical_symbol(a);
            if let Some(ty) = a.strip_prefix(':') {
                if pending == 0 {
                    return Err(ParseError::at(it.span(), "type without a parameter"));
                }
                let rec = format!("{ty}p");
                let n = out.len();
                for p in &mut out[n - pending..] {
                    p.1 = rec.clone();
                }
                pending = 0;
            } else {
                out.push((a, "allp".into()));
                pending += 1;
            }
        }
        Ok(out)
    }

    fn form(&mut self, sx: Sx) -> PResult<ItemKind> {
        let Sx::List(items, span) = &sx else {
            return Err(ParseError::at(sx.span(), "expected a form"));
        };
        let head = items.first().and_then(Sx::atom).map(canonical_symbol).unwrap_or_default();
        let name_of = |k: usize| -> PResult<String> {
            items
                .get(k)
                .and_then(Sx::atom)
                .map(canonical_symbol)
                .ok_or_else(|| ParseError::at(*span, format!("{head} needs a name")))
        };
        match head.as_str() {
            "definec" => {
                let name = name_of(1)?;
                let params = self.params(items.get(2).ok_or_else(|| ParseError::at(*span, "missing parameters"))?)?;
                let ret = match items.get(3).and_then(Sx::atom) {
                    Some(k) if k.starts_with(':') => format!("{}p", canonical_symbol(&k[1..])),
                    _ => return Err(ParseError::at(*span, "missing return type")),
                };
                let mut k = 4;
                let mut assume_terminating = false;
                if items.get(k).and_then(Sx::atom).map(canonical_symbol).as_deref() == Some(":assume-terminating") {
                    assume_terminating = true;
                    k += 1;
                }
                if items.len() != k + 1 {
                    return Err(ParseError::at(*span, "definec takes exactly one body"));
                }
                let body = self.term(&items[k])?;
                Ok(ItemKind::Function(FunctionDecl { name, params, ret, body, assume_terminating }))
            }
            "defabbrev" => {
                if items.len() != 4 {
                    return Err(ParseError::at(*span, "defabbrev takes a name, parameters and a body"));
                }
                let name = name_of(1)?;
                let params: Vec<String> = self.params(&items[2])?.into_iter().map(|p| p.0).collect();
                let body = self.term(&items[3])?;
                self.abbrevs.insert(name.clone(), Abbrev { params: params.clone(), body: body.clone() });
                Ok(ItemKind::Abbrev(AbbrevDecl { name, params, body }))
            }
            "property" => {
                if items.len() != 4 {
                    return Err(ParseError::at(*span, "property takes a name, parameters and a body"));
                }
                let name = name_of(1)?;
                let params = self.params(&items[2])?;
                let body = self.term(&items[3])?;
                let recs = params
                    .iter()
                    .filter(|(_, r)| r != "allp")
                    .map(|(p, r)| Term::app(r, vec![Term::Var(p.clone())]))
                    .collect();
                let statement = crate::typeguard::export(&Term::implies(recs, body));
                Ok(ItemKind::Property(PropertyDecl { name, statement }))
            }
            "assume" | "defaxiom" => {
                if items.len() != 3 {
                    return Err(ParseError::at(*span, "assume takes a name and a statement"));
                }
                Ok(ItemKind::Assume(PropertyDecl { name: name_of(1)?, statement: self.term(&items[2])? }))
            }
            other => Err(ParseError::at(*span, format!("unknown form `{other}`"))),
        }
    }

    fn term_here(&mut self) -> PResult<Term> {
        let sx = self.read_sx()?;
        self.term(&sx)
    }

    fn label(&mut self, prefix: char) -> Option<String> {
        let Some(Tok::Atom(a)) = self.peek().map(|t| t.tok.clone()) else {
            return None;
        };
        let body = a.strip_suffix('.').unwrap_or(&a);
        let mut cs = body.chars();
        let first = cs.next()?;
        if first.to_ascii_uppercase() != prefix || body.len() < 2 || !cs.all(|c| c.is_ascii_digit()) {
            return None;
        }
        self.pos += 1;
        if a.ends_with('.') || self.peek().map(|t| &t.tok) != Some(&Tok::Colon) {
            // `C1.` or bare `C1`
        } else {
            self.pos += 1;
        }
        Some(format!("{prefix}{}", &body[1..]))
    }

    fn hints(&mut self) -> PResult<Vec<Hint>> {
        let open = self.expect(Tok::LBrace, "`{`")?;
        let mut out = Vec::new();
        let mut words: Vec<Sx> = Vec::new();
        loop {
            match self.peek().map(|t| t.tok.clone()) {
                None => return Err(ParseError::at(open, "unterminated hint list")),
                Some(Tok::RBrace) | Some(Tok::Comma) => {
                    let close = matches!(self.peek().map(|t| &t.tok), Some(Tok::RBrace));
                    let span = self.here();
                    self.pos += 1;
                    if !words.is_empty() {
                        out.push(self.hint(&words, span)?);
                        words.clear();
                    }
                    if close {
                        if out.is_empty() {
                            return Err(ParseError::at(open, "a step needs at least one hint"));
                        }
                        return Ok(out);
                    }
                }
                Some(_) => words.push(self.read_sx()?),
            }
        }
    }

    fn hint(&self, words: &[Sx], span: Span) -> PResult<Hint> {
        let span = words.first().map(Sx::span).unwrap_or(span);
        let lower: Vec<String> = words.iter().map(|w| w.atom().map(canonical_symbol).unwrap_or_default()).collect();
        let first = lower[0].as_str();
        let joined = lower.join(" ");
        let item_label = |s: &str| {
            let mut cs = s.chars();
            matches!(cs.next(), Some('c') | Some('d')) && s.len() > 1 && cs.all(|c| c.is_ascii_digit())
        };
        if words.len() == 1 && item_label(first) {
            return Ok(Hint::Item(first.to_ascii_uppercase()));
        }
        match joined.as_str() {
            "cons axioms" | "cons-axioms" => return Ok(Hint::Axioms("cons-axioms".into())),
            "algebra" | "arith" | "arithmetic" => return Ok(Hint::Arith),
            "evaluation" | "eval" => return Ok(Hint::Evaluation),
            "obvious" | "pl" | "mp" | "modus ponens" | "propositional logic" => {
                return Ok(Hint::Trivial(joined.clone()))
            }
            _ => {}
        }
        if first == "def" && words.len() == 2 {
            let f = if lower[1] == "append" || lower[1] == "app" { "bin-app".to_string() } else { lower[1].clone() };
            return Ok(Hint::Def(f));
        }
        if matches!(first, "lemma" | "conjecture" | "prop" | "property" | "theorem" | "problem")
            && (2..=3).contains(&words.len())
        {
            let name = lower[1].clone();
            let subst = match words.get(2) {
                None => None,
                Some(Sx::List(pairs, _)) => {
                    let mut s = Subst::new();
                    for p in pairs {
                        match p {
                            Sx::List(kv, _) if kv.len() == 2 && kv[0].atom().is_some() => {
                                s.insert(canonical_symbol(kv[0].atom().unwrap()), self.term(&kv[1])?);
                            }
                            _ => return Err(ParseError::at(p.span(), "substitution pairs look like (var term)")),
                        }
                    }
                    Some(s)
                }
                Some(other) => return Err(ParseError::at(other.span(), "substitution expected")),
            };
            return Ok(Hint::Lemma { name, subst });
        }
        Err(ParseError::at(span, format!("unknown hint `{joined}`")))
    }

    fn relation(&self) -> Option<Relation> {
        let next_is_brace = matches!(self.peek_at(1).map(|t| &t.tok), Some(Tok::LBrace));
        if !next_is_brace {
            return None;
        }
        match self.peek_word(0)?.as_str() {
            "==" | "=" | "equal" => Some(Relation::Equal),
            "<=>" | "iff" => Some(Relation::Iff),
            "=>" | "implies" => Some(Relation::Implies),
            "<=" => Some(Relation::ImpliedBy),
            _ => None,
        }
    }

    fn seq(&mut self) -> PResult<ProofSeq> {
        let first = self.term_here()?;
        let mut steps = Vec::new();
        while let Some(relation) = self.relation() {
            let start = self.here();
            self.pos += 1;
            let hints = self.hints()?;
            let rhs = self.term_here()?;
            steps.push(Step { relation, hints, rhs, span: start.to(self.last_span()) });
        }
        Ok(ProofSeq { first, steps })
    }

    fn headers(&mut self, body: &mut SimpleBody) -> PResult<()> {
        loop {
            if self.is_word(0, "exportation") && self.peek_at(1).map(|t| &t.tok) == Some(&Tok::Colon) {
                self.pos += 2;
                body.exportation = Some(self.term_here()?);
            } else if self.is_word(0, "contract") && self.is_word(1, "completion") {
                self.pos += 2;
                self.expect(Tok::Colon, "`:`")?;
                body.completion = Some(self.term_here()?);
            } else {
                return Ok(());
            }
        }
    }

    fn simple(&mut self) -> PResult<SimpleBody> {
        let mut body = SimpleBody::default();
        self.headers(&mut body)?;
        if self.is_word(0, "context") {
            self.pos += 1;
            self.expect(Tok::Colon, "`:` after Context")?;
            while let Some(label) = self.label('C') {
                let start = self.last_span();
                check_numbering(&label, body.context.len(), start)?;
                let term = self.term_here()?;
                body.context.push(ContextItem { label, term, span: start.to(self.last_span()) });
            }
        }
        if self.is_word(0, "derived") {
            self.pos += 1;
            self.expect_word("context")?;
            self.expect(Tok::Colon, "`:` after Derived Context")?;
            while let Some(label) = self.label('D') {
                let start = self.last_span();
                check_numbering(&label, body.derived.len(), start)?;
                let term = self.term_here()?;
                let hints = self.hints()?;
                body.derived.push(DerivedItem { label, term, hints, span: start.to(self.last_span()) });
            }
        }
        if self.is_word(0, "goal") {
            self.pos += 1;
            self.expect(Tok::Colon, "`:` after Goal")?;
            body.goal = Some(self.term_here()?);
        }
        if self.is_word(0, "proof") && self.peek_at(1).map(|t| &t.tok) == Some(&Tok::Colon) {
            self.pos += 2;
            body.seq = Some(self.seq()?);
        }
        Ok(body)
    }

    fn proof(&mut self, kind: ProofKind) -> PResult<ItemKind> {
        self.pos += 1;
        let name = match self.peek().map(|t| t.tok.clone()) {
            Some(Tok::Atom(a)) => {
                self.pos += 1;
                canonical_symbol(&a)
            }
            _ => return Err(ParseError::at(self.here(), "proof name expected")),
        };
        self.expect(Tok::Colon, "`:` after the proof name")?;
        let statement = self.term_here()?;
        let mut head = SimpleBody::default();
        self.headers(&mut head)?;
        let body = if self.is_word(0, "proof") && self.is_word(1, "by") {
            self.pos += 2;
            self.expect(Tok::Colon, "`:` after Proof by")?;
            let induct = self.term_here()?;
            let mut cases = Vec::new();
            loop {
                let kind = match self.peek_word(0).as_deref() {
                    Some("contract") if self.is_word(1, "case") => CaseKind::Contract,
                    Some("base") => CaseKind::Base,
                    Some("induction") => CaseKind::Induction,
                    _ => break,
                };
                let start = self.here();
                self.pos += 1;
                self.expect_word("case")?;
                let index = match self.peek_word(0).and_then(|w| w.parse::<u32>().ok()) {
                    Some(n) => {
                        self.pos += 1;
                        n
                    }
                    None => return Err(ParseError::at(self.here(), "case number expected")),
                };
                self.expect(Tok::Colon, "`:` after the case number")?;
                let body = self.simple()?;
                self.expect_word("qed")?;
                cases.push(Case { kind, index, body, span: start.to(self.last_span()) });
            }
            if !cases.iter().any(|c| c.kind == CaseKind::Base) {
                return Err(ParseError::at(self.here(), "an inductive proof needs at least one Base Case"));
            }
            ProofBody::Inductive { induct, cases }
        } else {
            ProofBody::Simple(self.simple()?)
        };
        self.expect_word("qed")?;
        Ok(ItemKind::Proof(Proof {
            kind,
            name,
            statement,
            exportation: head.exportation,
            completion: head.completion,
            body,
        }))
    }

    fn proof_kind(&self) -> Option<ProofKind> {
        // `Property name:` starts a proof; a lone `property` word does not.
        if self.peek_at(2).map(|t| &t.tok) != Some(&Tok::Colon) {
            return None;
        }
        Some(match self.peek_word(0)?.as_str() {
            "conjecture" | "problem" => ProofKind::Conjecture,
            "property" | "prop" => ProofKind::Property,
            "lemma" => ProofKind::Lemma,
            "theorem" => ProofKind::Theorem,
            _ => return None,
        })
    }

    fn item(&mut self) -> PResult<ItemKind> {
        match self.peek().map(|t| &t.tok) {
            Some(Tok::Open) => {
                let sx = self.read_sx()?;
                self.form(sx)
            }
            _ => match self.proof_kind() {
                Some(k) => self.proof(k),
                None => Err(ParseError::at(self.here(), "expected a definition or a proof")),
            },
        }
    }

    /// After an error, skips to the next token that can start an item.
    fn recover(&mut self) {
        self.pos += 1;
        while self.pos < self.toks.len() {
            let t = &self.toks[self.pos];
            let at_line_start = t.span.col == 1;
            if at_line_start && (t.tok == Tok::Open || self.proof_kind().is_some()) {
                return;
            }
            self.pos += 1;
        }
    }
}

/// Labels must run 1, 2, ... in order.
fn check_numbering(label: &str, before: usize, span: Span) -> PResult<()> {
    let want = format!("{}{}", &label[..1], before + 1);
    if label != want {
        return Err(ParseError::at(span, format!("expected label {want}, found {label}")));
    }
    Ok(())
}

fn item_name(kind: &ItemKind) -> &str {
    match kind {
        ItemKind::Function(f) => &f.name,
        ItemKind::Abbrev(a) => &a.name,
        ItemKind::Property(p) | ItemKind::Assume(p) => &p.name,
        ItemKind::Proof(p) => &p.name,
    }
}

/// Parses a whole document, recovering after errors so that every error in
/// the file is reported.
pub fn parse_document(text: &str) -> (Document, Vec<ParseError>) {
    let toks = match lex(text) {
        Ok(t) => t,
        Err(e) => return (Document::default(), vec![e]),
    };
    let mut p = Parser { src: text, toks, pos: 0, abbrevs: BTreeMap::new() };
    let mut doc = Document::default();
    let mut errors = Vec::new();
    while p.pos < p.toks.len() {
        let start = p.here();
        let at = p.pos;
        match p.item() {
            Ok(kind) => {
                let span = start.to(p.last_span());
                let name = item_name(&kind);
                if doc.items.iter().any(|i| item_name(&i.kind) == name) {
                    errors.push(ParseError::at(span, format!("{name} is already defined in this document")));
                } else {
                    doc.items.push(Item { kind, span });
                }
            }
            Err(e) => {
                errors.push(e);
                p.pos = at;
                p.recover();
            }
        }
    }
    (doc, errors)
}

/// Parses a single term in canonical form.
pub fn parse_term(text: &str) -> Result<Term, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { src: text, toks, pos: 0, abbrevs: BTreeMap::new() };
    let t = p.term_here()?;
    if p.pos != p.toks.len() {
        return Err(ParseError::at(p.here(), "trailing input after term"));
    }
    Ok(t)
}
