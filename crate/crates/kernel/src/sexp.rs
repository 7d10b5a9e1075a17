//! Minimal s-expression reader for trace files.

use crate::KernelError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Sx {
    Atom(String),
    Str(String),
    Quote(Box<Sx>),
    List(Vec<Sx>),
}

impl Sx {
    pub fn as_atom(&self) -> Option<&str> {
        match self {
            Sx::Atom(a) => Some(a),
            _ => None,
        }
    }

    pub fn as_list(&self) -> Option<&[Sx]> {
        match self {
            Sx::List(v) => Some(v),
            _ => None,
        }
    }
}

/// Reads every top-level s-expression in `text`. `;` starts a line comment.
pub fn read_all(text: &str) -> Result<Vec<Sx>, KernelError> {
    let mut r = Reader { src: text.as_bytes(), pos: 0 };
    let mut out = Vec::new();
    loop {
        r.skip_ws();
        if r.pos >= r.src.len() {
            return Ok(out);
        }
        out.push(r.read()?);
    }
}

struct Reader<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() {
            match self.src[self.pos] {
                b' ' | b'\t' | b'\n' | b'\r' => self.pos += 1,
                b';' => {
                    while self.pos < self.src.len() && self.src[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                _ => break,
            }
        }
    }

    fn err(&self, msg: &str) -> KernelError {
        KernelError::Syntax(format!("{msg} at byte {}", self.pos))
    }

    fn read(&mut self) -> Result<Sx, KernelError> {
        self.skip_ws();
        let Some(&c) = self.src.get(self.pos) else {
            return Err(self.err("unexpected end of input"));
        };
        match c {
            b'(' => {
                self.pos += 1;
                let mut items = Vec::new();
                loop {
                    self.skip_ws();
                    match self.src.get(self.pos) {
                        None => return Err(self.err("unclosed list")),
                        Some(b')') => {
                            self.pos += 1;
                            return Ok(Sx::List(items));
                        }
                        Some(_) => items.push(self.read()?),
                    }
                }
            }
            b')' => Err(self.err("unexpected ')'")),
            b'\'' => {
                self.pos += 1;
                Ok(Sx::Quote(Box::new(self.read()?)))
            }
            b'"' => {
                self.pos += 1;
                let mut s = Vec::new();
                loop {
                    match self.src.get(self.pos) {
                        None => return Err(self.err("unterminated string")),
                        Some(b'"') => {
                            self.pos += 1;
                            break;
                        }
                        Some(b'\\') => {
                            let Some(&e) = self.src.get(self.pos + 1) else {
                                return Err(self.err("bad escape"));
                            };
                            s.push(match e {
                                b'n' => b'\n',
                                b't' => b'\t',
                                other => other,
                            });
                            self.pos += 2;
                        }
                        Some(&b) => {
                            s.push(b);
                            self.pos += 1;
                        }
                    }
                }
                String::from_utf8(s).map(Sx::Str).map_err(|_| self.err("invalid utf-8"))
            }
            _ => {
                let start = self.pos;
                while self.pos < self.src.len() {
                    match self.src[self.pos] {
                        b' ' | b'\t' | b'\n' | b'\r' | b'(' | b')' | b'\'' | b'"' | b';' => break,
                        _ => self.pos += 1,
                    }
                }
                let s = std::str::from_utf8(&self.src[start..self.pos]).map_err(|_| self.err("invalid utf-8"))?;
                Ok(Sx::Atom(s.to_string()))
            }
        }
    }
}
