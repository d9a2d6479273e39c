use super::{multiply_canonicalize, Factor, ModeKind, ModeTable, OpKey, OperatorSum};
use crate::error::{Result, TcgError};
use crate::symbolic::ScalarExpr;

struct Cursor<'a> {
    src: &'a str,
    b: &'a [u8],
    i: usize,
}

impl Cursor<'_> {
    fn skip_ws(&mut self) {
        while self.i < self.b.len() && (self.b[self.i] as char).is_whitespace() {
            self.i += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.b.get(self.i).map(|&c| c as char)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(TcgError::parse(self.src, self.i, msg))
    }

    fn ident(&mut self) -> Option<String> {
        self.skip_ws();
        let start = self.i;
        while self.i < self.b.len() && ((self.b[self.i] as char).is_ascii_alphanumeric() || self.b[self.i] == b'_') {
            self.i += 1;
        }
        (self.i > start).then(|| self.src[start..self.i].to_string())
    }

    fn int(&mut self) -> Result<u32> {
        self.skip_ws();
        let start = self.i;
        while self.i < self.b.len() && self.b[self.i].is_ascii_digit() {
            self.i += 1;
        }
        if start == self.i {
            return self.err("malformed power: expected a non-negative integer");
        }
        self.src[start..self.i]
            .parse()
            .or_else(|_| self.err("malformed power"))
    }

    fn level(&mut self) -> Result<u8> {
        match self.ident().as_deref() {
            Some("g") | Some("0") => Ok(0),
            Some("e") | Some("1") => Ok(1),
            _ => self.err("expected a level g|e"),
        }
    }
}

fn single(table: &ModeTable, mode: usize, f: Factor) -> OperatorSum {
    let mut key = table.identity_key();
    key.0[mode] = f;
    OperatorSum::from_key(key, ScalarExpr::one())
}

fn tls_word(c: &mut Cursor, table: &ModeTable, mode: usize, word: &str) -> Result<OperatorSum> {
    Ok(match word {
        "sp" => single(table, mode, Factor::Tls(Some((1, 0)))),
        "sm" => single(table, mode, Factor::Tls(Some((0, 1)))),
        "sz" => {
            let mut s = single(table, mode, Factor::Tls(Some((1, 1))));
            s.add_assign(&single(table, mode, Factor::Tls(Some((0, 0)))).scale(&ScalarExpr::int(-1)));
            s
        }
        "t" => {
            if !c.eat('(') {
                return c.err("expected `(` after t");
            }
            let i = c.level()?;
            if !c.eat(',') {
                return c.err("expected `,`");
            }
            let j = c.level()?;
            if !c.eat(')') {
                return c.err("expected `)`");
            }
            single(table, mode, Factor::Tls(Some((i, j))))
        }
        _ => return c.err(format!("unknown two-level operator `{word}`")),
    })
}

fn factor(c: &mut Cursor, table: &ModeTable) -> Result<OperatorSum> {
    if c.peek() == Some('1') {
        c.i += 1;
        return Ok(OperatorSum::identity(table));
    }
    let start = c.i;
    let Some(name) = c.ident() else {
        return c.err("expected an operator factor");
    };
    if name == "I" {
        return Ok(OperatorSum::identity(table));
    }
    let tls: Vec<usize> = (0..table.len())
        .filter(|&k| table.modes[k].kind == ModeKind::TwoLevel)
        .collect();
    let base = if let Some(m) = table.index(&name) {
        if c.eat('.') {
            if table.modes[m].kind != ModeKind::TwoLevel {
                c.i = start;
                return c.err(format!("mode `{name}` is not two-level"));
            }
            let Some(word) = c.ident() else {
                return c.err("expected sz|sp|sm|t(i,j)");
            };
            tls_word(c, table, m, &word)?
        } else if table.modes[m].kind == ModeKind::Bosonic {
            let dag = c.eat('\'');
            single(
                table,
                m,
                if dag {
                    Factor::Boson { cr: 1, an: 0 }
                } else {
                    Factor::Boson { cr: 0, an: 1 }
                },
            )
        } else {
            c.i = start;
            return c.err(format!("two-level mode `{name}` needs an operator word, e.g. {name}.sp"));
        }
    } else if matches!(name.as_str(), "sz" | "sp" | "sm" | "t") {
        if tls.len() != 1 {
            c.i = start;
            return c.err("unqualified two-level operator needs exactly one two-level mode");
        }
        tls_word(c, table, tls[0], &name)?
    } else {
        c.i = start;
        return c.err(format!("unknown mode `{name}`"));
    };
    if c.peek() == Some('\'') {
        return c.err("dagger is only allowed on bosonic modes");
    }
    if c.eat('^') {
        let n = c.int()?;
        let mut acc = OperatorSum::identity(table);
        for _ in 0..n {
            acc = multiply_canonicalize(&acc, &base, table)?;
        }
        return Ok(acc);
    }
    Ok(base)
}

/// Parses `a'*sm`, `a'^2*a^2`, `q.sp*a` into canonical form.
pub fn parse_operator(text: &str, table: &ModeTable) -> Result<OperatorSum> {
    let mut c = Cursor {
        src: text,
        b: text.as_bytes(),
        i: 0,
    };
    let mut acc = factor(&mut c, table)?;
    while c.eat('*') {
        let f = factor(&mut c, table)?;
        acc = multiply_canonicalize(&acc, &f, table)?;
    }
    if c.peek().is_some() {
        return c.err("unexpected trailing input");
    }
    Ok(acc)
}

/// Key of an operator known to be a single canonical monomial.
pub fn parse_key(text: &str, table: &ModeTable) -> Result<OpKey> {
    let s = parse_operator(text, table)?;
    let key = match s.terms().next() {
        Some((k, c)) if s.len() == 1 && c == &ScalarExpr::one() => Some(k.clone()),
        _ => None,
    };
    key.ok_or_else(|| TcgError::parse(text, 0, "expected a single canonical monomial"))
}
