//! Initial-condition mini-language:
//!
//! ```text
//! spec := term { ("+" | "-") term }
//! term := NUMBER | [NUMBER "*"] ("cos(" | "sin(") INT ["," NUMBER ["," NUMBER]] ")"
//! ```
//!
//! `cos(k, amp, phase)` is `amp cos(2 pi k x + phase)`. The literal `4pi2` stands for
//! `4 pi^2`. Whitespace is ignored.

use std::f64::consts::PI;
use std::fmt;

use rand::Rng;
use serde::Serialize;

use crate::error::{MuhsError, Result};
use crate::spectral::{PeriodicGrid, RealField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TermKind {
    Const,
    Cos,
    Sin,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Term {
    pub kind: TermKind,
    pub k: u32,
    pub amp: f64,
    pub phase: f64,
}

impl Term {
    fn eval(&self, x: f64) -> f64 {
        let arg = 2.0 * PI * self.k as f64 * x + self.phase;
        match self.kind {
            TermKind::Const => self.amp,
            TermKind::Cos => self.amp * arg.cos(),
            TermKind::Sin => self.amp * arg.sin(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InitSpec {
    pub source: String,
    pub terms: Vec<Term>,
}

impl InitSpec {
    pub fn field(&self, grid: PeriodicGrid) -> RealField {
        RealField::from_fn(grid, |x| self.terms.iter().map(|t| t.eval(x)).sum())
    }

    /// Canonical text; parsing it gives back the same terms.
    pub fn render(&self) -> String {
        render_terms(&self.terms)
    }
}

impl fmt::Display for InitSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

pub fn render_terms(terms: &[Term]) -> String {
    if terms.is_empty() {
        return "0".into();
    }
    let mut out = String::new();
    for (i, t) in terms.iter().enumerate() {
        let neg = t.amp.is_sign_negative();
        match (i, neg) {
            (0, true) => out.push('-'),
            (0, false) => {}
            (_, true) => out.push_str(" - "),
            (_, false) => out.push_str(" + "),
        }
        let a = t.amp.abs();
        let name = match t.kind {
            TermKind::Const => {
                out.push_str(&a.to_string());
                continue;
            }
            TermKind::Cos => "cos",
            TermKind::Sin => "sin",
        };
        if a != 1.0 {
            out.push_str(&format!("{a}*"));
        }
        out.push_str(&format!("{name}({}", t.k));
        if t.phase != 0.0 {
            out.push_str(&format!(", 1, {}", t.phase));
        }
        out.push(')');
    }
    out
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, expected: &str) -> Result<T> {
        Err(MuhsError::ParseError {
            offset: self.pos,
            expected: expected.into(),
        })
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.src[self.pos..].chars().next() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    fn eat(&mut self, s: &str) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(s) {
            self.pos += s.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, s: &str) -> Result<()> {
        if self.eat(s) {
            Ok(())
        } else {
            self.err(&format!("'{s}'"))
        }
    }

    fn digits(&mut self) -> usize {
        let start = self.pos;
        while self.src[self.pos..].starts_with(|c: char| c.is_ascii_digit()) {
            self.pos += 1;
        }
        self.pos - start
    }

    fn starts_number(&mut self) -> bool {
        matches!(self.peek(), Some(c) if c.is_ascii_digit() || c == '.')
    }

    /// Unsigned decimal or `4pi2`.
    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        if self.eat("4pi2") {
            return Ok(4.0 * PI * PI);
        }
        let start = self.pos;
        let int = self.digits();
        let mut frac = 0;
        if self.src[self.pos..].starts_with('.') {
            self.pos += 1;
            frac = self.digits();
        }
        if int + frac == 0 {
            self.pos = start;
            return self.err("number");
        }
        if self.src[self.pos..].starts_with(['e', 'E']) {
            let mark = self.pos;
            self.pos += 1;
            if self.src[self.pos..].starts_with(['+', '-']) {
                self.pos += 1;
            }
            if self.digits() == 0 {
                self.pos = mark + 1;
                return self.err("exponent digits");
            }
        }
        match self.src[start..self.pos].parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => {
                self.pos = start;
                self.err("finite number")
            }
        }
    }

    fn signed_number(&mut self) -> Result<f64> {
        if self.eat("-") {
            Ok(-self.number()?)
        } else {
            self.eat("+");
            self.number()
        }
    }

    fn wave_kind(&mut self) -> Option<TermKind> {
        if self.eat("cos(") {
            Some(TermKind::Cos)
        } else if self.eat("sin(") {
            Some(TermKind::Sin)
        } else {
            None
        }
    }

    fn wave(&mut self, kind: TermKind, factor: f64) -> Result<Term> {
        self.skip_ws();
        let start = self.pos;
        if self.digits() == 0 {
            return self.err("integer wavenumber");
        }
        let k: u32 = match self.src[start..self.pos].parse() {
            Ok(k) => k,
            Err(_) => {
                self.pos = start;
                return self.err("wavenumber that fits in 32 bits");
            }
        };
        let (mut amp, mut phase) = (1.0, 0.0);
        if self.eat(",") {
            amp = self.signed_number()?;
            if self.eat(",") {
                phase = self.signed_number()?;
            }
        }
        if !self.eat(")") {
            return self.err("',' or ')'");
        }
        Ok(Term {
            kind,
            k,
            amp: factor * amp,
            phase,
        })
    }

    fn term(&mut self) -> Result<Term> {
        if let Some(kind) = self.wave_kind() {
            return self.wave(kind, 1.0);
        }
        if !self.starts_number() && !self.src[self.pos..].starts_with("4pi2") {
            return self.err("number, 'cos(' or 'sin('");
        }
        let v = self.number()?;
        if self.eat("*") {
            match self.wave_kind() {
                Some(kind) => self.wave(kind, v),
                None => self.err("'cos(' or 'sin('"),
            }
        } else {
            Ok(Term {
                kind: TermKind::Const,
                k: 0,
                amp: v,
                phase: 0.0,
            })
        }
    }
}

pub fn parse_init(text: &str) -> Result<InitSpec> {
    let mut p = Parser { src: text, pos: 0 };
    let mut terms = Vec::new();
    let mut negate = p.eat("-");
    if !negate {
        p.eat("+");
    }
    loop {
        let mut t = p.term()?;
        if negate {
            t.amp = -t.amp;
        }
        terms.push(t);
        match p.peek() {
            None => break,
            Some('+') => {
                p.expect("+")?;
                negate = false;
            }
            Some('-') => {
                p.expect("-")?;
                negate = true;
            }
            Some(_) => return p.err("'+', '-' or end of input"),
        }
    }
    Ok(InitSpec {
        source: text.to_string(),
        terms,
    })
}

/// Random text in the grammar, with varied spacing and number formats.
pub fn random_spec_text<R: Rng>(rng: &mut R) -> String {
    fn number<R: Rng>(rng: &mut R) -> String {
        let v: f64 = rng.gen_range(0.0..10.0);
        match rng.gen_range(0..5) {
            0 => format!("{}", rng.gen_range(0..100)),
            1 => format!("{v:.3}"),
            2 => format!("{:e}", v * 1e-3),
            3 => "4pi2".into(),
            _ => format!("{v}"),
        }
    }
    fn signed<R: Rng>(rng: &mut R) -> String {
        let sign = if rng.gen_bool(0.5) { "-" } else { "" };
        format!("{sign}{}", number(rng))
    }
    let ws = |rng: &mut R| if rng.gen_bool(0.3) { " " } else { "" };
    let mut out = String::new();
    if rng.gen_bool(0.2) {
        out.push('-');
    }
    for i in 0..rng.gen_range(1..=5) {
        if i > 0 {
            out.push_str(ws(rng));
            out.push(if rng.gen_bool(0.5) { '+' } else { '-' });
            out.push_str(ws(rng));
        }
        if rng.gen_bool(0.3) {
            out.push_str(&number(rng));
            continue;
        }
        if rng.gen_bool(0.4) {
            out.push_str(&number(rng));
            out.push('*');
        }
        out.push_str(if rng.gen_bool(0.5) { "cos(" } else { "sin(" });
        out.push_str(&rng.gen_range(0..12).to_string());
        if rng.gen_bool(0.5) {
            out.push_str(&format!(",{}{}", ws(rng), signed(rng)));
            if rng.gen_bool(0.5) {
                out.push_str(&format!(", {}", signed(rng)));
            }
        }
        out.push_str(ws(rng));
        out.push(')');
    }
    out
}

/// Parses `text`, renders it and parses again; true when the terms agree.
pub fn round_trips(text: &str) -> Result<bool> {
    let first = parse_init(text)?;
    let again = parse_init(&first.render())?;
    Ok(again.terms == first.terms && again.render() == first.render())
}
