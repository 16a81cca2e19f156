//! Text formats: the `;`-separated program grammars of the six notations and
//! PGA, and the line-oriented equation format for recursive specifications.
//!
//! Instruction tokens: `f.m`, `+f.m`, `-f.m`, `#l`, `\l`, `##l`, `i#i`,
//! `i\i`, `i##i`, `di##i`, `r##l`, `ret`, `!`; a parenthesized group with a
//! `w` suffix is a repetition in PGA. Jump counters are plain decimal
//! naturals; a signed counter is a parse error.

use std::fmt;

use thiserror::Error;

use crate::indirect::{
    PglcijInstruction, PglddijInstruction, PgldijInstruction, PgldrjInstruction,
};
use crate::notation::{PglcInstruction, PgldInstruction, Program};
use crate::pga::{PgaInstruction, PgaTerm};
use crate::service::EnvParams;
use crate::thread::{Action, RecursiveSpec, SpecRhs, SpecTerm};
use crate::{AnyProgram, Notation};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("parse error at {line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

struct Lexer {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    col: usize,
}

impl Lexer {
    fn new(src: &str) -> Self {
        Lexer { chars: src.chars().collect(), pos: 0, line: 1, col: 1 }
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError { line: self.line, col: self.col, message: message.into() }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek_at(&self, offset: usize) -> Option<char> {
        self.chars.get(self.pos + offset).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_whitespace()) {
            self.bump();
        }
    }

    fn eat(&mut self, expected: char) -> Result<(), ParseError> {
        match self.peek() {
            Some(c) if c == expected => {
                self.bump();
                Ok(())
            }
            Some(c) => Err(self.error(format!("expected `{expected}`, found `{c}`"))),
            None => Err(self.error(format!("expected `{expected}`, found end of input"))),
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.chars.len()
    }

    fn counter(&mut self) -> Result<u64, ParseError> {
        match self.peek() {
            Some(c) if c.is_ascii_digit() => {}
            Some(c) if c == '+' || c == '-' => {
                return Err(self.error("jump counters must be unsigned decimal naturals"));
            }
            _ => return Err(self.error("expected a decimal jump counter")),
        }
        let mut value: u64 = 0;
        while let Some(c) = self.peek() {
            if !c.is_ascii_digit() {
                break;
            }
            value = value
                .checked_mul(10)
                .and_then(|v| v.checked_add(c.to_digit(10).unwrap() as u64))
                .ok_or_else(|| self.error("jump counter too large"))?;
            self.bump();
        }
        Ok(value)
    }

    fn action(&mut self) -> Result<Action, ParseError> {
        let focus = self.ident()?;
        self.eat('.')?;
        let mut method = String::new();
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == '_' || c == ':' {
                method.push(c);
                self.bump();
            } else {
                break;
            }
        }
        if method.is_empty() {
            return Err(self.error("expected a method token after `.`"));
        }
        Ok(Action::new(focus, method))
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
            _ => return Err(self.error("expected an identifier")),
        }
        let mut name = String::new();
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == '_' {
                name.push(c);
                self.bump();
            } else {
                break;
            }
        }
        Ok(name)
    }

    fn starts_with(&self, s: &str) -> bool {
        s.chars().enumerate().all(|(i, c)| self.peek_at(i) == Some(c))
    }

    /// True when the instruction at the cursor is the bare keyword `ret` and
    /// not the start of an action like `ret.m` or an identifier like `retx`.
    fn at_ret_keyword(&self) -> bool {
        self.starts_with("ret")
            && !matches!(self.peek_at(3), Some(c) if c.is_ascii_alphanumeric() || c == '_' || c == '.')
    }
}

/// The instruction superset shared by all notations; each notation parser
/// accepts its own subset.
enum RawInstruction {
    Plain(Action),
    PosTest(Action),
    NegTest(Action),
    FwdJump(u64),
    BwdJump(u64),
    AbsJump(u64),
    IndFwdJump(u64),
    IndBwdJump(u64),
    IndAbsJump(u64),
    DblIndAbsJump(u64),
    RetAbsJump(u64),
    Return,
    Halt,
}

impl RawInstruction {
    fn describe(&self) -> &'static str {
        match self {
            RawInstruction::Plain(_) => "a plain basic instruction",
            RawInstruction::PosTest(_) => "a positive test instruction",
            RawInstruction::NegTest(_) => "a negative test instruction",
            RawInstruction::FwdJump(_) => "a forward jump `#l`",
            RawInstruction::BwdJump(_) => "a backward jump `\\l`",
            RawInstruction::AbsJump(_) => "an absolute jump `##l`",
            RawInstruction::IndFwdJump(_) => "an indirect forward jump `i#i`",
            RawInstruction::IndBwdJump(_) => "an indirect backward jump `i\\i`",
            RawInstruction::IndAbsJump(_) => "an indirect absolute jump `i##i`",
            RawInstruction::DblIndAbsJump(_) => "a double indirect jump `di##i`",
            RawInstruction::RetAbsJump(_) => "a returning jump `r##l`",
            RawInstruction::Return => "a return instruction `ret`",
            RawInstruction::Halt => "a termination instruction `!`",
        }
    }
}

fn raw_instruction(lx: &mut Lexer) -> Result<RawInstruction, ParseError> {
    match lx.peek() {
        None => Err(lx.error("expected an instruction")),
        Some('!') => {
            lx.bump();
            Ok(RawInstruction::Halt)
        }
        Some('+') => {
            lx.bump();
            Ok(RawInstruction::PosTest(lx.action()?))
        }
        Some('-') => {
            lx.bump();
            Ok(RawInstruction::NegTest(lx.action()?))
        }
        Some('#') => {
            lx.bump();
            if lx.peek() == Some('#') {
                lx.bump();
                Ok(RawInstruction::AbsJump(lx.counter()?))
            } else {
                Ok(RawInstruction::FwdJump(lx.counter()?))
            }
        }
        Some('\\') => {
            lx.bump();
            Ok(RawInstruction::BwdJump(lx.counter()?))
        }
        Some('i') if lx.starts_with("i##") => {
            lx.bump();
            lx.bump();
            lx.bump();
            Ok(RawInstruction::IndAbsJump(lx.counter()?))
        }
        Some('i') if lx.starts_with("i#") => {
            lx.bump();
            lx.bump();
            Ok(RawInstruction::IndFwdJump(lx.counter()?))
        }
        Some('i') if lx.starts_with("i\\") => {
            lx.bump();
            lx.bump();
            Ok(RawInstruction::IndBwdJump(lx.counter()?))
        }
        Some('d') if lx.starts_with("di##") => {
            lx.bump();
            lx.bump();
            lx.bump();
            lx.bump();
            Ok(RawInstruction::DblIndAbsJump(lx.counter()?))
        }
        Some('r') if lx.starts_with("r##") => {
            lx.bump();
            lx.bump();
            lx.bump();
            Ok(RawInstruction::RetAbsJump(lx.counter()?))
        }
        Some('r') if lx.at_ret_keyword() => {
            lx.bump();
            lx.bump();
            lx.bump();
            Ok(RawInstruction::Return)
        }
        Some(c) if c.is_ascii_alphabetic() || c == '_' => Ok(RawInstruction::Plain(lx.action()?)),
        Some(c) => Err(lx.error(format!("unexpected character `{c}`"))),
    }
}

/// A raw instruction with the position it started at.
struct Raw {
    ins: RawInstruction,
    line: usize,
    col: usize,
}

impl Raw {
    fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError { line: self.line, col: self.col, message: message.into() }
    }
}

fn raw_program(src: &str) -> Result<Vec<Raw>, ParseError> {
    let mut lx = Lexer::new(src);
    let mut out = Vec::new();
    lx.skip_ws();
    if lx.at_end() {
        return Err(lx.error("empty program"));
    }
    loop {
        let (line, col) = (lx.line, lx.col);
        out.push(Raw { ins: raw_instruction(&mut lx)?, line, col });
        lx.skip_ws();
        if lx.at_end() {
            return Ok(out);
        }
        lx.eat(';')?;
        lx.skip_ws();
    }
}

fn check_register(raw: &Raw, i: u64, env: &EnvParams) -> Result<u64, ParseError> {
    if i < 1 || i > env.maxr {
        return Err(raw.error(format!("register index {i} out of range [1,{}]", env.maxr)));
    }
    Ok(i)
}

macro_rules! reject {
    ($raw:expr, $notation:literal) => {
        return Err($raw.error(format!(
            "{} is not a {} instruction",
            $raw.ins.describe(),
            $notation
        )))
    };
}

pub fn parse_pglc(src: &str) -> Result<Program<PglcInstruction>, ParseError> {
    let instrs = raw_program(src)?
        .into_iter()
        .map(|raw| {
            Ok(match &raw.ins {
                RawInstruction::Plain(a) => PglcInstruction::Plain(a.clone()),
                RawInstruction::PosTest(a) => PglcInstruction::PosTest(a.clone()),
                RawInstruction::NegTest(a) => PglcInstruction::NegTest(a.clone()),
                RawInstruction::FwdJump(l) => PglcInstruction::FwdJump(*l),
                RawInstruction::BwdJump(l) => PglcInstruction::BwdJump(*l),
                _ => reject!(raw, "PGLC"),
            })
        })
        .collect::<Result<Vec<_>, ParseError>>()?;
    Ok(Program::new(instrs).expect("raw_program rejects empty input"))
}

pub fn parse_pgld(src: &str) -> Result<Program<PgldInstruction>, ParseError> {
    let instrs = raw_program(src)?
        .into_iter()
        .map(|raw| {
            Ok(match &raw.ins {
                RawInstruction::Plain(a) => PgldInstruction::Plain(a.clone()),
                RawInstruction::PosTest(a) => PgldInstruction::PosTest(a.clone()),
                RawInstruction::NegTest(a) => PgldInstruction::NegTest(a.clone()),
                RawInstruction::AbsJump(l) => PgldInstruction::AbsJump(*l),
                _ => reject!(raw, "PGLD"),
            })
        })
        .collect::<Result<Vec<_>, ParseError>>()?;
    Ok(Program::new(instrs).expect("raw_program rejects empty input"))
}

pub fn parse_pgldij(
    src: &str,
    env: &EnvParams,
) -> Result<Program<PgldijInstruction>, ParseError> {
    let instrs = raw_program(src)?
        .into_iter()
        .map(|raw| {
            Ok(match &raw.ins {
                RawInstruction::Plain(a) => PgldijInstruction::Plain(a.clone()),
                RawInstruction::PosTest(a) => PgldijInstruction::PosTest(a.clone()),
                RawInstruction::NegTest(a) => PgldijInstruction::NegTest(a.clone()),
                RawInstruction::AbsJump(l) => PgldijInstruction::AbsJump(*l),
                RawInstruction::IndAbsJump(i) => {
                    PgldijInstruction::IndAbsJump(check_register(&raw, *i, env)?)
                }
                _ => reject!(raw, "PGLDij"),
            })
        })
        .collect::<Result<Vec<_>, ParseError>>()?;
    Ok(Program::new(instrs).expect("raw_program rejects empty input"))
}

pub fn parse_pglcij(
    src: &str,
    env: &EnvParams,
) -> Result<Program<PglcijInstruction>, ParseError> {
    let instrs = raw_program(src)?
        .into_iter()
        .map(|raw| {
            Ok(match &raw.ins {
                RawInstruction::Plain(a) => PglcijInstruction::Plain(a.clone()),
                RawInstruction::PosTest(a) => PglcijInstruction::PosTest(a.clone()),
                RawInstruction::NegTest(a) => PglcijInstruction::NegTest(a.clone()),
                RawInstruction::FwdJump(l) => PglcijInstruction::FwdJump(*l),
                RawInstruction::BwdJump(l) => PglcijInstruction::BwdJump(*l),
                RawInstruction::IndFwdJump(i) => {
                    PglcijInstruction::IndFwdJump(check_register(&raw, *i, env)?)
                }
                RawInstruction::IndBwdJump(i) => {
                    PglcijInstruction::IndBwdJump(check_register(&raw, *i, env)?)
                }
                _ => reject!(raw, "PGLCij"),
            })
        })
        .collect::<Result<Vec<_>, ParseError>>()?;
    Ok(Program::new(instrs).expect("raw_program rejects empty input"))
}

pub fn parse_pglddij(
    src: &str,
    env: &EnvParams,
) -> Result<Program<PglddijInstruction>, ParseError> {
    let instrs = raw_program(src)?
        .into_iter()
        .map(|raw| {
            Ok(match &raw.ins {
                RawInstruction::Plain(a) => PglddijInstruction::Plain(a.clone()),
                RawInstruction::PosTest(a) => PglddijInstruction::PosTest(a.clone()),
                RawInstruction::NegTest(a) => PglddijInstruction::NegTest(a.clone()),
                RawInstruction::AbsJump(l) => PglddijInstruction::AbsJump(*l),
                RawInstruction::IndAbsJump(i) => {
                    PglddijInstruction::IndAbsJump(check_register(&raw, *i, env)?)
                }
                RawInstruction::DblIndAbsJump(i) => {
                    PglddijInstruction::DblIndAbsJump(check_register(&raw, *i, env)?)
                }
                _ => reject!(raw, "PGLDdij"),
            })
        })
        .collect::<Result<Vec<_>, ParseError>>()?;
    Ok(Program::new(instrs).expect("raw_program rejects empty input"))
}

pub fn parse_pgldrj(
    src: &str,
    env: &EnvParams,
) -> Result<Program<PgldrjInstruction>, ParseError> {
    let _ = env;
    let check_focus = |raw: &Raw, a: &Action| -> Result<Action, ParseError> {
        if a.focus() == "st" {
            return Err(
                raw.error("basic instructions must not use the reserved focus `st`")
            );
        }
        Ok(a.clone())
    };
    let instrs = raw_program(src)?
        .into_iter()
        .map(|raw| {
            Ok(match &raw.ins {
                RawInstruction::Plain(a) => PgldrjInstruction::Plain(check_focus(&raw, a)?),
                RawInstruction::PosTest(a) => PgldrjInstruction::PosTest(check_focus(&raw, a)?),
                RawInstruction::NegTest(a) => PgldrjInstruction::NegTest(check_focus(&raw, a)?),
                RawInstruction::AbsJump(l) => PgldrjInstruction::AbsJump(*l),
                RawInstruction::RetAbsJump(l) => PgldrjInstruction::RetAbsJump(*l),
                RawInstruction::Return => PgldrjInstruction::Return,
                _ => reject!(raw, "PGLDrj"),
            })
        })
        .collect::<Result<Vec<_>, ParseError>>()?;
    Ok(Program::new(instrs).expect("raw_program rejects empty input"))
}

/// Parses a program of the given notation from text.
pub fn parse_program(
    notation: Notation,
    src: &str,
    env: &EnvParams,
) -> Result<AnyProgram, ParseError> {
    Ok(match notation {
        Notation::Pglc => AnyProgram::Pglc(parse_pglc(src)?),
        Notation::Pgld => AnyProgram::Pgld(parse_pgld(src)?),
        Notation::Pgldij => AnyProgram::Pgldij(parse_pgldij(src, env)?),
        Notation::Pglcij => AnyProgram::Pglcij(parse_pglcij(src, env)?),
        Notation::Pglddij => AnyProgram::Pglddij(parse_pglddij(src, env)?),
        Notation::Pgldrj => AnyProgram::Pgldrj(parse_pgldrj(src, env)?),
    })
}

// ---------------------------------------------------------------------------
// PGA terms
// ---------------------------------------------------------------------------

fn pga_element(lx: &mut Lexer) -> Result<PgaTerm, ParseError> {
    if lx.peek() == Some('(') {
        lx.bump();
        let inner = pga_sequence(lx)?;
        lx.eat(')')?;
        match lx.peek() {
            Some('w') => {
                lx.bump();
                Ok(PgaTerm::repeat(inner))
            }
            _ => Err(lx.error("expected `w` after a parenthesized group")),
        }
    } else {
        let (line, col) = (lx.line, lx.col);
        let raw = Raw { ins: raw_instruction(lx)?, line, col };
        let ins = match &raw.ins {
            RawInstruction::Plain(a) => PgaInstruction::Plain(a.clone()),
            RawInstruction::PosTest(a) => PgaInstruction::PosTest(a.clone()),
            RawInstruction::NegTest(a) => PgaInstruction::NegTest(a.clone()),
            RawInstruction::FwdJump(l) => PgaInstruction::FwdJump(*l),
            RawInstruction::Halt => PgaInstruction::Halt,
            _ => reject!(raw, "PGA"),
        };
        Ok(PgaTerm::Instr(ins))
    }
}

fn pga_sequence(lx: &mut Lexer) -> Result<PgaTerm, ParseError> {
    let mut elems = vec![pga_element(lx)?];
    loop {
        lx.skip_ws();
        if lx.peek() != Some(';') {
            break;
        }
        lx.bump();
        lx.skip_ws();
        elems.push(pga_element(lx)?);
    }
    let mut term = elems.pop().expect("at least one element");
    while let Some(prev) = elems.pop() {
        term = PgaTerm::concat(prev, term);
    }
    Ok(term)
}

/// Parses a PGA term: instructions and `(...)w` groups joined by `;`.
pub fn parse_pga(src: &str) -> Result<PgaTerm, ParseError> {
    let mut lx = Lexer::new(src);
    lx.skip_ws();
    if lx.at_end() {
        return Err(lx.error("empty program"));
    }
    let term = pga_sequence(&mut lx)?;
    lx.skip_ws();
    if !lx.at_end() {
        return Err(lx.error("trailing input after program"));
    }
    Ok(term)
}

// ---------------------------------------------------------------------------
// Recursive specifications
// ---------------------------------------------------------------------------

/// Parses the equation format: one `X = S` / `X = D` /
/// `X = <term> < f.m > <term>` per line, where a term is `S`, `D`, a
/// variable, or a parenthesized right-hand side. Returns the specification
/// and the start variable (the first equation's left-hand side).
pub fn parse_spec(src: &str) -> Result<(RecursiveSpec, String), ParseError> {
    let mut equations = Vec::new();
    for (line_no, line) in src.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut lx = Lexer::new(line);
        lx.line = line_no + 1;
        lx.skip_ws();
        let name = lx.ident()?;
        if name == "S" || name == "D" {
            return Err(lx.error("`S` and `D` are reserved and cannot name a variable"));
        }
        lx.skip_ws();
        lx.eat('=')?;
        lx.skip_ws();
        let rhs = spec_rhs(&mut lx)?;
        lx.skip_ws();
        if !lx.at_end() {
            return Err(lx.error("trailing input after equation"));
        }
        equations.push((name, rhs));
    }
    if equations.is_empty() {
        let lx = Lexer::new(src);
        return Err(lx.error("specification has no equations"));
    }
    let start = equations[0].0.clone();
    let spec = RecursiveSpec::new(equations).map_err(|e| ParseError {
        line: 0,
        col: 0,
        message: e.to_string(),
    })?;
    Ok((spec, start))
}

fn spec_rhs(lx: &mut Lexer) -> Result<SpecRhs, ParseError> {
    let first = spec_term(lx)?;
    lx.skip_ws();
    if lx.peek() == Some('<') {
        lx.bump();
        lx.skip_ws();
        let action = lx.action()?;
        lx.skip_ws();
        lx.eat('>')?;
        lx.skip_ws();
        let second = spec_term(lx)?;
        return Ok(SpecRhs::Branch(action, first, second));
    }
    match first {
        SpecTerm::Sub(rhs) if matches!(*rhs, SpecRhs::Stop | SpecRhs::Deadlock) => Ok(*rhs),
        SpecTerm::Sub(rhs) => Ok(*rhs),
        SpecTerm::Var(v) => {
            Err(lx.error(format!("a bare variable `{v}` is not a guarded right-hand side")))
        }
    }
}

fn spec_term(lx: &mut Lexer) -> Result<SpecTerm, ParseError> {
    lx.skip_ws();
    match lx.peek() {
        Some('(') => {
            lx.bump();
            lx.skip_ws();
            let rhs = spec_rhs(lx)?;
            lx.skip_ws();
            lx.eat(')')?;
            Ok(SpecTerm::Sub(Box::new(rhs)))
        }
        _ => {
            let name = lx.ident()?;
            Ok(match name.as_str() {
                "S" => SpecTerm::Sub(Box::new(SpecRhs::Stop)),
                "D" => SpecTerm::Sub(Box::new(SpecRhs::Deadlock)),
                _ => SpecTerm::Var(name),
            })
        }
    }
}

/// Render helper used by the CLI: `text` is the human form, `eqns` the
/// machine form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpecFormat {
    Text,
    Eqns,
}

impl SpecFormat {
    pub fn render(self, spec: &RecursiveSpec) -> String {
        match self {
            SpecFormat::Text => spec.to_pretty_string(),
            SpecFormat::Eqns => spec.to_eqns_string(),
        }
    }
}

impl fmt::Display for SpecFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpecFormat::Text => write!(f, "text"),
            SpecFormat::Eqns => write!(f, "eqns"),
        }
    }
}
