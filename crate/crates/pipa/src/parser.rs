// Copyright 2026
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0

//! Recursive-descent parser for the concrete process grammar.
//!
//! ```text
//! process ::= term ('|' term)*
//! term    ::= '0' | name '!' name | sum | 'new' name+ 'in' term
//!           | 'rec' PID '.' term | PID | 'if' name 'then' term 'else' term
//!           | '(' process ')'
//! sum     ::= branch ('+' branch)*
//! branch  ::= prob ':' prefix '.' term
//! prefix  ::= name '?' '(' name ')' | 'tau' ('[' label ']')?
//! prob    ::= INT ('/' INT)? | DECIMAL
//! ```
//!
//! Prefix binds tighter than `+`, which binds tighter than `|`. Identifiers
//! starting with an uppercase letter are process variables; the literal
//! tokens `true`, `false`, `0`, `1` are allowed only in payload or condition
//! position. `//` starts a line comment.

use crate::term::{rat, Branch, Lit, Name, Prefix, Process, ProcessId, Rat, TermError};
use num::{BigInt, One, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("{line}:{col}: syntax error: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("{line}:{col}: {err}")]
    Semantic { line: usize, col: usize, err: TermError },
}

impl ParseError {
    /// True for structural (well-formedness) errors as opposed to syntax.
    pub fn is_semantic(&self) -> bool {
        matches!(self, ParseError::Semantic { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tk {
    Ident(String),
    Num(String),
    Label(String),
    Bar,
    Plus,
    Bang,
    Question,
    LPar,
    RPar,
    Dot,
    Colon,
    Slash,
    KwNew,
    KwIn,
    KwRec,
    KwIf,
    KwThen,
    KwElse,
    KwTau,
    KwTrue,
    KwFalse,
    Eof,
}

#[derive(Debug, Clone)]
struct Tok {
    kind: Tk,
    line: usize,
    col: usize,
}

fn lex(src: &str) -> Result<Vec<Tok>, ParseError> {
    let mut toks = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0;
    let mut line = 1;
    let mut col = 1;
    let n = chars.len();
    while i < n {
        let c = chars[i];
        let (tl, tc) = (line, col);
        let advance = |i: &mut usize, line: &mut usize, col: &mut usize| {
            if chars[*i] == '\n' {
                *line += 1;
                *col = 1;
            } else {
                *col += 1;
            }
            *i += 1;
        };
        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut col);
            continue;
        }
        if c == '/' && i + 1 < n && chars[i + 1] == '/' {
            while i < n && chars[i] != '\n' {
                advance(&mut i, &mut line, &mut col);
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < n && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '\'')
            {
                advance(&mut i, &mut line, &mut col);
            }
            let word: String = chars[start..i].iter().collect();
            let kind = match word.as_str() {
                "new" => Tk::KwNew,
                "in" => Tk::KwIn,
                "rec" => Tk::KwRec,
                "if" => Tk::KwIf,
                "then" => Tk::KwThen,
                "else" => Tk::KwElse,
                "tau" => Tk::KwTau,
                "true" => Tk::KwTrue,
                "false" => Tk::KwFalse,
                _ => Tk::Ident(word),
            };
            toks.push(Tok { kind, line: tl, col: tc });
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < n && (chars[i].is_ascii_digit() || chars[i] == '.') {
                advance(&mut i, &mut line, &mut col);
            }
            toks.push(Tok {
                kind: Tk::Num(chars[start..i].iter().collect()),
                line: tl,
                col: tc,
            });
            continue;
        }
        if c == '[' {
            // Labels are opaque text up to the closing bracket.
            advance(&mut i, &mut line, &mut col);
            let start = i;
            while i < n && chars[i] != ']' {
                advance(&mut i, &mut line, &mut col);
            }
            if i == n {
                return Err(ParseError::Syntax {
                    line: tl,
                    col: tc,
                    msg: "unterminated label".into(),
                });
            }
            let label: String = chars[start..i].iter().collect();
            advance(&mut i, &mut line, &mut col); // ']'
            toks.push(Tok { kind: Tk::Label(label.trim().to_string()), line: tl, col: tc });
            continue;
        }
        let kind = match c {
            '|' => Tk::Bar,
            '+' => Tk::Plus,
            '!' => Tk::Bang,
            '?' => Tk::Question,
            '(' => Tk::LPar,
            ')' => Tk::RPar,
            '.' => Tk::Dot,
            ':' => Tk::Colon,
            '/' => Tk::Slash,
            _ => {
                return Err(ParseError::Syntax {
                    line: tl,
                    col: tc,
                    msg: format!("unexpected character {c:?}"),
                })
            }
        };
        advance(&mut i, &mut line, &mut col);
        toks.push(Tok { kind, line: tl, col: tc });
    }
    toks.push(Tok { kind: Tk::Eof, line, col });
    Ok(toks)
}

struct Parser {
    toks: Vec<Tok>,
    idx: usize,
}

/// Parses and validates a process term.
pub fn parse(src: &str) -> Result<Process, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, idx: 0 };
    let proc = p.parse_process()?;
    p.expect_eof()?;
    Ok(proc)
}

impl Parser {
    fn peek(&self) -> &Tk {
        &self.toks[self.idx].kind
    }

    fn peek2(&self) -> &Tk {
        &self.toks[(self.idx + 1).min(self.toks.len() - 1)].kind
    }

    fn here(&self) -> (usize, usize) {
        let t = &self.toks[self.idx];
        (t.line, t.col)
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.idx].clone();
        if self.idx + 1 < self.toks.len() {
            self.idx += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        let (line, col) = self.here();
        Err(ParseError::Syntax { line, col, msg: msg.into() })
    }

    fn sem<T>(&self, at: (usize, usize), err: TermError) -> Result<T, ParseError> {
        Err(ParseError::Semantic { line: at.0, col: at.1, err })
    }

    fn expect(&mut self, k: Tk, what: &str) -> Result<(), ParseError> {
        if *self.peek() == k {
            self.bump();
            Ok(())
        } else {
            self.err(format!("expected {what}"))
        }
    }

    fn expect_eof(&mut self) -> Result<(), ParseError> {
        if *self.peek() == Tk::Eof {
            Ok(())
        } else {
            self.err("expected end of input")
        }
    }

    fn parse_process(&mut self) -> Result<Process, ParseError> {
        let mut acc = self.parse_term()?;
        while *self.peek() == Tk::Bar {
            self.bump();
            let rhs = self.parse_term()?;
            acc = Process::par(acc, rhs);
        }
        Ok(acc)
    }

    fn parse_term(&mut self) -> Result<Process, ParseError> {
        match self.peek().clone() {
            Tk::LPar => {
                self.bump();
                let p = self.parse_process()?;
                self.expect(Tk::RPar, "`)`")?;
                Ok(p)
            }
            Tk::KwNew => {
                self.bump();
                let mut names = vec![self.parse_binder_name()?];
                while matches!(self.peek(), Tk::Ident(s) if starts_lower(s)) {
                    names.push(self.parse_binder_name()?);
                }
                self.expect(Tk::KwIn, "`in`")?;
                let body = self.parse_term()?;
                Ok(names
                    .into_iter()
                    .rev()
                    .fold(body, |acc, n| Process::res(n, acc)))
            }
            Tk::KwRec => {
                let at = self.here();
                self.bump();
                let pid = self.parse_pid()?;
                self.expect(Tk::Dot, "`.`")?;
                let body = self.parse_term()?;
                let p = Process::Rec(pid.clone(), Box::new(body));
                if let Process::Rec(x, b) = &p {
                    if crate::term::validate(&Process::Rec(x.clone(), b.clone()))
                        .err()
                        .map(|e| matches!(e, TermError::UnguardedRecursion(_)))
                        .unwrap_or(false)
                    {
                        return self.sem(at, TermError::UnguardedRecursion(pid.0));
                    }
                }
                Ok(p)
            }
            Tk::KwIf => {
                self.bump();
                let cond = self.parse_payload_name()?;
                self.expect(Tk::KwThen, "`then`")?;
                let t = self.parse_term()?;
                self.expect(Tk::KwElse, "`else`")?;
                let e = self.parse_term()?;
                Ok(Process::If(cond, Box::new(t), Box::new(e)))
            }
            Tk::Ident(s) => {
                if starts_lower(&s) {
                    let at = self.here();
                    self.bump();
                    if *self.peek() != Tk::Bang {
                        return self.err("expected `!` after channel name");
                    }
                    self.bump();
                    let payload = self.parse_payload_name()?;
                    let _ = at;
                    Ok(Process::Output(Name::Id(s), payload))
                } else {
                    self.bump();
                    Ok(Process::Var(ProcessId(s)))
                }
            }
            Tk::Num(ref t) => {
                if t == "0" && *self.peek2() != Tk::Colon && *self.peek2() != Tk::Slash {
                    self.bump();
                    Ok(Process::nil())
                } else {
                    self.parse_sum()
                }
            }
            Tk::KwTau => self.err("a prefix must be preceded by a probability"),
            _ => self.err("expected a process term"),
        }
    }

    fn parse_sum(&mut self) -> Result<Process, ParseError> {
        let at = self.here();
        let mut branches = vec![self.parse_branch()?];
        while *self.peek() == Tk::Plus {
            self.bump();
            branches.push(self.parse_branch()?);
        }
        let total: Rat = branches.iter().map(|b| b.prob.clone()).sum();
        if !total.is_one() {
            return self.sem(at, TermError::SumNotNormalized { got: total.to_string() });
        }
        Ok(Process::Sum(branches))
    }

    fn parse_branch(&mut self) -> Result<Branch, ParseError> {
        let at = self.here();
        let prob = self.parse_prob()?;
        if prob <= Rat::zero() || prob > rat(1, 1) {
            return self.sem(
                at,
                TermError::SumNotNormalized { got: format!("branch probability {prob}") },
            );
        }
        self.expect(Tk::Colon, "`:` after probability")?;
        let prefix = self.parse_prefix()?;
        self.expect(Tk::Dot, "`.` after prefix")?;
        let cont = self.parse_term()?;
        Ok(Branch { prob, prefix, cont })
    }

    fn parse_prob(&mut self) -> Result<Rat, ParseError> {
        let t = match self.peek().clone() {
            Tk::Num(t) => t,
            _ => return self.err("expected a probability"),
        };
        self.bump();
        if let Some((ip, fp)) = t.split_once('.') {
            if fp.is_empty() || fp.contains('.') {
                return self.err("malformed decimal");
            }
            let scale = BigInt::from(10u32).pow(fp.len() as u32);
            let num: BigInt = format!("{ip}{fp}")
                .parse()
                .map_err(|_| self.err::<()>("malformed decimal").unwrap_err())?;
            return Ok(Rat::new(num, scale));
        }
        let num: BigInt = t
            .parse()
            .map_err(|_| self.err::<()>("malformed integer").unwrap_err())?;
        if *self.peek() == Tk::Slash {
            self.bump();
            let d = match self.peek().clone() {
                Tk::Num(d) if !d.contains('.') => d,
                _ => return self.err("expected an integer denominator"),
            };
            self.bump();
            let den: BigInt = d
                .parse()
                .map_err(|_| self.err::<()>("malformed integer").unwrap_err())?;
            if den.is_zero() {
                return self.err("zero denominator");
            }
            Ok(Rat::new(num, den))
        } else {
            Ok(Rat::new(num, BigInt::one()))
        }
    }

    fn parse_prefix(&mut self) -> Result<Prefix, ParseError> {
        if *self.peek() == Tk::KwTau {
            self.bump();
            if let Tk::Label(l) = self.peek().clone() {
                self.bump();
                return Ok(Prefix::Tau(Some(l)));
            }
            return Ok(Prefix::Tau(None));
        }
        let ch = self.parse_channel_name()?;
        self.expect(Tk::Question, "`?` in input prefix")?;
        self.expect(Tk::LPar, "`(`")?;
        let binder = self.parse_binder_name()?;
        self.expect(Tk::RPar, "`)`")?;
        Ok(Prefix::Input(ch, binder))
    }

    fn parse_pid(&mut self) -> Result<ProcessId, ParseError> {
        match self.peek().clone() {
            Tk::Ident(s) if !starts_lower(&s) => {
                self.bump();
                Ok(ProcessId(s))
            }
            _ => self.err("expected a process variable (capitalized identifier)"),
        }
    }

    /// Name in subject (channel) position: literals rejected.
    fn parse_channel_name(&mut self) -> Result<Name, ParseError> {
        let at = self.here();
        let n = self.parse_payload_name()?;
        if n.is_lit() {
            return self.sem(at, TermError::LiteralMisuse(n.text()));
        }
        Ok(n)
    }

    /// Name in binding position: literals rejected.
    fn parse_binder_name(&mut self) -> Result<Name, ParseError> {
        self.parse_channel_name()
    }

    /// Name in payload or condition position: literals allowed.
    fn parse_payload_name(&mut self) -> Result<Name, ParseError> {
        match self.peek().clone() {
            Tk::Ident(s) if starts_lower(&s) => {
                self.bump();
                Ok(Name::Id(s))
            }
            Tk::Ident(_) => self.err("process variables cannot appear in name position"),
            Tk::KwTrue => {
                self.bump();
                Ok(Name::Lit(Lit::True))
            }
            Tk::KwFalse => {
                self.bump();
                Ok(Name::Lit(Lit::False))
            }
            Tk::Num(t) if t == "0" => {
                self.bump();
                Ok(Name::Lit(Lit::Zero))
            }
            Tk::Num(t) if t == "1" => {
                self.bump();
                Ok(Name::Lit(Lit::One))
            }
            _ => self.err("expected a name"),
        }
    }
}

fn starts_lower(s: &str) -> bool {
    s.chars().next().map(|c| c.is_lowercase() || c == '_').unwrap_or(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pretty::pp;
    use crate::term::{alpha_normalize, congruent};

    fn roundtrip(src: &str) {
        let p = parse(src).expect(src);
        let printed = pp(&p);
        let q = parse(&printed).unwrap_or_else(|e| panic!("reparse of {printed:?}: {e}"));
        assert!(congruent(&p, &q), "{src} -> {printed}");
        assert_eq!(alpha_normalize(&p), alpha_normalize(&q));
    }

    #[test]
    fn parses_paper_examples() {
        roundtrip("rec X. 1/2: x?(y). 0 + 1/2: tau. X | x!y");
        roundtrip("new x in (rec X. 1/2: x?(y). 0 + 1/2: tau. X | x!y)");
        roundtrip("new x1 x2 in (x1!y | x2!z | (1/3: x1?(y). 0 + 2/3: x2?(y). 0))");
        roundtrip("1: tau[draw(0,1)]. (a!b | if c then 0 else d!true)");
        roundtrip("0.5: tau. 0 + 0.25: a?(b). b!0 + 0.25: tau. new q in q!1");
    }

    #[test]
    fn precedence_prefix_plus_bar() {
        // `+` binds tighter than `|`.
        let p = parse("1/2: tau. 0 + 1/2: a?(x). 0 | b!c").unwrap();
        match p {
            Process::Par(l, r) => {
                assert!(matches!(*l, Process::Sum(ref bs) if bs.len() == 2));
                assert!(matches!(*r, Process::Output(..)));
            }
            other => panic!("expected par, got {other:?}"),
        }
    }

    #[test]
    fn rejects_unnormalized_sum() {
        let e = parse("1/2: tau. 0 + 1/3: tau. 0").unwrap_err();
        assert!(e.is_semantic(), "{e}");
        assert!(e.to_string().contains("total 1"), "{e}");
    }

    #[test]
    fn rejects_unguarded_recursion() {
        let e = parse("rec X. X").unwrap_err();
        assert!(e.is_semantic(), "{e}");
        let e = parse("rec X. (X | a!b)").unwrap_err();
        assert!(e.is_semantic(), "{e}");
        // Guarded occurrences are fine.
        parse("rec X. 1: tau. X").unwrap();
        parse("rec X. 1: tau. (X | X)").unwrap();
    }

    #[test]
    fn rejects_literal_misuse() {
        assert!(parse("true!x").is_err());
        let e = parse("1: true?(y). 0").unwrap_err();
        assert!(e.is_semantic(), "{e}");
        let e = parse("1: x?(true). 0").unwrap_err();
        assert!(e.is_semantic(), "{e}");
        let e = parse("new 0 in x!y");
        assert!(e.is_err());
        // Payload position is fine.
        parse("x!true").unwrap();
        parse("x!0").unwrap();
    }

    #[test]
    fn syntax_errors_have_positions() {
        match parse("new x in\n  x!") {
            Err(ParseError::Syntax { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn zero_vs_probability_disambiguation() {
        assert!(parse("0").unwrap().is_nil());
        let p = parse("1/2: tau. 0 + 0.5: tau. 0").unwrap();
        assert!(matches!(p, Process::Sum(ref bs) if bs.len() == 2));
    }
}
