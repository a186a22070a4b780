//! Recursive-descent parser for the operator-definition language.
//!
//! Grammar (one definition per line, `#` comments):
//!
//! ```text
//! system   := group_decl NEWLINE (op_def NEWLINE)+
//! group_decl := "group" GROUPSPEC
//! op_def   := IDENT "=" expr
//! expr     := ("-")? term (("+"|"-") term)*
//! term     := factor ("*" factor)*
//! factor   := atom ("^" UINT)?
//! atom     := scalar | generator | "(" expr ")"
//! generator := "dx" UINT | "d0_" UINT | "dplus_" UINT | "dminus_" UINT
//!            | "D1_" UINT | "D2_" UINT | "D3_" UINT
//! scalar   := RAT | RAT "i" | "i" | "(" signed_complex ")"
//!            | "pi" | "sqrt(" UINT ")" | "liouville(" UINT ")"
//! RAT      := NUMBER ("/" UINT)?
//! ```
//!
//! `RAT`'s fraction form is an extension over plain decimal literals so that
//! non-terminating rationals such as `1/3` stay exact.

use super::{GenKind, Generator, OperatorExpr, ScalarLit, SystemDef};
use crate::duals::GroupSpec;
use crate::exact::GaussRational;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Pow, Zero};
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("parse error at line {line}, col {col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl ParseError {
    fn new(line: usize, col: usize, message: impl Into<String>) -> Self {
        Self { line, col, message: message.into() }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Word(String),
    Number(String), // raw digits with optional fractional part
    Plus,
    Minus,
    Star,
    Caret,
    Slash,
    Eq,
    LParen,
    RParen,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    col: usize,
}

fn lex_line(line: &str, line_no: usize) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<char> = line.chars().collect();
    let mut i = 0usize;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        match c {
            '#' => break,
            c if c.is_whitespace() => {
                i += 1;
            }
            '+' => {
                out.push(Spanned { tok: Tok::Plus, col });
                i += 1;
            }
            '-' => {
                out.push(Spanned { tok: Tok::Minus, col });
                i += 1;
            }
            '*' => {
                out.push(Spanned { tok: Tok::Star, col });
                i += 1;
            }
            '^' => {
                out.push(Spanned { tok: Tok::Caret, col });
                i += 1;
            }
            '/' => {
                out.push(Spanned { tok: Tok::Slash, col });
                i += 1;
            }
            '=' => {
                out.push(Spanned { tok: Tok::Eq, col });
                i += 1;
            }
            '(' => {
                out.push(Spanned { tok: Tok::LParen, col });
                i += 1;
            }
            ')' => {
                out.push(Spanned { tok: Tok::RParen, col });
                i += 1;
            }
            c if c.is_ascii_digit() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                if i < chars.len() && chars[i] == '.' {
                    i += 1;
                    if i >= chars.len() || !chars[i].is_ascii_digit() {
                        return Err(ParseError::new(line_no, i, "expected digits after decimal point"));
                    }
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                out.push(Spanned { tok: Tok::Number(chars[start..i].iter().collect()), col });
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push(Spanned { tok: Tok::Word(chars[start..i].iter().collect()), col });
            }
            other => {
                return Err(ParseError::new(line_no, col, format!("unexpected character `{other}`")));
            }
        }
    }
    Ok(out)
}

struct LineParser<'a> {
    toks: &'a [Spanned],
    pos: usize,
    line: usize,
    group: GroupSpec,
}

impl<'a> LineParser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn col(&self) -> usize {
        self.toks
            .get(self.pos)
            .map(|s| s.col)
            .unwrap_or_else(|| self.toks.last().map(|s| s.col + 1).unwrap_or(1))
    }

    fn bump(&mut self) -> Option<&Spanned> {
        let s = self.toks.get(self.pos);
        if s.is_some() {
            self.pos += 1;
        }
        s
    }

    fn err(&self, message: impl Into<String>) -> ParseError {
        ParseError::new(self.line, self.col(), message)
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        match self.peek() {
            Some(t) if *t == tok => {
                self.bump();
                Ok(())
            }
            _ => Err(self.err(format!("expected {what}"))),
        }
    }

    fn parse_uint(&mut self, what: &str) -> Result<u64, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Number(raw)) if !raw.contains('.') => {
                self.bump();
                raw.parse::<u64>().map_err(|_| self.err(format!("{what} out of range")))
            }
            _ => Err(self.err(format!("expected {what}"))),
        }
    }

    fn parse_expr(&mut self) -> Result<OperatorExpr, ParseError> {
        let mut terms = Vec::new();
        let negate_first = matches!(self.peek(), Some(Tok::Minus));
        if negate_first {
            self.bump();
        }
        let first = self.parse_term()?;
        terms.push(if negate_first { negate(first) } else { first });
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    terms.push(self.parse_term()?);
                }
                Some(Tok::Minus) => {
                    self.bump();
                    terms.push(negate(self.parse_term()?));
                }
                _ => break,
            }
        }
        Ok(OperatorExpr::sum(terms))
    }

    fn parse_term(&mut self) -> Result<OperatorExpr, ParseError> {
        let mut factors = vec![self.parse_factor()?];
        while matches!(self.peek(), Some(Tok::Star)) {
            self.bump();
            factors.push(self.parse_factor()?);
        }
        Ok(OperatorExpr::prod(factors))
    }

    fn parse_factor(&mut self) -> Result<OperatorExpr, ParseError> {
        let atom = self.parse_atom()?;
        if matches!(self.peek(), Some(Tok::Caret)) {
            self.bump();
            let exp = self.parse_uint("nonnegative integer exponent")?;
            let exp = u32::try_from(exp).map_err(|_| self.err("exponent too large"))?;
            return Ok(OperatorExpr::Pow(Box::new(atom), exp));
        }
        Ok(atom)
    }

    fn parse_atom(&mut self) -> Result<OperatorExpr, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Number(_)) => {
                let (re, _) = self.parse_rat()?;
                if matches!(self.peek(), Some(Tok::Word(w)) if w == "i") {
                    self.bump();
                    Ok(OperatorExpr::Scalar(ScalarLit::Rational(GaussRational::new(
                        BigRational::zero(),
                        re,
                    ))))
                } else {
                    Ok(OperatorExpr::Scalar(ScalarLit::Rational(GaussRational::real(re))))
                }
            }
            Some(Tok::LParen) => {
                let save = self.pos;
                self.bump();
                if let Some(scalar) = self.try_signed_complex()? {
                    return Ok(OperatorExpr::Scalar(ScalarLit::Rational(scalar)));
                }
                self.pos = save;
                self.bump();
                let inner = self.parse_expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Some(Tok::Word(w)) => {
                self.bump();
                self.parse_word_atom(&w)
            }
            _ => Err(self.err("expected scalar, generator, or `(`")),
        }
    }

    /// Parse a rational `NUMBER ("/" UINT)?`; returns the value and whether a
    /// fraction bar was used.
    fn parse_rat(&mut self) -> Result<(BigRational, bool), ParseError> {
        let raw = match self.peek().cloned() {
            Some(Tok::Number(raw)) => {
                self.bump();
                raw
            }
            _ => return Err(self.err("expected number")),
        };
        let mut value = decimal_to_rational(&raw).ok_or_else(|| self.err("malformed number"))?;
        let mut fraction = false;
        if matches!(self.peek(), Some(Tok::Slash)) {
            self.bump();
            let den = self.parse_uint("denominator")?;
            if den == 0 {
                return Err(self.err("zero denominator"));
            }
            value /= BigRational::from_integer(BigInt::from(den));
            fraction = true;
        }
        Ok((value, fraction))
    }

    /// Attempt `signed_complex` inside parentheses (cursor just past `(`).
    /// Returns `Ok(None)` without consuming further input when the contents
    /// are not a pure numeric literal.
    fn try_signed_complex(&mut self) -> Result<Option<GaussRational>, ParseError> {
        let save = self.pos;
        let attempt = (|| -> Result<Option<GaussRational>, ParseError> {
            let mut re = BigRational::zero();
            let mut im = BigRational::zero();
            let mut seen_re = false;
            let mut seen_im = false;
            let mut first = true;
            loop {
                let sign = match self.peek() {
                    Some(Tok::Minus) => {
                        self.bump();
                        -1
                    }
                    Some(Tok::Plus) => {
                        self.bump();
                        1
                    }
                    _ if first => 1,
                    Some(Tok::RParen) => break,
                    _ => return Ok(None),
                };
                let (mag, imag) = match self.peek().cloned() {
                    Some(Tok::Number(_)) => {
                        let (v, _) = self.parse_rat()?;
                        let imag = matches!(self.peek(), Some(Tok::Word(w)) if w == "i");
                        if imag {
                            self.bump();
                        }
                        (v, imag)
                    }
                    Some(Tok::Word(w)) if w == "i" => {
                        self.bump();
                        (BigRational::from_integer(1.into()), true)
                    }
                    _ => return Ok(None),
                };
                let signed = if sign < 0 { -mag } else { mag };
                if imag {
                    if seen_im {
                        return Ok(None);
                    }
                    im = signed;
                    seen_im = true;
                } else {
                    if seen_re {
                        return Ok(None);
                    }
                    re = signed;
                    seen_re = true;
                }
                first = false;
                if matches!(self.peek(), Some(Tok::RParen)) {
                    break;
                }
                if !matches!(self.peek(), Some(Tok::Plus) | Some(Tok::Minus)) {
                    return Ok(None);
                }
            }
            if !seen_re && !seen_im {
                return Ok(None);
            }
            self.bump(); // consume `)`
            Ok(Some(GaussRational::new(re, im)))
        })();
        match attempt {
            Ok(Some(v)) => Ok(Some(v)),
            Ok(None) | Err(_) => {
                self.pos = save;
                Ok(None)
            }
        }
    }

    fn parse_word_atom(&mut self, word: &str) -> Result<OperatorExpr, ParseError> {
        match word {
            "i" => return Ok(OperatorExpr::Scalar(ScalarLit::imaginary_unit())),
            "pi" => return Ok(OperatorExpr::Scalar(ScalarLit::Pi)),
            "sqrt" => {
                self.expect(Tok::LParen, "`(` after sqrt")?;
                let m = self.parse_uint("positive integer radicand")?;
                if m == 0 {
                    return Err(self.err("sqrt radicand must be positive"));
                }
                self.expect(Tok::RParen, "`)`")?;
                return Ok(OperatorExpr::Scalar(ScalarLit::Sqrt(m)));
            }
            "liouville" => {
                self.expect(Tok::LParen, "`(` after liouville")?;
                let b = self.parse_uint("integer base")?;
                if b < 2 {
                    return Err(self.err("liouville base must be >= 2"));
                }
                self.expect(Tok::RParen, "`)`")?;
                return Ok(OperatorExpr::Scalar(ScalarLit::Liouville(b as u32)));
            }
            _ => {}
        }
        let gen = self.classify_generator(word)?;
        Ok(OperatorExpr::Gen(gen))
    }

    fn classify_generator(&self, word: &str) -> Result<Generator, ParseError> {
        let (kind, idx_str, on_sphere) = if let Some(rest) = word.strip_prefix("dx") {
            (GenKind::Dx, rest, false)
        } else if let Some(rest) = word.strip_prefix("d0_") {
            (GenKind::D0, rest, true)
        } else if let Some(rest) = word.strip_prefix("dplus_") {
            (GenKind::Dplus, rest, true)
        } else if let Some(rest) = word.strip_prefix("dminus_") {
            (GenKind::Dminus, rest, true)
        } else if let Some(rest) = word.strip_prefix("D1_") {
            (GenKind::D1, rest, true)
        } else if let Some(rest) = word.strip_prefix("D2_") {
            (GenKind::D2, rest, true)
        } else if let Some(rest) = word.strip_prefix("D3_") {
            (GenKind::D3, rest, true)
        } else {
            return Err(ParseError::new(
                self.line,
                self.col().saturating_sub(word.len()),
                format!("unknown generator `{word}`"),
            ));
        };
        let factor: usize = idx_str.parse().map_err(|_| {
            ParseError::new(self.line, self.col(), format!("malformed generator index in `{word}`"))
        })?;
        let bound = if on_sphere { self.group.sphere_count } else { self.group.torus_rank };
        if factor == 0 || factor > bound {
            return Err(ParseError::new(
                self.line,
                self.col(),
                format!(
                    "factor index out of range: `{word}` on group {} (valid 1..={bound})",
                    self.group
                ),
            ));
        }
        Ok(Generator { kind, factor })
    }
}

fn negate(expr: OperatorExpr) -> OperatorExpr {
    match expr {
        OperatorExpr::Scalar(ScalarLit::Rational(g)) => OperatorExpr::Scalar(ScalarLit::Rational(g.neg())),
        OperatorExpr::Prod(mut children) => {
            if let Some(OperatorExpr::Scalar(ScalarLit::Rational(g))) = children.first() {
                let neg = g.neg();
                children[0] = OperatorExpr::Scalar(ScalarLit::Rational(neg));
                OperatorExpr::Prod(children)
            } else {
                let mut v = vec![OperatorExpr::Scalar(ScalarLit::integer(-1))];
                v.extend(children);
                OperatorExpr::Prod(v)
            }
        }
        other => OperatorExpr::Prod(vec![OperatorExpr::Scalar(ScalarLit::integer(-1)), other]),
    }
}

fn decimal_to_rational(raw: &str) -> Option<BigRational> {
    match raw.split_once('.') {
        None => {
            let n: BigInt = raw.parse().ok()?;
            Some(BigRational::from_integer(n))
        }
        Some((int, frac)) => {
            let scale = BigInt::from(10u32).pow(frac.len() as u32);
            let int_part: BigInt = if int.is_empty() { BigInt::zero() } else { int.parse().ok()? };
            let frac_part: BigInt = frac.parse().ok()?;
            Some(BigRational::new(int_part * &scale + frac_part, scale))
        }
    }
}

/// Parse a complete system definition.
pub fn parse_system(text: &str) -> Result<SystemDef, ParseError> {
    let mut group: Option<GroupSpec> = None;
    let mut ops: Vec<(String, OperatorExpr)> = Vec::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let stripped = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        };
        if stripped.trim().is_empty() {
            continue;
        }
        if group.is_none() {
            let trimmed = stripped.trim_start();
            let Some(rest) = trimmed.strip_prefix("group") else {
                return Err(ParseError::new(line_no, 1, "expected `group` declaration first"));
            };
            if !rest.starts_with(char::is_whitespace) {
                return Err(ParseError::new(line_no, 1, "expected whitespace after `group`"));
            }
            let spec = GroupSpec::parse(rest.trim())
                .map_err(|e| ParseError::new(line_no, 7, e.to_string()))?;
            group = Some(spec);
            continue;
        }
        let toks = lex_line(stripped, line_no)?;
        let mut p = LineParser { toks: &toks, pos: 0, line: line_no, group: group.unwrap() };
        let name = match p.bump() {
            Some(Spanned { tok: Tok::Word(w), .. }) => w.clone(),
            _ => return Err(ParseError::new(line_no, 1, "expected operator name")),
        };
        p.expect(Tok::Eq, "`=`")?;
        let expr = p.parse_expr()?;
        if p.peek().is_some() {
            return Err(p.err("unexpected trailing input"));
        }
        if ops.iter().any(|(n, _)| *n == name) {
            return Err(ParseError::new(line_no, 1, format!("duplicate operator name `{name}`")));
        }
        ops.push((name, expr));
    }
    let group = group.ok_or_else(|| ParseError::new(1, 1, "missing `group` declaration"))?;
    if ops.is_empty() {
        return Err(ParseError::new(1, 1, "system defines no operators"));
    }
    Ok(SystemDef::new(group, ops))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn parse_example_first_order() {
        let sys = parse_system("group T^1xS3^1\nP1 = dx1 + i*d0_1\n").unwrap();
        assert_eq!(sys.group, GroupSpec::new(1, 1).unwrap());
        assert_eq!(sys.ops.len(), 1);
        let OperatorExpr::Sum(terms) = &sys.ops[0].1 else { panic!("expected sum") };
        assert_eq!(terms[0], OperatorExpr::gen(GenKind::Dx, 1));
        let OperatorExpr::Prod(fac) = &terms[1] else { panic!("expected product") };
        assert_eq!(fac[0], OperatorExpr::Scalar(ScalarLit::imaginary_unit()));
        assert_eq!(fac[1], OperatorExpr::gen(GenKind::D0, 1));
    }

    #[test]
    fn parse_example_higher_order() {
        let sys = parse_system("group S3^1\nP1 = 1*d0_1^2 + i*dplus_1*dminus_1\n").unwrap();
        let OperatorExpr::Sum(terms) = &sys.ops[0].1 else { panic!("expected sum") };
        let OperatorExpr::Prod(first) = &terms[0] else { panic!("expected product") };
        assert_eq!(first[0], OperatorExpr::Scalar(ScalarLit::integer(1)));
        assert!(matches!(&first[1], OperatorExpr::Pow(b, 2) if **b == OperatorExpr::gen(GenKind::D0, 1)));
    }

    #[test]
    fn factor_index_out_of_range() {
        let err = parse_system("group T^1\nP1 = dx2\n").unwrap_err();
        assert!(err.message.contains("factor index out of range"), "{err}");
        assert_eq!(err.line, 2);
    }

    #[test]
    fn unknown_generator_reported() {
        let err = parse_system("group T^1\nP1 = dy1\n").unwrap_err();
        assert!(err.message.contains("unknown generator"), "{err}");
    }

    #[test]
    fn signed_complex_literals() {
        let sys = parse_system("group T^1\nP1 = (1+2i)*dx1\nP2 = (0.5-1i)\nP3 = (-2)\n").unwrap();
        let OperatorExpr::Prod(fac) = &sys.ops[0].1 else { panic!() };
        let OperatorExpr::Scalar(ScalarLit::Rational(g)) = &fac[0] else { panic!() };
        assert_eq!(g.to_complex64(), Complex64::new(1.0, 2.0));
        let OperatorExpr::Scalar(ScalarLit::Rational(g)) = &sys.ops[1].1 else { panic!() };
        assert_eq!(g.to_complex64(), Complex64::new(0.5, -1.0));
        let OperatorExpr::Scalar(ScalarLit::Rational(g)) = &sys.ops[2].1 else { panic!() };
        assert_eq!(g.to_complex64(), Complex64::new(-2.0, 0.0));
    }

    #[test]
    fn paren_expression_still_parses() {
        let sys = parse_system("group T^1\nP1 = (dx1 + 2)*dx1\n").unwrap();
        let OperatorExpr::Prod(fac) = &sys.ops[0].1 else { panic!() };
        assert!(matches!(&fac[0], OperatorExpr::Sum(_)));
    }

    #[test]
    fn fractions_are_exact() {
        let sys = parse_system("group T^1\nP1 = 1/3 + dx1\n").unwrap();
        let OperatorExpr::Sum(terms) = &sys.ops[0].1 else { panic!() };
        let OperatorExpr::Scalar(ScalarLit::Rational(g)) = &terms[0] else { panic!() };
        assert_eq!(g.re, BigRational::new(1.into(), 3.into()));
    }

    #[test]
    fn decimals_parse_as_exact_rationals() {
        let sys = parse_system("group T^1\nP1 = 2.5\n").unwrap();
        let OperatorExpr::Scalar(ScalarLit::Rational(g)) = &sys.ops[0].1 else { panic!() };
        assert_eq!(g.re, BigRational::new(5.into(), 2.into()));
    }

    #[test]
    fn named_constants() {
        let sys = parse_system("group T^2\nP1 = sqrt(2)*dx1 + liouville(10)*dx2 + pi\n").unwrap();
        let OperatorExpr::Sum(terms) = &sys.ops[0].1 else { panic!() };
        let OperatorExpr::Prod(f0) = &terms[0] else { panic!() };
        assert_eq!(f0[0], OperatorExpr::Scalar(ScalarLit::Sqrt(2)));
        let OperatorExpr::Prod(f1) = &terms[1] else { panic!() };
        assert_eq!(f1[0], OperatorExpr::Scalar(ScalarLit::Liouville(10)));
        assert_eq!(terms[2], OperatorExpr::Scalar(ScalarLit::Pi));
    }

    #[test]
    fn comments_and_blank_lines() {
        let sys = parse_system("# heading\ngroup T^1\n\nP1 = dx1 # tail comment\n\n").unwrap();
        assert_eq!(sys.ops.len(), 1);
    }

    #[test]
    fn duplicate_names_rejected() {
        assert!(parse_system("group T^1\nP1 = dx1\nP1 = dx1\n").is_err());
    }

    #[test]
    fn subtraction_becomes_signed_scalar() {
        let sys = parse_system("group T^1\nP1 = dx1 - 2*dx1\n").unwrap();
        let OperatorExpr::Sum(terms) = &sys.ops[0].1 else { panic!() };
        let OperatorExpr::Prod(fac) = &terms[1] else { panic!() };
        let OperatorExpr::Scalar(ScalarLit::Rational(g)) = &fac[0] else { panic!() };
        assert_eq!(g.to_complex64(), Complex64::new(-2.0, 0.0));
    }
}
