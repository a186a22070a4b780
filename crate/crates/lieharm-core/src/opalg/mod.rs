//! Operator-definition language: AST, parser, printer, and normalization of
//! left-invariant operators on `T^r x (S^3)^s`.

mod parse;
mod print;

pub use parse::{parse_system, ParseError};
pub use print::format_system;

use crate::duals::GroupSpec;
use crate::exact::{GaussRational, SurdScalar};
use num_complex::Complex64;
use num_rational::BigRational;

/// Generator kinds. `Dx` lives on a torus coordinate, the others on a sphere
/// factor. `D1`, `D2`, `D3` are the real su(2) basis fields; `normalize`
/// rewrites them into the ladder basis `Dplus`, `Dminus`, `D0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GenKind {
    Dx,
    D0,
    Dplus,
    Dminus,
    D1,
    D2,
    D3,
}

impl GenKind {
    pub fn is_normal(self) -> bool {
        matches!(self, GenKind::Dx | GenKind::D0 | GenKind::Dplus | GenKind::Dminus)
    }

    pub fn name(self) -> &'static str {
        match self {
            GenKind::Dx => "dx",
            GenKind::D0 => "d0",
            GenKind::Dplus => "dplus",
            GenKind::Dminus => "dminus",
            GenKind::D1 => "D1",
            GenKind::D2 => "D2",
            GenKind::D3 => "D3",
        }
    }
}

/// A generator applied to one factor of the group (1-based factor index,
/// torus and sphere factors counted separately).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Generator {
    pub kind: GenKind,
    pub factor: usize,
}

/// Scalar literal. Plain numbers are exact Gaussian rationals; `pi` and
/// `liouville(B)` are inexact named constants; `sqrt(m)` stays exact through
/// the surd carrier.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ScalarLit {
    Rational(GaussRational),
    Pi,
    Sqrt(u64),
    Liouville(u32),
}

impl ScalarLit {
    pub fn integer(n: i64) -> Self {
        ScalarLit::Rational(GaussRational::from_i64(n))
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        ScalarLit::Rational(GaussRational::from_ratio(num, den))
    }

    pub fn imaginary_unit() -> Self {
        ScalarLit::Rational(GaussRational::i())
    }

    /// Numeric value together with its exact representation when one exists.
    pub fn value(&self) -> ScalarValue {
        match self {
            ScalarLit::Rational(g) => ScalarValue {
                float: g.to_complex64(),
                exact: Some(SurdScalar::from_rational(g.clone())),
            },
            ScalarLit::Pi => ScalarValue { float: Complex64::new(std::f64::consts::PI, 0.0), exact: None },
            ScalarLit::Sqrt(m) => {
                let exact = SurdScalar::new(GaussRational::one(), *m);
                ScalarValue { float: exact.to_complex64(), exact: Some(exact) }
            }
            ScalarLit::Liouville(b) => {
                ScalarValue { float: Complex64::new(liouville_f64(*b), 0.0), exact: None }
            }
        }
    }
}

/// The Liouville-type constant `sum_{k>=1} B^(-k!)` to f64 accuracy.
pub fn liouville_f64(base: u32) -> f64 {
    let b = base as f64;
    let mut total = 0.0;
    let mut fact = 1u64;
    for k in 1..=20u64 {
        fact = fact.saturating_mul(k);
        let term = b.powf(-(fact as f64));
        total += term;
        if term < 1e-300 {
            break;
        }
    }
    total
}

/// Evaluated scalar: float value plus optional exact surd.
#[derive(Debug, Clone)]
pub struct ScalarValue {
    pub float: Complex64,
    pub exact: Option<SurdScalar>,
}

impl ScalarValue {
    pub fn one() -> Self {
        ScalarValue { float: Complex64::new(1.0, 0.0), exact: Some(SurdScalar::one()) }
    }

    pub fn mul(&self, other: &Self) -> Self {
        ScalarValue {
            float: self.float * other.float,
            exact: match (&self.exact, &other.exact) {
                (Some(a), Some(b)) => Some(a.mul(b)),
                _ => None,
            },
        }
    }

    pub fn is_zero(&self) -> bool {
        match &self.exact {
            Some(e) => e.is_zero(),
            None => self.float.norm() == 0.0,
        }
    }
}

/// Left-invariant operator expression. `Prod` is composition order
/// (left-to-right); scalars commute past everything.
#[derive(Debug, Clone, PartialEq)]
pub enum OperatorExpr {
    Scalar(ScalarLit),
    Gen(Generator),
    Sum(Vec<OperatorExpr>),
    Prod(Vec<OperatorExpr>),
    Pow(Box<OperatorExpr>, u32),
}

impl OperatorExpr {
    pub fn scalar(lit: ScalarLit) -> Self {
        OperatorExpr::Scalar(lit)
    }

    pub fn gen(kind: GenKind, factor: usize) -> Self {
        OperatorExpr::Gen(Generator { kind, factor })
    }

    pub fn sum(children: Vec<OperatorExpr>) -> Self {
        match children.len() {
            1 => children.into_iter().next().unwrap(),
            _ => OperatorExpr::Sum(children),
        }
    }

    pub fn prod(children: Vec<OperatorExpr>) -> Self {
        match children.len() {
            1 => children.into_iter().next().unwrap(),
            _ => OperatorExpr::Prod(children),
        }
    }
}

/// A named system `P = (P_1, ..., P_r)` on a group.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemDef {
    pub group: GroupSpec,
    pub ops: Vec<(String, OperatorExpr)>,
}

impl SystemDef {
    pub fn new(group: GroupSpec, ops: Vec<(String, OperatorExpr)>) -> Self {
        Self { group, ops }
    }

    pub fn normalized(&self) -> SystemDef {
        SystemDef {
            group: self.group,
            ops: self.ops.iter().map(|(n, e)| (n.clone(), normalize(e))).collect(),
        }
    }
}

fn half() -> BigRational {
    BigRational::new(1.into(), 2.into())
}

/// Rewrite `D1`, `D2`, `D3` into the ladder basis, expand powers into
/// products, and flatten nested sums/products. Exact coefficients are
/// preserved (the inversion constants are Gaussian rationals).
pub fn normalize(expr: &OperatorExpr) -> OperatorExpr {
    match expr {
        OperatorExpr::Scalar(_) => expr.clone(),
        OperatorExpr::Gen(g) => match g.kind {
            GenKind::Dx | GenKind::D0 | GenKind::Dplus | GenKind::Dminus => expr.clone(),
            // D1 = -(i/2)(dplus + dminus)
            GenKind::D1 => OperatorExpr::Sum(vec![
                OperatorExpr::Prod(vec![
                    OperatorExpr::Scalar(ScalarLit::Rational(GaussRational::new(
                        BigRational::from_integer(0.into()),
                        -half(),
                    ))),
                    OperatorExpr::gen(GenKind::Dplus, g.factor),
                ]),
                OperatorExpr::Prod(vec![
                    OperatorExpr::Scalar(ScalarLit::Rational(GaussRational::new(
                        BigRational::from_integer(0.into()),
                        -half(),
                    ))),
                    OperatorExpr::gen(GenKind::Dminus, g.factor),
                ]),
            ]),
            // D2 = (dminus - dplus)/2
            GenKind::D2 => OperatorExpr::Sum(vec![
                OperatorExpr::Prod(vec![
                    OperatorExpr::Scalar(ScalarLit::Rational(GaussRational::real(-half()))),
                    OperatorExpr::gen(GenKind::Dplus, g.factor),
                ]),
                OperatorExpr::Prod(vec![
                    OperatorExpr::Scalar(ScalarLit::Rational(GaussRational::real(half()))),
                    OperatorExpr::gen(GenKind::Dminus, g.factor),
                ]),
            ]),
            // D3 = -i * d0
            GenKind::D3 => OperatorExpr::Prod(vec![
                OperatorExpr::Scalar(ScalarLit::Rational(GaussRational::new(
                    BigRational::from_integer(0.into()),
                    BigRational::from_integer((-1).into()),
                ))),
                OperatorExpr::gen(GenKind::D0, g.factor),
            ]),
        },
        OperatorExpr::Sum(children) => {
            let mut flat = Vec::new();
            for c in children {
                match normalize(c) {
                    OperatorExpr::Sum(inner) => flat.extend(inner),
                    other => flat.push(other),
                }
            }
            OperatorExpr::sum(flat)
        }
        OperatorExpr::Prod(children) => {
            let mut flat = Vec::new();
            for c in children {
                match normalize(c) {
                    OperatorExpr::Prod(inner) => flat.extend(inner),
                    other => flat.push(other),
                }
            }
            OperatorExpr::prod(flat)
        }
        OperatorExpr::Pow(base, k) => {
            let base = normalize(base);
            match k {
                0 => OperatorExpr::Scalar(ScalarLit::integer(1)),
                1 => base,
                _ => {
                    let mut flat = Vec::new();
                    for _ in 0..*k {
                        match base.clone() {
                            OperatorExpr::Prod(inner) => flat.extend(inner),
                            other => flat.push(other),
                        }
                    }
                    OperatorExpr::prod(flat)
                }
            }
        }
    }
}

/// A fully distributed monomial: scalar coefficient times an ordered word of
/// normalized generators.
#[derive(Debug, Clone)]
pub struct Monomial {
    pub coeff: ScalarValue,
    pub word: Vec<Generator>,
}

const EXPAND_LIMIT: usize = 65536;

/// Distribute a normalized expression into a flat monomial list. Returns
/// `None` if the expansion blows past a size cap (not expected at desk scale)
/// or the expression still contains non-normal generators.
pub fn expand(expr: &OperatorExpr) -> Option<Vec<Monomial>> {
    fn go(expr: &OperatorExpr) -> Option<Vec<Monomial>> {
        match expr {
            OperatorExpr::Scalar(lit) => {
                Some(vec![Monomial { coeff: lit.value(), word: vec![] }])
            }
            OperatorExpr::Gen(g) => {
                if !g.kind.is_normal() {
                    return None;
                }
                Some(vec![Monomial { coeff: ScalarValue::one(), word: vec![*g] }])
            }
            OperatorExpr::Sum(children) => {
                let mut out = Vec::new();
                for c in children {
                    out.extend(go(c)?);
                    if out.len() > EXPAND_LIMIT {
                        return None;
                    }
                }
                Some(out)
            }
            OperatorExpr::Prod(children) => {
                let mut acc = vec![Monomial { coeff: ScalarValue::one(), word: vec![] }];
                for c in children {
                    let terms = go(c)?;
                    let mut next = Vec::with_capacity(acc.len() * terms.len());
                    for a in &acc {
                        for t in &terms {
                            let mut word = a.word.clone();
                            word.extend(t.word.iter().copied());
                            next.push(Monomial { coeff: a.coeff.mul(&t.coeff), word });
                        }
                    }
                    if next.len() > EXPAND_LIMIT {
                        return None;
                    }
                    acc = next;
                }
                Some(acc)
            }
            OperatorExpr::Pow(..) => None, // normalize removes Pow
        }
    }
    go(&normalize(expr))
}
