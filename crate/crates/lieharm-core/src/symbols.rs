//! Matrix symbols of left-invariant operators: evaluation at a frequency,
//! structural classification, and diagonal-entry extraction.
//!
//! Symbols are evaluated in a fixed Peter-Weyl basis: sphere slots are ordered
//! ascending in `n`, and under this convention `dplus` is the sub-diagonal
//! shift with entry `-sqrt((l-n)(l+n+1))` at row `n+1`, column `n`. Exact
//! entries ride along as surd scalars whenever sums stay within one radicand;
//! otherwise the matrix is downgraded to float with a recorded flag.

use crate::duals::{dim, index_set, Frequency, GroupSpec, MultiIndex};
use crate::error::LieharmError;
use crate::exact::{GaussRational, SurdScalar};
use crate::opalg::{normalize, GenKind, Generator, OperatorExpr, ScalarValue, SystemDef};
use nalgebra::DMatrix;
use num_complex::Complex64;
use num_rational::BigRational;

/// Relative zero tolerance for float-mode flag decisions.
pub const ZERO_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SymbolFlags {
    pub is_zero: bool,
    pub is_diagonal: bool,
    pub is_lower_triangular: bool,
}

/// The symbol `sigma_P(xi)` at one frequency.
#[derive(Debug, Clone)]
pub struct SymbolMatrix {
    pub freq: Frequency,
    pub entries: DMatrix<Complex64>,
    /// Row-major exact entries, when every sum stayed within one radicand.
    pub exact: Option<Vec<SurdScalar>>,
    /// True when an exact representation was lost along the way.
    pub downgraded: bool,
    pub flags: SymbolFlags,
}

impl SymbolMatrix {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn exact_entry(&self, row: usize, col: usize) -> Option<&SurdScalar> {
        self.exact.as_ref().map(|m| &m[row * self.entries.ncols() + col])
    }

    fn from_eval(freq: Frequency, eval: EvalMatrix) -> Self {
        let flags = eval.flags();
        SymbolMatrix {
            freq,
            entries: eval.float,
            exact: eval.exact,
            downgraded: eval.downgraded,
            flags,
        }
    }

    /// Max entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Working representation during evaluation. When `exact` is present the
/// float side is derived from it, so exact zeros are float zeros bit-for-bit.
struct EvalMatrix {
    d: usize,
    float: DMatrix<Complex64>,
    exact: Option<Vec<SurdScalar>>,
    downgraded: bool,
}

impl EvalMatrix {
    fn zero(d: usize) -> Self {
        EvalMatrix {
            d,
            float: DMatrix::zeros(d, d),
            exact: Some(vec![SurdScalar::zero(); d * d]),
            downgraded: false,
        }
    }

    fn identity(d: usize) -> Self {
        let mut m = Self::zero(d);
        for k in 0..d {
            m.set_exact(k, k, SurdScalar::one());
        }
        m
    }

    fn scaled_identity(d: usize, c: &ScalarValue) -> Self {
        let mut m = Self::zero(d);
        match &c.exact {
            Some(e) => {
                for k in 0..d {
                    m.set_exact(k, k, e.clone());
                }
            }
            None => {
                m.exact = None;
                m.downgraded = true;
                for k in 0..d {
                    m.float[(k, k)] = c.float;
                }
            }
        }
        m
    }

    fn set_exact(&mut self, row: usize, col: usize, v: SurdScalar) {
        self.float[(row, col)] = v.to_complex64();
        if let Some(e) = self.exact.as_mut() {
            e[row * self.d + col] = v;
        }
    }

    fn add(mut self, other: EvalMatrix) -> EvalMatrix {
        let d = self.d;
        let exact = match (self.exact.take(), other.exact) {
            (Some(a), Some(b)) => {
                let mut out = Vec::with_capacity(d * d);
                let mut ok = true;
                for (x, y) in a.iter().zip(b.iter()) {
                    match x.add(y) {
                        Some(s) => out.push(s),
                        None => {
                            ok = false;
                            break;
                        }
                    }
                }
                ok.then_some(out)
            }
            _ => None,
        };
        let downgraded = self.downgraded || other.downgraded || exact.is_none();
        match exact {
            Some(e) => {
                let mut float = DMatrix::zeros(d, d);
                for r in 0..d {
                    for c in 0..d {
                        float[(r, c)] = e[r * d + c].to_complex64();
                    }
                }
                EvalMatrix { d, float, exact: Some(e), downgraded: self.downgraded }
            }
            None => EvalMatrix { d, float: self.float + other.float, exact: None, downgraded },
        }
    }

    fn mul(self, other: &EvalMatrix) -> EvalMatrix {
        let d = self.d;
        let exact = match (&self.exact, &other.exact) {
            (Some(a), Some(b)) => {
                let mut out = vec![SurdScalar::zero(); d * d];
                let mut ok = true;
                'outer: for r in 0..d {
                    for c in 0..d {
                        let mut acc = SurdScalar::zero();
                        for k in 0..d {
                            let x = &a[r * d + k];
                            if x.is_zero() {
                                continue;
                            }
                            let y = &b[k * d + c];
                            if y.is_zero() {
                                continue;
                            }
                            match acc.add(&x.mul(y)) {
                                Some(s) => acc = s,
                                None => {
                                    ok = false;
                                    break 'outer;
                                }
                            }
                        }
                        out[r * d + c] = acc;
                    }
                }
                ok.then_some(out)
            }
            _ => None,
        };
        match exact {
            Some(e) => {
                let mut float = DMatrix::zeros(d, d);
                for r in 0..d {
                    for c in 0..d {
                        float[(r, c)] = e[r * d + c].to_complex64();
                    }
                }
                EvalMatrix {
                    d,
                    float,
                    exact: Some(e),
                    downgraded: self.downgraded || other.downgraded,
                }
            }
            None => EvalMatrix {
                d,
                float: &self.float * &other.float,
                exact: None,
                downgraded: true,
            },
        }
    }

    fn flags(&self) -> SymbolFlags {
        let d = self.d;
        let mut is_zero = true;
        let mut is_diagonal = true;
        let mut is_lower = true;
        match &self.exact {
            Some(e) => {
                for r in 0..d {
                    for c in 0..d {
                        if !e[r * d + c].is_zero() {
                            is_zero = false;
                            if r != c {
                                is_diagonal = false;
                            }
                            if c > r {
                                is_lower = false;
                            }
                        }
                    }
                }
            }
            None => {
                let tol = ZERO_TOL * (1.0 + self.float.iter().map(|z| z.norm()).fold(0.0, f64::max));
                for r in 0..d {
                    for c in 0..d {
                        if self.float[(r, c)].norm() > tol {
                            is_zero = false;
                            if r != c {
                                is_diagonal = false;
                            }
                            if c > r {
                                is_lower = false;
                            }
                        }
                    }
                }
            }
        }
        SymbolFlags { is_zero, is_diagonal, is_lower_triangular: is_lower }
    }

    fn is_upper_triangular(&self) -> bool {
        let d = self.d;
        match &self.exact {
            Some(e) => (0..d).all(|r| (0..r).all(|c| e[r * d + c].is_zero())),
            None => {
                let tol = ZERO_TOL * (1.0 + self.float.iter().map(|z| z.norm()).fold(0.0, f64::max));
                (0..d).all(|r| (0..r).all(|c| self.float[(r, c)].norm() <= tol))
            }
        }
    }
}

fn half_rational(two_x: i64) -> BigRational {
    BigRational::new(two_x.into(), 2.into())
}

/// The symbol of a single normalized generator at `xi`, with exact entries.
pub fn generator_symbol(
    group: &GroupSpec,
    gen: Generator,
    xi: &Frequency,
) -> Result<SymbolMatrix, LieharmError> {
    let eval = generator_eval(group, gen, xi)?;
    Ok(SymbolMatrix::from_eval(xi.clone(), eval))
}

fn generator_eval(
    group: &GroupSpec,
    gen: Generator,
    xi: &Frequency,
) -> Result<EvalMatrix, LieharmError> {
    xi.validate(group)?;
    if !gen.kind.is_normal() {
        return Err(LieharmError::UnnormalizedGenerator(gen.kind.name().into()));
    }
    let d = dim(group, xi)?;
    let mut m = EvalMatrix::zero(d);
    match gen.kind {
        GenKind::Dx => {
            let j = gen.factor - 1;
            if j >= group.torus_rank {
                return Err(LieharmError::DimensionMismatch(format!(
                    "dx{} outside torus rank {}",
                    gen.factor, group.torus_rank
                )));
            }
            // i * xi_j times the identity
            let v = SurdScalar::from_rational(GaussRational::new(
                BigRational::from_integer(0.into()),
                BigRational::from_integer(xi.torus[j].into()),
            ));
            for k in 0..d {
                m.set_exact(k, k, v.clone());
            }
        }
        GenKind::D0 | GenKind::Dplus | GenKind::Dminus => {
            let k = gen.factor - 1;
            if k >= group.sphere_count {
                return Err(LieharmError::DimensionMismatch(format!(
                    "{}_{} outside sphere count {}",
                    gen.kind.name(),
                    gen.factor,
                    group.sphere_count
                )));
            }
            let two_ell = xi.sphere2[k];
            let slots = index_set(xi);
            for (col, idx) in slots.iter().enumerate() {
                let two_n = idx.sphere2n[k];
                match gen.kind {
                    GenKind::D0 => {
                        let v = SurdScalar::from_rational(GaussRational::real(half_rational(two_n)));
                        m.set_exact(col, col, v);
                    }
                    GenKind::Dplus => {
                        // -sqrt((l-n)(l+n+1)) at (n+1, n); radicand (L-N)(L+N+2)/4
                        if two_n < two_ell {
                            let rad = ((two_ell - two_n) * (two_ell + two_n + 2)) as u64;
                            let v = SurdScalar::new(GaussRational::from_ratio(-1, 2), rad);
                            let row = shifted_position(xi, idx, k, two_n + 2);
                            m.set_exact(row, col, v);
                        }
                    }
                    GenKind::Dminus => {
                        // -sqrt((l+n)(l-n+1)) at (n-1, n)
                        if two_n > -two_ell {
                            let rad = ((two_ell + two_n) * (two_ell - two_n + 2)) as u64;
                            let v = SurdScalar::new(GaussRational::from_ratio(-1, 2), rad);
                            let row = shifted_position(xi, idx, k, two_n - 2);
                            m.set_exact(row, col, v);
                        }
                    }
                    _ => unreachable!(),
                }
            }
        }
        _ => unreachable!(),
    }
    Ok(m)
}

fn shifted_position(xi: &Frequency, idx: &MultiIndex, factor: usize, new_two_n: i64) -> usize {
    let mut shifted = idx.clone();
    shifted.sphere2n[factor] = new_two_n;
    crate::duals::index_position(xi, &shifted)
}

/// Evaluate the symbol of an arbitrary operator expression at `xi`.
/// The expression is normalized first.
pub fn symbol(
    group: &GroupSpec,
    expr: &OperatorExpr,
    xi: &Frequency,
) -> Result<SymbolMatrix, LieharmError> {
    let normalized = normalize(expr);
    let d = dim(group, xi)?;
    let eval = eval_expr(group, &normalized, xi, d)?;
    Ok(SymbolMatrix::from_eval(xi.clone(), eval))
}

fn eval_expr(
    group: &GroupSpec,
    expr: &OperatorExpr,
    xi: &Frequency,
    d: usize,
) -> Result<EvalMatrix, LieharmError> {
    match expr {
        OperatorExpr::Scalar(lit) => Ok(EvalMatrix::scaled_identity(d, &lit.value())),
        OperatorExpr::Gen(g) => generator_eval(group, *g, xi),
        OperatorExpr::Sum(children) => {
            let mut acc = EvalMatrix::zero(d);
            for c in children {
                acc = acc.add(eval_expr(group, c, xi, d)?);
            }
            Ok(acc)
        }
        OperatorExpr::Prod(children) => {
            let mut acc = EvalMatrix::identity(d);
            for c in children {
                let rhs = eval_expr(group, c, xi, d)?;
                acc = acc.mul(&rhs);
            }
            Ok(acc)
        }
        OperatorExpr::Pow(base, k) => {
            let mut acc = EvalMatrix::identity(d);
            let b = eval_expr(group, base, xi, d)?;
            for _ in 0..*k {
                acc = acc.mul(&b);
            }
            Ok(acc)
        }
    }
}

/// Structure classification of a system over a sample of frequencies, in the
/// fixed basis of this crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum StructureClass {
    Diagonal,
    /// Lower-triangular. `reindexed` records that the raw symbols were
    /// upper-triangular and are treated as lower-triangular after the global
    /// index reversal `n -> -n`.
    LowerTriangular { reindexed: bool },
    General,
}

impl StructureClass {
    pub fn is_triangular_or_diagonal(self) -> bool {
        !matches!(self, StructureClass::General)
    }
}

/// Classify the strongest structural property holding for every operator at
/// every sampled frequency.
pub fn structure(
    sys: &SystemDef,
    frequencies: &[Frequency],
) -> Result<StructureClass, LieharmError> {
    if frequencies.is_empty() {
        return Err(LieharmError::Invalid("empty frequency sample".into()));
    }
    let normalized = sys.normalized();
    let mut all_diag = true;
    let mut all_lower = true;
    let mut all_upper = true;
    for xi in frequencies {
        let d = dim(&sys.group, xi)?;
        for (_, op) in &normalized.ops {
            let eval = eval_expr(&sys.group, op, xi, d)?;
            let flags = eval.flags();
            all_diag &= flags.is_diagonal;
            all_lower &= flags.is_lower_triangular;
            all_upper &= eval.is_upper_triangular();
            if !all_diag && !all_lower && !all_upper {
                return Ok(StructureClass::General);
            }
        }
    }
    if all_diag {
        Ok(StructureClass::Diagonal)
    } else if all_lower {
        Ok(StructureClass::LowerTriangular { reindexed: false })
    } else {
        Ok(StructureClass::LowerTriangular { reindexed: true })
    }
}

/// Diagonal entries `sigma_k^j(xi)` for every operator of the system, as an
/// `r x d` table, with exact values when available.
#[derive(Debug, Clone)]
pub struct DiagonalTable {
    pub values: Vec<Vec<Complex64>>,
    pub exact: Vec<Option<Vec<SurdScalar>>>,
}

pub fn diagonal_entries(sys: &SystemDef, xi: &Frequency) -> Result<DiagonalTable, LieharmError> {
    let normalized = sys.normalized();
    let d = dim(&sys.group, xi)?;
    let mut values = Vec::with_capacity(normalized.ops.len());
    let mut exact = Vec::with_capacity(normalized.ops.len());
    for (_, op) in &normalized.ops {
        let eval = eval_expr(&sys.group, op, xi, d)?;
        values.push((0..d).map(|k| eval.float[(k, k)]).collect());
        exact.push(eval.exact.as_ref().map(|e| (0..d).map(|k| e[k * d + k].clone()).collect()));
    }
    Ok(DiagonalTable { values, exact })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opalg::{parse_system, ScalarLit};
    use approx::assert_abs_diff_eq;

    fn sphere_group() -> GroupSpec {
        GroupSpec::new(0, 1).unwrap()
    }

    fn sphere_freq(two_ell: i64) -> Frequency {
        Frequency::new(vec![], vec![two_ell])
    }

    #[test]
    fn d0_at_three_halves() {
        let m = generator_symbol(
            &sphere_group(),
            Generator { kind: GenKind::D0, factor: 1 },
            &sphere_freq(3),
        )
        .unwrap();
        let diag: Vec<f64> = (0..4).map(|k| m.entries[(k, k)].re).collect();
        assert_eq!(diag, vec![-1.5, -0.5, 0.5, 1.5]);
        assert!(m.flags.is_diagonal);
    }

    #[test]
    fn dplus_at_zero_is_zero() {
        let m = generator_symbol(
            &sphere_group(),
            Generator { kind: GenKind::Dplus, factor: 1 },
            &sphere_freq(0),
        )
        .unwrap();
        assert!(m.flags.is_zero);
        assert_eq!(m.dim(), 1);
    }

    #[test]
    fn dplus_at_one_subdiagonal() {
        let m = generator_symbol(
            &sphere_group(),
            Generator { kind: GenKind::Dplus, factor: 1 },
            &sphere_freq(2),
        )
        .unwrap();
        let s2 = 2f64.sqrt();
        assert_abs_diff_eq!(m.entries[(1, 0)].re, -s2, epsilon = 1e-14);
        assert_abs_diff_eq!(m.entries[(2, 1)].re, -s2, epsilon = 1e-14);
        assert_eq!(m.entries[(0, 1)], Complex64::new(0.0, 0.0));
        assert!(m.flags.is_lower_triangular);
        assert!(!m.flags.is_diagonal);
    }

    #[test]
    fn ladder_product_is_diagonal() {
        // dplus*dminus at l=1 -> diag(0, 2, 2), exactly
        let sys = parse_system("group S3^1\nP1 = dplus_1*dminus_1\n").unwrap();
        let m = symbol(&sys.group, &sys.ops[0].1, &sphere_freq(2)).unwrap();
        assert!(m.flags.is_diagonal);
        let diag: Vec<f64> = (0..3).map(|k| m.entries[(k, k)].re).collect();
        assert_eq!(diag, vec![0.0, 2.0, 2.0]);
        let e = m.exact.as_ref().unwrap();
        assert!(e[0].is_zero());
        assert_eq!(e[4].as_rational().unwrap(), &GaussRational::from_i64(2));
    }

    #[test]
    fn ladder_products_exhaustive() {
        // dplus*dminus = (l+n)(l-n+1), dminus*dplus = (l-n)(l+n+1), all l <= 10
        let group = sphere_group();
        let pm = parse_system("group S3^1\nP1 = dplus_1*dminus_1\n").unwrap();
        let mp = parse_system("group S3^1\nP1 = dminus_1*dplus_1\n").unwrap();
        for two_ell in 0..=20i64 {
            let xi = sphere_freq(two_ell);
            let a = symbol(&group, &pm.ops[0].1, &xi).unwrap();
            let b = symbol(&group, &mp.ops[0].1, &xi).unwrap();
            assert!(a.flags.is_diagonal && b.flags.is_diagonal);
            for (pos, idx) in index_set(&xi).iter().enumerate() {
                let l = two_ell as f64 / 2.0;
                let n = idx.sphere2n[0] as f64 / 2.0;
                assert_abs_diff_eq!(a.entries[(pos, pos)].re, (l + n) * (l - n + 1.0), epsilon = 1e-10);
                assert_abs_diff_eq!(b.entries[(pos, pos)].re, (l - n) * (l + n + 1.0), epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn example_higher_order_symbol() {
        // a d0^p + i b dplus dminus with a=b=1, p=2 at l=1 -> diag(1, 2i, 1+2i)
        let sys = parse_system("group S3^1\nP1 = d0_1^2 + i*dplus_1*dminus_1\n").unwrap();
        let m = symbol(&sys.group, &sys.ops[0].1, &sphere_freq(2)).unwrap();
        assert!(m.flags.is_diagonal);
        assert_abs_diff_eq!(m.entries[(0, 0)].re, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(m.entries[(0, 0)].im, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(m.entries[(1, 1)].im, 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(m.entries[(2, 2)].re, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(m.entries[(2, 2)].im, 2.0, epsilon = 1e-14);
    }

    #[test]
    fn zero_operator_flagged() {
        let group = GroupSpec::new(1, 0).unwrap();
        let m = symbol(
            &group,
            &OperatorExpr::Scalar(ScalarLit::integer(0)),
            &Frequency::new(vec![5], vec![]),
        )
        .unwrap();
        assert!(m.flags.is_zero);
    }

    #[test]
    fn torus_generator_symbol() {
        let group = GroupSpec::new(2, 0).unwrap();
        let xi = Frequency::new(vec![3, -5], vec![]);
        let m = generator_symbol(&group, Generator { kind: GenKind::Dx, factor: 2 }, &xi).unwrap();
        assert_eq!(m.entries[(0, 0)], Complex64::new(0.0, -5.0));
    }

    #[test]
    fn normalize_preserves_symbol() {
        // symbol(normalize(e)) == symbol(e) since symbol() normalizes anyway;
        // check D1/D2/D3 against their ladder definitions numerically.
        let group = sphere_group();
        let xi = sphere_freq(3);
        for (text, check) in [
            // d0 = i*D3 => D3 = -i*d0
            ("group S3^1\nP1 = D3_1\n", "group S3^1\nP1 = (-i)*d0_1\n"),
            // dplus = i D1 - D2, dminus = i D1 + D2 => D1 = -(i/2)(dplus+dminus)
            ("group S3^1\nP1 = D1_1\n", "group S3^1\nP1 = (-0.5i)*dplus_1 + (-0.5i)*dminus_1\n"),
            ("group S3^1\nP1 = D2_1\n", "group S3^1\nP1 = (-0.5)*dplus_1 + 0.5*dminus_1\n"),
        ] {
            let a = parse_system(text).unwrap();
            let b = parse_system(check).unwrap();
            let ma = symbol(&group, &a.ops[0].1, &xi).unwrap();
            let mb = symbol(&group, &b.ops[0].1, &xi).unwrap();
            assert!((ma.entries.clone() - mb.entries.clone()).norm() < 1e-12, "{text}");
        }
    }

    #[test]
    fn structure_classification() {
        let freqs: Vec<Frequency> = (0..=6).map(sphere_freq).collect();
        let diag = parse_system("group S3^1\nP1 = d0_1^2 + i*dplus_1*dminus_1\n").unwrap();
        assert_eq!(structure(&diag, &freqs).unwrap(), StructureClass::Diagonal);
        let lower = parse_system("group S3^1\nP1 = dplus_1\n").unwrap();
        assert_eq!(
            structure(&lower, &freqs).unwrap(),
            StructureClass::LowerTriangular { reindexed: false }
        );
        let upper = parse_system("group S3^1\nP1 = dminus_1\n").unwrap();
        assert_eq!(
            structure(&upper, &freqs).unwrap(),
            StructureClass::LowerTriangular { reindexed: true }
        );
        let general = parse_system("group S3^1\nP1 = dplus_1 + dminus_1\n").unwrap();
        assert_eq!(structure(&general, &freqs).unwrap(), StructureClass::General);
        // pure torus systems are always diagonal
        let torus = parse_system("group T^2\nP1 = dx1 + 2*dx2\n").unwrap();
        let tf = vec![Frequency::new(vec![1, 2], vec![]), Frequency::new(vec![0, 0], vec![])];
        assert_eq!(structure(&torus, &tf).unwrap(), StructureClass::Diagonal);
    }

    #[test]
    fn kronecker_ordering_first_factor_slowest() {
        // On S3^2, d0_2 must act within each block of the first factor.
        let group = GroupSpec::new(0, 2).unwrap();
        let xi = Frequency::new(vec![], vec![1, 1]); // l = (1/2, 1/2), dim 4
        let m = generator_symbol(&group, Generator { kind: GenKind::D0, factor: 2 }, &xi).unwrap();
        let diag: Vec<f64> = (0..4).map(|k| m.entries[(k, k)].re).collect();
        assert_eq!(diag, vec![-0.5, 0.5, -0.5, 0.5]);
        let m1 = generator_symbol(&group, Generator { kind: GenKind::D0, factor: 1 }, &xi).unwrap();
        let diag1: Vec<f64> = (0..4).map(|k| m1.entries[(k, k)].re).collect();
        assert_eq!(diag1, vec![-0.5, -0.5, 0.5, 0.5]);
    }

    #[test]
    fn scalar_times_identity() {
        let sys = parse_system("group T^1xS3^1\nP1 = (2+1i)\n").unwrap();
        let xi = Frequency::new(vec![4], vec![2]);
        let table = diagonal_entries(&sys, &xi).unwrap();
        for v in &table.values[0] {
            assert_eq!(*v, Complex64::new(2.0, 1.0));
        }
    }

    #[test]
    fn downgrade_recorded_for_pi_coefficients() {
        let sys = parse_system("group T^1\nP1 = pi*dx1\n").unwrap();
        let m = symbol(&sys.group, &sys.ops[0].1, &Frequency::new(vec![3], vec![])).unwrap();
        assert!(m.exact.is_none());
        assert!(m.downgraded);
        assert_abs_diff_eq!(m.entries[(0, 0)].im, 3.0 * std::f64::consts::PI, epsilon = 1e-12);
    }
}
