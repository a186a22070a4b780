//! Exact linear Diophantine solving via Smith normal form over the integers.
//! Matrices here are tiny (a handful of equations in r+s unknowns), so the
//! textbook algorithm with arbitrary-precision integers is plenty.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Outcome of solving `A y = b` over the integers.
#[derive(Debug, Clone, PartialEq)]
pub enum IntSolve {
    /// No integer solutions (inconsistent over Q, or integrality fails).
    NoSolution,
    /// Exactly one integer solution.
    Unique(Vec<BigInt>),
    /// Infinitely many: a particular solution plus an integer kernel basis.
    Infinite { particular: Vec<BigInt>, kernel: Vec<Vec<BigInt>> },
}

/// Clear denominators row-wise and solve over Z.
pub fn solve_rational_system(a: &[Vec<BigRational>], b: &[BigRational]) -> IntSolve {
    assert_eq!(a.len(), b.len());
    let rows = a.len();
    let cols = a.first().map(|r| r.len()).unwrap_or(0);
    let mut ai = vec![vec![BigInt::zero(); cols]; rows];
    let mut bi = vec![BigInt::zero(); rows];
    for r in 0..rows {
        let mut lcm = BigInt::one();
        for v in a[r].iter().chain(std::iter::once(&b[r])) {
            lcm = lcm.lcm(v.denom());
        }
        for c in 0..cols {
            ai[r][c] = (&a[r][c] * BigRational::from_integer(lcm.clone())).to_integer();
        }
        bi[r] = (&b[r] * BigRational::from_integer(lcm.clone())).to_integer();
    }
    solve_integer_system(&ai, &bi)
}

/// Solve `A y = b` with integer entries via `U A V = D` (Smith form):
/// `D z = U b`, `y = V z`.
pub fn solve_integer_system(a: &[Vec<BigInt>], b: &[BigInt]) -> IntSolve {
    let rows = a.len();
    let cols = a.first().map(|r| r.len()).unwrap_or(0);
    if cols == 0 {
        // Only consistency to check.
        return if b.iter().all(Zero::is_zero) {
            IntSolve::Unique(vec![])
        } else {
            IntSolve::NoSolution
        };
    }
    let (d, u, v) = smith_normal_form(a, rows, cols);
    // c = U b
    let c: Vec<BigInt> = (0..rows)
        .map(|r| (0..rows).map(|k| &u[r][k] * &b[k]).sum())
        .collect();
    let rank = (0..rows.min(cols)).take_while(|&i| !d[i][i].is_zero()).count();
    let mut z = vec![BigInt::zero(); cols];
    for i in 0..rows {
        if i < rank {
            let (q, r) = c[i].div_rem(&d[i][i]);
            if !r.is_zero() {
                return IntSolve::NoSolution;
            }
            z[i] = q;
        } else if !c[i].is_zero() {
            return IntSolve::NoSolution;
        }
    }
    // y = V z
    let particular: Vec<BigInt> = (0..cols)
        .map(|r| (0..cols).map(|k| &v[r][k] * &z[k]).sum())
        .collect();
    if rank == cols {
        IntSolve::Unique(particular)
    } else {
        let kernel: Vec<Vec<BigInt>> = (rank..cols)
            .map(|k| (0..cols).map(|r| v[r][k].clone()).collect())
            .collect();
        IntSolve::Infinite { particular, kernel }
    }
}

/// Smith normal form `U A V = D` with unimodular `U` (rows x rows) and `V`
/// (cols x cols). Returns (D, U, V).
#[allow(clippy::needless_range_loop)]
fn smith_normal_form(
    a: &[Vec<BigInt>],
    rows: usize,
    cols: usize,
) -> (Vec<Vec<BigInt>>, Vec<Vec<BigInt>>, Vec<Vec<BigInt>>) {
    let mut d: Vec<Vec<BigInt>> = a.to_vec();
    let mut u = identity(rows);
    let mut v = identity(cols);
    let mut t = 0usize;
    while t < rows.min(cols) {
        // Find a nonzero pivot in the trailing block.
        let mut pivot: Option<(usize, usize)> = None;
        for r in t..rows {
            for c in t..cols {
                if !d[r][c].is_zero() {
                    let better = match pivot {
                        None => true,
                        Some((pr, pc)) => d[r][c].abs() < d[pr][pc].abs(),
                    };
                    if better {
                        pivot = Some((r, c));
                    }
                }
            }
        }
        let Some((pr, pc)) = pivot else { break };
        d.swap(t, pr);
        u.swap(t, pr);
        swap_cols(&mut d, t, pc);
        swap_cols(&mut v, t, pc);
        // Eliminate column and row t; repeat until clean.
        loop {
            let mut dirty = false;
            for r in (t + 1)..rows {
                if d[r][t].is_zero() {
                    continue;
                }
                let q = div_round(&d[r][t], &d[t][t]);
                if !q.is_zero() {
                    row_sub(&mut d, r, t, &q);
                    row_sub(&mut u, r, t, &q);
                }
                if !d[r][t].is_zero() {
                    // remainder smaller than pivot: swap up and restart
                    d.swap(t, r);
                    u.swap(t, r);
                    dirty = true;
                }
            }
            for c in (t + 1)..cols {
                if d[t][c].is_zero() {
                    continue;
                }
                let q = div_round(&d[t][c], &d[t][t]);
                if !q.is_zero() {
                    col_sub(&mut d, c, t, &q);
                    col_sub(&mut v, c, t, &q);
                }
                if !d[t][c].is_zero() {
                    swap_cols(&mut d, t, c);
                    swap_cols(&mut v, t, c);
                    dirty = true;
                }
            }
            if !dirty
                && (t + 1..rows).all(|r| d[r][t].is_zero())
                && (t + 1..cols).all(|c| d[t][c].is_zero())
            {
                break;
            }
        }
        if d[t][t].is_negative() {
            for c in 0..cols {
                d[t][c] = -d[t][c].clone();
            }
            for c in 0..rows {
                u[t][c] = -u[t][c].clone();
            }
        }
        t += 1;
    }
    (d, u, v)
}

fn identity(n: usize) -> Vec<Vec<BigInt>> {
    (0..n)
        .map(|r| (0..n).map(|c| if r == c { BigInt::one() } else { BigInt::zero() }).collect())
        .collect()
}

fn swap_cols(m: &mut [Vec<BigInt>], a: usize, b: usize) {
    if a != b {
        for row in m.iter_mut() {
            row.swap(a, b);
        }
    }
}

fn row_sub(m: &mut [Vec<BigInt>], target: usize, source: usize, q: &BigInt) {
    let src = m[source].clone();
    for (t, s) in m[target].iter_mut().zip(src.iter()) {
        *t -= q * s;
    }
}

fn col_sub(m: &mut [Vec<BigInt>], target: usize, source: usize, q: &BigInt) {
    for row in m.iter_mut() {
        let s = row[source].clone();
        row[target] -= q * s;
    }
}

/// Rounded division so remainders shrink in absolute value.
fn div_round(a: &BigInt, b: &BigInt) -> BigInt {
    let (q, r) = a.div_rem(b);
    if r.abs() * 2 > b.abs() {
        if (r.is_negative()) == (b.is_negative()) {
            q + 1
        } else {
            q - 1
        }
    } else {
        q
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bi(v: i64) -> BigInt {
        BigInt::from(v)
    }

    fn mat(rows: &[&[i64]]) -> Vec<Vec<BigInt>> {
        rows.iter().map(|r| r.iter().map(|&v| bi(v)).collect()).collect()
    }

    fn check_solution(a: &[Vec<BigInt>], b: &[BigInt], y: &[BigInt]) {
        for (row, rhs) in a.iter().zip(b) {
            let got: BigInt = row.iter().zip(y).map(|(c, x)| c * x).sum();
            assert_eq!(&got, rhs);
        }
    }

    #[test]
    fn unique_solution() {
        let a = mat(&[&[2, 1], &[1, -1]]);
        let b = vec![bi(5), bi(1)];
        match solve_integer_system(&a, &b) {
            IntSolve::Unique(y) => {
                check_solution(&a, &b, &y);
                assert_eq!(y, vec![bi(2), bi(1)]);
            }
            other => panic!("expected unique, got {other:?}"),
        }
    }

    #[test]
    fn no_integer_solution() {
        // 2y = 1 has no integer solution
        let a = mat(&[&[2]]);
        let b = vec![bi(1)];
        assert_eq!(solve_integer_system(&a, &b), IntSolve::NoSolution);
    }

    #[test]
    fn inconsistent_system() {
        let a = mat(&[&[1, 1], &[1, 1]]);
        let b = vec![bi(0), bi(1)];
        assert_eq!(solve_integer_system(&a, &b), IntSolve::NoSolution);
    }

    #[test]
    fn infinite_solutions_with_kernel() {
        // y1 + 2 y2 = 4 over Z^2
        let a = mat(&[&[1, 2]]);
        let b = vec![bi(4)];
        match solve_integer_system(&a, &b) {
            IntSolve::Infinite { particular, kernel } => {
                check_solution(&a, &b, &particular);
                assert_eq!(kernel.len(), 1);
                let k = &kernel[0];
                let dot: BigInt = k.iter().zip(&a[0]).map(|(x, c)| x * c).sum();
                assert!(dot.is_zero());
                assert!(!k.iter().all(Zero::is_zero));
            }
            other => panic!("expected infinite, got {other:?}"),
        }
    }

    #[test]
    fn rational_scaling() {
        // y1/2 + y2/3 = 1 -> 3 y1 + 2 y2 = 6
        let a = vec![vec![
            BigRational::new(1.into(), 2.into()),
            BigRational::new(1.into(), 3.into()),
        ]];
        let b = vec![BigRational::from_integer(1.into())];
        match solve_rational_system(&a, &b) {
            IntSolve::Infinite { particular, .. } => {
                let v: BigRational = a[0]
                    .iter()
                    .zip(&particular)
                    .map(|(c, y)| c * BigRational::from_integer(y.clone()))
                    .sum();
                assert_eq!(v, b[0]);
            }
            other => panic!("expected infinite, got {other:?}"),
        }
    }

    #[test]
    fn zero_matrix_cases() {
        let a = mat(&[&[0, 0]]);
        assert!(matches!(solve_integer_system(&a, &[bi(0)]), IntSolve::Infinite { .. }));
        assert_eq!(solve_integer_system(&a, &[bi(3)]), IntSolve::NoSolution);
    }

    #[test]
    fn random_consistency() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        for _ in 0..200 {
            let rows = rng.gen_range(1..4);
            let cols = rng.gen_range(1..4);
            let a: Vec<Vec<BigInt>> = (0..rows)
                .map(|_| (0..cols).map(|_| bi(rng.gen_range(-4..=4))).collect())
                .collect();
            let y0: Vec<BigInt> = (0..cols).map(|_| bi(rng.gen_range(-3..=3))).collect();
            let b: Vec<BigInt> =
                a.iter().map(|row| row.iter().zip(&y0).map(|(c, y)| c * y).sum()).collect();
            match solve_integer_system(&a, &b) {
                IntSolve::Unique(y) => check_solution(&a, &b, &y),
                IntSolve::Infinite { particular, kernel } => {
                    check_solution(&a, &b, &particular);
                    for k in &kernel {
                        let zero = vec![BigInt::zero(); rows];
                        check_solution(&a, &zero, k);
                    }
                }
                IntSolve::NoSolution => panic!("constructed system must be solvable"),
            }
        }
    }
}
