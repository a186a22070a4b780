//! Independent numerical ground truth: Wigner matrices `t^l` on S^3 = SU(2)
//! from the symmetric-power construction, finite-difference generator actions,
//! and pointwise partial-sum evaluation of coefficient fields.
//!
//! Conventions locked by the anchor tests: quaternion `(w, x, y, z)` maps to
//! `U = w*I - i(x s1 + y s2 + z s3)`, the one-parameter subgroup of `Y_j` is
//! `t -> (cos(t/2), sin(t/2) e_j)`, and the representation space carries the
//! basis `f_n = (-1)^(l+n) z1^(l+n) z2^(l-n) / sqrt((l+n)!(l-n)!)` in which
//! `d0 = i*D3` is `diag(n)` and `dplus` is the sub-diagonal ladder of the
//! symbols module.

use crate::coeffs::CoeffField;
use crate::duals::{weight, GroupSpec};
use crate::error::LieharmError;
use crate::opalg::GenKind;
use nalgebra::DMatrix;
use num_complex::Complex64;

/// SU(2) element as a unit quaternion (scalar part first).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Su2 {
    pub q: [f64; 4],
}

impl Su2 {
    pub fn identity() -> Self {
        Self { q: [1.0, 0.0, 0.0, 0.0] }
    }

    pub fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Self { q: [w, x, y, z] }
    }

    pub fn norm(&self) -> f64 {
        self.q.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn mul(&self, other: &Su2) -> Su2 {
        let [a0, a1, a2, a3] = self.q;
        let [b0, b1, b2, b3] = other.q;
        Su2::new(
            a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
            a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
            a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
            a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
        )
    }

    /// One-parameter subgroup `exp(t Y_axis)`, axis in {0, 1, 2}.
    pub fn one_param(axis: usize, t: f64) -> Su2 {
        let mut v = [0.0; 3];
        v[axis] = (t / 2.0).sin();
        Su2::new((t / 2.0).cos(), v[0], v[1], v[2])
    }

    /// The 2x2 unitary `w*I - i(x s1 + y s2 + z s3)`.
    fn to_matrix(self) -> [[Complex64; 2]; 2] {
        let [w, x, y, z] = self.q;
        [
            [Complex64::new(w, -z), Complex64::new(-y, -x)],
            [Complex64::new(y, -x), Complex64::new(w, z)],
        ]
    }
}

/// A point of `T^r x (S^3)^s`: one angle per torus coordinate, one unit
/// quaternion per sphere factor.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupPoint {
    pub angles: Vec<f64>,
    pub spheres: Vec<Su2>,
}

impl GroupPoint {
    pub fn identity(group: &GroupSpec) -> Self {
        Self {
            angles: vec![0.0; group.torus_rank],
            spheres: vec![Su2::identity(); group.sphere_count],
        }
    }

    pub fn validate(&self, group: &GroupSpec) -> Result<(), LieharmError> {
        if self.angles.len() != group.torus_rank || self.spheres.len() != group.sphere_count {
            return Err(LieharmError::DimensionMismatch(format!(
                "group point shape ({}, {}) does not match {}",
                self.angles.len(),
                self.spheres.len(),
                group
            )));
        }
        for s in &self.spheres {
            if (s.norm() - 1.0).abs() > 1e-12 {
                return Err(LieharmError::Invalid(format!(
                    "sphere point quaternion norm {} is not 1",
                    s.norm()
                )));
            }
        }
        Ok(())
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn binom(n: usize, k: usize) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// The Wigner matrix `t^l(g)` for doubled parameter `two_ell`, in the same
/// basis and index order as the symbols module.
pub fn wigner_matrix(two_ell: i64, g: &Su2) -> Result<DMatrix<Complex64>, LieharmError> {
    if two_ell < 0 {
        return Err(LieharmError::Invalid(format!("negative doubled parameter {two_ell}")));
    }
    if (g.norm() - 1.0).abs() > 1e-12 {
        return Err(LieharmError::Invalid(format!("quaternion norm {} is not 1", g.norm())));
    }
    let big_l = two_ell as usize;
    let d = big_l + 1;
    let u = g.to_matrix();
    let (a, b) = (u[0][0], u[0][1]);
    let (c, e) = (u[1][0], u[1][1]);
    // Column j encodes l+n = j: f_n(zU) expands over monomials z1^i z2^(L-i).
    let mut t = DMatrix::zeros(d, d);
    for j in 0..d {
        let sj = if j % 2 == 0 { 1.0 } else { -1.0 };
        let gj = (factorial(j) * factorial(big_l - j)).sqrt();
        // (a z1 + c z2)^j (b z1 + e z2)^(L-j)
        for i1 in 0..=j {
            let pow1 = a.powu(i1 as u32) * c.powu((j - i1) as u32) * binom(j, i1);
            for i2 in 0..=(big_l - j) {
                let i = i1 + i2;
                let coeff =
                    pow1 * b.powu(i2 as u32) * e.powu((big_l - j - i2) as u32) * binom(big_l - j, i2);
                let si = if i % 2 == 0 { 1.0 } else { -1.0 };
                let gi = (factorial(i) * factorial(big_l - i)).sqrt();
                t[(i, j)] += coeff * (sj * si * gi / gj);
            }
        }
    }
    Ok(t)
}

/// Observed symbol of a generator from central finite differences of the
/// Wigner matrices at the identity.
pub fn numeric_generator_action(
    gen: GenKind,
    two_ell: i64,
    step: f64,
) -> Result<DMatrix<Complex64>, LieharmError> {
    if !(step > 0.0 && step <= 1e-2) {
        return Err(LieharmError::Invalid(format!("step {step} outside (0, 1e-2]")));
    }
    let diff = |axis: usize| -> Result<DMatrix<Complex64>, LieharmError> {
        let plus = wigner_matrix(two_ell, &Su2::one_param(axis, step))?;
        let minus = wigner_matrix(two_ell, &Su2::one_param(axis, -step))?;
        Ok((plus - minus) / Complex64::new(2.0 * step, 0.0))
    };
    let i = Complex64::new(0.0, 1.0);
    Ok(match gen {
        GenKind::D1 => diff(0)?,
        GenKind::D2 => diff(1)?,
        GenKind::D3 => diff(2)?,
        // d0 = i D3, dplus = i D1 - D2, dminus = i D1 + D2
        GenKind::D0 => diff(2)?.map(|z| i * z),
        GenKind::Dplus => diff(0)?.map(|z| i * z) - diff(1)?,
        GenKind::Dminus => diff(0)?.map(|z| i * z) + diff(1)?,
        GenKind::Dx => {
            return Err(LieharmError::Invalid("dx has no sphere action".into()));
        }
    })
}

/// Truncated Peter-Weyl partial sum
/// `u(g) = sum_xi d_xi sum_{A,B} u(xi)_{AB} xi_{BA}(g)`
/// over the stored frequencies with weight <= cap, in canonical order.
pub fn pointwise_eval(
    field: &CoeffField,
    point: &GroupPoint,
    cap: f64,
) -> Result<Complex64, LieharmError> {
    point.validate(&field.group)?;
    let mut total = Complex64::new(0.0, 0.0);
    for xi in field.frequencies_canonical() {
        let w = weight(&field.group, &xi)?;
        if w > cap {
            continue;
        }
        let coeffs = field.get(&xi).expect("listed frequency present");
        let d = coeffs.nrows();
        // torus character e^{i x.n}
        let phase: f64 = xi
            .torus
            .iter()
            .zip(&point.angles)
            .map(|(&n, &x)| n as f64 * x)
            .sum();
        let torus_char = Complex64::from_polar(1.0, phase);
        // per-factor Wigner matrices
        let mut wigs = Vec::with_capacity(xi.sphere2.len());
        for (k, &two_ell) in xi.sphere2.iter().enumerate() {
            wigs.push(wigner_matrix(two_ell, &point.spheres[k])?);
        }
        let dims: Vec<usize> = xi.sphere2.iter().map(|&l| l as usize + 1).collect();
        let entry = |flat: usize, other: usize| -> Complex64 {
            // xi_{BA} with B = flat row of the product rep, A = column
            let mut val = torus_char;
            let (mut fb, mut fa) = (flat, other);
            for (k, &dk) in dims.iter().enumerate().rev() {
                let (bk, ak) = (fb % dk, fa % dk);
                fb /= dk;
                fa /= dk;
                val *= wigs[k][(bk, ak)];
            }
            val
        };
        let mut contrib = Complex64::new(0.0, 0.0);
        for a in 0..d {
            for b in 0..d {
                contrib += coeffs[(a, b)] * entry(b, a);
            }
        }
        total += contrib * d as f64;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_abs(m: &DMatrix<Complex64>) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    use crate::duals::Frequency;
    use crate::opalg::Generator;
    use crate::symbols::generator_symbol;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rand_su2(rng: &mut ChaCha8Rng) -> Su2 {
        let v: [f64; 4] = [rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5];
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        Su2::new(v[0] / n, v[1] / n, v[2] / n, v[3] / n)
    }

    #[test]
    fn trivial_and_half_representations() {
        let g = Su2::new(0.3, 0.5, -0.4, (1.0f64 - 0.09 - 0.25 - 0.16).sqrt());
        let t0 = wigner_matrix(0, &g).unwrap();
        assert!((t0[(0, 0)] - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        let t1 = wigner_matrix(1, &Su2::identity()).unwrap();
        assert!((t1.clone() - DMatrix::identity(2, 2)).norm() < 1e-14);
    }

    #[test]
    fn unitarity_and_homomorphism() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for two_ell in 0..=6i64 {
            for _ in 0..20 {
                let (g, h) = (rand_su2(&mut rng), rand_su2(&mut rng));
                let tg = wigner_matrix(two_ell, &g).unwrap();
                let th = wigner_matrix(two_ell, &h).unwrap();
                let tgh = wigner_matrix(two_ell, &g.mul(&h)).unwrap();
                let d = two_ell as usize + 1;
                let unit_err = (&tg * tg.adjoint() - DMatrix::identity(d, d)).norm();
                let homo_err = (tgh - &tg * th).norm();
                assert!(unit_err < 1e-10, "unitarity {unit_err} at 2l={two_ell}");
                assert!(homo_err < 1e-10, "homomorphism {homo_err} at 2l={two_ell}");
            }
        }
    }

    #[test]
    fn d3_eigenvalues() {
        let num = numeric_generator_action(GenKind::D3, 2, 1e-5).unwrap();
        // D3 t_mn = -i n t_mn
        for (k, n) in (-1i64..=1).enumerate() {
            let want = Complex64::new(0.0, -(n as f64));
            assert!((num[(k, k)] - want).norm() < 1e-6, "n={n}: {}", num[(k, k)]);
        }
    }

    #[test]
    fn d0_at_half() {
        let num = numeric_generator_action(GenKind::D0, 1, 1e-5).unwrap();
        assert!((num[(0, 0)] - Complex64::new(-0.5, 0.0)).norm() < 1e-6);
        assert!((num[(1, 1)] - Complex64::new(0.5, 0.0)).norm() < 1e-6);
    }

    #[test]
    fn generator_anchor_all_ladders() {
        // The basis-convention anchor: numeric action == symbol for all
        // generators and all l <= 3.
        let group = GroupSpec::new(0, 1).unwrap();
        for two_ell in 0..=6i64 {
            let xi = Frequency::new(vec![], vec![two_ell]);
            for kind in [GenKind::D0, GenKind::Dplus, GenKind::Dminus] {
                let sym = generator_symbol(&group, Generator { kind, factor: 1 }, &xi).unwrap();
                let num = numeric_generator_action(kind, two_ell, 1e-5).unwrap();
                let err = max_abs(&(num - sym.entries));
                assert!(err < 1e-6, "{kind:?} at 2l={two_ell}: {err}");
            }
        }
    }

    #[test]
    fn commutator_relations() {
        // [Y1,Y2] = Y3 cyclically, observed through the finite differences.
        let step = 1e-4;
        for two_ell in 1..=4i64 {
            let d1 = numeric_generator_action(GenKind::D1, two_ell, step).unwrap();
            let d2 = numeric_generator_action(GenKind::D2, two_ell, step).unwrap();
            let d3 = numeric_generator_action(GenKind::D3, two_ell, step).unwrap();
            let pairs = [(&d1, &d2, &d3), (&d2, &d3, &d1), (&d3, &d1, &d2)];
            for (a, b, c) in pairs {
                let err = max_abs(&(a * b - b * a - c.clone()));
                assert!(err < 1e-5, "commutator residual {err} at 2l={two_ell}");
            }
        }
    }

    #[test]
    fn pointwise_constant_function() {
        let group = GroupSpec::new(1, 1).unwrap();
        let mut field = CoeffField::new(group);
        field
            .insert(Frequency::new(vec![0], vec![0]), DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0)))
            .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5 {
            let p = GroupPoint {
                angles: vec![rng.gen::<f64>() * 6.28],
                spheres: vec![rand_su2(&mut rng)],
            };
            let v = pointwise_eval(&field, &p, 10.0).unwrap();
            assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn pointwise_matches_wigner_entry() {
        // Coefficients of t^{1/2}_{1/2,1/2}: u(l=1/2)_{AB} = delta_{A=B=1/2}/2.
        let group = GroupSpec::new(0, 1).unwrap();
        let mut field = CoeffField::new(group);
        let mut m = DMatrix::zeros(2, 2);
        m[(1, 1)] = Complex64::new(0.5, 0.0);
        field.insert(Frequency::new(vec![], vec![1]), m).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20 {
            let g = rand_su2(&mut rng);
            let v = pointwise_eval(&field, &GroupPoint { angles: vec![], spheres: vec![g] }, 5.0)
                .unwrap();
            let t = wigner_matrix(1, &g).unwrap();
            assert!((v - t[(1, 1)]).norm() < 1e-10, "mismatch {} vs {}", v, t[(1, 1)]);
        }
    }

    #[test]
    fn pointwise_index_order_multifactor() {
        // On S3^2 a product entry t^{1/2}_{bb} t^{1/2}_{aa} must be assembled
        // with factor 1 slowest.
        let group = GroupSpec::new(0, 2).unwrap();
        let mut field = CoeffField::new(group);
        let mut m = DMatrix::zeros(4, 4);
        // A = (1/2, -1/2) -> flat 1*2 + 0 = 2; put coefficient at (A, A)
        m[(2, 2)] = Complex64::new(0.25, 0.0); // 1/d_xi with d=4
        field.insert(Frequency::new(vec![], vec![1, 1]), m).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let (g1, g2) = (rand_su2(&mut rng), rand_su2(&mut rng));
        let v = pointwise_eval(
            &field,
            &GroupPoint { angles: vec![], spheres: vec![g1, g2] },
            10.0,
        )
        .unwrap();
        let t1 = wigner_matrix(1, &g1).unwrap();
        let t2 = wigner_matrix(1, &g2).unwrap();
        let want = t1[(1, 1)] * t2[(0, 0)];
        assert!((v - want).norm() < 1e-12);
    }
}
