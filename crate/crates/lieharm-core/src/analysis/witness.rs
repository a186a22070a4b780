//! Witness sequences for Diophantine-condition failure, and the
//! continued-fraction machinery behind the two-term torus search.

use crate::duals::Frequency;
use crate::exact::rational_ln;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Euclid, FromPrimitive, One, Signed, Zero};
use serde::Serialize;

/// One witness: a frequency and slot where the largest diagonal entry is
/// anomalously small, with `value < weight^(-exponent)` (exponent reported as
/// the achieved ratio shaved by 1e-9 so the inequality is strict).
#[derive(Debug, Clone, Serialize)]
pub struct Witness {
    pub freq: Frequency,
    pub slot: usize,
    pub value: f64,
    pub exponent: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct WitnessSequence {
    pub entries: Vec<Witness>,
    /// Number of escalation targets met (`exponent >= n - slack` for
    /// n = 1..=targets_met with strictly increasing exponents).
    pub targets_met: usize,
}

/// Witness exponents are ill-conditioned near weight 1; candidates below this
/// weight are ignored.
pub const MIN_WITNESS_WEIGHT: f64 = 2.0;

pub fn witness_exponent(value: f64, weight: f64) -> f64 {
    exponent_from_ln(value.ln(), weight)
}

pub fn exponent_from_ln(ln_value: f64, weight: f64) -> f64 {
    (-ln_value / weight.ln()) * (1.0 - 1e-9)
}

/// Greedy escalation chain: for each target n = 1..=targets pick the unused
/// candidate of smallest exponent with `e >= n - slack` and `e` above the
/// previous pick. Returns `None` unless every target is met.
pub fn select_chain(mut candidates: Vec<Witness>, targets: usize, slack: f64) -> Option<WitnessSequence> {
    candidates.retain(|c| c.weight >= MIN_WITNESS_WEIGHT && c.value > 0.0 && c.exponent.is_finite());
    candidates.sort_by(|a, b| a.exponent.total_cmp(&b.exponent));
    let mut picked: Vec<Witness> = Vec::with_capacity(targets);
    let mut used = vec![false; candidates.len()];
    let mut last = f64::NEG_INFINITY;
    for n in 1..=targets {
        let need = n as f64 - slack;
        let mut found = None;
        for (i, c) in candidates.iter().enumerate() {
            if used[i] || c.exponent < need || c.exponent <= last {
                continue;
            }
            if picked.iter().any(|p| p.freq == c.freq) {
                continue;
            }
            found = Some(i);
            break;
        }
        let i = found?;
        used[i] = true;
        last = candidates[i].exponent;
        picked.push(candidates[i].clone());
    }
    Some(WitnessSequence { entries: picked, targets_met: targets })
}

/// A positive real ratio in one of three exactly-trackable forms.
#[derive(Debug, Clone)]
pub enum RealRatio {
    Rational(BigRational),
    /// `q * sqrt(rad)` with `rad` squarefree > 1 and `q` a positive rational.
    QuadSurd { q: BigRational, rad: u64 },
    /// A certified interval `[value - abs_err, value + abs_err]`.
    Approx { value: BigRational, abs_err: BigRational },
}

impl RealRatio {
    pub fn to_f64(&self) -> f64 {
        match self {
            RealRatio::Rational(r) => crate::exact::rational_to_f64(r),
            RealRatio::QuadSurd { q, rad } => {
                crate::exact::rational_to_f64(q) * (*rad as f64).sqrt()
            }
            RealRatio::Approx { value, .. } => crate::exact::rational_to_f64(value),
        }
    }
}

/// Exact partial sum of the Liouville-type series `sum_{k<=j} base^(-k!)`,
/// with a rigorous tail bound `2 * base^(-(j+1)!)`.
pub fn liouville_partial(base: u32, terms: u32) -> (BigRational, BigRational) {
    let b = BigInt::from(base);
    let mut sum = BigRational::zero();
    let mut fact: u64 = 1;
    for k in 1..=terms as u64 {
        fact *= k;
        sum += BigRational::new(BigInt::one(), b.pow(fact as u32));
    }
    let next_fact = fact * (terms as u64 + 1);
    let tail = BigRational::new(BigInt::from(2), b.pow(next_fact as u32));
    (sum, tail)
}

/// `pi` as an exact rational to ~50 digits (far more than any desk-scale
/// convergent search needs).
pub fn pi_rational() -> (BigRational, BigRational) {
    let num: BigInt = "31415926535897932384626433832795028841971693993751"
        .parse()
        .expect("valid integer literal");
    let den = BigInt::from(10u8).pow(49);
    let err = BigRational::new(BigInt::one(), BigInt::from(10u8).pow(48));
    (BigRational::new(num, den), err)
}

/// A convergent `p/q` of the ratio, with the certified value `|p - alpha q|`
/// carried both as a float and through its natural log (safe for values far
/// below f64 subnormals).
#[derive(Debug, Clone)]
pub struct Convergent {
    pub p: BigInt,
    pub q: BigInt,
    pub err_value: f64,
    pub err_ln: f64,
}

/// Continued-fraction convergents of a nonnegative real ratio with
/// denominators up to `qmax`. Convergents whose error cannot be certified
/// (zero error for rationals, or interval wider than a factor 2 for approx
/// ratios) are dropped.
pub fn convergents(ratio: &RealRatio, qmax: &BigInt) -> Vec<Convergent> {
    match ratio {
        RealRatio::Rational(r) => rational_convergents(r, qmax, None),
        RealRatio::Approx { value, abs_err } => rational_convergents(value, qmax, Some(abs_err)),
        RealRatio::QuadSurd { q, rad } => quad_surd_convergents(q, *rad, qmax),
    }
}

fn rational_convergents(
    alpha: &BigRational,
    qmax: &BigInt,
    abs_err: Option<&BigRational>,
) -> Vec<Convergent> {
    assert!(!alpha.is_negative());
    let mut out = Vec::new();
    let mut num = alpha.numer().clone();
    let mut den = alpha.denom().clone();
    let (mut h1, mut h2) = (BigInt::one(), BigInt::zero()); // p_{-1}, p_{-2}
    let (mut k1, mut k2) = (BigInt::zero(), BigInt::one()); // q_{-1}, q_{-2}
    let mut first = true;
    while !den.is_zero() {
        let (a, rem) = num.div_rem(&den);
        num = std::mem::replace(&mut den, rem);
        let p = &a * &h1 + &h2;
        let q = &a * &k1 + &k2;
        h2 = std::mem::replace(&mut h1, p.clone());
        k2 = std::mem::replace(&mut k1, q.clone());
        if q > *qmax {
            break;
        }
        if first && q.is_zero() {
            first = false;
            continue;
        }
        first = false;
        // |p - alpha q| exactly
        let err = (BigRational::from_integer(p.clone())
            - alpha * BigRational::from_integer(q.clone()))
        .abs();
        match abs_err {
            None => {
                if err.is_zero() {
                    continue; // exact hit: a kernel point, not a witness
                }
                out.push(Convergent {
                    p,
                    q,
                    err_value: crate::exact::rational_to_f64(&err),
                    err_ln: rational_ln(&err),
                });
            }
            Some(eps) => {
                let slack = eps * BigRational::from_integer(q.clone());
                let lo = &err - &slack;
                if !lo.is_positive() {
                    continue; // interval touches zero: cannot certify
                }
                let hi = &err + &slack;
                if hi > BigRational::from_integer(2.into()) * &lo {
                    continue; // too wide to certify the exponent
                }
                out.push(Convergent {
                    p,
                    q,
                    err_value: crate::exact::rational_to_f64(&err),
                    err_ln: rational_ln(&err),
                });
            }
        }
    }
    out
}

/// Convergents of `q0 * sqrt(rad)` via the periodic quadratic-surd algorithm
/// on `(P + sqrt(D))/Q` with exact integer state.
fn quad_surd_convergents(q0: &BigRational, rad: u64, qmax: &BigInt) -> Vec<Convergent> {
    assert!(q0.is_positive());
    // q0*sqrt(rad) = sqrt(a^2 rad b^2) / b^2 with q0 = a/b
    let a = q0.numer().clone();
    let b = q0.denom().clone();
    let d_big: BigInt = &a * &a * BigInt::from(rad) * &b * &b;
    let mut pp = BigInt::zero();
    let mut qq: BigInt = &b * &b;
    let sqrt_d = d_big.sqrt();
    // alpha as a high-precision float for the exact-error formula
    let alpha_sq = BigRational::new(d_big.clone(), (&qq * &qq).clone());
    let mut out = Vec::new();
    let (mut h1, mut h2) = (BigInt::one(), BigInt::zero());
    let (mut k1, mut k2) = (BigInt::zero(), BigInt::one());
    for _ in 0..10_000 {
        let ai = Euclid::div_euclid(&(&pp + &sqrt_d), &qq);
        let p = &ai * &h1 + &h2;
        let q = &ai * &k1 + &k2;
        h2 = std::mem::replace(&mut h1, p.clone());
        k2 = std::mem::replace(&mut k1, q.clone());
        if q > *qmax {
            break;
        }
        if !q.is_zero() {
            // |p - alpha q| = |p^2 - alpha^2 q^2| / (p + alpha q)
            let p_rat = BigRational::from_integer(p.clone());
            let q_rat = BigRational::from_integer(q.clone());
            let num = (&p_rat * &p_rat - &alpha_sq * &q_rat * &q_rat).abs();
            if !num.is_zero() {
                let alpha_f = crate::exact::rational_to_f64(&alpha_sq).sqrt();
                let denom = crate::exact::rational_to_f64(&p_rat) + alpha_f * crate::exact::rational_to_f64(&q_rat);
                let err_ln = rational_ln(&num) - denom.ln();
                out.push(Convergent { p, q, err_value: err_ln.exp(), err_ln });
            }
        }
        // next state
        let pp_next = &ai * &qq - &pp;
        let qq_next = (&d_big - &pp_next * &pp_next) / &qq;
        pp = pp_next;
        qq = qq_next;
        if qq.is_zero() {
            break;
        }
    }
    out
}

/// Build the positive real ratio `|c2/c1|` (with its sign) from two exact or
/// opaque coefficients. Returns `None` when the ratio is not real.
pub fn coefficient_ratio(
    c1: &super::shapes::CoeffValue,
    c2: &super::shapes::CoeffValue,
) -> Option<(RealRatio, f64)> {
    use super::shapes::{CoeffKey, CoeffValue};
    let opaque = |a: num_complex::Complex64, b: num_complex::Complex64| -> Option<(RealRatio, f64)> {
        let r = b / a;
        if r.im.abs() > 1e-12 * r.norm() {
            return None;
        }
        let value = BigRational::from_f64(r.re.abs())?;
        let err = BigRational::from_f64(r.norm() * 1e-14 + 1e-300)?;
        Some((RealRatio::Approx { value, abs_err: err }, r.re.signum()))
    };
    match (c1, c2) {
        (CoeffValue::Exact { key: k1, q: q1 }, CoeffValue::Exact { key: k2, q: q2 }) => {
            let ratio_q = q2.mul(&q1.inv()?);
            if !ratio_q.is_real() {
                return None;
            }
            let t = ratio_q.re.clone();
            let sign = if t.is_negative() { -1.0 } else { 1.0 };
            let t_abs = t.abs();
            match (k1, k2) {
                (a, b) if a == b => Some((RealRatio::Rational(t_abs), sign)),
                (CoeffKey::Rat, CoeffKey::Rad(m)) => {
                    Some((RealRatio::QuadSurd { q: t_abs, rad: *m }, sign))
                }
                (CoeffKey::Rad(m), CoeffKey::Rat) => {
                    // t/sqrt(m) = (t/m) sqrt(m)
                    let q = t_abs / BigRational::from_integer((*m as i64).into());
                    Some((RealRatio::QuadSurd { q, rad: *m }, sign))
                }
                (CoeffKey::Rad(m1), CoeffKey::Rad(m2)) => {
                    // sqrt(m2)/sqrt(m1) = sqrt(m1 m2)/m1
                    let g = num_integer::gcd(*m1, *m2);
                    let rad = (m1 / g) * (m2 / g);
                    let q = t_abs * BigRational::from_integer((g as i64).into())
                        / BigRational::from_integer((*m1 as i64).into());
                    if rad == 1 {
                        Some((RealRatio::Rational(q), sign))
                    } else {
                        Some((RealRatio::QuadSurd { q, rad }, sign))
                    }
                }
                (CoeffKey::Rat, CoeffKey::Liou(base)) => {
                    let (s, eps) = liouville_partial(*base, 5);
                    Some((
                        RealRatio::Approx { value: &t_abs * &s, abs_err: t_abs.abs() * eps },
                        sign,
                    ))
                }
                (CoeffKey::Liou(base), CoeffKey::Rat) => {
                    // t / lambda: interval arithmetic on the reciprocal
                    let (s, eps) = liouville_partial(*base, 5);
                    let lo = &s - &eps;
                    let value = &t_abs / &s;
                    let abs_err = &t_abs * &eps / (&s * &lo);
                    Some((RealRatio::Approx { value, abs_err }, sign))
                }
                (CoeffKey::Rat, CoeffKey::PiConst) => {
                    let (pi, eps) = pi_rational();
                    Some((RealRatio::Approx { value: &t_abs * &pi, abs_err: t_abs.abs() * eps }, sign))
                }
                (CoeffKey::PiConst, CoeffKey::Rat) => {
                    let (pi, eps) = pi_rational();
                    let lo = &pi - &eps;
                    Some((
                        RealRatio::Approx {
                            value: &t_abs / &pi,
                            abs_err: &t_abs * &eps / (&pi * &lo),
                        },
                        sign,
                    ))
                }
                _ => opaque(c1.float(), c2.float()),
            }
        }
        _ => opaque(c1.float(), c2.float()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    #[test]
    fn liouville_convergents_match_expected_table() {
        let (s, eps) = liouville_partial(10, 5);
        let ratio = RealRatio::Approx { value: s, abs_err: eps };
        let convs = convergents(&ratio, &BigInt::from(10_000_000u64));
        let qs: Vec<i64> = convs.iter().map(|c| c.q.to_i64().unwrap()).collect();
        assert_eq!(qs, vec![1, 9, 100, 9909, 10009, 109999, 1000000]);
        let last = convs.last().unwrap();
        assert_eq!(last.p.to_i64().unwrap(), 110001);
        // |p - alpha q| = 1e-18 (1 + 1e-96)
        assert!((last.err_ln - (-18.0 * 10f64.ln())).abs() < 1e-9, "ln err {}", last.err_ln);
    }

    #[test]
    fn sqrt2_convergents() {
        let ratio = RealRatio::QuadSurd { q: BigRational::one(), rad: 2 };
        let convs = convergents(&ratio, &BigInt::from(100_000u64));
        // classic: 1/1, 3/2, 7/5, 17/12, 41/29, ...
        let pq: Vec<(i64, i64)> =
            convs.iter().take(5).map(|c| (c.p.to_i64().unwrap(), c.q.to_i64().unwrap())).collect();
        assert_eq!(pq, vec![(1, 1), (3, 2), (7, 5), (17, 12), (41, 29)]);
        // Pell bound: |p - sqrt(2) q| = 1/(p + sqrt2 q) >~ 1/(2.5 q)
        for c in &convs {
            let q = c.q.to_f64().unwrap();
            assert!(c.err_value > 1.0 / (3.0 * q), "err {} too small at q={q}", c.err_value);
            assert!(c.err_value < 1.0 / q, "err {} too large at q={q}", c.err_value);
        }
    }

    #[test]
    fn rational_ratio_has_no_witnesses_beyond_exact_hit() {
        let ratio = RealRatio::Rational(BigRational::new(22.into(), 7.into()));
        let convs = convergents(&ratio, &BigInt::from(1000u64));
        // the final exact convergent 22/7 is skipped
        assert!(convs.iter().all(|c| c.q.to_i64().unwrap() < 7 || c.err_value > 0.0));
        assert!(convs.iter().all(|c| !(c.p.to_i64() == Some(22) && c.q.to_i64() == Some(7))));
    }

    #[test]
    fn chain_selection_escalates() {
        let mk = |w: f64, e: f64| Witness {
            freq: Frequency::new(vec![w as i64, 0], vec![]),
            slot: 0,
            value: w.powf(-e),
            exponent: e,
            weight: w,
        };
        let cands = vec![mk(9.1, 2.08), mk(100.6, 2.00), mk(9968.0, 1.01), mk(1.006e6, 3.0)];
        let seq = select_chain(cands.clone(), 3, 0.05).unwrap();
        assert_eq!(seq.entries.len(), 3);
        let es: Vec<f64> = seq.entries.iter().map(|w| w.exponent).collect();
        assert!(es[0] < es[1] && es[1] < es[2]);
        assert!(es[0] >= 0.95 && es[1] >= 1.95 && es[2] >= 2.95);
        // without the q=1e6 point no chain reaches target 3
        assert!(select_chain(cands[..3].to_vec(), 3, 0.05).is_none());
    }

    #[test]
    fn chain_ignores_low_weight_noise() {
        let noise = Witness {
            freq: Frequency::new(vec![0, 1], vec![]),
            slot: 0,
            value: 0.11,
            exponent: 6.37,
            weight: 1.41,
        };
        assert!(select_chain(vec![noise], 1, 0.05).is_none());
    }
}
