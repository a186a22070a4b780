//! The unitary dual of `G = T^r x (S^3)^s`: frequencies, dimensions, weights,
//! index sets, and truncated enumeration.
//!
//! Half-integer sphere parameters are stored doubled (`sphere2[k] = 2*l_k`) so
//! that all dual bookkeeping stays in integers.

use crate::error::LieharmError;
use serde::{Deserialize, Serialize};
use std::fmt;

/// The group `T^r x (S^3)^s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupSpec {
    pub torus_rank: usize,
    pub sphere_count: usize,
}

impl GroupSpec {
    pub fn new(torus_rank: usize, sphere_count: usize) -> Result<Self, LieharmError> {
        if torus_rank + sphere_count == 0 {
            return Err(LieharmError::InvalidGroup(
                "group must have at least one factor (r + s >= 1)".into(),
            ));
        }
        Ok(Self { torus_rank, sphere_count })
    }

    /// Parse the text form `T^r`, `S3^s`, or `T^r x S3^s` (whitespace around
    /// the `x` optional).
    pub fn parse(text: &str) -> Result<Self, LieharmError> {
        let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let err = || {
            LieharmError::InvalidGroup(format!(
                "cannot parse group spec `{text}` (expected T^r, S3^s, or T^r x S3^s)"
            ))
        };
        let parse_exp = |s: &str| -> Result<usize, LieharmError> {
            s.parse::<usize>().map_err(|_| err())
        };
        let (torus_rank, rest) = if let Some(rest) = compact.strip_prefix("T^") {
            match rest.find(|c: char| !c.is_ascii_digit()) {
                None => (parse_exp(rest)?, ""),
                Some(pos) => {
                    let (digits, tail) = rest.split_at(pos);
                    let tail = tail.strip_prefix('x').ok_or_else(err)?;
                    (parse_exp(digits)?, tail)
                }
            }
        } else {
            (0, compact.as_str())
        };
        let sphere_count = if rest.is_empty() {
            0
        } else {
            parse_exp(rest.strip_prefix("S3^").ok_or_else(err)?)?
        };
        Self::new(torus_rank, sphere_count)
    }

    /// Canonical text form.
    pub fn text(&self) -> String {
        match (self.torus_rank, self.sphere_count) {
            (r, 0) => format!("T^{r}"),
            (0, s) => format!("S3^{s}"),
            (r, s) => format!("T^{r}xS3^{s}"),
        }
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.text())
    }
}

/// One point of the unitary dual: an integer vector for the torus block and a
/// doubled half-integer vector (`2*l_k`) for the sphere factors.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Frequency {
    #[serde(rename = "t")]
    pub torus: Vec<i64>,
    #[serde(rename = "s2")]
    pub sphere2: Vec<i64>,
}

impl Frequency {
    pub fn new(torus: Vec<i64>, sphere2: Vec<i64>) -> Self {
        Self { torus, sphere2 }
    }

    pub fn zero(group: &GroupSpec) -> Self {
        Self::new(vec![0; group.torus_rank], vec![0; group.sphere_count])
    }

    pub fn validate(&self, group: &GroupSpec) -> Result<(), LieharmError> {
        if self.torus.len() != group.torus_rank || self.sphere2.len() != group.sphere_count {
            return Err(LieharmError::DimensionMismatch(format!(
                "frequency shape ({}, {}) does not match group {}",
                self.torus.len(),
                self.sphere2.len(),
                group
            )));
        }
        if let Some(bad) = self.sphere2.iter().find(|&&v| v < 0) {
            return Err(LieharmError::DimensionMismatch(format!(
                "negative doubled sphere parameter {bad}"
            )));
        }
        Ok(())
    }
}

impl fmt::Display for Frequency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(t={:?}, 2l={:?})", self.torus, self.sphere2)
    }
}

/// A slot of the index set `J_Xi`: doubled sphere indices `2*n_k`, one per
/// sphere factor. Torus factors contribute only the trivial index.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MultiIndex {
    pub sphere2n: Vec<i64>,
}

impl MultiIndex {
    pub fn new(sphere2n: Vec<i64>) -> Self {
        Self { sphere2n }
    }
}

/// Dimension `d_xi = prod_k (2*l_k + 1)`.
pub fn dim(group: &GroupSpec, xi: &Frequency) -> Result<usize, LieharmError> {
    xi.validate(group)?;
    Ok(xi.sphere2.iter().map(|&two_ell| two_ell as usize + 1).product())
}

/// Weight of the torus block: `(1 + |n|^2)^(1/2)`.
pub fn torus_weight(torus: &[i64]) -> f64 {
    let norm_sq: i64 = torus.iter().map(|&n| n * n).sum();
    (1.0 + norm_sq as f64).sqrt()
}

/// Weight of one sphere factor: `(1 + l(l+1))^(1/2)` from the doubled parameter.
pub fn sphere_weight(two_ell: i64) -> f64 {
    (1.0 + (two_ell as f64 / 2.0) * (two_ell as f64 / 2.0 + 1.0)).sqrt()
}

/// Weight `<xi>` of a frequency: one torus block term (when r >= 1) plus one
/// term per sphere factor; always >= 1.
pub fn weight(group: &GroupSpec, xi: &Frequency) -> Result<f64, LieharmError> {
    xi.validate(group)?;
    let mut w = 0.0;
    if group.torus_rank > 0 {
        w += torus_weight(&xi.torus);
    }
    for &two_ell in &xi.sphere2 {
        w += sphere_weight(two_ell);
    }
    Ok(w)
}

/// The index set `J_Xi` as the Cartesian product of `J_{l_k} = {-l_k..l_k}`,
/// in ascending lexicographic order. Its length equals `dim`.
pub fn index_set(xi: &Frequency) -> Vec<MultiIndex> {
    let mut out = vec![MultiIndex::new(Vec::with_capacity(xi.sphere2.len()))];
    for &two_ell in &xi.sphere2 {
        let mut next = Vec::with_capacity(out.len() * (two_ell as usize + 1));
        for prefix in &out {
            let mut two_n = -two_ell;
            while two_n <= two_ell {
                let mut v = prefix.sphere2n.clone();
                v.push(two_n);
                next.push(MultiIndex::new(v));
                two_n += 2;
            }
        }
        out = next;
    }
    out
}

/// Flat position of a multi-index in `index_set(xi)` (row-major, first factor
/// slowest).
pub fn index_position(xi: &Frequency, idx: &MultiIndex) -> usize {
    let mut pos = 0usize;
    for (k, &two_ell) in xi.sphere2.iter().enumerate() {
        let offset = ((idx.sphere2n[k] + two_ell) / 2) as usize;
        pos = pos * (two_ell as usize + 1) + offset;
    }
    pos
}

/// Visit every frequency with weight <= cap, in generation order
/// (sphere parameters outermost, torus coordinates innermost).
pub fn for_each_frequency<F: FnMut(&Frequency)>(
    group: &GroupSpec,
    cap: f64,
    mut visit: F,
) -> Result<(), LieharmError> {
    if cap < 1.0 {
        return Err(LieharmError::InvalidCap(cap));
    }
    let mut sphere2 = vec![0i64; group.sphere_count];
    visit_spheres(group, cap, 0, 0.0, &mut sphere2, &mut visit);
    Ok(())
}

fn visit_spheres<F: FnMut(&Frequency)>(
    group: &GroupSpec,
    cap: f64,
    k: usize,
    sphere_total: f64,
    sphere2: &mut Vec<i64>,
    visit: &mut F,
) {
    let remaining_min: f64 = (group.sphere_count - k) as f64; // each factor weighs >= 1
    let torus_min = if group.torus_rank > 0 { 1.0 } else { 0.0 };
    if sphere_total + remaining_min + torus_min > cap + 1e-12 {
        return;
    }
    if k == group.sphere_count {
        let budget = cap - sphere_total;
        let mut torus = vec![0i64; group.torus_rank];
        if group.torus_rank == 0 {
            visit(&Frequency::new(torus, sphere2.clone()));
        } else {
            // |n|^2 <= budget^2 - 1
            if budget >= 1.0 {
                let max_norm_sq = (budget * budget - 1.0).max(0.0);
                visit_torus(group, max_norm_sq, 0, 0, &mut torus, sphere2, visit);
            }
        }
        return;
    }
    let mut two_ell = 0i64;
    loop {
        let w = sphere_weight(two_ell);
        if sphere_total + w + (remaining_min - 1.0) + torus_min > cap + 1e-12 {
            break;
        }
        sphere2[k] = two_ell;
        visit_spheres(group, cap, k + 1, sphere_total + w, sphere2, visit);
        two_ell += 1;
    }
    sphere2[k] = 0;
}

fn visit_torus<F: FnMut(&Frequency)>(
    group: &GroupSpec,
    max_norm_sq: f64,
    j: usize,
    used: i64,
    torus: &mut Vec<i64>,
    sphere2: &[i64],
    visit: &mut F,
) {
    if j == group.torus_rank {
        visit(&Frequency::new(torus.clone(), sphere2.to_vec()));
        return;
    }
    let room = max_norm_sq - used as f64;
    let bound = room.max(0.0).sqrt().floor() as i64;
    for n in -bound..=bound {
        if (used + n * n) as f64 > max_norm_sq + 1e-9 {
            continue;
        }
        torus[j] = n;
        visit_torus(group, max_norm_sq, j + 1, used + n * n, torus, sphere2, visit);
    }
    torus[j] = 0;
}

/// All frequencies with weight <= cap, sorted by (weight, torus, sphere2).
pub fn enumerate_frequencies(
    group: &GroupSpec,
    cap: f64,
) -> Result<Vec<Frequency>, LieharmError> {
    let mut out = Vec::new();
    for_each_frequency(group, cap, |xi| out.push(xi.clone()))?;
    sort_canonical(group, &mut out);
    Ok(out)
}

/// Sort frequencies by (weight, torus vector, sphere2 vector).
pub fn sort_canonical(group: &GroupSpec, freqs: &mut [Frequency]) {
    freqs.sort_by(|a, b| {
        let wa = weight(group, a).unwrap_or(f64::INFINITY);
        let wb = weight(group, b).unwrap_or(f64::INFINITY);
        wa.total_cmp(&wb)
            .then_with(|| a.torus.cmp(&b.torus))
            .then_with(|| a.sphere2.cmp(&b.sphere2))
    });
}

#[cfg(test)]
mod tests {
    use super::*;

    fn group(r: usize, s: usize) -> GroupSpec {
        GroupSpec::new(r, s).unwrap()
    }

    #[test]
    fn dim_examples() {
        // torus representations are one-dimensional
        let g = group(2, 0);
        assert_eq!(dim(&g, &Frequency::new(vec![3, -5], vec![])).unwrap(), 1);
        // t^l : S^3 -> U(2l+1)
        let g = group(0, 1);
        assert_eq!(dim(&g, &Frequency::new(vec![], vec![2])).unwrap(), 3);
        // product of per-factor dimensions: l = (1/2, 2) -> 2*5
        let g = group(1, 2);
        assert_eq!(dim(&g, &Frequency::new(vec![0], vec![1, 4])).unwrap(), 10);
    }

    #[test]
    fn dim_rejects_shape_mismatch() {
        let g = group(1, 1);
        assert!(dim(&g, &Frequency::new(vec![1, 2], vec![0])).is_err());
    }

    #[test]
    fn weight_examples() {
        let g = group(1, 0);
        assert_eq!(weight(&g, &Frequency::new(vec![0], vec![])).unwrap(), 1.0);
        let g = group(1, 1);
        let w = weight(&g, &Frequency::new(vec![3], vec![2])).unwrap();
        assert!((w - (10f64.sqrt() + 3f64.sqrt())).abs() < 1e-12);
        assert!((w - 4.8943).abs() < 1e-4);
        let g = group(0, 1);
        assert_eq!(weight(&g, &Frequency::new(vec![], vec![0])).unwrap(), 1.0);
    }

    #[test]
    fn enumerate_torus_cap2() {
        let g = group(1, 0);
        let freqs = enumerate_frequencies(&g, 2.0).unwrap();
        let ns: Vec<i64> = freqs.iter().map(|f| f.torus[0]).collect();
        assert_eq!(ns, vec![0, -1, 1]);
    }

    #[test]
    fn enumerate_sphere_cap2() {
        let g = group(0, 1);
        let freqs = enumerate_frequencies(&g, 2.0).unwrap();
        let ls: Vec<i64> = freqs.iter().map(|f| f.sphere2[0]).collect();
        assert_eq!(ls, vec![0, 1, 2]); // l in {0, 1/2, 1}
    }

    #[test]
    fn enumerate_cap1_single_block() {
        let g = group(1, 0);
        assert_eq!(enumerate_frequencies(&g, 1.0).unwrap().len(), 1);
        let g = group(0, 2);
        let freqs = enumerate_frequencies(&g, 2.0).unwrap();
        assert_eq!(freqs, vec![Frequency::new(vec![], vec![0, 0])]);
    }

    #[test]
    fn enumerate_rejects_small_cap() {
        assert!(enumerate_frequencies(&group(1, 0), 0.5).is_err());
    }

    #[test]
    fn enumeration_nested_in_cap() {
        let g = group(1, 1);
        let small = enumerate_frequencies(&g, 5.0).unwrap();
        let large = enumerate_frequencies(&g, 9.0).unwrap();
        for f in &small {
            assert!(large.contains(f));
        }
        assert!(large.len() > small.len());
    }

    #[test]
    fn enumeration_matches_brute_force_count() {
        let g = group(2, 1);
        let cap = 6.0;
        let freqs = enumerate_frequencies(&g, cap).unwrap();
        let mut count = 0usize;
        for n1 in -8i64..=8 {
            for n2 in -8i64..=8 {
                for two_ell in 0i64..=12 {
                    let xi = Frequency::new(vec![n1, n2], vec![two_ell]);
                    if weight(&g, &xi).unwrap() <= cap {
                        count += 1;
                    }
                }
            }
        }
        assert_eq!(freqs.len(), count);
        for f in &freqs {
            assert!(weight(&g, f).unwrap() <= cap);
        }
    }

    #[test]
    fn weight_invariant_under_torus_sign_flip() {
        let g = group(2, 1);
        let a = Frequency::new(vec![3, -4], vec![5]);
        let b = Frequency::new(vec![-3, 4], vec![5]);
        assert_eq!(weight(&g, &a).unwrap(), weight(&g, &b).unwrap());
    }

    #[test]
    fn index_set_examples() {
        // l = 1 -> [-1, 0, 1]
        let xi = Frequency::new(vec![], vec![2]);
        let idx = index_set(&xi);
        assert_eq!(idx.iter().map(|i| i.sphere2n[0]).collect::<Vec<_>>(), vec![-2, 0, 2]);
        // l = 1/2 -> [-1/2, 1/2]
        let xi = Frequency::new(vec![], vec![1]);
        let idx = index_set(&xi);
        assert_eq!(idx.iter().map(|i| i.sphere2n[0]).collect::<Vec<_>>(), vec![-1, 1]);
        // s = 0 -> single empty index
        let xi = Frequency::new(vec![7], vec![]);
        assert_eq!(index_set(&xi), vec![MultiIndex::new(vec![])]);
    }

    #[test]
    fn index_set_monotone_nesting() {
        for two_ell in 0i64..6 {
            let small: Vec<MultiIndex> = index_set(&Frequency::new(vec![], vec![two_ell]));
            let big: Vec<MultiIndex> = index_set(&Frequency::new(vec![], vec![two_ell + 2]));
            for idx in &small {
                assert!(big.contains(idx), "J_l not nested in J_(l+1) at 2l={two_ell}");
            }
        }
    }

    #[test]
    fn index_position_roundtrip() {
        let xi = Frequency::new(vec![0], vec![3, 2]);
        let idx = index_set(&xi);
        assert_eq!(idx.len(), dim(&group(1, 2), &xi).unwrap());
        for (pos, id) in idx.iter().enumerate() {
            assert_eq!(index_position(&xi, id), pos);
        }
    }

    #[test]
    fn group_spec_parsing() {
        assert_eq!(GroupSpec::parse("T^2").unwrap(), group(2, 0));
        assert_eq!(GroupSpec::parse("S3^3").unwrap(), group(0, 3));
        assert_eq!(GroupSpec::parse("T^2xS3^1").unwrap(), group(2, 1));
        assert_eq!(GroupSpec::parse("T^1 x S3^2").unwrap(), group(1, 2));
        assert!(GroupSpec::parse("T^0").is_err());
        assert!(GroupSpec::parse("SU2").is_err());
    }

    #[test]
    fn polynomial_growth_sanity() {
        let g = group(1, 1);
        let n8 = enumerate_frequencies(&g, 8.0).unwrap().len();
        let n16 = enumerate_frequencies(&g, 16.0).unwrap().len();
        // |{w <= cap}| grows polynomially (here ~cap^3); doubling the cap
        // should stay well under the 2^4 factor.
        assert!(n16 < 16 * n8);
        assert!(n16 > 2 * n8);
    }
}
