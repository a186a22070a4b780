//! Fourier-coefficient fields: storage, JSONL serialization, synthetic test
//! data, operator application, norms, and decay-order estimation.

use crate::duals::{dim, enumerate_frequencies, sort_canonical, weight, Frequency, GroupSpec};
use crate::error::LieharmError;
use crate::opalg::SystemDef;
use crate::symbols::symbol;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::Path;

/// A truncated Fourier-coefficient field: one `d_xi x d_xi` complex matrix per
/// stored frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffField {
    pub group: GroupSpec,
    data: BTreeMap<Frequency, DMatrix<Complex64>>,
    pub meta: String,
}

impl CoeffField {
    pub fn new(group: GroupSpec) -> Self {
        Self { group, data: BTreeMap::new(), meta: String::new() }
    }

    pub fn with_meta(group: GroupSpec, meta: impl Into<String>) -> Self {
        Self { group, data: BTreeMap::new(), meta: meta.into() }
    }

    pub fn insert(
        &mut self,
        freq: Frequency,
        matrix: DMatrix<Complex64>,
    ) -> Result<(), LieharmError> {
        let d = dim(&self.group, &freq)?;
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(LieharmError::DimensionMismatch(format!(
                "matrix is {}x{} but dim({}) = {}",
                matrix.nrows(),
                matrix.ncols(),
                freq,
                d
            )));
        }
        self.data.insert(freq, matrix);
        Ok(())
    }

    pub fn get(&self, freq: &Frequency) -> Option<&DMatrix<Complex64>> {
        self.data.get(freq)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Frequency, &DMatrix<Complex64>)> {
        self.data.iter()
    }

    /// Frequencies in canonical (weight, torus, sphere2) order.
    pub fn frequencies_canonical(&self) -> Vec<Frequency> {
        let mut freqs: Vec<Frequency> = self.data.keys().cloned().collect();
        sort_canonical(&self.group, &mut freqs);
        freqs
    }

    /// Max absolute entry of the matrix at `xi`.
    pub fn max_norm(&self, xi: &Frequency) -> Result<f64, LieharmError> {
        let m = self
            .data
            .get(xi)
            .ok_or_else(|| LieharmError::MissingFrequency(xi.to_string()))?;
        Ok(m.iter().map(|z| z.norm()).fold(0.0, f64::max))
    }
}

/// Decay profile for synthetic fields.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SynthProfile {
    ExpDecay { rate: f64 },
    PolyDecay { order: f64 },
    PolyGrowth { order: f64 },
}

impl SynthProfile {
    pub fn scale(&self, w: f64) -> f64 {
        match self {
            SynthProfile::ExpDecay { rate } => (-rate * w).exp(),
            SynthProfile::PolyDecay { order } => w.powf(-order),
            SynthProfile::PolyGrowth { order } => w.powf(*order),
        }
    }
}

/// Deterministic pseudo-random field: every entry magnitude lies in
/// `[1/2, 1] * profile(weight)`. Same seed, same field.
pub fn synth(
    group: &GroupSpec,
    profile: SynthProfile,
    cap: f64,
    seed: u64,
) -> Result<CoeffField, LieharmError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut field = CoeffField::with_meta(
        *group,
        format!("synth profile={profile:?} cap={cap} seed={seed}"),
    );
    for xi in enumerate_frequencies(group, cap)? {
        let d = dim(group, &xi)?;
        let w = weight(group, &xi)?;
        let base = profile.scale(w);
        let mut m = DMatrix::zeros(d, d);
        for r in 0..d {
            for c in 0..d {
                let mag = base * (0.5 + 0.5 * rng.gen::<f64>());
                let phase = rng.gen::<f64>() * std::f64::consts::TAU;
                m[(r, c)] = Complex64::from_polar(mag, phase);
            }
        }
        field.insert(xi, m)?;
    }
    Ok(field)
}

/// Apply the system: `f_j(xi) = sigma_{P_j}(xi) * u(xi)` on every stored
/// frequency.
pub fn apply(sys: &SystemDef, u: &CoeffField) -> Result<Vec<CoeffField>, LieharmError> {
    if sys.group != u.group {
        return Err(LieharmError::DimensionMismatch(format!(
            "system group {} vs field group {}",
            sys.group, u.group
        )));
    }
    let normalized = sys.normalized();
    let mut out = Vec::with_capacity(sys.ops.len());
    for (name, op) in &normalized.ops {
        let mut f = CoeffField::with_meta(u.group, format!("apply {name} to [{}]", u.meta));
        for (xi, mat) in u.iter() {
            let sigma = symbol(&sys.group, op, xi)?;
            f.insert(xi.clone(), &sigma.entries * mat)?;
        }
        out.push(f);
    }
    Ok(out)
}

/// Classification outcome of a decay fit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum DecayClass {
    SmoothConsistent,
    PolynomialGrowth { order: f64 },
    Inconclusive,
}

/// Least-squares decay estimate over dyadic weight shells.
#[derive(Debug, Clone, Serialize)]
pub struct DecayEstimate {
    /// Fitted decay order `N` in `max-norm ~ C * weight^(-N)`; negative for
    /// growing fields.
    pub fitted_order: f64,
    pub fitted_constant: f64,
    pub shells_used: usize,
    /// Largest probe order `N <= probe_order` for which shell-max times
    /// `weight^N` stays bounded across the scanned range.
    pub bounded_probe: u32,
    pub classification: DecayClass,
}

pub const DEFAULT_PROBE_ORDER: u32 = 8;

/// Fit the decay order of `field` from frequencies with weight <= cap.
pub fn decay_fit(field: &CoeffField, cap: f64) -> Result<DecayEstimate, LieharmError> {
    decay_fit_with(field, cap, DEFAULT_PROBE_ORDER)
}

pub fn decay_fit_with(
    field: &CoeffField,
    cap: f64,
    probe_order: u32,
) -> Result<DecayEstimate, LieharmError> {
    // Shell statistic: max of max_norm over the dyadic shell [2^t, 2^(t+1)),
    // together with the weight at which it is achieved.
    let mut shells: BTreeMap<i32, (f64, f64)> = BTreeMap::new();
    for (xi, m) in field.iter() {
        let w = weight(&field.group, xi)?;
        if w > cap {
            continue;
        }
        let norm = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let t = w.log2().floor() as i32;
        let e = shells.entry(t).or_insert((0.0, w));
        if norm > e.0 {
            *e = (norm, w);
        }
    }
    let pts: Vec<(f64, f64)> = shells
        .values()
        .filter(|(m, _)| *m > 0.0)
        .map(|(m, w)| (w.ln(), m.ln()))
        .collect();
    let shells_used = pts.len();
    if shells_used < 3 {
        return Ok(DecayEstimate {
            fitted_order: 0.0,
            fitted_constant: 0.0,
            shells_used,
            bounded_probe: 0,
            classification: DecayClass::Inconclusive,
        });
    }
    let n = pts.len() as f64;
    let mean_x = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mean_x) * (p.0 - mean_x)).sum();
    let slope = sxy / sxx;
    let fitted_order = -slope;
    let fitted_constant = (mean_y - slope * mean_x).exp();

    // Probe: does shell-max * w^N stay bounded? Compare later shells against
    // earlier ones; synthetic scale noise is at most a factor 2.
    let mut bounded_probe = 0u32;
    for probe in 1..=probe_order {
        let boosted: Vec<f64> = pts.iter().map(|(x, y)| y + probe as f64 * x).collect();
        let half = boosted.len().div_ceil(2);
        let first = boosted[..half].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let second = boosted[half..].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if second <= first + 3f64.ln() {
            bounded_probe = probe;
        } else {
            break;
        }
    }

    let classification = if fitted_order >= 0.5 && bounded_probe >= 1 {
        DecayClass::SmoothConsistent
    } else {
        DecayClass::PolynomialGrowth { order: -fitted_order }
    };
    Ok(DecayEstimate { fitted_order, fitted_constant, shells_used, bounded_probe, classification })
}

#[derive(Serialize, Deserialize)]
struct Header {
    kind: String,
    version: u32,
    group: GroupJson,
}

#[derive(Serialize, Deserialize)]
struct GroupJson {
    r: usize,
    s: usize,
}

#[derive(Serialize, Deserialize)]
struct Record {
    t: Vec<i64>,
    s2: Vec<i64>,
    m: Vec<Vec<[f64; 2]>>,
}

/// Serialize a field to the JSONL coefficient format (LF line endings,
/// shortest round-trip doubles), records in canonical frequency order.
pub fn field_to_jsonl(field: &CoeffField) -> String {
    field_to_jsonl_kind(field, "coeff")
}

/// Same format with an alternative `kind` tag (used to dump symbol matrices
/// for debugging).
pub fn field_to_jsonl_kind(field: &CoeffField, kind: &str) -> String {
    let mut out = String::new();
    let header = Header {
        kind: kind.to_string(),
        version: 1,
        group: GroupJson { r: field.group.torus_rank, s: field.group.sphere_count },
    };
    out.push_str(&serde_json::to_string(&header).expect("header serializes"));
    out.push('\n');
    for xi in field.frequencies_canonical() {
        let m = field.get(&xi).expect("listed frequency present");
        let rows = m
            .row_iter()
            .map(|row| row.iter().map(|z| [z.re, z.im]).collect())
            .collect();
        let rec = Record { t: xi.torus.clone(), s2: xi.sphere2.clone(), m: rows };
        out.push_str(&serde_json::to_string(&rec).expect("record serializes"));
        out.push('\n');
    }
    out
}

/// Parse the JSONL coefficient format. Line numbers are reported on errors.
pub fn field_from_jsonl(text: &str) -> Result<CoeffField, LieharmError> {
    let mut lines = text.lines().enumerate();
    let (_, header_line) = lines
        .next()
        .ok_or(LieharmError::CoeffFormat { line: 1, message: "empty file".into() })?;
    let header: Header = serde_json::from_str(header_line)
        .map_err(|e| LieharmError::CoeffFormat { line: 1, message: format!("bad header: {e}") })?;
    if header.kind != "coeff" && header.kind != "symbol" {
        return Err(LieharmError::CoeffFormat {
            line: 1,
            message: format!("unknown kind `{}`", header.kind),
        });
    }
    if header.version != 1 {
        return Err(LieharmError::CoeffFormat {
            line: 1,
            message: format!("unknown version {}", header.version),
        });
    }
    let group = GroupSpec::new(header.group.r, header.group.s)
        .map_err(|e| LieharmError::CoeffFormat { line: 1, message: e.to_string() })?;
    let mut field = CoeffField::new(group);
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let rec: Record = serde_json::from_str(line).map_err(|e| LieharmError::CoeffFormat {
            line: line_no,
            message: format!("malformed record: {e}"),
        })?;
        if rec.t.len() != group.torus_rank || rec.s2.len() != group.sphere_count {
            return Err(LieharmError::CoeffFormat {
                line: line_no,
                message: format!(
                    "frequency shape ({}, {}) does not match header group {}",
                    rec.t.len(),
                    rec.s2.len(),
                    group
                ),
            });
        }
        let xi = Frequency::new(rec.t, rec.s2);
        let d = dim(&group, &xi).map_err(|e| LieharmError::CoeffFormat {
            line: line_no,
            message: e.to_string(),
        })?;
        if rec.m.len() != d || rec.m.iter().any(|row| row.len() != d) {
            return Err(LieharmError::CoeffFormat {
                line: line_no,
                message: format!("matrix is not {d}x{d}"),
            });
        }
        let mut m = DMatrix::zeros(d, d);
        for (r, row) in rec.m.iter().enumerate() {
            for (c, &[re, im]) in row.iter().enumerate() {
                if !re.is_finite() || !im.is_finite() {
                    return Err(LieharmError::CoeffFormat {
                        line: line_no,
                        message: "non-finite entry".into(),
                    });
                }
                m[(r, c)] = Complex64::new(re, im);
            }
        }
        field.insert(xi, m).map_err(|e| LieharmError::CoeffFormat {
            line: line_no,
            message: e.to_string(),
        })?;
    }
    Ok(field)
}

pub fn write_field(field: &CoeffField, path: impl AsRef<Path>) -> Result<(), LieharmError> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(field_to_jsonl(field).as_bytes())?;
    Ok(())
}

pub fn read_field(path: impl AsRef<Path>) -> Result<CoeffField, LieharmError> {
    let f = std::fs::File::open(path)?;
    let mut text = String::new();
    for line in std::io::BufReader::new(f).lines() {
        text.push_str(&line?);
        text.push('\n');
    }
    field_from_jsonl(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opalg::parse_system;
    use approx::assert_abs_diff_eq;

    fn t1s1() -> GroupSpec {
        GroupSpec::new(1, 1).unwrap()
    }

    #[test]
    fn max_norm_cases() {
        let g = GroupSpec::new(1, 0).unwrap();
        let mut field = CoeffField::new(g);
        let xi = Frequency::new(vec![2], vec![]);
        field.insert(xi.clone(), DMatrix::from_element(1, 1, Complex64::new(0.0, 0.0))).unwrap();
        assert_eq!(field.max_norm(&xi).unwrap(), 0.0);
        let g = GroupSpec::new(0, 1).unwrap();
        let mut field = CoeffField::new(g);
        let xi = Frequency::new(vec![], vec![1]);
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(3.0, 0.0),
                Complex64::new(0.0, -4.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(1.0, 0.0),
            ],
        );
        field.insert(xi.clone(), m).unwrap();
        assert_eq!(field.max_norm(&xi).unwrap(), 4.0);
        let missing = Frequency::new(vec![], vec![3]);
        assert!(field.max_norm(&missing).is_err());
    }

    #[test]
    fn synth_is_seed_deterministic() {
        let g = t1s1();
        let a = synth(&g, SynthProfile::PolyDecay { order: 4.0 }, 8.0, 7).unwrap();
        let b = synth(&g, SynthProfile::PolyDecay { order: 4.0 }, 8.0, 7).unwrap();
        assert_eq!(field_to_jsonl(&a), field_to_jsonl(&b));
        let c = synth(&g, SynthProfile::PolyDecay { order: 4.0 }, 8.0, 8).unwrap();
        assert_ne!(field_to_jsonl(&a), field_to_jsonl(&c));
    }

    #[test]
    fn synth_respects_profile_band() {
        let g = GroupSpec::new(1, 0).unwrap();
        let field = synth(&g, SynthProfile::ExpDecay { rate: 1.0 }, 10.0, 3).unwrap();
        for (xi, _) in field.iter() {
            let w = weight(&g, xi).unwrap();
            let norm = field.max_norm(xi).unwrap();
            assert!(norm <= (-w).exp() + 1e-15, "norm {norm} above e^-w at w={w}");
            assert!(norm >= 0.5 * (-w).exp() - 1e-15);
        }
    }

    #[test]
    fn decay_fit_recovers_synthetic_orders() {
        let g = t1s1();
        for order in [2.0, 4.0, 6.0, 8.0] {
            let field = synth(&g, SynthProfile::PolyDecay { order }, 20.0, 11).unwrap();
            let est = decay_fit(&field, 20.0).unwrap();
            assert!(
                (est.fitted_order - order).abs() <= 0.5,
                "order {order}: fitted {}",
                est.fitted_order
            );
            assert_eq!(est.classification, DecayClass::SmoothConsistent);
        }
    }

    #[test]
    fn decay_fit_flat_field_is_growth_zero() {
        let g = t1s1();
        let mut field = CoeffField::new(g);
        for xi in enumerate_frequencies(&g, 20.0).unwrap() {
            let d = dim(&g, &xi).unwrap();
            field.insert(xi, DMatrix::from_element(d, d, Complex64::new(1.0, 0.0))).unwrap();
        }
        let est = decay_fit(&field, 20.0).unwrap();
        match est.classification {
            DecayClass::PolynomialGrowth { order } => assert!(order.abs() < 0.3, "order {order}"),
            other => panic!("expected PolynomialGrowth, got {other:?}"),
        }
    }

    #[test]
    fn decay_fit_growth_three() {
        let g = t1s1();
        let mut field = CoeffField::new(g);
        for xi in enumerate_frequencies(&g, 20.0).unwrap() {
            let d = dim(&g, &xi).unwrap();
            let w = weight(&g, &xi).unwrap();
            field
                .insert(xi, DMatrix::from_element(d, d, Complex64::new(w.powi(3), 0.0)))
                .unwrap();
        }
        let est = decay_fit(&field, 20.0).unwrap();
        match est.classification {
            DecayClass::PolynomialGrowth { order } => {
                assert!((order - 3.0).abs() <= 0.5, "order {order}")
            }
            other => panic!("expected PolynomialGrowth, got {other:?}"),
        }
    }

    #[test]
    fn decay_fit_too_few_shells_inconclusive() {
        let g = GroupSpec::new(1, 0).unwrap();
        let field = synth(&g, SynthProfile::PolyDecay { order: 2.0 }, 2.0, 0).unwrap();
        let est = decay_fit(&field, 2.0).unwrap();
        assert_eq!(est.classification, DecayClass::Inconclusive);
    }

    #[test]
    fn apply_identity_scalar() {
        let sys = parse_system("group T^1xS3^1\nP1 = 1\n").unwrap();
        let u = synth(&t1s1(), SynthProfile::PolyDecay { order: 2.0 }, 6.0, 1).unwrap();
        let f = apply(&sys, &u).unwrap();
        assert_eq!(f.len(), 1);
        for (xi, m) in u.iter() {
            assert!((f[0].get(xi).unwrap() - m).norm() < 1e-14);
        }
    }

    #[test]
    fn apply_d0_on_identity_coeffs() {
        let sys = parse_system("group S3^1\nP1 = d0_1\n").unwrap();
        let g = GroupSpec::new(0, 1).unwrap();
        let mut u = CoeffField::new(g);
        for two_ell in 0..=4i64 {
            let d = two_ell as usize + 1;
            u.insert(Frequency::new(vec![], vec![two_ell]), DMatrix::identity(d, d)).unwrap();
        }
        let f = apply(&sys, &u).unwrap();
        let xi = Frequency::new(vec![], vec![4]);
        let m = f[0].get(&xi).unwrap();
        for (k, n) in (-2i64..=2).enumerate() {
            assert_abs_diff_eq!(m[(k, k)].re, n as f64, epsilon = 1e-14);
        }
    }

    #[test]
    fn apply_torus_generator() {
        let sys = parse_system("group T^1\nP1 = dx1\n").unwrap();
        let g = GroupSpec::new(1, 0).unwrap();
        let mut u = CoeffField::new(g);
        for n in -3i64..=3 {
            u.insert(
                Frequency::new(vec![n], vec![]),
                DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0)),
            )
            .unwrap();
        }
        let f = apply(&sys, &u).unwrap();
        for n in -3i64..=3 {
            let v = f[0].get(&Frequency::new(vec![n], vec![])).unwrap()[(0, 0)];
            assert_abs_diff_eq!(v.im, n as f64, epsilon = 1e-14);
            assert_abs_diff_eq!(v.re, 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn apply_is_multiplicative_over_composition() {
        let sys_pq = parse_system("group S3^1\nP1 = d0_1*dplus_1\n").unwrap();
        let sys_p = parse_system("group S3^1\nP1 = d0_1\n").unwrap();
        let sys_q = parse_system("group S3^1\nP1 = dplus_1\n").unwrap();
        let g = GroupSpec::new(0, 1).unwrap();
        let u = synth(&g, SynthProfile::PolyDecay { order: 3.0 }, 5.0, 5).unwrap();
        let lhs = apply(&sys_pq, &u).unwrap().remove(0);
        let qu = apply(&sys_q, &u).unwrap().remove(0);
        let rhs = apply(&sys_p, &qu).unwrap().remove(0);
        for (xi, m) in lhs.iter() {
            assert!((m - rhs.get(xi).unwrap()).norm() < 1e-12);
        }
    }

    #[test]
    fn jsonl_roundtrip() {
        let g = t1s1();
        let field = synth(&g, SynthProfile::PolyDecay { order: 3.0 }, 6.0, 9).unwrap();
        let text = field_to_jsonl(&field);
        let back = field_from_jsonl(&text).unwrap();
        assert_eq!(field.group, back.group);
        assert_eq!(field.len(), back.len());
        for (xi, m) in field.iter() {
            assert_eq!(back.get(xi).unwrap(), m);
        }
        // byte-identical re-serialization
        assert_eq!(field_to_jsonl(&back), text);
    }

    #[test]
    fn jsonl_dimension_error_with_line() {
        let text = "{\"kind\":\"coeff\",\"version\":1,\"group\":{\"r\":0,\"s\":1}}\n{\"t\":[],\"s2\":[2],\"m\":[[[1.0,0.0],[0.0,0.0]],[[0.0,0.0],[1.0,0.0]]]}\n";
        let err = field_from_jsonl(text).unwrap_err();
        match err {
            LieharmError::CoeffFormat { line, message } => {
                assert_eq!(line, 2);
                assert!(message.contains("3x3"), "{message}");
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn jsonl_unknown_version_rejected() {
        let text = "{\"kind\":\"coeff\",\"version\":2,\"group\":{\"r\":1,\"s\":0}}\n";
        assert!(field_from_jsonl(text).is_err());
    }

    #[test]
    fn jsonl_empty_data_section_ok() {
        let text = "{\"kind\":\"coeff\",\"version\":1,\"group\":{\"r\":1,\"s\":0}}\n";
        let field = field_from_jsonl(text).unwrap();
        assert!(field.is_empty());
    }
}
