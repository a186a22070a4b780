//! Decision criteria for diagonal (and triangular) systems: common-kernel
//! frequency scanning with structural certificates, Diophantine-condition
//! scanning and certification, witness search, and combined verdicts.

pub mod diophantine;
pub mod shapes;
pub mod witness;

use crate::duals::{
    dim, enumerate_frequencies, for_each_frequency, index_set, sphere_weight, torus_weight,
    weight, Frequency, MultiIndex,
};
use crate::error::LieharmError;
use crate::exact::rational_to_f64;
use crate::opalg::SystemDef;
use crate::symbols::{diagonal_entries, structure, StructureClass};
use diophantine::{solve_rational_system, IntSolve};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;
use shapes::{CoeffKey, FirstOrderShape, SpherePowerShape};
use std::collections::BTreeMap;
pub use witness::{Witness, WitnessSequence};

/// One common-kernel hit: a frequency and the slot whose diagonal entries all
/// vanish.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZsetHit {
    pub freq: Frequency,
    pub slot: MultiIndex,
    pub slot_index: usize,
}

/// How the kernel set continues beyond a certified generator.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum InfiniteRule {
    /// `(xi, l + t)` stays a hit for every `t` (index-set monotonicity).
    SphereLadder,
    /// Translation by an integer direction on a pure torus.
    TorusLattice { direction: Vec<i64> },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum ZsetStructural {
    EmptyCertified,
    FiniteCertified { hits: Vec<ZsetHit> },
    InfiniteCertified { generator: ZsetHit, rule: InfiniteRule },
    TruncationOnly,
}

#[derive(Debug, Clone, Serialize)]
pub struct ZsetReport {
    pub cap: f64,
    /// True when every zero test within the cap was exact.
    pub exact: bool,
    pub hits: Vec<ZsetHit>,
    pub structural: ZsetStructural,
}

#[derive(Debug, Clone, Serialize)]
pub struct ShellStat {
    pub shell: i32,
    pub count: u64,
    pub min: f64,
    pub min_weight: f64,
    pub min_freq: Frequency,
    pub min_slot: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CertKind {
    /// Values of some operator part live on a rational lattice bounded away
    /// from zero (or hit zero only on the kernel set).
    LatticeFloor,
    /// Two-term form with a quadratic-irrational ratio; conjugate bound gives
    /// `C * weight^(-1)`.
    QuadraticIrrational,
    /// Sphere power systems `a d0^p + i b dplus dminus`.
    SpherePower,
}

/// An exact lower bound `max_j |sigma_k^j(xi)| >= floor_constant * weight^(-exponent)`
/// valid on every non-kernel slot of the whole dual.
#[derive(Debug, Clone, Serialize)]
pub struct DcCertificate {
    pub kind: CertKind,
    pub floor_constant: f64,
    pub exponent: f64,
    /// Exact rational floor when the bound is a constant (exponent 0).
    pub floor_exact: Option<String>,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct DcReport {
    pub cap: f64,
    pub shells: Vec<ShellStat>,
    /// Minimum of `max_j |sigma_k^j|` over all scanned non-kernel slots.
    pub global_min: f64,
    /// Tightest scanned pair: `m >= fitted_c * weight^(-fitted_m)` on every
    /// scanned slot.
    pub fitted_c: f64,
    pub fitted_m: f64,
    pub certificate: Option<DcCertificate>,
    pub violations: Option<WitnessSequence>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Status {
    Holds,
    Fails,
    ConsistentUpToCap,
    Unknown,
}

#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub gh: Status,
    pub gs: Status,
    pub structure: StructureClass,
    pub zset: ZsetReport,
    pub dc: DcReport,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct ClassifyOptions {
    /// Fail instead of falling back to tolerance-based zero tests.
    pub require_exact: bool,
    /// Escalation targets a witness chain must meet (`e_n >= n - slack`).
    pub witness_targets: usize,
    pub witness_slack: f64,
    /// User-asserted bounded-dimension constant for triangular verdicts.
    pub bd_bound: Option<usize>,
    /// User-asserted uniform bound on strictly-lower symbol entries.
    pub nilpotent_bound: Option<f64>,
    pub zero_tol: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self {
            require_exact: false,
            witness_targets: 3,
            witness_slack: 0.05,
            bd_bound: None,
            nilpotent_bound: None,
            zero_tol: crate::symbols::ZERO_TOL,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WitnessStrategy {
    ShellScan,
    ContinuedFraction,
}

// ---------------------------------------------------------------------------
// Diagonal evaluation plans
// ---------------------------------------------------------------------------

enum DiagEval {
    FirstOrder(FirstOrderShape),
    SpherePower(SpherePowerShape),
    Generic,
}

fn detect_evaluator(sys: &SystemDef) -> DiagEval {
    if let Some(shape) = FirstOrderShape::detect(sys) {
        return DiagEval::FirstOrder(shape);
    }
    if let Some(shape) = SpherePowerShape::detect(sys) {
        return DiagEval::SpherePower(shape);
    }
    DiagEval::Generic
}

#[derive(Clone)]
struct ShellAcc {
    count: u64,
    min: f64,
    min_weight: f64,
    min_freq: Frequency,
    min_slot: usize,
}

#[derive(Clone)]
struct Accum {
    hits: Vec<ZsetHit>,
    shells: BTreeMap<i32, ShellAcc>,
    all_exact: bool,
}

impl Accum {
    fn new() -> Self {
        Accum { hits: Vec::new(), shells: BTreeMap::new(), all_exact: true }
    }

    fn record_min(&mut self, w: f64, freq: &Frequency, slot: usize, m: f64) {
        let t = w.log2().floor() as i32;
        match self.shells.get_mut(&t) {
            Some(acc) => {
                acc.count += 1;
                if m < acc.min {
                    acc.min = m;
                    acc.min_weight = w;
                    acc.min_freq = freq.clone();
                    acc.min_slot = slot;
                }
            }
            None => {
                self.shells.insert(
                    t,
                    ShellAcc {
                        count: 1,
                        min: m,
                        min_weight: w,
                        min_freq: freq.clone(),
                        min_slot: slot,
                    },
                );
            }
        }
    }

    fn merge(mut self, other: Accum) -> Accum {
        self.hits.extend(other.hits);
        self.all_exact &= other.all_exact;
        for (t, o) in other.shells {
            match self.shells.get_mut(&t) {
                Some(acc) => {
                    acc.count += o.count;
                    if o.min < acc.min {
                        acc.min = o.min;
                        acc.min_weight = o.min_weight;
                        acc.min_freq = o.min_freq;
                        acc.min_slot = o.min_slot;
                    }
                }
                None => {
                    self.shells.insert(t, o);
                }
            }
        }
        self
    }
}

/// Scan every slot with weight <= cap, recording kernel hits and per-shell
/// minima of `max_j |sigma_k^j|` over non-kernel slots.
fn scan(sys: &SystemDef, cap: f64, opts: &ClassifyOptions) -> Result<Accum, LieharmError> {
    if cap < 1.0 {
        return Err(LieharmError::InvalidCap(cap));
    }
    let group = sys.group;
    match detect_evaluator(sys) {
        DiagEval::FirstOrder(shape) => {
            let exact_capable = shape.all_exact() && shape.transcendental_ok();
            if opts.require_exact && !exact_capable {
                return Err(LieharmError::Invalid(
                    "exact mode requested but coefficients are not exact".into(),
                ));
            }
            if group.sphere_count == 0 && group.torus_rank >= 1 && cap >= 64.0 {
                return Ok(scan_first_order_torus_parallel(&shape, cap, opts, exact_capable));
            }
            let mut acc = Accum::new();
            acc.all_exact = exact_capable;
            for_each_frequency(&group, cap, |xi| {
                scan_first_order_freq(&shape, xi, opts, exact_capable, &mut acc);
            })?;
            Ok(acc)
        }
        DiagEval::SpherePower(shape) => {
            let mut acc = Accum::new();
            let mut two_ell = 0i64;
            while sphere_weight(two_ell) <= cap {
                let xi = Frequency::new(vec![], vec![two_ell]);
                let w = sphere_weight(two_ell);
                let mut two_n = -two_ell;
                let mut pos = 0usize;
                while two_n <= two_ell {
                    if SpherePowerShape::is_zero_slot(two_ell, two_n) {
                        acc.hits.push(ZsetHit {
                            freq: xi.clone(),
                            slot: MultiIndex::new(vec![two_n]),
                            slot_index: pos,
                        });
                    } else {
                        let m = (0..shape.ops.len())
                            .map(|op| shape.sigma_float(op, two_ell, two_n).norm())
                            .fold(0.0, f64::max);
                        acc.record_min(w, &xi, pos, m);
                    }
                    two_n += 2;
                    pos += 1;
                }
                two_ell += 1;
            }
            Ok(acc)
        }
        DiagEval::Generic => {
            // Requires a diagonal or triangular system.
            let sample = enumerate_frequencies(&group, cap.min(8.0))?;
            let st = structure(sys, &sample)?;
            if !st.is_triangular_or_diagonal() {
                return Err(LieharmError::UnsupportedStructure(
                    "diagonal entries are not well-defined for a general system".into(),
                ));
            }
            if opts.require_exact {
                // exactness decided per-frequency below; verified as we go
            }
            let mut acc = Accum::new();
            for xi in enumerate_frequencies(&group, cap)? {
                let w = weight(&group, &xi)?;
                let table = diagonal_entries(sys, &xi)?;
                let d = dim(&group, &xi)?;
                let slots = index_set(&xi);
                let exact_ok = table.exact.iter().all(Option::is_some);
                acc.all_exact &= exact_ok;
                if opts.require_exact && !exact_ok {
                    return Err(LieharmError::Invalid(
                        "exact mode requested but symbol evaluation lost exactness".into(),
                    ));
                }
                for k in 0..d {
                    let scale =
                        table.values.iter().map(|row| row[k].norm()).fold(0.0, f64::max);
                    let all_zero = if exact_ok {
                        table
                            .exact
                            .iter()
                            .all(|e| e.as_ref().expect("checked").get(k).map(|s| s.is_zero()).unwrap_or(true))
                    } else {
                        table.values.iter().all(|row| {
                            row[k].norm() <= opts.zero_tol * (1.0 + scale)
                        })
                    };
                    if all_zero {
                        acc.hits.push(ZsetHit {
                            freq: xi.clone(),
                            slot: slots[k].clone(),
                            slot_index: k,
                        });
                    } else {
                        let m = table.values.iter().map(|row| row[k].norm()).fold(0.0, f64::max);
                        acc.record_min(w, &xi, k, m);
                    }
                }
            }
            Ok(acc)
        }
    }
}

fn scan_first_order_freq(
    shape: &FirstOrderShape,
    xi: &Frequency,
    opts: &ClassifyOptions,
    exact_capable: bool,
    acc: &mut Accum,
) {
    let group = shape.group;
    let w = weight(&group, xi).expect("valid frequency");
    let n_ops = shape.num_ops();
    let slots = index_set(xi);
    for (pos, slot) in slots.iter().enumerate() {
        let mut m = 0.0f64;
        let mut smallest = f64::INFINITY;
        let mut scale = 0.0f64;
        for op in 0..n_ops {
            let v = shape.sigma_float(op, &xi.torus, &slot.sphere2n).norm();
            m = m.max(v);
            smallest = smallest.min(v);
            scale = scale.max(v);
        }
        let _ = smallest;
        let float_zero = m <= opts.zero_tol * (1.0 + scale) || m <= 1e-9 * (1.0 + w);
        let is_hit = if float_zero {
            if exact_capable {
                (0..n_ops).all(|op| {
                    shape.exact_zero(op, &xi.torus, &slot.sphere2n).unwrap_or(false)
                })
            } else {
                m <= opts.zero_tol * (1.0 + scale)
            }
        } else {
            false
        };
        if is_hit {
            acc.hits.push(ZsetHit { freq: xi.clone(), slot: slot.clone(), slot_index: pos });
        } else {
            acc.record_min(w, xi, pos, m);
        }
    }
}

/// Parallel stripe scan over the leading torus coordinate for pure-torus
/// groups. Deterministic: stripes are merged in coordinate order.
fn scan_first_order_torus_parallel(
    shape: &FirstOrderShape,
    cap: f64,
    opts: &ClassifyOptions,
    exact_capable: bool,
) -> Accum {
    let group = shape.group;
    let r = group.torus_rank;
    let max_norm_sq = (cap * cap - 1.0).max(0.0);
    let bound = max_norm_sq.sqrt().floor() as i64;
    let stripes: Vec<i64> = (-bound..=bound).collect();
    let partials: Vec<Accum> = stripes
        .par_iter()
        .map(|&n1| {
            let mut acc = Accum::new();
            acc.all_exact = exact_capable;
            let mut torus = vec![0i64; r];
            torus[0] = n1;
            stripe_rec(shape, max_norm_sq, 1, n1 * n1, &mut torus, opts, exact_capable, &mut acc);
            acc
        })
        .collect();
    partials.into_iter().fold(Accum::new(), Accum::merge)
}

#[allow(clippy::too_many_arguments)]
fn stripe_rec(
    shape: &FirstOrderShape,
    max_norm_sq: f64,
    j: usize,
    used: i64,
    torus: &mut Vec<i64>,
    opts: &ClassifyOptions,
    exact_capable: bool,
    acc: &mut Accum,
) {
    let r = shape.group.torus_rank;
    if j == r {
        let xi = Frequency::new(torus.clone(), vec![]);
        scan_first_order_freq(shape, &xi, opts, exact_capable, acc);
        return;
    }
    let room = max_norm_sq - used as f64;
    if room < 0.0 {
        return;
    }
    let b = room.sqrt().floor() as i64;
    for n in -b..=b {
        if (used + n * n) as f64 > max_norm_sq + 1e-9 {
            continue;
        }
        torus[j] = n;
        stripe_rec(shape, max_norm_sq, j + 1, used + n * n, torus, opts, exact_capable, acc);
    }
    torus[j] = 0;
}

fn sort_hits(group: &crate::duals::GroupSpec, hits: &mut [ZsetHit]) {
    hits.sort_by(|a, b| {
        let wa = weight(group, &a.freq).unwrap_or(f64::INFINITY);
        let wb = weight(group, &b.freq).unwrap_or(f64::INFINITY);
        wa.total_cmp(&wb)
            .then_with(|| a.freq.cmp(&b.freq))
            .then_with(|| a.slot_index.cmp(&b.slot_index))
    });
}

// ---------------------------------------------------------------------------
// Z-set
// ---------------------------------------------------------------------------

/// Scan the kernel set up to `cap` and attach the structural certificate.
pub fn zset_scan(sys: &SystemDef, cap: f64) -> Result<ZsetReport, LieharmError> {
    zset_scan_with(sys, cap, &ClassifyOptions::default())
}

pub fn zset_scan_with(
    sys: &SystemDef,
    cap: f64,
    opts: &ClassifyOptions,
) -> Result<ZsetReport, LieharmError> {
    let mut acc = scan(sys, cap, opts)?;
    sort_hits(&sys.group, &mut acc.hits);
    Ok(ZsetReport { cap, exact: acc.all_exact, hits: acc.hits, structural: zset_structural(sys) })
}

/// Structural certificate for the kernel set, by exact linear algebra over
/// the lattice for first-order systems and by the closed form for sphere
/// power systems.
pub fn zset_structural(sys: &SystemDef) -> ZsetStructural {
    if let Some(shape) = FirstOrderShape::detect(sys) {
        if !shape.all_exact() || !shape.transcendental_ok() {
            return ZsetStructural::TruncationOnly;
        }
        let r = shape.group.torus_rank;
        let s = shape.group.sphere_count;
        let mut rows: Vec<Vec<BigRational>> = Vec::new();
        let mut rhs: Vec<BigRational> = Vec::new();
        for op in 0..shape.num_ops() {
            let Some(affines) = shape.keyed_affine(op) else {
                return ZsetStructural::TruncationOnly;
            };
            for form in affines.values() {
                let re_row: Vec<BigRational> = form.coeffs.iter().map(|c| c.re.clone()).collect();
                let im_row: Vec<BigRational> = form.coeffs.iter().map(|c| c.im.clone()).collect();
                if re_row.iter().any(|v| !v.is_zero()) || !form.constant.re.is_zero() {
                    rows.push(re_row);
                    rhs.push(-form.constant.re.clone());
                }
                if im_row.iter().any(|v| !v.is_zero()) || !form.constant.im.is_zero() {
                    rows.push(im_row);
                    rhs.push(-form.constant.im.clone());
                }
            }
        }
        if rows.is_empty() {
            // zero system: every slot is a kernel slot
            let generator = ZsetHit {
                freq: Frequency::zero(&shape.group),
                slot: MultiIndex::new(vec![0; s]),
                slot_index: 0,
            };
            let rule = if s > 0 {
                InfiniteRule::SphereLadder
            } else {
                InfiniteRule::TorusLattice { direction: unit_direction(r) }
            };
            return ZsetStructural::InfiniteCertified { generator, rule };
        }
        let mut padded_rows = rows;
        for row in &mut padded_rows {
            row.resize(r + s, BigRational::zero());
        }
        match solve_rational_system(&padded_rows, &rhs) {
            IntSolve::NoSolution => ZsetStructural::EmptyCertified,
            IntSolve::Unique(y) => {
                let hit = hit_from_solution(&shape, &y);
                if s == 0 {
                    ZsetStructural::FiniteCertified { hits: vec![hit] }
                } else {
                    ZsetStructural::InfiniteCertified {
                        generator: hit,
                        rule: InfiniteRule::SphereLadder,
                    }
                }
            }
            IntSolve::Infinite { particular, kernel } => {
                let hit = hit_from_solution(&shape, &particular);
                let rule = if s > 0 {
                    InfiniteRule::SphereLadder
                } else {
                    let direction: Vec<i64> = kernel
                        .first()
                        .map(|k| k.iter().map(|v| v.to_i64().unwrap_or(0)).collect())
                        .unwrap_or_else(|| unit_direction(r));
                    InfiniteRule::TorusLattice { direction }
                };
                ZsetStructural::InfiniteCertified { generator: hit, rule }
            }
        }
    } else if SpherePowerShape::detect(sys).is_some() {
        ZsetStructural::FiniteCertified {
            hits: vec![ZsetHit {
                freq: Frequency::new(vec![], vec![0]),
                slot: MultiIndex::new(vec![0]),
                slot_index: 0,
            }],
        }
    } else {
        ZsetStructural::TruncationOnly
    }
}

fn unit_direction(r: usize) -> Vec<i64> {
    let mut d = vec![0i64; r];
    if r > 0 {
        d[0] = 1;
    }
    d
}

fn hit_from_solution(shape: &FirstOrderShape, y: &[BigInt]) -> ZsetHit {
    let r = shape.group.torus_rank;
    let torus: Vec<i64> = y[..r].iter().map(|v| v.to_i64().unwrap_or(0)).collect();
    let beta: Vec<i64> = y[r..].iter().map(|v| v.to_i64().unwrap_or(0)).collect();
    let sphere2: Vec<i64> = beta.iter().map(|b| b.abs()).collect();
    let freq = Frequency::new(torus, sphere2);
    let slot = MultiIndex::new(beta);
    let slot_index = crate::duals::index_position(&freq, &slot);
    ZsetHit { freq, slot, slot_index }
}

/// Materialize `count` kernel hits from a report, extending scan hits along
/// the certified rule when necessary.
pub fn extend_hits(report: &ZsetReport, count: usize) -> Result<Vec<ZsetHit>, LieharmError> {
    let mut hits = report.hits.clone();
    if hits.len() >= count {
        hits.truncate(count);
        return Ok(hits);
    }
    if let ZsetStructural::InfiniteCertified { generator, rule } = &report.structural {
        let mut t = 0i64;
        while hits.len() < count && t < 1_000_000 {
            t += 1;
            let candidate = match rule {
                InfiniteRule::SphereLadder => {
                    let mut freq = generator.freq.clone();
                    for v in freq.sphere2.iter_mut() {
                        *v += 2 * t;
                    }
                    let slot = generator.slot.clone();
                    let slot_index = crate::duals::index_position(&freq, &slot);
                    ZsetHit { freq, slot, slot_index }
                }
                InfiniteRule::TorusLattice { direction } => {
                    let mut freq = generator.freq.clone();
                    for (v, d) in freq.torus.iter_mut().zip(direction) {
                        *v += d * t;
                    }
                    ZsetHit { freq, slot: generator.slot.clone(), slot_index: generator.slot_index }
                }
            };
            if !hits.contains(&candidate) {
                hits.push(candidate);
            }
        }
    }
    if hits.len() < count {
        return Err(LieharmError::Invalid(format!(
            "requested {count} kernel hits but only {} are available",
            hits.len()
        )));
    }
    Ok(hits)
}

// ---------------------------------------------------------------------------
// Diophantine condition
// ---------------------------------------------------------------------------

/// Scan shell minima of `max_j |sigma_k^j|` and fit the tightest polynomial
/// floor; attach an exact certificate when the system shape provides one.
pub fn dc_scan(sys: &SystemDef, cap: f64) -> Result<DcReport, LieharmError> {
    dc_scan_with(sys, cap, &ClassifyOptions::default())
}

pub fn dc_scan_with(
    sys: &SystemDef,
    cap: f64,
    opts: &ClassifyOptions,
) -> Result<DcReport, LieharmError> {
    let acc = scan(sys, cap, opts)?;
    let shells: Vec<ShellStat> = acc
        .shells
        .iter()
        .map(|(&t, a)| ShellStat {
            shell: t,
            count: a.count,
            min: a.min,
            min_weight: a.min_weight,
            min_freq: a.min_freq.clone(),
            min_slot: a.min_slot,
        })
        .collect();
    let global_min = shells.iter().map(|s| s.min).fold(f64::INFINITY, f64::min);
    let (fitted_c, fitted_m) = fit_floor(&shells);
    let certificate = certificate_for(sys);
    let candidates: Vec<Witness> = shells
        .iter()
        .filter(|s| s.min > 0.0)
        .map(|s| Witness {
            freq: s.min_freq.clone(),
            slot: s.min_slot,
            value: s.min,
            exponent: witness::witness_exponent(s.min, s.min_weight),
            weight: s.min_weight,
        })
        .collect();
    let violations = witness::select_chain(candidates, opts.witness_targets, opts.witness_slack);
    Ok(DcReport { cap, shells, global_min, fitted_c, fitted_m, certificate, violations })
}

fn fit_floor(shells: &[ShellStat]) -> (f64, f64) {
    let pts: Vec<(f64, f64)> = shells
        .iter()
        .filter(|s| s.min > 0.0 && s.min.is_finite())
        .map(|s| (s.min_weight.ln(), s.min.ln()))
        .collect();
    if pts.len() < 2 {
        let c = shells.iter().map(|s| s.min).fold(f64::INFINITY, f64::min);
        return (if c.is_finite() { c } else { 0.0 }, 0.0);
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let fitted_m = -slope;
    // Tighten C so the bound holds on every scanned slot: within shell t the
    // weight spans [2^t, 2^(t+1)).
    let mut c = f64::INFINITY;
    for s in shells {
        if !(s.min > 0.0) {
            continue;
        }
        let edge = if fitted_m >= 0.0 { 2f64.powi(s.shell) } else { 2f64.powi(s.shell + 1) };
        c = c.min(s.min * edge.powf(fitted_m));
    }
    (if c.is_finite() { c } else { 0.0 }, fitted_m)
}

fn certificate_for(sys: &SystemDef) -> Option<DcCertificate> {
    if let Some(shape) = FirstOrderShape::detect(sys) {
        return first_order_certificate(&shape);
    }
    if let Some(shape) = SpherePowerShape::detect(sys) {
        let floor = shape.floor_constant();
        return Some(DcCertificate {
            kind: CertKind::SpherePower,
            floor_constant: floor,
            exponent: 0.0,
            floor_exact: None,
            detail: format!(
                "min_j min(|a_j|/2^p_j, |b_j|) = {floor}; n != 0 gives |a n^p| >= |a|/2^p, \
                 n = 0 forces integer l with |b| l(l+1) >= 2|b|"
            ),
        });
    }
    None
}

enum PartInfo {
    IdenticallyZero,
    /// The part never vanishes; its absolute value is at least this.
    NeverZero(BigRational),
    /// The part vanishes somewhere; nonzero values are at least this.
    MinNonzero(BigRational),
    Unavailable,
}

fn part_info(
    affines: &BTreeMap<CoeffKey, shapes::AffineForm>,
    re_part: bool,
) -> PartInfo {
    // All irrational keys must contribute nothing to this part.
    for (key, form) in affines {
        if *key == CoeffKey::Rat {
            continue;
        }
        let nonzero = form
            .coeffs
            .iter()
            .any(|c| if re_part { !c.re.is_zero() } else { !c.im.is_zero() })
            || if re_part { !form.constant.re.is_zero() } else { !form.constant.im.is_zero() };
        if nonzero {
            return PartInfo::Unavailable;
        }
    }
    let Some(rat) = affines.get(&CoeffKey::Rat) else {
        return PartInfo::IdenticallyZero;
    };
    let coeffs: Vec<BigRational> = rat
        .coeffs
        .iter()
        .map(|c| if re_part { c.re.clone() } else { c.im.clone() })
        .collect();
    let h = if re_part { rat.constant.re.clone() } else { rat.constant.im.clone() };
    let nonzero: Vec<&BigRational> = coeffs.iter().filter(|c| !c.is_zero()).collect();
    if nonzero.is_empty() {
        return if h.is_zero() {
            PartInfo::IdenticallyZero
        } else {
            PartInfo::NeverZero(h.abs())
        };
    }
    let d = rational_gcd(&nonzero);
    let q = (&h / &d).floor();
    let r = &h - &d * q;
    if r.is_zero() {
        PartInfo::MinNonzero(d)
    } else {
        let alt = &d - &r;
        PartInfo::NeverZero(if r < alt { r } else { alt })
    }
}

fn rational_gcd(values: &[&BigRational]) -> BigRational {
    use num_integer::Integer;
    let mut lcm = BigInt::from(1);
    for v in values {
        lcm = lcm.lcm(v.denom());
    }
    let mut g = BigInt::zero();
    for v in values {
        let scaled = (*v * BigRational::from_integer(lcm.clone())).to_integer();
        g = g.gcd(&scaled);
    }
    BigRational::new(g, lcm)
}

fn first_order_certificate(shape: &FirstOrderShape) -> Option<DcCertificate> {
    if !shape.all_exact() || !shape.transcendental_ok() {
        return None;
    }
    let mut floor = f64::INFINITY;
    let mut exponent = 0.0f64;
    let mut any_quad = false;
    let mut exact_min: Option<BigRational> = None;
    let mut details = Vec::new();
    let mut any_op = false;
    for op in 0..shape.num_ops() {
        let affines = shape.keyed_affine(op)?;
        if affines.values().all(|f| f.is_zero_form()) {
            continue; // identically-zero operator contributes nothing
        }
        any_op = true;
        // Case A: lattice floor from the real or imaginary part.
        let re = part_info(&affines, true);
        let im = part_info(&affines, false);
        let case_a: Option<(BigRational, bool)> = match (&re, &im) {
            (PartInfo::NeverZero(a), PartInfo::NeverZero(b)) => {
                Some((if a > b { a.clone() } else { b.clone() }, true))
            }
            (PartInfo::NeverZero(a), _) => Some((a.clone(), true)),
            (_, PartInfo::NeverZero(b)) => Some((b.clone(), true)),
            (PartInfo::MinNonzero(a), PartInfo::MinNonzero(b)) => {
                Some((if a < b { a.clone() } else { b.clone() }, false))
            }
            (PartInfo::MinNonzero(a), PartInfo::IdenticallyZero) => Some((a.clone(), false)),
            (PartInfo::IdenticallyZero, PartInfo::MinNonzero(b)) => Some((b.clone(), false)),
            _ => None,
        };
        if let Some((bound, _never)) = case_a {
            let v = rational_to_f64(&bound);
            if v < floor {
                floor = v;
                exact_min = Some(bound.clone());
            } else if exact_min.is_none() {
                exact_min = Some(bound.clone());
            }
            details.push(format!("op {op}: lattice floor {bound}"));
            continue;
        }
        // Case B: two-term quadratic-irrational form.
        if let Some(c) = quad_floor(&affines) {
            any_quad = true;
            exponent = 1.0;
            if c < floor {
                floor = c;
                exact_min = None;
            }
            details.push(format!("op {op}: quadratic-irrational conjugate bound C = {c:.6e}"));
            continue;
        }
        return None;
    }
    if !any_op || !floor.is_finite() {
        return None;
    }
    let floor_exact = if any_quad { None } else { exact_min.map(|r| r.to_string()) };
    Some(DcCertificate {
        kind: if any_quad { CertKind::QuadraticIrrational } else { CertKind::LatticeFloor },
        floor_constant: floor,
        exponent,
        floor_exact,
        detail: details.join("; "),
    })
}

/// Two-term `g_v (rho sqrt(m) u + v)` bound: for integer (u, v) not both zero
/// with rho = a/b, `|a sqrt(m) u + b v| * |a sqrt(m) u - b v| = |a^2 m u^2 -
/// b^2 v^2| >= 1`, so `|sigma| >= |g_v| / (b (|a| sqrt(m) k_u + b k_v) w)`
/// with `|u| <= k_u w`, `|v| <= k_v w`.
fn quad_floor(affines: &BTreeMap<CoeffKey, shapes::AffineForm>) -> Option<f64> {
    // constants must vanish in every key
    for form in affines.values() {
        if !form.constant.is_zero() {
            return None;
        }
    }
    let nvars = affines.values().next()?.coeffs.len();
    let mut surd: Option<(usize, u64, crate::exact::GaussRational)> = None;
    let mut rat: Option<(usize, crate::exact::GaussRational)> = None;
    for (key, form) in affines {
        for (i, c) in form.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            match key {
                CoeffKey::Rat => {
                    if rat.is_some() {
                        return None;
                    }
                    rat = Some((i, c.clone()));
                }
                CoeffKey::Rad(m) => {
                    if surd.is_some() {
                        return None;
                    }
                    surd = Some((i, *m, c.clone()));
                }
                _ => return None,
            }
        }
    }
    let (ui, m, gu) = surd?;
    let (vi, gv) = rat?;
    if ui == vi || ui >= nvars || vi >= nvars {
        return None;
    }
    let rho = gu.mul(&gv.inv()?);
    if !rho.is_real() {
        return None;
    }
    let a = rho.re.numer().abs();
    let b = rho.re.denom().clone();
    // doubled sphere variables carry |y| <= 2w, torus |y| <= w; since the
    // affine is over y = (xi, 2 alpha) the sphere slots sit past torus_rank,
    // but we no longer know r here: be conservative and use k = 2 for both.
    let k_u = 2.0;
    let k_v = 2.0;
    let a_f = a.to_f64().unwrap_or(f64::MAX);
    let b_f = b.to_f64().unwrap_or(f64::MAX);
    let denom = b_f * (a_f * (m as f64).sqrt() * k_u + b_f * k_v);
    let c = gv.to_complex64().norm() / denom;
    (c.is_finite() && c > 0.0).then_some(c)
}

// ---------------------------------------------------------------------------
// Witness search
// ---------------------------------------------------------------------------

/// Search for a Diophantine-failure witness chain. `cap` bounds the weight
/// for the shell strategy and the convergent denominator for the
/// continued-fraction strategy.
pub fn dc_witness_search(
    sys: &SystemDef,
    cap: f64,
    strategy: WitnessStrategy,
) -> Result<Option<WitnessSequence>, LieharmError> {
    dc_witness_search_with(sys, cap, strategy, &ClassifyOptions::default())
}

pub fn dc_witness_search_with(
    sys: &SystemDef,
    cap: f64,
    strategy: WitnessStrategy,
    opts: &ClassifyOptions,
) -> Result<Option<WitnessSequence>, LieharmError> {
    match strategy {
        WitnessStrategy::ShellScan => {
            let report = dc_scan_with(sys, cap, opts)?;
            Ok(report.violations)
        }
        WitnessStrategy::ContinuedFraction => {
            let candidates = continued_fraction_candidates(sys, cap)?;
            Ok(witness::select_chain(candidates, opts.witness_targets, opts.witness_slack))
        }
    }
}

/// The two-term torus shape behind the continued-fraction strategy.
struct CfShape {
    pos_a: usize,
    pos_b: usize,
    scale: f64, // |c1|
    ratio: witness::RealRatio,
    sign: f64,
}

fn cf_shape(sys: &SystemDef) -> Result<CfShape, LieharmError> {
    let shape = FirstOrderShape::detect(sys).ok_or_else(|| {
        LieharmError::StrategyMismatch("system is not first-order".into())
    })?;
    if shape.num_ops() != 1 {
        return Err(LieharmError::StrategyMismatch(
            "continued-fraction search expects a single operator".into(),
        ));
    }
    if shape.sphere.iter().flatten().any(|c| !c.is_zero()) {
        return Err(LieharmError::StrategyMismatch(
            "continued-fraction search expects a pure torus operator".into(),
        ));
    }
    if !shape.constant[0].is_zero() {
        return Err(LieharmError::StrategyMismatch(
            "continued-fraction search expects a zero constant term".into(),
        ));
    }
    let nz: Vec<usize> =
        (0..shape.group.torus_rank).filter(|&j| !shape.torus[0][j].is_zero()).collect();
    let [pos_a, pos_b] = nz.as_slice() else {
        return Err(LieharmError::StrategyMismatch(format!(
            "expected exactly two torus terms, found {}",
            nz.len()
        )));
    };
    let c1 = &shape.torus[0][*pos_a];
    let c2 = &shape.torus[0][*pos_b];
    let (ratio, sign) = witness::coefficient_ratio(c1, c2).ok_or_else(|| {
        LieharmError::StrategyMismatch("coefficient ratio c2/c1 is not real".into())
    })?;
    Ok(CfShape { pos_a: *pos_a, pos_b: *pos_b, scale: c1.float().norm(), ratio, sign })
}

fn continued_fraction_candidates(
    sys: &SystemDef,
    cap: f64,
) -> Result<Vec<Witness>, LieharmError> {
    let cf = cf_shape(sys)?;
    let qmax = BigInt::from(cap.max(1.0) as i64);
    let r = sys.group.torus_rank;
    let mut out = Vec::new();
    for conv in witness::convergents(&cf.ratio, &qmax) {
        let (Some(p), Some(q)) = (conv.p.to_i64(), conv.q.to_i64()) else { continue };
        let mut torus = vec![0i64; r];
        torus[cf.pos_a] = if cf.sign >= 0.0 { -p } else { p };
        torus[cf.pos_b] = q;
        let freq = Frequency::new(torus, vec![]);
        let w = torus_weight(&freq.torus);
        let m = cf.scale * conv.err_value;
        let ln_m = cf.scale.ln() + conv.err_ln;
        out.push(Witness {
            freq,
            slot: 0,
            value: m,
            exponent: witness::exponent_from_ln(ln_m, w),
            weight: w,
        });
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Combined verdicts
// ---------------------------------------------------------------------------

/// Run the full decision procedure at truncation `cap`.
pub fn classify(
    sys: &SystemDef,
    cap: f64,
    opts: &ClassifyOptions,
) -> Result<Verdict, LieharmError> {
    let sample = enumerate_frequencies(&sys.group, cap.min(8.0).max(1.0))?;
    let sample = if sample.is_empty() { enumerate_frequencies(&sys.group, cap)? } else { sample };
    let st = if sample.is_empty() {
        StructureClass::General
    } else {
        structure(sys, &sample)?
    };
    let mut notes = Vec::new();
    if !st.is_triangular_or_diagonal() {
        notes.push(
            "general (non-triangular) structure in the fixed basis: the decision \
             criteria do not apply"
                .into(),
        );
        return Ok(Verdict {
            gh: Status::Unknown,
            gs: Status::Unknown,
            structure: st,
            zset: ZsetReport {
                cap,
                exact: false,
                hits: vec![],
                structural: ZsetStructural::TruncationOnly,
            },
            dc: DcReport {
                cap,
                shells: vec![],
                global_min: f64::INFINITY,
                fitted_c: 0.0,
                fitted_m: 0.0,
                certificate: None,
                violations: None,
            },
            notes,
        });
    }
    let zset = zset_scan_with(sys, cap, opts)?;
    let mut dc = dc_scan_with(sys, cap, opts)?;
    // When no exact certificate exists, try the continued-fraction witness
    // search on eligible shapes (it sees far beyond the weight cap).
    if dc.certificate.is_none() && dc.violations.is_none() {
        if let Ok(cands) = continued_fraction_candidates(sys, cap.max(10_000_000.0)) {
            dc.violations = witness::select_chain(cands, opts.witness_targets, opts.witness_slack);
            if dc.violations.is_some() {
                notes.push("witnesses found by continued-fraction search".into());
            }
        }
    }
    let z_finite_cert = matches!(
        zset.structural,
        ZsetStructural::EmptyCertified | ZsetStructural::FiniteCertified { .. }
    );
    let z_infinite = matches!(zset.structural, ZsetStructural::InfiniteCertified { .. });
    let dc_cert = dc.certificate.is_some();
    let dc_fail = dc
        .violations
        .as_ref()
        .map(|w| w.targets_met >= opts.witness_targets)
        .unwrap_or(false);

    let (gh, gs) = match st {
        StructureClass::Diagonal => {
            let gs = if dc_cert {
                Status::Holds
            } else if dc_fail {
                Status::Fails
            } else {
                Status::ConsistentUpToCap
            };
            let gh = if z_infinite || dc_fail {
                Status::Fails
            } else if z_finite_cert && dc_cert {
                Status::Holds
            } else {
                Status::ConsistentUpToCap
            };
            (gh, gs)
        }
        StructureClass::LowerTriangular { .. } => {
            // Only sufficiency is available for triangular systems; verdicts
            // never report Fails from this route.
            let bd_ok = opts.bd_bound.is_some();
            let nil_ok = opts.nilpotent_bound.is_some();
            if bd_ok {
                notes.push(format!(
                    "bounded-dimension constant asserted by caller: d_G = {}",
                    opts.bd_bound.unwrap()
                ));
            }
            if nil_ok {
                notes.push(format!(
                    "uniform nilpotent bound asserted by caller: K = {}",
                    opts.nilpotent_bound.unwrap()
                ));
            }
            let gh = if z_finite_cert && dc_cert && (bd_ok || nil_ok) {
                Status::Holds
            } else {
                Status::ConsistentUpToCap
            };
            let gs = if dc_cert && bd_ok {
                notes.push(
                    "triangular + bounded dimension + certified floor: closed range, \
                     hence globally solvable (documented consequence)"
                        .into(),
                );
                Status::Holds
            } else {
                Status::ConsistentUpToCap
            };
            (gh, gs)
        }
        StructureClass::General => unreachable!("handled above"),
    };
    debug_assert!(!(gh == Status::Holds && gs != Status::Holds));
    Ok(Verdict { gh, gs, structure: st, zset, dc, notes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opalg::parse_system;
    use num_complex::Complex64;

    fn opts() -> ClassifyOptions {
        ClassifyOptions::default()
    }

    // ----- Z-set scanning -----

    #[test]
    fn zset_single_torus_derivative() {
        let sys = parse_system("group T^1\nP1 = dx1\n").unwrap();
        let rep = zset_scan(&sys, 20.0).unwrap();
        assert_eq!(rep.hits.len(), 1);
        assert_eq!(rep.hits[0].freq, Frequency::new(vec![0], vec![]));
        match &rep.structural {
            ZsetStructural::FiniteCertified { hits } => {
                assert_eq!(hits.len(), 1);
                assert_eq!(hits[0].freq, Frequency::new(vec![0], vec![]));
            }
            other => panic!("expected FiniteCertified, got {other:?}"),
        }
    }

    #[test]
    fn zset_example_first_order_sqrt2() {
        // P = sqrt(2) dx1 + i d0_1 on T^1 x S3^1: kernel hits at (0, l) for
        // integer l, slot n = 0.
        let sys = parse_system("group T^1xS3^1\nP1 = sqrt(2)*dx1 + i*d0_1\n").unwrap();
        let rep = zset_scan(&sys, 20.0).unwrap();
        assert!(rep.exact);
        // weight(0, l) = 1 + sqrt(1 + l(l+1)) <= 20 => l <= 18
        assert_eq!(rep.hits.len(), 19);
        for (i, hit) in rep.hits.iter().enumerate() {
            assert_eq!(hit.freq.torus, vec![0]);
            assert_eq!(hit.freq.sphere2, vec![2 * i as i64]);
            assert_eq!(hit.slot.sphere2n, vec![0]);
        }
        match &rep.structural {
            ZsetStructural::InfiniteCertified { generator, rule } => {
                assert_eq!(generator.freq, Frequency::new(vec![0], vec![0]));
                assert_eq!(*rule, InfiniteRule::SphereLadder);
            }
            other => panic!("expected InfiniteCertified, got {other:?}"),
        }
    }

    #[test]
    fn zset_example_imaginary_shift_empty() {
        // P_nu = dx_nu + i*i*d0 + 1/3: never vanishes since Re = 1/3 - m.
        let sys = parse_system(
            "group T^2xS3^1\nP1 = dx1 + i*i*d0_1 + 1/3\nP2 = dx2 + i*i*d0_1 + 1/3\n",
        )
        .unwrap();
        let rep = zset_scan(&sys, 12.0).unwrap();
        assert!(rep.hits.is_empty());
        assert_eq!(rep.structural, ZsetStructural::EmptyCertified);
    }

    #[test]
    fn zset_sphere_power_example() {
        let sys =
            parse_system("group S3^1\nP1 = d0_1^2 + i*dplus_1*dminus_1\nP2 = 2*d0_1^2 + 3i*dplus_1*dminus_1\n")
                .unwrap();
        let rep = zset_scan(&sys, 20.0).unwrap();
        assert_eq!(rep.hits.len(), 1);
        assert_eq!(rep.hits[0].freq, Frequency::new(vec![], vec![0]));
        assert!(matches!(&rep.structural, ZsetStructural::FiniteCertified { hits } if hits.len() == 1));
    }

    #[test]
    fn zset_scan_prefix_stable_under_cap() {
        let sys = parse_system("group T^1xS3^1\nP1 = sqrt(2)*dx1 + i*d0_1\n").unwrap();
        let small = zset_scan(&sys, 8.0).unwrap();
        let large = zset_scan(&sys, 16.0).unwrap();
        assert!(small.hits.len() < large.hits.len());
        assert_eq!(&large.hits[..small.hits.len()], &small.hits[..]);
    }

    #[test]
    fn zset_rejects_general_structure() {
        let sys = parse_system("group S3^1\nP1 = dplus_1 + dminus_1\n").unwrap();
        assert!(zset_scan(&sys, 5.0).is_err());
    }

    // ----- DC scanning and certificates -----

    #[test]
    fn dc_example_sphere_power_floor() {
        // a = (1,2), b = (1,3), p = 2: scanned floor >= 1/4 and certificate
        // C = min(a/2^p, b) = 1/4.
        let sys = parse_system(
            "group S3^1\nP1 = d0_1^2 + i*dplus_1*dminus_1\nP2 = 2*d0_1^2 + 3i*dplus_1*dminus_1\n",
        )
        .unwrap();
        let rep = dc_scan(&sys, 30.0).unwrap();
        assert!(rep.global_min >= 0.25);
        assert!(rep.fitted_m <= 0.0, "minima grow, fitted M should be <= 0, got {}", rep.fitted_m);
        let cert = rep.certificate.expect("sphere-power certificate");
        assert_eq!(cert.kind, CertKind::SpherePower);
        assert!((cert.floor_constant - 0.25).abs() < 1e-12);
        assert!(rep.violations.is_none());
    }

    #[test]
    fn dc_example_imaginary_shift_floor_sixth() {
        let sys = parse_system(
            "group T^2xS3^1\nP1 = dx1 + i*i*d0_1 + 1/3\nP2 = dx2 + i*i*d0_1 + 1/3\n",
        )
        .unwrap();
        let rep = dc_scan(&sys, 12.0).unwrap();
        assert!(rep.global_min >= 1.0 / 6.0 - 1e-12, "global min {}", rep.global_min);
        let cert = rep.certificate.expect("lattice floor certificate");
        assert_eq!(cert.kind, CertKind::LatticeFloor);
        assert_eq!(cert.floor_exact.as_deref(), Some("1/6"));
        assert!((cert.floor_constant - 1.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn dc_example_sqrt2_quadratic_certificate() {
        let sys = parse_system("group T^1xS3^1\nP1 = sqrt(2)*dx1 + i*d0_1\n").unwrap();
        let rep = dc_scan(&sys, 15.0).unwrap();
        let cert = rep.certificate.expect("quadratic-irrational certificate");
        assert_eq!(cert.kind, CertKind::QuadraticIrrational);
        assert!(cert.exponent <= 1.0);
        // bound must hold on the scanned range
        for s in &rep.shells {
            assert!(
                s.min >= cert.floor_constant * s.min_weight.powf(-cert.exponent) - 1e-12,
                "floor violated at shell {}: {} < C w^-1",
                s.shell,
                s.min
            );
        }
        assert!(rep.violations.is_none());
    }

    #[test]
    fn dc_liouville_scan_shells() {
        // At cap 1e4 the q=9 convergent shell (and the trivial first shell)
        // dip below weight^-2; no certificate exists.
        let sys = parse_system("group T^2\nP1 = dx1 + liouville(10)*dx2\n").unwrap();
        let rep = dc_scan(&sys, 1e4).unwrap();
        assert!(rep.certificate.is_none());
        let below: Vec<&ShellStat> = rep
            .shells
            .iter()
            .filter(|s| s.min < s.min_weight.powf(-2.0))
            .collect();
        assert!(
            below.len() >= 2,
            "expected at least two shells below weight^-2, found {}",
            below.len()
        );
        // the q=9 convergent: |-1 + 9 alpha| = 0.0099909...
        let q9 = rep.shells.iter().find(|s| s.min_freq.torus == vec![-1, 9]);
        let q9 = q9.expect("q=9 convergent is a shell minimizer");
        assert!((q9.min - 0.00999099).abs() < 1e-7, "q9 min {}", q9.min);
    }

    #[test]
    fn dc_shells_stable_under_cap_extension() {
        let sys = parse_system("group T^2\nP1 = dx1 + liouville(10)*dx2\n").unwrap();
        let small = dc_scan(&sys, 64.0).unwrap();
        let large = dc_scan(&sys, 128.0).unwrap();
        for s in &small.shells {
            if s.shell < 6 {
                let l = large.shells.iter().find(|l| l.shell == s.shell).unwrap();
                assert_eq!(l.min, s.min);
                assert_eq!(l.min_freq, s.min_freq);
            }
        }
    }

    // ----- witness search -----

    #[test]
    fn witness_continued_fraction_liouville() {
        let sys = parse_system("group T^2\nP1 = dx1 + liouville(10)*dx2\n").unwrap();
        let seq = dc_witness_search(&sys, 1e7, WitnessStrategy::ContinuedFraction)
            .unwrap()
            .expect("liouville witnesses");
        assert_eq!(seq.entries.len(), 3);
        let last = seq.entries.last().unwrap();
        assert_eq!(last.freq.torus, vec![-110001, 1000000]);
        assert!(last.exponent >= 2.95, "exponent {}", last.exponent);
        assert!(last.exponent < 3.0001);
        let es: Vec<f64> = seq.entries.iter().map(|w| w.exponent).collect();
        assert!(es.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn witness_none_for_sqrt2() {
        let sys = parse_system("group T^2\nP1 = dx1 + sqrt(2)*dx2\n").unwrap();
        let got = dc_witness_search(&sys, 1e5, WitnessStrategy::ContinuedFraction).unwrap();
        assert!(got.is_none(), "sqrt(2) is badly approximable, no witness chain");
    }

    #[test]
    fn witness_none_for_sphere_power() {
        let sys = parse_system(
            "group S3^1\nP1 = d0_1^2 + i*dplus_1*dminus_1\nP2 = 2*d0_1^2 + 3i*dplus_1*dminus_1\n",
        )
        .unwrap();
        let got = dc_witness_search(&sys, 30.0, WitnessStrategy::ShellScan).unwrap();
        assert!(got.is_none());
    }

    #[test]
    fn witness_strategy_shape_mismatch() {
        let sys = parse_system("group T^1\nP1 = dx1\n").unwrap();
        assert!(matches!(
            dc_witness_search(&sys, 100.0, WitnessStrategy::ContinuedFraction),
            Err(LieharmError::StrategyMismatch(_))
        ));
    }

    // ----- classify -----

    #[test]
    fn classify_sphere_power_holds() {
        let sys = parse_system(
            "group S3^1\nP1 = d0_1^2 + i*dplus_1*dminus_1\nP2 = 2*d0_1^2 + 3i*dplus_1*dminus_1\n",
        )
        .unwrap();
        let v = classify(&sys, 30.0, &opts()).unwrap();
        assert_eq!(v.gh, Status::Holds);
        assert_eq!(v.gs, Status::Holds);
    }

    #[test]
    fn classify_sqrt2_fails_gh_holds_gs() {
        let sys = parse_system("group T^1xS3^1\nP1 = sqrt(2)*dx1 + i*d0_1\n").unwrap();
        let v = classify(&sys, 20.0, &opts()).unwrap();
        assert_eq!(v.gh, Status::Fails);
        assert_eq!(v.gs, Status::Holds);
    }

    #[test]
    fn classify_imaginary_shift_holds() {
        let sys = parse_system(
            "group T^2xS3^1\nP1 = dx1 + i*i*d0_1 + 1/3\nP2 = dx2 + i*i*d0_1 + 1/3\n",
        )
        .unwrap();
        let v = classify(&sys, 12.0, &opts()).unwrap();
        assert_eq!(v.gh, Status::Holds);
        assert_eq!(v.gs, Status::Holds);
    }

    #[test]
    fn classify_liouville_fails_both() {
        let sys = parse_system("group T^2\nP1 = dx1 + liouville(10)*dx2\n").unwrap();
        let v = classify(&sys, 100.0, &opts()).unwrap();
        assert_eq!(v.gs, Status::Fails);
        assert_eq!(v.gh, Status::Fails);
    }

    #[test]
    fn classify_triangular_needs_assertion() {
        let sys = parse_system("group S3^1\nP1 = 1 + dplus_1\n").unwrap();
        let v = classify(&sys, 6.0, &opts()).unwrap();
        assert!(matches!(v.structure, StructureClass::LowerTriangular { .. }));
        assert_eq!(v.gh, Status::ConsistentUpToCap);
        assert_eq!(v.gs, Status::ConsistentUpToCap);
    }

    #[test]
    fn classify_general_unknown() {
        let sys = parse_system("group S3^1\nP1 = dplus_1 + dminus_1\n").unwrap();
        let v = classify(&sys, 5.0, &opts()).unwrap();
        assert_eq!(v.gh, Status::Unknown);
        assert_eq!(v.gs, Status::Unknown);
    }

    #[test]
    fn classify_never_holds_gh_without_gs() {
        for text in [
            "group T^1\nP1 = dx1\n",
            "group T^2\nP1 = dx1 + 2*dx2\n",
            "group T^1xS3^1\nP1 = sqrt(2)*dx1 + i*d0_1\n",
            "group T^2\nP1 = dx1 + liouville(10)*dx2\n",
        ] {
            let sys = parse_system(text).unwrap();
            let v = classify(&sys, 30.0, &opts()).unwrap();
            assert!(!(v.gh == Status::Holds && v.gs != Status::Holds), "{text}");
        }
    }

    #[test]
    fn classify_agrees_with_torus_brute_force() {
        // On pure tori, hits and minima from the scan must agree with a naive
        // loop over |xi|_inf <= 12 evaluating the defining quantities.
        let sys = parse_system("group T^2\nP1 = dx1 + 2*dx2 + 1\n").unwrap();
        let v = classify(&sys, 12.0, &opts()).unwrap();
        let mut brute_zero = Vec::new();
        let mut brute_min = f64::INFINITY;
        for n1 in -12i64..=12 {
            for n2 in -12i64..=12 {
                let w = (1.0 + (n1 * n1 + n2 * n2) as f64).sqrt();
                if w > 12.0 {
                    continue;
                }
                let sigma = Complex64::new(1.0, (n1 + 2 * n2) as f64);
                if sigma.norm() == 0.0 {
                    brute_zero.push((n1, n2));
                } else {
                    brute_min = brute_min.min(sigma.norm());
                }
            }
        }
        assert_eq!(v.zset.hits.len(), brute_zero.len());
        assert!((v.dc.global_min - brute_min).abs() < 1e-12);
        // sigma = 1 + i(n1 + 2 n2) has |sigma| >= 1 always: lattice floor
        assert_eq!(v.gh, Status::Holds);
        assert_eq!(v.gs, Status::Holds);
    }

    #[test]
    fn extend_hits_along_sphere_ladder() {
        let sys = parse_system("group T^1xS3^1\nP1 = sqrt(2)*dx1 + i*d0_1\n").unwrap();
        let rep = zset_scan(&sys, 5.0).unwrap();
        let hits = extend_hits(&rep, 10).unwrap();
        assert_eq!(hits.len(), 10);
        for (i, h) in hits.iter().enumerate() {
            assert_eq!(h.freq.sphere2, vec![2 * i as i64]);
            assert_eq!(h.slot.sphere2n, vec![0]);
        }
    }
}
