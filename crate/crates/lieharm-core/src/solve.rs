//! Constructive machinery: compatibility checks, the diagonal division
//! solver, triangular back-substitution with growth diagnostics, kernel
//! splitting, and the counterexample constructions.

use crate::analysis::{extend_hits, Witness, WitnessSequence, ZsetReport};
use crate::coeffs::{decay_fit, CoeffField, DecayEstimate};
use crate::duals::{dim, weight, Frequency};
use crate::error::LieharmError;
use crate::opalg::SystemDef;
use crate::symbols::{symbol, SymbolMatrix};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

/// Residual tolerance (relative) for compatibility decisions.
pub const RESIDUAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RelationKind {
    SlotZero,
    CrossRelation,
    ImageMembership,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompatViolation {
    pub freq: Frequency,
    pub relation: RelationKind,
    pub magnitude: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompatReport {
    pub ok: bool,
    pub violations: Vec<CompatViolation>,
}

fn support_of(fields: &[CoeffField]) -> Result<Vec<Frequency>, LieharmError> {
    let first = fields.first().ok_or_else(|| {
        LieharmError::Invalid("compat_check requires at least one field".into())
    })?;
    let support = first.frequencies_canonical();
    for f in fields.iter().skip(1) {
        if f.frequencies_canonical() != support {
            return Err(LieharmError::DimensionMismatch(
                "right-hand sides do not share a frequency support".into(),
            ));
        }
    }
    Ok(support)
}

/// Minimum-norm least-squares solve via SVD pseudo-inverse.
pub fn lstsq_min_norm(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let svd = a.clone().svd(true, true);
    let u = svd.u.as_ref().expect("svd with u");
    let v_t = svd.v_t.as_ref().expect("svd with v_t");
    let maxsv = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cutoff = maxsv * 1e-12;
    let mut ut_b = u.adjoint() * b;
    for (i, &sv) in svd.singular_values.iter().enumerate() {
        let scale = if sv > cutoff { 1.0 / sv } else { 0.0 };
        for c in 0..ut_b.ncols() {
            ut_b[(i, c)] *= Complex64::new(scale, 0.0);
        }
    }
    v_t.adjoint() * ut_b
}

/// Exact-aware zero test for the diagonal entry `sigma_k^op(xi)`. First-order
/// shapes carry an exact affine form (robust where float evaluation cancels
/// catastrophically, e.g. at continued-fraction witness frequencies).
fn diag_zero(
    shape: Option<&crate::analysis::shapes::FirstOrderShape>,
    op: usize,
    sigma: &SymbolMatrix,
    xi: &Frequency,
    slot: &crate::duals::MultiIndex,
    k: usize,
) -> bool {
    if let Some(sh) = shape {
        if let Some(z) = sh.exact_zero(op, &xi.torus, &slot.sphere2n) {
            return z;
        }
    }
    match sigma.exact_entry(k, k) {
        Some(e) => e.is_zero(),
        None => {
            sigma.entries[(k, k)].norm()
                <= crate::symbols::ZERO_TOL * (1.0 + sigma.max_abs())
        }
    }
}

/// Check the compatibility relations of `f` against the system: commuting
/// cross-relations, vanishing on zero slots, and image membership. For
/// diagonal systems the image of the stacked symbol is exactly the span of
/// the non-kernel rows, so the slot-zero family already decides membership;
/// otherwise membership is tested by stacked least squares.
pub fn compat_check(
    sys: &SystemDef,
    f: &[CoeffField],
    tol: f64,
) -> Result<CompatReport, LieharmError> {
    if f.len() != sys.ops.len() {
        return Err(LieharmError::DimensionMismatch(format!(
            "{} right-hand sides for {} operators",
            f.len(),
            sys.ops.len()
        )));
    }
    let support = support_of(f)?;
    let normalized = sys.normalized();
    let shape = crate::analysis::shapes::FirstOrderShape::detect(sys)
        .filter(|s| s.all_exact() && s.transcendental_ok());
    let mut violations = Vec::new();
    for xi in &support {
        let sigmas: Vec<SymbolMatrix> = normalized
            .ops
            .iter()
            .map(|(_, op)| symbol(&sys.group, op, xi))
            .collect::<Result<_, _>>()?;
        let mats: Vec<&DMatrix<Complex64>> =
            f.iter().map(|fj| fj.get(xi).expect("support checked")).collect();
        let f_scale = mats
            .iter()
            .flat_map(|m| m.iter())
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        let s_scale = sigmas.iter().map(|s| s.max_abs()).fold(0.0, f64::max);
        // cross relations sigma_j f_l = sigma_l f_j
        for j in 0..sigmas.len() {
            for l in (j + 1)..sigmas.len() {
                let resid = (&sigmas[j].entries * mats[l] - &sigmas[l].entries * mats[j])
                    .iter()
                    .map(|z| z.norm())
                    .fold(0.0, f64::max);
                if resid > tol * (1.0 + s_scale * f_scale) {
                    violations.push(CompatViolation {
                        freq: xi.clone(),
                        relation: RelationKind::CrossRelation,
                        magnitude: resid,
                    });
                }
            }
        }
        let diagonal = sigmas.iter().all(|s| s.flags.is_diagonal);
        if diagonal {
            let d = sigmas[0].dim();
            let slots = crate::duals::index_set(xi);
            for k in 0..d {
                let mut all_zero = true;
                for (j, s) in sigmas.iter().enumerate() {
                    let zero = diag_zero(shape.as_ref(), j, s, xi, &slots[k], k);
                    if zero {
                        // per-operator relation: sigma_k^j = 0 forces the row
                        // of f_j to vanish
                        let row_max =
                            (0..d).map(|c| mats[j][(k, c)].norm()).fold(0.0, f64::max);
                        if row_max > tol * (1.0 + f_scale) {
                            violations.push(CompatViolation {
                                freq: xi.clone(),
                                relation: RelationKind::SlotZero,
                                magnitude: row_max,
                            });
                        }
                    } else {
                        all_zero = false;
                    }
                }
                // image membership for diagonal symbols: rows over kernel
                // slots must vanish in every component (already recorded as
                // slot-zero violations when they do not)
                let _ = all_zero;
            }
        } else {
            // stacked image membership by least squares
            let d = sigmas[0].dim();
            let r = sigmas.len();
            let mut stacked = DMatrix::zeros(r * d, d);
            let mut rhs = DMatrix::zeros(r * d, d);
            for (j, s) in sigmas.iter().enumerate() {
                stacked.view_mut((j * d, 0), (d, d)).copy_from(&s.entries);
                rhs.view_mut((j * d, 0), (d, d)).copy_from(mats[j]);
            }
            let x = lstsq_min_norm(&stacked, &rhs);
            let resid = (&stacked * &x - &rhs).norm();
            let rhs_norm = rhs.norm();
            if resid > tol * (1.0 + rhs_norm) {
                violations.push(CompatViolation {
                    freq: xi.clone(),
                    relation: RelationKind::ImageMembership,
                    magnitude: resid,
                });
            }
        }
    }
    Ok(CompatReport { ok: violations.is_empty(), violations })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMode {
    Distributional,
    Smooth,
}

#[derive(Debug, Clone)]
pub struct SolveOutput {
    pub u: CoeffField,
    /// Decay report of the solution, present in smooth mode.
    pub decay: Option<DecayEstimate>,
}

fn zero_diag(s: &SymbolMatrix, k: usize) -> bool {
    match s.exact_entry(k, k) {
        Some(e) => e.is_zero(),
        None => s.entries[(k, k)].norm() <= crate::symbols::ZERO_TOL * (1.0 + s.max_abs()),
    }
}

/// Frequency-by-frequency division solver for diagonal systems: each slot is
/// divided by the largest-modulus nonzero diagonal entry (ties to the
/// smallest operator index), kernel slots are zeroed.
pub fn solve_diagonal(
    sys: &SystemDef,
    f: &[CoeffField],
    mode: SolveMode,
) -> Result<SolveOutput, LieharmError> {
    if f.len() != sys.ops.len() {
        return Err(LieharmError::DimensionMismatch(format!(
            "{} right-hand sides for {} operators",
            f.len(),
            sys.ops.len()
        )));
    }
    let support = support_of(f)?;
    let normalized = sys.normalized();
    let mut u = CoeffField::with_meta(sys.group, "solve_diagonal");
    let mut max_w: f64 = 1.0;
    for xi in &support {
        let d = dim(&sys.group, xi)?;
        max_w = max_w.max(weight(&sys.group, xi)?);
        let sigmas: Vec<SymbolMatrix> = normalized
            .ops
            .iter()
            .map(|(_, op)| symbol(&sys.group, op, xi))
            .collect::<Result<_, _>>()?;
        if let Some(bad) = sigmas.iter().find(|s| !s.flags.is_diagonal) {
            return Err(LieharmError::UnsupportedStructure(format!(
                "symbol at {} is not diagonal",
                bad.freq
            )));
        }
        let mats: Vec<&DMatrix<Complex64>> =
            f.iter().map(|fj| fj.get(xi).expect("support checked")).collect();
        let f_scale = mats
            .iter()
            .flat_map(|m| m.iter())
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        let mut sol = DMatrix::zeros(d, d);
        for k in 0..d {
            let mut best: Option<(usize, f64)> = None;
            for (j, s) in sigmas.iter().enumerate() {
                if zero_diag(s, k) {
                    continue;
                }
                let a = s.entries[(k, k)].norm();
                if best.map(|(_, b)| a > b).unwrap_or(true) {
                    best = Some((j, a));
                }
            }
            match best {
                None => {
                    // kernel slot: solution zeroed; rows of every f_j must vanish
                    for (j, m) in mats.iter().enumerate() {
                        let row_max = (0..d).map(|c| m[(k, c)].norm()).fold(0.0, f64::max);
                        if row_max > RESIDUAL_TOL * (1.0 + f_scale) {
                            return Err(LieharmError::Compatibility(format!(
                                "{xi}: kernel slot {k} has nonzero data in f_{}",
                                j + 1
                            )));
                        }
                    }
                }
                Some((j0, _)) => {
                    let div = sigmas[j0].entries[(k, k)];
                    for c in 0..d {
                        sol[(k, c)] = mats[j0][(k, c)] / div;
                    }
                }
            }
        }
        // verify every operator reproduces its right-hand side
        for (j, s) in sigmas.iter().enumerate() {
            let resid = (&s.entries * &sol - mats[j])
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max);
            if resid > 1e-10 * (1.0 + f_scale) {
                return Err(LieharmError::Compatibility(format!(
                    "{xi}: operator {} residual {resid:.3e} after division",
                    j + 1
                )));
            }
        }
        u.insert(xi.clone(), sol)?;
    }
    let decay = match mode {
        SolveMode::Smooth => Some(decay_fit(&u, max_w)?),
        SolveMode::Distributional => None,
    };
    Ok(SolveOutput { u, decay })
}

/// Scanned constants of the triangular estimates: `|sigma_kl| <= c_sigma
/// w^n_sigma` and `1/max_j |sigma_k^j| <= c_sigma w^n_sigma` on non-kernel
/// slots. `c_sigma >= 1`.
#[derive(Debug, Clone, Copy)]
pub struct TriangularDiag {
    pub c_sigma: f64,
    pub n_sigma: f64,
    pub d_bound: usize,
    pub nilpotent_bound: Option<f64>,
}

impl TriangularDiag {
    pub fn new(c_sigma: f64, n_sigma: f64, d_bound: usize) -> Result<Self, LieharmError> {
        if c_sigma < 1.0 {
            return Err(LieharmError::Invalid(format!("c_sigma {c_sigma} must be >= 1")));
        }
        Ok(Self { c_sigma, n_sigma, d_bound, nilpotent_bound: None })
    }
}

#[derive(Debug, Clone)]
pub struct TriangularSolveOutput {
    pub u: CoeffField,
    /// Largest observed `|u_k| / (x F (1+x)^(2(k-1)))` over all rows, where
    /// `x = c_sigma w^n_sigma` and `F` is the max right-hand-side entry; the
    /// proof chain keeps this at or below 1.
    pub max_amplification_ratio: f64,
}

/// Back-substitution for lower-triangular systems: row by row, each pivot is
/// the largest-modulus nonzero diagonal entry across operators. Kernel rows
/// are zeroed after a consistency check. Upper-triangular inputs are handled
/// through the recorded index reversal.
pub fn solve_triangular(
    sys: &SystemDef,
    f: &[CoeffField],
    diag: &TriangularDiag,
) -> Result<TriangularSolveOutput, LieharmError> {
    if diag.c_sigma < 1.0 {
        return Err(LieharmError::Invalid("c_sigma must be >= 1".into()));
    }
    if f.len() != sys.ops.len() {
        return Err(LieharmError::DimensionMismatch(format!(
            "{} right-hand sides for {} operators",
            f.len(),
            sys.ops.len()
        )));
    }
    let support = support_of(f)?;
    let st = crate::symbols::structure(sys, &support)?;
    let reversed = match st {
        crate::symbols::StructureClass::Diagonal => false,
        crate::symbols::StructureClass::LowerTriangular { reindexed } => reindexed,
        crate::symbols::StructureClass::General => {
            return Err(LieharmError::UnsupportedStructure(
                "solve_triangular requires a triangular system".into(),
            ))
        }
    };
    let normalized = sys.normalized();
    let mut u = CoeffField::with_meta(sys.group, "solve_triangular");
    let mut max_ratio = 0.0f64;
    for xi in &support {
        let d = dim(&sys.group, xi)?;
        let w = weight(&sys.group, xi)?;
        let x = diag.c_sigma * w.powf(diag.n_sigma);
        let sigmas: Vec<DMatrix<Complex64>> = normalized
            .ops
            .iter()
            .map(|(_, op)| symbol(&sys.group, op, xi).map(|s| maybe_reverse(&s.entries, reversed)))
            .collect::<Result<_, _>>()?;
        let mats: Vec<DMatrix<Complex64>> = f
            .iter()
            .map(|fj| maybe_reverse(fj.get(xi).expect("support checked"), reversed))
            .collect();
        // scanned (dct1) bounds
        for s in &sigmas {
            let max_entry = s.iter().map(|z| z.norm()).fold(0.0, f64::max);
            if max_entry > x * (1.0 + 1e-9) {
                return Err(LieharmError::Invalid(format!(
                    "{xi}: symbol entry {max_entry:.3e} exceeds c_sigma w^n_sigma = {x:.3e}"
                )));
            }
        }
        if let Some(bound) = diag.nilpotent_bound {
            for s in &sigmas {
                for r in 0..d {
                    for c in 0..r {
                        if s[(r, c)].norm() > bound * (1.0 + 1e-9) {
                            return Err(LieharmError::Invalid(format!(
                                "{xi}: nilpotent entry {:.3e} exceeds asserted bound {bound}",
                                s[(r, c)].norm()
                            )));
                        }
                    }
                }
            }
        }
        let f_scale = mats
            .iter()
            .flat_map(|m| m.iter())
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        let mut sol = DMatrix::zeros(d, d);
        for k in 0..d {
            // pivot choice across operators
            let mut best: Option<(usize, f64)> = None;
            for (j, s) in sigmas.iter().enumerate() {
                let a = s[(k, k)].norm();
                if a > crate::symbols::ZERO_TOL * (1.0 + x) && best.map(|(_, b)| a > b).unwrap_or(true)
                {
                    best = Some((j, a));
                }
            }
            match best {
                Some((j0, mag)) => {
                    if 1.0 / mag > x * (1.0 + 1e-9) {
                        return Err(LieharmError::Invalid(format!(
                            "{xi}: diagonal floor 1/{mag:.3e} exceeds c_sigma w^n_sigma = {x:.3e}"
                        )));
                    }
                    for c in 0..d {
                        let mut acc = mats[j0][(k, c)];
                        for prev in 0..k {
                            acc -= sigmas[j0][(k, prev)] * sol[(prev, c)];
                        }
                        sol[(k, c)] = acc / sigmas[j0][(k, k)];
                    }
                }
                None => {
                    // kernel row: zero the unknown, all operators must agree
                    for (j, s) in sigmas.iter().enumerate() {
                        for c in 0..d {
                            let mut resid = mats[j][(k, c)];
                            for prev in 0..k {
                                resid -= s[(k, prev)] * sol[(prev, c)];
                            }
                            if resid.norm() > RESIDUAL_TOL * (1.0 + f_scale) {
                                return Err(LieharmError::InconsistentRhs(format!(
                                    "{xi}: kernel row {k} residual {:.3e} in f_{}",
                                    resid.norm(),
                                    j + 1
                                )));
                            }
                        }
                    }
                }
            }
            // growth diagnostic against the proof chain
            if f_scale > 0.0 {
                let bound = x * f_scale * (1.0 + x).powi(2 * k as i32);
                let row_max = (0..d).map(|c| sol[(k, c)].norm()).fold(0.0, f64::max);
                if bound.is_finite() && bound > 0.0 {
                    max_ratio = max_ratio.max(row_max / bound);
                }
            }
        }
        u.insert(xi.clone(), maybe_reverse(&sol, reversed))?;
    }
    Ok(TriangularSolveOutput { u, max_amplification_ratio: max_ratio })
}

fn maybe_reverse(m: &DMatrix<Complex64>, reversed: bool) -> DMatrix<Complex64> {
    if !reversed {
        return m.clone();
    }
    let d = m.nrows();
    DMatrix::from_fn(d, m.ncols(), |r, c| m[(d - 1 - r, if m.ncols() == d { d - 1 - c } else { c })])
}

/// A distribution supported on kernel slots: unit entries at `count` distinct
/// kernel frequencies. The system annihilates it exactly.
pub fn counterexample_kernel(
    sys: &SystemDef,
    zreport: &ZsetReport,
    count: usize,
) -> Result<CoeffField, LieharmError> {
    if count == 0 {
        return Err(LieharmError::Invalid("count must be positive".into()));
    }
    let hits = extend_hits(zreport, count)?;
    let normalized = sys.normalized();
    let mut u = CoeffField::with_meta(sys.group, "counterexample_kernel");
    for hit in &hits {
        let d = dim(&sys.group, &hit.freq)?;
        let sigmas: Vec<SymbolMatrix> = normalized
            .ops
            .iter()
            .map(|(_, op)| symbol(&sys.group, op, &hit.freq))
            .collect::<Result<_, _>>()?;
        let mut m = DMatrix::zeros(d, d);
        if sigmas.iter().all(|s| s.flags.is_diagonal) {
            m[(hit.slot_index, hit.slot_index)] = Complex64::new(1.0, 0.0);
        } else {
            // common kernel vector via stacked SVD null space
            let r = sigmas.len();
            let mut stacked = DMatrix::zeros(r * d, d);
            for (j, s) in sigmas.iter().enumerate() {
                stacked.view_mut((j * d, 0), (d, d)).copy_from(&s.entries);
            }
            let svd = stacked.svd(false, true);
            let v_t = svd.v_t.as_ref().expect("svd with v_t");
            let maxsv = svd.singular_values.iter().cloned().fold(0.0, f64::max);
            let mut kernel_vec = None;
            for (i, &sv) in svd.singular_values.iter().enumerate() {
                if sv <= 1e-10 * (1.0 + maxsv) {
                    kernel_vec = Some(v_t.row(i).adjoint());
                    break;
                }
            }
            let v = kernel_vec.ok_or_else(|| {
                LieharmError::Invalid(format!("no kernel vector at {}", hit.freq))
            })?;
            let vmax = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
            for r in 0..d {
                m[(r, hit.slot_index)] = v[r] / Complex64::new(vmax, 0.0);
            }
        }
        u.insert(hit.freq.clone(), m)?;
    }
    Ok(u)
}

#[derive(Debug, Clone, Serialize)]
pub struct ForcedValue {
    pub freq: Frequency,
    pub slot: usize,
    pub value: f64,
}

#[derive(Debug, Clone)]
pub struct UnsolvableCounterexample {
    pub rhs: Vec<CoeffField>,
    /// `u(xi_n)_{k_n k_n} = weight^e_n` forced on any would-be solution.
    pub forced: Vec<ForcedValue>,
}

#[derive(Debug, Clone)]
pub struct SmoothRhsCounterexample {
    pub rhs: Vec<CoeffField>,
    /// Forced solution coefficients, all equal to 1.
    pub forced: Vec<ForcedValue>,
}

/// Diagonal symbol values at a witness, with the certified magnitude
/// substituted for single-operator systems (the float evaluation cancels
/// catastrophically at continued-fraction witnesses).
fn witness_sigmas(
    sys: &SystemDef,
    wit: &Witness,
) -> Result<Vec<Complex64>, LieharmError> {
    let table = crate::symbols::diagonal_entries(sys, &wit.freq)?;
    let mut vals: Vec<Complex64> =
        table.values.iter().map(|row| row[wit.slot]).collect();
    if sys.ops.len() == 1 {
        let dir = if vals[0].norm() > 0.0 { vals[0] / vals[0].norm() } else { Complex64::new(0.0, 1.0) };
        vals[0] = dir * wit.value;
    }
    Ok(vals)
}

/// Right-hand sides `f_j(xi_n) = sigma_{k_n}^j(xi_n) weight^{e_n} E_{k_n k_n}`:
/// bounded coefficients whose only solutions blow up like `weight^{e_n}`.
pub fn counterexample_unsolvable(
    sys: &SystemDef,
    witness: &WitnessSequence,
) -> Result<UnsolvableCounterexample, LieharmError> {
    if witness.entries.is_empty() {
        return Err(LieharmError::Invalid("empty witness sequence".into()));
    }
    let mut rhs: Vec<CoeffField> = sys
        .ops
        .iter()
        .map(|_| CoeffField::with_meta(sys.group, "counterexample_unsolvable"))
        .collect();
    let mut forced = Vec::new();
    for wit in &witness.entries {
        let d = dim(&sys.group, &wit.freq)?;
        let sig = witness_sigmas(sys, wit)?;
        let boost = wit.weight.powf(wit.exponent);
        for (j, field) in rhs.iter_mut().enumerate() {
            let mut m = DMatrix::zeros(d, d);
            m[(wit.slot, wit.slot)] = sig[j] * boost;
            field.insert(wit.freq.clone(), m)?;
        }
        forced.push(ForcedValue { freq: wit.freq.clone(), slot: wit.slot, value: boost });
    }
    Ok(UnsolvableCounterexample { rhs, forced })
}

/// Right-hand sides `f_j(xi_n) = sigma_{k_n}^j(xi_n) E_{k_n k_n}`:
/// smooth-consistent data forcing unit coefficients at every witness.
pub fn counterexample_smooth_rhs(
    sys: &SystemDef,
    witness: &WitnessSequence,
) -> Result<SmoothRhsCounterexample, LieharmError> {
    if witness.entries.is_empty() {
        return Err(LieharmError::Invalid("empty witness sequence".into()));
    }
    let mut rhs: Vec<CoeffField> = sys
        .ops
        .iter()
        .map(|_| CoeffField::with_meta(sys.group, "counterexample_smooth_rhs"))
        .collect();
    let mut forced = Vec::new();
    for wit in &witness.entries {
        let d = dim(&sys.group, &wit.freq)?;
        let sig = witness_sigmas(sys, wit)?;
        for (j, field) in rhs.iter_mut().enumerate() {
            let mut m = DMatrix::zeros(d, d);
            m[(wit.slot, wit.slot)] = sig[j];
            field.insert(wit.freq.clone(), m)?;
        }
        forced.push(ForcedValue { freq: wit.freq.clone(), slot: wit.slot, value: 1.0 });
    }
    Ok(SmoothRhsCounterexample { rhs, forced })
}

/// Orthogonal decomposition `u = v + w` per frequency with the columns of
/// `w` in the common kernel of the symbols and `v` orthogonal to it.
pub fn kernel_split(
    sys: &SystemDef,
    u: &CoeffField,
) -> Result<(CoeffField, CoeffField), LieharmError> {
    let normalized = sys.normalized();
    let mut v = CoeffField::with_meta(sys.group, "kernel_split v");
    let mut w = CoeffField::with_meta(sys.group, "kernel_split w");
    for (xi, m) in u.iter() {
        let d = dim(&sys.group, xi)?;
        let r = normalized.ops.len();
        let mut stacked = DMatrix::zeros(r * d, d);
        for (j, (_, op)) in normalized.ops.iter().enumerate() {
            let s = symbol(&sys.group, op, xi)?;
            stacked.view_mut((j * d, 0), (d, d)).copy_from(&s.entries);
        }
        let svd = stacked.svd(false, true);
        let v_t = svd.v_t.as_ref().expect("svd with v_t");
        let maxsv = svd.singular_values.iter().cloned().fold(0.0, f64::max);
        // projector onto the common kernel
        let mut proj = DMatrix::zeros(d, d);
        for (i, &sv) in svd.singular_values.iter().enumerate() {
            if sv <= 1e-10 * (1.0 + maxsv) {
                let basis = v_t.row(i).adjoint();
                proj += &basis * basis.adjoint();
            }
        }
        let w_part = &proj * m;
        let v_part = m - &w_part;
        v.insert(xi.clone(), v_part)?;
        w.insert(xi.clone(), w_part)?;
    }
    Ok((v, w))
}
