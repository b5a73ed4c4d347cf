use crate::linalg::{
    abs_op, block2, eigenvalue_dominance, geometric_mean, geometric_mean_with_inverse,
    geometric_mean_with_inverse_roots, herm, inv_pd, loewner_compare, operator_norm, pinv, pinv_hermitian,
    scaled_tolerance, sqrt_psd, CMatrix, HermitianMatrix, C64, DEFAULT_PINV_CUTOFF, DEFAULT_REL_TOL,
};
use crate::maps::UnitalPositiveMap;
use crate::window::SpectralWindow;

use super::certificate::{Certificate, Value, Verdict};
use super::instance::InstanceBundle;
use super::statement::{statement, StatementId};
use super::{EvalError, RejectReason};

/// Relative tolerance used when a counterexample is re-checked.
pub const REVERIFY_REL_TOL: f64 = 1e-12;

/// Relative eigenvalue cutoff defining the support of `Φ(X*AX)`.
pub const SUPPORT_CUTOFF: f64 = DEFAULT_PINV_CUTOFF;

/// Instances whose `Φ(X*AX)` has a retained condition number above this are
/// rejected: the inverse on the support would amplify roundoff in the
/// numerator beyond the order tolerance.
pub const SUPPORT_MAX_CONDITION: f64 = 1e8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalOptions {
    /// `τ = rel_tol · max(1, operand norms)`.
    pub rel_tol: f64,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            rel_tol: DEFAULT_REL_TOL,
        }
    }
}

enum Outcome {
    Order {
        lhs: HermitianMatrix,
        rhs: HermitianMatrix,
        pinv: bool,
    },
    Norm {
        value: f64,
        bound: f64,
        pinv: bool,
    },
    Dominance {
        lhs: HermitianMatrix,
        rhs: HermitianMatrix,
    },
    Equivalence {
        margins: [f64; 3],
        norm: f64,
        level: f64,
    },
}

pub fn evaluate(id: StatementId, inst: &InstanceBundle) -> Result<Certificate, EvalError> {
    evaluate_with(id, inst, &EvalOptions::default())
}

/// Scores `inst` against statement `id`.
///
/// Margins follow the order/norm conventions of [`crate::linalg`]: order
/// claims `L ⪯ R` report `λ_min(R − L)`, norm claims report `bound − value`.
pub fn evaluate_with(id: StatementId, inst: &InstanceBundle, opts: &EvalOptions) -> Result<Certificate, EvalError> {
    let st = statement(id);
    inst.check(st)?;
    let outcome = compute(id, inst)?;
    Ok(certify(id, inst, outcome, opts))
}

fn certify(id: StatementId, inst: &InstanceBundle, outcome: Outcome, opts: &EvalOptions) -> Certificate {
    let rel = opts.rel_tol;
    let (lhs, rhs, margin, ratio, tolerance, pinv_used) = match outcome {
        Outcome::Order { lhs, rhs, pinv } => {
            let tolerance = scaled_tolerance(rel, &[lhs.norm(), rhs.norm()]);
            let margin = herm(&(rhs.as_matrix() - lhs.as_matrix())).min_eigenvalue();
            let ratio = safe_ratio(lhs.max_eigenvalue(), rhs.max_eigenvalue());
            (Value::from(lhs), Value::from(rhs), margin, ratio, tolerance, pinv)
        }
        Outcome::Norm { value, bound, pinv } => {
            let tolerance = scaled_tolerance(rel, &[value.abs(), bound.abs()]);
            let ratio = if bound > 0.0 {
                value / bound
            } else if value.abs() <= tolerance {
                0.0
            } else {
                value / tolerance
            };
            (Value::Scalar(value), Value::Scalar(bound), bound - value, ratio, tolerance, pinv)
        }
        Outcome::Dominance { lhs, rhs } => {
            let v = eigenvalue_dominance(&lhs, &rhs, None).expect("dimensions checked");
            let tolerance = scaled_tolerance(rel, &[lhs.norm(), rhs.norm()]);
            let ratio = safe_ratio(lhs.max_eigenvalue(), rhs.max_eigenvalue());
            (Value::from(lhs), Value::from(rhs), v.margin, ratio, tolerance, false)
        }
        Outcome::Equivalence { margins, norm, level } => {
            let tolerance = scaled_tolerance(rel, &[norm, level]);
            let hi = margins.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lo = margins.iter().copied().fold(f64::INFINITY, f64::min);
            let ratio = safe_ratio(norm, level);
            (
                Value::Scalars(margins.to_vec()),
                Value::Scalar(level),
                -(hi - lo),
                ratio,
                tolerance,
                false,
            )
        }
    };
    Certificate {
        statement: id,
        seed: inst.seed,
        dim: inst.dim(),
        map_kind: inst.map.as_ref().map(UnitalPositiveMap::tag),
        map_class: inst.map.as_ref().map(UnitalPositiveMap::class),
        lhs,
        rhs,
        margin,
        ratio,
        verdict: Verdict::from_margin(margin, tolerance),
        tolerance,
        pinv_used,
    }
}

fn safe_ratio(num: f64, den: f64) -> f64 {
    if den.abs() > f64::MIN_POSITIVE && (num / den).is_finite() {
        num / den
    } else {
        0.0
    }
}

fn req<T>(slot: &Option<T>) -> &T {
    slot.as_ref().expect("slot presence checked")
}

/// `Φ(A)` and `Φ(A⁻¹)`.
struct MapPair {
    fa: HermitianMatrix,
    fainv: HermitianMatrix,
    w: SpectralWindow,
}

fn map_pair(inst: &InstanceBundle) -> Result<MapPair, EvalError> {
    let a = req(&inst.a);
    let map = req(&inst.map);
    let ainv = inv_pd(a)?;
    Ok(MapPair {
        fa: map.apply_hermitian(a)?,
        fainv: map.apply_hermitian(&ainv)?,
        w: *req(&inst.window),
    })
}

fn identity_like(h: &HermitianMatrix, s: f64) -> HermitianMatrix {
    HermitianMatrix::scaled_identity(h.dim(), s)
}

fn anticommutator(x: &HermitianMatrix, y: &HermitianMatrix) -> HermitianMatrix {
    let (xm, ym) = (x.as_matrix(), y.as_matrix());
    herm(&(xm * ym + ym * xm))
}

fn hypothesis_le(l: &HermitianMatrix, r: &HermitianMatrix) -> Result<(), EvalError> {
    if loewner_compare(l, r, None)?.holds {
        Ok(())
    } else {
        Err(EvalError::Rejected(RejectReason::HypothesisFailed))
    }
}

fn require_psd(h: &HermitianMatrix, name: &str) -> Result<(), EvalError> {
    let tol = scaled_tolerance(DEFAULT_REL_TOL, &[h.norm()]);
    if h.min_eigenvalue() < -tol {
        Err(EvalError::InvalidInstance(format!("{name} must be positive semidefinite")))
    } else {
        Ok(())
    }
}

/// `A♯B⁻¹ ⪯ I`, the hypothesis of the converse and squaring statements.
fn ando_hypothesis(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<(), EvalError> {
    let g = geometric_mean_with_inverse(a, b)?;
    hypothesis_le(&g, &identity_like(a, 1.0))
}

fn compute(id: StatementId, inst: &InstanceBundle) -> Result<Outcome, EvalError> {
    use StatementId::*;
    let order = |lhs, rhs| Outcome::Order { lhs, rhs, pinv: false };
    Ok(match id {
        S01 => {
            let a = req(&inst.a);
            let x = req(&inst.x);
            let w = req(&inst.window);
            let ainv = inv_pd(a)?;
            let qa = x.dotc(&(a.as_matrix() * x)).re;
            let qinv = x.dotc(&(ainv.as_matrix() * x)).re;
            Outcome::Norm {
                value: qa * qinv,
                bound: w.kantorovich_constant(),
                pinv: false,
            }
        }
        S02 => {
            let p = map_pair(inst)?;
            let k = p.w.kantorovich_constant();
            order(p.fainv, inv_pd(&p.fa)?.scale(k))
        }
        S03 => {
            let p = map_pair(inst)?;
            order(inv_pd(&p.fa)?, p.fainv)
        }
        S04 => {
            let (a, b) = (req(&inst.a), req(&inst.b));
            order(geometric_mean(a, b)?, a.add(b).scale(0.5))
        }
        S05 => {
            let (a, b) = (req(&inst.a), req(&inst.b));
            hypothesis_le(a, b)?;
            order(geometric_mean_with_inverse(a, b)?, identity_like(a, 1.0))
        }
        S06 => {
            let p = map_pair(inst)?;
            let bound = p.w.geometric_kantorovich_bound();
            let g = geometric_mean(&p.fainv, &p.fa)?;
            let rhs = identity_like(&g, bound);
            order(g, rhs)
        }
        S07 => {
            let p = map_pair(inst)?;
            let (m, big_m) = (p.w.m(), p.w.big_m());
            let lhs = p.fainv.scale(m * big_m).add(&p.fa);
            let rhs = identity_like(&lhs, m + big_m);
            order(lhs, rhs)
        }
        S08 => {
            let (a, b) = (req(&inst.a), req(&inst.b));
            let k = req(&inst.window).kantorovich_constant();
            require_psd(a, "A")?;
            hypothesis_le(a, b)?;
            order(a.square(), b.square().scale(k))
        }
        S09 | S13 => {
            let p = map_pair(inst)?;
            let k = p.w.kantorovich_constant();
            let power = if id == S09 { 3 } else { 2 };
            let fa_inv = inv_pd(&p.fa)?;
            order(p.fainv.square(), fa_inv.square().scale(k.powi(power)))
        }
        S10 => {
            let (a, b) = (req(&inst.a), req(&inst.b));
            require_psd(a, "A")?;
            require_psd(b, "B")?;
            let s = a.add(b).norm();
            Outcome::Norm {
                value: operator_norm(&(a.as_matrix() * b.as_matrix())),
                bound: 0.25 * s * s,
                pinv: false,
            }
        }
        S11 => {
            let (a, b) = (req(&inst.a), req(&inst.b));
            require_psd(a, "A")?;
            require_psd(b, "B")?;
            Outcome::Dominance {
                lhs: abs_op(&(a.as_matrix() * b.as_matrix()))?,
                rhs: a.add(b).square().scale(0.25),
            }
        }
        S12 => {
            let p = map_pair(inst)?;
            Outcome::Norm {
                value: operator_norm(&(p.fainv.as_matrix() * p.fa.as_matrix())),
                bound: p.w.kantorovich_constant(),
                pinv: false,
            }
        }
        S14 => {
            let p = map_pair(inst)?;
            Outcome::Norm {
                value: p.fainv.norm() * p.fa.norm(),
                bound: p.w.kantorovich_constant(),
                pinv: false,
            }
        }
        S15 => {
            let x = req(&inst.t);
            let level = inst.level.expect("slot checked");
            let margins = norm_block_margins(x, level)?;
            Outcome::Equivalence {
                margins,
                norm: operator_norm(x),
                level,
            }
        }
        S16 | S17 | S18 => {
            let p = map_pair(inst)?;
            let h = anticommutator(&p.fainv, &p.fa);
            let bound = p.w.anticommutator_bound();
            match id {
                S16 => {
                    let rhs = identity_like(&h, bound);
                    order(abs_op(h.as_matrix())?, rhs)
                }
                S17 => {
                    let rhs = identity_like(&h, bound);
                    order(h, rhs)
                }
                _ => order(HermitianMatrix::zeros(h.dim()), h),
            }
        }
        S19 => {
            let a = req(&inst.a).as_matrix();
            let (x, y) = (req(&inst.x), req(&inst.y));
            let c2 = req(&inst.window).wielandt_constant();
            let cross = x.dotc(&(a * y)).norm_sqr();
            let qx = x.dotc(&(a * x)).re;
            let qy = y.dotc(&(a * y)).re;
            Outcome::Norm {
                value: cross,
                bound: c2 * qx * qy,
                pinv: false,
            }
        }
        S20 => {
            let parts = wielandt_parts(inst)?;
            let c2 = req(&inst.window).wielandt_constant();
            Outcome::Order {
                lhs: parts.lhs,
                rhs: parts.compression.scale(c2),
                pinv: true,
            }
        }
        S21 => {
            let parts = schwarz_parts(inst)?;
            Outcome::Order {
                lhs: parts.lhs,
                rhs: parts.tt,
                pinv: true,
            }
        }
        S22 => {
            let parts = wielandt_parts(inst)?;
            let c = req(&inst.window).wielandt_ratio();
            let support = support_of(&parts.compression)?;
            let h_half = HermitianMatrix::from_diagonal(&support.values.iter().map(|l| l.sqrt()).collect::<Vec<_>>());
            let lhs_r = parts.lhs.congruence(&support.basis);
            let g = geometric_mean_with_inverse_roots(&sqrt_psd(&lhs_r, None)?, &h_half)?;
            let rhs = identity_like(&g, c);
            Outcome::Order {
                lhs: g,
                rhs,
                pinv: true,
            }
        }
        S23 => {
            let parts = schwarz_parts(inst)?;
            let tt_half = invertible_compression(&parts.tt)?.map_spectrum(f64::sqrt);
            let g = geometric_mean_with_inverse_roots(&sqrt_psd(&parts.lhs, None)?, &tt_half)?;
            let rhs = identity_like(&g, 1.0);
            Outcome::Order {
                lhs: g,
                rhs,
                pinv: true,
            }
        }
        S24 => {
            let parts = schwarz_parts(inst)?;
            let tt_inv = invertible_compression(&parts.tt)?.map_spectrum(|l| 1.0 / l);
            Outcome::Norm {
                value: operator_norm(&(parts.lhs.as_matrix() * tt_inv.as_matrix())),
                bound: 1.0,
                pinv: true,
            }
        }
        S25 => {
            let (a, b) = (req(&inst.a), req(&inst.b));
            hypothesis_le(a, b)?;
            order(a.square(), b.square())
        }
        S26 => {
            let (a, b) = (req(&inst.a), req(&inst.b));
            ando_hypothesis(a, b)?;
            order(a.clone(), b.clone())
        }
        S27 | S28 | S29 => {
            let g = assemble_gamma(inst)?;
            gamma_outcome(id, &g)?
        }
        S30 => {
            let (a, b) = (req(&inst.a), req(&inst.b));
            ando_hypothesis(a, b)?;
            let g = geometric_mean_with_inverse_roots(a, b)?;
            let rhs = identity_like(&g, 1.0);
            order(g, rhs)
        }
    })
}

/// Margins of `|X| ⪯ tI`, `‖X‖ ≤ t` and `[[tI, X], [X*, tI]] ⪰ 0`.
fn norm_block_margins(x: &CMatrix, t: f64) -> Result<[f64; 3], EvalError> {
    let n = x.nrows();
    let abs = abs_op(x)?;
    let m1 = herm(&(HermitianMatrix::scaled_identity(n, t).as_matrix() - abs.as_matrix())).min_eigenvalue();
    let m2 = t - operator_norm(x);
    let ti = HermitianMatrix::scaled_identity(n, t);
    let m3 = block2(&ti, x, &ti)?.min_eigenvalue();
    Ok([m1, m2, m3])
}

/// The three predicates of the norm/block equivalence, each decided with
/// tolerance `tol`.
pub fn norm_block_predicates(x: &CMatrix, t: f64, tol: f64) -> Result<[bool; 3], EvalError> {
    let m = norm_block_margins(x, t)?;
    Ok([m[0] >= -tol, m[1] >= -tol, m[2] >= -tol])
}

struct WielandtParts {
    /// `Φ(X*AY) Φ(Y*AY)⁺ Φ(Y*AX)`
    lhs: HermitianMatrix,
    /// `Φ(X*AX)`
    compression: HermitianMatrix,
}

fn wielandt_parts(inst: &InstanceBundle) -> Result<WielandtParts, EvalError> {
    let a = req(&inst.a).as_matrix();
    let map = req(&inst.map);
    let pair = req(&inst.pair);
    let (x, y) = (pair.x(), pair.y());
    let xay = map.apply(&(x.adjoint() * a * y))?;
    let yax = map.apply(&(y.adjoint() * a * x))?;
    let yay = map.apply_hermitian(&herm(&(y.adjoint() * a * y)))?;
    let xax = map.apply_hermitian(&herm(&(x.adjoint() * a * x)))?;
    let (yay_pinv, _) = pinv_hermitian(&yay, DEFAULT_PINV_CUTOFF);
    Ok(WielandtParts {
        lhs: herm(&(xay * yay_pinv.as_matrix() * yax)),
        compression: xax,
    })
}

struct SchwarzParts {
    /// `Φ(T*S) Φ(S*S)⁺ Φ(S*T)`
    lhs: HermitianMatrix,
    /// `Φ(T*T)`
    tt: HermitianMatrix,
}

fn schwarz_parts(inst: &InstanceBundle) -> Result<SchwarzParts, EvalError> {
    let (s, t) = (req(&inst.s), req(&inst.t));
    let map = req(&inst.map);
    let ts = map.apply(&(t.adjoint() * s))?;
    let st = map.apply(&(s.adjoint() * t))?;
    let ss = map.apply_hermitian(&herm(&(s.adjoint() * s)))?;
    let tt = map.apply_hermitian(&herm(&(t.adjoint() * t)))?;
    let (ss_pinv, _) = pinv_hermitian(&ss, DEFAULT_PINV_CUTOFF);
    Ok(SchwarzParts {
        lhs: herm(&(ts * ss_pinv.as_matrix() * st)),
        tt,
    })
}

/// `h` itself, after checking it is invertible with condition number at
/// most [`SUPPORT_MAX_CONDITION`].
fn invertible_compression(h: &HermitianMatrix) -> Result<&HermitianMatrix, EvalError> {
    let e = h.eig();
    let (lo, hi) = (e.values[0], *e.values.last().unwrap());
    if hi <= 0.0 || lo <= SUPPORT_CUTOFF * hi {
        Err(EvalError::Rejected(RejectReason::SingularCompression))
    } else if hi / lo > SUPPORT_MAX_CONDITION {
        Err(EvalError::Rejected(RejectReason::IllConditionedSupport))
    } else {
        Ok(h)
    }
}

struct Support {
    /// Orthonormal basis of the retained eigenspace (`n × r`).
    basis: CMatrix,
    values: Vec<f64>,
}

/// Retained eigenpairs of a PSD compression; rejects empty or
/// ill-conditioned supports.
fn support_of(h: &HermitianMatrix) -> Result<Support, EvalError> {
    let e = h.eig();
    let top = *e.values.last().unwrap();
    if top <= 0.0 {
        return Err(EvalError::Rejected(RejectReason::SingularCompression));
    }
    let keep: Vec<usize> = (0..e.values.len()).filter(|&i| e.values[i] > SUPPORT_CUTOFF * top).collect();
    let smallest = e.values[keep[0]];
    if top / smallest > SUPPORT_MAX_CONDITION {
        return Err(EvalError::Rejected(RejectReason::IllConditionedSupport));
    }
    let n = h.dim();
    let basis = CMatrix::from_fn(n, keep.len(), |i, j| e.vectors[(i, keep[j])]);
    Ok(Support {
        basis,
        values: keep.iter().map(|&i| e.values[i]).collect(),
    })
}

/// `Γ = Φ(X*AY) Φ(Y*AY)⁺ Φ(Y*AX) Φ(X*AX)⁻¹`, shared by the conjecture and
/// its two conditional consequences.
#[derive(Clone, Debug)]
pub struct GammaParts {
    pub gamma: CMatrix,
    pub wielandt_lhs: HermitianMatrix,
    pub compression: HermitianMatrix,
    /// Rank of the support on which `Φ(X*AX)` is inverted.
    pub support_rank: usize,
    /// `c² = ((M−m)/(M+m))²`.
    pub bound: f64,
}

/// Builds `Γ`. `Φ(X*AX)` is inverted on its support; instances with a zero
/// bound, an empty support or a support condition number above
/// [`SUPPORT_MAX_CONDITION`] are rejected.
pub fn assemble_gamma(inst: &InstanceBundle) -> Result<GammaParts, EvalError> {
    inst.check(statement(StatementId::S27))?;
    let w = req(&inst.window);
    let bound = w.wielandt_constant();
    if bound <= 0.0 {
        return Err(EvalError::Rejected(RejectReason::DegenerateBound));
    }
    let parts = wielandt_parts(inst)?;
    let support = support_of(&parts.compression)?;
    let inv_values: Vec<C64> = support.values.iter().map(|l| C64::new(1.0 / l, 0.0)).collect();
    let mut scaled = support.basis.clone();
    for (j, s) in inv_values.iter().enumerate() {
        for i in 0..scaled.nrows() {
            scaled[(i, j)] *= s;
        }
    }
    let support_inverse = scaled * support.basis.adjoint();
    Ok(GammaParts {
        gamma: parts.lhs.as_matrix() * support_inverse,
        wielandt_lhs: parts.lhs,
        compression: parts.compression,
        support_rank: support.values.len(),
        bound,
    })
}

fn gamma_outcome(id: StatementId, g: &GammaParts) -> Result<Outcome, EvalError> {
    let sym = herm(&(&g.gamma + g.gamma.adjoint())).scale(0.5);
    let n = sym.dim();
    Ok(match id {
        StatementId::S27 => Outcome::Norm {
            value: operator_norm(&g.gamma),
            bound: g.bound,
            pinv: true,
        },
        StatementId::S28 => Outcome::Order {
            lhs: abs_op(sym.as_matrix())?,
            rhs: HermitianMatrix::scaled_identity(n, g.bound),
            pinv: true,
        },
        _ => Outcome::Order {
            lhs: sym,
            rhs: HermitianMatrix::scaled_identity(n, g.bound),
            pinv: true,
        },
    })
}

/// Evaluates the conjecture and both conditional bounds on one instance,
/// assembling `Γ` once.
pub fn evaluate_gamma_family(
    inst: &InstanceBundle,
    opts: &EvalOptions,
) -> Result<[Certificate; 3], EvalError> {
    let g = assemble_gamma(inst)?;
    let mut out = Vec::with_capacity(3);
    for id in [StatementId::S27, StatementId::S28, StatementId::S29] {
        out.push(certify(id, inst, gamma_outcome(id, &g)?, opts));
    }
    Ok(out.try_into().expect("three certificates"))
}

/// `‖Γ‖ / c²` by a second route: SVD pseudoinverses for both compressions
/// instead of the Hermitian support inverse.
pub fn gamma_ratio_svd_route(inst: &InstanceBundle) -> Result<f64, EvalError> {
    inst.check(statement(StatementId::S27))?;
    let a = req(&inst.a).as_matrix();
    let map = req(&inst.map);
    let pair = req(&inst.pair);
    let bound = req(&inst.window).wielandt_constant();
    if bound <= 0.0 {
        return Err(EvalError::Rejected(RejectReason::DegenerateBound));
    }
    let (x, y) = (pair.x(), pair.y());
    let xay = map.apply(&(x.adjoint() * a * y))?;
    let yax = map.apply(&(y.adjoint() * a * x))?;
    let yay = map.apply(&(y.adjoint() * a * y))?;
    let xax = map.apply(&(x.adjoint() * a * x))?;
    let gamma = xay * pinv(&yay, DEFAULT_PINV_CUTOFF)? * yax * pinv(&xax, DEFAULT_PINV_CUTOFF)?;
    Ok(operator_norm(&gamma) / bound)
}

/// Re-checks a claimed counterexample at [`REVERIFY_REL_TOL`]; returns the
/// strict certificate when the violation survives and exceeds ten times the
/// default tolerance.
pub fn verify_counterexample(id: StatementId, inst: &InstanceBundle) -> Option<Certificate> {
    let loose = evaluate(id, inst).ok()?;
    let strict = evaluate_with(
        id,
        inst,
        &EvalOptions {
            rel_tol: REVERIFY_REL_TOL,
        },
    )
    .ok()?;
    (strict.violated() && strict.margin < -10.0 * loose.tolerance).then_some(strict)
}
