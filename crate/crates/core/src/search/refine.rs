use rand::Rng;

use crate::catalog::{evaluate, statement, Certificate, InstanceBundle, Shape, Slot, StatementClass, StatementId};
use crate::linalg::{herm, operator_norm, CMatrix, CVector, HermitianMatrix, C64};
use crate::maps::{unitalize_kraus, MapKind, PartialIsometryPair, UnitalPositiveMap};
use crate::random::{ginibre, orthogonalize, random_hermitian_direction, rng_from_seed, Field, InstanceRng};

/// Scalar the hill climb maximizes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Objective {
    /// `value / bound` (or the order-statement proxy).
    Ratio,
    /// `−margin`.
    NegatedMargin,
}

impl Objective {
    /// Norm statements climb the ratio; order-type statements that are
    /// expected to fail climb the violation, the others their ratio proxy.
    pub fn for_statement(id: StatementId) -> Self {
        let st = statement(id);
        match (st.shape, st.class) {
            (Shape::Norm, _) => Objective::Ratio,
            (_, StatementClass::False) => Objective::NegatedMargin,
            _ => Objective::Ratio,
        }
    }

    pub fn score(self, c: &Certificate) -> f64 {
        match self {
            Objective::Ratio => c.ratio,
            Objective::NegatedMargin => -c.margin,
        }
    }
}

fn improves(new: f64, best: f64) -> bool {
    new.is_finite() && new > best + 4.0 * f64::EPSILON * best.abs().max(1.0)
}

/// Result of a hill climb.
#[derive(Clone, Debug)]
pub struct Refined {
    pub instance: InstanceBundle,
    pub certificate: Option<Certificate>,
    pub accepted: usize,
}

/// Hill climb on `start`: perturb one slot at a time, keep a step iff the
/// objective strictly improves. After `steps / 10` non-improving steps the
/// step size is halved and the climb resumes from the best point.
pub fn refine(id: StatementId, start: &InstanceBundle, steps: usize, step_scale: f64, seed: u64) -> InstanceBundle {
    refine_detailed(id, start, steps, step_scale, seed).instance
}

pub fn refine_detailed(
    id: StatementId,
    start: &InstanceBundle,
    steps: usize,
    step_scale: f64,
    seed: u64,
) -> Refined {
    let objective = Objective::for_statement(id);
    let start_cert = evaluate(id, start).ok();
    if step_scale == 0.0 || steps == 0 || start_cert.is_none() {
        return Refined {
            instance: start.clone(),
            certificate: start_cert,
            accepted: 0,
        };
    }
    let field = field_of(start);
    let slots = perturbable_slots(id, start);
    let mut rng = rng_from_seed(seed);
    let mut best = start.clone();
    let mut best_cert = start_cert.expect("checked");
    let mut best_score = objective.score(&best_cert);
    let mut step = step_scale;
    let patience = (steps / 10).max(1);
    let mut stall = 0;
    let mut accepted = 0;
    for _ in 0..steps {
        let slot = slots[rng.random_range(0..slots.len())];
        let delta = step * rng.random_range(0.1..=1.0);
        let Some(candidate) = perturb(&best, slot, delta, field, &mut rng) else {
            continue;
        };
        match evaluate(id, &candidate) {
            Ok(c) if improves(objective.score(&c), best_score) => {
                best_score = objective.score(&c);
                best = candidate;
                best_cert = c;
                accepted += 1;
                stall = 0;
            }
            _ => {
                stall += 1;
                if stall >= patience {
                    step *= 0.5;
                    stall = 0;
                }
            }
        }
    }
    Refined {
        instance: best,
        certificate: Some(best_cert),
        accepted,
    }
}

fn field_of(inst: &InstanceBundle) -> Field {
    let mats = [
        inst.a.as_ref().map(HermitianMatrix::as_matrix),
        inst.s.as_ref(),
        inst.t.as_ref(),
        inst.pair.as_ref().map(PartialIsometryPair::x),
    ];
    let real = mats.iter().flatten().all(|m| m.iter().all(|z| z.im == 0.0));
    let real_vec = [&inst.x, &inst.y].iter().copied().flatten().all(|v| v.iter().all(|z| z.im == 0.0));
    if real && real_vec {
        Field::Real
    } else {
        Field::Complex
    }
}

fn perturbable_slots(id: StatementId, inst: &InstanceBundle) -> Vec<Slot> {
    let st = statement(id);
    let mut slots: Vec<Slot> = st
        .slots
        .iter()
        .copied()
        .filter(|s| !matches!(s, Slot::Window | Slot::VectorY))
        .collect();
    if let Some(map) = &inst.map {
        if !map_is_continuous(map) {
            slots.retain(|s| *s != Slot::Map);
        }
    }
    slots
}

fn map_is_continuous(map: &UnitalPositiveMap) -> bool {
    match map.kind() {
        MapKind::Kraus { .. } | MapKind::Schur { .. } | MapKind::VectorState { .. } => true,
        MapKind::TransposeCompose { inner } => map_is_continuous(inner),
        MapKind::Pinching { .. } | MapKind::PartialTrace { .. } => false,
    }
}

fn perturb(inst: &InstanceBundle, slot: Slot, delta: f64, field: Field, rng: &mut InstanceRng) -> Option<InstanceBundle> {
    let mut out = inst.clone();
    match slot {
        Slot::A => {
            let a = inst.a.as_ref()?;
            let n = a.dim();
            let moved = a.add(&random_hermitian_direction(n, field, rng).scale(delta * a.norm()));
            out.a = Some(match &inst.window {
                Some(w) => {
                    // reproject the spectrum into [m, M]
                    let e = moved.eig();
                    e.rebuild(e.values.iter().map(|&l| w.clamp(l)))
                }
                None => moved.map_spectrum(|l| l.max(0.0)),
            });
        }
        Slot::B => {
            let b = inst.b.as_ref()?;
            let n = b.dim();
            let moved = b.add(&random_hermitian_direction(n, field, rng).scale(delta * b.norm()));
            out.b = Some(moved.map_spectrum(|l| l.max(0.0)));
        }
        Slot::Map => out.map = Some(perturb_map(inst.map.as_ref()?, delta, field, rng)?),
        Slot::VectorX => {
            let x = tangent_step(inst.x.as_ref()?, delta, field, rng);
            if let Some(y) = &inst.y {
                let y = orthogonalize(y, &x);
                let norm = y.norm();
                if norm < 1e-8 {
                    return None;
                }
                out.y = Some(y / C64::new(norm, 0.0));
            }
            out.x = Some(x);
        }
        Slot::Pair => {
            let pair = inst.pair.as_ref()?;
            let n = pair.dim();
            let v = near_identity_unitary(n, delta, field, rng);
            let ux = near_identity_unitary(n, delta, field, rng);
            let uy = near_identity_unitary(n, delta, field, rng);
            out.pair = Some(pair.rotated(&v, &ux, &uy).ok()?);
        }
        Slot::S => out.s = Some(nudge(inst.s.as_ref()?, delta, field, rng)),
        Slot::T => out.t = Some(nudge(inst.t.as_ref()?, delta, field, rng)),
        Slot::Level => {
            let t = inst.level?;
            out.level = Some((t * (1.0 + delta * rng.random_range(-1.0..=1.0))).max(0.0));
        }
        Slot::Window | Slot::VectorY => return None,
    }
    Some(out)
}

fn nudge(m: &CMatrix, delta: f64, field: Field, rng: &mut InstanceRng) -> CMatrix {
    let g = ginibre(m.nrows(), m.ncols(), field, rng);
    let scale = operator_norm(m).max(1e-300) / operator_norm(&g).max(1e-300);
    m + g * C64::new(delta * scale, 0.0)
}

fn tangent_step(x: &CVector, delta: f64, field: Field, rng: &mut InstanceRng) -> CVector {
    let g = CVector::from_fn(x.len(), |_, _| crate::random::normal_entry(field, rng));
    let g = orthogonalize(&g, x);
    let gn = g.norm();
    let moved = if gn > 0.0 {
        x + g * C64::new(delta / gn, 0.0)
    } else {
        x.clone()
    };
    let n = moved.norm();
    moved / C64::new(n, 0.0)
}

/// Unitary factor of `I + δG` (QR with phase correction).
fn near_identity_unitary(n: usize, delta: f64, field: Field, rng: &mut InstanceRng) -> CMatrix {
    let g = CMatrix::identity(n, n) + ginibre(n, n, field, rng) * C64::new(delta, 0.0);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let norm = d.norm();
        if norm > 0.0 {
            let phase = d / norm;
            for i in 0..n {
                q[(i, j)] *= phase;
            }
        }
    }
    q
}

fn perturb_map(map: &UnitalPositiveMap, delta: f64, field: Field, rng: &mut InstanceRng) -> Option<UnitalPositiveMap> {
    match map.kind() {
        MapKind::Kraus { operators } => {
            let raw = operators.iter().map(|v| nudge(v, delta, field, rng)).collect();
            unitalize_kraus(raw).ok()
        }
        MapKind::Schur { correlation } => {
            let n = correlation.nrows();
            let moved = herm(correlation).add(&random_hermitian_direction(n, field, rng).scale(delta));
            let psd = moved.map_spectrum(|l| l.max(0.0)).into_matrix();
            let d: Vec<f64> = (0..n).map(|i| psd[(i, i)].re.sqrt()).collect();
            if d.iter().any(|&v| v < 1e-8) {
                return None;
            }
            let mut c = CMatrix::from_fn(n, n, |i, j| psd[(i, j)] / C64::new(d[i] * d[j], 0.0));
            for i in 0..n {
                c[(i, i)] = C64::new(1.0, 0.0);
            }
            UnitalPositiveMap::schur(herm(&c).into_matrix()).ok()
        }
        MapKind::VectorState { vector } => UnitalPositiveMap::vector_state(tangent_step(vector, delta, field, rng)).ok(),
        MapKind::TransposeCompose { inner } => Some(UnitalPositiveMap::transpose_compose(perturb_map(
            inner, delta, field, rng,
        )?)),
        MapKind::Pinching { .. } | MapKind::PartialTrace { .. } => Some(map.clone()),
    }
}
