//! Canonical instances: equality cases and explicit counterexamples.

use crate::catalog::{evaluate, Certificate, EvalError, InstanceBundle, StatementId};
use crate::error::LinalgError;
use crate::linalg::{block2, inv_pd, rmatrix, sqrt_psd, CMatrix, CVector, HermitianMatrix, C64};
use crate::maps::{MapError, UnitalPositiveMap};
use crate::window::SpectralWindow;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DemoName {
    ExtremalKantorovich,
    SquareOrderFailure,
    SchwarzFailure,
}

impl DemoName {
    pub const ALL: [DemoName; 3] = [
        DemoName::ExtremalKantorovich,
        DemoName::SquareOrderFailure,
        DemoName::SchwarzFailure,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DemoName::ExtremalKantorovich => "extremal-kantorovich",
            DemoName::SquareOrderFailure => "square-order-failure",
            DemoName::SchwarzFailure => "schwarz-failure",
        }
    }
}

impl std::str::FromStr for DemoName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DemoName::ALL
            .into_iter()
            .find(|d| d.as_str() == s)
            .ok_or_else(|| format!("unknown demo `{s}`"))
    }
}

/// One evaluated statement of a demo, with the value it is expected to show.
#[derive(Clone, Debug)]
pub struct DemoCheck {
    pub certificate: Certificate,
    pub expectation: &'static str,
}

#[derive(Clone, Debug)]
pub struct Demo {
    pub name: DemoName,
    pub description: String,
    pub instance: InstanceBundle,
    pub checks: Vec<DemoCheck>,
}

#[derive(Debug, thiserror::Error)]
pub enum DemoError {
    #[error("invalid window: {0}")]
    Window(#[from] LinalgError),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// `(1/√2, 1/√2)`.
pub fn balanced_vector() -> CVector {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    CVector::from_vec(vec![C64::new(h, 0.0), C64::new(h, 0.0)])
}

/// `A = diag(m, M)` with the balanced vector state: every Kantorovich-type
/// bound is attained.
pub fn extremal_instance(m: f64, big_m: f64) -> Result<InstanceBundle, DemoError> {
    let w = SpectralWindow::new(m, big_m)?;
    let map = UnitalPositiveMap::vector_state(balanced_vector())?;
    Ok(InstanceBundle::new(0)
        .with_a(HermitianMatrix::from_diagonal(&[m, big_m]), w)
        .with_vectors(balanced_vector(), None)
        .with_map(map))
}

/// `0 < A ⪯ B` with `A² ⋠ B²`: `A = [[1+ε, 1], [1, 1+ε]]`, `B = A + diag(1, 0)`.
pub fn square_order_pair() -> (HermitianMatrix, HermitianMatrix) {
    let eps = 1e-6;
    let a = HermitianMatrix::from_real_rows(2, &[1.0 + eps, 1.0, 1.0, 1.0 + eps]).expect("symmetric");
    let b = a.add(&HermitianMatrix::from_diagonal(&[1.0, 0.0]));
    (a, b)
}

pub fn square_order_instance() -> InstanceBundle {
    let (a, b) = square_order_pair();
    let mut inst = InstanceBundle::new(0);
    inst.a = Some(a);
    inst.b = Some(b);
    inst
}

/// Schwarz instance from the square-order pair.
///
/// `[[A⁻¹, I], [I, B]]` is positive because `A ⪯ B`. Splitting its square
/// root `F` into column blocks gives `S, T` with `V*S*SV = A⁻¹`,
/// `V*T*SV = I` and `V*T*TV = B` for the compression `Φ(Z) = V*ZV` onto the
/// first two coordinates, so the norm-product bound reduces to `‖AB⁻¹‖ ≤ 1`.
pub fn schwarz_instance() -> Result<InstanceBundle, DemoError> {
    let (a, b) = square_order_pair();
    let g = block2(&inv_pd(&a)?, &CMatrix::identity(2, 2), &b)?;
    let f = sqrt_psd(&g, None)?.into_matrix();
    let mut s = CMatrix::zeros(4, 4);
    let mut t = CMatrix::zeros(4, 4);
    s.view_mut((0, 0), (4, 2)).copy_from(&f.view((0, 0), (4, 2)));
    t.view_mut((0, 0), (4, 2)).copy_from(&f.view((0, 2), (4, 2)));
    let v = rmatrix(4, 2, &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
    let map = UnitalPositiveMap::kraus(vec![v])?;
    Ok(InstanceBundle::new(0).with_map(map).with_schwarz(s, t))
}

fn checks(inst: &InstanceBundle, list: &[(StatementId, &'static str)]) -> Result<Vec<DemoCheck>, DemoError> {
    list.iter()
        .map(|&(id, expectation)| {
            Ok(DemoCheck {
                certificate: evaluate(id, inst)?,
                expectation,
            })
        })
        .collect()
}

/// Builds and evaluates a demo. `m` and `big_m` set the window of the
/// extremal demo; the counterexample demos are fixed.
pub fn run_demo(name: DemoName, m: f64, big_m: f64) -> Result<Demo, DemoError> {
    match name {
        DemoName::ExtremalKantorovich => {
            let inst = extremal_instance(m, big_m)?;
            let k = inst.window.expect("window").kantorovich_constant();
            Ok(Demo {
                name,
                description: format!(
                    "A = diag({m}, {big_m}), x = (1/sqrt2, 1/sqrt2), Phi = vector state of x; K = (M+m)^2/(4Mm) = {k}"
                ),
                checks: checks(
                    &inst,
                    &[
                        (StatementId::S01, "equality: ratio 1, value K"),
                        (StatementId::S12, "equality: ratio 1 (scalar reduction of S01)"),
                        (StatementId::S02, "equality: ratio 1"),
                        (StatementId::S06, "equality: ratio 1"),
                        (StatementId::S07, "equality: ratio 1"),
                        (StatementId::S13, "equality: ratio 1"),
                    ],
                )?,
                instance: inst,
            })
        }
        DemoName::SquareOrderFailure => {
            let inst = square_order_instance();
            Ok(Demo {
                name,
                description: "A = [[1+e, 1], [1, 1+e]], B = A + diag(1, 0), e = 1e-6; A <= B but B^2 - A^2 is indefinite"
                    .into(),
                checks: checks(
                    &inst,
                    &[
                        (StatementId::S25, "violated: margin near (3 - sqrt13)/2"),
                        (StatementId::S05, "holds"),
                    ],
                )?,
                instance: inst,
            })
        }
        DemoName::SchwarzFailure => {
            let inst = schwarz_instance()?;
            Ok(Demo {
                name,
                description: "S, T from the square root of [[A^-1, I], [I, B]] for the square-order pair; Phi = compression onto the first two coordinates"
                    .into(),
                checks: checks(
                    &inst,
                    &[
                        (StatementId::S24, "violated: ratio = ||A B^-1|| > 1"),
                        (StatementId::S21, "holds"),
                        (StatementId::S23, "holds"),
                    ],
                )?,
                instance: inst,
            })
        }
    }
}
