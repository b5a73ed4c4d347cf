//! The closed registry of checkable statements.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::maps::PositivityClass;

use super::EvalError;

/// Status of a statement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum StatementClass {
    /// Proven; any violation beyond tolerance is a bug or a numerical defect.
    Theorem,
    /// Asserted to fail somewhere; the engine hunts a counterexample.
    False,
    /// Conjectured; the engine collects evidence.
    Open,
    /// Proven assuming the open conjecture.
    Conditional,
    /// Cited result, tested as a property.
    External,
}

impl StatementClass {
    /// Whether violations count against `verify`'s exit status.
    pub fn is_asserted(self) -> bool {
        matches!(self, StatementClass::Theorem | StatementClass::External)
    }
}

impl fmt::Display for StatementClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StatementClass::Theorem => "THEOREM",
            StatementClass::False => "FALSE",
            StatementClass::Open => "OPEN",
            StatementClass::Conditional => "CONDITIONAL",
            StatementClass::External => "EXTERNAL",
        })
    }
}

/// Inputs a statement consumes from an [`InstanceBundle`](super::InstanceBundle).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Slot {
    /// `A` (positive definite unless stated otherwise).
    A,
    /// Spectral window of `A`.
    Window,
    B,
    Map,
    VectorX,
    VectorY,
    Pair,
    S,
    T,
    /// The scalar `t` of the norm/block equivalence.
    Level,
}

/// How a statement's margin is formed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    /// `L ⪯ R`; margin `λ_min(R − L)`.
    Order,
    /// `value ≤ bound`; margin `bound − value`.
    Norm,
    /// Eigenvalue dominance `λ↓(L) ≤ λ↓(R)`.
    Dominance,
    /// Three predicates that must agree.
    Equivalence,
}

macro_rules! statement_ids {
    ($($id:ident),* $(,)?) => {
        /// Identifier of a registry entry, `S01` through `S30`.
        #[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        pub enum StatementId { $($id),* }

        impl StatementId {
            pub const ALL: [StatementId; 30] = [$(StatementId::$id),*];

            pub fn as_str(self) -> &'static str {
                match self { $(StatementId::$id => stringify!($id)),* }
            }
        }
    };
}

statement_ids!(
    S01, S02, S03, S04, S05, S06, S07, S08, S09, S10, S11, S12, S13, S14, S15, S16, S17, S18, S19,
    S20, S21, S22, S23, S24, S25, S26, S27, S28, S29, S30,
);

impl fmt::Display for StatementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StatementId {
    type Err = EvalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let upper = s.trim().to_ascii_uppercase();
        let normalized = match upper.strip_prefix('S').map(str::parse::<u32>) {
            Some(Ok(k)) => format!("S{k:02}"),
            _ => upper,
        };
        StatementId::ALL
            .into_iter()
            .find(|id| id.as_str() == normalized)
            .ok_or_else(|| EvalError::UnknownStatement(s.to_string()))
    }
}

/// One registry row.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Statement {
    pub id: StatementId,
    pub class: StatementClass,
    pub shape: Shape,
    pub slots: &'static [Slot],
    /// Weakest map class the statement is asserted for.
    pub map_requirement: Option<PositivityClass>,
    pub min_dim: usize,
    pub label: &'static str,
    pub formula: &'static str,
}

use PositivityClass::{Positive, TwoPositive};
use Shape::*;
use Slot::*;
use StatementClass::*;

const A_MAP: &[Slot] = &[A, Window, Map];
const A_B: &[Slot] = &[A, B];
const A_W_B: &[Slot] = &[A, Window, B];
const WIELANDT: &[Slot] = &[A, Window, Map, Pair];
const SCHWARZ: &[Slot] = &[S, T, Map];

const fn row(
    id: StatementId,
    class: StatementClass,
    shape: Shape,
    slots: &'static [Slot],
    map_requirement: Option<PositivityClass>,
    min_dim: usize,
    label: &'static str,
    formula: &'static str,
) -> Statement {
    Statement {
        id,
        class,
        shape,
        slots,
        map_requirement,
        min_dim,
        label,
        formula,
    }
}

static REGISTRY: [Statement; 30] = [
    row(StatementId::S01, Theorem, Norm, &[A, Window, VectorX], None, 1,
        "scalar Kantorovich", "<x,Ax><x,A^-1 x> <= K"),
    row(StatementId::S02, Theorem, Order, A_MAP, Some(Positive), 1,
        "operator Kantorovich (Marshall-Olkin)", "Phi(A^-1) <= K Phi(A)^-1"),
    row(StatementId::S03, Theorem, Order, A_MAP, Some(Positive), 1,
        "Choi inequality", "Phi(A^-1) >= Phi(A)^-1"),
    row(StatementId::S04, Theorem, Order, A_B, None, 1,
        "AM-GM for the geometric mean", "(A+B)/2 >= A#B"),
    row(StatementId::S05, Theorem, Order, A_B, None, 1,
        "A <= B implies A#B^-1 <= I", "A#B^-1 <= I"),
    row(StatementId::S06, Theorem, Order, A_MAP, Some(Positive), 1,
        "geometric-mean Kantorovich", "Phi(A^-1)#Phi(A) <= (M+m)/(2 sqrt(Mm))"),
    row(StatementId::S07, Theorem, Order, A_MAP, Some(Positive), 1,
        "linear Kantorovich bound", "Mm Phi(A^-1) + Phi(A) <= M+m"),
    row(StatementId::S08, Theorem, Order, A_W_B, None, 1,
        "order preservation of t^2 up to K", "0 <= A <= B, m <= A <= M => A^2 <= K B^2"),
    row(StatementId::S09, Theorem, Order, A_MAP, Some(Positive), 1,
        "squared Kantorovich with K^3", "Phi(A^-1)^2 <= K^3 Phi(A)^-2"),
    row(StatementId::S10, Theorem, Norm, A_B, None, 1,
        "norm AM-GM", "||AB|| <= ||A+B||^2 / 4"),
    row(StatementId::S11, External, Dominance, A_B, None, 1,
        "eigenvalue dominance of |AB|", "lambda_down(|AB|) <= lambda_down((A+B)^2 / 4)"),
    row(StatementId::S12, Theorem, Norm, A_MAP, Some(Positive), 1,
        "norm Kantorovich", "||Phi(A^-1) Phi(A)|| <= K"),
    row(StatementId::S13, Theorem, Order, A_MAP, Some(Positive), 1,
        "squared Kantorovich with K^2", "Phi(A^-1)^2 <= K^2 Phi(A)^-2"),
    row(StatementId::S14, False, Norm, A_MAP, Some(Positive), 1,
        "norm-product refinement", "||Phi(A^-1)|| ||Phi(A)|| <= K"),
    row(StatementId::S15, Theorem, Equivalence, &[T, Level], None, 1,
        "norm/block equivalence", "|X| <= t  <=>  ||X|| <= t  <=>  [[t, X],[X*, t]] >= 0"),
    row(StatementId::S16, Theorem, Order, A_MAP, Some(Positive), 1,
        "absolute anticommutator bound", "|Phi(A^-1)Phi(A) + Phi(A)Phi(A^-1)| <= (M+m)^2/(2Mm)"),
    row(StatementId::S17, Theorem, Order, A_MAP, Some(Positive), 1,
        "anticommutator bound", "Phi(A^-1)Phi(A) + Phi(A)Phi(A^-1) <= (M+m)^2/(2Mm)"),
    row(StatementId::S18, False, Order, A_MAP, Some(Positive), 1,
        "anticommutator positivity", "Phi(A^-1)Phi(A) + Phi(A)Phi(A^-1) >= 0"),
    row(StatementId::S19, Theorem, Norm, &[A, Window, VectorX, VectorY], None, 2,
        "scalar Wielandt", "|<x,Ay>|^2 <= c^2 <x,Ax><y,Ay>, x _|_ y"),
    row(StatementId::S20, Theorem, Order, WIELANDT, Some(TwoPositive), 2,
        "operator Wielandt for 2-positive maps", "Phi(X*AY) Phi(Y*AY)^+ Phi(Y*AX) <= c^2 Phi(X*AX)"),
    row(StatementId::S21, Theorem, Order, SCHWARZ, Some(TwoPositive), 1,
        "Lieb-Ruskai Schwarz", "Phi(T*S) Phi(S*S)^+ Phi(S*T) <= Phi(T*T)"),
    row(StatementId::S22, Theorem, Order, WIELANDT, Some(TwoPositive), 2,
        "geometric-mean Wielandt", "(Wielandt LHS) # Phi(X*AX)^-1 <= c"),
    row(StatementId::S23, Theorem, Order, SCHWARZ, Some(TwoPositive), 1,
        "geometric-mean Schwarz", "(Schwarz LHS) # Phi(T*T)^-1 <= I"),
    row(StatementId::S24, False, Norm, SCHWARZ, Some(TwoPositive), 1,
        "Schwarz norm-product refinement", "||Phi(T*S) Phi(S*S)^+ Phi(S*T) Phi(T*T)^-1|| <= 1"),
    row(StatementId::S25, False, Order, A_B, None, 1,
        "order preservation of t^2", "0 < A <= B => A^2 <= B^2"),
    row(StatementId::S26, False, Order, A_B, None, 1,
        "converse of A <= B => A#B^-1 <= I", "A#B^-1 <= I => A <= B"),
    row(StatementId::S27, Open, Norm, WIELANDT, Some(TwoPositive), 2,
        "Wielandt norm-product conjecture", "||Gamma|| <= c^2"),
    row(StatementId::S28, Conditional, Order, WIELANDT, Some(TwoPositive), 2,
        "absolute symmetrized Gamma bound", "|Gamma + Gamma*| / 2 <= c^2"),
    row(StatementId::S29, Conditional, Order, WIELANDT, Some(TwoPositive), 2,
        "symmetrized Gamma bound", "(Gamma + Gamma*) / 2 <= c^2"),
    row(StatementId::S30, External, Order, A_B, None, 1,
        "squaring: A#B^-1 <= I => A^2#B^-2 <= I", "A^2#B^-2 <= I"),
];

/// Registry row for `id`.
pub fn statement(id: StatementId) -> &'static Statement {
    &REGISTRY[id as usize]
}

pub fn registry() -> &'static [Statement] {
    &REGISTRY
}

/// Slot list, map requirement and class of a statement given by name.
pub fn statement_requirements(id: &str) -> Result<&'static Statement, EvalError> {
    Ok(statement(id.parse()?))
}

impl Statement {
    pub fn requires(&self, slot: Slot) -> bool {
        self.slots.contains(&slot)
    }

    /// Statements of the form `hypothesis ⇒ conclusion`, evaluated only on
    /// instances that satisfy the hypothesis.
    pub fn is_implication(&self) -> bool {
        matches!(
            self.id,
            StatementId::S05 | StatementId::S08 | StatementId::S25 | StatementId::S26 | StatementId::S30
        )
    }
}
