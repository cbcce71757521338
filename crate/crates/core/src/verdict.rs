//! Outcomes of falsification runs and replayable witnesses.

use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::Result;
use crate::monotone;
use crate::psineq;
use crate::scalarfn::ScalarFunction;
use crate::symmat::{DenseMatrix, State, SymMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    HoldsWithinBudget,
    Violated,
    DomainError,
}

/// Where a domain error surfaced during a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainFault {
    pub trial: u64,
    pub point: Option<f64>,
    pub message: String,
}

/// Equal-width histogram of the per-trial margins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub const BINS: usize = 16;

    pub fn from_values(values: &[f64]) -> Option<Self> {
        let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
        if finite.is_empty() {
            return None;
        }
        let lo = finite.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut counts = vec![0u64; Self::BINS];
        let width = (hi - lo) / Self::BINS as f64;
        for v in finite {
            let k = if width > 0.0 {
                (((v - lo) / width) as usize).min(Self::BINS - 1)
            } else {
                0
            };
            counts[k] += 1;
        }
        Some(Self { lo, hi, counts })
    }
}

/// Result of a randomized falsification run.
///
/// `Violated` always carries a witness; replaying the witness reproduces its
/// margin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub property_id: String,
    pub status: Status,
    pub trials_run: u64,
    /// Smallest margin over all evaluated trials; `None` if no trial finished.
    pub min_margin: Option<f64>,
    pub witness: Option<Witness>,
    pub domain_fault: Option<DomainFault>,
    pub histogram: Option<Histogram>,
}

impl Verdict {
    pub fn holds(&self) -> bool {
        self.status == Status::HoldsWithinBudget
    }

    pub fn violated(&self) -> bool {
        self.status == Status::Violated
    }
}

/// The exact inputs behind a violation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WitnessInputs {
    /// Loewner matrix of `function` at `nodes` is not PSD.
    Loewner { function: String, nodes: Vec<f64> },
    /// `A <= B` but `f(A) <= f(B)` fails.
    Order { function: String, a: SymMatrix, b: SymMatrix },
    /// `f(wA + (1-w)B) >= w f(A) + (1-w) f(B)` fails.
    Concave {
        function: String,
        a: SymMatrix,
        b: SymMatrix,
        weight: f64,
    },
    /// `f(C^T A C) >= C^T f(A) C` fails.
    Contraction { function: String, a: SymMatrix, c: DenseMatrix },
    /// Powers-Stormer inequality (full or ordered form) fails for `f`.
    PowersStormer {
        function: String,
        state: State,
        a: SymMatrix,
        b: SymMatrix,
        ordered: bool,
    },
    /// `g(A) <= g(B)` fails for `A <= B`, and the vector state `xi` separates
    /// `A` from `f(A)^{1/2} g(B) f(A)^{1/2}` with `f(t) = t / g(t)`.
    StateSeparation {
        function: String,
        a: SymMatrix,
        b: SymMatrix,
        xi: Vec<f64>,
        order_margin: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub property_id: String,
    /// Negative margin demonstrating the violation.
    pub margin: f64,
    pub trial: Option<u64>,
    pub seed: Option<u64>,
    pub tolerances: Tolerances,
    pub inputs: WitnessInputs,
}

impl Witness {
    /// Recomputes the margin from the stored inputs alone.
    pub fn replay(&self) -> Result<f64> {
        let tol = &self.tolerances;
        match &self.inputs {
            WitnessInputs::Loewner { function, nodes } => {
                let f = ScalarFunction::parse(function)?;
                Ok(monotone::loewner_margin(&f, nodes, tol)?.0)
            }
            WitnessInputs::Order { function, a, b } => {
                let f = ScalarFunction::parse(function)?;
                Ok(monotone::order_margin(&f, a, b, tol)?.0)
            }
            WitnessInputs::Concave { function, a, b, weight } => {
                let f = ScalarFunction::parse(function)?;
                Ok(monotone::concave_margin(&f, a, b, *weight, tol)?.0)
            }
            WitnessInputs::Contraction { function, a, c } => {
                let f = ScalarFunction::parse(function)?;
                Ok(monotone::contraction_margin(&f, a, c, tol)?.0)
            }
            WitnessInputs::PowersStormer {
                function,
                state,
                a,
                b,
                ordered,
            } => {
                let f = ScalarFunction::parse(function)?;
                if *ordered {
                    psineq::ps_margin_ordered(&f, state, a, b, tol)
                } else {
                    psineq::ps_margin(&f, state, a, b, tol)
                }
            }
            WitnessInputs::StateSeparation { function, a, b, xi, .. } => {
                let g = ScalarFunction::parse(function)?;
                let state = State::rank_one(xi)?;
                psineq::ps_margin_ordered(&g.companion(), &state, a, b, tol)
            }
        }
    }
}
