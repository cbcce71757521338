//! Deterministic parallel trial execution.
//!
//! Trial `i` draws from its own ChaCha stream `(seed, i)`, trials run in fixed
//! blocks, and block results merge in index order. The verdict therefore does
//! not depend on how many worker threads execute the blocks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::TrialBudget;
use crate::error::{Error, Result};
use crate::verdict::{DomainFault, Histogram, Status, Verdict, Witness};

const BLOCK: u64 = 256;

pub(crate) struct TrialOutcome {
    pub margin: f64,
    pub witness: Option<Witness>,
}

impl TrialOutcome {
    pub fn pass(margin: f64) -> Self {
        Self { margin, witness: None }
    }
}

pub(crate) fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Derives an independent master seed for a sub-run.
pub(crate) fn derive_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Runs `trial` for up to `budget.trials` indices, stopping after the first
/// block that contains a violation or domain error. Non-domain errors abort
/// the run.
pub(crate) fn run<F>(property_id: &str, budget: TrialBudget, trial: F) -> Result<Verdict>
where
    F: Fn(u64, &mut ChaCha8Rng) -> Result<TrialOutcome> + Sync,
{
    let mut margins = Vec::new();
    let mut min_margin: Option<f64> = None;
    let mut trials_run = 0;
    let mut start = 0;
    while start < budget.trials {
        let end = (start + BLOCK).min(budget.trials);
        let results: Vec<Result<TrialOutcome>> = (start..end)
            .into_par_iter()
            .map(|i| trial(i, &mut trial_rng(budget.seed, i)))
            .collect();
        trials_run = end;
        for (offset, res) in results.into_iter().enumerate() {
            let index = start + offset as u64;
            match res {
                Ok(outcome) => {
                    margins.push(outcome.margin);
                    if outcome.margin.is_finite() {
                        min_margin = Some(min_margin.map_or(outcome.margin, |m| m.min(outcome.margin)));
                    }
                    if let Some(mut w) = outcome.witness {
                        w.trial = Some(index);
                        w.seed = Some(budget.seed);
                        return Ok(Verdict {
                            property_id: property_id.to_string(),
                            status: Status::Violated,
                            trials_run,
                            min_margin,
                            witness: Some(w),
                            domain_fault: None,
                            histogram: Histogram::from_values(&margins),
                        });
                    }
                }
                Err(Error::Domain { point, message }) => {
                    return Ok(Verdict {
                        property_id: property_id.to_string(),
                        status: Status::DomainError,
                        trials_run,
                        min_margin,
                        witness: None,
                        domain_fault: Some(DomainFault {
                            trial: index,
                            point: Some(point),
                            message,
                        }),
                        histogram: Histogram::from_values(&margins),
                    });
                }
                Err(e) => return Err(e),
            }
        }
        start = end;
    }
    Ok(Verdict {
        property_id: property_id.to_string(),
        status: Status::HoldsWithinBudget,
        trials_run,
        min_margin,
        witness: None,
        domain_fault: None,
        histogram: Histogram::from_values(&margins),
    })
}
