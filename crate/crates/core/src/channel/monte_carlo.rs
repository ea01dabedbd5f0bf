use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{transmit, ClassLink, PduPlan};
use crate::codec::TokenBitstream;
use crate::error::{Error, Result};
use crate::link::PerClass;
use crate::token::TokenClass;

/// Aggregated per-class statistics over all trials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassSummary {
    pub pdus: u64,
    pub tokens: u64,
    pub loss_probability: f64,
    pub mean_pdus_lost: f64,
    /// Mean fraction of PDUs lost per trial.
    pub loss_fraction: f64,
    pub mean_tokens_erased: f64,
    pub std_tokens_erased: f64,
    /// Tokens that differ from the lossless reconstruction.
    pub mean_token_errors: f64,
    pub std_token_errors: f64,
    pub token_error_fraction: f64,
}

/// Summary of repeated independent transmissions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloSummary {
    pub trials: u64,
    pub base_seed: u64,
    pub intended: ClassSummary,
    pub non_intended: ClassSummary,
    pub reference_loss_rate: f64,
    pub mean_delay_s: f64,
    pub std_delay_s: f64,
    pub resource: f64,
}

impl MonteCarloSummary {
    pub fn class(&self, class: TokenClass) -> &ClassSummary {
        match class {
            TokenClass::Intended => &self.intended,
            TokenClass::NonIntended => &self.non_intended,
        }
    }
}

struct Trial {
    pdus_lost: PerClass<u64>,
    erased: PerClass<u64>,
    errors: PerClass<u64>,
    reference_lost: bool,
    delay_s: f64,
}

fn mean_std(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    if n < 2.0 {
        return (mean, 0.0);
    }
    let var = values.map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Runs [`transmit`] with seeds `base_seed .. base_seed + trials` and
/// aggregates the outcomes. Trials run in parallel; the summary depends
/// only on the inputs.
pub fn monte_carlo(
    stream: &TokenBitstream,
    plans: &PerClass<PduPlan>,
    links: &PerClass<ClassLink>,
    trials: u64,
    base_seed: u64,
) -> Result<MonteCarloSummary> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let lossless_links = links.map(|_, l| ClassLink {
        loss_probability: 0.0,
        ..*l
    });
    let clean = transmit(stream, plans, &lossless_links, 0)?;
    let slice = clean.reconstruction.dims().slice_len();
    let mut class_of = vec![TokenClass::Intended; clean.erased.len()];
    for pdu in &plans.non_intended.pdus {
        for &k in &pdu.positions {
            class_of[k as usize] = TokenClass::NonIntended;
        }
    }
    debug_assert!(class_of[..slice].iter().all(|&c| c == TokenClass::Intended));

    let records: Vec<Trial> = (0..trials)
        .into_par_iter()
        .map(|k| {
            let out = transmit(stream, plans, links, base_seed.wrapping_add(k))?;
            let mut errors = PerClass::new(0u64, 0u64);
            for ((a, b), &c) in out
                .reconstruction
                .indices()
                .iter()
                .zip(clean.reconstruction.indices())
                .zip(&class_of)
            {
                if a != b {
                    *errors.get_mut(c) += 1;
                }
            }
            Ok(Trial {
                pdus_lost: out.totals.map(|_, t| t.pdus_lost),
                erased: out.totals.map(|_, t| t.tokens_erased),
                errors,
                reference_lost: out.reference_lost,
                delay_s: out.delay_s(),
            })
        })
        .collect::<Result<_>>()?;

    let summarize = |class: TokenClass| {
        let totals = clean.totals.get(class);
        let pdus = totals.pdus;
        let tokens = totals.tokens;
        let (mean_lost, _) = mean_std(records.iter().map(|r| *r.pdus_lost.get(class) as f64));
        let (mean_erased, std_erased) = mean_std(records.iter().map(|r| *r.erased.get(class) as f64));
        let (mean_errors, std_errors) = mean_std(records.iter().map(|r| *r.errors.get(class) as f64));
        let ratio = |v: f64, d: u64| if d == 0 { 0.0 } else { v / d as f64 };
        ClassSummary {
            pdus,
            tokens,
            loss_probability: links.get(class).loss_probability,
            mean_pdus_lost: mean_lost,
            loss_fraction: ratio(mean_lost, pdus),
            mean_tokens_erased: mean_erased,
            std_tokens_erased: std_erased,
            mean_token_errors: mean_errors,
            std_token_errors: std_errors,
            token_error_fraction: ratio(mean_errors, tokens),
        }
    };
    let (mean_delay, std_delay) = mean_std(records.iter().map(|r| r.delay_s));
    Ok(MonteCarloSummary {
        trials,
        base_seed,
        intended: summarize(TokenClass::Intended),
        non_intended: summarize(TokenClass::NonIntended),
        reference_loss_rate: records.iter().filter(|r| r.reference_lost).count() as f64 / trials as f64,
        mean_delay_s: mean_delay,
        std_delay_s: std_delay,
        resource: clean.resource(),
    })
}
