use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{generate_candidates, BlerTable, Candidate, LinkProfile, PerClass, Weights};
use crate::error::{Error, Result};
use crate::token::TokenClass;

/// Additive guard in the normalization denominators.
pub const NORMALIZATION_EPSILON: f64 = 1e-12;

/// Token counts per class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCounts {
    pub intended: u64,
    pub non_intended: u64,
}

impl ClassCounts {
    pub fn new(intended: u64, non_intended: u64) -> Self {
        Self {
            intended,
            non_intended,
        }
    }

    pub fn get(&self, class: TokenClass) -> u64 {
        match class {
            TokenClass::Intended => self.intended,
            TokenClass::NonIntended => self.non_intended,
        }
    }

    pub fn total(&self) -> u64 {
        self.intended + self.non_intended
    }
}

/// A constraint of the selection problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Constraint {
    ResourceBudget,
    IntendedBler,
    NonIntendedBler,
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Constraint::ResourceBudget => "resource budget",
            Constraint::IntendedBler => "intended-class BLER cap",
            Constraint::NonIntendedBler => "non-intended-class BLER cap",
        })
    }
}

/// No candidate pair satisfies every constraint.
#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
#[error("infeasible: no configuration satisfies the {}", join(.binding))]
pub struct Infeasible {
    /// The constraints that eliminate every remaining pair.
    pub binding: Vec<Constraint>,
}

fn join(items: &[Constraint]) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join(" and ")
}

/// Normalization extrema built from class-wise candidate extrema.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormBounds {
    pub distortion_min: f64,
    pub distortion_max: f64,
    pub delay_min: f64,
    pub delay_max: f64,
}

impl NormBounds {
    pub fn from_candidates(intended: &[Candidate], non_intended: &[Candidate], counts: ClassCounts) -> Self {
        let extrema = |cands: &[Candidate], f: fn(&Candidate) -> f64| {
            cands.iter().map(f).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(v), hi.max(v))
            })
        };
        let (ns, nn) = (counts.intended as f64, counts.non_intended as f64);
        let (ds_lo, ds_hi) = extrema(intended, |c| c.distortion);
        let (dn_lo, dn_hi) = extrema(non_intended, |c| c.distortion);
        let (ts_lo, ts_hi) = extrema(intended, |c| c.delay_per_token);
        let (tn_lo, tn_hi) = extrema(non_intended, |c| c.delay_per_token);
        Self {
            distortion_min: ns * ds_lo + nn * dn_lo,
            distortion_max: ns * ds_hi + nn * dn_hi,
            delay_min: ns * ts_lo + nn * tn_lo,
            delay_max: ns * ts_hi + nn * tn_hi,
        }
    }
}

/// The selection problem after candidate generation.
#[derive(Debug, Clone)]
pub struct SelectionProblem {
    pub intended: Vec<Candidate>,
    pub non_intended: Vec<Candidate>,
    pub counts: ClassCounts,
    /// `R_max` in Hz·s.
    pub budget: f64,
    pub bler_caps: PerClass<f64>,
    pub weights: Weights,
}

/// The chosen configuration per class with its predicted totals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptationPlan {
    pub intended: Candidate,
    pub non_intended: Candidate,
    pub counts: ClassCounts,
    pub total_distortion: f64,
    pub total_delay_s: f64,
    pub resource_used: f64,
    pub budget: f64,
    pub normalized_distortion: f64,
    pub normalized_delay: f64,
    pub objective: f64,
    pub bounds: NormBounds,
}

impl AdaptationPlan {
    pub fn candidate(&self, class: TokenClass) -> &Candidate {
        match class {
            TokenClass::Intended => &self.intended,
            TokenClass::NonIntended => &self.non_intended,
        }
    }

    pub fn utilization(&self) -> f64 {
        self.resource_used / self.budget
    }
}

fn evaluate(p: &SelectionProblem, bounds: &NormBounds, s: &Candidate, n: &Candidate) -> AdaptationPlan {
    let (ns, nn) = (p.counts.intended as f64, p.counts.non_intended as f64);
    let total_distortion = ns * s.distortion + nn * n.distortion;
    let total_delay_s = ns * s.delay_per_token + nn * n.delay_per_token;
    let resource_used = ns * s.resource_per_token + nn * n.resource_per_token;
    let normalized_distortion = (total_distortion - bounds.distortion_min)
        / (bounds.distortion_max - bounds.distortion_min + NORMALIZATION_EPSILON);
    let normalized_delay =
        (total_delay_s - bounds.delay_min) / (bounds.delay_max - bounds.delay_min + NORMALIZATION_EPSILON);
    AdaptationPlan {
        intended: s.clone(),
        non_intended: n.clone(),
        counts: p.counts,
        total_distortion,
        total_delay_s,
        resource_used,
        budget: p.budget,
        normalized_distortion,
        normalized_delay,
        objective: p.weights.distortion * normalized_distortion + p.weights.delay * normalized_delay,
        bounds: *bounds,
    }
}

/// Total order on plans: objective, then distortion, then delay, then the
/// candidate names.
fn rank(a: &AdaptationPlan, b: &AdaptationPlan) -> Ordering {
    a.objective
        .total_cmp(&b.objective)
        .then(a.total_distortion.total_cmp(&b.total_distortion))
        .then(a.total_delay_s.total_cmp(&b.total_delay_s))
        .then_with(|| a.intended.name().cmp(&b.intended.name()))
        .then_with(|| a.non_intended.name().cmp(&b.non_intended.name()))
}

/// Exact minimizer of the weighted normalized objective over all candidate
/// pairs that satisfy the budget and both BLER caps.
pub fn solve(problem: &SelectionProblem) -> Result<AdaptationPlan, Infeasible> {
    let bounds = NormBounds::from_candidates(&problem.intended, &problem.non_intended, problem.counts);
    let s_ok: Vec<&Candidate> = problem
        .intended
        .iter()
        .filter(|c| c.bler <= problem.bler_caps.intended)
        .collect();
    let n_ok: Vec<&Candidate> = problem
        .non_intended
        .iter()
        .filter(|c| c.bler <= problem.bler_caps.non_intended)
        .collect();

    let mut binding = Vec::new();
    if s_ok.is_empty() {
        binding.push(Constraint::IntendedBler);
    }
    if n_ok.is_empty() {
        binding.push(Constraint::NonIntendedBler);
    }
    if !binding.is_empty() {
        return Err(Infeasible { binding });
    }

    let mut best: Option<AdaptationPlan> = None;
    for s in &s_ok {
        for n in &n_ok {
            let plan = evaluate(problem, &bounds, s, n);
            if plan.resource_used > problem.budget {
                continue;
            }
            if best.as_ref().is_none_or(|b| rank(&plan, b).is_lt()) {
                best = Some(plan);
            }
        }
    }
    best.ok_or(Infeasible {
        binding: vec![Constraint::ResourceBudget],
    })
}

/// Generates both candidate sets from `profile` and solves the selection.
pub fn optimize(profile: &LinkProfile, table: &BlerTable, counts: ClassCounts) -> Result<AdaptationPlan> {
    profile.validate()?;
    if counts.total() == 0 {
        return Err(Error::InvalidParameter("at least one token is required".into()));
    }
    let problem = SelectionProblem {
        intended: generate_candidates(profile, table, TokenClass::Intended)?,
        non_intended: generate_candidates(profile, table, TokenClass::NonIntended)?,
        counts,
        budget: profile.resource_budget(),
        bler_caps: profile.bler_caps(),
        weights: profile.weights,
    };
    Ok(solve(&problem)?)
}
