//! End-to-end runs over SNR and bandwidth grids.
//!
//! A sweep point optimizes the link for the mask's transmitted class counts,
//! encodes the grid at the chosen non-intended precision, packs PDUs and
//! runs the erasure channel. Points that admit no configuration are kept in
//! the report with the constraints that ruled them out.

mod fixtures;

pub use fixtures::{generate_fixture, Fixture, FixtureSpec};

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::channel::{monte_carlo, pack_pdus, transmitted_counts, ClassLink, MonteCarloSummary};
use crate::codec::{self, CodecConfig, TokenBitstream};
use crate::error::{Error, Result};
use crate::link::{optimize, AdaptationPlan, BlerTable, ClassCounts, Constraint, LinkProfile};
use crate::token::{intended_ratio, GridGeometry, SemanticTokenMask, TokenGrid};

/// Motion-vector side-information parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SideInfoParams {
    /// Motion block edge `g` in tokens.
    pub block_size: u32,
    /// Bits per motion vector `B_mv`.
    pub mv_bits: u32,
}

impl Default for SideInfoParams {
    fn default() -> Self {
        Self {
            block_size: 4,
            mv_bits: 8,
        }
    }
}

/// The experiment grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSpec {
    pub snr_db: Vec<f64>,
    pub bandwidth_hz: Vec<f64>,
    pub trials: u64,
    pub base_seed: u64,
    /// Every point starts from this profile with its SNR and bandwidth
    /// replaced.
    pub profile: LinkProfile,
    pub side_info: SideInfoParams,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            snr_db: vec![-2.0, 0.0, 2.0, 4.0, 6.0, 8.0],
            bandwidth_hz: vec![340e3],
            trials: 100,
            base_seed: 0,
            profile: LinkProfile::default(),
            side_info: SideInfoParams::default(),
        }
    }
}

impl SweepSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let s: Self = serde_json::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.snr_db.is_empty() || self.bandwidth_hz.is_empty() {
            return Err(Error::InvalidParameter("sweep needs at least one SNR and one bandwidth".into()));
        }
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be at least 1".into()));
        }
        if let Some(v) = self.snr_db.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("SNR point {v} is not finite")));
        }
        if let Some(v) = self.bandwidth_hz.iter().find(|&&v| !(v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidParameter(format!("bandwidth point {v} is not positive")));
        }
        self.profile.validate()
    }
}

/// Rate accounting of the encoded stream at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateSummary {
    pub full_bits: u32,
    pub delta_bits: u32,
    /// `N_s·b_full + N_n·b_delta` over the mask as given.
    pub payload_bits: u64,
    /// Bits actually carried by the PDUs.
    pub token_bits: u64,
    pub bpp: f64,
    pub side_info_overhead: f64,
}

/// Why a point has no plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfeasibleReason {
    pub binding: Vec<Constraint>,
    pub message: String,
}

/// One evaluated `(γ, W_B)` point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointReport {
    pub snr_db: f64,
    pub bandwidth_hz: f64,
    pub feasible: bool,
    pub infeasible: Option<InfeasibleReason>,
    pub plan: Option<AdaptationPlan>,
    pub rate: Option<RateSummary>,
    pub channel: Option<MonteCarloSummary>,
    /// Predicted resource use over `R_max`.
    pub utilization: Option<f64>,
    /// Realized resource use, including short-PDU headers, over `R_max`.
    pub realized_utilization: Option<f64>,
}

/// Everything needed to replay and compare a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub inputs_digest: String,
    pub geometry: GridGeometry,
    pub theta: f64,
    pub rho_s: f64,
    pub counts: ClassCounts,
    pub trials: u64,
    pub base_seed: u64,
    pub side_info: SideInfoParams,
    pub profile: LinkProfile,
    pub points: Vec<PointReport>,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// The point at exactly `(snr_db, bandwidth_hz)`.
    pub fn point(&self, snr_db: f64, bandwidth_hz: f64) -> Option<&PointReport> {
        self.points
            .iter()
            .find(|p| p.snr_db == snr_db && p.bandwidth_hz == bandwidth_hz)
    }
}

/// SHA-256 over the grid file bytes and the mask file bytes, hex encoded.
pub fn inputs_digest(grid: &TokenGrid, mask: &SemanticTokenMask) -> String {
    let mut h = Sha256::new();
    h.update(grid.to_bytes());
    h.update(mask.to_bytes());
    hex::encode(h.finalize())
}

/// Optimizes `profile` for the counts that `mask` puts on the link.
pub fn optimize_for_mask(profile: &LinkProfile, table: &BlerTable, mask: &SemanticTokenMask) -> Result<AdaptationPlan> {
    optimize(profile, table, transmitted_counts(mask))
}

/// Packs `stream` and runs the channel under `plan`.
pub fn simulate(
    plan: &AdaptationPlan,
    profile: &LinkProfile,
    stream: &TokenBitstream,
    mask: &SemanticTokenMask,
    trials: u64,
    base_seed: u64,
) -> Result<MonteCarloSummary> {
    let plans = pack_pdus(stream, mask, &profile.pdu)?;
    let links = ClassLink::from_plan(plan, profile.bandwidth_hz);
    monte_carlo(stream, &plans, &links, trials, base_seed)
}

/// Rate figures of `stream` under `mask`.
pub fn rate_summary(
    stream: &TokenBitstream,
    mask: &SemanticTokenMask,
    side_info: SideInfoParams,
) -> Result<RateSummary> {
    let cfg = stream.config();
    let geometry = stream.geometry();
    Ok(RateSummary {
        full_bits: cfg.full_bits(),
        delta_bits: cfg.delta_bits(),
        payload_bits: codec::payload_bits(mask, cfg),
        token_bits: stream.token_bits(),
        bpp: codec::bpp(mask, cfg, geometry),
        side_info_overhead: codec::side_info_overhead(
            mask.dims().t,
            side_info.block_size,
            side_info.mv_bits,
            intended_ratio(mask),
            cfg,
        )?,
    })
}

fn infeasible_point(snr_db: f64, bandwidth_hz: f64, err: Error) -> Result<PointReport> {
    let binding = match &err {
        Error::Infeasible(inf) => inf.binding.clone(),
        Error::NoFeasibleMcs { .. } => Vec::new(),
        _ => return Err(err),
    };
    Ok(PointReport {
        snr_db,
        bandwidth_hz,
        feasible: false,
        infeasible: Some(InfeasibleReason {
            binding,
            message: err.to_string(),
        }),
        plan: None,
        rate: None,
        channel: None,
        utilization: None,
        realized_utilization: None,
    })
}

fn evaluate_point(
    spec: &SweepSpec,
    table: &BlerTable,
    grid: &TokenGrid,
    mask: &SemanticTokenMask,
    snr_db: f64,
    bandwidth_hz: f64,
) -> Result<PointReport> {
    let mut profile = spec.profile.clone();
    profile.snr_db = snr_db;
    profile.bandwidth_hz = bandwidth_hz;
    let plan = match optimize_for_mask(&profile, table, mask) {
        Ok(plan) => plan,
        Err(err) => return infeasible_point(snr_db, bandwidth_hz, err),
    };
    let cfg = CodecConfig::new(profile.codebook_size, plan.non_intended.bits)?;
    let stream = codec::encode(grid, mask, &cfg)?;
    let channel = simulate(&plan, &profile, &stream, mask, spec.trials, spec.base_seed)?;
    let budget = profile.resource_budget();
    Ok(PointReport {
        snr_db,
        bandwidth_hz,
        feasible: true,
        infeasible: None,
        rate: Some(rate_summary(&stream, mask, spec.side_info)?),
        utilization: Some(plan.utilization()),
        realized_utilization: Some(channel.resource / budget),
        channel: Some(channel),
        plan: Some(plan),
    })
}

/// Evaluates every `(γ, W_B)` pair of `spec`, in parallel, and returns the
/// points sorted by SNR then bandwidth.
pub fn sweep(spec: &SweepSpec, table: &BlerTable, grid: &TokenGrid, mask: &SemanticTokenMask) -> Result<RunReport> {
    spec.validate()?;
    if grid.geometry().codebook_size != spec.profile.codebook_size {
        return Err(Error::InvalidParameter(format!(
            "grid uses N={} but the profile assumes N={}",
            grid.geometry().codebook_size,
            spec.profile.codebook_size
        )));
    }
    if grid.dims() != mask.dims() {
        return Err(Error::DimensionMismatch("grid and mask dimensions differ".into()));
    }
    let pairs: Vec<(f64, f64)> = spec
        .snr_db
        .iter()
        .flat_map(|&s| spec.bandwidth_hz.iter().map(move |&b| (s, b)))
        .collect();
    let mut points = pairs
        .par_iter()
        .map(|&(s, b)| evaluate_point(spec, table, grid, mask, s, b))
        .collect::<Result<Vec<_>>>()?;
    points.sort_by(|a, b| {
        a.snr_db
            .total_cmp(&b.snr_db)
            .then(a.bandwidth_hz.total_cmp(&b.bandwidth_hz))
    });
    Ok(RunReport {
        inputs_digest: inputs_digest(grid, mask),
        geometry: *grid.geometry(),
        theta: mask.theta(),
        rho_s: intended_ratio(mask),
        counts: transmitted_counts(mask),
        trials: spec.trials,
        base_seed: spec.base_seed,
        side_info: spec.side_info,
        profile: spec.profile.clone(),
        points,
    })
}
