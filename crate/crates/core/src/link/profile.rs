use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::McsScheme;
use crate::error::{Error, Result};
use crate::token::grid::full_bits_for;
use crate::token::TokenClass;

/// A value for each token class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerClass<T> {
    pub intended: T,
    pub non_intended: T,
}

impl<T> PerClass<T> {
    pub fn new(intended: T, non_intended: T) -> Self {
        Self {
            intended,
            non_intended,
        }
    }

    pub fn get(&self, class: TokenClass) -> &T {
        match class {
            TokenClass::Intended => &self.intended,
            TokenClass::NonIntended => &self.non_intended,
        }
    }

    pub fn get_mut(&mut self, class: TokenClass) -> &mut T {
        match class {
            TokenClass::Intended => &mut self.intended,
            TokenClass::NonIntended => &mut self.non_intended,
        }
    }

    pub fn map<U>(&self, mut f: impl FnMut(TokenClass, &T) -> U) -> PerClass<U> {
        PerClass {
            intended: f(TokenClass::Intended, &self.intended),
            non_intended: f(TokenClass::NonIntended, &self.non_intended),
        }
    }
}

/// PDU packing: tokens per PDU and header/pilot/CRC overhead in bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PduParams {
    pub tokens: u32,
    pub header_bits: u32,
}

impl Default for PduParams {
    fn default() -> Self {
        Self {
            tokens: 512,
            header_bits: 128,
        }
    }
}

/// Exponential distortion model `α·exp(−β·B)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistortionModel {
    pub alpha: f64,
    pub beta: f64,
}

impl Default for DistortionModel {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            beta: 0.2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Weights {
    pub distortion: f64,
    pub delay: f64,
}

impl Default for Weights {
    fn default() -> Self {
        Self {
            distortion: 0.5,
            delay: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapStep {
    pub below_snr_db: f64,
    pub cap: f64,
}

/// SNR-dependent BLER cap: the first step whose `below_snr_db` exceeds the
/// SNR applies, otherwise `otherwise`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlerCapSchedule {
    pub steps: Vec<CapStep>,
    pub otherwise: f64,
}

impl BlerCapSchedule {
    pub fn constant(cap: f64) -> Self {
        Self {
            steps: Vec::new(),
            otherwise: cap,
        }
    }

    pub fn cap_at(&self, snr_db: f64) -> f64 {
        self.steps
            .iter()
            .find(|s| snr_db < s.below_snr_db)
            .map_or(self.otherwise, |s| s.cap)
    }
}

impl Default for BlerCapSchedule {
    /// 0.1 below 4 dB, 0.05 from 4 dB up.
    fn default() -> Self {
        Self {
            steps: vec![CapStep {
                below_snr_db: 4.0,
                cap: 0.1,
            }],
            otherwise: 0.05,
        }
    }
}

/// Link conditions, budget, and every tunable of the selection problem.
///
/// Any field missing from a profile file takes its default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkProfile {
    pub snr_db: f64,
    pub bandwidth_hz: f64,
    /// Physical-layer utilization factor `ρ_oh` in (0, 1).
    pub overhead_factor: f64,
    /// Fraction `η` of the time-frequency block available for tokens. Zero
    /// leaves no budget, so every configuration is infeasible.
    pub resource_fraction: f64,
    pub block_duration_s: f64,
    pub codebook_size: u32,
    /// Reduced precisions offered to non-intended tokens.
    pub non_intended_bits: Vec<u32>,
    pub mcs_catalog: Vec<McsScheme>,
    pub intended_mcs: Vec<String>,
    pub non_intended_mcs: Vec<String>,
    pub pdu: PerClass<PduParams>,
    pub intended_bler_cap: f64,
    pub non_intended_bler_cap: BlerCapSchedule,
    pub distortion: PerClass<DistortionModel>,
    pub weights: Weights,
    /// Optional BLER table file; the bundled table is used when absent.
    pub bler_table: Option<String>,
}

impl Default for LinkProfile {
    fn default() -> Self {
        Self {
            snr_db: 6.0,
            bandwidth_hz: 340e3,
            overhead_factor: 0.85,
            resource_fraction: 0.75,
            block_duration_s: 0.1,
            codebook_size: 64000,
            non_intended_bits: vec![16, 15, 14, 13, 12, 11, 10],
            mcs_catalog: McsScheme::default_catalog(),
            intended_mcs: vec!["QPSK_1/3".into(), "QPSK_1/2".into()],
            non_intended_mcs: vec![
                "QPSK_1/3".into(),
                "QPSK_1/2".into(),
                "16QAM_1/2".into(),
                "16QAM_3/4".into(),
            ],
            pdu: PerClass::new(PduParams::default(), PduParams::default()),
            intended_bler_cap: 0.01,
            non_intended_bler_cap: BlerCapSchedule::default(),
            distortion: PerClass::new(DistortionModel::default(), DistortionModel::default()),
            weights: Weights::default(),
            bler_table: None,
        }
    }
}

impl LinkProfile {
    pub fn from_json(text: &str) -> Result<Self> {
        let p: Self = serde_json::from_str(text)?;
        p.validate()?;
        Ok(p)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("profile serializes")
    }

    /// `b_full = ⌈log2 N⌉`, the only precision offered to intended tokens.
    pub fn full_bits(&self) -> u32 {
        full_bits_for(self.codebook_size)
    }

    /// Resource budget `R_max = η·W_B·T_RB` in Hz·s.
    pub fn resource_budget(&self) -> f64 {
        self.resource_fraction * self.bandwidth_hz * self.block_duration_s
    }

    pub fn bler_caps(&self) -> PerClass<f64> {
        PerClass::new(self.intended_bler_cap, self.non_intended_bler_cap.cap_at(self.snr_db))
    }

    pub fn mcs(&self, name: &str) -> Result<&McsScheme> {
        self.mcs_catalog
            .iter()
            .find(|m| m.name == name)
            .ok_or_else(|| Error::UnknownMcs(name.to_owned()))
    }

    pub fn mcs_names(&self, class: TokenClass) -> &[String] {
        match class {
            TokenClass::Intended => &self.intended_mcs,
            TokenClass::NonIntended => &self.non_intended_mcs,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !self.snr_db.is_finite() {
            return bad(format!("snr_db must be finite, got {}", self.snr_db));
        }
        if !(self.bandwidth_hz > 0.0 && self.bandwidth_hz.is_finite()) {
            return bad(format!("bandwidth_hz must be positive, got {}", self.bandwidth_hz));
        }
        if !(self.overhead_factor > 0.0 && self.overhead_factor < 1.0) {
            return bad(format!("overhead_factor must lie in (0, 1), got {}", self.overhead_factor));
        }
        if !(0.0..=1.0).contains(&self.resource_fraction) {
            return bad(format!("resource_fraction must lie in [0, 1], got {}", self.resource_fraction));
        }
        if !(self.block_duration_s > 0.0 && self.block_duration_s.is_finite()) {
            return bad(format!("block_duration_s must be positive, got {}", self.block_duration_s));
        }
        if self.full_bits() < 2 {
            return bad(format!("codebook_size {} is too small", self.codebook_size));
        }
        if self.non_intended_bits.is_empty() {
            return bad("non_intended_bits must not be empty".into());
        }
        if let Some(b) = self
            .non_intended_bits
            .iter()
            .find(|&&b| b < 2 || b > self.full_bits())
        {
            return bad(format!("non-intended precision {b} outside [2, {}]", self.full_bits()));
        }
        for m in &self.mcs_catalog {
            if m.bits_per_symbol == 0 || !(m.code_rate > 0.0 && m.code_rate <= 1.0) {
                return bad(format!("MCS {:?} has invalid modulation order or code rate", m.name));
            }
        }
        for class in TokenClass::ALL {
            if self.mcs_names(class).is_empty() {
                return bad(format!("class {class} has no MCS"));
            }
            for name in self.mcs_names(class) {
                self.mcs(name)?;
            }
            if self.pdu.get(class).tokens == 0 {
                return bad(format!("class {class} PDU must carry at least one token"));
            }
            let d = self.distortion.get(class);
            if !(d.alpha.is_finite() && d.beta.is_finite()) {
                return bad(format!("class {class} distortion parameters must be finite"));
            }
        }
        let caps = std::iter::once(self.intended_bler_cap)
            .chain(std::iter::once(self.non_intended_bler_cap.otherwise))
            .chain(self.non_intended_bler_cap.steps.iter().map(|s| s.cap));
        for cap in caps {
            if !(0.0..=1.0).contains(&cap) {
                return bad(format!("BLER cap {cap} outside [0, 1]"));
            }
        }
        let w = self.weights;
        if w.distortion < 0.0 || w.delay < 0.0 || (w.distortion + w.delay - 1.0).abs() > 1e-9 {
            return bad(format!(
                "weights must be non-negative and sum to 1, got {} + {}",
                w.distortion, w.delay
            ));
        }
        Ok(())
    }
}
