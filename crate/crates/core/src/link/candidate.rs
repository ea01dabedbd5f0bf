use serde::{Deserialize, Serialize};

use super::{BlerTable, LinkProfile, McsScheme};
use crate::error::{Error, Result};
use crate::token::TokenClass;

/// One transmission configuration for a token class, with its derived
/// per-token costs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub class: TokenClass,
    /// Bits per token.
    pub bits: u32,
    pub mcs: McsScheme,
    /// `ρ_oh·m·r`, bit/s/Hz.
    pub spectral_efficiency: f64,
    /// PDU loss probability at the profile SNR.
    pub bler: f64,
    /// Hz·s per token.
    pub resource_per_token: f64,
    /// Seconds per token.
    pub delay_per_token: f64,
    pub distortion: f64,
}

impl Candidate {
    /// Stable label used for deterministic tie-breaking, e.g. `QPSK_1/2@B12`.
    pub fn name(&self) -> String {
        format!("{}@B{}", self.mcs.name, self.bits)
    }
}

/// `ρ_oh·m·r`.
pub fn spectral_efficiency(overhead_factor: f64, mcs: &McsScheme) -> f64 {
    overhead_factor * f64::from(mcs.bits_per_symbol) * mcs.code_rate
}

/// Per-token resource (Hz·s) and delay (s), amortizing the PDU header over
/// the `tokens_per_pdu` tokens it carries.
pub fn per_token_costs(
    bits: u32,
    spectral_efficiency: f64,
    tokens_per_pdu: u32,
    header_bits: u32,
    bandwidth_hz: f64,
) -> Result<(f64, f64)> {
    if tokens_per_pdu == 0 {
        return Err(Error::InvalidParameter("a PDU must carry at least one token".into()));
    }
    if !(spectral_efficiency > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "spectral efficiency must be positive, got {spectral_efficiency}"
        )));
    }
    if !(bandwidth_hz > 0.0) {
        return Err(Error::InvalidParameter(format!("bandwidth must be positive, got {bandwidth_hz}")));
    }
    let l = f64::from(tokens_per_pdu);
    let pdu_bits = l * f64::from(bits) + f64::from(header_bits);
    let resource = pdu_bits / (l * spectral_efficiency);
    Ok((resource, resource / bandwidth_hz))
}

/// `α·exp(−β·B)`.
pub fn distortion(bits: u32, alpha: f64, beta: f64) -> f64 {
    alpha * (-beta * f64::from(bits)).exp()
}

/// Candidate list for one class, in precision-major, MCS-minor order.
///
/// Intended tokens only use `b_full`. Schemes whose activation SNR exceeds
/// the profile SNR are dropped.
pub fn generate_candidates(
    profile: &LinkProfile,
    table: &BlerTable,
    class: TokenClass,
) -> Result<Vec<Candidate>> {
    let precisions: Vec<u32> = match class {
        TokenClass::Intended => vec![profile.full_bits()],
        TokenClass::NonIntended => profile.non_intended_bits.clone(),
    };
    let pdu = profile.pdu.get(class);
    let model = profile.distortion.get(class);
    let mut out = Vec::new();
    for &bits in &precisions {
        for name in profile.mcs_names(class) {
            let mcs = profile.mcs(name)?;
            if !mcs.is_active(profile.snr_db) {
                continue;
            }
            let bler = table.lookup(&mcs.name, profile.snr_db)?;
            let g = spectral_efficiency(profile.overhead_factor, mcs);
            let (resource, delay) =
                per_token_costs(bits, g, pdu.tokens, pdu.header_bits, profile.bandwidth_hz)?;
            out.push(Candidate {
                class,
                bits,
                mcs: mcs.clone(),
                spectral_efficiency: g,
                bler,
                resource_per_token: resource,
                delay_per_token: delay,
                distortion: distortion(bits, model.alpha, model.beta),
            });
        }
    }
    if out.is_empty() {
        return Err(Error::NoFeasibleMcs {
            snr_db: profile.snr_db,
            class: class.label(),
        });
    }
    Ok(out)
}
