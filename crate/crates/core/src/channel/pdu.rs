use serde::{Deserialize, Serialize};

use crate::bits::{BitReader, BitWriter};
use crate::codec::TokenBitstream;
use crate::error::{Error, Result};
use crate::link::{ClassCounts, PduParams, PerClass};
use crate::token::{SemanticTokenMask, TokenClass, TokenDims};

/// One protocol data unit: a run of same-class tokens and their bits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pdu {
    /// Flat grid positions, in transmission order.
    pub positions: Vec<u32>,
    /// Token bits, MSB-first, zero-padded to a byte.
    pub payload: Vec<u8>,
    pub payload_bits: u64,
    /// True if any token belongs to the reference slice.
    pub carries_reference: bool,
}

impl Pdu {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

/// The PDUs of one token class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PduPlan {
    pub class: TokenClass,
    pub tokens_per_pdu: u32,
    pub header_bits: u32,
    pub bits_per_token: u32,
    pub pdus: Vec<Pdu>,
}

impl PduPlan {
    pub fn token_count(&self) -> u64 {
        self.pdus.iter().map(|p| p.len() as u64).sum()
    }

    /// Payload plus header bits over all PDUs.
    pub fn total_bits(&self) -> u64 {
        self.pdus
            .iter()
            .map(|p| p.payload_bits + u64::from(self.header_bits))
            .sum()
    }

    /// `(τ, i, j)` of every token, PDU by PDU.
    pub fn positions(&self, dims: TokenDims) -> impl Iterator<Item = (u32, u32, u32)> + '_ {
        self.pdus
            .iter()
            .flat_map(|p| p.positions.iter())
            .map(move |&k| dims.unflat(k as usize))
    }
}

/// Token counts per class as they travel on the link: the reference slice
/// rides with the intended class.
pub fn transmitted_counts(mask: &SemanticTokenMask) -> ClassCounts {
    let dims = mask.dims();
    let slice = dims.slice_len();
    let intended = mask.bits()[slice..].iter().filter(|&&b| b).count();
    let non_intended = dims.len() - slice - intended;
    ClassCounts::new((slice + intended) as u64, non_intended as u64)
}

/// Splits a bitstream into per-class PDU sequences.
///
/// The intended plan carries the reference slice first, then every intended
/// token with `τ ≥ 1` in row-major order. The non-intended plan carries the
/// remaining tokens in the same order.
pub fn pack_pdus(
    stream: &TokenBitstream,
    mask: &SemanticTokenMask,
    params: &PerClass<PduParams>,
) -> Result<PerClass<PduPlan>> {
    let dims = stream.geometry().dims();
    if dims != mask.dims() {
        return Err(Error::DimensionMismatch(format!(
            "bitstream is {}x{}x{} but mask is {}x{}x{}",
            dims.t,
            dims.h,
            dims.w,
            mask.dims().t,
            mask.dims().h,
            mask.dims().w
        )));
    }
    if stream.mask_digest() != &mask.digest() {
        return Err(Error::MaskDigestMismatch);
    }
    for class in TokenClass::ALL {
        if params.get(class).tokens == 0 {
            return Err(Error::InvalidParameter(format!(
                "class {class} PDUs must carry at least one token"
            )));
        }
    }

    let cfg = stream.config();
    let (full, delta) = (cfg.full_bits(), cfg.delta_bits());
    let mut tokens: PerClass<Vec<(u32, u32)>> = PerClass::new(Vec::new(), Vec::new());
    for (k, &z) in stream.reference().iter().enumerate() {
        tokens.intended.push((k as u32, z));
    }
    let slice = dims.slice_len();
    let expected = crate::codec::encoded_token_bits(mask, cfg) - stream.reference_bits();
    if (stream.payload().len() as u64) * 8 < expected {
        return Err(Error::Truncated {
            what: "bitstream payload",
            needed: expected.div_ceil(8),
            available: stream.payload().len() as u64,
        });
    }
    let mut r = BitReader::new(stream.payload());
    for (k, &intended) in mask.bits().iter().enumerate().skip(slice) {
        if intended {
            tokens.intended.push((k as u32, r.read(full).expect("length checked above")));
        } else {
            tokens.non_intended.push((k as u32, r.read(delta).expect("length checked above")));
        }
    }

    let bits = PerClass::new(full, delta);
    Ok(tokens.map(|class, list| {
        let p = params.get(class);
        let width = *bits.get(class);
        let pdus = list
            .chunks(p.tokens as usize)
            .map(|chunk| {
                let mut w = BitWriter::with_capacity_bits(chunk.len() as u64 * u64::from(width));
                for &(_, v) in chunk {
                    w.write(v, width);
                }
                let payload_bits = w.bits_written();
                Pdu {
                    positions: chunk.iter().map(|&(k, _)| k).collect(),
                    payload: w.finish(),
                    payload_bits,
                    carries_reference: chunk.iter().any(|&(k, _)| (k as usize) < slice),
                }
            })
            .collect();
        PduPlan {
            class,
            tokens_per_pdu: p.tokens,
            header_bits: p.header_bits,
            bits_per_token: width,
            pdus,
        }
    }))
}

/// Reads the token values back out of a PDU.
pub(crate) fn unpack(pdu: &Pdu, width: u32) -> impl Iterator<Item = (usize, u32)> + '_ {
    let mut r = BitReader::new(&pdu.payload);
    pdu.positions
        .iter()
        .map(move |&k| (k as usize, r.read(width).expect("PDU payload sized at packing")))
}
