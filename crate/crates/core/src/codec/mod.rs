//! Multi-rate token coding.
//!
//! The reference slice (`τ = 0`) is sent at full precision. For `τ ≥ 1`,
//! intended tokens carry their raw index in `b_full` bits and non-intended
//! tokens carry `clip(Z_τ − Z_ref, −Q, Q) + Q` in `b_delta` bits, with
//! `Q = 2^(b_delta−1) − 1`.

mod config;
mod rate;
mod stream;

pub use config::CodecConfig;
pub use rate::{bpp, bpp_for_ratio, encoded_token_bits, payload_bits, side_info_overhead};
pub use stream::TokenBitstream;

use crate::bits::{BitReader, BitWriter};
use crate::error::{Error, Result};
use crate::token::{SemanticTokenMask, TokenGrid};

/// Maps a raw index difference to its transmitted `b_delta`-bit symbol.
#[inline]
pub fn differential_symbol(diff: i64, clip_bound: u32) -> u32 {
    let q = i64::from(clip_bound);
    (diff.clamp(-q, q) + q) as u32
}

/// Rebuilds a non-intended token from its reference and received symbol.
///
/// Symbols above `2Q` cannot be produced by the encoder; they are treated
/// as `2Q`. The result is clipped into `[0, N − 1]`.
#[inline]
pub fn reconstruct_non_intended(reference: u32, symbol: u32, clip_bound: u32, codebook_size: u32) -> u32 {
    let q = i64::from(clip_bound);
    let symbol = i64::from(symbol).min(2 * q);
    (i64::from(reference) + symbol - q).clamp(0, i64::from(codebook_size) - 1) as u32
}

fn check_pair(grid_dims: crate::token::TokenDims, mask: &SemanticTokenMask) -> Result<()> {
    if grid_dims != mask.dims() {
        return Err(Error::DimensionMismatch(format!(
            "grid is {}x{}x{} but mask is {}x{}x{}",
            grid_dims.t,
            grid_dims.h,
            grid_dims.w,
            mask.dims().t,
            mask.dims().h,
            mask.dims().w
        )));
    }
    Ok(())
}

/// Encodes `grid` under `mask` into a bitstream.
pub fn encode(grid: &TokenGrid, mask: &SemanticTokenMask, cfg: &CodecConfig) -> Result<TokenBitstream> {
    cfg.validate()?;
    if grid.geometry().codebook_size != cfg.codebook_size() {
        return Err(Error::InvalidParameter(format!(
            "codec configured for N={} but grid uses N={}",
            cfg.codebook_size(),
            grid.geometry().codebook_size
        )));
    }
    let dims = grid.dims();
    check_pair(dims, mask)?;

    let (full, delta, q) = (cfg.full_bits(), cfg.delta_bits(), cfg.clip_bound());
    let reference = grid.slice(0).to_vec();
    let slice_len = dims.slice_len();

    let mut w = BitWriter::with_capacity_bits(payload_bits(mask, cfg));
    for (k, (&z, &intended)) in grid
        .indices()
        .iter()
        .zip(mask.bits())
        .enumerate()
        .skip(slice_len)
    {
        if intended {
            w.write(z, full);
        } else {
            let diff = i64::from(z) - i64::from(reference[k % slice_len]);
            w.write(differential_symbol(diff, q), delta);
        }
    }
    let payload_bits = w.bits_written();
    Ok(TokenBitstream::new(
        *cfg,
        *grid.geometry(),
        mask.digest(),
        reference,
        w.finish(),
        payload_bits,
    ))
}

/// Decodes a bitstream with its companion mask.
pub fn decode(stream: &TokenBitstream, mask: &SemanticTokenMask) -> Result<TokenGrid> {
    decode_with_reference(stream, mask, stream.reference())
}

/// Decodes using a caller-supplied reference slice in place of the one
/// carried by the stream. Used when the reference slice itself was lost.
pub fn decode_with_reference(
    stream: &TokenBitstream,
    mask: &SemanticTokenMask,
    reference: &[u32],
) -> Result<TokenGrid> {
    let geometry = *stream.geometry();
    let dims = geometry.dims();
    check_pair(dims, mask)?;
    if stream.mask_digest() != &mask.digest() {
        return Err(Error::MaskDigestMismatch);
    }
    if reference.len() != dims.slice_len() {
        return Err(Error::DimensionMismatch(format!(
            "reference slice has {} tokens, expected {}",
            reference.len(),
            dims.slice_len()
        )));
    }
    let cfg = stream.config();
    let n = cfg.codebook_size();
    let (full, delta, q) = (cfg.full_bits(), cfg.delta_bits(), cfg.clip_bound());

    let mut indices = Vec::with_capacity(dims.len());
    for (position, &z) in reference.iter().enumerate() {
        if z >= n {
            return Err(Error::IndexOutOfRange {
                index: z,
                codebook_size: n,
                position,
            });
        }
        indices.push(z);
    }

    let slice_len = dims.slice_len();
    let expected_bits = encoded_token_bits(mask, cfg) - stream.reference_bits();
    let available = stream.payload().len() as u64;
    if available * 8 < expected_bits {
        return Err(Error::Truncated {
            what: "bitstream payload",
            needed: expected_bits.div_ceil(8),
            available,
        });
    }
    let mut r = BitReader::new(stream.payload());
    for (position, &intended) in mask.bits().iter().enumerate().skip(slice_len) {
        if intended {
            let z = r.read(full).expect("length checked above");
            if z >= n {
                return Err(Error::IndexOutOfRange {
                    index: z,
                    codebook_size: n,
                    position,
                });
            }
            indices.push(z);
        } else {
            let symbol = r.read(delta).expect("length checked above");
            indices.push(reconstruct_non_intended(reference[position % slice_len], symbol, q, n));
        }
    }
    if expected_bits != stream.payload_bits() {
        return Err(Error::DimensionMismatch(format!(
            "mask implies {expected_bits} payload bits but the stream carries {}",
            stream.payload_bits()
        )));
    }
    TokenGrid::new(geometry, indices)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::token::{GridGeometry, TokenDims};
    use proptest::prelude::*;

    #[test]
    fn symbol_mapping_examples() {
        let cfg = CodecConfig::new(64000, 11).unwrap();
        let q = cfg.clip_bound();
        assert_eq!(q, 1023);
        assert_eq!(differential_symbol(1500, q), 2046);
        assert_eq!(differential_symbol(0, q), 1023);
        assert_eq!(differential_symbol(-2000, q), 0);
        assert_eq!(differential_symbol(-1023, q), 0);
        assert_eq!(differential_symbol(1023, q), 2046);
    }

    #[test]
    fn reconstruction_clips_to_codebook() {
        // Z_ref=5, symbol 0, Q=1023 -> 5 - 1023 clipped to 0
        assert_eq!(reconstruct_non_intended(5, 0, 1023, 64000), 0);
        assert_eq!(reconstruct_non_intended(63990, 2046, 1023, 64000), 63999);
        // symbol 2047 is unused by the encoder and clamps to 2Q
        assert_eq!(
            reconstruct_non_intended(100, 2047, 1023, 64000),
            reconstruct_non_intended(100, 2046, 1023, 64000)
        );
    }

    fn grid_from(n: u32, dims: (u32, u32, u32), idx: Vec<u32>) -> TokenGrid {
        let g = GridGeometry::new(n, dims.0, dims.1, dims.2, 1, 1).unwrap();
        TokenGrid::new(g, idx).unwrap()
    }

    #[test]
    fn lossless_when_differences_in_range() {
        let grid = grid_from(64000, (3, 2, 2), vec![
            100, 200, 300, 400, //
            110, 63999, 290, 0, //
            100, 200, 30000, 401,
        ]);
        let mask = SemanticTokenMask::new(
            TokenDims::new(3, 2, 2).unwrap(),
            0.3,
            vec![false, false, false, false, false, true, false, false, true, false, false, false],
        )
        .unwrap();
        let cfg = CodecConfig::new(64000, 16).unwrap();
        let stream = encode(&grid, &mask, &cfg).unwrap();
        assert_eq!(decode(&stream, &mask).unwrap(), grid);
        // 2 intended at 16 bits, 6 differential at 16 bits
        assert_eq!(stream.payload_bits(), 8 * 16);
    }

    #[test]
    fn clipped_differential_loses_only_the_excess() {
        let grid = grid_from(64000, (2, 1, 2), vec![1000, 1000, 4000, 0]);
        let mask = SemanticTokenMask::filled(TokenDims::new(2, 1, 2).unwrap(), 0.3, false).unwrap();
        let cfg = CodecConfig::new(64000, 11).unwrap();
        let stream = encode(&grid, &mask, &cfg).unwrap();
        let out = decode(&stream, &mask).unwrap();
        assert_eq!(out.indices(), &[1000, 1000, 2023, 0]);
    }

    #[test]
    fn mismatched_mask_is_rejected() {
        let grid = grid_from(64000, (2, 1, 2), vec![1, 2, 3, 4]);
        let dims = TokenDims::new(2, 1, 2).unwrap();
        let mask = SemanticTokenMask::filled(dims, 0.3, false).unwrap();
        let other = SemanticTokenMask::filled(dims, 0.3, true).unwrap();
        let cfg = CodecConfig::new(64000, 11).unwrap();
        let stream = encode(&grid, &mask, &cfg).unwrap();
        assert!(matches!(decode(&stream, &other), Err(Error::MaskDigestMismatch)));

        let wrong_dims = SemanticTokenMask::filled(TokenDims::new(2, 2, 1).unwrap(), 0.3, false).unwrap();
        assert!(matches!(encode(&grid, &wrong_dims, &cfg), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn intended_value_out_of_range_is_an_error() {
        let grid = grid_from(1000, (2, 1, 1), vec![5, 7]);
        let mask = SemanticTokenMask::filled(TokenDims::new(2, 1, 1).unwrap(), 0.3, true).unwrap();
        let cfg = CodecConfig::new(1000, 4).unwrap();
        let stream = encode(&grid, &mask, &cfg).unwrap();
        // overwrite the single 10-bit intended value with 1023
        let forged = TokenBitstream::new(
            *stream.config(),
            *stream.geometry(),
            *stream.mask_digest(),
            stream.reference().to_vec(),
            vec![0xFF, 0xC0],
            10,
        );
        assert!(matches!(decode(&forged, &mask), Err(Error::IndexOutOfRange { index: 1023, .. })));
    }

    #[test]
    fn short_payload_is_truncated() {
        let grid = grid_from(1000, (2, 1, 2), vec![5, 7, 9, 11]);
        let mask = SemanticTokenMask::filled(TokenDims::new(2, 1, 2).unwrap(), 0.3, true).unwrap();
        let cfg = CodecConfig::new(1000, 4).unwrap();
        let stream = encode(&grid, &mask, &cfg).unwrap();
        let short = TokenBitstream::new(
            *stream.config(),
            *stream.geometry(),
            *stream.mask_digest(),
            stream.reference().to_vec(),
            stream.payload()[..1].to_vec(),
            8,
        );
        assert!(matches!(decode(&short, &mask), Err(Error::Truncated { .. })));
    }

    fn arb_case() -> impl Strategy<Value = (TokenGrid, SemanticTokenMask, CodecConfig)> {
        (2u32..5000, 1u32..4, 1u32..5, 1u32..5).prop_flat_map(|(n, t, h, w)| {
            let len = (t * h * w) as usize;
            let full = crate::token::grid::full_bits_for(n);
            (
                prop::collection::vec(0..n, len),
                prop::collection::vec(any::<bool>(), len),
                2u32..=full.max(2),
                Just((n, t, h, w)),
            )
                .prop_filter("b_full >= 2", move |_| full >= 2)
                .prop_map(|(idx, bits, delta, (n, t, h, w))| {
                    let grid = grid_from(n, (t, h, w), idx);
                    let mask = SemanticTokenMask::new(grid.dims(), 0.3, bits).unwrap();
                    (grid, mask, CodecConfig::new(n, delta).unwrap())
                })
        })
    }

    proptest! {
        #[test]
        fn intended_exact_and_non_intended_error_bounded((grid, mask, cfg) in arb_case()) {
            let stream = encode(&grid, &mask, &cfg).unwrap();
            prop_assert_eq!(stream.payload_bits(), encoded_token_bits(&mask, &cfg) - stream.reference_bits());
            let out = decode(&stream, &mask).unwrap();
            let q = i64::from(cfg.clip_bound());
            let hw = grid.dims().slice_len();
            for k in 0..grid.indices().len() {
                let z = i64::from(grid.indices()[k]);
                let got = i64::from(out.indices()[k]);
                if k < hw || mask.bits()[k] {
                    prop_assert_eq!(got, z);
                } else {
                    let diff = z - i64::from(grid.indices()[k % hw]);
                    let bound = (diff.abs() - q).max(0);
                    prop_assert!((got - z).abs() <= bound);
                    if diff.abs() <= q {
                        prop_assert_eq!(got, z);
                    }
                }
            }
        }

        #[test]
        fn any_payload_bits_decode_without_panic(
            (grid, mask, cfg) in arb_case(),
            noise in prop::collection::vec(any::<u8>(), 0..64),
        ) {
            let stream = encode(&grid, &mask, &cfg).unwrap();
            let mut payload = stream.payload().to_vec();
            for (b, x) in payload.iter_mut().zip(noise.iter().cycle()) {
                *b ^= x;
            }
            let forged = TokenBitstream::new(
                *stream.config(), *stream.geometry(), *stream.mask_digest(),
                stream.reference().to_vec(), payload, stream.payload_bits(),
            );
            match decode(&forged, &mask) {
                Ok(out) => prop_assert!(out.indices().iter().all(|&v| v < cfg.codebook_size())),
                Err(e) => prop_assert!(matches!(e, Error::IndexOutOfRange { .. }), "unexpected {e}"),
            }
        }
    }
}
