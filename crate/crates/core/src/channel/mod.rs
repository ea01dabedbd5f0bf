//! PDU erasure channel.
//!
//! Each PDU is lost independently with its class probability. Lost tokens
//! are replaced by the reference token at the same `(i, j)`. If any PDU
//! carrying the reference slice is lost, the whole slice falls back to
//! index 0 and the outcome is flagged.

mod monte_carlo;
mod pdu;

pub use monte_carlo::{monte_carlo, ClassSummary, MonteCarloSummary};
pub use pdu::{pack_pdus, transmitted_counts, Pdu, PduPlan};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::codec::{reconstruct_non_intended, TokenBitstream};
use crate::error::{Error, Result};
use crate::link::{AdaptationPlan, Candidate, PerClass};
use crate::token::{TokenClass, TokenGrid};

/// What the channel needs to know about one class's configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassLink {
    pub class: TokenClass,
    pub bits_per_token: u32,
    pub loss_probability: f64,
    pub spectral_efficiency: f64,
    pub bandwidth_hz: f64,
}

impl ClassLink {
    pub fn from_candidate(candidate: &Candidate, bandwidth_hz: f64) -> Self {
        Self {
            class: candidate.class,
            bits_per_token: candidate.bits,
            loss_probability: candidate.bler,
            spectral_efficiency: candidate.spectral_efficiency,
            bandwidth_hz,
        }
    }

    /// Links for both classes of an adaptation plan.
    ///
    /// The intended candidate's precision is `b_full`; the non-intended one
    /// must match the stream's `b_delta` for [`transmit`] to accept it.
    pub fn from_plan(plan: &AdaptationPlan, bandwidth_hz: f64) -> PerClass<Self> {
        PerClass::new(
            Self::from_candidate(&plan.intended, bandwidth_hz),
            Self::from_candidate(&plan.non_intended, bandwidth_hz),
        )
    }

    fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.loss_probability) {
            return Err(Error::InvalidParameter(format!(
                "loss probability {} outside [0, 1]",
                self.loss_probability
            )));
        }
        if !(self.spectral_efficiency > 0.0 && self.spectral_efficiency.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "spectral efficiency must be positive, got {}",
                self.spectral_efficiency
            )));
        }
        if !(self.bandwidth_hz > 0.0 && self.bandwidth_hz.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "bandwidth must be positive, got {}",
                self.bandwidth_hz
            )));
        }
        Ok(())
    }
}

/// Realized per-class totals of one transmission.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ClassTotals {
    pub pdus: u64,
    pub pdus_lost: u64,
    pub tokens: u64,
    pub tokens_erased: u64,
    pub bits_sent: u64,
    /// Hz·s.
    pub resource: f64,
    pub delay_s: f64,
}

/// The result of sending both PDU plans through the channel once.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelOutcome {
    pub seed: u64,
    pub lost: PerClass<Vec<bool>>,
    pub reference_lost: bool,
    pub reconstruction: TokenGrid,
    /// Per grid position: true if the token was not delivered.
    pub erased: Vec<bool>,
    pub totals: PerClass<ClassTotals>,
}

/// Serializable digest of a [`ChannelOutcome`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeReport {
    pub seed: u64,
    pub reference_lost: bool,
    pub erased_positions: u64,
    pub intended: ClassTotals,
    pub non_intended: ClassTotals,
    pub resource: f64,
    pub delay_s: f64,
}

impl ChannelOutcome {
    pub fn resource(&self) -> f64 {
        self.totals.intended.resource + self.totals.non_intended.resource
    }

    pub fn delay_s(&self) -> f64 {
        self.totals.intended.delay_s + self.totals.non_intended.delay_s
    }

    pub fn report(&self) -> OutcomeReport {
        OutcomeReport {
            seed: self.seed,
            reference_lost: self.reference_lost,
            erased_positions: self.erased.iter().filter(|&&e| e).count() as u64,
            intended: self.totals.intended,
            non_intended: self.totals.non_intended,
            resource: self.resource(),
            delay_s: self.delay_s(),
        }
    }
}

impl OutcomeReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn check_class(plan: &PduPlan, link: &ClassLink, expected: TokenClass) -> Result<()> {
    if plan.class != expected || link.class != expected {
        return Err(Error::InvalidParameter(format!(
            "expected class {expected} plan and link, got {} and {}",
            plan.class, link.class
        )));
    }
    if plan.bits_per_token != link.bits_per_token {
        return Err(Error::InvalidParameter(format!(
            "class {expected} plan packs {} bits per token but the link was sized for {}",
            plan.bits_per_token, link.bits_per_token
        )));
    }
    link.validate()
}

/// Sends both plans through the erasure channel and reconstructs the grid.
///
/// A ChaCha8 generator seeded with `seed` draws one uniform `[0, 1)` number
/// per PDU, intended class first; a PDU is lost if the draw is below its
/// class loss probability.
pub fn transmit(
    stream: &TokenBitstream,
    plans: &PerClass<PduPlan>,
    links: &PerClass<ClassLink>,
    seed: u64,
) -> Result<ChannelOutcome> {
    for class in TokenClass::ALL {
        check_class(plans.get(class), links.get(class), class)?;
    }
    let geometry = *stream.geometry();
    let dims = geometry.dims();
    let cfg = stream.config();
    if plans.intended.bits_per_token != cfg.full_bits() || plans.non_intended.bits_per_token != cfg.delta_bits() {
        return Err(Error::InvalidParameter(
            "PDU plans do not match the bitstream precisions".into(),
        ));
    }
    let slice = dims.slice_len();
    let packed = plans.intended.token_count() + plans.non_intended.token_count();
    if packed != dims.len() as u64 {
        return Err(Error::DimensionMismatch(format!(
            "PDU plans carry {packed} tokens, grid has {}",
            dims.len()
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lost = plans.map(|class, plan| {
        let p = links.get(class).loss_probability;
        plan.pdus.iter().map(|_| rng.gen::<f64>() < p).collect::<Vec<_>>()
    });
    let reference_lost = plans
        .intended
        .pdus
        .iter()
        .zip(&lost.intended)
        .any(|(pdu, &l)| l && pdu.carries_reference);

    let mut received: Vec<Option<u32>> = vec![None; dims.len()];
    for class in TokenClass::ALL {
        let plan = plans.get(class);
        for (pdu, _) in plan.pdus.iter().zip(lost.get(class)).filter(|(_, &l)| !l) {
            for (k, v) in pdu::unpack(pdu, plan.bits_per_token) {
                received[k] = Some(v);
            }
        }
    }

    let reference: Vec<u32> = if reference_lost {
        vec![0; slice]
    } else {
        received[..slice]
            .iter()
            .copied()
            .collect::<Option<_>>()
            .ok_or_else(|| Error::InvalidParameter("PDU plans do not cover the reference slice".into()))?
    };
    let n = cfg.codebook_size();
    let q = cfg.clip_bound();
    let mut indices = reference.clone();
    indices.reserve(dims.len() - slice);
    let mut erased = vec![reference_lost; slice];
    erased.reserve(dims.len() - slice);
    let mut intended_positions = vec![false; dims.len()];
    for pdu in &plans.intended.pdus {
        for &k in &pdu.positions {
            intended_positions[k as usize] = true;
        }
    }
    for k in slice..dims.len() {
        let z_ref = reference[k % slice];
        let (value, was_erased) = match received[k] {
            None => (z_ref, true),
            Some(v) if intended_positions[k] => (v, false),
            Some(sym) => (reconstruct_non_intended(z_ref, sym, q, n), false),
        };
        if value >= n {
            return Err(Error::IndexOutOfRange {
                index: value,
                codebook_size: n,
                position: k,
            });
        }
        indices.push(value);
        erased.push(was_erased);
    }

    let totals = plans.map(|class, plan| {
        let link = links.get(class);
        let flags = lost.get(class);
        let mut t = ClassTotals::default();
        for (pdu, &l) in plan.pdus.iter().zip(flags) {
            let bits = pdu.payload_bits + u64::from(plan.header_bits);
            t.pdus += 1;
            t.tokens += pdu.len() as u64;
            t.bits_sent += bits;
            if l {
                t.pdus_lost += 1;
                t.tokens_erased += pdu.len() as u64;
            }
        }
        t.resource = t.bits_sent as f64 / link.spectral_efficiency;
        t.delay_s = t.resource / link.bandwidth_hz;
        t
    });

    Ok(ChannelOutcome {
        seed,
        lost,
        reference_lost,
        reconstruction: TokenGrid::new(geometry, indices)?,
        erased,
        totals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::{decode, encode, CodecConfig};
    use crate::link::PduParams;
    use crate::token::{GridGeometry, SemanticTokenMask};

    struct Fixture {
        grid: TokenGrid,
        mask: SemanticTokenMask,
        stream: TokenBitstream,
    }

    fn fixture(t: u32, h: u32, w: u32, delta: u32, seed: u64) -> Fixture {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let geometry = GridGeometry::new(64000, t, h, w, 1, 1).unwrap();
        let dims = geometry.dims();
        let indices = (0..dims.len()).map(|_| rng.gen_range(0..64000)).collect();
        let grid = TokenGrid::new(geometry, indices).unwrap();
        let bits = (0..dims.len()).map(|_| rng.gen_bool(0.3)).collect();
        let mask = SemanticTokenMask::new(dims, 0.5, bits).unwrap();
        let cfg = CodecConfig::new(64000, delta).unwrap();
        let stream = encode(&grid, &mask, &cfg).unwrap();
        Fixture { grid, mask, stream }
    }

    fn params(tokens: u32) -> PerClass<PduParams> {
        let p = PduParams {
            tokens,
            header_bits: 128,
        };
        PerClass::new(p, p)
    }

    fn links(stream: &TokenBitstream, ps: f64, pn: f64) -> PerClass<ClassLink> {
        let link = |class, bits, p, g| ClassLink {
            class,
            bits_per_token: bits,
            loss_probability: p,
            spectral_efficiency: g,
            bandwidth_hz: 340e3,
        };
        PerClass::new(
            link(TokenClass::Intended, stream.config().full_bits(), ps, 0.85),
            link(TokenClass::NonIntended, stream.config().delta_bits(), pn, 1.7),
        )
    }

    #[test]
    fn ceiling_division_into_pdus() {
        let f = fixture(2, 25, 40, 12, 1);
        let mask = SemanticTokenMask::filled(f.mask.dims(), 0.5, false).unwrap();
        let stream = encode(&f.grid, &mask, f.stream.config()).unwrap();
        let plans = pack_pdus(&stream, &mask, &params(512)).unwrap();
        let sizes: Vec<_> = plans.non_intended.pdus.iter().map(Pdu::len).collect();
        assert_eq!(sizes, [512, 488]);
        assert!(plans.non_intended.pdus.iter().all(|p| p.payload_bits == p.len() as u64 * 12));
        assert_eq!(plans.intended.token_count(), 1000);
        assert!(plans.intended.pdus.iter().all(|p| p.carries_reference));
    }

    #[test]
    fn empty_class_gives_empty_plan() {
        let f = fixture(3, 4, 4, 10, 2);
        let mask = SemanticTokenMask::filled(f.mask.dims(), 0.5, true).unwrap();
        let stream = encode(&f.grid, &mask, f.stream.config()).unwrap();
        let plans = pack_pdus(&stream, &mask, &params(7)).unwrap();
        assert!(plans.non_intended.pdus.is_empty());
        assert_eq!(plans.non_intended.total_bits(), 0);
        assert_eq!(plans.intended.token_count(), 48);
    }

    #[test]
    fn every_position_in_exactly_one_pdu() {
        let f = fixture(4, 9, 7, 11, 3);
        let plans = pack_pdus(&f.stream, &f.mask, &params(10)).unwrap();
        let mut seen = vec![0u32; f.mask.dims().len()];
        for class in TokenClass::ALL {
            let plan = plans.get(class);
            for pdu in &plan.pdus {
                assert!(pdu.len() <= 10);
                for &k in &pdu.positions {
                    seen[k as usize] += 1;
                    let slice = f.mask.dims().slice_len();
                    let expected = if (k as usize) < slice || f.mask.bits()[k as usize] {
                        TokenClass::Intended
                    } else {
                        TokenClass::NonIntended
                    };
                    assert_eq!(expected, class);
                }
                assert!(pdu.positions.windows(2).all(|w| w[0] < w[1]));
            }
        }
        assert!(seen.iter().all(|&c| c == 1));
    }

    #[test]
    fn total_bits_match_recount() {
        let f = fixture(5, 6, 10, 9, 4);
        let plans = pack_pdus(&f.stream, &f.mask, &params(13)).unwrap();
        let counts = transmitted_counts(&f.mask);
        for (class, n, b) in [
            (TokenClass::Intended, counts.intended, 16),
            (TokenClass::NonIntended, counts.non_intended, 9),
        ] {
            let pdus = n.div_ceil(13);
            assert_eq!(plans.get(class).total_bits(), n * b + pdus * 128);
        }
        let payload: u64 = TokenClass::ALL
            .iter()
            .map(|&c| plans.get(c).pdus.iter().map(|p| p.payload_bits).sum::<u64>())
            .sum();
        assert_eq!(payload, f.stream.token_bits());
    }

    #[test]
    fn no_loss_matches_lossless_decode() {
        let f = fixture(4, 8, 8, 10, 5);
        let plans = pack_pdus(&f.stream, &f.mask, &params(17)).unwrap();
        let out = transmit(&f.stream, &plans, &links(&f.stream, 0.0, 0.0), 9).unwrap();
        assert_eq!(out.reconstruction, decode(&f.stream, &f.mask).unwrap());
        assert!(!out.reference_lost);
        assert!(out.erased.iter().all(|&e| !e));
    }

    #[test]
    fn full_non_intended_loss_gives_reference() {
        let f = fixture(4, 8, 8, 10, 6);
        let plans = pack_pdus(&f.stream, &f.mask, &params(5)).unwrap();
        let out = transmit(&f.stream, &plans, &links(&f.stream, 0.0, 1.0), 1).unwrap();
        let dims = f.mask.dims();
        for k in dims.slice_len()..dims.len() {
            let expected = if f.mask.bits()[k] {
                f.grid.indices()[k]
            } else {
                f.grid.indices()[k % dims.slice_len()]
            };
            assert_eq!(out.reconstruction.indices()[k], expected);
            assert_eq!(out.erased[k], !f.mask.bits()[k]);
        }
        assert_eq!(out.totals.non_intended.pdus_lost, out.totals.non_intended.pdus);
    }

    #[test]
    fn lost_reference_falls_back_to_zero() {
        let f = fixture(3, 4, 4, 10, 7);
        let plans = pack_pdus(&f.stream, &f.mask, &params(512)).unwrap();
        let out = transmit(&f.stream, &plans, &links(&f.stream, 1.0, 0.0), 1).unwrap();
        assert!(out.reference_lost);
        assert!(out.reconstruction.slice(0).iter().all(|&z| z == 0));
        assert!(out.erased[..16].iter().all(|&e| e));
        let cfg = f.stream.config();
        for k in 16..f.mask.dims().len() {
            let z = out.reconstruction.indices()[k];
            assert_eq!(out.erased[k], f.mask.bits()[k]);
            if f.mask.bits()[k] {
                assert_eq!(z, 0);
            } else {
                let diff = i64::from(f.grid.indices()[k]) - i64::from(f.grid.indices()[k % 16]);
                let sym = crate::codec::differential_symbol(diff, cfg.clip_bound());
                assert_eq!(z, reconstruct_non_intended(0, sym, cfg.clip_bound(), 64000));
            }
        }
    }

    #[test]
    fn loss_fraction_near_probability() {
        let f = fixture(2, 100, 100, 10, 8);
        let mask = SemanticTokenMask::filled(f.mask.dims(), 0.5, false).unwrap();
        let stream = encode(&f.grid, &mask, f.stream.config()).unwrap();
        let plans = pack_pdus(&stream, &mask, &params(1)).unwrap();
        assert_eq!(plans.non_intended.pdus.len(), 10_000);
        let out = transmit(&stream, &plans, &links(&stream, 0.0, 0.1), 1).unwrap();
        let frac = out.totals.non_intended.pdus_lost as f64 / 10_000.0;
        assert!((frac - 0.1).abs() <= 0.01, "{frac}");
    }

    #[test]
    fn conservation_and_intended_exactness() {
        let f = fixture(5, 8, 8, 8, 9);
        let plans = pack_pdus(&f.stream, &f.mask, &params(6)).unwrap();
        let clean = decode(&f.stream, &f.mask).unwrap();
        for seed in 0..20 {
            let out = transmit(&f.stream, &plans, &links(&f.stream, 0.3, 0.3), seed).unwrap();
            let counts = transmitted_counts(&f.mask);
            for class in TokenClass::ALL {
                let t = out.totals.get(class);
                assert_eq!(t.tokens, counts.get(class));
                assert!(t.tokens_erased <= t.tokens);
            }
            for (k, &intended) in f.mask.bits().iter().enumerate().skip(64) {
                if intended && !out.erased[k] {
                    assert_eq!(out.reconstruction.indices()[k], clean.indices()[k]);
                }
            }
        }
    }

    #[test]
    fn resource_within_one_header_of_per_token_cost() {
        let f = fixture(6, 8, 8, 12, 10);
        let plans = pack_pdus(&f.stream, &f.mask, &params(20)).unwrap();
        let l = links(&f.stream, 0.0, 0.0);
        let out = transmit(&f.stream, &plans, &l, 0).unwrap();
        let counts = transmitted_counts(&f.mask);
        for class in TokenClass::ALL {
            let link = l.get(class);
            let (c, _) = crate::link::per_token_costs(
                link.bits_per_token,
                link.spectral_efficiency,
                20,
                128,
                link.bandwidth_hz,
            )
            .unwrap();
            let diff = out.totals.get(class).resource - counts.get(class) as f64 * c;
            let headroom = 128.0 / link.spectral_efficiency;
            assert!(diff > -1e-6 && diff < headroom, "{class}: {diff}");
        }
    }

    #[test]
    fn same_seed_same_outcome() {
        let f = fixture(4, 8, 8, 10, 11);
        let plans = pack_pdus(&f.stream, &f.mask, &params(3)).unwrap();
        let l = links(&f.stream, 0.2, 0.4);
        let a = transmit(&f.stream, &plans, &l, 77).unwrap();
        let b = transmit(&f.stream, &plans, &l, 77).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.report().to_json(), b.report().to_json());
        let c = transmit(&f.stream, &plans, &l, 78).unwrap();
        assert_ne!(a.lost, c.lost);
    }

    #[test]
    fn rejects_mismatched_links() {
        let f = fixture(2, 4, 4, 10, 12);
        let plans = pack_pdus(&f.stream, &f.mask, &params(3)).unwrap();
        let mut l = links(&f.stream, 0.0, 0.0);
        l.non_intended.bits_per_token = 12;
        assert!(transmit(&f.stream, &plans, &l, 0).is_err());
        let mut l = links(&f.stream, 0.0, 0.0);
        l.intended.class = TokenClass::NonIntended;
        assert!(transmit(&f.stream, &plans, &l, 0).is_err());
        let l = links(&f.stream, 1.5, 0.0);
        assert!(transmit(&f.stream, &plans, &l, 0).is_err());
        assert!(pack_pdus(&f.stream, &f.mask, &params(0)).is_err());
    }

    #[test]
    fn single_trial_matches_transmit() {
        let f = fixture(4, 8, 8, 10, 13);
        let plans = pack_pdus(&f.stream, &f.mask, &params(4)).unwrap();
        let l = links(&f.stream, 0.2, 0.3);
        let s = monte_carlo(&f.stream, &plans, &l, 1, 5).unwrap();
        let out = transmit(&f.stream, &plans, &l, 5).unwrap();
        assert_eq!(s.non_intended.mean_tokens_erased, out.totals.non_intended.tokens_erased as f64);
        assert_eq!(s.intended.mean_pdus_lost, out.totals.intended.pdus_lost as f64);
        assert_eq!(s.mean_delay_s, out.delay_s());
        assert_eq!(s.non_intended.std_tokens_erased, 0.0);
    }

    #[test]
    fn monte_carlo_is_reproducible_and_unbiased() {
        let f = fixture(3, 10, 10, 10, 14);
        let plans = pack_pdus(&f.stream, &f.mask, &params(2)).unwrap();
        let l = links(&f.stream, 0.0, 0.1);
        let a = monte_carlo(&f.stream, &plans, &l, 1000, 40).unwrap();
        let b = monte_carlo(&f.stream, &plans, &l, 1000, 40).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        let pdus = a.non_intended.pdus as f64;
        let sigma = (0.1 * 0.9 / (pdus * 1000.0)).sqrt();
        assert!((a.non_intended.loss_fraction - 0.1).abs() < 3.0 * sigma, "{}", a.non_intended.loss_fraction);
        assert_eq!(a.intended.mean_token_errors, 0.0);
        assert!(monte_carlo(&f.stream, &plans, &l, 0, 0).is_err());
    }
}
