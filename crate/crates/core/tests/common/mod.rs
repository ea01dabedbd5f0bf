#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tokencom::link::{BlerTable, LinkProfile};
use tokencom::token::{GridGeometry, SemanticTokenMask, TokenDims, TokenGrid};

/// A random codec instance: grid, mask and non-intended precision.
pub struct CodecCase {
    pub grid: TokenGrid,
    pub mask: SemanticTokenMask,
    pub delta: u32,
}

pub fn random_case(rng: &mut ChaCha8Rng) -> CodecCase {
    let n: u32 = match rng.gen_range(0..4) {
        0 => rng.gen_range(3..=16),
        1 => 1 << rng.gen_range(2..=15),
        2 => 64000,
        _ => rng.gen_range(3..=64000),
    };
    let (t, h, w) = (rng.gen_range(1..=4), rng.gen_range(1..=16), rng.gen_range(1..=16));
    let geometry = GridGeometry::new(n, t, h, w, 1, 1).unwrap();
    let dims = geometry.dims();
    let slice = dims.slice_len();
    let near = rng.gen_bool(0.5);
    let mut indices: Vec<u32> = (0..slice).map(|_| rng.gen_range(0..n)).collect();
    for k in slice..dims.len() {
        let z = if near {
            let r = i64::from(indices[k % slice]);
            (r + rng.gen_range(-40..=40)).clamp(0, i64::from(n) - 1) as u32
        } else {
            rng.gen_range(0..n)
        };
        indices.push(z);
    }
    let density = rng.gen_range(0.0..=1.0);
    let bits = (0..dims.len()).map(|_| rng.gen_bool(density)).collect();
    let full = full_bits(n);
    CodecCase {
        grid: TokenGrid::new(geometry, indices).unwrap(),
        mask: SemanticTokenMask::new(dims, 0.5, bits).unwrap(),
        delta: rng.gen_range(2..=full),
    }
}

pub fn full_bits(n: u32) -> u32 {
    let mut b = 0;
    while (1u64 << b) < u64::from(n) {
        b += 1;
    }
    b
}

/// Per-token symbol stream for `τ ≥ 1`: `(value, width)` pairs.
pub fn oracle_symbols(grid: &TokenGrid, mask: &SemanticTokenMask, delta: u32) -> Vec<(u32, u32)> {
    let n = grid.geometry().codebook_size;
    let full = full_bits(n);
    let q = (1i64 << (delta - 1)) - 1;
    let dims = grid.dims();
    let mut out = Vec::new();
    for tau in 1..dims.t {
        for i in 0..dims.h {
            for j in 0..dims.w {
                let k = dims.flat(tau, i, j);
                let z = i64::from(grid.get(tau, i, j));
                if mask.bits()[k] {
                    out.push((z as u32, full));
                } else {
                    let r = i64::from(grid.get(0, i, j));
                    let d = (z - r).max(-q).min(q);
                    out.push(((d + q) as u32, delta));
                }
            }
        }
    }
    out
}

/// MSB-first packing, zero padded.
pub fn oracle_pack(symbols: &[(u32, u32)]) -> (Vec<u8>, u64) {
    let mut bits = Vec::new();
    for &(v, w) in symbols {
        for b in (0..w).rev() {
            bits.push((v >> b) & 1 == 1);
        }
    }
    let mut bytes = vec![0u8; bits.len().div_ceil(8)];
    for (i, &b) in bits.iter().enumerate() {
        if b {
            bytes[i / 8] |= 0x80 >> (i % 8);
        }
    }
    (bytes, bits.len() as u64)
}

/// What the decoder must produce from an unmodified stream.
pub fn oracle_reconstruction(grid: &TokenGrid, mask: &SemanticTokenMask, delta: u32) -> Vec<u32> {
    let n = i64::from(grid.geometry().codebook_size);
    let q = (1i64 << (delta - 1)) - 1;
    let dims = grid.dims();
    let mut out = Vec::with_capacity(dims.len());
    for tau in 0..dims.t {
        for i in 0..dims.h {
            for j in 0..dims.w {
                let k = dims.flat(tau, i, j);
                let z = i64::from(grid.get(tau, i, j));
                let r = i64::from(grid.get(0, i, j));
                let v = if tau == 0 || mask.bits()[k] {
                    z
                } else {
                    let sym = (z - r).max(-q).min(q) + q;
                    (r + sym - q).max(0).min(n - 1)
                };
                out.push(v as u32);
            }
        }
    }
    out
}

/// Literal payload size: every intended token at `b_full`, every other at
/// `b_delta`.
pub fn oracle_payload_bits(mask: &SemanticTokenMask, full: u32, delta: u32) -> u64 {
    mask.bits()
        .iter()
        .map(|&b| u64::from(if b { full } else { delta }))
        .sum()
}

pub fn dims_of(mask: &SemanticTokenMask) -> TokenDims {
    mask.dims()
}

/// One enumerated pair from the brute-force optimizer.
#[derive(Debug, Clone, PartialEq)]
pub struct BrutePick {
    pub s_mcs: String,
    pub s_bits: u32,
    pub n_mcs: String,
    pub n_bits: u32,
    pub objective: f64,
    pub distortion: f64,
    pub delay: f64,
}

struct Opt {
    mcs: String,
    bits: u32,
    bler: f64,
    cost: f64,
    delay: f64,
    dist: f64,
}

fn interp(points: &[(f64, f64)], x: f64) -> f64 {
    if x <= points[0].0 {
        return points[0].1;
    }
    if x >= points[points.len() - 1].0 {
        return points[points.len() - 1].1;
    }
    for w in points.windows(2) {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        if x >= x0 && x < x1 {
            let frac = (x - x0) / (x1 - x0);
            return y0 + frac * (y1 - y0);
        }
    }
    unreachable!()
}

fn options(p: &LinkProfile, curves: &std::collections::BTreeMap<String, Vec<(f64, f64)>>, intended: bool) -> Vec<Opt> {
    let names = if intended { &p.intended_mcs } else { &p.non_intended_mcs };
    let bit_set = if intended { vec![full_bits(p.codebook_size)] } else { p.non_intended_bits.clone() };
    let (pdu, dm) = if intended {
        (p.pdu.intended, p.distortion.intended)
    } else {
        (p.pdu.non_intended, p.distortion.non_intended)
    };
    let mut out = Vec::new();
    for &b in &bit_set {
        for name in names {
            let m = p.mcs_catalog.iter().find(|m| &m.name == name).unwrap();
            if p.snr_db < m.activation_snr_db {
                continue;
            }
            let g = p.overhead_factor * f64::from(m.bits_per_symbol) * m.code_rate;
            let l = f64::from(pdu.tokens);
            let cost = (l * f64::from(b) + f64::from(pdu.header_bits)) / (l * g);
            out.push(Opt {
                mcs: name.clone(),
                bits: b,
                bler: interp(&curves[name], p.snr_db),
                cost,
                delay: cost / p.bandwidth_hz,
                dist: dm.alpha * (-dm.beta * f64::from(b)).exp(),
            });
        }
    }
    out
}

/// Naive exhaustive search. `None` when no pair is feasible.
pub fn brute_force(p: &LinkProfile, table: &BlerTable, ns: u64, nn: u64) -> Option<BrutePick> {
    let curves: std::collections::BTreeMap<String, Vec<(f64, f64)>> = serde_json::from_str(&table.to_json()).unwrap();
    let s = options(p, &curves, true);
    let n = options(p, &curves, false);
    if s.is_empty() || n.is_empty() {
        return None;
    }
    let (ns, nn) = (ns as f64, nn as f64);
    let lo = |v: &[Opt], f: &dyn Fn(&Opt) -> f64| v.iter().map(f).fold(f64::INFINITY, f64::min);
    let hi = |v: &[Opt], f: &dyn Fn(&Opt) -> f64| v.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
    let d_min = ns * lo(&s, &|o| o.dist) + nn * lo(&n, &|o| o.dist);
    let d_max = ns * hi(&s, &|o| o.dist) + nn * hi(&n, &|o| o.dist);
    let t_min = ns * lo(&s, &|o| o.delay) + nn * lo(&n, &|o| o.delay);
    let t_max = ns * hi(&s, &|o| o.delay) + nn * hi(&n, &|o| o.delay);
    let r_max = p.resource_fraction * p.bandwidth_hz * p.block_duration_s;
    let cap_n = p.non_intended_bler_cap.cap_at(p.snr_db);

    let mut best: Option<BrutePick> = None;
    for a in &s {
        for b in &n {
            if a.bler > p.intended_bler_cap || b.bler > cap_n {
                continue;
            }
            if ns * a.cost + nn * b.cost > r_max {
                continue;
            }
            let d = ns * a.dist + nn * b.dist;
            let t = ns * a.delay + nn * b.delay;
            let j = p.weights.distortion * (d - d_min) / (d_max - d_min + 1e-12)
                + p.weights.delay * (t - t_min) / (t_max - t_min + 1e-12);
            let pick = BrutePick {
                s_mcs: a.mcs.clone(),
                s_bits: a.bits,
                n_mcs: b.mcs.clone(),
                n_bits: b.bits,
                objective: j,
                distortion: d,
                delay: t,
            };
            let better = match &best {
                None => true,
                Some(cur) => {
                    let key = |x: &BrutePick| {
                        (
                            x.objective,
                            x.distortion,
                            x.delay,
                            format!("{}@B{}", x.s_mcs, x.s_bits),
                            format!("{}@B{}", x.n_mcs, x.n_bits),
                        )
                    };
                    let (k1, k2) = (key(&pick), key(cur));
                    k1.partial_cmp(&k2) == Some(std::cmp::Ordering::Less)
                }
            };
            if better {
                best = Some(pick);
            }
        }
    }
    best
}

/// A random but valid link profile.
pub fn random_profile(rng: &mut ChaCha8Rng) -> LinkProfile {
    let mut p = LinkProfile::default();
    p.snr_db = rng.gen_range(-8.0..14.0);
    p.bandwidth_hz = rng.gen_range(100e3..1e6);
    p.overhead_factor = rng.gen_range(0.5..0.95);
    p.resource_fraction = rng.gen_range(0.1..=1.0);
    p.block_duration_s = rng.gen_range(0.02..0.2);
    let mut bits: Vec<u32> = (10..=16).filter(|_| rng.gen_bool(0.7)).collect();
    if bits.is_empty() {
        bits.push(rng.gen_range(10..=16));
    }
    p.non_intended_bits = bits;
    p.pdu.intended.tokens = rng.gen_range(1..=1024);
    p.pdu.non_intended.tokens = rng.gen_range(1..=1024);
    p.pdu.intended.header_bits = rng.gen_range(0..=256);
    p.pdu.non_intended.header_bits = rng.gen_range(0..=256);
    p.intended_bler_cap = rng.gen_range(0.001..0.2);
    p.distortion.intended.alpha = rng.gen_range(0.5..2.0);
    p.distortion.non_intended.beta = rng.gen_range(0.05..0.4);
    let wd = rng.gen_range(0.0..=1.0);
    p.weights.distortion = wd;
    p.weights.delay = 1.0 - wd;
    p
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
