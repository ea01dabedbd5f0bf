use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const DEFAULT_TABLE: &str = include_str!("../../data/bler_default.json");

/// Block error rate versus SNR, one curve per MCS name.
///
/// On disk this is a JSON object mapping each MCS name to a list of
/// `[snr_db, bler]` pairs with strictly increasing SNR.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BlerTable {
    curves: BTreeMap<String, Vec<(f64, f64)>>,
}

impl BlerTable {
    pub fn new(curves: BTreeMap<String, Vec<(f64, f64)>>) -> Result<Self> {
        let table = Self { curves };
        table.validate()?;
        Ok(table)
    }

    /// Logistic curves `1 / (1 + exp(1.5·(γ − γ50)))` sampled every 0.5 dB
    /// over −20..30 dB, with γ50 = −6, −4, 3, 11 dB for QPSK_1/3, QPSK_1/2,
    /// 16QAM_1/2 and 16QAM_3/4.
    pub fn default_table() -> Self {
        Self::from_json(DEFAULT_TABLE).expect("bundled BLER table is valid")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let table: Self = serde_json::from_str(text)?;
        table.validate()?;
        Ok(table)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("table serializes")
    }

    fn validate(&self) -> Result<()> {
        for (name, points) in &self.curves {
            if points.is_empty() {
                return Err(Error::InvalidParameter(format!("BLER curve {name:?} has no points")));
            }
            for &(snr, p) in points {
                if !snr.is_finite() || !(0.0..=1.0).contains(&p) {
                    return Err(Error::InvalidParameter(format!(
                        "BLER curve {name:?} has invalid point ({snr}, {p})"
                    )));
                }
            }
            if points.windows(2).any(|w| w[1].0 <= w[0].0) {
                return Err(Error::InvalidParameter(format!(
                    "BLER curve {name:?} must be strictly increasing in SNR"
                )));
            }
        }
        Ok(())
    }

    pub fn contains(&self, mcs: &str) -> bool {
        self.curves.contains_key(mcs)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.curves.keys().map(String::as_str)
    }

    /// BLER at `snr_db`, linearly interpolated between tabulated points and
    /// held at the end values outside the table.
    pub fn lookup(&self, mcs: &str, snr_db: f64) -> Result<f64> {
        let points = self
            .curves
            .get(mcs)
            .ok_or_else(|| Error::UnknownMcs(mcs.to_owned()))?;
        if !snr_db.is_finite() {
            return Err(Error::InvalidParameter(format!("SNR must be finite, got {snr_db}")));
        }
        let first = points[0];
        let last = points[points.len() - 1];
        if snr_db <= first.0 {
            return Ok(first.1);
        }
        if snr_db >= last.0 {
            return Ok(last.1);
        }
        let hi = points.partition_point(|&(s, _)| s <= snr_db);
        let (s0, p0) = points[hi - 1];
        let (s1, p1) = points[hi];
        if snr_db == s0 {
            return Ok(p0);
        }
        let frac = (snr_db - s0) / (s1 - s0);
        Ok((p0 + frac * (p1 - p0)).clamp(0.0, 1.0))
    }

    /// True when every curve is non-increasing in SNR.
    pub fn is_monotone(&self) -> bool {
        self.curves
            .values()
            .all(|pts| pts.windows(2).all(|w| w[1].1 <= w[0].1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_point() -> BlerTable {
        let mut curves = BTreeMap::new();
        curves.insert("X".to_owned(), vec![(0.0, 0.2), (2.0, 0.1), (4.0, 0.05)]);
        BlerTable::new(curves).unwrap()
    }

    #[test]
    fn exact_points_midpoints_and_clamps() {
        let t = two_point();
        assert_eq!(t.lookup("X", 2.0).unwrap(), 0.1);
        assert_eq!(t.lookup("X", 0.0).unwrap(), 0.2);
        assert!((t.lookup("X", 1.0).unwrap() - 0.15).abs() < 1e-15);
        assert_eq!(t.lookup("X", 10.0).unwrap(), 0.05);
        assert_eq!(t.lookup("X", -10.0).unwrap(), 0.2);
        assert!(matches!(t.lookup("Y", 1.0), Err(Error::UnknownMcs(_))));
        assert!(t.lookup("X", f64::NAN).is_err());
    }

    #[test]
    fn rejects_non_increasing_snr() {
        let err = BlerTable::from_json(r#"{"X": [[0.0, 0.5], [0.0, 0.4]]}"#).unwrap_err();
        assert!(err.to_string().contains("strictly increasing"));
        assert!(BlerTable::from_json(r#"{"X": [[0.0, 1.5]]}"#).is_err());
        assert!(BlerTable::from_json(r#"{"X": []}"#).is_err());
    }

    #[test]
    fn bundled_table_matches_logistic_model() {
        let t = BlerTable::default_table();
        assert!(t.is_monotone());
        for (name, mid) in [("QPSK_1/3", -6.0), ("QPSK_1/2", -4.0), ("16QAM_1/2", 3.0), ("16QAM_3/4", 11.0)] {
            for k in -40..=60 {
                let snr = f64::from(k) / 2.0;
                let model = 1.0 / (1.0 + (1.5 * (snr - mid)).exp());
                assert!((t.lookup(name, snr).unwrap() - model).abs() < 1e-12, "{name} at {snr}");
            }
            assert!((t.lookup(name, mid).unwrap() - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn json_round_trip() {
        let t = BlerTable::default_table();
        assert_eq!(BlerTable::from_json(&t.to_json()).unwrap(), t);
    }
}
