use serde::{Deserialize, Serialize};

/// A modulation and coding scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McsScheme {
    /// Table key, e.g. `QPSK_1/2`.
    pub name: String,
    /// Bits per modulation symbol.
    pub bits_per_symbol: u32,
    pub code_rate: f64,
    /// Below this SNR the scheme is not offered.
    pub activation_snr_db: f64,
}

impl McsScheme {
    pub fn new(name: &str, bits_per_symbol: u32, code_rate: f64, activation_snr_db: f64) -> Self {
        Self {
            name: name.to_owned(),
            bits_per_symbol,
            code_rate,
            activation_snr_db,
        }
    }

    pub fn is_active(&self, snr_db: f64) -> bool {
        snr_db >= self.activation_snr_db
    }

    /// QPSK activates at −5 dB, 16QAM at 4 dB.
    pub fn default_catalog() -> Vec<McsScheme> {
        vec![
            McsScheme::new("QPSK_1/3", 2, 1.0 / 3.0, -5.0),
            McsScheme::new("QPSK_1/2", 2, 0.5, -5.0),
            McsScheme::new("16QAM_1/2", 4, 0.5, 4.0),
            McsScheme::new("16QAM_3/4", 4, 0.75, 4.0),
        ]
    }
}
