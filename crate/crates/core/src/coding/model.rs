//! Per-record zone model with fixed-point frequencies.

use crate::cost::ZoneProbTable;
use crate::protocol::Zone;

pub const FREQ_BITS: u32 = 16;
pub const FREQ_TOTAL: u32 = 1 << FREQ_BITS;

/// Coding order of the four zone symbols.
pub const SYMBOLS: [Zone; 4] = [Zone::Reject, Zone::ALambda, Zone::AMu, Zone::ANu];

pub fn symbol_index(zone: Zone) -> usize {
    match zone {
        Zone::Reject => 0,
        Zone::ALambda => 1,
        Zone::AMu => 2,
        Zone::ANu => 3,
    }
}

/// Zone distribution of one record given its `u`, in [`SYMBOLS`] order.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymbolModel {
    pub probs: [f64; 4],
    freqs: [u32; 4],
    cum: [u32; 5],
}

impl SymbolModel {
    pub fn for_u(u: f64) -> Self {
        Self::with_table(ZoneProbTable::global(), u)
    }

    pub fn with_table(table: &ZoneProbTable, u: f64) -> Self {
        let p = table.probs(u);
        Self::from_probs([p[3], p[0], p[1], p[2]])
    }

    /// Quantizes to `FREQ_TOTAL` counts: `1 + floor(p_i (T - 4))` each, with
    /// the rounding remainder assigned to the most probable symbol (lowest
    /// index on ties). Every symbol keeps at least one count.
    pub fn from_probs(probs: [f64; 4]) -> Self {
        let budget = (FREQ_TOTAL - 4) as f64;
        let mut freqs = [0u32; 4];
        for (f, p) in freqs.iter_mut().zip(probs) {
            *f = 1 + (p.clamp(0.0, 1.0) * budget).floor() as u32;
        }
        let mut imax = 0;
        for i in 1..4 {
            if probs[i] > probs[imax] {
                imax = i;
            }
        }
        let sum: u32 = freqs.iter().sum();
        freqs[imax] = freqs[imax] + FREQ_TOTAL - sum;
        let mut cum = [0u32; 5];
        for i in 0..4 {
            cum[i + 1] = cum[i] + freqs[i];
        }
        debug_assert_eq!(cum[4], FREQ_TOTAL);
        SymbolModel { probs, freqs, cum }
    }

    pub fn freqs(&self) -> [u32; 4] {
        self.freqs
    }

    /// `[lo, hi)` of symbol `s` in cumulative counts.
    pub fn range(&self, s: usize) -> (u32, u32) {
        (self.cum[s], self.cum[s + 1])
    }

    /// Symbol whose cumulative range contains `target`.
    pub fn find(&self, target: u32) -> usize {
        (0..4).find(|&s| target < self.cum[s + 1]).unwrap_or(3)
    }

    /// Code length of symbol `s` under the quantized model.
    pub fn bits(&self, s: usize) -> f64 {
        -(self.freqs[s] as f64 / FREQ_TOTAL as f64).log2()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lhv::U_MAX;

    #[test]
    fn probabilities_sum_to_one() {
        for i in 0..=200 {
            let u = (U_MAX * i as f64 / 200.0).min(U_MAX);
            let m = SymbolModel::for_u(u);
            assert!((m.probs.iter().sum::<f64>() - 1.0).abs() < 1e-6, "u={u}");
            assert_eq!(m.freqs().iter().sum::<u32>(), FREQ_TOTAL);
            assert!(m.freqs().iter().all(|&f| f >= 1));
        }
    }

    #[test]
    fn floor_keeps_impossible_symbols() {
        let m = SymbolModel::from_probs([0.0, 1.0, 0.0, 0.0]);
        assert_eq!(m.freqs(), [1, FREQ_TOTAL - 3, 1, 1]);
        assert_eq!(m.find(0), 0);
        assert_eq!(m.find(1), 1);
        assert_eq!(m.find(FREQ_TOTAL - 1), 3);
    }

    #[test]
    fn low_u_is_mostly_lambda() {
        let m = SymbolModel::for_u(0.01);
        assert!(m.probs[1] > 0.98);
        assert!(m.bits(1) < 0.03);
    }
}
