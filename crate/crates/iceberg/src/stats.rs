//! Confidence intervals and rate reports.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959963984540054;

/// 95% Wilson score interval for `k` events in `n` trials.
pub fn wilson_interval(k: u64, n: u64) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(Error::InvalidArgument("wilson interval needs n > 0".into()));
    }
    if k > n {
        return Err(Error::InvalidArgument(format!("k={k} exceeds n={n}")));
    }
    let (k, n) = (k as f64, n as f64);
    let z2 = Z95 * Z95;
    let phat = k / n;
    let denom = 1.0 + z2 / n;
    let centre = (phat + z2 / (2.0 * n)) / denom;
    let half = Z95 * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if k == 0.0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if k == n { 1.0 } else { (centre + half).min(1.0) };
    Ok((lo, hi))
}

/// Shot counts and per-round rates of one experiment point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatesReport {
    pub descriptor: String,
    pub code: String,
    pub p: f64,
    pub rounds: u32,
    pub shots: u64,
    pub accepted: u64,
    pub logical_errors: u64,
    pub p_l: f64,
    pub p_l_low: f64,
    pub p_l_high: f64,
    pub p_r: f64,
    pub p_r_low: f64,
    pub p_r_high: f64,
    pub seed: u64,
    pub recipe_hash: String,
}

pub const CSV_SCHEMA: &str = "# iceberg-rates v1";

impl RatesReport {
    pub fn new(
        descriptor: impl Into<String>,
        code: impl Into<String>,
        p: f64,
        rounds: u32,
        shots: u64,
        accepted: u64,
        logical_errors: u64,
        seed: u64,
    ) -> Self {
        let mut r = RatesReport {
            descriptor: descriptor.into(),
            code: code.into(),
            p,
            rounds: rounds.max(1),
            shots,
            accepted,
            logical_errors,
            p_l: 0.0,
            p_l_low: 0.0,
            p_l_high: 0.0,
            p_r: 0.0,
            p_r_low: 0.0,
            p_r_high: 0.0,
            seed,
            recipe_hash: String::new(),
        };
        r.recompute();
        r
    }

    pub fn rejected(&self) -> u64 {
        self.shots - self.accepted
    }

    fn recompute(&mut self) {
        let rounds = self.rounds as f64;
        if self.shots > 0 {
            let rej = self.rejected();
            self.p_r = rej as f64 / self.shots as f64 / rounds;
            let (lo, hi) = wilson_interval(rej, self.shots).unwrap();
            self.p_r_low = lo / rounds;
            self.p_r_high = hi / rounds;
        }
        if self.accepted > 0 {
            self.p_l = self.logical_errors as f64 / self.accepted as f64 / rounds;
            let (lo, hi) = wilson_interval(self.logical_errors, self.accepted).unwrap();
            self.p_l_low = lo / rounds;
            self.p_l_high = hi / rounds;
        } else {
            self.p_l = 0.0;
            self.p_l_low = 0.0;
            self.p_l_high = 1.0 / rounds;
        }
    }

    /// Combines two reports of the same point; associative and commutative.
    pub fn merge(&self, o: &RatesReport) -> RatesReport {
        let mut r = self.clone();
        r.shots += o.shots;
        r.accepted += o.accepted;
        r.logical_errors += o.logical_errors;
        r.recompute();
        r
    }

    pub fn with_recipe_hash(mut self, h: impl Into<String>) -> Self {
        self.recipe_hash = h.into();
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// CSV text with a schema comment, header row and one data row per report.
    pub fn to_csv(reports: &[RatesReport]) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in reports {
            w.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
        }
        if reports.is_empty() {
            w.write_record([
                "descriptor", "code", "p", "rounds", "shots", "accepted", "logical_errors", "p_l", "p_l_low",
                "p_l_high", "p_r", "p_r_low", "p_r_high", "seed", "recipe_hash",
            ])
            .map_err(|e| Error::Io(e.to_string()))?;
        }
        let body = String::from_utf8(w.into_inner().map_err(|e| Error::Io(e.to_string()))?)
            .map_err(|e| Error::Io(e.to_string()))?;
        Ok(format!("{CSV_SCHEMA}\n{body}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_edges() {
        assert_eq!(wilson_interval(0, 100).unwrap().0, 0.0);
        assert_eq!(wilson_interval(7, 7).unwrap().1, 1.0);
        assert!(wilson_interval(1, 0).is_err());
        let (lo, hi) = wilson_interval(50, 100).unwrap();
        assert!((hi - lo - 0.1916).abs() < 0.002);
        assert!(((lo + hi) / 2.0 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn merge_adds_counts() {
        let a = RatesReport::new("x", "c", 0.1, 10, 100, 90, 3, 1);
        let b = RatesReport::new("x", "c", 0.1, 10, 50, 50, 0, 1);
        let m = a.merge(&b);
        assert_eq!((m.shots, m.accepted, m.logical_errors), (150, 140, 3));
        assert!(m.p_r_low <= m.p_r && m.p_r <= m.p_r_high);
    }
}
