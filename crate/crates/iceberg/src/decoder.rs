//! Minimum-weight lookup-table decoding with ambiguity rejection, exact
//! low-weight fault counts and code-capacity sampling.

use crate::bits::binomial;
use crate::code::{PauliKind, StabilizerCode};
use crate::error::{Error, Result};
use crate::stats::RatesReport;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;

/// Marker for an ambiguous or unreachable syndrome.
pub const REJECT: u8 = 0xFF;

/// Largest number of enumerated error patterns allowed while building a table.
pub const TABLE_BUDGET: u128 = 100_000_000;

const DENSE_BITS: usize = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Entry {
    class: u8,
    weight: u8,
    corr: u64,
}

const EMPTY: Entry = Entry { class: REJECT, weight: u8::MAX, corr: 0 };

#[derive(Clone, Debug)]
enum Store {
    Dense(Vec<Entry>),
    Sparse(HashMap<u64, Entry>),
}

/// Outcome of a table lookup.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Decoded {
    /// Correction support (bit `q` for qubit `q`) and its logical class.
    Correct { correction: u64, class: u8 },
    Reject,
}

/// Syndrome to minimum-weight correction map for X- or Z-type errors.
///
/// An X-type table reads syndromes against the Z checks and classes against the
/// logical Z operators, and symmetrically for Z-type errors.
#[derive(Clone, Debug)]
pub struct DecoderTable {
    pub code_name: String,
    pub code_hash: [u8; 32],
    pub error_type: PauliKind,
    pub weight_cap: usize,
    pub n: usize,
    pub syndrome_bits: usize,
    pub logical_bits: usize,
    /// Syndrome contribution of a flip on each qubit.
    pub syndrome_cols: Vec<u64>,
    /// Logical-class contribution of a flip on each qubit.
    pub class_cols: Vec<u8>,
    store: Store,
}

fn columns(rows: &[crate::bits::Bits], n: usize) -> Vec<u64> {
    (0..n)
        .map(|q| rows.iter().enumerate().fold(0u64, |a, (i, r)| a | ((r.get(q) as u64) << i)))
        .collect()
}

impl DecoderTable {
    /// Builds the table by enumerating errors of increasing weight up to
    /// `weight_cap` (all weights when `None`, stopping once every syndrome is
    /// reached or the budget would be exceeded).
    pub fn build(code: &StabilizerCode, error_type: PauliKind, weight_cap: Option<usize>) -> Result<DecoderTable> {
        code.css_or_err()?;
        let n = code.n;
        if n > 64 {
            return Err(Error::Unsupported(format!("lookup tables need n <= 64, got {n}")));
        }
        let checks = code.checks(error_type.dual());
        let logicals = code.logical_supports(error_type.dual());
        let syndrome_bits = checks.nrows();
        if syndrome_bits > 63 || logicals.len() > 7 {
            return Err(Error::Unsupported("too many checks for a lookup table".into()));
        }
        let syndrome_cols = columns(checks.rows(), n);
        let class_cols: Vec<u8> = columns(&logicals, n).into_iter().map(|c| c as u8).collect();
        let reachable = 1u64 << checks.rank();
        let explicit = weight_cap.is_some();
        let cap = weight_cap.unwrap_or(n).min(n);
        let mut store = if syndrome_bits <= DENSE_BITS {
            Store::Dense(vec![EMPTY; 1 << syndrome_bits])
        } else {
            Store::Sparse(HashMap::new())
        };
        let mut filled: u64 = 0;
        let mut enumerated: u128 = 0;
        let mut reached = 0;
        for w in 0..=cap {
            let cost = binomial(n, w);
            if enumerated + cost > TABLE_BUDGET {
                if explicit {
                    return Err(Error::BudgetExceeded {
                        needed: (enumerated + cost).ilog2() as usize + 1,
                        budget: TABLE_BUDGET.ilog2() as usize,
                    });
                }
                break;
            }
            enumerated += cost;
            let mut visit = |s: u64, c: u8, e: u64| {
                let slot = match &mut store {
                    Store::Dense(v) => &mut v[s as usize],
                    Store::Sparse(m) => m.entry(s).or_insert(EMPTY),
                };
                if slot.weight == u8::MAX {
                    *slot = Entry { class: c, weight: w as u8, corr: e };
                    filled += 1;
                } else if slot.weight == w as u8 && slot.class != REJECT && slot.class != c {
                    slot.class = REJECT;
                }
            };
            for_each_subset(n, w, &syndrome_cols, &class_cols, &mut visit);
            reached = w;
            if !explicit && filled >= reachable {
                break;
            }
        }
        Ok(DecoderTable {
            code_name: code.name.clone(),
            code_hash: code.content_hash(),
            error_type,
            weight_cap: reached,
            n,
            syndrome_bits,
            logical_bits: logicals.len(),
            syndrome_cols,
            class_cols,
            store,
        })
    }

    pub fn syndrome_of(&self, err: u64) -> (u64, u8) {
        let mut s = 0;
        let mut c = 0;
        let mut e = err;
        while e != 0 {
            let q = e.trailing_zeros() as usize;
            s ^= self.syndrome_cols[q];
            c ^= self.class_cols[q];
            e &= e - 1;
        }
        (s, c)
    }

    fn entry(&self, s: u64) -> Entry {
        match &self.store {
            Store::Dense(v) => v.get(s as usize).copied().unwrap_or(EMPTY),
            Store::Sparse(m) => m.get(&s).copied().unwrap_or(EMPTY),
        }
    }

    pub fn decode(&self, syndrome: u64) -> Decoded {
        let e = self.entry(syndrome);
        if e.class == REJECT {
            Decoded::Reject
        } else {
            Decoded::Correct { correction: e.corr, class: e.class }
        }
    }

    /// Logical class of the correction, or [`REJECT`].
    #[inline]
    pub fn class_of(&self, syndrome: u64) -> u8 {
        self.entry(syndrome).class
    }

    /// Weight of the lightest error with this syndrome, when enumerated.
    pub fn weight_of(&self, syndrome: u64) -> Option<u8> {
        match self.entry(syndrome).weight {
            u8::MAX => None,
            w => Some(w),
        }
    }

    /// Residual logical flip after decoding an error pattern, or `None` on rejection.
    pub fn residual(&self, err: u64) -> Option<u8> {
        let (s, c) = self.syndrome_of(err);
        match self.class_of(s) {
            REJECT => None,
            k => Some(k ^ c),
        }
    }

    /// Sorted `(syndrome, class, weight, correction)` rows for accepted syndromes.
    pub fn rows(&self) -> Vec<(u64, u8, u8, u64)> {
        let mut out: Vec<(u64, u8, u8, u64)> = match &self.store {
            Store::Dense(v) => v
                .iter()
                .enumerate()
                .filter(|(_, e)| e.class != REJECT)
                .map(|(s, e)| (s as u64, e.class, e.weight, e.corr))
                .collect(),
            Store::Sparse(m) => {
                m.iter().filter(|(_, e)| e.class != REJECT).map(|(&s, e)| (s, e.class, e.weight, e.corr)).collect()
            }
        };
        out.sort_unstable();
        out
    }

    /// Binary export: magic, code hash, error type, weight cap, row count, then
    /// little-endian `(syndrome u64, class u8, correction u64)` rows sorted by syndrome.
    pub fn to_bytes(&self) -> Vec<u8> {
        let rows = self.rows();
        let mut out = Vec::with_capacity(48 + rows.len() * 17);
        out.extend_from_slice(b"ICBT0001");
        out.extend_from_slice(&self.code_hash);
        out.push(match self.error_type {
            PauliKind::X => b'X',
            PauliKind::Z => b'Z',
        });
        out.push(self.weight_cap as u8);
        out.extend_from_slice(&(rows.len() as u64).to_le_bytes());
        for (s, c, _, e) in rows {
            out.extend_from_slice(&s.to_le_bytes());
            out.push(c);
            out.extend_from_slice(&e.to_le_bytes());
        }
        out
    }
}

/// Calls `f(syndrome, class, error)` for every `w`-subset of `0..n`.
fn for_each_subset(n: usize, w: usize, scol: &[u64], ccol: &[u8], f: &mut impl FnMut(u64, u8, u64)) {
    fn rec(
        start: usize,
        left: usize,
        n: usize,
        s: u64,
        c: u8,
        e: u64,
        scol: &[u64],
        ccol: &[u8],
        f: &mut impl FnMut(u64, u8, u64),
    ) {
        if left == 0 {
            f(s, c, e);
            return;
        }
        for q in start..=n - left {
            rec(q + 1, left - 1, n, s ^ scol[q], c ^ ccol[q], e | 1 << q, scol, ccol, f);
        }
    }
    if w <= n {
        rec(0, w, n, 0, 0, 0, scol, ccol, f);
    }
}

/// Per-weight counts of flip patterns that decode to a logical error or are rejected.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct FaultCountReport {
    pub n_logical: Vec<u64>,
    pub n_reject: Vec<u64>,
}

/// Classifies every flip pattern of weight `<= max_weight`.
pub fn enumerate_fault_counts(table: &DecoderTable, max_weight: usize) -> Result<FaultCountReport> {
    let n = table.n;
    let total: u128 = (0..=max_weight).map(|w| binomial(n, w)).sum();
    if total > 20 * TABLE_BUDGET {
        return Err(Error::BudgetExceeded { needed: total.ilog2() as usize + 1, budget: (20 * TABLE_BUDGET).ilog2() as usize });
    }
    let mut n_logical = vec![0u64; max_weight + 1];
    let mut n_reject = vec![0u64; max_weight + 1];
    for w in 0..=max_weight.min(n) {
        let (mut lg, mut rj) = (0u64, 0u64);
        for_each_subset(n, w, &table.syndrome_cols, &table.class_cols, &mut |s, c, _| match table.class_of(s) {
            REJECT => rj += 1,
            k if k != c => lg += 1,
            _ => {}
        });
        n_logical[w] = lg;
        n_reject[w] = rj;
    }
    Ok(FaultCountReport { n_logical, n_reject })
}

/// Leading coefficients of the code-capacity series: `c` at weight `d/2+1`
/// (logical error) and `c'` at weight `⌈d/2⌉` (rejection).
pub fn exact_series_check(table: &DecoderTable, d: usize, max_weight: usize) -> Result<(FaultCountReport, u64, u64)> {
    let counts = enumerate_fault_counts(table, max_weight.max(d / 2 + 1))?;
    let c = counts.n_logical[d / 2 + 1];
    let cp = counts.n_reject[d.div_ceil(2)];
    Ok((counts, c, cp))
}

/// Truncated series `(p_L, p_R)` from exact counts: each weight-`w` pattern has
/// probability `p^w (1-p)^(n-w)`.
pub fn series_rates(counts: &FaultCountReport, n: usize, p: f64) -> (f64, f64) {
    let mut pl = 0.0;
    let mut pr = 0.0;
    for w in 0..counts.n_logical.len() {
        let pw = p.powi(w as i32) * (1.0 - p).powi((n - w) as i32);
        pl += counts.n_logical[w] as f64 * pw;
        pr += counts.n_reject[w] as f64 * pw;
    }
    (pl / (1.0 - pr), pr)
}

/// Independent flips at rate `p` on every qubit, decoded by `table`.
pub fn code_capacity_sample(table: &DecoderTable, p: f64, shots: u64, seed: u64) -> Result<RatesReport> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("p={p} outside [0,1]")));
    }
    let shards = crate::parallel::shard_sizes(shots);
    let run = |(i, count): (usize, u64)| -> (u64, u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(crate::parallel::derive_seed(seed, i as u64));
        let (mut acc, mut err) = (0u64, 0u64);
        for _ in 0..count {
            let mut e = 0u64;
            for q in 0..table.n {
                if rng.random::<f64>() < p {
                    e |= 1 << q;
                }
            }
            if let Some(r) = table.residual(e) {
                acc += 1;
                if r != 0 {
                    err += 1;
                }
            }
        }
        (acc, err)
    };
    let parts = crate::parallel::map_shards(shards, run);
    let (acc, err) = parts.into_iter().fold((0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    let kind = match table.error_type {
        PauliKind::X => "X",
        PauliKind::Z => "Z",
    };
    Ok(RatesReport::new(format!("code-capacity {kind}"), table.code_name.clone(), p, 1, shots, acc, err, seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factory::catalog;

    #[test]
    fn c422_tables() {
        let t = DecoderTable::build(&catalog("c422").unwrap(), PauliKind::X, None).unwrap();
        assert_eq!(t.decode(0), Decoded::Correct { correction: 0, class: 0 });
        assert_eq!(t.decode(1), Decoded::Reject);
        let f = enumerate_fault_counts(&t, 4).unwrap();
        assert_eq!(f.n_reject[1], 4);
        assert_eq!(f.n_logical[2], 6);
        assert_eq!((f.n_logical[0], f.n_reject[0]), (0, 0));
    }

    #[test]
    fn explicit_cap_budget() {
        let c = catalog("c4848").unwrap();
        assert!(matches!(DecoderTable::build(&c, PauliKind::X, Some(12)), Err(Error::BudgetExceeded { .. })));
    }
}
