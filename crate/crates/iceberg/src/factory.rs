//! Code family: ququad mapping, concatenation onto the Iceberg code, paired
//! supports and the named catalog.

use crate::bits::Bits;
use crate::code::StabilizerCode;
use crate::error::{Error, Result};
use crate::pauli::{Letter, PauliString};

fn ps(s: &str) -> PauliString {
    PauliString::parse(s).expect("catalog literal")
}

fn ps_all(rows: &[&str]) -> Vec<PauliString> {
    rows.iter().map(|r| ps(r)).collect()
}

/// Image of `p` under `D_X` (`I→II, X→XI, Z→IX, Y→XX`).
pub fn d_x(p: &PauliString) -> PauliString {
    let n = p.len();
    let mut out = Bits::zeros(2 * n);
    for q in 0..n {
        let (a, b) = match p.get(q) {
            Letter::I => (false, false),
            Letter::X => (true, false),
            Letter::Z => (false, true),
            Letter::Y => (true, true),
        };
        out.set(2 * q, a);
        out.set(2 * q + 1, b);
    }
    PauliString::x_type(out)
}

/// Image of `p` under `D_Z` (`I→II, X→IZ, Z→ZI, Y→ZZ`).
pub fn d_z(p: &PauliString) -> PauliString {
    let n = p.len();
    let mut out = Bits::zeros(2 * n);
    for q in 0..n {
        let (a, b) = match p.get(q) {
            Letter::I => (false, false),
            Letter::X => (false, true),
            Letter::Z => (true, false),
            Letter::Y => (true, true),
        };
        out.set(2 * q, a);
        out.set(2 * q + 1, b);
    }
    PauliString::z_type(out)
}

/// Maps an `[[n,k,d]]` stabilizer code to the CSS `[[n,k,d]]_4` code on `2n` qubits.
///
/// Logical pair `i` of the source yields logical qubits `2i` and `2i+1`:
/// `(D_X(X_L), D_Z(Z_L))` and `(D_X(Z_L), D_Z(X_L))`.
pub fn map_to_ququad(code: &StabilizerCode) -> Result<StabilizerCode> {
    let gens = code.generators();
    let mut rows: Vec<PauliString> = gens.iter().map(d_x).collect();
    rows.extend(gens.iter().map(d_z));
    let mut lx = Vec::new();
    let mut lz = Vec::new();
    for i in 0..code.k {
        lx.push(d_x(&code.logical_x[i]));
        lz.push(d_z(&code.logical_z[i]));
        lx.push(d_x(&code.logical_z[i]));
        lz.push(d_z(&code.logical_x[i]));
    }
    let mut out = StabilizerCode::new(format!("{}q4", code.name), rows, lx, lz, code.d_known)?;
    out.ququad_grouping = Some((0..code.n).map(|q| (2 * q, 2 * q + 1)).collect());
    Ok(out)
}

fn embed(p: &PauliString, n: usize, offset: usize) -> PauliString {
    let mut out = PauliString::identity(n);
    for q in p.support().iter_ones() {
        out.set(offset + q, p.get(q));
    }
    out
}

/// Image of an outer Pauli through the inner code's logical operators.
fn lift(p: &PauliString, inner: &StabilizerCode, blocks: usize) -> Result<PauliString> {
    let ni = inner.n;
    let ki = inner.k;
    let mut acc = PauliString::identity(ni * blocks);
    for q in p.support().iter_ones() {
        let (b, j) = (q / ki, q % ki);
        let (x, z) = p.get(q).bits();
        if x {
            acc = acc.mul(&embed(&inner.logical_x[j], ni * blocks, b * ni))?;
        }
        if z {
            acc = acc.mul(&embed(&inner.logical_z[j], ni * blocks, b * ni))?;
        }
    }
    acc.sign = p.sign;
    Ok(acc)
}

/// Concatenates `outer` onto blocks of `inner`: outer qubit `q` is logical
/// `q % k_in` of block `q / k_in`. Generators list the inner stabilizers block by
/// block, followed by the images of the outer generators.
pub fn concat(outer: &StabilizerCode, inner: &StabilizerCode) -> Result<StabilizerCode> {
    if inner.k == 0 || !outer.n.is_multiple_of(inner.k) {
        return Err(Error::InvalidArgument(format!(
            "outer length {} is not a multiple of inner k={}",
            outer.n, inner.k
        )));
    }
    let blocks = outer.n / inner.k;
    let n = blocks * inner.n;
    let mut gens = Vec::new();
    for b in 0..blocks {
        for g in inner.generators() {
            gens.push(embed(g, n, b * inner.n));
        }
    }
    for g in outer.generators() {
        gens.push(lift(g, inner, blocks)?);
    }
    let lx = outer.logical_x.iter().map(|l| lift(l, inner, blocks)).collect::<Result<Vec<_>>>()?;
    let lz = outer.logical_z.iter().map(|l| lift(l, inner, blocks)).collect::<Result<Vec<_>>>()?;
    let d = match (outer.d_known, inner.d_known) {
        (Some(a), Some(b)) => Some(a * b),
        _ => None,
    };
    StabilizerCode::new(format!("{}o{}", outer.name, inner.name), gens, lx, lz, d)
}

/// Two interleaved copies of a CSS code: copy one on even qubits, copy two on odd.
pub fn double(code: &StabilizerCode) -> Result<StabilizerCode> {
    code.css_or_err()?;
    let n = 2 * code.n;
    let spread = |p: &PauliString, off: usize| {
        let mut out = PauliString::identity(n);
        for q in p.support().iter_ones() {
            out.set(2 * q + off, p.get(q));
        }
        out
    };
    let mut gens: Vec<PauliString> = code.generators().iter().map(|g| spread(g, 0)).collect();
    gens.extend(code.generators().iter().map(|g| spread(g, 1)));
    let mut lx: Vec<PauliString> = code.logical_x.iter().map(|l| spread(l, 0)).collect();
    lx.extend(code.logical_x.iter().map(|l| spread(l, 1)));
    let mut lz: Vec<PauliString> = code.logical_z.iter().map(|l| spread(l, 0)).collect();
    lz.extend(code.logical_z.iter().map(|l| spread(l, 1)));
    let mut out = StabilizerCode::new(format!("{}x2", code.name), gens, lx, lz, code.d_known)?;
    out.ququad_grouping = Some((0..code.n).map(|q| (2 * q, 2 * q + 1)).collect());
    Ok(out)
}

/// Ququad mapping followed by concatenation onto `[[4,2,2]]`; yields a self-dual
/// `[[4n,2k,2d]]` code.
pub fn concat_iceberg_m1(code: &StabilizerCode) -> Result<StabilizerCode> {
    concat(&map_to_ququad(code)?, &c422())
}

/// The outer CSS code imposed separately across the first and the second logical
/// qubits of `n` Iceberg blocks.
pub fn concat_iceberg_m2(outer: &StabilizerCode) -> Result<StabilizerCode> {
    concat(&double(outer)?, &c422())
}

/// A set of generators grouped into pairs with common support.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairedSupportPartition {
    pub pairs: Vec<(PauliString, PauliString)>,
}

impl PairedSupportPartition {
    pub fn is_valid(&self) -> bool {
        self.pairs.iter().all(|(p, q)| paired_support(p, q))
    }
}

/// `P`, `Q` and `P·Q` all have the same support.
pub fn paired_support(p: &PauliString, q: &PauliString) -> bool {
    let s = p.support();
    s == q.support() && p.mul(q).map(|r| r.support() == s).unwrap_or(false) && !p.is_identity()
}

const PAIR_SEARCH_CAP: usize = 1 << 16;

/// Partitions a generating set of the stabilizer group into paired-support pairs.
/// Displayed rows are tried first, then products of at most two generators.
pub fn paired_support_partition(code: &StabilizerCode) -> Result<Option<PairedSupportPartition>> {
    let gens = code.generators();
    if gens.len() % 2 == 1 {
        return Ok(None);
    }
    if let Some(p) = greedy_pairs(gens, gens.len() / 2, &code.stabilizer_echelon().rows)? {
        return Ok(Some(p));
    }
    let mut cands: Vec<PauliString> = gens.to_vec();
    for i in 0..gens.len() {
        for j in i + 1..gens.len() {
            cands.push(gens[i].mul(&gens[j])?);
        }
    }
    if cands.len() * cands.len() > PAIR_SEARCH_CAP {
        return Err(Error::BudgetExceeded { needed: (cands.len() * cands.len()).ilog2() as usize + 1, budget: 16 });
    }
    greedy_pairs(&cands, gens.len() / 2, &code.stabilizer_echelon().rows)
}

fn greedy_pairs(cands: &[PauliString], want: usize, basis: &[Bits]) -> Result<Option<PairedSupportPartition>> {
    let mut ech = crate::bits::Echelon::empty();
    let mut pairs = Vec::new();
    let mut used = vec![false; cands.len()];
    for i in 0..cands.len() {
        if used[i] {
            continue;
        }
        for j in i + 1..cands.len() {
            if used[j] || !paired_support(&cands[i], &cands[j]) {
                continue;
            }
            let mut trial = ech.clone();
            if trial.insert(&cands[i].symplectic_vector()) && trial.insert(&cands[j].symplectic_vector()) {
                ech = trial;
                used[i] = true;
                used[j] = true;
                pairs.push((cands[i].clone(), cands[j].clone()));
                break;
            }
        }
    }
    if pairs.len() == want && basis.iter().all(|b| ech.contains(b)) {
        Ok(Some(PairedSupportPartition { pairs }))
    } else {
        Ok(None)
    }
}

/// The `[[4,2,2]]` Iceberg code.
pub fn c422() -> StabilizerCode {
    StabilizerCode::new(
        "c422",
        ps_all(&["XXXX", "ZZZZ"]),
        ps_all(&["XXII", "XIXI"]),
        ps_all(&["IZIZ", "IIZZ"]),
        Some(2),
    )
    .expect("c422")
}

/// The `[[6,4,2]]` Iceberg code with `X_i = X_0 X_i`, `Z_i = Z_i Z_5`.
pub fn c642() -> StabilizerCode {
    let lx = (1..5).map(|i| ps(&(0..6).map(|q| if q == 0 || q == i { 'X' } else { 'I' }).collect::<String>())).collect();
    let lz = (1..5).map(|i| ps(&(0..6).map(|q| if q == 5 || q == i { 'Z' } else { 'I' }).collect::<String>())).collect();
    StabilizerCode::new("c642", ps_all(&["XXXXXX", "ZZZZZZ"]), lx, lz, Some(2)).expect("c642")
}

/// The self-dual `[[3,1,2]]_4` code on three qubit pairs.
pub fn c312q4() -> StabilizerCode {
    let mut c = StabilizerCode::new(
        "c312q4",
        ps_all(&["XIIXXX", "XXXIIX", "ZIIZZZ", "ZZZIIZ"]),
        ps_all(&["XXIIXI", "IXIIXX"]),
        ps_all(&["ZZIIZI", "IZIIZZ"]),
        Some(2),
    )
    .expect("c312q4");
    c.ququad_grouping = Some(vec![(0, 1), (2, 3), (4, 5)]);
    c
}

/// The cyclic `[[5,1,3]]` code.
pub fn c513() -> StabilizerCode {
    StabilizerCode::new(
        "c513",
        ps_all(&["XZZXI", "ZYYZI", "IXZZX", "IZYYZ"]),
        ps_all(&["XYXII"]),
        ps_all(&["ZXZII"]),
        Some(3),
    )
    .expect("c513")
}

/// An `[[8,2,3]]` GF(4)-linear code.
pub fn c823() -> StabilizerCode {
    StabilizerCode::new(
        "c823",
        ps_all(&["XXXXIIII", "ZZZZIIII", "IIIIXXXX", "IIIIZZZZ", "IXYZIXYZ", "IZXYIZXY"]),
        ps_all(&["IIIIIXZY", "IXZYIIII"]),
        ps_all(&["IIIIIZYX", "IZYXIIII"]),
        Some(3),
    )
    .expect("c823")
}

pub const CATALOG: &[&str] =
    &["c422", "c642", "c312q4", "c513", "c823", "c1224", "c1644", "c2026", "c3246", "c3628", "c4848"];

/// A catalog code together with its outer code over `[[4,2,2]]` blocks, when it has one.
#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub code: StabilizerCode,
    pub outer: Option<StabilizerCode>,
    pub expected: (usize, usize, usize),
}

fn tower(name: &'static str, outer: StabilizerCode, d: usize) -> Result<CatalogEntry> {
    let code = concat(&outer, &c422())?.with_name(name).with_distance(d);
    let expected = (code.n, code.k, d);
    Ok(CatalogEntry { name, code, outer: Some(outer), expected })
}

fn leaf(name: &'static str, code: StabilizerCode) -> CatalogEntry {
    let expected = (code.n, code.k, code.d_known.unwrap_or(0));
    CatalogEntry { name, code, outer: None, expected }
}

/// Builds the named catalog code and its construction data.
pub fn catalog_entry(name: &str) -> Result<CatalogEntry> {
    Ok(match name {
        "c422" => leaf("c422", c422()),
        "c642" => leaf("c642", c642()),
        "c312q4" => leaf("c312q4", c312q4()),
        "c513" => leaf("c513", c513()),
        "c823" => leaf("c823", c823()),
        "c1224" => tower("c1224", c312q4(), 4)?,
        "c1644" => tower("c1644", double(&c422())?, 4)?,
        "c2026" => tower("c2026", map_to_ququad(&c513())?, 6)?,
        "c3246" => tower("c3246", map_to_ququad(&c823())?, 6)?,
        "c3628" => tower("c3628", concat(&c312q4(), &c312q4())?.with_distance(4), 8)?,
        "c4848" => tower("c4848", double(&catalog("c1224")?)?, 8)?,
        other => return Err(Error::UnknownCode(other.to_string())),
    })
}

pub fn catalog(name: &str) -> Result<StabilizerCode> {
    Ok(catalog_entry(name)?.code)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ququad_first_row() {
        let q = map_to_ququad(&c513()).unwrap();
        assert_eq!(q.generators()[0].letters(), "XIIXIXXIII");
        assert_eq!(q.n, 10);
        assert!(q.is_css());
    }

    #[test]
    fn c1224_matches_table() {
        let c = catalog("c1224").unwrap();
        let rows: Vec<String> = c.generators().iter().map(|g| g.letters()).collect();
        assert_eq!(rows[6], "XXIIXIXIIXXI");
        assert_eq!(rows[9], "IZZIIZIZIIZZ");
        assert_eq!(c.logical_x[0].letters(), "IXXIIIIIXXII");
        assert_eq!(c.logical_z[1].letters(), "IIZZIIIIIZZI");
    }

    #[test]
    fn pairs_of_513() {
        let p = paired_support_partition(&c513()).unwrap().unwrap();
        assert_eq!(p.pairs[0].0.letters(), "XZZXI");
        assert_eq!(p.pairs[0].1.letters(), "ZYYZI");
        assert!(p.is_valid());
    }

    #[test]
    fn unknown_name() {
        assert!(matches!(catalog("bogus"), Err(Error::UnknownCode(_))));
    }
}
