//! Encoder synthesis for CSS states of concatenated codes, verification by
//! transversal comparison with ancilla blocks, and exhaustive fault injection.
//!
//! A block of an inner code carries `k` logical qubits. A transversal CNOT from
//! block `A` to block `B` wired through an automorphism `π` of the inner code
//! (`CNOT(A[q] → B[π(q)])`) adds `M·x_A` to the logical bits of `B`, where `M`
//! is the action of `π` on the logical X operators. Sums of such rounds realize
//! any block-to-block copying pattern required by Gaussian elimination on the
//! outer code.

use crate::bits::{BitMatrix, Bits};
use crate::circuit::{inject_noise, Builder, Circuit, Key, NoiseModel};
use crate::code::{solve_combination, PauliKind, StabilizerCode};
use crate::pauli::PauliString;
use crate::decoder::{DecoderTable, REJECT};
use crate::effects::{basis_items, propagate, value_bits};
use crate::error::{Error, Result};
use crate::factory::{c422, catalog_entry, concat, double};
use crate::tableau::simulate_stabilizer;
use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt::Write as _;
use std::sync::{Arc, Mutex, OnceLock};

/// A `k×k` matrix over GF(2) with `k ≤ 4`; bit `j*k + i` is row `j`, column `i`.
pub type Mat = u16;

pub fn mat_get(m: Mat, k: usize, j: usize, i: usize) -> bool {
    m >> (j * k + i) & 1 == 1
}

pub fn mat_identity(k: usize) -> Mat {
    (0..k).fold(0, |m, i| m | 1 << (i * k + i))
}

pub fn mat_mul(a: Mat, b: Mat, k: usize) -> Mat {
    let mut out = 0;
    for j in 0..k {
        for i in 0..k {
            let v = (0..k).fold(false, |acc, l| acc ^ (mat_get(a, k, j, l) & mat_get(b, k, l, i)));
            if v {
                out |= 1 << (j * k + i);
            }
        }
    }
    out
}

/// An automorphism of a code and the matrix it induces on the logical X operators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Wiring {
    pub perm: Vec<usize>,
    pub mat: Mat,
}

/// Column `i` holds the logical X content of `π(X_i)`.
pub fn wiring_matrix(code: &StabilizerCode, perm: &[usize]) -> Result<Mat> {
    if code.k > 4 {
        return Err(Error::Unsupported("wirings need k <= 4".into()));
    }
    if !code.is_automorphism(perm)? {
        return Err(Error::NotAnAutomorphism);
    }
    let lx = code.logical_supports(PauliKind::X);
    let mut rows = lx.clone();
    rows.extend(code.hx().rows().iter().cloned());
    let mut m = 0;
    for (i, l) in lx.iter().enumerate() {
        let img = Bits::from_indices(code.n, l.iter_ones().map(|q| perm[q]));
        let c = solve_combination(&rows, &img).ok_or(Error::NotAnAutomorphism)?;
        for j in 0..code.k {
            if c.get(j) {
                m |= 1 << (j * code.k + i);
            }
        }
    }
    Ok(m)
}

fn compose(a: &[usize], b: &[usize]) -> Vec<usize> {
    // First `a`, then `b`.
    a.iter().map(|&q| b[q]).collect()
}

fn next_permutation(v: &mut [usize]) -> bool {
    let n = v.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    let mut p: Vec<usize> = (0..n).collect();
    let mut out = vec![p.clone()];
    while next_permutation(&mut p) {
        out.push(p.clone());
    }
    out
}

fn candidate_automorphisms(code: &StabilizerCode) -> Vec<Vec<usize>> {
    let n = code.n;
    if n <= 8 {
        return all_permutations(n);
    }
    if !n.is_multiple_of(4) {
        return vec![(0..n).collect()];
    }
    let nb = n / 4;
    if (6..=8).contains(&nb) && n <= 64 {
        return uniform_block_automorphisms(code);
    }
    let block_perms = if nb <= 5 {
        all_permutations(nb)
    } else {
        let mut v = vec![(0..nb).collect::<Vec<_>>()];
        for a in 0..nb {
            for b in a + 1..nb {
                let mut p: Vec<usize> = (0..nb).collect();
                p.swap(a, b);
                v.push(p);
            }
        }
        v.push((0..nb).map(|i| (i + 1) % nb).collect());
        v
    };
    let sigmas = all_permutations(4);
    let mut out = Vec::new();
    let id: Vec<usize> = vec![0, 1, 2, 3];
    for bp in &block_perms {
        let base = |sig: &[&Vec<usize>]| -> Vec<usize> { (0..n).map(|q| 4 * bp[q / 4] + sig[q / 4][q % 4]).collect() };
        for s in &sigmas {
            out.push(base(&vec![s; nb]));
            for blk in 0..nb {
                let mut sig = vec![&id; nb];
                sig[blk] = s;
                out.push(base(&sig));
            }
        }
    }
    out
}

fn to_word(b: &Bits) -> u64 {
    b.iter_ones().fold(0, |a, q| a | 1 << q)
}

/// Reduced GF(2) basis over words of at most 64 bits.
struct WordSpace(Vec<u64>);

impl WordSpace {
    fn new(rows: impl IntoIterator<Item = u64>) -> Self {
        let mut basis: Vec<u64> = Vec::new();
        for r in rows {
            let r = basis.iter().fold(r, |r, &b| r.min(r ^ b));
            if r != 0 {
                basis.push(r);
                basis.sort_unstable_by(|a, b| b.cmp(a));
            }
        }
        WordSpace(basis)
    }

    fn contains(&self, r: u64) -> bool {
        self.0.iter().fold(r, |r, &b| r.min(r ^ b)) == 0
    }
}

/// Every block permutation combined with one relabeling applied to all blocks,
/// kept when it maps both check spaces into themselves.
fn uniform_block_automorphisms(code: &StabilizerCode) -> Vec<Vec<usize>> {
    let n = code.n;
    let nb = n / 4;
    let spaces: Vec<(Vec<u64>, WordSpace)> = [PauliKind::X, PauliKind::Z]
        .into_iter()
        .map(|kind| {
            let rows: Vec<u64> = code.checks(kind).rows().iter().map(to_word).collect();
            let space = WordSpace::new(rows.iter().copied());
            (rows, space)
        })
        .collect();
    let sigmas = all_permutations(4);
    let mut out = Vec::new();
    let mut bp: Vec<usize> = (0..nb).collect();
    loop {
        for s in &sigmas {
            let perm: Vec<usize> = (0..n).map(|q| 4 * bp[q / 4] + s[q % 4]).collect();
            let maps = |r: u64| (0..n).filter(|&q| r >> q & 1 == 1).fold(0u64, |a, q| a | 1 << perm[q]);
            if spaces.iter().all(|(rows, sp)| rows.iter().all(|&r| sp.contains(maps(r)))) {
                out.push(perm);
            }
        }
        if !next_permutation(&mut bp) {
            break;
        }
    }
    out
}

/// Wirings realizing every logical matrix reachable by the automorphisms found
/// among block permutations and per-block relabelings; one wiring per matrix.
pub fn wirings(code: &StabilizerCode) -> Result<Arc<Vec<Wiring>>> {
    static CACHE: OnceLock<Mutex<HashMap<[u8; 32], Arc<Vec<Wiring>>>>> = OnceLock::new();
    let key = code.content_hash();
    if let Some(w) = CACHE.get_or_init(Default::default).lock().unwrap().get(&key) {
        return Ok(w.clone());
    }
    code.css_or_err()?;
    let k = code.k;
    let gens: Vec<Wiring> = candidate_automorphisms(code)
        .into_iter()
        .filter_map(|p| wiring_matrix(code, &p).ok().map(|mat| Wiring { perm: p, mat }))
        .collect();
    let id = Wiring { perm: (0..code.n).collect(), mat: mat_identity(k) };
    let mut seen: HashMap<Mat, Wiring> = HashMap::new();
    seen.insert(id.mat, id.clone());
    let mut queue = VecDeque::from([id]);
    let mut distinct: Vec<&Wiring> = Vec::new();
    let mut gen_mats = HashSet::new();
    for g in &gens {
        if gen_mats.insert(g.mat) {
            distinct.push(g);
        }
    }
    while let Some(w) = queue.pop_front() {
        for g in &distinct {
            let mat = mat_mul(g.mat, w.mat, k);
            if let std::collections::hash_map::Entry::Vacant(e) = seen.entry(mat) {
                let nw = Wiring { perm: compose(&w.perm, &g.perm), mat };
                e.insert(nw.clone());
                queue.push_back(nw);
            }
        }
    }
    let mut out: Vec<Wiring> = seen.into_values().collect();
    out.sort_by_key(|w| w.mat);
    let out = Arc::new(out);
    CACHE.get_or_init(Default::default).lock().unwrap().insert(key, out.clone());
    Ok(out)
}

/// Shortest list of wirings whose matrices sum to `target`, using at most
/// `max_terms` rounds.
pub fn decompose(target: Mat, set: &[Wiring], max_terms: usize) -> Option<Vec<usize>> {
    if target == 0 {
        return Some(vec![]);
    }
    let index: HashMap<Mat, usize> = set.iter().enumerate().map(|(i, w)| (w.mat, i)).collect();
    if let Some(&i) = index.get(&target) {
        return Some(vec![i]);
    }
    // Sums of two, with a witness pair for each.
    let mut pairs: HashMap<Mat, (usize, usize)> = HashMap::new();
    for a in 0..set.len() {
        for b in a + 1..set.len() {
            pairs.entry(set[a].mat ^ set[b].mat).or_insert((a, b));
        }
    }
    if max_terms >= 2 {
        if let Some(&(a, b)) = pairs.get(&target) {
            return Some(vec![a, b]);
        }
    }
    if max_terms >= 3 {
        for (c, w) in set.iter().enumerate() {
            if let Some(&(a, b)) = pairs.get(&(target ^ w.mat)) {
                if a != c && b != c {
                    return Some(vec![a, b, c]);
                }
            }
        }
    }
    if max_terms >= 4 {
        for (&m, &(a, b)) in &pairs {
            if let Some(&(c, d)) = pairs.get(&(target ^ m)) {
                return Some(vec![a, b, c, d]);
            }
        }
    }
    None
}

/// X-stabilizer generators of the state with logical `i` in `|+⟩` when bit `i`
/// of `plus` is set and in `|0⟩` otherwise.
pub fn state_xgens(code: &StabilizerCode, plus: u32) -> Vec<Bits> {
    let mut rows: Vec<Bits> = code.hx().rows().to_vec();
    for (i, l) in code.logical_supports(PauliKind::X).into_iter().enumerate() {
        if plus >> i & 1 == 1 {
            rows.push(l);
        }
    }
    rows
}

pub fn all_plus(k: usize) -> u32 {
    (1u32 << k) - 1
}

/// Plain Steane encoder: pivots of the reduced X generators start in `|+⟩`, the
/// rest in `|0⟩`, and each row is copied from its pivot by CNOTs.
pub fn steane_state(b: &mut Builder, qs: &[usize], xgens: &[Bits]) -> Vec<usize> {
    let n = qs.len();
    let e = BitMatrix::from_rows(n, xgens.to_vec()).row_reduce();
    let mut is_pivot = vec![false; n];
    for &p in &e.pivots {
        is_pivot[p] = true;
    }
    for q in 0..n {
        if is_pivot[q] {
            b.prep_x(qs[q]);
        } else {
            b.prep_z(qs[q]);
        }
    }
    for (row, &p) in e.rows.iter().zip(&e.pivots) {
        for c in row.iter_ones().filter(|&c| c != p) {
            b.cnot(qs[p], qs[c]);
        }
    }
    e.pivots
}

/// How the blocks of a code are produced.
#[derive(Clone, Debug)]
pub enum Source {
    /// Plain Steane encoding.
    Leaf(StabilizerCode),
    /// Outer code over blocks of an inner source.
    Tower {
        code: StabilizerCode,
        outer: StabilizerCode,
        inner: Box<Source>,
        /// Inner blocks come from verified preparations in their own retry groups.
        verified_inner: bool,
    },
}

impl Source {
    /// Source for check ancillas: the same construction without inner verification.
    pub fn unverified(&self) -> Source {
        match self {
            Source::Tower { code, outer, inner, .. } => Source::Tower {
                code: code.clone(),
                outer: outer.clone(),
                inner: inner.clone(),
                verified_inner: false,
            },
            leaf => leaf.clone(),
        }
    }

    pub fn code(&self) -> &StabilizerCode {
        match self {
            Source::Leaf(c) => c,
            Source::Tower { code, .. } => code,
        }
    }

    /// One-stage construction of a catalog code.
    pub fn one_stage(name: &str) -> Result<Source> {
        let e = catalog_entry(name)?;
        Ok(match e.outer {
            None => Source::Leaf(e.code),
            Some(outer) => Source::Tower { code: e.code, outer, inner: Box::new(Source::Leaf(c422())), verified_inner: false },
        })
    }

    /// Two-stage construction: `c3628` over verified `c1224` blocks and `c4848`
    /// over verified `c1644` blocks.
    pub fn two_stage(name: &str) -> Result<Source> {
        let (inner_name, outer) = match name {
            "c3628" => ("c1224", crate::factory::c312q4()),
            "c4848" => ("c1644", interleaved_outer_4848()?),
            _ => return Err(Error::Synthesis(format!("no two-stage construction for {name}"))),
        };
        let code = crate::factory::catalog(name)?;
        let inner = Source::one_stage(inner_name)?;
        let built = concat(&outer, inner.code())?;
        if !same_code(&built, &code) {
            return Err(Error::Synthesis(format!("two-stage construction of {name} differs from the catalog code")));
        }
        Ok(Source::Tower { code, outer, inner: Box::new(inner), verified_inner: true })
    }

    pub fn is_two_stage(&self) -> bool {
        matches!(self, Source::Tower { verified_inner: true, .. })
    }
}

/// Same stabilizer group and the same logical operators modulo stabilizers.
pub fn same_code(a: &StabilizerCode, b: &StabilizerCode) -> bool {
    if a.n != b.n || a.k != b.k || !a.stabilizer_matrix().same_row_space(&b.stabilizer_matrix()) {
        return false;
    }
    a.logical_x.iter().zip(&b.logical_x).chain(a.logical_z.iter().zip(&b.logical_z)).all(|(p, q)| match p.mul(q) {
        Ok(r) => b.in_stabilizer_group(&r),
        Err(_) => false,
    })
}

/// Outer code over three `c1644` blocks whose concatenation is `c4848`: the
/// doubled `c312q4` with the four logical slots of each block reordered.
pub fn interleaved_outer_4848() -> Result<StabilizerCode> {
    let target = crate::factory::catalog("c4848")?;
    let inner = crate::factory::catalog("c1644")?;
    let base = double(&crate::factory::c312q4())?;
    for tau in all_permutations(4) {
        let perm: Vec<usize> = (0..base.n).map(|q| 4 * (q / 4) + tau[q % 4]).collect();
        let outer = base.permute(&perm)?;
        if same_code(&concat(&outer, &inner)?, &target) {
            return Ok(outer.with_name("c312q4x2"));
        }
    }
    Err(Error::Synthesis("no interleaving of the doubled outer code matches c4848".into()))
}

/// Gaussian-elimination plan of a tower encoder.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EncoderRecipe {
    /// Outer qubits started in `|+⟩`.
    pub pivots: Vec<usize>,
    /// `(source block, target block, wiring permutation)` per transversal round.
    pub rounds: Vec<(usize, usize, Vec<usize>)>,
}

/// Plans the block rounds for the outer state `plus` of a tower.
pub fn plan_tower(outer: &StabilizerCode, inner: &StabilizerCode, plus: u32) -> Result<EncoderRecipe> {
    let k = inner.k;
    let nb = outer.n / k;
    if !outer.n.is_multiple_of(k) {
        return Err(Error::Synthesis("outer length is not a multiple of the inner k".into()));
    }
    let ws = wirings(inner)?;
    let e = BitMatrix::from_rows(outer.n, state_xgens(outer, plus)).row_reduce();
    let mut mats: HashMap<(usize, usize), Mat> = HashMap::new();
    for (row, &p) in e.rows.iter().zip(&e.pivots) {
        for c in row.iter_ones().filter(|&c| c != p) {
            let (a, i) = (p / k, p % k);
            let (bb, j) = (c / k, c % k);
            if a == bb {
                return Err(Error::Synthesis("pivot row reaches its own block".into()));
            }
            *mats.entry((a, bb)).or_default() ^= 1 << (j * k + i);
        }
    }
    let mut keys: Vec<(usize, usize)> = mats.keys().copied().collect();
    keys.sort_unstable();
    let mut rounds = Vec::new();
    for (a, bb) in keys {
        let terms = decompose(mats[&(a, bb)], &ws, 4)
            .ok_or_else(|| Error::Synthesis(format!("block copy {a}->{bb} is not a sum of realizable wirings")))?;
        for t in terms {
            rounds.push((a, bb, ws[t].perm.clone()));
        }
    }
    debug_assert!(rounds.iter().all(|r| r.0 < nb && r.1 < nb));
    Ok(EncoderRecipe { pivots: e.pivots, rounds })
}

fn block_mask(pivots: &[usize], k: usize, blk: usize) -> u32 {
    pivots.iter().filter(|&&p| p / k == blk).fold(0, |m, &p| m | 1 << (p % k))
}

/// Qubits of scratch space needed by the verified inner preparations of `src`.
pub fn scratch_need(src: &Source) -> Result<usize> {
    match src {
        Source::Leaf(_) => Ok(0),
        Source::Tower { inner, verified_inner: true, .. } => {
            let f = verified_fragment(inner, 0)?;
            Ok(f.circuit.num_qubits - inner.code().n)
        }
        Source::Tower { inner, .. } => scratch_need(inner),
    }
}

/// Appends an unverified encoder of state `plus` on `qs`; verified inner
/// blocks use `scratch` for their ancillas.
pub fn encode(b: &mut Builder, qs: &[usize], src: &Source, plus: u32, scratch: &[usize]) -> Result<()> {
    match src {
        Source::Leaf(code) => {
            steane_state(b, qs, &state_xgens(code, plus));
            Ok(())
        }
        Source::Tower { outer, inner, verified_inner, .. } => {
            let ic = inner.code();
            let (k, ni) = (ic.k, ic.n);
            let plan = plan_tower(outer, ic, plus)?;
            for blk in 0..outer.n / k {
                let bq = &qs[blk * ni..(blk + 1) * ni];
                let mask = block_mask(&plan.pivots, k, blk);
                if *verified_inner {
                    let f = verified_fragment(inner, mask)?;
                    let mut map = bq.to_vec();
                    map.extend_from_slice(&scratch[..f.circuit.num_qubits - ni]);
                    b.embed(&f.circuit, &map, Some((&format!("{}-block", ic.name), true)));
                } else {
                    encode(b, bq, inner, mask, scratch)?;
                }
            }
            for (a, t, perm) in &plan.rounds {
                for q in 0..ni {
                    b.cnot(qs[a * ni + q], qs[t * ni + perm[q]]);
                }
            }
            Ok(())
        }
    }
}

/// One comparison with a fresh ancilla block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Check {
    /// Copy X errors into an ancilla block and measure it in the Z basis.
    X,
    /// Copy Z errors into an ancilla block and measure it in the X basis.
    Z,
}

/// A check whose ancilla may first be checked itself for the error type that
/// would leak back into the target (`guarded`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct Step {
    pub check: Check,
    pub guarded: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct VerificationRecipe {
    pub steps: Vec<Step>,
}

impl VerificationRecipe {
    /// Parses labels such as `Z,X*`; `none` is the empty recipe.
    pub fn parse(label: &str) -> Result<Self> {
        if label == "none" || label.is_empty() {
            return Ok(VerificationRecipe::default());
        }
        let steps = label
            .split(',')
            .map(|t| {
                let guarded = t.ends_with('*');
                let check = match t.trim_end_matches('*') {
                    "X" => Check::X,
                    "Z" => Check::Z,
                    other => return Err(Error::InvalidArgument(format!("unknown check `{other}`"))),
                };
                Ok(Step { check, guarded })
            })
            .collect::<Result<_>>()?;
        Ok(VerificationRecipe { steps })
    }

    pub fn label(&self) -> String {
        if self.steps.is_empty() {
            return "none".into();
        }
        let parts: Vec<String> = self
            .steps
            .iter()
            .map(|s| format!("{}{}", if s.check == Check::X { 'X' } else { 'Z' }, if s.guarded { "*" } else { "" }))
            .collect();
        parts.join(",")
    }

    /// Ancilla blocks used.
    pub fn blocks(&self) -> usize {
        self.steps.iter().map(|s| 1 + s.guarded as usize).sum()
    }
}

/// A self-contained circuit whose first `outputs` qubits carry the result.
#[derive(Clone, Debug, PartialEq)]
pub struct Fragment {
    pub name: String,
    pub circuit: Circuit,
    pub outputs: usize,
    pub encoder: EncoderRecipe,
    pub recipe: VerificationRecipe,
}

impl Fragment {
    /// Circuit text preceded by a recipe header.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "# fragment {}", self.name).unwrap();
        writeln!(s, "# pivots {:?}", self.encoder.pivots).unwrap();
        for (a, t, p) in &self.encoder.rounds {
            writeln!(s, "# round {a} -> {t} wiring {p:?}").unwrap();
        }
        writeln!(s, "# checks {}", self.recipe.label()).unwrap();
        s.push_str(&self.circuit.to_text());
        s
    }
}

/// Combinations of `keys` whose noiseless parity is deterministic, as abort checks.
pub fn deterministic_checks(b: &Builder, keys: &[Key]) -> Result<Vec<Vec<Key>>> {
    if keys.is_empty() {
        return Ok(vec![]);
    }
    let run = simulate_stabilizer(&b.clone().finish())?;
    let width = run.tableau.coins_used() + 1;
    let rows: Vec<Bits> = keys
        .iter()
        .map(|&k| {
            let w = run.outcome(k).words();
            Bits::from_indices(width - 1, (1..width).filter(|&c| w[c / 64] >> (c % 64) & 1 == 1).map(|c| c - 1))
        })
        .collect();
    let kernel = BitMatrix::from_rows(width - 1, rows).transpose().kernel();
    let reduced = if kernel.is_empty() { vec![] } else { BitMatrix::from_rows(keys.len(), kernel).row_reduce().rows };
    Ok(reduced.into_iter().map(|v| v.iter_ones().map(|i| keys[i]).collect()).collect())
}

fn check_once(b: &mut Builder, check: Check, target: &[usize], anc: &[usize]) -> Vec<Key> {
    match check {
        Check::X => {
            b.transversal_cnot(target, anc);
            anc.iter().map(|&q| b.meas_z(q)).collect()
        }
        Check::Z => {
            b.transversal_cnot(anc, target);
            anc.iter().map(|&q| b.meas_x(q)).collect()
        }
    }
}

/// Ancilla state for a check on a block in state `target`. A known product
/// state is copied so the logical CNOT acts trivially; otherwise the ancilla
/// is an eigenstate that absorbs the logical CNOT.
fn ancilla_state(check: Check, target: Option<u32>, k: usize) -> u32 {
    match (target, check) {
        (Some(s), _) => s,
        (None, Check::X) => all_plus(k),
        (None, Check::Z) => 0,
    }
}

/// Appends the steps of `recipe` on the block `target`, whose logical state
/// is the product state `state` or unknown (`None`). `ancillas` holds one
/// block per ancilla in [`VerificationRecipe::blocks`] order.
pub fn append_checks(
    b: &mut Builder,
    src: &Source,
    target: &[usize],
    state: Option<u32>,
    recipe: &VerificationRecipe,
    ancillas: &[Vec<usize>],
    scratch: &[usize],
) -> Result<Vec<Key>> {
    let k = src.code().k;
    let other = |c: Check| if c == Check::X { Check::Z } else { Check::X };
    let mut keys = Vec::new();
    let mut blocks = ancillas.iter();
    let src = &src.unverified();
    for st in &recipe.steps {
        let anc = blocks.next().ok_or_else(|| Error::Synthesis("missing ancilla block".into()))?;
        let s = ancilla_state(st.check, state, k);
        encode(b, anc, src, s, scratch)?;
        if st.guarded {
            let guard = blocks.next().ok_or_else(|| Error::Synthesis("missing ancilla block".into()))?;
            let g = other(st.check);
            encode(b, guard, src, s, scratch)?;
            keys.extend(check_once(b, g, anc, guard));
        }
        keys.extend(check_once(b, st.check, target, anc));
    }
    Ok(keys)
}

/// Builds the preparation of state `plus` followed by the checks of `recipe`.
pub fn build_fragment(src: &Source, plus: u32, recipe: &VerificationRecipe) -> Result<Fragment> {
    let code = src.code();
    let n = code.n;
    let mut b = Builder::new();
    let out = b.alloc("out", n);
    let ancillas: Vec<Vec<usize>> = (0..recipe.blocks()).map(|i| b.alloc(format!("check{i}"), n)).collect();
    let need = scratch_need(src)?;
    let scratch = b.alloc("scratch", need);
    encode(&mut b, &out, src, plus, &scratch)?;
    let keys = append_checks(&mut b, src, &out, Some(plus), recipe, &ancillas, &scratch)?;
    for c in deterministic_checks(&b, &keys)? {
        b.abort_if(c);
    }
    let encoder = match src {
        Source::Leaf(c) => {
            let e = BitMatrix::from_rows(n, state_xgens(c, plus)).row_reduce();
            EncoderRecipe { pivots: e.pivots, rounds: vec![] }
        }
        Source::Tower { outer, inner, .. } => plan_tower(outer, inner.code(), plus)?,
    };
    Ok(Fragment {
        name: format!("{}{}-{}", code.name, if src.is_two_stage() { "-2stage" } else { "" }, state_label(plus, code.k)),
        circuit: b.finish(),
        outputs: n,
        encoder,
        recipe: recipe.clone(),
    })
}

pub fn state_label(plus: u32, k: usize) -> String {
    (0..k).map(|i| if plus >> i & 1 == 1 { '+' } else { '0' }).collect()
}

/// Verification candidates in order of increasing cost.
pub fn recipe_candidates() -> Vec<VerificationRecipe> {
    ["none", "X", "Z", "X,Z", "Z,X", "Z,X*", "X,Z*", "X*,Z*", "Z*,X*", "Z,X*,Z*", "X,Z*,X*"]
        .into_iter()
        .map(|l| VerificationRecipe::parse(l).expect("valid label"))
        .collect()
}

/// A recipe is selected when no single fault leaves an accepted residual of
/// weight two or more on the output block.
pub fn selection_passes(f: &Fragment, code: &StabilizerCode, plus: u32) -> Result<bool> {
    let judge = ResidualJudge::with_threshold(code, plus, false, 2)?;
    Ok(inject_with(&f.circuit, &(0..code.n).collect::<Vec<_>>(), &judge, false)?.order1_bad == 0)
}

/// Lightest and next passing recipes for the state `plus` of `src`.
pub fn passing_recipes(src: &Source, plus: u32, want: usize) -> Result<Vec<(VerificationRecipe, Fragment)>> {
    let mut out = Vec::new();
    for r in recipe_candidates() {
        let f = build_fragment(src, plus, &r)?;
        if selection_passes(&f, src.code(), plus)? {
            out.push((r, f));
            if out.len() == want {
                break;
            }
        }
    }
    if out.is_empty() {
        return Err(Error::Synthesis(format!("no verification recipe passes single-fault injection for {}", src.code().name)));
    }
    Ok(out)
}

/// The shipped verified preparation of state `plus`: the lightest recipe that
/// passes exhaustive single-fault injection in the sense of [`selection_passes`].
pub fn verified_fragment(src: &Source, plus: u32) -> Result<Arc<Fragment>> {
    static CACHE: OnceLock<Mutex<HashMap<(String, bool, u32), Arc<Fragment>>>> = OnceLock::new();
    let key = (src.code().name.clone(), src.is_two_stage(), plus);
    if let Some(f) = CACHE.get_or_init(Default::default).lock().unwrap().get(&key) {
        return Ok(f.clone());
    }
    let (_, f) = passing_recipes(src, plus, 1)?.remove(0);
    let f = Arc::new(f);
    CACHE.get_or_init(Default::default).lock().unwrap().insert(key, f.clone());
    Ok(f)
}

/// The two verification variants of a preparation: (a) the lightest passing
/// recipe and (b) the lightest passing recipe whose every step is guarded.
pub fn recipe_variants(src: &Source, plus: u32) -> Result<(Fragment, Fragment)> {
    let mut light = None;
    for r in recipe_candidates() {
        let all_guarded = !r.steps.is_empty() && r.steps.iter().all(|s| s.guarded);
        if light.is_some() && !all_guarded {
            continue;
        }
        let f = build_fragment(src, plus, &r)?;
        if !selection_passes(&f, src.code(), plus)? {
            continue;
        }
        match light.take() {
            None if !all_guarded => light = Some(f),
            None => return Ok((f.clone(), f)),
            Some(a) => return Ok((a, f)),
        }
    }
    Err(Error::Synthesis(format!("no guarded recipe passes for {}", src.code().name)))
}

/// Verified `(|00⟩+|11⟩)^{⊗k}` on two blocks: `|+…+⟩` and `|0…0⟩` encoders, a
/// transversal CNOT, then the checks of both product-state recipes.
pub fn bell_fragment(src: &Source) -> Result<Arc<Fragment>> {
    static CACHE: OnceLock<Mutex<HashMap<(String, bool), Arc<Fragment>>>> = OnceLock::new();
    let key = (src.code().name.clone(), src.is_two_stage());
    if let Some(f) = CACHE.get_or_init(Default::default).lock().unwrap().get(&key) {
        return Ok(f.clone());
    }
    let code = src.code();
    let (n, k) = (code.n, code.k);
    let ra = verified_fragment(src, all_plus(k))?.recipe.clone();
    let rb = verified_fragment(src, 0)?.recipe.clone();
    let mut b = Builder::new();
    let a = b.alloc("a", n);
    let bb = b.alloc("b", n);
    let anc_a: Vec<Vec<usize>> = (0..ra.blocks()).map(|i| b.alloc(format!("check-a{i}"), n)).collect();
    let anc_b: Vec<Vec<usize>> = (0..rb.blocks()).map(|i| b.alloc(format!("check-b{i}"), n)).collect();
    let scratch = b.alloc("scratch", scratch_need(src)?);
    encode(&mut b, &a, src, all_plus(k), &scratch)?;
    encode(&mut b, &bb, src, 0, &scratch)?;
    b.transversal_cnot(&a, &bb);
    let mut keys = append_checks(&mut b, src, &a, None, &ra, &anc_a, &scratch)?;
    keys.extend(append_checks(&mut b, src, &bb, None, &rb, &anc_b, &scratch)?);
    for c in deterministic_checks(&b, &keys)? {
        b.abort_if(c);
    }
    let recipe = VerificationRecipe { steps: ra.steps.iter().chain(&rb.steps).copied().collect() };
    let f = Arc::new(Fragment {
        name: format!("{}{}-bell", code.name, if src.is_two_stage() { "-2stage" } else { "" }),
        circuit: b.finish(),
        outputs: 2 * n,
        encoder: EncoderRecipe::default(),
        recipe,
    });
    CACHE.get_or_init(Default::default).lock().unwrap().insert(key, f.clone());
    Ok(f)
}

/// Two blocks of `code` with logical basis `X_a X_b, X_b` and `Z_a, Z_a Z_b`,
/// so that the Bell state is `|+…+⟩ ⊗ |0…0⟩` of the first and second halves.
pub fn bell_code(code: &StabilizerCode) -> Result<StabilizerCode> {
    let n = code.n;
    let lift = |p: &PauliString, off: usize| {
        let mut out = PauliString::identity(2 * n);
        for q in p.support().iter_ones() {
            out.set(q + off, p.get(q));
        }
        out
    };
    let both = |p: &PauliString| lift(p, 0).mul(&lift(p, n));
    let mut gens: Vec<PauliString> = code.generators().iter().map(|g| lift(g, 0)).collect();
    gens.extend(code.generators().iter().map(|g| lift(g, n)));
    let mut lx = code.logical_x.iter().map(both).collect::<Result<Vec<_>>>()?;
    lx.extend(code.logical_x.iter().map(|l| lift(l, n)));
    let mut lz: Vec<PauliString> = code.logical_z.iter().map(|l| lift(l, 0)).collect();
    lz.extend(code.logical_z.iter().map(both).collect::<Result<Vec<_>>>()?);
    StabilizerCode::new(format!("{}-pair", code.name), gens, lx, lz, code.d_known)
}

/// Classifies residual errors on a block: an error is bad when its weight,
/// minimized over the stabilizer group of the prepared state, reaches `threshold`.
pub struct ResidualJudge {
    n: usize,
    threshold: usize,
    x: Reducer,
    z: Reducer,
}

enum Reducer {
    /// Every element of the relevant group, for small codes.
    Group(Vec<u64>),
    /// Lookup table whose reached weights stay below the threshold; classes in
    /// `mask` must agree.
    Table(Box<DecoderTable>, u8),
}

fn span(rows: &[u64]) -> Vec<u64> {
    let mut out = vec![0u64];
    for &r in rows {
        if out.contains(&r) {
            continue;
        }
        let ext: Vec<u64> = out.iter().map(|&v| v ^ r).collect();
        if ext.iter().any(|v| out.contains(v)) {
            continue;
        }
        out.extend(ext);
    }
    out
}

fn to_u64(b: &Bits) -> u64 {
    b.iter_ones().fold(0, |a, q| a | 1 << q)
}

impl ResidualJudge {
    /// Judge for the state `plus`; `data` treats every logical as unknown.
    pub fn new(code: &StabilizerCode, plus: u32, data: bool) -> Result<Self> {
        let d = code.d_known.ok_or_else(|| Error::InvalidArgument("code distance unknown".into()))?;
        Self::with_threshold(code, plus, data, d.div_ceil(2).max(2))
    }

    /// Judge that calls a residual bad from weight `threshold` on.
    pub fn with_threshold(code: &StabilizerCode, plus: u32, data: bool, threshold: usize) -> Result<Self> {
        if code.n > 64 {
            return Err(Error::Unsupported("blocks above 64 qubits".into()));
        }
        if threshold == 0 {
            return Err(Error::InvalidArgument("threshold must be positive".into()));
        }
        let k = code.k;
        let plus = if data { 0 } else { plus };
        let zero = if data { 0 } else { all_plus(k) & !plus };
        // X errors: harmless up to X stabilizers and X logicals of |+> slots.
        let build = |kind: PauliKind, free: u32| -> Result<Reducer> {
            let mut rows: Vec<u64> = code.checks(kind).rows().iter().map(to_u64).collect();
            for (i, l) in code.logical_supports(kind).iter().enumerate() {
                if free >> i & 1 == 1 {
                    rows.push(to_u64(l));
                }
            }
            if rows.len() <= 12 {
                Ok(Reducer::Group(span(&rows)))
            } else {
                let table = DecoderTable::build(code, kind, Some(threshold - 1))?;
                let must = if data { all_plus(k) } else { all_plus(k) & !free };
                Ok(Reducer::Table(Box::new(table), must as u8))
            }
        };
        Ok(ResidualJudge { n: code.n, threshold, x: build(PauliKind::X, plus)?, z: build(PauliKind::Z, zero)? })
    }

    pub fn threshold(&self) -> usize {
        self.threshold
    }

    fn reduced_ok(r: &Reducer, e: u64, t: usize) -> bool {
        match r {
            Reducer::Group(g) => g.iter().any(|&s| ((e ^ s).count_ones() as usize) < t),
            Reducer::Table(table, must) => {
                let (s, c) = table.syndrome_of(e);
                let class = table.class_of(s);
                table.weight_of(s).is_some() && class != REJECT && (class ^ c) & must == 0
            }
        }
    }

    pub fn is_bad(&self, ex: u64, ez: u64) -> bool {
        debug_assert!(self.n <= 64);
        !Self::reduced_ok(&self.x, ex, self.threshold) || !Self::reduced_ok(&self.z, ez, self.threshold)
    }
}

/// Exhaustive fault-injection counts for a preparation fragment.
#[derive(Clone, Debug, Default, PartialEq, Eq, serde::Serialize)]
pub struct InjectionReport {
    pub sites: usize,
    pub faults: usize,
    pub order1_detected: usize,
    pub order1_bad: usize,
    pub order2_pairs: u64,
    pub order2_bad: u64,
    pub threshold: usize,
    /// A few bad single faults as `(site, value, x residual, z residual)`.
    pub bad_examples: Vec<(usize, u8, u64, u64)>,
}

/// Injects every single fault (and every pair at distinct sites when `order2`)
/// into the noisy parts of `frag` and counts accepted outputs whose residual
/// error on the first `code.n` qubits is bad.
pub fn inject_faults(frag: &Fragment, code: &StabilizerCode, plus: u32, order2: bool) -> Result<InjectionReport> {
    inject_with(&frag.circuit, &(0..code.n).collect::<Vec<_>>(), &ResidualJudge::new(code, plus, false)?, order2)
}

/// Fault injection with an explicit output block and judge.
pub fn inject_with(circuit: &Circuit, out: &[usize], judge: &ResidualJudge, order2: bool) -> Result<InjectionReport> {
    let exec = circuit.exec_order();
    let sites = inject_noise(&exec, &circuit.groups, &NoiseModel::new(1e-3)?)?;
    let (items, site_basis) = basis_items(&sites);
    let checks: Vec<Vec<Key>> = exec
        .iter()
        .filter_map(|i| match &i.op {
            crate::circuit::Op::AbortIf(k) => Some(k.clone()),
            _ => None,
        })
        .collect();
    let words = checks.len().div_ceil(64).max(1);
    #[derive(Clone, Default)]
    struct Eff {
        checks: Vec<u64>,
        x: u64,
        z: u64,
    }
    let effects: Vec<Eff> = propagate(&exec, circuit.num_qubits, circuit.num_keys, &items, |x, z, rec, lanes| {
        let mut out_e: Vec<Eff> = (0..lanes).map(|_| Eff { checks: vec![0; words], x: 0, z: 0 }).collect();
        for (ci, keys) in checks.iter().enumerate() {
            let mut w = keys.iter().fold(0u64, |a, &k| a ^ rec[k as usize]);
            while w != 0 {
                let l = w.trailing_zeros() as usize;
                if l < lanes {
                    out_e[l].checks[ci / 64] |= 1 << (ci % 64);
                }
                w &= w - 1;
            }
        }
        for (i, &q) in out.iter().enumerate() {
            for (l, e) in out_e.iter_mut().enumerate() {
                e.x |= (x[q] >> l & 1) << i;
                e.z |= (z[q] >> l & 1) << i;
            }
        }
        out_e
    });
    // Every fault value as (site, checks, x, z).
    let mut faults: Vec<(u32, Vec<u64>, u64, u64)> = Vec::new();
    for (si, s) in sites.iter().enumerate() {
        for v in 1..=s.kind.choices() {
            let mut c = vec![0u64; words];
            let (mut x, mut z) = (0, 0);
            for bit in value_bits(v) {
                let e = &effects[(site_basis[si] + bit) as usize];
                for (a, b) in c.iter_mut().zip(&e.checks) {
                    *a ^= b;
                }
                x ^= e.x;
                z ^= e.z;
            }
            faults.push((si as u32, c, x, z));
        }
    }
    let mut rep = InjectionReport { sites: sites.len(), faults: faults.len(), threshold: judge.threshold(), ..Default::default() };
    for f in &faults {
        if f.1.iter().any(|&w| w != 0) {
            rep.order1_detected += 1;
        } else if judge.is_bad(f.2, f.3) {
            rep.order1_bad += 1;
            if rep.bad_examples.len() < 16 {
                let v = faults.iter().take_while(|g| !std::ptr::eq(*g, f)).filter(|g| g.0 == f.0).count() as u8 + 1;
                rep.bad_examples.push((f.0 as usize, v, f.2, f.3));
            }
        }
    }
    if order2 {
        let mut classes: HashMap<&[u64], Vec<usize>> = HashMap::new();
        for (i, f) in faults.iter().enumerate() {
            classes.entry(&f.1).or_default().push(i);
        }
        let mut memo: HashMap<(u64, u64), bool> = HashMap::new();
        let total = faults.len() as u64;
        for members in classes.values() {
            for (ai, &a) in members.iter().enumerate() {
                for &bb in &members[ai + 1..] {
                    let (fa, fb) = (&faults[a], &faults[bb]);
                    if fa.0 == fb.0 {
                        continue;
                    }
                    let key = (fa.2 ^ fb.2, fa.3 ^ fb.3);
                    let bad = *memo.entry(key).or_insert_with(|| judge.is_bad(key.0, key.1));
                    if bad {
                        rep.order2_bad += 1;
                    }
                }
            }
        }
        let same_site: u64 = sites.iter().map(|s| { let c = s.kind.choices() as u64; c * (c - 1) / 2 }).sum();
        rep.order2_pairs = total * (total - 1) / 2 - same_site;
    }
    Ok(rep)
}
