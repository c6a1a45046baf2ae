//! Stabilizer codes, logical operators, distances and permutation actions.

use crate::bits::{BitMatrix, Bits, Echelon};
use crate::error::{Error, Result};
use crate::pauli::{check_permutation, PauliString, Sign};
use std::fmt::Write as _;

/// Upper bound on `log2` of any exhaustive enumeration performed by [`StabilizerCode::css_distance`].
pub const DISTANCE_BUDGET: usize = 26;

/// A stabilizer code with generators in display order and a symplectic logical basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilizerCode {
    pub name: String,
    pub n: usize,
    pub k: usize,
    generators: Vec<PauliString>,
    pub logical_x: Vec<PauliString>,
    pub logical_z: Vec<PauliString>,
    pub d_known: Option<usize>,
    pub ququad_grouping: Option<Vec<(usize, usize)>>,
}

/// Rows of an X- or Z-type check matrix as plain bit vectors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum PauliKind {
    X,
    Z,
}

impl PauliKind {
    pub fn dual(self) -> PauliKind {
        match self {
            PauliKind::X => PauliKind::Z,
            PauliKind::Z => PauliKind::X,
        }
    }
}

/// Symplectic action of a physical operation on the logical operators.
///
/// Column `j` of `matrix` holds the coefficients of the image of basis element `j`,
/// where the basis is ordered `X_1..X_k, Z_1..Z_k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LogicalAction {
    pub k: usize,
    pub matrix: BitMatrix,
    pub signs: Vec<Sign>,
}

impl LogicalAction {
    pub fn identity(k: usize) -> Self {
        LogicalAction { k, matrix: BitMatrix::identity(2 * k), signs: vec![Sign::Plus; 2 * k] }
    }

    /// Logical CNOT from qubit `c` to qubit `t`: `X_c -> X_c X_t`, `Z_t -> Z_c Z_t`.
    pub fn cnot(k: usize, c: usize, t: usize) -> Self {
        let mut rows: Vec<Bits> = BitMatrix::identity(2 * k).rows().to_vec();
        rows[t].set(c, true);
        rows[k + c].set(k + t, true);
        LogicalAction { k, matrix: BitMatrix::from_rows(2 * k, rows), signs: vec![Sign::Plus; 2 * k] }
    }

    /// Logical CNOTs from each qubit of the first block of `k` onto its partner
    /// in the second block.
    pub fn transversal_cnot(k: usize) -> Self {
        let n = 2 * k;
        let mut rows: Vec<Bits> = BitMatrix::identity(2 * n).rows().to_vec();
        for c in 0..k {
            rows[k + c].set(c, true);
            rows[n + c].set(n + k + c, true);
        }
        LogicalAction { k: n, matrix: BitMatrix::from_rows(2 * n, rows), signs: vec![Sign::Plus; 2 * n] }
    }

    /// Image of basis element `j` as a coefficient vector.
    pub fn image(&self, j: usize) -> Bits {
        Bits::from_indices(2 * self.k, (0..2 * self.k).filter(|&i| self.matrix.get(i, j)))
    }

    pub fn is_symplectic(&self) -> bool {
        let k = self.k;
        let omega = |a: &Bits, b: &Bits| {
            let mut s = false;
            for i in 0..k {
                s ^= (a.get(i) && b.get(k + i)) ^ (a.get(k + i) && b.get(i));
            }
            s
        };
        let imgs: Vec<Bits> = (0..2 * k).map(|j| self.image(j)).collect();
        for a in 0..2 * k {
            for b in 0..2 * k {
                let want = (a + k == b) || (b + k == a);
                if omega(&imgs[a], &imgs[b]) != want {
                    return false;
                }
            }
        }
        true
    }

    /// The `k×k` block describing how X-type logicals map among themselves.
    pub fn x_block(&self) -> BitMatrix {
        let k = self.k;
        BitMatrix::from_rows(
            k,
            (0..k).map(|i| Bits::from_indices(k, (0..k).filter(|&j| self.matrix.get(i, j)))).collect(),
        )
    }

    pub fn is_css_type(&self) -> bool {
        let k = self.k;
        (0..k).all(|j| (0..k).all(|i| !self.matrix.get(k + i, j) && !self.matrix.get(i, k + j)))
    }
}

impl StabilizerCode {
    /// Builds a code, checking commutation, rank and the logical basis.
    pub fn new(
        name: impl Into<String>,
        generators: Vec<PauliString>,
        logical_x: Vec<PauliString>,
        logical_z: Vec<PauliString>,
        d_known: Option<usize>,
    ) -> Result<Self> {
        let n = generators
            .first()
            .or(logical_x.first())
            .map(|p| p.len())
            .ok_or_else(|| Error::InconsistentGenerators("no operators given".into()))?;
        let k = logical_x.len();
        let code = StabilizerCode {
            name: name.into(),
            n,
            k,
            generators,
            logical_x,
            logical_z,
            d_known,
            ququad_grouping: None,
        };
        code.validate()?;
        Ok(code)
    }

    /// Builds a code from generators alone; logicals come from [`derive_logicals`].
    pub fn from_generators(name: impl Into<String>, n: usize, generators: Vec<PauliString>) -> Result<Self> {
        let (lx, lz) = derive_logicals(n, &generators)?;
        let k = lx.len();
        let code = StabilizerCode {
            name: name.into(),
            n,
            k,
            generators,
            logical_x: lx,
            logical_z: lz,
            d_known: None,
            ququad_grouping: None,
        };
        code.validate()?;
        Ok(code)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n;
        for p in self.generators.iter().chain(&self.logical_x).chain(&self.logical_z) {
            if p.len() != n {
                return Err(Error::LengthMismatch(p.len(), n));
            }
        }
        if self.logical_z.len() != self.k {
            return Err(Error::InconsistentGenerators("logical X/Z counts differ".into()));
        }
        for (i, a) in self.generators.iter().enumerate() {
            for b in &self.generators[i + 1..] {
                if a.symplectic(b)? {
                    return Err(Error::InconsistentGenerators(format!("{a} and {b} anticommute")));
                }
            }
        }
        let rank = self.stabilizer_echelon().rank();
        if rank + self.k != n {
            return Err(Error::InconsistentGenerators(format!(
                "rank {rank} with k={} on n={n} qubits",
                self.k
            )));
        }
        for (i, lx) in self.logical_x.iter().enumerate() {
            for g in &self.generators {
                if lx.symplectic(g)? || self.logical_z[i].symplectic(g)? {
                    return Err(Error::InconsistentGenerators(format!("logical {i} does not commute with {g}")));
                }
            }
            for (j, lz) in self.logical_z.iter().enumerate() {
                if lx.symplectic(lz)? != (i == j) {
                    return Err(Error::InconsistentGenerators(format!("logical pair ({i},{j}) has wrong commutation")));
                }
            }
            for j in 0..self.k {
                if j != i && (lx.symplectic(&self.logical_x[j])? || self.logical_z[i].symplectic(&self.logical_z[j])?) {
                    return Err(Error::InconsistentGenerators("logical operators of one type anticommute".into()));
                }
            }
        }
        Ok(())
    }

    pub fn generators(&self) -> &[PauliString] {
        &self.generators
    }

    pub fn is_css(&self) -> bool {
        self.generators.iter().all(|g| g.is_x_type() || g.is_z_type())
            && self.logical_x.iter().all(|p| p.is_x_type())
            && self.logical_z.iter().all(|p| p.is_z_type())
    }

    /// X-type generators as rows (empty for non-CSS codes).
    pub fn hx(&self) -> BitMatrix {
        let rows = self.generators.iter().filter(|g| g.is_x_type() && !g.is_identity()).map(|g| g.x.clone()).collect();
        BitMatrix::from_rows(self.n, rows)
    }

    pub fn hz(&self) -> BitMatrix {
        let rows = self.generators.iter().filter(|g| g.is_z_type() && !g.is_identity()).map(|g| g.z.clone()).collect();
        BitMatrix::from_rows(self.n, rows)
    }

    pub fn checks(&self, kind: PauliKind) -> BitMatrix {
        match kind {
            PauliKind::X => self.hx(),
            PauliKind::Z => self.hz(),
        }
    }

    /// Supports of the logical operators of one type (CSS codes only).
    pub fn logical_supports(&self, kind: PauliKind) -> Vec<Bits> {
        match kind {
            PauliKind::X => self.logical_x.iter().map(|p| p.x.clone()).collect(),
            PauliKind::Z => self.logical_z.iter().map(|p| p.z.clone()).collect(),
        }
    }

    pub fn css_or_err(&self) -> Result<()> {
        if self.is_css() {
            Ok(())
        } else {
            Err(Error::NotCss)
        }
    }

    pub fn stabilizer_matrix(&self) -> BitMatrix {
        BitMatrix::from_rows(2 * self.n, self.generators.iter().map(|g| g.symplectic_vector()).collect())
    }

    pub fn stabilizer_echelon(&self) -> Echelon {
        self.stabilizer_matrix().row_reduce()
    }

    pub fn in_stabilizer_group(&self, p: &PauliString) -> bool {
        self.stabilizer_echelon().contains(&p.symplectic_vector())
    }

    /// Sign `s` with `p = s·G` for the group element `G` built from +1 generators,
    /// or `None` when `p` is not in the group up to sign.
    pub fn stabilizer_sign(&self, p: &PauliString) -> Option<Sign> {
        let gens: Vec<Bits> = self.generators.iter().map(|g| g.symplectic_vector()).collect();
        let combo = solve_combination(&gens, &p.symplectic_vector())?;
        let mut acc = PauliString::identity(self.n);
        for i in combo.iter_ones() {
            acc = acc.mul(&self.generators[i]).ok()?;
        }
        Some(p.sign.times(acc.sign))
    }

    /// Code with X and Z roles exchanged.
    pub fn dual(&self) -> StabilizerCode {
        let swap = |p: &PauliString| PauliString { x: p.z.clone(), z: p.x.clone(), sign: p.sign };
        StabilizerCode {
            name: format!("{}~", self.name),
            n: self.n,
            k: self.k,
            generators: self.generators.iter().map(swap).collect(),
            logical_x: self.logical_z.iter().map(swap).collect(),
            logical_z: self.logical_x.iter().map(swap).collect(),
            d_known: self.d_known,
            ququad_grouping: self.ququad_grouping.clone(),
        }
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn with_distance(mut self, d: usize) -> Self {
        self.d_known = Some(d);
        self
    }

    pub fn with_logicals(mut self, lx: Vec<PauliString>, lz: Vec<PauliString>) -> Result<Self> {
        self.k = lx.len();
        self.logical_x = lx;
        self.logical_z = lz;
        self.validate()?;
        Ok(self)
    }

    /// Exact `(d_x, d_z)`: minimum weights of undetectable nontrivial X- and Z-type errors.
    pub fn css_distance(&self) -> Result<(usize, usize)> {
        self.css_or_err()?;
        let dx = min_logical_weight(&self.hx(), &self.hz(), self.n)?;
        let dz = min_logical_weight(&self.hz(), &self.hx(), self.n)?;
        Ok((dx, dz))
    }

    /// Minimum weight of a nontrivial logical operator, by brute force over Pauli
    /// strings of increasing weight. Suitable for small codes of either kind.
    pub fn general_distance(&self, max_weight: usize) -> Option<usize> {
        let n = self.n;
        let gens: Vec<(u64, u64)> = self.generators.iter().map(|g| (g.x.to_u64(), g.z.to_u64())).collect();
        let logs: Vec<(u64, u64)> =
            self.logical_x.iter().chain(&self.logical_z).map(|g| (g.x.to_u64(), g.z.to_u64())).collect();
        let anti = |a: (u64, u64), b: (u64, u64)| ((a.0 & b.1).count_ones() + (a.1 & b.0).count_ones()) & 1 == 1;
        for w in 1..=max_weight.min(n) {
            for supp in crate::bits::Combinations::new(n, w) {
                for mut letters in 0..3usize.pow(w as u32) {
                    let (mut x, mut z) = (0u64, 0u64);
                    for &q in &supp {
                        match letters % 3 {
                            0 => x |= 1 << q,
                            1 => z |= 1 << q,
                            _ => {
                                x |= 1 << q;
                                z |= 1 << q
                            }
                        }
                        letters /= 3;
                    }
                    if gens.iter().all(|&g| !anti(g, (x, z))) && logs.iter().any(|&l| anti(l, (x, z))) {
                        return Some(w);
                    }
                }
            }
        }
        None
    }

    /// Code distance: the CSS enumeration when applicable, otherwise brute force.
    pub fn distance(&self) -> Result<usize> {
        if self.is_css() {
            let (a, b) = self.css_distance()?;
            Ok(a.min(b))
        } else {
            self.general_distance(self.n).ok_or(Error::InconsistentGenerators("no logical operator found".into()))
        }
    }

    pub fn permute(&self, perm: &[usize]) -> Result<StabilizerCode> {
        check_permutation(perm, self.n)?;
        let ap = |v: &[PauliString]| v.iter().map(|p| p.permute(perm)).collect::<Result<Vec<_>>>();
        Ok(StabilizerCode {
            name: self.name.clone(),
            n: self.n,
            k: self.k,
            generators: ap(&self.generators)?,
            logical_x: ap(&self.logical_x)?,
            logical_z: ap(&self.logical_z)?,
            d_known: self.d_known,
            ququad_grouping: None,
        })
    }

    /// Whether `perm` maps the stabilizer group onto itself.
    pub fn is_automorphism(&self, perm: &[usize]) -> Result<bool> {
        check_permutation(perm, self.n)?;
        let e = self.stabilizer_echelon();
        for g in &self.generators {
            if !e.contains(&g.permute(perm)?.symplectic_vector()) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Induced action on the logical operators, modulo the stabilizer group.
    pub fn logical_action_of_permutation(&self, perm: &[usize]) -> Result<LogicalAction> {
        if !self.is_automorphism(perm)? {
            return Err(Error::NotAnAutomorphism);
        }
        let k = self.k;
        let basis: Vec<&PauliString> = self.logical_x.iter().chain(&self.logical_z).collect();
        let mut cols = Vec::with_capacity(2 * k);
        let mut signs = Vec::with_capacity(2 * k);
        for l in &basis {
            let img = l.permute(perm)?;
            let mut coeff = Bits::zeros(2 * k);
            let mut prod = PauliString::identity(self.n);
            for j in 0..k {
                if img.symplectic(&self.logical_z[j])? {
                    coeff.set(j, true);
                    prod = prod.mul(&self.logical_x[j])?;
                }
            }
            for j in 0..k {
                if img.symplectic(&self.logical_x[j])? {
                    coeff.set(k + j, true);
                    prod = prod.mul(&self.logical_z[j])?;
                }
            }
            let rest = img.mul(&prod)?;
            let s = self.stabilizer_sign(&rest).ok_or(Error::NotAnAutomorphism)?;
            cols.push(coeff);
            signs.push(s);
        }
        let matrix = BitMatrix::from_rows(2 * k, cols).transpose();
        Ok(LogicalAction { k, matrix, signs })
    }

    /// Serialized in the letter format: header `n k d`, generators, `--`, then
    /// logical operators in the order `X_1, Z_1, X_2, Z_2, ...`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let d = self.d_known.map(|d| d.to_string()).unwrap_or_else(|| "?".into());
        writeln!(s, "{} {} {}", self.n, self.k, d).unwrap();
        for g in &self.generators {
            writeln!(s, "{g}").unwrap();
        }
        writeln!(s, "--").unwrap();
        for i in 0..self.k {
            writeln!(s, "{}", self.logical_x[i]).unwrap();
            writeln!(s, "{}", self.logical_z[i]).unwrap();
        }
        s
    }

    pub fn from_text(name: &str, text: &str) -> Result<StabilizerCode> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'));
        let (hl, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "missing header".into() })?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(Error::Parse { line: hl + 1, msg: "header must be `n k d`".into() });
        }
        let num = |s: &str| s.parse::<usize>().map_err(|_| Error::Parse { line: hl + 1, msg: format!("bad number `{s}`") });
        let n = num(parts[0])?;
        let k = num(parts[1])?;
        let d = if parts[2] == "?" { None } else { Some(num(parts[2])?) };
        let mut gens = Vec::new();
        let mut logs = Vec::new();
        let mut in_logs = false;
        for (ln, l) in lines {
            if l.trim() == "--" {
                in_logs = true;
                continue;
            }
            let p = PauliString::parse(l).map_err(|e| Error::Parse { line: ln + 1, msg: e.to_string() })?;
            if p.len() != n {
                return Err(Error::Parse { line: ln + 1, msg: format!("expected {n} letters") });
            }
            if in_logs {
                logs.push(p);
            } else {
                gens.push(p);
            }
        }
        if !in_logs {
            return StabilizerCode::from_generators(name, n, gens).map(|c| StabilizerCode { d_known: d, ..c });
        }
        if logs.len() != 2 * k {
            return Err(Error::Parse { line: 0, msg: format!("expected {} logical operators", 2 * k) });
        }
        let lx = logs.iter().step_by(2).cloned().collect();
        let lz = logs.iter().skip(1).step_by(2).cloned().collect();
        StabilizerCode::new(name, gens, lx, lz, d)
    }

    /// Stable content hash of the generator and logical tables.
    pub fn content_hash(&self) -> [u8; 32] {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        h.update(self.to_text().as_bytes());
        h.finalize().into()
    }

    /// Reduces every logical representative to minimum weight modulo the stabilizer
    /// group, breaking ties on the symplectic bit vector. Skipped when the group
    /// exceeds `2^max_log`.
    pub fn canonicalize_logicals(&mut self, max_log: usize) {
        let e = self.stabilizer_echelon();
        if e.rank() > max_log {
            return;
        }
        let group = span_all(&e.rows);
        let best = |p: &PauliString| -> PauliString {
            let v = p.symplectic_vector();
            let n = self.n;
            let w = |u: &Bits| u.slice(0, n).or(&u.slice(n, n)).count_ones();
            let mut bestv = v.clone();
            for s in &group {
                let c = v.xor(s);
                if (w(&c), &c) < (w(&bestv), &bestv) {
                    bestv = c;
                }
            }
            PauliString::from_symplectic(&bestv)
        };
        self.logical_x = self.logical_x.iter().map(best).collect();
        self.logical_z = self.logical_z.iter().map(best).collect();
    }
}

fn span_all(rows: &[Bits]) -> Vec<Bits> {
    let len = rows.first().map(|r| r.len()).unwrap_or(0);
    let mut out = vec![Bits::zeros(len)];
    for r in rows {
        let m = out.len();
        for i in 0..m {
            out.push(out[i].xor(r));
        }
    }
    out
}

/// Finds `c` with `Σ c_i rows_i = target`, if one exists.
pub fn solve_combination(rows: &[Bits], target: &Bits) -> Option<Bits> {
    let m = rows.len();
    // Augment each row with an identity tag to track combinations.
    let aug: Vec<Bits> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| r.concat(&Bits::from_indices(m, [i])))
        .collect();
    let len = target.len();
    let mat = BitMatrix::from_rows(len + m, aug);
    let e = mat.row_reduce();
    let mut v = target.concat(&Bits::zeros(m));
    for (row, &p) in e.rows.iter().zip(&e.pivots) {
        if p < len && v.get(p) {
            v.xor_assign(row);
        }
    }
    if !v.slice(0, len).is_zero() {
        return None;
    }
    Some(v.slice(len, m))
}

/// Symplectic basis of the normalizer modulo the stabilizer group.
pub fn derive_logicals(n: usize, generators: &[PauliString]) -> Result<(Vec<PauliString>, Vec<PauliString>)> {
    for (i, a) in generators.iter().enumerate() {
        if a.len() != n {
            return Err(Error::LengthMismatch(a.len(), n));
        }
        for b in &generators[i + 1..] {
            if a.symplectic(b)? {
                return Err(Error::InconsistentGenerators(format!("{a} and {b} anticommute")));
            }
        }
    }
    let css = generators.iter().all(|g| g.is_x_type() || g.is_z_type());
    let stab = BitMatrix::from_rows(2 * n, generators.iter().map(|g| g.symplectic_vector()).collect());
    let mut ech = stab.row_reduce();
    let r = ech.rank();
    let k = n - r;
    let mut cands: Vec<PauliString> = Vec::new();
    if css {
        let hx = BitMatrix::from_rows(n, generators.iter().filter(|g| g.is_x_type() && !g.is_identity()).map(|g| g.x.clone()).collect());
        let hz = BitMatrix::from_rows(n, generators.iter().filter(|g| g.is_z_type() && !g.is_identity()).map(|g| g.z.clone()).collect());
        for v in hz.kernel() {
            let p = PauliString::x_type(v);
            if ech.insert(&p.symplectic_vector()) {
                cands.push(p);
            }
        }
        for v in hx.kernel() {
            let p = PauliString::z_type(v);
            if ech.insert(&p.symplectic_vector()) {
                cands.push(p);
            }
        }
    } else {
        // Normalizer: v with <v, g> = 0, i.e. kernel of [Sz | Sx].
        let swapped = BitMatrix::from_rows(
            2 * n,
            generators.iter().map(|g| g.z.concat(&g.x)).collect(),
        );
        for v in swapped.kernel() {
            if ech.insert(&v) {
                cands.push(PauliString::from_symplectic(&v));
            }
        }
    }
    if cands.len() != 2 * k {
        return Err(Error::InconsistentGenerators(format!("normalizer quotient has dimension {}", cands.len())));
    }
    let mut lx = Vec::new();
    let mut lz = Vec::new();
    while let Some(a) = cands.first().cloned() {
        cands.remove(0);
        let j = cands
            .iter()
            .position(|b| a.symplectic(b).unwrap())
            .ok_or_else(|| Error::InconsistentGenerators("degenerate logical space".into()))?;
        let b = cands.remove(j);
        for c in cands.iter_mut() {
            let mut v = c.symplectic_vector();
            if c.symplectic(&b)? {
                v.xor_assign(&a.symplectic_vector());
            }
            if c.symplectic(&a)? {
                v.xor_assign(&b.symplectic_vector());
            }
            *c = PauliString::from_symplectic(&v);
        }
        let (x, z) = if css && a.is_z_type() { (b, a) } else { (a, b) };
        lx.push(x);
        lz.push(z);
    }
    Ok((lx, lz))
}

/// Minimum weight of `ker(checks) \ rowspace(stab)` by Gray-code enumeration.
fn min_logical_weight(stab: &BitMatrix, checks: &BitMatrix, n: usize) -> Result<usize> {
    if n > 64 {
        return Err(Error::BudgetExceeded { needed: n, budget: 64 });
    }
    let se = stab.row_reduce();
    let mut e = se.clone();
    let mut logs = Vec::new();
    for v in checks.kernel() {
        if e.insert(&v) {
            logs.push(v.to_u64());
        }
    }
    let srows: Vec<u64> = se.rows.iter().map(|r| r.to_u64()).collect();
    let r = srows.len();
    let kk = logs.len();
    if r + kk > DISTANCE_BUDGET {
        return Err(Error::BudgetExceeded { needed: r + kk, budget: DISTANCE_BUDGET });
    }
    if kk == 0 {
        return Ok(usize::MAX);
    }
    let bases: Vec<u64> = (1u64..(1 << kk))
        .map(|m| (0..kk).filter(|&i| m >> i & 1 == 1).fold(0u64, |a, i| a ^ logs[i]))
        .collect();
    // Split the stabilizer enumeration into chunks indexed by the high rows.
    let low = r.min(16);
    let high = r - low;
    let chunks: Vec<(u64, u64)> = bases
        .iter()
        .flat_map(|&b| (0..1u64 << high).map(move |h| (b, h)))
        .collect();
    let worker = |&(base, h): &(u64, u64)| -> u32 {
        let mut v = base;
        for i in 0..high {
            if h >> i & 1 == 1 {
                v ^= srows[low + i];
            }
        }
        let mut best = v.count_ones();
        for step in 1u64..(1 << low) {
            v ^= srows[step.trailing_zeros() as usize];
            best = best.min(v.count_ones());
        }
        best
    };
    #[cfg(feature = "parallel")]
    let best = {
        use rayon::prelude::*;
        chunks.par_iter().map(worker).min()
    };
    #[cfg(not(feature = "parallel"))]
    let best = chunks.iter().map(worker).min();
    Ok(best.unwrap_or(u32::MAX) as usize)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> PauliString {
        PauliString::parse(s).unwrap()
    }

    fn c422() -> StabilizerCode {
        StabilizerCode::new(
            "c422",
            vec![p("XXXX"), p("ZZZZ")],
            vec![p("XXII"), p("XIXI")],
            vec![p("IZIZ"), p("IIZZ")],
            Some(2),
        )
        .unwrap()
    }

    #[test]
    fn trivial_one_qubit_code() {
        let (lx, lz) = derive_logicals(1, &[]).unwrap();
        assert_eq!(lx[0].letters(), "X");
        assert_eq!(lz[0].letters(), "Z");
    }

    #[test]
    fn swap_is_logical_swap() {
        let c = c422();
        let a = c.logical_action_of_permutation(&[0, 2, 1, 3]).unwrap();
        assert!(a.is_symplectic());
        // X1 <-> X2 and Z1 <-> Z2
        assert_eq!(a.image(0), Bits::from_indices(4, [1]));
        assert_eq!(a.image(1), Bits::from_indices(4, [0]));
        assert_eq!(a.image(2), Bits::from_indices(4, [3]));
    }

    #[test]
    fn text_round_trip() {
        let c = c422();
        let t = c.to_text();
        let back = StabilizerCode::from_text("c422", &t).unwrap();
        assert_eq!(back.to_text(), t);
    }

    #[test]
    fn distance_422() {
        assert_eq!(c422().css_distance().unwrap(), (2, 2));
        assert_eq!(c422().general_distance(4), Some(2));
    }
}
