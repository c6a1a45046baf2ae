//! Dense GF(2) vectors and matrices.

use std::fmt;

/// Fixed-length bit vector over GF(2).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bits {
    len: usize,
    words: Vec<u64>,
}

impl Bits {
    pub fn zeros(len: usize) -> Self {
        Bits { len, words: vec![0; len.div_ceil(64)] }
    }

    pub fn from_indices(len: usize, idx: impl IntoIterator<Item = usize>) -> Self {
        let mut b = Bits::zeros(len);
        for i in idx {
            b.set(i, true);
        }
        b
    }

    pub fn from_bools(v: &[bool]) -> Self {
        Bits::from_indices(v.len(), v.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i))
    }

    /// Low `len` bits of `mask`.
    pub fn from_u64(len: usize, mask: u64) -> Self {
        assert!(len <= 64);
        let mut b = Bits::zeros(len);
        if len > 0 {
            b.words[0] = if len == 64 { mask } else { mask & ((1u64 << len) - 1) };
        }
        b
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i >> 6] >> (i & 63)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, v: bool) {
        debug_assert!(i < self.len);
        let m = 1u64 << (i & 63);
        if v {
            self.words[i >> 6] |= m;
        } else {
            self.words[i >> 6] &= !m;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        self.words[i >> 6] ^= 1u64 << (i & 63);
    }

    pub fn xor_assign(&mut self, o: &Bits) {
        debug_assert_eq!(self.len, o.len);
        for (a, b) in self.words.iter_mut().zip(&o.words) {
            *a ^= b;
        }
    }

    pub fn xor(&self, o: &Bits) -> Bits {
        let mut r = self.clone();
        r.xor_assign(o);
        r
    }

    pub fn and(&self, o: &Bits) -> Bits {
        let mut r = self.clone();
        for (a, b) in r.words.iter_mut().zip(&o.words) {
            *a &= b;
        }
        r
    }

    pub fn or(&self, o: &Bits) -> Bits {
        let mut r = self.clone();
        for (a, b) in r.words.iter_mut().zip(&o.words) {
            *a |= b;
        }
        r
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Parity of the bitwise AND.
    pub fn dot(&self, o: &Bits) -> bool {
        let mut acc = 0u64;
        for (a, b) in self.words.iter().zip(&o.words) {
            acc ^= a & b;
        }
        acc.count_ones() & 1 == 1
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let t = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(wi * 64 + t)
                }
            })
        })
    }

    pub fn first_one(&self) -> Option<usize> {
        self.iter_ones().next()
    }

    /// The vector as a u64 mask; panics when longer than 64 bits.
    pub fn to_u64(&self) -> u64 {
        assert!(self.len <= 64, "bit vector of length {} does not fit in u64", self.len);
        self.words.first().copied().unwrap_or(0)
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Concatenation `self ∥ o`.
    pub fn concat(&self, o: &Bits) -> Bits {
        let mut r = Bits::zeros(self.len + o.len);
        for i in self.iter_ones() {
            r.set(i, true);
        }
        for i in o.iter_ones() {
            r.set(self.len + i, true);
        }
        r
    }

    pub fn slice(&self, start: usize, len: usize) -> Bits {
        Bits::from_indices(len, (0..len).filter(|&i| self.get(start + i)))
    }
}

impl fmt::Debug for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Row-major GF(2) matrix.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BitMatrix {
    cols: usize,
    rows: Vec<Bits>,
}

/// Reduced row-echelon form with recorded pivot columns.
#[derive(Clone, Debug)]
pub struct Echelon {
    pub rows: Vec<Bits>,
    pub pivots: Vec<usize>,
}

impl BitMatrix {
    pub fn new(cols: usize) -> Self {
        BitMatrix { cols, rows: Vec::new() }
    }

    pub fn from_rows(cols: usize, rows: Vec<Bits>) -> Self {
        for r in &rows {
            assert_eq!(r.len(), cols, "row length mismatch");
        }
        BitMatrix { cols, rows }
    }

    pub fn identity(n: usize) -> Self {
        BitMatrix::from_rows(n, (0..n).map(|i| Bits::from_indices(n, [i])).collect())
    }

    pub fn push(&mut self, r: Bits) {
        assert_eq!(r.len(), self.cols);
        self.rows.push(r);
    }

    pub fn rows(&self) -> &[Bits] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &Bits {
        &self.rows[i]
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.rows[r].get(c)
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut t: Vec<Bits> = (0..self.cols).map(|_| Bits::zeros(self.rows.len())).collect();
        for (i, r) in self.rows.iter().enumerate() {
            for j in r.iter_ones() {
                t[j].set(i, true);
            }
        }
        BitMatrix::from_rows(self.rows.len(), t)
    }

    /// Matrix product over GF(2).
    pub fn mul(&self, o: &BitMatrix) -> BitMatrix {
        assert_eq!(self.cols, o.nrows());
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let mut acc = Bits::zeros(o.cols);
                for j in r.iter_ones() {
                    acc.xor_assign(&o.rows[j]);
                }
                acc
            })
            .collect();
        BitMatrix::from_rows(o.cols, rows)
    }

    /// `self · v` as a column vector.
    pub fn mul_vec(&self, v: &Bits) -> Bits {
        Bits::from_indices(self.rows.len(), (0..self.rows.len()).filter(|&i| self.rows[i].dot(v)))
    }

    pub fn row_reduce(&self) -> Echelon {
        let mut rows = self.rows.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            let Some(p) = (r..rows.len()).find(|&i| rows[i].get(c)) else { continue };
            rows.swap(r, p);
            let pr = rows[r].clone();
            for (i, row) in rows.iter_mut().enumerate() {
                if i != r && row.get(c) {
                    row.xor_assign(&pr);
                }
            }
            pivots.push(c);
            r += 1;
            if r == rows.len() {
                break;
            }
        }
        rows.truncate(r);
        Echelon { rows, pivots }
    }

    pub fn rank(&self) -> usize {
        self.row_reduce().pivots.len()
    }

    /// Basis of the right null space `{v : self·v = 0}`.
    pub fn kernel(&self) -> Vec<Bits> {
        let e = self.row_reduce();
        let mut is_pivot = vec![false; self.cols];
        for &p in &e.pivots {
            is_pivot[p] = true;
        }
        let mut out = Vec::new();
        for f in (0..self.cols).filter(|&c| !is_pivot[c]) {
            let mut v = Bits::zeros(self.cols);
            v.set(f, true);
            for (row, &p) in e.rows.iter().zip(&e.pivots) {
                if row.get(f) {
                    v.set(p, true);
                }
            }
            out.push(v);
        }
        out
    }

    /// Whether the row spaces coincide.
    pub fn same_row_space(&self, o: &BitMatrix) -> bool {
        if self.cols != o.cols {
            return false;
        }
        let e = self.row_reduce();
        e.rows == o.row_reduce().rows
    }
}

impl Echelon {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Reduces `v` against the basis; the result is zero iff `v` is in the row space.
    pub fn reduce(&self, v: &Bits) -> Bits {
        let mut v = v.clone();
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            if v.get(p) {
                v.xor_assign(row);
            }
        }
        v
    }

    /// Reduces `v` and reports which basis rows were used.
    pub fn decompose(&self, v: &Bits) -> (Bits, Bits) {
        let mut v = v.clone();
        let mut used = Bits::zeros(self.rows.len());
        for (i, (row, &p)) in self.rows.iter().zip(&self.pivots).enumerate() {
            if v.get(p) {
                v.xor_assign(row);
                used.set(i, true);
            }
        }
        (v, used)
    }

    pub fn contains(&self, v: &Bits) -> bool {
        self.reduce(v).is_zero()
    }

    /// Adds `v` to the basis if independent; returns whether it was added.
    pub fn insert(&mut self, v: &Bits) -> bool {
        let r = self.reduce(v);
        let Some(p) = r.first_one() else { return false };
        for row in self.rows.iter_mut() {
            if row.get(p) {
                row.xor_assign(&r);
            }
        }
        let pos = self.pivots.partition_point(|&q| q < p);
        self.pivots.insert(pos, p);
        self.rows.insert(pos, r);
        true
    }

    pub fn empty() -> Self {
        Echelon { rows: Vec::new(), pivots: Vec::new() }
    }
}

/// Iterator over all `w`-subsets of `0..n` in lexicographic order.
pub struct Combinations {
    n: usize,
    idx: Vec<usize>,
    first: bool,
    done: bool,
}

impl Combinations {
    pub fn new(n: usize, w: usize) -> Self {
        Combinations { n, idx: (0..w).collect(), first: true, done: w > n }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;
    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        if self.first {
            self.first = false;
            return Some(self.idx.clone());
        }
        let w = self.idx.len();
        let mut i = w;
        while i > 0 {
            i -= 1;
            if self.idx[i] != i + self.n - w {
                self.idx[i] += 1;
                for j in i + 1..w {
                    self.idx[j] = self.idx[j - 1] + 1;
                }
                return Some(self.idx.clone());
            }
        }
        self.done = true;
        None
    }
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (n - i) as u128 / (i + 1) as u128;
    }
    r
}
