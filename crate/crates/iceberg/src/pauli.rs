//! Signed Pauli strings.

use crate::bits::Bits;
use crate::error::{Error, Result};
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub enum Sign {
    #[default]
    Plus,
    Minus,
}

impl Sign {
    pub fn from_bit(b: bool) -> Sign {
        if b {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }

    pub fn is_minus(self) -> bool {
        self == Sign::Minus
    }

    pub fn times(self, o: Sign) -> Sign {
        Sign::from_bit(self.is_minus() ^ o.is_minus())
    }
}

/// Single-qubit Pauli letter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Letter {
    I,
    X,
    Y,
    Z,
}

impl Letter {
    pub fn bits(self) -> (bool, bool) {
        match self {
            Letter::I => (false, false),
            Letter::X => (true, false),
            Letter::Y => (true, true),
            Letter::Z => (false, true),
        }
    }

    pub fn from_bits(x: bool, z: bool) -> Letter {
        match (x, z) {
            (false, false) => Letter::I,
            (true, false) => Letter::X,
            (true, true) => Letter::Y,
            (false, true) => Letter::Z,
        }
    }

    pub fn from_char(c: char) -> Option<Letter> {
        match c {
            'I' | '·' | '.' | '_' => Some(Letter::I),
            'X' => Some(Letter::X),
            'Y' => Some(Letter::Y),
            'Z' => Some(Letter::Z),
            _ => None,
        }
    }

    pub fn to_char(self) -> char {
        match self {
            Letter::I => 'I',
            Letter::X => 'X',
            Letter::Y => 'Y',
            Letter::Z => 'Z',
        }
    }
}

/// Hermitian Pauli operator `sign · ⊗ P_j`, with `Y = iXZ` per qubit.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    pub x: Bits,
    pub z: Bits,
    pub sign: Sign,
}

/// Exponent of `i` picked up when multiplying single-qubit Paulis `(x1,z1)·(x2,z2)`.
#[inline]
fn g(x1: bool, z1: bool, x2: bool, z2: bool) -> i32 {
    let (x2, z2) = (x2 as i32, z2 as i32);
    match (x1, z1) {
        (false, false) => 0,
        (true, true) => z2 - x2,
        (true, false) => z2 * (2 * x2 - 1),
        (false, true) => x2 * (1 - 2 * z2),
    }
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        PauliString { x: Bits::zeros(n), z: Bits::zeros(n), sign: Sign::Plus }
    }

    pub fn new(x: Bits, z: Bits) -> Self {
        assert_eq!(x.len(), z.len());
        PauliString { x, z, sign: Sign::Plus }
    }

    pub fn x_type(x: Bits) -> Self {
        let n = x.len();
        PauliString::new(x, Bits::zeros(n))
    }

    pub fn z_type(z: Bits) -> Self {
        let n = z.len();
        PauliString::new(Bits::zeros(n), z)
    }

    pub fn single(n: usize, q: usize, l: Letter) -> Self {
        let mut p = PauliString::identity(n);
        p.set(q, l);
        p
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn get(&self, q: usize) -> Letter {
        Letter::from_bits(self.x.get(q), self.z.get(q))
    }

    pub fn set(&mut self, q: usize, l: Letter) {
        let (x, z) = l.bits();
        self.x.set(q, x);
        self.z.set(q, z);
    }

    pub fn support(&self) -> Bits {
        self.x.or(&self.z)
    }

    pub fn weight(&self) -> usize {
        self.support().count_ones()
    }

    pub fn is_identity(&self) -> bool {
        self.x.is_zero() && self.z.is_zero()
    }

    pub fn is_x_type(&self) -> bool {
        self.z.is_zero()
    }

    pub fn is_z_type(&self) -> bool {
        self.x.is_zero()
    }

    /// Symplectic inner product; `true` means the operators anticommute.
    pub fn symplectic(&self, o: &PauliString) -> Result<bool> {
        if self.len() != o.len() {
            return Err(Error::LengthMismatch(self.len(), o.len()));
        }
        Ok(self.x.dot(&o.z) ^ self.z.dot(&o.x))
    }

    pub fn commutes(&self, o: &PauliString) -> Result<bool> {
        Ok(!self.symplectic(o)?)
    }

    /// Product `self · o` together with the exponent `e` in the overall phase `i^e`.
    pub fn mul_phase(&self, o: &PauliString) -> Result<(PauliString, u8)> {
        if self.len() != o.len() {
            return Err(Error::LengthMismatch(self.len(), o.len()));
        }
        let mut e: i32 = 0;
        for q in self.support().or(&o.support()).iter_ones() {
            e += g(self.x.get(q), self.z.get(q), o.x.get(q), o.z.get(q));
        }
        if self.sign.is_minus() {
            e += 2;
        }
        if o.sign.is_minus() {
            e += 2;
        }
        let e = e.rem_euclid(4) as u8;
        let p = PauliString { x: self.x.xor(&o.x), z: self.z.xor(&o.z), sign: Sign::Plus };
        Ok((p, e))
    }

    /// Product with the phase normalized to ±1; a factor of ±i from anticommuting
    /// operands is dropped.
    pub fn mul(&self, o: &PauliString) -> Result<PauliString> {
        let (mut p, e) = self.mul_phase(o)?;
        p.sign = Sign::from_bit(e >= 2);
        Ok(p)
    }

    pub fn negate(&self) -> PauliString {
        let mut p = self.clone();
        p.sign = p.sign.times(Sign::Minus);
        p
    }

    /// Relocates qubit `i` to `perm[i]`.
    pub fn permute(&self, perm: &[usize]) -> Result<PauliString> {
        check_permutation(perm, self.len())?;
        let n = self.len();
        let mut p = PauliString::identity(n);
        for i in 0..n {
            p.set(perm[i], self.get(i));
        }
        p.sign = self.sign;
        Ok(p)
    }

    /// Concatenated `x ∥ z` vector.
    pub fn symplectic_vector(&self) -> Bits {
        self.x.concat(&self.z)
    }

    pub fn from_symplectic(v: &Bits) -> PauliString {
        let n = v.len() / 2;
        PauliString::new(v.slice(0, n), v.slice(n, n))
    }

    pub fn parse(s: &str) -> Result<PauliString> {
        let s = s.trim();
        let (sign, body) = match s.chars().next() {
            Some('+') => (Sign::Plus, &s[1..]),
            Some('-') => (Sign::Minus, &s[1..]),
            _ => (Sign::Plus, s),
        };
        let letters: Vec<Letter> = body
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| Letter::from_char(c).ok_or(Error::Parse { line: 0, msg: format!("bad Pauli letter `{c}`") }))
            .collect::<Result<_>>()?;
        let mut p = PauliString::identity(letters.len());
        for (q, l) in letters.into_iter().enumerate() {
            p.set(q, l);
        }
        p.sign = sign;
        Ok(p)
    }

    /// Letters only, without the sign.
    pub fn letters(&self) -> String {
        (0..self.len()).map(|q| self.get(q).to_char()).collect()
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.sign.is_minus() {
            f.write_str("-")?;
        }
        f.write_str(&self.letters())
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

pub fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    if perm.len() != n {
        return Err(Error::NotAPermutation(n));
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || seen[p] {
            return Err(Error::NotAPermutation(n));
        }
        seen[p] = true;
    }
    Ok(())
}

pub fn invert_permutation(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (i, &p) in perm.iter().enumerate() {
        inv[p] = i;
    }
    inv
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> PauliString {
        PauliString::parse(s).unwrap()
    }

    #[test]
    fn single_qubit_products() {
        let (r, e) = p("X").mul_phase(&p("Z")).unwrap();
        assert_eq!(r.letters(), "Y");
        assert_eq!(e, 3); // XZ = -iY
        let (r, e) = p("Z").mul_phase(&p("X")).unwrap();
        assert_eq!(r.letters(), "Y");
        assert_eq!(e, 1);
        let (r, e) = p("Y").mul_phase(&p("Y")).unwrap();
        assert!(r.is_identity());
        assert_eq!(e, 0);
    }

    #[test]
    fn commutation_examples() {
        assert!(p("XZZXI").commutes(&p("ZYYZI")).unwrap());
        assert!(!p("X").commutes(&p("Z")).unwrap());
        assert!(p("XYZ").commutes(&p("III")).unwrap());
        assert!(p("X").commutes(&p("XX")).is_err());
    }

    #[test]
    fn parse_accepts_dots() {
        assert_eq!(p("·XZ·").letters(), "IXZI");
        assert_eq!(p("-XY").to_string(), "-XY");
    }
}
