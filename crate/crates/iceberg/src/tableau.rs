//! Stabilizer tableau with symbolic signs.
//!
//! Every random measurement outcome introduces a fresh coin variable; signs and
//! outcomes are affine functions of the coins, stored as bit vectors whose bit 0
//! is the constant term.

use crate::circuit::{Circuit, Key, Op};
use crate::error::{Error, Result};
use crate::pauli::PauliString;
use crate::program::{DecodeSource, Program};

/// Affine function over GF(2) of the coin variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Affine(Vec<u64>);

impl Affine {
    pub fn zero(width: usize) -> Self {
        Affine(vec![0; width])
    }

    pub fn constant(&self) -> bool {
        self.0[0] & 1 == 1
    }

    /// True when no coin appears.
    pub fn is_constant(&self) -> bool {
        self.0[0] >> 1 == 0 && self.0[1..].iter().all(|&w| w == 0)
    }

    pub fn coin(width: usize, c: usize) -> Self {
        let mut a = Affine::zero(width);
        a.0[(c + 1) / 64] |= 1 << ((c + 1) % 64);
        a
    }

    pub fn flip_constant(&mut self) {
        self.0[0] ^= 1;
    }

    pub fn xor_assign(&mut self, o: &Affine) {
        for (a, b) in self.0.iter_mut().zip(&o.0) {
            *a ^= b;
        }
    }

    pub fn xor(&self, o: &Affine) -> Affine {
        let mut a = self.clone();
        a.xor_assign(o);
        a
    }

    /// Packed coefficients; bit 0 is the constant term.
    pub fn words(&self) -> &[u64] {
        &self.0
    }

    /// Value with every coin set to zero.
    pub fn reference(&self) -> bool {
        self.constant()
    }
}

#[derive(Clone, Debug)]
pub struct Tableau {
    n: usize,
    w: usize,
    cw: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    sign: Vec<Affine>,
    coins: usize,
}

impl Tableau {
    /// The all-`|0⟩` state on `n` qubits with room for `max_coins` random outcomes.
    pub fn new(n: usize, max_coins: usize) -> Self {
        let w = n.div_ceil(64).max(1);
        let cw = (max_coins + 1).div_ceil(64);
        let rows = 2 * n + 1;
        let mut t = Tableau { n, w, cw, x: vec![0; rows * w], z: vec![0; rows * w], sign: vec![Affine::zero(cw); rows], coins: 0 };
        for i in 0..n {
            t.x[i * w + i / 64] |= 1 << (i % 64);
            t.z[(n + i) * w + i / 64] |= 1 << (i % 64);
        }
        t
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn coins_used(&self) -> usize {
        self.coins
    }

    #[inline]
    fn get(v: &[u64], w: usize, row: usize, q: usize) -> bool {
        v[row * w + q / 64] >> (q % 64) & 1 == 1
    }

    /// Row `h` becomes row `h` times row `i`.
    fn rowsum(&mut self, h: usize, i: usize) {
        let w = self.w;
        let (mut plus, mut minus) = (0u32, 0u32);
        for k in 0..w {
            let (x1, z1) = (self.x[i * w + k], self.z[i * w + k]);
            let (x2, z2) = (self.x[h * w + k], self.z[h * w + k]);
            let p = (x1 & z1 & z2 & !x2) | (x1 & !z1 & z2 & x2) | (!x1 & z1 & x2 & !z2);
            let m = (x1 & z1 & x2 & !z2) | (x1 & !z1 & z2 & !x2) | (!x1 & z1 & x2 & z2);
            plus += p.count_ones();
            minus += m.count_ones();
        }
        let e = (plus as i64 - minus as i64).rem_euclid(4);
        let si = self.sign[i].clone();
        self.sign[h].xor_assign(&si);
        if e == 2 {
            self.sign[h].flip_constant();
        }
        for k in 0..w {
            self.x[h * w + k] ^= self.x[i * w + k];
            self.z[h * w + k] ^= self.z[i * w + k];
        }
    }

    pub fn cnot(&mut self, a: usize, b: usize) {
        let w = self.w;
        let (wa, ba) = (a / 64, a % 64);
        let (wb, bb) = (b / 64, b % 64);
        for r in 0..2 * self.n {
            let xa = self.x[r * w + wa] >> ba & 1;
            let za = self.z[r * w + wa] >> ba & 1;
            let xb = self.x[r * w + wb] >> bb & 1;
            let zb = self.z[r * w + wb] >> bb & 1;
            if xa & zb & (xb ^ za ^ 1) == 1 {
                self.sign[r].flip_constant();
            }
            self.x[r * w + wb] ^= xa << bb;
            self.z[r * w + wa] ^= zb << ba;
        }
    }

    pub fn h(&mut self, a: usize) {
        let w = self.w;
        let (wa, ba) = (a / 64, a % 64);
        for r in 0..2 * self.n {
            let xa = self.x[r * w + wa] >> ba & 1;
            let za = self.z[r * w + wa] >> ba & 1;
            if xa & za == 1 {
                self.sign[r].flip_constant();
            }
            if xa != za {
                self.x[r * w + wa] ^= 1 << ba;
                self.z[r * w + wa] ^= 1 << ba;
            }
        }
    }

    /// Moves the state of `qubits[i]` to `qubits[sigma[i]]`.
    pub fn permute(&mut self, qubits: &[usize], sigma: &[usize]) {
        let w = self.w;
        for r in 0..2 * self.n {
            let xs: Vec<bool> = qubits.iter().map(|&q| Self::get(&self.x, w, r, q)).collect();
            let zs: Vec<bool> = qubits.iter().map(|&q| Self::get(&self.z, w, r, q)).collect();
            for (i, &q) in qubits.iter().enumerate() {
                let dst = qubits[sigma[i]];
                let _ = q;
                let (wd, bd) = (dst / 64, dst % 64);
                self.x[r * w + wd] = (self.x[r * w + wd] & !(1 << bd)) | ((xs[i] as u64) << bd);
                self.z[r * w + wd] = (self.z[r * w + wd] & !(1 << bd)) | ((zs[i] as u64) << bd);
            }
        }
    }

    fn new_coin(&mut self) -> Result<Affine> {
        if self.coins + 1 >= self.cw * 64 {
            return Err(Error::InvalidCircuit("coin capacity exhausted".into()));
        }
        let a = Affine::coin(self.cw, self.coins);
        self.coins += 1;
        Ok(a)
    }

    /// Z-basis measurement; the outcome bit is 1 for eigenvalue -1.
    pub fn measure_z(&mut self, a: usize) -> Result<Affine> {
        let n = self.n;
        let w = self.w;
        if let Some(p) = (n..2 * n).find(|&r| Self::get(&self.x, w, r, a)) {
            for r in 0..2 * n {
                if r != p && Self::get(&self.x, w, r, a) {
                    self.rowsum(r, p);
                }
            }
            let d = p - n;
            for k in 0..w {
                self.x[d * w + k] = self.x[p * w + k];
                self.z[d * w + k] = self.z[p * w + k];
                self.x[p * w + k] = 0;
                self.z[p * w + k] = 0;
            }
            self.sign[d] = self.sign[p].clone();
            self.z[p * w + a / 64] |= 1 << (a % 64);
            let c = self.new_coin()?;
            self.sign[p] = c.clone();
            Ok(c)
        } else {
            let s = 2 * n;
            for k in 0..w {
                self.x[s * w + k] = 0;
                self.z[s * w + k] = 0;
            }
            self.sign[s] = Affine::zero(self.cw);
            for i in 0..n {
                if Self::get(&self.x, w, i, a) {
                    self.rowsum(s, i + n);
                }
            }
            Ok(self.sign[s].clone())
        }
    }

    pub fn measure_x(&mut self, a: usize) -> Result<Affine> {
        self.h(a);
        let r = self.measure_z(a);
        self.h(a);
        r
    }

    /// Applies `P^f`: every row anticommuting with `p` picks up `f` in its sign.
    pub fn apply_pauli_if(&mut self, p: &PauliString, f: &Affine) {
        let w = self.w;
        for r in 0..2 * self.n {
            let mut anti = false;
            for q in p.support().iter_ones() {
                anti ^= (p.x.get(q) && Self::get(&self.z, w, r, q)) ^ (p.z.get(q) && Self::get(&self.x, w, r, q));
            }
            if anti {
                self.sign[r].xor_assign(f);
            }
        }
    }

    pub fn apply_pauli(&mut self, p: &PauliString) {
        let mut one = Affine::zero(self.cw);
        one.flip_constant();
        self.apply_pauli_if(p, &one);
    }

    pub fn prep_z(&mut self, a: usize) -> Result<()> {
        let m = self.measure_z(a)?;
        self.apply_pauli_if(&PauliString::single(self.n, a, crate::pauli::Letter::X), &m);
        Ok(())
    }

    pub fn prep_x(&mut self, a: usize) -> Result<()> {
        self.prep_z(a)?;
        self.h(a);
        Ok(())
    }

    /// Outcome of measuring `p` when it is determined by the state, else `None`.
    pub fn peek(&mut self, p: &PauliString) -> Option<Affine> {
        let n = self.n;
        let w = self.w;
        let anti = |t: &Tableau, r: usize| {
            let mut a = false;
            for q in p.support().iter_ones() {
                a ^= (p.x.get(q) && Self::get(&t.z, w, r, q)) ^ (p.z.get(q) && Self::get(&t.x, w, r, q));
            }
            a
        };
        if (n..2 * n).any(|r| anti(self, r)) {
            return None;
        }
        let s = 2 * n;
        for k in 0..w {
            self.x[s * w + k] = 0;
            self.z[s * w + k] = 0;
        }
        self.sign[s] = Affine::zero(self.cw);
        for i in 0..n {
            if anti(self, i) {
                self.rowsum(s, i + n);
            }
        }
        for q in 0..n {
            if Self::get(&self.x, w, s, q) != p.x.get(q) || Self::get(&self.z, w, s, q) != p.z.get(q) {
                return None;
            }
        }
        let mut out = self.sign[s].clone();
        if p.sign.is_minus() {
            out.flip_constant();
        }
        Some(out)
    }
}

/// Symbolic record of a noiseless run.
#[derive(Clone, Debug)]
pub struct StabilizerRun {
    pub tableau: Tableau,
    pub outcomes: Vec<Option<Affine>>,
    /// Parity of each abort check, in execution order.
    pub checks: Vec<(u32, Vec<Key>, Affine)>,
}

impl StabilizerRun {
    pub fn outcome(&self, k: Key) -> &Affine {
        self.outcomes[k as usize].as_ref().expect("key measured")
    }

    pub fn parity(&self, keys: &[Key]) -> Affine {
        let mut a = Affine::zero(self.tableau.cw);
        for &k in keys {
            a.xor_assign(self.outcome(k));
        }
        a
    }

    /// Every abort check passes with certainty.
    pub fn all_checks_deterministic(&self) -> bool {
        self.checks.iter().all(|(_, _, a)| a.is_constant() && !a.constant())
    }
}

/// Noiseless stabilizer simulation of `circuit` in execution order.
pub fn simulate_stabilizer(circuit: &Circuit) -> Result<StabilizerRun> {
    simulate_with(circuit, |_, _, _| {})
}

/// Noiseless simulation of a program: after each decode's last measurement the
/// byproduct correction is applied, conditioned on the measured logical parity.
/// With no faults every syndrome is trivial, so the decoded class is zero and
/// the correction equals the measured logical value.
pub fn simulate_program(program: &Program) -> Result<StabilizerRun> {
    let exec = program.circuit.exec_order();
    let positions = program.inject_positions(&exec);
    let mut at: Vec<Vec<usize>> = vec![Vec::new(); exec.len() + 1];
    for (i, &p) in positions.iter().enumerate() {
        if !program.decodes[i].is_final {
            at[p].push(i);
        }
    }
    simulate_with(&program.circuit, |pos, t, outcomes| {
        for &di in &at[pos] {
            let d = &program.decodes[di];
            let DecodeSource::Keys(keys) = &d.source else { continue };
            let (_, log) = d.bit_rows();
            for (row, corr) in log.iter().zip(&d.corrections) {
                let mut f = Affine::zero(t.cw);
                for (i, &k) in keys.iter().enumerate() {
                    if row >> i & 1 == 1 {
                        if let Some(o) = &outcomes[k as usize] {
                            f.xor_assign(o);
                        }
                    }
                }
                t.apply_pauli_if(corr, &f);
            }
        }
    })
}

fn simulate_with(circuit: &Circuit, mut after: impl FnMut(usize, &mut Tableau, &[Option<Affine>])) -> Result<StabilizerRun> {
    let exec = circuit.exec_order();
    let coins = exec.iter().filter(|i| matches!(i.op, Op::MeasZ(..) | Op::MeasX(..) | Op::PrepZ(_) | Op::PrepX(_))).count();
    let mut t = Tableau::new(circuit.num_qubits, coins + 64);
    let mut outcomes: Vec<Option<Affine>> = vec![None; circuit.num_keys];
    let mut checks = Vec::new();
    for (pos, ins) in exec.iter().enumerate() {
        match &ins.op {
            Op::PrepZ(q) => t.prep_z(*q)?,
            Op::PrepX(q) => t.prep_x(*q)?,
            Op::Cnot(a, b) => t.cnot(*a, *b),
            Op::H(q) => t.h(*q),
            Op::Perm { qubits, sigma } => t.permute(qubits, sigma),
            Op::MeasZ(q, k) => outcomes[*k as usize] = Some(t.measure_z(*q)?),
            Op::MeasX(q, k) => outcomes[*k as usize] = Some(t.measure_x(*q)?),
            Op::Feed { .. } => {}
            Op::AbortIf(keys) => {
                let mut a = Affine::zero(t.cw);
                for k in keys {
                    a.xor_assign(outcomes[*k as usize].as_ref().ok_or_else(|| Error::InvalidCircuit("abort before measurement".into()))?);
                }
                checks.push((ins.group, keys.clone(), a));
            }
        }
        after(pos, &mut t, &outcomes);
    }
    Ok(StabilizerRun { tableau: t, outcomes, checks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Builder;

    #[test]
    fn zero_state_measures_zero() {
        let mut b = Builder::new();
        let q = b.alloc("q", 3);
        let keys: Vec<_> = q.iter().map(|&x| {
            b.prep_z(x);
            b.meas_z(x)
        }).collect();
        let run = simulate_stabilizer(&b.finish()).unwrap();
        for k in keys {
            assert!(run.outcome(k).is_constant() && !run.outcome(k).constant());
        }
    }

    #[test]
    fn bell_pair_correlations() {
        let mut b = Builder::new();
        let q = b.alloc("q", 2);
        b.prep_x(q[0]);
        b.prep_z(q[1]);
        b.cnot(q[0], q[1]);
        let a = b.meas_z(q[0]);
        let c = b.meas_z(q[1]);
        let run = simulate_stabilizer(&b.finish()).unwrap();
        assert!(!run.outcome(a).is_constant());
        let par = run.parity(&[a, c]);
        assert!(par.is_constant() && !par.constant());
    }

    #[test]
    fn peek_signs() {
        let mut t = Tableau::new(2, 8);
        t.h(0);
        t.cnot(0, 1);
        assert_eq!(t.peek(&PauliString::parse("XX").unwrap()).map(|a| a.constant()), Some(false));
        assert_eq!(t.peek(&PauliString::parse("YY").unwrap()).map(|a| a.constant()), Some(true));
        assert!(t.peek(&PauliString::parse("ZI").unwrap()).is_none());
        t.apply_pauli(&PauliString::parse("ZI").unwrap());
        assert_eq!(t.peek(&PauliString::parse("XX").unwrap()).map(|a| a.constant()), Some(true));
    }
}
