//! Dense Pauli-frame simulation, 64 shots per machine word.
//!
//! Slower than [`crate::effects::SparseSampler`] but shares none of its
//! precomputation, which makes it a useful reference.

use crate::circuit::{inject_noise, Instr, NoiseModel, Op, SiteKind};
use crate::code::PauliKind;
use crate::decoder::REJECT;
use crate::effects::SampleSummary;
use crate::error::Result;
use crate::parallel::{derive_seed, map_shards, shard_sizes};
use crate::program::{DecodeSource, Program};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct DenseSampler<'a> {
    program: &'a Program,
    exec: Vec<Instr>,
    noise: NoiseModel,
    /// Fault kind following each execution position.
    site_at: Vec<Option<SiteKind>>,
    /// Own instructions of each group as a range of positions.
    ranges: Vec<(usize, usize)>,
    children: Vec<Vec<usize>>,
    /// Decodes to run after each position, in program order.
    decode_at: Vec<Vec<usize>>,
}

struct Frames {
    x: Vec<u64>,
    z: Vec<u64>,
    rec: Vec<u64>,
    rejected: u64,
    failed: u64,
}

impl<'a> DenseSampler<'a> {
    pub fn new(program: &'a Program, noise: NoiseModel) -> Result<Self> {
        program.validate()?;
        let c = &program.circuit;
        let exec = c.exec_order();
        let mut site_at = vec![None; exec.len()];
        for s in inject_noise(&exec, &c.groups, &noise)? {
            site_at[s.pos] = Some(s.kind);
        }
        let ng = c.groups.len();
        let mut ranges = vec![(usize::MAX, 0); ng];
        for (i, ins) in exec.iter().enumerate() {
            let r = &mut ranges[ins.group as usize];
            r.0 = r.0.min(i);
            r.1 = i + 1;
        }
        for r in &mut ranges {
            if r.0 == usize::MAX {
                *r = (0, 0);
            }
        }
        let children = (0..ng).map(|g| c.children(g as u32).into_iter().map(|x| x as usize).collect()).collect();
        let mut decode_at = vec![Vec::new(); exec.len() + 1];
        for (i, p) in program.inject_positions(&exec).into_iter().enumerate() {
            decode_at[p].push(i);
        }
        Ok(DenseSampler { program, exec, noise, site_at, ranges, children, decode_at })
    }

    fn lanes(&self, rng: &mut ChaCha8Rng, mask: u64) -> u64 {
        let mut out = 0;
        let mut m = mask;
        while m != 0 {
            let l = m.trailing_zeros();
            if rng.random::<f64>() < self.noise.p {
                out |= 1 << l;
            }
            m &= m - 1;
        }
        out
    }

    fn exec_op(&self, f: &mut Frames, pos: usize, m: u64, rng: &mut ChaCha8Rng, checks: &mut u64) {
        match &self.exec[pos].op {
            Op::PrepZ(q) | Op::PrepX(q) => {
                f.x[*q] &= !m;
                f.z[*q] &= !m;
            }
            Op::Cnot(a, b) => {
                f.x[*b] ^= f.x[*a] & m;
                f.z[*a] ^= f.z[*b] & m;
            }
            Op::H(q) => {
                let (x, z) = (f.x[*q], f.z[*q]);
                f.x[*q] = (x & !m) | (z & m);
                f.z[*q] = (z & !m) | (x & m);
            }
            Op::Perm { qubits, sigma } => {
                let xs: Vec<u64> = qubits.iter().map(|&q| f.x[q]).collect();
                let zs: Vec<u64> = qubits.iter().map(|&q| f.z[q]).collect();
                for i in 0..qubits.len() {
                    let t = qubits[sigma[i]];
                    f.x[t] = (f.x[t] & !m) | (xs[i] & m);
                    f.z[t] = (f.z[t] & !m) | (zs[i] & m);
                }
            }
            Op::MeasZ(q, k) => f.rec[*k as usize] = (f.rec[*k as usize] & !m) | (f.x[*q] & m),
            Op::MeasX(q, k) => f.rec[*k as usize] = (f.rec[*k as usize] & !m) | (f.z[*q] & m),
            Op::AbortIf(keys) => *checks |= keys.iter().fold(0, |a, &k| a ^ f.rec[k as usize]) & m,
            Op::Feed { .. } => {}
        }
        let Some(kind) = self.site_at[pos] else { return };
        let hit = self.lanes(rng, m);
        let mut h = hit;
        while h != 0 {
            let l = h.trailing_zeros();
            let bit = 1u64 << l;
            let v = rng.random_range(1..=kind.choices());
            match kind {
                SiteKind::TwoQubit(a, b) => {
                    for (i, (q, xz)) in [(a, 0), (a, 1), (b, 0), (b, 1)].into_iter().enumerate() {
                        if v >> i & 1 == 1 {
                            if xz == 0 {
                                f.x[q] ^= bit
                            } else {
                                f.z[q] ^= bit
                            }
                        }
                    }
                }
                SiteKind::OneQubit(q) => {
                    if v & 1 == 1 {
                        f.x[q] ^= bit;
                    }
                    if v & 2 == 2 {
                        f.z[q] ^= bit;
                    }
                }
                SiteKind::Flip(k) => f.rec[k as usize] ^= bit,
                SiteKind::Prep(q, plus) => {
                    if plus {
                        f.z[q] ^= bit
                    } else {
                        f.x[q] ^= bit
                    }
                }
            }
            h &= h - 1;
        }
    }

    fn decode(&self, f: &mut Frames, di: usize, live: u64) {
        let d = &self.program.decodes[di];
        let t = &d.table;
        let words: Vec<u64> = match &d.source {
            DecodeSource::Keys(keys) => keys.iter().map(|&k| f.rec[k as usize]).collect(),
            DecodeSource::Frame { qubits, kind } => qubits
                .iter()
                .map(|&q| match kind {
                    PauliKind::X => f.x[q],
                    PauliKind::Z => f.z[q],
                })
                .collect(),
        };
        let mut m = live;
        while m != 0 {
            let l = m.trailing_zeros();
            m &= m - 1;
            let err = words.iter().enumerate().fold(0u64, |a, (i, w)| a | ((w >> l & 1) << i));
            let (s, c) = t.syndrome_of(err);
            let class = t.class_of(s);
            if class == REJECT {
                f.rejected |= 1 << l;
                continue;
            }
            let delta = c ^ class;
            if delta == 0 {
                continue;
            }
            if d.is_final {
                f.failed |= 1 << l;
                continue;
            }
            for (j, p) in d.corrections.iter().enumerate() {
                if delta >> j & 1 == 1 {
                    for q in p.support().iter_ones() {
                        f.x[q] ^= (p.x.get(q) as u64) << l;
                        f.z[q] ^= (p.z.get(q) as u64) << l;
                    }
                }
            }
        }
    }

    fn run_group(&self, f: &mut Frames, g: usize, active: u64, rng: &mut ChaCha8Rng, executions: &mut [u64]) {
        let mut todo = active;
        while todo != 0 {
            for &c in &self.children[g] {
                self.run_group(f, c, todo, rng, executions);
            }
            executions[g] += todo.count_ones() as u64;
            let mut checks = 0u64;
            let (a, b) = self.ranges[g];
            for pos in a..b {
                self.exec_op(f, pos, todo, rng, &mut checks);
                if g == 0 {
                    for &di in &self.decode_at[pos] {
                        self.decode(f, di, todo & !f.rejected);
                    }
                }
            }
            if g == 0 {
                for &di in &self.decode_at[self.exec.len()] {
                    self.decode(f, di, todo & !f.rejected);
                }
                f.rejected |= checks;
                return;
            }
            todo = checks;
        }
    }

    fn run_shard(&self, count: u64, seed: u64) -> SampleSummary {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = &self.program.circuit;
        let mut out = SampleSummary { executions: vec![0; self.ranges.len()], ..Default::default() };
        let mut left = count;
        while left > 0 {
            let n = left.min(64);
            left -= n;
            let live = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
            let mut f = Frames { x: vec![0; c.num_qubits], z: vec![0; c.num_qubits], rec: vec![0; c.num_keys], rejected: 0, failed: 0 };
            self.run_group(&mut f, 0, live, &mut rng, &mut out.executions);
            let acc = live & !f.rejected;
            out.shots += n;
            out.accepted += acc.count_ones() as u64;
            out.errors += (acc & f.failed).count_ones() as u64;
        }
        out
    }

    /// Samples `shots` shots; deterministic in `seed`.
    pub fn sample(&self, shots: u64, seed: u64) -> SampleSummary {
        let parts = map_shards(shard_sizes(shots), |(i, n)| self.run_shard(n, derive_seed(seed, i as u64)));
        let mut out = SampleSummary { executions: vec![0; self.ranges.len()], ..Default::default() };
        for p in parts {
            out.shots += p.shots;
            out.accepted += p.accepted;
            out.errors += p.errors;
            for (a, b) in out.executions.iter_mut().zip(&p.executions) {
                *a += b;
            }
        }
        out
    }
}
