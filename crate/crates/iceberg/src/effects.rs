//! Sparse fault sampler built on precomputed fault effects.
//!
//! Every elementary fault (one Pauli component after a gate, or one flipped
//! outcome) is propagated once through the rest of the circuit. Its effect is
//! stored as XOR masks over compact slots: the checks of each retry group and
//! the syndrome and logical bits of each decode step. A shot then costs time
//! proportional to the number of faults it contains.

use crate::circuit::{inject_noise, Instr, Key, NoiseModel, Op, Site, SiteKind};
use crate::code::PauliKind;
use crate::decoder::{DecoderTable, REJECT};
use crate::error::{Error, Result};
use crate::parallel::{derive_seed, map_shards, shard_sizes};
use crate::program::{DecodeSource, Program};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

/// A fault injected after execution position `pos`.
#[derive(Clone, Debug)]
pub(crate) enum Inject {
    Pauli { pos: usize, qubits: Vec<(usize, bool, bool)> },
    Flip { pos: usize, key: Key },
}

impl Inject {
    fn pos(&self) -> usize {
        match self {
            Inject::Pauli { pos, .. } | Inject::Flip { pos, .. } => *pos,
        }
    }
}

#[derive(Clone, Debug)]
struct DecodeMeta {
    slot: u32,
    syndrome_bits: u32,
    logical_mask: u32,
    table: Arc<DecoderTable>,
    is_final: bool,
    corr_basis: u32,
}

/// One sampled fault: site index and its nontrivial value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize)]
pub struct Fault {
    pub site: u32,
    pub value: u8,
}

/// The faults that shaped one shot; replaying them reproduces its outcome.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct FaultRecord {
    pub faults: Vec<Fault>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize)]
pub enum Outcome {
    Ok,
    LogicalError,
    Reject,
    /// A retry-group check fired; such a shot would have been prepared again.
    GroupTrip,
}

/// Aggregated counts of a sampling run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SampleSummary {
    pub shots: u64,
    pub accepted: u64,
    pub errors: u64,
    /// Number of times each group's own operations ran.
    pub executions: Vec<u64>,
    pub records: Vec<(Outcome, FaultRecord)>,
}

impl SampleSummary {
    fn merge(mut self, o: SampleSummary) -> SampleSummary {
        self.shots += o.shots;
        self.accepted += o.accepted;
        self.errors += o.errors;
        if self.executions.len() < o.executions.len() {
            self.executions.resize(o.executions.len(), 0);
        }
        for (a, b) in self.executions.iter_mut().zip(&o.executions) {
            *a += b;
        }
        self.records.extend(o.records);
        self
    }
}

pub struct SparseSampler {
    pub noise: NoiseModel,
    pub sites: Vec<Site>,
    n_slots: usize,
    eff: Vec<(u32, u32)>,
    eff_range: Vec<(u32, u32)>,
    site_basis: Vec<u32>,
    group_sites: Vec<Vec<u32>>,
    children: Vec<Vec<u32>>,
    subtree: Vec<Vec<u32>>,
    check_slots: Vec<Vec<u32>>,
    decodes: Vec<DecodeMeta>,
    pub group_cnots: Vec<u64>,
    rounds: u32,
}

struct ShotState {
    slots: Vec<u32>,
    applied: Vec<Vec<Fault>>,
    executions: Vec<u64>,
}

impl SparseSampler {
    pub fn new(program: &Program, noise: NoiseModel) -> Result<SparseSampler> {
        program.validate()?;
        let c = &program.circuit;
        let exec = c.exec_order();
        let sites = inject_noise(&exec, &c.groups, &noise)?;
        let ng = c.groups.len();

        // Slots: checks per group, then one per decode.
        let mut n_slots = 0usize;
        let mut check_bits: Vec<(u32, u32, Vec<Key>)> = Vec::new();
        let mut check_slots: Vec<Vec<u32>> = vec![Vec::new(); ng];
        let mut fill: Vec<u32> = vec![32; ng];
        for ins in &exec {
            if let Op::AbortIf(keys) = &ins.op {
                let g = ins.group as usize;
                if fill[g] == 32 {
                    check_slots[g].push(n_slots as u32);
                    n_slots += 1;
                    fill[g] = 0;
                }
                check_bits.push((*check_slots[g].last().unwrap(), fill[g], keys.clone()));
                fill[g] += 1;
            }
        }
        let positions = program.inject_positions(&exec);
        let mut order: Vec<usize> = (0..program.decodes.len()).collect();
        order.sort_by_key(|&i| positions[i]);
        let mut decodes = Vec::new();
        let (mut items, site_basis) = basis_items(&sites);
        for &i in &order {
            let d = &program.decodes[i];
            let slot = n_slots as u32;
            n_slots += 1;
            let corr_basis = items.len() as u32;
            if !d.is_final {
                for p in &d.corrections {
                    let qubits = p.support().iter_ones().map(|q| (q, p.x.get(q), p.z.get(q))).collect();
                    items.push(Inject::Pauli { pos: positions[i], qubits });
                }
            }
            decodes.push(DecodeMeta {
                slot,
                syndrome_bits: d.table.syndrome_bits as u32,
                logical_mask: ((1u64 << d.table.logical_bits) - 1) as u32,
                table: d.table.clone(),
                is_final: d.is_final,
                corr_basis,
            });
        }

        let (eff, eff_range) = propagate_all(program, &exec, &items, &check_bits, &order, &decodes, n_slots);

        // Corrections may only reach later decodes.
        let main_checks: Vec<u32> = check_slots[0].clone();
        for (k, d) in decodes.iter().enumerate() {
            if d.is_final {
                continue;
            }
            for j in 0..d.table.logical_bits as u32 {
                let (a, b) = eff_range[(d.corr_basis + j) as usize];
                for &(s, _) in &eff[a as usize..b as usize] {
                    if main_checks.contains(&s) || decodes[..=k].iter().any(|e| e.slot == s) {
                        return Err(Error::InvalidCircuit("a logical correction reaches a check or an earlier decode".into()));
                    }
                }
            }
        }

        let mut group_sites = vec![Vec::new(); ng];
        for (i, s) in sites.iter().enumerate() {
            group_sites[s.group as usize].push(i as u32);
        }
        let mut children = vec![Vec::new(); ng];
        for (i, g) in c.groups.iter().enumerate() {
            if let Some(p) = g.parent {
                children[p as usize].push(i as u32);
            }
        }
        let mut subtree = vec![Vec::new(); ng];
        for g in c.group_order() {
            let mut v = vec![g];
            for &ch in &children[g as usize] {
                v.extend(subtree[ch as usize].clone());
            }
            subtree[g as usize] = v;
        }
        let mut group_cnots = vec![0u64; ng];
        for ins in &exec {
            if ins.op.is_cnot() {
                group_cnots[ins.group as usize] += 1;
            }
        }
        Ok(SparseSampler {
            noise,
            sites,
            n_slots,
            eff,
            eff_range,
            site_basis,
            group_sites,
            children,
            subtree,
            check_slots,
            decodes,
            group_cnots,
            rounds: program.rounds,
        })
    }

    pub fn rounds(&self) -> u32 {
        self.rounds
    }

    pub fn num_groups(&self) -> usize {
        self.children.len()
    }

    #[inline]
    fn apply_basis(&self, slots: &mut [u32], b: u32) {
        let (a, e) = self.eff_range[b as usize];
        for &(s, m) in &self.eff[a as usize..e as usize] {
            slots[s as usize] ^= m;
        }
    }

    #[inline]
    fn apply_fault(&self, slots: &mut [u32], f: Fault) {
        let base = self.site_basis[f.site as usize];
        for bit in value_bits(f.value) {
            self.apply_basis(slots, base + bit);
        }
    }

    fn group_fires(&self, slots: &[u32], g: usize) -> bool {
        self.check_slots[g].iter().any(|&s| slots[s as usize] != 0)
    }

    fn sample_group(&self, st: &mut ShotState, g: usize, rng: &mut ChaCha8Rng) {
        let p = self.noise.p;
        let sites = &self.group_sites[g];
        if p <= 0.0 || sites.is_empty() {
            return;
        }
        let ln1mp = (1.0 - p).ln();
        let skip = |rng: &mut ChaCha8Rng| -> usize {
            if p >= 1.0 {
                return 0;
            }
            let u: f64 = 1.0 - rng.random::<f64>();
            let s = (u.ln() / ln1mp).floor();
            if s >= usize::MAX as f64 / 2.0 {
                usize::MAX / 2
            } else {
                s as usize
            }
        };
        let mut i = skip(rng);
        while i < sites.len() {
            let site = sites[i];
            let choices = self.sites[site as usize].kind.choices();
            let value = if choices == 1 { 1 } else { rng.random_range(1..=choices) };
            let f = Fault { site, value };
            self.apply_fault(&mut st.slots, f);
            st.applied[g].push(f);
            i = i.saturating_add(1 + skip(rng));
        }
    }

    fn run_group(&self, st: &mut ShotState, g: usize, rng: &mut ChaCha8Rng) {
        loop {
            for ci in 0..self.children[g].len() {
                let c = self.children[g][ci] as usize;
                self.run_group(st, c, rng);
            }
            st.executions[g] += 1;
            self.sample_group(st, g, rng);
            if g == 0 || !self.group_fires(&st.slots, g) {
                return;
            }
            for &h in &self.subtree[g] {
                let faults = std::mem::take(&mut st.applied[h as usize]);
                for f in faults {
                    self.apply_fault(&mut st.slots, f);
                }
            }
        }
    }

    /// Main checks and decoding on the accumulated slots.
    fn finish(&self, slots: &mut [u32]) -> Outcome {
        if self.group_fires(slots, 0) {
            return Outcome::Reject;
        }
        let mut error = false;
        for d in &self.decodes {
            let v = slots[d.slot as usize];
            let s = v & ((1u64 << d.syndrome_bits) - 1) as u32;
            let l = (v >> d.syndrome_bits) & d.logical_mask;
            let class = d.table.class_of(s as u64);
            if class == REJECT {
                return Outcome::Reject;
            }
            let delta = l ^ class as u32;
            if delta == 0 {
                continue;
            }
            if d.is_final {
                error = true;
            } else {
                let mut m = delta;
                while m != 0 {
                    let j = m.trailing_zeros();
                    self.apply_basis(slots, d.corr_basis + j);
                    m &= m - 1;
                }
            }
        }
        if error {
            Outcome::LogicalError
        } else {
            Outcome::Ok
        }
    }

    /// Outcome of a fixed fault set, without retries.
    pub fn evaluate(&self, faults: &[Fault]) -> Outcome {
        let mut slots = vec![0u32; self.n_slots];
        for &f in faults {
            self.apply_fault(&mut slots, f);
        }
        if (1..self.num_groups()).any(|g| self.group_fires(&slots, g)) {
            return Outcome::GroupTrip;
        }
        self.finish(&mut slots)
    }

    fn run_shard(&self, count: u64, seed: u64, keep_records: usize) -> SampleSummary {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ng = self.num_groups();
        let mut st = ShotState { slots: vec![0; self.n_slots], applied: vec![Vec::new(); ng], executions: vec![0; ng] };
        let mut out = SampleSummary { executions: vec![0; ng], ..Default::default() };
        for _ in 0..count {
            st.slots.iter_mut().for_each(|s| *s = 0);
            st.applied.iter_mut().for_each(|a| a.clear());
            self.run_group(&mut st, 0, &mut rng);
            let outcome = self.finish(&mut st.slots);
            out.shots += 1;
            match outcome {
                Outcome::Reject => {}
                Outcome::LogicalError => {
                    out.accepted += 1;
                    out.errors += 1;
                }
                _ => out.accepted += 1,
            }
            if keep_records > 0 && matches!(outcome, Outcome::Reject | Outcome::LogicalError) && out.records.len() < keep_records {
                let faults = st.applied.iter().flatten().copied().collect();
                out.records.push((outcome, FaultRecord { faults }));
            }
        }
        out.executions = st.executions;
        out
    }

    /// Samples `shots` shots; deterministic in `seed`.
    pub fn sample(&self, shots: u64, seed: u64) -> SampleSummary {
        self.sample_with_records(shots, seed, 0)
    }

    /// Like [`SparseSampler::sample`], keeping up to `keep` fault records of
    /// rejected or failed shots per shard.
    pub fn sample_with_records(&self, shots: u64, seed: u64, keep: usize) -> SampleSummary {
        let parts = map_shards(shard_sizes(shots), |(i, n)| self.run_shard(n, derive_seed(seed, i as u64), keep));
        parts.into_iter().fold(SampleSummary { executions: vec![0; self.num_groups()], ..Default::default() }, SampleSummary::merge)
    }

    /// Expected CNOTs per accepted output, counting every retried attempt.
    pub fn expected_cnots(&self, summary: &SampleSummary) -> f64 {
        let total: f64 = summary.executions.iter().zip(&self.group_cnots).map(|(&e, &c)| e as f64 * c as f64).sum();
        total / summary.accepted.max(1) as f64
    }

    /// Elementary fault list for exhaustive injection: every site with every value.
    pub fn all_single_faults(&self) -> Vec<Fault> {
        let mut v = Vec::new();
        for (i, s) in self.sites.iter().enumerate() {
            for value in 1..=s.kind.choices() {
                v.push(Fault { site: i as u32, value });
            }
        }
        v
    }
}

/// Propagates every injection through the rest of `exec` in batches of 64 and
/// hands the final frames to `observe`, which returns one value per lane.
pub(crate) fn propagate<T, F>(exec: &[Instr], num_qubits: usize, num_keys: usize, items: &[Inject], observe: F) -> Vec<T>
where
    T: Send + Clone + Default,
    F: Fn(&[u64], &[u64], &[u64], usize) -> Vec<T> + Sync + Send,
{
    let mut idx: Vec<usize> = (0..items.len()).collect();
    idx.sort_by_key(|&i| items[i].pos());
    let batches: Vec<Vec<usize>> = idx.chunks(64).map(|c| c.to_vec()).collect();
    let results: Vec<Vec<T>> = map_shards(batches.iter().enumerate().map(|(i, _)| (i, 0)).collect(), |(bi, _)| {
        let batch = &batches[bi];
        let mut x = vec![0u64; num_qubits];
        let mut z = vec![0u64; num_qubits];
        let mut rec = vec![0u64; num_keys];
        let start = items[batch[0]].pos();
        let mut next = 0;
        let inject = |lane: usize, it: &Inject, x: &mut [u64], z: &mut [u64], rec: &mut [u64]| match it {
            Inject::Pauli { qubits, .. } => {
                for &(q, xb, zb) in qubits {
                    x[q] ^= (xb as u64) << lane;
                    z[q] ^= (zb as u64) << lane;
                }
            }
            Inject::Flip { key, .. } => rec[*key as usize] ^= 1 << lane,
        };
        for (pos, ins) in exec.iter().enumerate().skip(start) {
            if pos > start {
                step(&ins.op, &mut x, &mut z, &mut rec);
            }
            while next < batch.len() && items[batch[next]].pos() == pos {
                inject(next, &items[batch[next]], &mut x, &mut z, &mut rec);
                next += 1;
            }
        }
        while next < batch.len() {
            inject(next, &items[batch[next]], &mut x, &mut z, &mut rec);
            next += 1;
        }
        observe(&x, &z, &rec, batch.len())
    });
    let mut out = vec![T::default(); items.len()];
    for (batch, r) in batches.iter().zip(results) {
        for (&item, v) in batch.iter().zip(r) {
            out[item] = v;
        }
    }
    out
}

/// Elementary injections of every site, with the first injection index per site.
pub(crate) fn basis_items(sites: &[Site]) -> (Vec<Inject>, Vec<u32>) {
    let mut items = Vec::new();
    let mut site_basis = Vec::with_capacity(sites.len());
    for s in sites {
        site_basis.push(items.len() as u32);
        match s.kind {
            SiteKind::TwoQubit(a, b) => {
                for (q, x, z) in [(a, true, false), (a, false, true), (b, true, false), (b, false, true)] {
                    items.push(Inject::Pauli { pos: s.pos, qubits: vec![(q, x, z)] });
                }
            }
            SiteKind::OneQubit(q) => {
                items.push(Inject::Pauli { pos: s.pos, qubits: vec![(q, true, false)] });
                items.push(Inject::Pauli { pos: s.pos, qubits: vec![(q, false, true)] });
            }
            SiteKind::Flip(k) => items.push(Inject::Flip { pos: s.pos, key: k }),
            SiteKind::Prep(q, plus) => items.push(Inject::Pauli { pos: s.pos, qubits: vec![(q, !plus, plus)] }),
        }
    }
    (items, site_basis)
}

/// Bits of the basis injections selected by fault value `v` at a site.
pub(crate) fn value_bits(v: u8) -> impl Iterator<Item = u32> {
    (0..8u32).filter(move |b| v >> b & 1 == 1)
}

fn propagate_all(
    program: &Program,
    exec: &[Instr],
    items: &[Inject],
    check_bits: &[(u32, u32, Vec<Key>)],
    order: &[usize],
    decodes: &[DecodeMeta],
    n_slots: usize,
) -> (Vec<(u32, u32)>, Vec<(u32, u32)>) {
    let c = &program.circuit;
    let decode_rows: Vec<(Vec<u64>, Vec<u64>)> = order.iter().map(|&i| program.decodes[i].bit_rows()).collect();
    let per_item: Vec<Vec<(u32, u32)>> = propagate(exec, c.num_qubits, c.num_keys, items, |x, z, rec, lanes| {
        let mut masks = vec![0u32; 64 * n_slots];
        let mut put = |slot: u32, bit: u32, word: u64| {
            let mut w = word;
            while w != 0 {
                let l = w.trailing_zeros() as usize;
                masks[l * n_slots + slot as usize] |= 1 << bit;
                w &= w - 1;
            }
        };
        for (slot, bit, keys) in check_bits {
            let w = keys.iter().fold(0u64, |a, &k| a ^ rec[k as usize]);
            put(*slot, *bit, w);
        }
        for (di, &pi) in order.iter().enumerate() {
            let d = &program.decodes[pi];
            let bits: Vec<u64> = match &d.source {
                DecodeSource::Keys(keys) => keys.iter().map(|&k| rec[k as usize]).collect(),
                DecodeSource::Frame { qubits, kind } => qubits
                    .iter()
                    .map(|&q| match kind {
                        PauliKind::X => x[q],
                        PauliKind::Z => z[q],
                    })
                    .collect(),
            };
            let (syn, log) = &decode_rows[di];
            let parity = |row: u64| {
                let mut w = 0u64;
                let mut r = row;
                while r != 0 {
                    w ^= bits[r.trailing_zeros() as usize];
                    r &= r - 1;
                }
                w
            };
            for (b, &row) in syn.iter().enumerate() {
                put(decodes[di].slot, b as u32, parity(row));
            }
            for (b, &row) in log.iter().enumerate() {
                put(decodes[di].slot, (syn.len() + b) as u32, parity(row));
            }
        }
        (0..lanes)
            .map(|lane| {
                let m = &masks[lane * n_slots..(lane + 1) * n_slots];
                m.iter().enumerate().filter(|(_, &v)| v != 0).map(|(s, &v)| (s as u32, v)).collect()
            })
            .collect()
    });
    let mut eff = Vec::new();
    let mut range = Vec::with_capacity(items.len());
    for e in per_item {
        let a = eff.len() as u32;
        eff.extend(e);
        range.push((a, eff.len() as u32));
    }
    (eff, range)
}

/// Pauli-frame update for one operation over 64 lanes.
#[inline]
pub(crate) fn step(op: &Op, x: &mut [u64], z: &mut [u64], rec: &mut [u64]) {
    match op {
        Op::PrepZ(q) | Op::PrepX(q) => {
            x[*q] = 0;
            z[*q] = 0;
        }
        Op::Cnot(a, b) => {
            x[*b] ^= x[*a];
            z[*a] ^= z[*b];
        }
        Op::H(q) => std::mem::swap(&mut x[*q], &mut z[*q]),
        Op::Perm { qubits, sigma } => {
            let xs: Vec<u64> = qubits.iter().map(|&q| x[q]).collect();
            let zs: Vec<u64> = qubits.iter().map(|&q| z[q]).collect();
            for i in 0..qubits.len() {
                x[qubits[sigma[i]]] = xs[i];
                z[qubits[sigma[i]]] = zs[i];
            }
        }
        Op::MeasZ(q, k) => rec[*k as usize] ^= x[*q],
        Op::MeasX(q, k) => rec[*k as usize] ^= z[*q],
        Op::AbortIf(_) | Op::Feed { .. } => {}
    }
}

/// Smallest subset of `record` reproducing `target`; exhaustive up to twelve
/// faults, greedy descent above. Returns the subset and whether it is exact.
pub fn minimal_fault_subset(sampler: &SparseSampler, record: &FaultRecord, target: Outcome) -> (Vec<Fault>, bool) {
    let f = &record.faults;
    if f.len() <= 12 {
        for size in 0..=f.len() {
            for combo in crate::bits::Combinations::new(f.len(), size) {
                let sub: Vec<Fault> = combo.iter().map(|&i| f[i]).collect();
                if sampler.evaluate(&sub) == target {
                    return (sub, true);
                }
            }
        }
        return (f.clone(), true);
    }
    let mut cur = f.clone();
    let mut i = 0;
    while i < cur.len() {
        let mut trial = cur.clone();
        trial.remove(i);
        if sampler.evaluate(&trial) == target {
            cur = trial;
        } else {
            i += 1;
        }
    }
    (cur, false)
}
