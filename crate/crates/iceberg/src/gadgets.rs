//! Logical gadgets on code blocks: Steane-style error correction, transversal
//! and teleported CNOTs, targeted CNOT schedules and flag-based error detection
//! for Iceberg codes. An [`Assembly`] strings gadgets together into a
//! [`Program`]; every ancilla preparation runs in its own retry group.

use crate::circuit::{Builder, Key, NoiseModel};
use crate::code::{LogicalAction, PauliKind, StabilizerCode};
use crate::decoder::DecoderTable;
use crate::error::{Error, Result};
use crate::pauli::{Letter, PauliString, Sign};
use crate::program::{DecodeInstance, DecodeSource, Program};
use crate::synth::{
    all_plus, bell_fragment, encode, inject_with, scratch_need, verified_fragment, wirings, decompose, Check, Fragment,
    ResidualJudge, Source,
};
use crate::tableau::{simulate_program, simulate_stabilizer};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// X- and Z-type lookup tables of a code, built once per process.
pub fn decoder_tables(code: &StabilizerCode) -> Result<(Arc<DecoderTable>, Arc<DecoderTable>)> {
    type Pair = (Arc<DecoderTable>, Arc<DecoderTable>);
    static CACHE: OnceLock<Mutex<HashMap<[u8; 32], Pair>>> = OnceLock::new();
    let key = code.content_hash();
    if let Some(t) = CACHE.get_or_init(Default::default).lock().unwrap().get(&key) {
        return Ok(t.clone());
    }
    let tx = Arc::new(DecoderTable::build(code, PauliKind::X, None)?);
    let tz = Arc::new(DecoderTable::build(code, PauliKind::Z, None)?);
    CACHE.get_or_init(Default::default).lock().unwrap().insert(key, (tx.clone(), tz.clone()));
    Ok((tx, tz))
}

struct Pending {
    label: String,
    source: DecodeSource,
    kind: PauliKind,
    corrections: Vec<Vec<(usize, Letter)>>,
    is_final: bool,
}

/// Incremental construction of a program over blocks of one code.
pub struct Assembly {
    pub b: Builder,
    src: Source,
    tx: Arc<DecoderTable>,
    tz: Arc<DecoderTable>,
    pool: Vec<usize>,
    pending: Vec<Pending>,
    blocks: usize,
}

impl Assembly {
    pub fn new(src: Source) -> Result<Assembly> {
        let (tx, tz) = decoder_tables(src.code())?;
        Ok(Assembly { b: Builder::new(), src, tx, tz, pool: Vec::new(), pending: Vec::new(), blocks: 0 })
    }

    pub fn code(&self) -> &StabilizerCode {
        self.src.code()
    }

    pub fn source(&self) -> &Source {
        &self.src
    }

    /// A fresh register of one block.
    pub fn block(&mut self, label: &str) -> Vec<usize> {
        self.blocks += 1;
        let n = self.code().n;
        self.b.alloc(format!("{label}{}", self.blocks), n)
    }

    /// Scratch qubits shared by sibling preparations; each one prepares them anew.
    pub fn scratch(&mut self, need: usize) -> Vec<usize> {
        if self.pool.len() < need {
            let more = self.b.alloc(format!("pool{}", self.pool.len()), need - self.pool.len());
            self.pool.extend(more);
        }
        self.pool[..need].to_vec()
    }

    /// Embeds `frag` as a retry group; its outputs land on fresh blocks.
    pub fn embed_fragment(&mut self, frag: &Fragment, noisy: bool) -> Vec<usize> {
        let mut out = Vec::with_capacity(frag.outputs);
        for _ in 0..frag.outputs / self.code().n {
            out.extend(self.block("blk"));
        }
        let mut map = out.clone();
        map.extend(self.scratch(frag.circuit.num_qubits - frag.outputs));
        self.b.embed(&frag.circuit, &map, Some((&frag.name, noisy)));
        out
    }

    /// Verified preparation of the product state `plus`.
    pub fn prepare(&mut self, plus: u32) -> Result<Vec<usize>> {
        let f = verified_fragment(&self.src, plus)?;
        Ok(self.embed_fragment(&f, true))
    }

    /// Noiseless encoder of `plus`, used for perfect inputs.
    pub fn prepare_ideal(&mut self, plus: u32) -> Result<Vec<usize>> {
        let out = self.block("ideal");
        let scratch = self.scratch(scratch_need(&self.src)?);
        let prev = self.b.open("ideal", false);
        let src = self.src.clone();
        encode(&mut self.b, &out, &src, plus, &scratch)?;
        self.b.close(prev);
        Ok(out)
    }

    /// Verified logical Bell pairs between two fresh blocks.
    pub fn bell_pair(&mut self) -> Result<(Vec<usize>, Vec<usize>)> {
        let f = bell_fragment(&self.src)?;
        let out = self.embed_fragment(&f, true);
        let n = self.code().n;
        Ok((out[..n].to_vec(), out[n..].to_vec()))
    }

    fn logical(&self, kind: PauliKind, i: usize, block: &[usize]) -> Vec<(usize, Letter)> {
        let (ops, letter) = match kind {
            PauliKind::X => (&self.code().logical_x, Letter::X),
            PauliKind::Z => (&self.code().logical_z, Letter::Z),
        };
        ops[i].support().iter_ones().map(|q| (block[q], letter)).collect()
    }

    fn push_decode(&mut self, kind: PauliKind, keys: Vec<Key>, fix: &[&[usize]], label: &str) {
        let k = self.code().k;
        let corrections: Vec<Vec<(usize, Letter)>> =
            (0..k).map(|i| fix.iter().flat_map(|blk| self.logical(kind, i, blk)).collect()).collect();
        let mut qubits: Vec<usize> = fix.iter().flat_map(|blk| blk.iter().copied()).collect();
        qubits.sort_unstable();
        self.b.feed(keys.clone(), qubits);
        let label = format!("{label}{}", self.pending.len());
        self.pending.push(Pending { label, source: DecodeSource::Keys(keys), kind, corrections, is_final: false });
    }

    /// Teleports `data` into a fresh `|+…+⟩` block, reading X errors off the
    /// Z-basis measurement of `data`.
    pub fn x_ec(&mut self, data: &[usize]) -> Result<Vec<usize>> {
        let a = self.prepare(all_plus(self.code().k))?;
        self.b.transversal_cnot(&a, data);
        let keys = data.iter().map(|&q| self.b.meas_z(q)).collect();
        self.push_decode(PauliKind::X, keys, &[&a], "x-ec");
        Ok(a)
    }

    /// Teleports `data` into a fresh `|0…0⟩` block, reading Z errors off the
    /// X-basis measurement of `data`.
    pub fn z_ec(&mut self, data: &[usize]) -> Result<Vec<usize>> {
        let a = self.prepare(0)?;
        self.b.transversal_cnot(data, &a);
        let keys = data.iter().map(|&q| self.b.meas_x(q)).collect();
        self.push_decode(PauliKind::Z, keys, &[&a], "z-ec");
        Ok(a)
    }

    /// One round of Steane-style correction: X then Z, by two teleportations.
    pub fn steane_ec(&mut self, data: &[usize]) -> Result<Vec<usize>> {
        let a = self.x_ec(data)?;
        self.z_ec(&a)
    }

    pub fn transversal_cnot(&mut self, control: &[usize], target: &[usize]) {
        self.b.transversal_cnot(control, target);
    }

    /// Logical CNOT from `control` to `target` by teleportation through a Bell
    /// pair; the outputs carry built-in X correction of the control and Z
    /// correction of the target.
    pub fn teleported_cnot(&mut self, control: &[usize], target: &[usize]) -> Result<(Vec<usize>, Vec<usize>)> {
        let (a, bb) = self.bell_pair()?;
        self.b.transversal_cnot(&a, control);
        let keys = control.iter().map(|&q| self.b.meas_z(q)).collect();
        self.push_decode(PauliKind::X, keys, &[&a, &bb], "tele-x");
        self.b.transversal_cnot(target, &bb);
        let keys = target.iter().map(|&q| self.b.meas_x(q)).collect();
        self.push_decode(PauliKind::Z, keys, &[&a, &bb], "tele-z");
        Ok((a, bb))
    }

    /// Runs a targeted CNOT schedule on two blocks, with correction rounds
    /// where the schedule asks for them.
    pub fn apply_schedule(&mut self, sched: &CnotSchedule, blocks: [Vec<usize>; 2]) -> Result<[Vec<usize>; 2]> {
        let [mut a, mut bb] = blocks;
        for step in &sched.steps {
            match step {
                ScheduleStep::Transversal { from, perm } => {
                    let (s, t) = if *from == 0 { (&a, &bb) } else { (&bb, &a) };
                    for (q, &p) in perm.iter().enumerate() {
                        self.b.cnot(s[q], t[p]);
                    }
                }
                ScheduleStep::Permute { block, sigma } => {
                    let qs = if *block == 0 { &a } else { &bb };
                    self.b.perm(qs, sigma);
                }
                ScheduleStep::Ec => {
                    a = self.steane_ec(&a)?;
                    bb = self.steane_ec(&bb)?;
                }
            }
        }
        Ok([a, bb])
    }

    /// Flag-based detection of every stabilizer of an Iceberg block.
    pub fn detect(&mut self, data: &[usize]) -> Result<()> {
        let g = iceberg_detect_gadget(&self.code().name)?;
        let extra = self.b.alloc("flagged", 2);
        let mut map = data.to_vec();
        map.extend(extra);
        self.b.embed(&g.circuit, &map, None);
        Ok(())
    }

    /// Transversal measurement decoded by an ideal decoder; `kind` names the
    /// error type read, so `X` measures in the Z basis.
    pub fn measure_final(&mut self, data: &[usize], kind: PauliKind) {
        let keys = data
            .iter()
            .map(|&q| match kind {
                PauliKind::X => self.b.meas_z(q),
                PauliKind::Z => self.b.meas_x(q),
            })
            .collect();
        let label = format!("final{}", self.pending.len());
        self.pending.push(Pending { label, source: DecodeSource::Keys(keys), kind, corrections: vec![], is_final: true });
    }

    /// Ideal decoding of the residual X and Z errors left on `data`.
    pub fn decode_frame(&mut self, data: &[usize]) {
        for kind in [PauliKind::X, PauliKind::Z] {
            let label = format!("frame{}", self.pending.len());
            let source = DecodeSource::Frame { qubits: data.to_vec(), kind };
            self.pending.push(Pending { label, source, kind, corrections: vec![], is_final: true });
        }
    }

    pub fn finish(self, name: impl Into<String>, rounds: u32) -> Program {
        let circuit = self.b.finish();
        let width = circuit.num_qubits;
        let decodes = self
            .pending
            .into_iter()
            .map(|p| {
                let corrections = p
                    .corrections
                    .iter()
                    .map(|c| {
                        let mut ps = PauliString::identity(width);
                        for &(q, l) in c {
                            let (x, z) = l.bits();
                            let (ox, oz) = ps.get(q).bits();
                            ps.set(q, Letter::from_bits(x ^ ox, z ^ oz));
                        }
                        ps
                    })
                    .collect();
                let table = match p.kind {
                    PauliKind::X => self.tx.clone(),
                    PauliKind::Z => self.tz.clone(),
                };
                DecodeInstance { label: p.label, source: p.source, table, corrections, is_final: p.is_final }
            })
            .collect();
        Program { name: name.into(), circuit, decodes, rounds }
    }
}

/// One step of a targeted CNOT schedule over blocks `0` and `1`.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub enum ScheduleStep {
    /// `CNOT(from[q] → other[perm[q]])` for every `q`.
    Transversal { from: usize, perm: Vec<usize> },
    /// Qubit relabeling of one block by an automorphism.
    Permute { block: usize, sigma: Vec<usize> },
    /// A correction round on both blocks.
    Ec,
}

/// Steps whose composite logical action on two blocks is a single CNOT.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct CnotSchedule {
    pub k: usize,
    /// Logical indices over both blocks: `0..k` in block 0, `k..2k` in block 1.
    pub control: usize,
    pub target: usize,
    pub steps: Vec<ScheduleStep>,
}

impl CnotSchedule {
    pub fn transversal_rounds(&self) -> usize {
        self.steps.iter().filter(|s| matches!(s, ScheduleStep::Transversal { .. })).count()
    }
}

/// Schedule for a CNOT between logical qubits `control` and `target` of two
/// blocks. Across blocks it sums wired transversal rounds with correction in
/// between; within a block it needs an automorphism acting as that CNOT.
pub fn targeted_cnot_schedule(code: &StabilizerCode, control: usize, target: usize) -> Result<CnotSchedule> {
    let k = code.k;
    if control == target {
        return Err(Error::InvalidArgument("control and target coincide".into()));
    }
    if control >= 2 * k || target >= 2 * k {
        return Err(Error::InvalidArgument(format!("logical index out of range 0..{}", 2 * k)));
    }
    let (cb, ci) = (control / k, control % k);
    let (tb, ti) = (target / k, target % k);
    let mut steps = Vec::new();
    if cb == tb {
        let want = LogicalAction::cnot(k, ci, ti);
        let ws = wirings(code)?;
        let sigma = ws
            .iter()
            .map(|w| &w.perm)
            .find(|p| {
                code.logical_action_of_permutation(p)
                    .map(|a| a.matrix == want.matrix && a.signs.iter().all(|&s| s == Sign::Plus))
                    .unwrap_or(false)
            })
            .ok_or_else(|| Error::Synthesis(format!("no automorphism realizes CNOT {ci}->{ti} within a block")))?;
        steps.push(ScheduleStep::Permute { block: cb, sigma: sigma.clone() });
    } else {
        let ws = wirings(code)?;
        let target_mat = 1u16 << (ti * k + ci);
        let terms = decompose(target_mat, &ws, 4)
            .ok_or_else(|| Error::Synthesis(format!("CNOT {control}->{target} is not a sum of realizable wirings")))?;
        for (i, t) in terms.into_iter().enumerate() {
            if i > 0 {
                steps.push(ScheduleStep::Ec);
            }
            steps.push(ScheduleStep::Transversal { from: cb, perm: ws[t].perm.clone() });
        }
    }
    Ok(CnotSchedule { k, control, target, steps })
}

/// Flag-based error detection for an `[[n, n-2, 2]]` Iceberg block: the
/// all-X and all-Z stabilizers are each measured by one ancilla with one flag.
#[derive(Clone, Debug)]
pub struct DetectGadget {
    pub circuit: crate::circuit::Circuit,
    /// Data CNOT indices before which the flag is coupled.
    pub flags: (usize, usize),
}

fn flagged_check(b: &mut Builder, data: &[usize], anc: usize, flag: usize, check: Check, flags: (usize, usize)) {
    let n = data.len();
    match check {
        Check::X => {
            b.prep_x(anc);
            b.prep_z(flag);
        }
        Check::Z => {
            b.prep_z(anc);
            b.prep_x(flag);
        }
    }
    for i in 0..=n {
        if i == flags.0 || i == flags.1 {
            match check {
                Check::X => b.cnot(anc, flag),
                Check::Z => b.cnot(flag, anc),
            }
        }
        if i < n {
            match check {
                Check::X => b.cnot(anc, data[i]),
                Check::Z => b.cnot(data[i], anc),
            }
        }
    }
    let (ka, kf) = match check {
        Check::X => (b.meas_x(anc), b.meas_z(flag)),
        Check::Z => (b.meas_z(anc), b.meas_x(flag)),
    };
    b.abort_if(vec![ka]);
    b.abort_if(vec![kf]);
}

fn detect_circuit(n: usize, flags: (usize, usize)) -> crate::circuit::Circuit {
    let mut b = Builder::new();
    let data = b.alloc("data", n);
    let anc = b.alloc("anc", 1)[0];
    let flag = b.alloc("flag", 1)[0];
    flagged_check(&mut b, &data, anc, flag, Check::X, flags);
    flagged_check(&mut b, &data, anc, flag, Check::Z, flags);
    b.finish()
}

/// The detection gadget of `c422` or `c642`, with flag positions chosen as
/// the first pair under which every single fault is detected or leaves a
/// residual of weight at most one.
pub fn iceberg_detect_gadget(name: &str) -> Result<Arc<DetectGadget>> {
    static CACHE: OnceLock<Mutex<HashMap<String, Arc<DetectGadget>>>> = OnceLock::new();
    if let Some(g) = CACHE.get_or_init(Default::default).lock().unwrap().get(name) {
        return Ok(g.clone());
    }
    if name != "c422" && name != "c642" {
        return Err(Error::InvalidArgument(format!("no detection gadget for {name}")));
    }
    let code = crate::factory::catalog(name)?;
    let n = code.n;
    let judge = ResidualJudge::new(&code, 0, true)?;
    for f0 in 0..=n {
        for f1 in f0 + 1..=n {
            let g = detect_circuit(n, (f0, f1));
            let mut b = Builder::new();
            let qs = b.alloc("data", n + 2);
            let prev = b.open("ideal", false);
            crate::synth::steane_state(&mut b, &qs[..n], code.hx().rows());
            b.close(prev);
            b.embed(&g, &qs, None);
            let rep = inject_with(&b.finish(), &qs[..n], &judge, false)?;
            if rep.order1_bad == 0 {
                let g = Arc::new(DetectGadget { circuit: g, flags: (f0, f1) });
                CACHE.get_or_init(Default::default).lock().unwrap().insert(name.to_string(), g.clone());
                return Ok(g);
            }
        }
    }
    Err(Error::Synthesis(format!("no flag placement makes the {name} gadget fault tolerant")))
}

/// Checks that `build`, applied to `inputs` blocks holding the halves of
/// maximally entangled pairs with reference qubits, acts as `expected` on the
/// logical qubits (basis `X_1..X_K, Z_1..Z_K` over all blocks) and leaves
/// every output block in the code space. Noiseless; byproducts are applied.
pub fn verify_action<F>(src: &Source, inputs: usize, build: F, expected: &LogicalAction) -> Result<bool>
where
    F: FnOnce(&mut Assembly, Vec<Vec<usize>>) -> Result<Vec<Vec<usize>>>,
{
    let mut asm = Assembly::new(src.clone())?;
    let code = asm.code().clone();
    let k = code.k;
    let kk = k * inputs;
    if expected.k != kk {
        return Err(Error::InvalidArgument("logical action size does not match the inputs".into()));
    }
    let refs = asm.b.alloc("ref", kk);
    let ins: Vec<Vec<usize>> = (0..inputs).map(|_| asm.block("in")).collect();
    let scratch = asm.scratch(scratch_need(src)?);
    for blk in &ins {
        encode(&mut asm.b, blk, src, 0, &scratch)?;
    }
    for (r, &rq) in refs.iter().enumerate() {
        asm.b.prep_x(rq);
        for q in code.logical_x[r % k].support().iter_ones() {
            asm.b.cnot(rq, ins[r / k][q]);
        }
    }
    let outs = build(&mut asm, ins)?;
    if outs.len() != inputs {
        return Err(Error::InvalidArgument("gadget changes the number of blocks".into()));
    }
    let program = asm.finish("action-check", 1);
    let mut run = simulate_program(&program)?;
    if !run.all_checks_deterministic() {
        return Ok(false);
    }
    let width = program.circuit.num_qubits;
    let place = |ps: &mut PauliString, op: &PauliString, blk: &[usize]| {
        for q in op.support().iter_ones() {
            let (x, z) = op.get(q).bits();
            let (ox, oz) = ps.get(blk[q]).bits();
            ps.set(blk[q], Letter::from_bits(x ^ ox, z ^ oz));
        }
    };
    let positive = |a: Option<crate::tableau::Affine>| matches!(a, Some(v) if v.is_constant() && !v.constant());
    for j in 0..2 * kk {
        let mut p = PauliString::identity(width);
        p.set(refs[j % kk], if j < kk { Letter::X } else { Letter::Z });
        let img = expected.image(j);
        for i in img.iter_ones() {
            let (op, l) = if i < kk { (&code.logical_x[i % k], i) } else { (&code.logical_z[(i - kk) % k], i - kk) };
            place(&mut p, op, &outs[l / k]);
        }
        if !positive(run.tableau.peek(&p)) {
            return Ok(false);
        }
    }
    for blk in &outs {
        for g in code.generators() {
            let mut p = PauliString::identity(width);
            place(&mut p, g, blk);
            if !positive(run.tableau.peek(&p)) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Noiseless check that a preparation fragment outputs the state `plus`:
/// every check passes and every stabilizer and state logical has value +1.
pub fn verify_preparation(frag: &Fragment, code: &StabilizerCode, plus: u32) -> Result<bool> {
    let mut run = simulate_stabilizer(&frag.circuit)?;
    if !run.all_checks_deterministic() {
        return Ok(false);
    }
    let width = frag.circuit.num_qubits;
    let lift = |p: &PauliString| {
        let mut out = PauliString::identity(width);
        for q in p.support().iter_ones() {
            out.set(q, p.get(q));
        }
        out
    };
    let mut ops: Vec<PauliString> = code.generators().to_vec();
    for i in 0..code.k {
        ops.push(if plus >> i & 1 == 1 { code.logical_x[i].clone() } else { code.logical_z[i].clone() });
    }
    Ok(ops.iter().all(|p| matches!(run.tableau.peek(&lift(p)), Some(v) if v.is_constant() && !v.constant())))
}

/// Circuit-level noise at rate `p`.
pub fn circuit_noise(p: f64) -> Result<NoiseModel> {
    NoiseModel::new(p)
}
