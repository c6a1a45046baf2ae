//! Circuits over numbered qubits with retry groups, greedy scheduling and a
//! line-oriented text format.

use crate::error::{Error, Result};
use std::fmt::Write as _;

pub type Key = u32;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Op {
    PrepZ(usize),
    PrepX(usize),
    Cnot(usize, usize),
    H(usize),
    /// The state of `qubits[i]` moves to `qubits[sigma[i]]`.
    Perm { qubits: Vec<usize>, sigma: Vec<usize> },
    MeasZ(usize, Key),
    MeasX(usize, Key),
    /// Abort when the parity of the listed outcomes differs from the noiseless reference.
    AbortIf(Vec<Key>),
    /// Point where a correction decided by `keys` is applied to `qubits`.
    Feed { keys: Vec<Key>, qubits: Vec<usize> },
}

impl Op {
    pub fn qubits(&self) -> Vec<usize> {
        match self {
            Op::PrepZ(q) | Op::PrepX(q) | Op::H(q) | Op::MeasZ(q, _) | Op::MeasX(q, _) => vec![*q],
            Op::Cnot(a, b) => vec![*a, *b],
            Op::Perm { qubits, .. } | Op::Feed { qubits, .. } => qubits.clone(),
            Op::AbortIf(_) => vec![],
        }
    }

    pub fn is_cnot(&self) -> bool {
        matches!(self, Op::Cnot(..))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instr {
    pub group: u32,
    pub op: Op,
}

/// A retry group: when one of its checks fires, the group and everything nested
/// in it is prepared again. Group 0 is the main circuit, whose checks reject the shot.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Group {
    pub parent: Option<u32>,
    pub noisy: bool,
    pub label: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Register {
    pub name: String,
    pub start: usize,
    pub len: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Circuit {
    pub num_qubits: usize,
    pub num_keys: usize,
    pub registers: Vec<Register>,
    pub groups: Vec<Group>,
    pub moments: Vec<Vec<Instr>>,
}

impl Circuit {
    pub fn instrs(&self) -> impl Iterator<Item = &Instr> {
        self.moments.iter().flatten()
    }

    pub fn cnot_count(&self) -> usize {
        self.instrs().filter(|i| i.op.is_cnot()).count()
    }

    pub fn depth(&self) -> usize {
        self.moments.len()
    }

    /// Groups in post-order (children before parents), main last.
    pub fn group_order(&self) -> Vec<u32> {
        let mut children: Vec<Vec<u32>> = vec![Vec::new(); self.groups.len()];
        for (i, g) in self.groups.iter().enumerate() {
            if let Some(p) = g.parent {
                children[p as usize].push(i as u32);
            }
        }
        let mut out = Vec::with_capacity(self.groups.len());
        fn visit(g: u32, ch: &[Vec<u32>], out: &mut Vec<u32>) {
            for &c in &ch[g as usize] {
                visit(c, ch, out);
            }
            out.push(g);
        }
        visit(0, &children, &mut out);
        out
    }

    pub fn children(&self, g: u32) -> Vec<u32> {
        (0..self.groups.len() as u32).filter(|&c| self.groups[c as usize].parent == Some(g)).collect()
    }

    /// Instructions in execution order: groups in post-order, each group's own
    /// instructions in time order.
    pub fn exec_order(&self) -> Vec<Instr> {
        let order = self.group_order();
        let mut rank = vec![0usize; self.groups.len()];
        for (r, &g) in order.iter().enumerate() {
            rank[g as usize] = r;
        }
        let mut v: Vec<(usize, usize, &Instr)> = Vec::new();
        let mut idx = 0;
        for m in &self.moments {
            for ins in m {
                v.push((rank[ins.group as usize], idx, ins));
                idx += 1;
            }
        }
        v.sort_by_key(|t| (t.0, t.1));
        v.into_iter().map(|t| t.2.clone()).collect()
    }

    pub fn register(&self, name: &str) -> Option<&Register> {
        self.registers.iter().find(|r| r.name == name)
    }

    /// Checks qubit disjointness per moment, key uniqueness and key ordering.
    pub fn validate(&self) -> Result<()> {
        let mut measured = vec![false; self.num_keys];
        for (t, m) in self.moments.iter().enumerate() {
            let mut used = std::collections::HashSet::new();
            let mut pending = Vec::new();
            for ins in m {
                if ins.group as usize >= self.groups.len() {
                    return Err(Error::InvalidCircuit(format!("unknown group {}", ins.group)));
                }
                for q in ins.op.qubits() {
                    if q >= self.num_qubits {
                        return Err(Error::InvalidCircuit(format!("qubit {q} out of range")));
                    }
                    if !used.insert(q) {
                        return Err(Error::InvalidCircuit(format!("qubit {q} used twice in moment {t}")));
                    }
                }
                match &ins.op {
                    Op::MeasZ(_, k) | Op::MeasX(_, k) => {
                        let k = *k as usize;
                        if k >= self.num_keys || measured[k] {
                            return Err(Error::InvalidCircuit(format!("key {k} reused or out of range")));
                        }
                        pending.push(k);
                    }
                    Op::AbortIf(keys) | Op::Feed { keys, .. } => {
                        if let Some(k) = keys.iter().find(|&&k| (k as usize) >= self.num_keys || !measured[k as usize]) {
                            return Err(Error::InvalidCircuit(format!("reference to unmeasured key {k}")));
                        }
                    }
                    Op::Perm { qubits, sigma } => crate::pauli::check_permutation(sigma, qubits.len())?,
                    _ => {}
                }
            }
            for k in pending {
                measured[k] = true;
            }
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "QUBITS {}", self.num_qubits).unwrap();
        writeln!(s, "KEYS {}", self.num_keys).unwrap();
        for r in &self.registers {
            writeln!(s, "REG {} {} {}", r.name, r.start, r.len).unwrap();
        }
        for (i, g) in self.groups.iter().enumerate().skip(1) {
            let label = if g.label.is_empty() { "-" } else { &g.label };
            writeln!(s, "GROUP {i} {} {} {label}", g.parent.unwrap_or(0), if g.noisy { "noisy" } else { "ideal" }).unwrap();
        }
        if !self.groups[0].noisy {
            writeln!(s, "MAIN ideal").unwrap();
        }
        for m in &self.moments {
            let parts: Vec<String> = m
                .iter()
                .map(|ins| {
                    let body = op_text(&ins.op);
                    if ins.group == 0 {
                        body
                    } else {
                        format!("@{} {body}", ins.group)
                    }
                })
                .collect();
            writeln!(s, "{}", parts.join("; ")).unwrap();
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Circuit> {
        let mut c = Circuit {
            num_qubits: 0,
            num_keys: 0,
            registers: vec![],
            groups: vec![Group { parent: None, noisy: true, label: "main".into() }],
            moments: vec![],
        };
        for (ln, line) in text.lines().enumerate() {
            let err = |msg: &str| Error::Parse { line: ln + 1, msg: msg.to_string() };
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let words: Vec<&str> = line.split_whitespace().collect();
            let num = |s: &str| s.parse::<usize>().map_err(|_| err(&format!("bad number `{s}`")));
            match words[0] {
                "QUBITS" => c.num_qubits = num(words.get(1).ok_or(err("missing count"))?)?,
                "KEYS" => c.num_keys = num(words.get(1).ok_or(err("missing count"))?)?,
                "REG" if words.len() == 4 => c.registers.push(Register {
                    name: words[1].to_string(),
                    start: num(words[2])?,
                    len: num(words[3])?,
                }),
                "GROUP" if words.len() == 5 => {
                    let id = num(words[1])?;
                    if id != c.groups.len() {
                        return Err(err("groups must be declared in order"));
                    }
                    c.groups.push(Group {
                        parent: Some(num(words[2])? as u32),
                        noisy: words[3] == "noisy",
                        label: if words[4] == "-" { String::new() } else { words[4].to_string() },
                    });
                }
                "MAIN" => c.groups[0].noisy = words.get(1) != Some(&"ideal"),
                _ => {
                    let mut moment = Vec::new();
                    for part in line.split(';') {
                        let part = part.trim();
                        let (group, body) = match part.strip_prefix('@') {
                            Some(rest) => {
                                let (g, b) = rest.split_once(' ').ok_or(err("missing op after group"))?;
                                (num(g)? as u32, b.trim())
                            }
                            None => (0, part),
                        };
                        moment.push(Instr { group, op: parse_op(body).map_err(|m| err(&m))? });
                    }
                    c.moments.push(moment);
                }
            }
        }
        c.validate()?;
        Ok(c)
    }
}

fn op_text(op: &Op) -> String {
    let join = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
    match op {
        Op::PrepZ(q) => format!("PZ {q}"),
        Op::PrepX(q) => format!("PX {q}"),
        Op::Cnot(a, b) => format!("CNOT {a} {b}"),
        Op::H(q) => format!("H {q}"),
        Op::Perm { qubits, sigma } => format!("PERM {} {}", join(qubits), join(sigma)),
        Op::MeasZ(q, k) => format!("MZ {q} {k}"),
        Op::MeasX(q, k) => format!("MX {q} {k}"),
        Op::AbortIf(keys) => {
            format!("ABORTIF {}", keys.iter().map(|k| k.to_string()).collect::<Vec<_>>().join("^"))
        }
        Op::Feed { keys, qubits } => {
            format!("FEED {} {}", keys.iter().map(|k| k.to_string()).collect::<Vec<_>>().join("^"), join(qubits))
        }
    }
}

fn parse_op(s: &str) -> std::result::Result<Op, String> {
    let w: Vec<&str> = s.split_whitespace().collect();
    let n = |i: usize| -> std::result::Result<usize, String> {
        w.get(i).ok_or_else(|| format!("`{s}`: missing operand"))?.parse().map_err(|_| format!("`{s}`: bad operand"))
    };
    let list = |i: usize| -> std::result::Result<Vec<usize>, String> {
        w.get(i)
            .ok_or_else(|| format!("`{s}`: missing list"))?
            .split(',')
            .map(|x| x.parse().map_err(|_| format!("`{s}`: bad list")))
            .collect()
    };
    Ok(match w.first().copied() {
        Some("PZ") => Op::PrepZ(n(1)?),
        Some("PX") => Op::PrepX(n(1)?),
        Some("H") => Op::H(n(1)?),
        Some("CNOT") => Op::Cnot(n(1)?, n(2)?),
        Some("MZ") => Op::MeasZ(n(1)?, n(2)? as Key),
        Some("MX") => Op::MeasX(n(1)?, n(2)? as Key),
        Some("PERM") => Op::Perm { qubits: list(1)?, sigma: list(2)? },
        Some("ABORTIF") => Op::AbortIf(
            w.get(1)
                .ok_or("ABORTIF needs keys")?
                .split('^')
                .map(|k| k.parse().map_err(|_| format!("bad key in `{s}`")))
                .collect::<std::result::Result<_, _>>()?,
        ),
        Some("FEED") => Op::Feed {
            keys: w
                .get(1)
                .ok_or("FEED needs keys")?
                .split('^')
                .map(|k| k.parse().map_err(|_| format!("bad key in `{s}`")))
                .collect::<std::result::Result<_, _>>()?,
            qubits: list(2)?,
        },
        _ => return Err(format!("unknown operation `{s}`")),
    })
}

/// Incremental circuit construction with fresh-qubit allocation.
#[derive(Clone, Debug)]
pub struct Builder {
    num_qubits: usize,
    num_keys: usize,
    registers: Vec<Register>,
    groups: Vec<Group>,
    instrs: Vec<Instr>,
    current: u32,
}

impl Default for Builder {
    fn default() -> Self {
        Self::new()
    }
}

impl Builder {
    pub fn new() -> Self {
        Builder {
            num_qubits: 0,
            num_keys: 0,
            registers: vec![],
            groups: vec![Group { parent: None, noisy: true, label: "main".into() }],
            instrs: vec![],
            current: 0,
        }
    }

    pub fn alloc(&mut self, name: impl Into<String>, len: usize) -> Vec<usize> {
        let start = self.num_qubits;
        self.num_qubits += len;
        self.registers.push(Register { name: name.into(), start, len });
        (start..start + len).collect()
    }

    pub fn current_group(&self) -> u32 {
        self.current
    }

    /// Opens a nested retry group; returns the previous group for [`Builder::close`].
    pub fn open(&mut self, label: impl Into<String>, noisy: bool) -> u32 {
        let noisy = noisy && self.groups[self.current as usize].noisy;
        self.groups.push(Group { parent: Some(self.current), noisy, label: label.into() });
        let prev = self.current;
        self.current = self.groups.len() as u32 - 1;
        prev
    }

    pub fn close(&mut self, prev: u32) {
        self.current = prev;
    }

    pub fn set_main_noisy(&mut self, noisy: bool) {
        self.groups[0].noisy = noisy;
    }

    fn push(&mut self, op: Op) {
        self.instrs.push(Instr { group: self.current, op });
    }

    pub fn prep_z(&mut self, q: usize) {
        self.push(Op::PrepZ(q));
    }

    pub fn prep_x(&mut self, q: usize) {
        self.push(Op::PrepX(q));
    }

    pub fn cnot(&mut self, c: usize, t: usize) {
        assert_ne!(c, t, "CNOT needs distinct qubits");
        self.push(Op::Cnot(c, t));
    }

    pub fn h(&mut self, q: usize) {
        self.push(Op::H(q));
    }

    pub fn perm(&mut self, qubits: &[usize], sigma: &[usize]) {
        self.push(Op::Perm { qubits: qubits.to_vec(), sigma: sigma.to_vec() });
    }

    pub fn meas_z(&mut self, q: usize) -> Key {
        let k = self.num_keys as Key;
        self.num_keys += 1;
        self.push(Op::MeasZ(q, k));
        k
    }

    pub fn meas_x(&mut self, q: usize) -> Key {
        let k = self.num_keys as Key;
        self.num_keys += 1;
        self.push(Op::MeasX(q, k));
        k
    }

    pub fn abort_if(&mut self, keys: Vec<Key>) {
        if !keys.is_empty() {
            self.push(Op::AbortIf(keys));
        }
    }

    /// Marks where a correction conditioned on `keys` acts on `qubits`; later
    /// operations on those qubits wait for it.
    pub fn feed(&mut self, keys: Vec<Key>, qubits: Vec<usize>) {
        self.push(Op::Feed { keys, qubits });
    }

    pub fn transversal_cnot(&mut self, c: &[usize], t: &[usize]) {
        for (&a, &b) in c.iter().zip(t) {
            self.cnot(a, b);
        }
    }

    /// Appends `frag` with its qubit `i` on `qubits[i]`. The fragment's main
    /// group becomes a new child group when `group` is given, else it joins the
    /// current group. Returns the new key of every fragment key.
    pub fn embed(&mut self, frag: &Circuit, qubits: &[usize], group: Option<(&str, bool)>) -> Vec<Key> {
        assert_eq!(qubits.len(), frag.num_qubits, "embedding needs one target per fragment qubit");
        let keys: Vec<Key> = (0..frag.num_keys).map(|i| (self.num_keys + i) as Key).collect();
        self.num_keys += frag.num_keys;
        let mut gmap = vec![0u32; frag.groups.len()];
        gmap[0] = match group {
            Some((label, noisy)) => {
                let prev = self.open(label, noisy && frag.groups[0].noisy);
                let g = self.current;
                self.close(prev);
                g
            }
            None => self.current,
        };
        for (i, g) in frag.groups.iter().enumerate().skip(1) {
            let parent = gmap[g.parent.unwrap_or(0) as usize];
            let noisy = g.noisy && self.groups[parent as usize].noisy;
            self.groups.push(Group { parent: Some(parent), noisy, label: g.label.clone() });
            gmap[i] = self.groups.len() as u32 - 1;
        }
        for ins in frag.instrs() {
            let op = match &ins.op {
                Op::PrepZ(q) => Op::PrepZ(qubits[*q]),
                Op::PrepX(q) => Op::PrepX(qubits[*q]),
                Op::Cnot(a, b) => Op::Cnot(qubits[*a], qubits[*b]),
                Op::H(q) => Op::H(qubits[*q]),
                Op::Perm { qubits: qs, sigma } => Op::Perm { qubits: qs.iter().map(|&q| qubits[q]).collect(), sigma: sigma.clone() },
                Op::MeasZ(q, k) => Op::MeasZ(qubits[*q], keys[*k as usize]),
                Op::MeasX(q, k) => Op::MeasX(qubits[*q], keys[*k as usize]),
                Op::AbortIf(ks) => Op::AbortIf(ks.iter().map(|&k| keys[k as usize]).collect()),
                Op::Feed { keys: ks, qubits: qs } => Op::Feed {
                    keys: ks.iter().map(|&k| keys[k as usize]).collect(),
                    qubits: qs.iter().map(|&q| qubits[q]).collect(),
                },
            };
            self.instrs.push(Instr { group: gmap[ins.group as usize], op });
        }
        keys
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn instr_count(&self) -> usize {
        self.instrs.len()
    }

    /// Greedy earliest-slot packing of the recorded instructions.
    pub fn finish(self) -> Circuit {
        let mut ready = vec![0usize; self.num_qubits];
        let mut key_time = vec![0usize; self.num_keys];
        let mut moments: Vec<Vec<Instr>> = Vec::new();
        for ins in self.instrs {
            let qs = ins.op.qubits();
            let mut t = qs.iter().map(|&q| ready[q]).max().unwrap_or(0);
            match &ins.op {
                Op::AbortIf(keys) => t = keys.iter().map(|&k| key_time[k as usize]).max().unwrap_or(0),
                Op::Feed { keys, .. } => t = t.max(keys.iter().map(|&k| key_time[k as usize]).max().unwrap_or(0)),
                _ => {}
            }
            for &q in &qs {
                ready[q] = t + 1;
            }
            if let Op::MeasZ(_, k) | Op::MeasX(_, k) = ins.op {
                key_time[k as usize] = t + 1;
            }
            if moments.len() <= t {
                moments.resize(t + 1, Vec::new());
            }
            moments[t].push(ins);
        }
        Circuit {
            num_qubits: self.num_qubits,
            num_keys: self.num_keys,
            registers: self.registers,
            groups: self.groups,
            moments,
        }
    }
}

/// Circuit-level noise: depolarizing after CNOTs and flipped measurements at rate `p`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct NoiseModel {
    pub p: f64,
    pub two_qubit_depolarizing: bool,
    pub measurement_flip: bool,
    pub idle: bool,
    pub one_qubit_gate: bool,
    pub prep: bool,
}

impl NoiseModel {
    pub fn new(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidArgument(format!("p={p} outside [0,1]")));
        }
        Ok(NoiseModel { p, two_qubit_depolarizing: true, measurement_flip: true, idle: false, one_qubit_gate: false, prep: false })
    }

    /// Probability of drawing from the sixteen two-qubit Paulis after a CNOT.
    pub fn depolarizing_draw_probability(&self) -> f64 {
        (16.0 / 15.0 * self.p).min(1.0)
    }
}

/// Kind of a noise location.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize)]
pub enum SiteKind {
    /// Nontrivial two-qubit Pauli after a CNOT on `(control, target)`.
    TwoQubit(usize, usize),
    /// Nontrivial one-qubit Pauli after a Hadamard.
    OneQubit(usize),
    /// Flipped outcome.
    Flip(Key),
    /// Orthogonal state after a preparation (`true` for `|+⟩`).
    Prep(usize, bool),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize)]
pub struct Site {
    /// Index into [`Circuit::exec_order`] of the operation the fault follows.
    pub pos: usize,
    pub group: u32,
    pub kind: SiteKind,
}

impl SiteKind {
    /// Number of nontrivial fault values at this site.
    pub fn choices(&self) -> u8 {
        match self {
            SiteKind::TwoQubit(..) => 15,
            SiteKind::OneQubit(_) => 3,
            SiteKind::Flip(_) | SiteKind::Prep(..) => 1,
        }
    }
}

/// Fault locations of a circuit under `noise`, in execution order.
pub fn inject_noise(exec: &[Instr], groups: &[Group], noise: &NoiseModel) -> Result<Vec<Site>> {
    if noise.idle {
        return Err(Error::Unsupported("idle noise".into()));
    }
    let mut sites = Vec::new();
    if noise.p == 0.0 {
        return Ok(sites);
    }
    for (pos, ins) in exec.iter().enumerate() {
        if !groups[ins.group as usize].noisy {
            continue;
        }
        let kind = match ins.op {
            Op::Cnot(c, t) if noise.two_qubit_depolarizing => Some(SiteKind::TwoQubit(c, t)),
            Op::H(q) if noise.one_qubit_gate => Some(SiteKind::OneQubit(q)),
            Op::MeasZ(_, k) | Op::MeasX(_, k) if noise.measurement_flip => Some(SiteKind::Flip(k)),
            Op::PrepZ(q) if noise.prep => Some(SiteKind::Prep(q, false)),
            Op::PrepX(q) if noise.prep => Some(SiteKind::Prep(q, true)),
            _ => None,
        };
        if let Some(kind) = kind {
            sites.push(Site { pos, group: ins.group, kind });
        }
    }
    Ok(sites)
}
