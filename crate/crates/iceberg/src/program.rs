//! A circuit together with the decoding steps applied to its measured blocks.

use crate::circuit::{Circuit, Key, Op};
use crate::code::PauliKind;
use crate::decoder::DecoderTable;
use crate::error::{Error, Result};
use crate::pauli::PauliString;
use std::sync::Arc;

/// Where the bits of a decoded block come from.
#[derive(Clone, Debug)]
pub enum DecodeSource {
    /// Transversal measurement outcomes, one key per block qubit.
    Keys(Vec<Key>),
    /// The error frame of the listed qubits at the end of the circuit.
    Frame { qubits: Vec<usize>, kind: PauliKind },
}

/// One decoding step. Non-final steps apply their logical correction to the
/// block that now holds the state; final steps report residual logical errors.
#[derive(Clone, Debug)]
pub struct DecodeInstance {
    pub label: String,
    pub source: DecodeSource,
    pub table: Arc<DecoderTable>,
    /// One correction per logical bit, as a full-width Pauli.
    pub corrections: Vec<PauliString>,
    pub is_final: bool,
}

#[derive(Clone, Debug)]
pub struct Program {
    pub name: String,
    pub circuit: Circuit,
    pub decodes: Vec<DecodeInstance>,
    pub rounds: u32,
}

impl DecodeInstance {
    /// Row masks of the syndrome and logical bits over block positions.
    pub fn bit_rows(&self) -> (Vec<u64>, Vec<u64>) {
        let t = &self.table;
        let mut syn = vec![0u64; t.syndrome_bits];
        let mut log = vec![0u64; t.logical_bits];
        for q in 0..t.n {
            for (r, s) in syn.iter_mut().enumerate() {
                *s |= (t.syndrome_cols[q] >> r & 1) << q;
            }
            for (r, l) in log.iter_mut().enumerate() {
                *l |= ((t.class_cols[q] >> r & 1) as u64) << q;
            }
        }
        (syn, log)
    }

    pub fn slot_bits(&self) -> usize {
        self.table.syndrome_bits + self.table.logical_bits
    }
}

impl Program {
    pub fn validate(&self) -> Result<()> {
        self.circuit.validate()?;
        for d in &self.decodes {
            let len = match &d.source {
                DecodeSource::Keys(k) => k.len(),
                DecodeSource::Frame { qubits, .. } => qubits.len(),
            };
            if len != d.table.n {
                return Err(Error::InvalidCircuit(format!("decode `{}` reads {len} bits for n={}", d.label, d.table.n)));
            }
            if d.slot_bits() > 32 {
                return Err(Error::Unsupported(format!("decode `{}` needs {} slot bits", d.label, d.slot_bits())));
            }
            if !d.is_final && d.corrections.len() != d.table.logical_bits {
                return Err(Error::InvalidCircuit(format!("decode `{}` lacks corrections", d.label)));
            }
        }
        Ok(())
    }

    /// Execution position after which each decode applies its corrections.
    pub fn inject_positions(&self, exec: &[crate::circuit::Instr]) -> Vec<usize> {
        let mut key_pos = vec![0usize; self.circuit.num_keys];
        let mut feeds = std::collections::HashMap::new();
        for (i, ins) in exec.iter().enumerate() {
            match &ins.op {
                Op::MeasZ(_, k) | Op::MeasX(_, k) => key_pos[*k as usize] = i,
                Op::Feed { keys, .. } => {
                    feeds.entry(keys.clone()).or_insert(i);
                }
                _ => {}
            }
        }
        self.decodes
            .iter()
            .map(|d| match &d.source {
                DecodeSource::Keys(keys) => match feeds.get(keys) {
                    Some(&p) => p,
                    None => keys.iter().map(|&k| key_pos[k as usize]).max().unwrap_or(0),
                },
                DecodeSource::Frame { .. } => exec.len(),
            })
            .collect()
    }

    /// Content hash of the circuit text and decode wiring.
    pub fn recipe_hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        h.update(self.circuit.to_text().as_bytes());
        for d in &self.decodes {
            h.update(d.label.as_bytes());
            h.update(d.table.code_hash);
        }
        let out = h.finalize();
        out.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}
