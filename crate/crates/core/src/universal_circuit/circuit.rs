use serde::{Deserialize, Serialize};

use super::sorting::{Batcher, SortingNetwork};

pub type Wire = u32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateKind {
    Nand,
    And,
    Or,
    Xor,
    Not,
    /// Inputs `(s, a, b)`: `a` if `s = 0`, else `b`.
    Mux2,
    /// Inputs `(s0, s1, a, b, c)`: selects `a`, `b`, `c` for `s0 + 2·s1 = 0, 1, 2`;
    /// the value 3 selects `c` as well.
    Mux3,
    /// Constant 1, no inputs.
    Const,
}

impl GateKind {
    pub fn eval(self, x: &[bool]) -> bool {
        match self {
            GateKind::Nand => !(x[0] && x[1]),
            GateKind::And => x[0] && x[1],
            GateKind::Or => x[0] || x[1],
            GateKind::Xor => x[0] ^ x[1],
            GateKind::Not => !x[0],
            GateKind::Mux2 => {
                if x[0] {
                    x[2]
                } else {
                    x[1]
                }
            }
            GateKind::Mux3 => match (x[0], x[1]) {
                (false, false) => x[2],
                (true, false) => x[3],
                _ => x[4],
            },
            GateKind::Const => true,
        }
    }

    pub fn arity(self) -> usize {
        match self {
            GateKind::Nand | GateKind::And | GateKind::Or | GateKind::Xor => 2,
            GateKind::Not => 1,
            GateKind::Mux2 => 3,
            GateKind::Mux3 => 5,
            GateKind::Const => 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gate {
    pub kind: GateKind,
    pub inputs: Vec<Wire>,
    pub output: Wire,
}

/// Gates in topological order. Wires `0..representation.len()` are the
/// literal-encoding bits, followed by the selector bits.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Circuit {
    pub n: u32,
    pub m: usize,
    pub width: u32,
    pub wire_count: u32,
    pub representation: Vec<Wire>,
    pub selectors: Vec<Wire>,
    pub gates: Vec<Gate>,
    pub output: Wire,
}

/// Bits per literal: `ceil(log2 n) + 1`.
pub fn literal_width(n: u32) -> u32 {
    let index_bits = if n <= 1 { 0 } else { 32 - (n - 1).leading_zeros() };
    index_bits + 1
}

/// Encoding of a literal: negation flag in bit 0, 0-based variable index above.
pub fn encode_literal(var: u32, negated: bool) -> u64 {
    ((var as u64 - 1) << 1) | negated as u64
}

struct Builder {
    wires: u32,
    gates: Vec<Gate>,
}

impl Builder {
    fn gate(&mut self, kind: GateKind, inputs: Vec<Wire>) -> Wire {
        let output = self.wires;
        self.wires += 1;
        self.gates.push(Gate { kind, inputs, output });
        output
    }

    /// Compare-exchange of two encodings: returns `(min, max)`.
    fn compare_exchange(&mut self, x: &[Wire], y: &[Wire]) -> (Vec<Wire>, Vec<Wire>) {
        // Carry-out of y + ¬x + 1 is 1 iff y ≥ x.
        let not_y0 = self.gate(GateKind::Not, vec![y[0]]);
        let mut carry = self.gate(GateKind::Nand, vec![x[0], not_y0]);
        for b in 1..x.len() {
            let differ = self.gate(GateKind::Xor, vec![x[b], y[b]]);
            carry = self.gate(GateKind::Mux2, vec![differ, carry, y[b]]);
        }
        let low = (0..x.len()).map(|b| self.gate(GateKind::Mux2, vec![carry, y[b], x[b]])).collect();
        let high = (0..x.len()).map(|b| self.gate(GateKind::Mux2, vec![carry, x[b], y[b]])).collect();
        (low, high)
    }

    /// 1 unless the two encodings are a literal and its negation.
    fn not_complementary(&mut self, x: &[Wire], y: &[Wire]) -> Wire {
        let negation_differs = self.gate(GateKind::Xor, vec![x[0], y[0]]);
        let mut index_differs = None;
        for b in 1..x.len() {
            let d = self.gate(GateKind::Xor, vec![x[b], y[b]]);
            index_differs = Some(match index_differs {
                None => d,
                Some(acc) => self.gate(GateKind::Or, vec![acc, d]),
            });
        }
        match index_differs {
            None => self.gate(GateKind::Not, vec![negation_differs]),
            Some(any) => {
                let same_index = self.gate(GateKind::Not, vec![any]);
                self.gate(GateKind::Nand, vec![negation_differs, same_index])
            }
        }
    }
}

/// The nondeterministic consistency circuit for `m` clauses over `n` variables.
pub fn build_consistency_circuit(n: u32, m: usize) -> Circuit {
    build_with_network(n, m, &Batcher)
}

pub fn build_with_network(n: u32, m: usize, network: &dyn SortingNetwork) -> Circuit {
    let width = literal_width(n);
    let w = width as usize;
    let rep_count = 3 * m * w;
    let representation: Vec<Wire> = (0..rep_count as u32).collect();
    let selectors: Vec<Wire> = (rep_count as u32..(rep_count + 2 * m) as u32).collect();
    let mut b = Builder { wires: (rep_count + 2 * m) as u32, gates: Vec::new() };

    if m < 2 {
        // Nothing can clash; the selection is irrelevant.
        let output = b.gate(GateKind::Const, vec![]);
        return Circuit { n, m, width, wire_count: b.wires, representation, selectors, gates: b.gates, output };
    }

    let mut keys: Vec<Vec<Wire>> = (0..m)
        .map(|j| {
            let (s0, s1) = (selectors[2 * j], selectors[2 * j + 1]);
            (0..w)
                .map(|bit| {
                    let lit = |slot: usize| representation[(3 * j + slot) * w + bit];
                    b.gate(GateKind::Mux3, vec![s0, s1, lit(0), lit(1), lit(2)])
                })
                .collect()
        })
        .collect();

    for (i, j) in network.comparators(m) {
        let (low, high) = b.compare_exchange(&keys[i], &keys[j]);
        keys[i] = low;
        keys[j] = high;
    }

    let mut output = None;
    for p in 0..m - 1 {
        let ok = b.not_complementary(&keys[p], &keys[p + 1]);
        output = Some(match output {
            None => ok,
            Some(acc) => b.gate(GateKind::And, vec![acc, ok]),
        });
    }
    let output = output.expect("m ≥ 2 gives at least one pair");
    Circuit { n, m, width, wire_count: b.wires, representation, selectors, gates: b.gates, output }
}

impl Circuit {
    /// Value of every wire given the input wires.
    pub fn simulate(&self, representation: &[bool], selectors: &[bool]) -> Vec<bool> {
        let mut v = vec![false; self.wire_count as usize];
        for (&w, &x) in self.representation.iter().zip(representation) {
            v[w as usize] = x;
        }
        for (&w, &x) in self.selectors.iter().zip(selectors) {
            v[w as usize] = x;
        }
        for g in &self.gates {
            let inputs: Vec<bool> = g.inputs.iter().map(|&i| v[i as usize]).collect();
            v[g.output as usize] = g.kind.eval(&inputs);
        }
        v
    }

    pub fn eval(&self, representation: &[bool], selectors: &[bool]) -> bool {
        self.simulate(representation, selectors)[self.output as usize]
    }

    /// Representation bits of a formula's literals, padded to three per clause.
    pub fn encode_formula(&self, clauses: &[[(u32, bool); 3]]) -> Vec<bool> {
        let w = self.width as usize;
        let mut bits = vec![false; self.representation.len()];
        for (j, clause) in clauses.iter().enumerate() {
            for (s, &(var, neg)) in clause.iter().enumerate() {
                let code = encode_literal(var, neg);
                for bit in 0..w {
                    bits[(3 * j + s) * w + bit] = (code >> bit) & 1 == 1;
                }
            }
        }
        bits
    }

    /// Wires that no gate reads and that are not the output.
    pub fn dangling_gate_outputs(&self) -> Vec<Wire> {
        let mut read = vec![false; self.wire_count as usize];
        for g in &self.gates {
            for &i in &g.inputs {
                read[i as usize] = true;
            }
        }
        self.gates.iter().map(|g| g.output).filter(|&o| !read[o as usize] && o != self.output).collect()
    }
}
