use super::circuit::{Circuit, GateKind};
use crate::csp::{Clause, CnfFormula, FactorGraph, Kind, Literal, PolarityTemplate};
use crate::{Error, Result};

/// The compiled circuit: a factor graph, the polarity bits that never change,
/// and the unit clauses that carry the formula's encoding.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CircuitTemplate {
    pub circuit: Circuit,
    pub fg: FactorGraph,
    /// Polarities of every slot, with the encoding unit clauses set positive.
    pub fixed: PolarityTemplate,
    /// Clause index of the unit clause on each representation bit.
    pub input_clauses: Vec<usize>,
    pub selector_vars: Vec<u32>,
    pub output_var: u32,
    /// Extra variable of each MUX3 gate, indexed like `circuit.gates` (0 if none).
    mux_aux: Vec<u32>,
}

struct Emitter {
    clauses: Vec<Clause>,
}

impl Emitter {
    fn clause(&mut self, lits: &[(u32, bool)]) {
        self.clauses.push(Clause::new(lits.iter().map(|&(v, neg)| Literal::new(v, neg)).collect()));
    }

    /// One clause per input row, forbidding the wrong output.
    fn truth_table(&mut self, kind: GateKind, inputs: &[u32], out: u32) {
        for row in 0..1u32 << inputs.len() {
            let values: Vec<bool> = (0..inputs.len()).map(|i| (row >> i) & 1 == 1).collect();
            let mut lits: Vec<(u32, bool)> = inputs.iter().zip(&values).map(|(&v, &x)| (v, x)).collect();
            lits.push((out, !kind.eval(&values)));
            self.clause(&lits);
        }
    }

    fn mux2(&mut self, s: u32, a: u32, b: u32, out: u32) {
        self.clause(&[(s, false), (a, true), (out, false)]);
        self.clause(&[(s, false), (a, false), (out, true)]);
        self.clause(&[(s, true), (b, true), (out, false)]);
        self.clause(&[(s, true), (b, false), (out, true)]);
    }
}

/// Compiles `c` to 3CNF: one variable per wire (wire `i` is variable `i + 1`)
/// plus one per MUX3 gate. Clause order: the encoding unit clauses, then each
/// gate's block in gate order, then the unit clause on the output.
pub fn circuit_to_3cnf(c: &Circuit) -> CircuitTemplate {
    let var = |w: u32| w + 1;
    let mut e = Emitter { clauses: Vec::new() };
    for &w in &c.representation {
        e.clause(&[(var(w), false)]);
    }
    let mut next_aux = c.wire_count + 1;
    let mut mux_aux = vec![0; c.gates.len()];
    for (gi, g) in c.gates.iter().enumerate() {
        let ins: Vec<u32> = g.inputs.iter().map(|&w| var(w)).collect();
        let out = var(g.output);
        match g.kind {
            GateKind::Nand | GateKind::And | GateKind::Or | GateKind::Xor | GateKind::Not => {
                e.truth_table(g.kind, &ins, out)
            }
            GateKind::Mux2 => e.mux2(ins[0], ins[1], ins[2], out),
            GateKind::Mux3 => {
                let t = next_aux;
                next_aux += 1;
                mux_aux[gi] = t;
                e.mux2(ins[0], ins[2], ins[3], t);
                e.mux2(ins[1], t, ins[4], out);
            }
            GateKind::Const => e.clause(&[(out, false)]),
        }
    }
    e.clause(&[(var(c.output), false)]);
    let formula = CnfFormula::new(next_aux - 1, Kind::Sat, e.clauses).expect("compiled clauses are well formed");
    CircuitTemplate {
        circuit: c.clone(),
        fg: formula.factor_graph(),
        fixed: formula.polarities(),
        input_clauses: (0..c.representation.len()).collect(),
        selector_vars: c.selectors.iter().map(|&w| var(w)).collect(),
        output_var: var(c.output),
        mux_aux,
    }
}

/// Pads a clause to exactly three literals by repeating its last literal.
fn triple(f: &CnfFormula, index: usize) -> Result<[(u32, bool); 3]> {
    let l: Vec<(u32, bool)> = f.clauses()[index].lits.iter().map(|l| (l.var, l.negated)).collect();
    match l.len() {
        1 => Ok([l[0]; 3]),
        2 => Ok([l[0], l[1], l[1]]),
        3 => Ok([l[0], l[1], l[2]]),
        _ => Err(Error::BadArity(index)),
    }
}

impl CircuitTemplate {
    pub fn n(&self) -> u32 {
        self.circuit.n
    }

    pub fn m(&self) -> usize {
        self.circuit.m
    }

    pub fn width(&self) -> u32 {
        self.circuit.width
    }

    fn check_dimensions(&self, phi: &CnfFormula) -> Result<Vec<[(u32, bool); 3]>> {
        if phi.kind() != Kind::Sat {
            return Err(Error::KindMismatch { expected: "sat", got: phi.kind().as_str() });
        }
        if phi.n() > self.n() || phi.m() != self.m() {
            return Err(Error::DimensionMismatch { n: phi.n(), m: phi.m(), tn: self.n(), tm: self.m() });
        }
        (0..phi.m()).map(|i| triple(phi, i)).collect()
    }

    /// Polarity template for `phi`: only encoding unit clauses differ from `fixed`.
    pub fn polarities_for(&self, phi: &CnfFormula) -> Result<PolarityTemplate> {
        let clauses = self.check_dimensions(phi)?;
        let rep = self.circuit.encode_formula(&clauses);
        let mut offsets = Vec::with_capacity(self.fg.m());
        let mut acc = 0;
        for s in &self.fg.slots {
            offsets.push(acc);
            acc += s.len();
        }
        let mut bits = self.fixed.clone();
        for (j, &bit) in rep.iter().enumerate() {
            bits.bits[offsets[self.input_clauses[j]]] = !bit;
        }
        Ok(bits)
    }

    /// `Φ_φ`: the template completed with `phi`'s encoding.
    pub fn instantiate(&self, phi: &CnfFormula) -> Result<CnfFormula> {
        self.fg.apply(&self.polarities_for(phi)?)
    }

    /// Satisfying assignment of `Φ_φ` from one of `phi`: each clause selects
    /// its first true literal and the circuit is simulated.
    pub fn witness(&self, phi: &CnfFormula, x: &[bool]) -> Result<Vec<bool>> {
        let clauses = self.check_dimensions(phi)?;
        let rep = self.circuit.encode_formula(&clauses);
        let mut sel = Vec::with_capacity(2 * self.m());
        for c in &clauses {
            let pick = c.iter().position(|&(v, neg)| x[v as usize - 1] != neg).unwrap_or(0);
            sel.push(pick == 1);
            sel.push(pick == 2);
        }
        let wires = self.circuit.simulate(&rep, &sel);
        let mut a = wires.clone();
        a.resize(self.fg.n as usize, false);
        for (gi, g) in self.circuit.gates.iter().enumerate() {
            if g.kind == GateKind::Mux3 {
                let s0 = wires[g.inputs[0] as usize];
                a[self.mux_aux[gi] as usize - 1] = wires[g.inputs[if s0 { 3 } else { 2 }] as usize];
            }
        }
        Ok(a)
    }

    pub fn variable_count(&self) -> u32 {
        self.fg.n
    }
}

/// Decides satisfiability of an instantiated template by enumerating the
/// selector variables and unit-propagating the clauses; every other variable
/// is forced once the selectors are fixed. Errors if propagation stalls.
pub fn decide_by_selectors(t: &CircuitTemplate, formula: &CnfFormula) -> Result<bool> {
    let n = formula.n() as usize;
    let sel = &t.selector_vars;
    for s in 0..1u64 << sel.len() {
        let mut value: Vec<Option<bool>> = vec![None; n];
        for (i, &v) in sel.iter().enumerate() {
            value[v as usize - 1] = Some((s >> i) & 1 == 1);
        }
        if propagate(formula, &mut value)? {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Unit propagation to a fixed point. `Ok(false)` on conflict, `Ok(true)` if
/// all clauses end up satisfied.
fn propagate(f: &CnfFormula, value: &mut [Option<bool>]) -> Result<bool> {
    loop {
        let mut changed = false;
        for c in f.clauses() {
            let mut satisfied = false;
            let mut open = None;
            let mut open_count = 0;
            for l in &c.lits {
                match value[l.var as usize - 1] {
                    Some(x) if x != l.negated => satisfied = true,
                    Some(_) => {}
                    None => {
                        if open != Some(*l) {
                            open_count += 1;
                        }
                        open = Some(*l);
                    }
                }
            }
            if satisfied {
                continue;
            }
            match (open_count, open) {
                (0, _) => return Ok(false),
                (1, Some(l)) => {
                    value[l.var as usize - 1] = Some(!l.negated);
                    changed = true;
                }
                _ => {}
            }
        }
        if !changed {
            break;
        }
    }
    if let Some(i) = value.iter().position(Option::is_none) {
        return Err(Error::Undetermined(i as u32 + 1));
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csp::{brute_force_unsat, factor_graph_of, find_satisfying, DEFAULT_SEARCH_BUDGET};
    use crate::universal_circuit::build_consistency_circuit;
    use num_traits::Zero;

    #[test]
    fn nand_block() {
        let mut e = Emitter { clauses: Vec::new() };
        e.truth_table(GateKind::Nand, &[1, 2], 3);
        let got: Vec<Vec<i64>> = e.clauses.iter().map(|c| c.lits.iter().map(|l| l.to_dimacs()).collect()).collect();
        let mut got_sorted = got.clone();
        got_sorted.sort();
        let mut want = vec![vec![-1, -2, -3], vec![-1, 2, 3], vec![1, 2, 3], vec![1, -2, 3]];
        want.sort();
        assert_eq!(got_sorted, want);
    }

    #[test]
    fn single_not_gate() {
        let mut e = Emitter { clauses: Vec::new() };
        e.truth_table(GateKind::Not, &[1], 2);
        e.clause(&[(2, false)]);
        let f = CnfFormula::new(2, Kind::Sat, e.clauses).unwrap();
        assert_eq!(f.m(), 3);
        for x in [false, true] {
            let sat = [false, true].iter().any(|&o| f.is_satisfied_by(&[x, o]));
            assert_eq!(sat, !x);
        }
    }

    #[test]
    fn instantiation_only_touches_encoding_units() {
        let t = circuit_to_3cnf(&build_consistency_circuit(3, 2));
        let phi = CnfFormula::from_dimacs(3, &[&[1, 2, 3], &[-1, 2, 3]]).unwrap();
        let psi = CnfFormula::from_dimacs(3, &[&[1, -2, 3], &[-1, 2, 3]]).unwrap();
        let a = t.instantiate(&phi).unwrap();
        let b = t.instantiate(&psi).unwrap();
        assert_eq!(factor_graph_of(&a), factor_graph_of(&b));
        let diff = a.polarities().bits.iter().zip(&b.polarities().bits).filter(|(x, y)| x != y).count();
        // Only the negation bit of the flipped literal changes.
        assert_eq!(diff, 1);
        assert!(diff <= t.width() as usize);
        let bad = CnfFormula::from_dimacs(3, &[&[1, 2, 3]]).unwrap();
        assert!(matches!(t.instantiate(&bad), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn equisatisfiable_small() {
        let t = circuit_to_3cnf(&build_consistency_circuit(2, 2));
        let lits = [1i64, -1, 2, -2];
        for a in lits {
            for b in lits {
                for c in lits {
                    for d in lits {
                        let phi = CnfFormula::from_dimacs(2, &[&[a, b, a], &[c, d, d]]).unwrap();
                        let sat = brute_force_unsat(&phi).unwrap().is_zero();
                        let big = t.instantiate(&phi).unwrap();
                        assert_eq!(decide_by_selectors(&t, &big).unwrap(), sat);
                        assert_eq!(find_satisfying(&big, DEFAULT_SEARCH_BUDGET).unwrap().is_some(), sat);
                        if sat {
                            let x = [[false, false], [true, false], [false, true], [true, true]]
                                .into_iter()
                                .find(|x| phi.is_satisfied_by(x))
                                .unwrap();
                            assert!(big.is_satisfied_by(&t.witness(&phi, &x).unwrap()));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn single_clause_template() {
        let t = circuit_to_3cnf(&build_consistency_circuit(3, 1));
        let phi = CnfFormula::from_dimacs(3, &[&[1, -2, 3]]).unwrap();
        let big = t.instantiate(&phi).unwrap();
        assert!(find_satisfying(&big, DEFAULT_SEARCH_BUDGET).unwrap().is_some());
    }
}
