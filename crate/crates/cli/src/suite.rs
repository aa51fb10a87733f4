//! Factor-graph-preservation suite: one random factor graph per run, many
//! polarity completions, and two checks per pass. Every completion must map
//! to the same output factor graph, and satisfiable completions must stay
//! satisfiable (through the exact oracle when the output fits under its cap,
//! else through the pass's assignment lift).

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use ufg_core::amplify::{
    alphabet_reduce, double_gap, expanderize, power_graph, regularize, to_constraint_graph, FgprParams, Mode,
};
use ufg_core::csp::{
    ratio, Clause, CnfFormula, Constraint, ConstraintHypergraph, Coord, FactorGraph, Gf2Poly, HyperAssignment,
    HyperFactorGraph, Kind, Monomial, Oracle, PolarityTemplate, Weight,
};
use ufg_core::downstream::{eksat_reduce, nae3_to_lin2, nae4_to_nae3, sat3_to_nae4, EkSatParams};
use ufg_core::longcode::{build_verifier_formula, VerifierParams};
use ufg_core::seed;
use ufg_core::universal_circuit::{build_consistency_circuit, circuit_to_3cnf};
use ufg_core::universal_poly::{build_poly_universal, embed_formula, lift_assignment};

use crate::formats::{emit_fgraph, fmt_weight};

/// Output of one pass on one completion.
pub enum Instance {
    Cnf(CnfFormula),
    Hyper(ConstraintHypergraph),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Shape {
    Cnf(FactorGraph),
    Hyper(HyperFactorGraph),
}

impl Instance {
    pub fn shape(&self) -> Shape {
        match self {
            Instance::Cnf(f) => Shape::Cnf(f.factor_graph()),
            Instance::Hyper(h) => Shape::Hyper(h.factor_graph()),
        }
    }

    fn unsat(&self, oracle: &Oracle) -> Option<Weight> {
        match self {
            Instance::Cnf(f) => oracle.unsat(f).ok(),
            Instance::Hyper(h) => oracle.unsat(h).ok(),
        }
    }
}

pub struct PassOutput {
    pub instance: Instance,
    /// Whether the lifted witness satisfies the output; `None` without a lift.
    pub lifted_ok: Option<bool>,
}

type RunFn = fn(&CnfFormula, Option<&[bool]>, u64) -> ufg_core::Result<PassOutput>;

#[derive(Clone, Copy)]
pub struct Pass {
    pub name: &'static str,
    pub about: &'static str,
    /// Excluded from `all`; a control pass is expected to fail.
    pub control: bool,
    /// Largest output UNSAT allowed for a satisfiable input (0 for
    /// satisfiability-preserving passes).
    pub complete_unsat: (i64, i64),
    generate: fn(&mut ChaCha8Rng) -> FactorGraph,
    run: RunFn,
}

impl Pass {
    pub fn run(&self, f: &CnfFormula, witness: Option<&[bool]>, seed: u64) -> ufg_core::Result<PassOutput> {
        (self.run)(f, witness, seed)
    }

    pub fn generate(&self, rng: &mut ChaCha8Rng) -> FactorGraph {
        (self.generate)(rng)
    }
}

/// `m` clauses of `arity` distinct variables out of `n`.
fn random_graph(rng: &mut ChaCha8Rng, kind: Kind, n: u32, m: usize, arity: usize) -> FactorGraph {
    let slots = (0..m)
        .map(|_| {
            let mut vars: Vec<u32> = Vec::with_capacity(arity);
            while vars.len() < arity {
                let v = rng.gen_range(1..=n);
                if !vars.contains(&v) {
                    vars.push(v);
                }
            }
            vars
        })
        .collect();
    FactorGraph { n, kind, slots, weights: vec![ratio(1, 1); m] }
}

fn gen_small_3sat(rng: &mut ChaCha8Rng) -> FactorGraph {
    let m = rng.gen_range(1..=3);
    random_graph(rng, Kind::Sat, 3, m, 3)
}

fn gen_3sat(rng: &mut ChaCha8Rng) -> FactorGraph {
    let m = rng.gen_range(2..=5);
    random_graph(rng, Kind::Sat, 4, m, 3)
}

fn gen_two_clauses(rng: &mut ChaCha8Rng) -> FactorGraph {
    random_graph(rng, Kind::Sat, 3, 2, 3)
}

fn gen_nae4(rng: &mut ChaCha8Rng) -> FactorGraph {
    let m = rng.gen_range(1..=4);
    random_graph(rng, Kind::Nae, 5, m, 4)
}

fn gen_nae3(rng: &mut ChaCha8Rng) -> FactorGraph {
    let m = rng.gen_range(1..=5);
    random_graph(rng, Kind::Nae, 5, m, 3)
}

fn gen_lin(rng: &mut ChaCha8Rng) -> FactorGraph {
    let m = rng.gen_range(1..=3);
    let mut g = random_graph(rng, Kind::Lin, 4, m, 2);
    for s in g.slots.iter_mut() {
        if rng.gen_bool(0.5) {
            let v = (1..=4).find(|v| !s.contains(v)).unwrap_or(1);
            s.push(v);
        }
    }
    g
}

fn cnf(f: CnfFormula, lifted: Option<Vec<bool>>) -> PassOutput {
    let lifted_ok = lifted.map(|x| f.is_satisfied_by(&x));
    PassOutput { instance: Instance::Cnf(f), lifted_ok }
}

fn hyper(h: ConstraintHypergraph, lifted: Option<HyperAssignment>) -> PassOutput {
    let lifted_ok = lifted.map(|a| h.is_satisfied_by(&a));
    PassOutput { instance: Instance::Hyper(h), lifted_ok }
}

fn run_poly_embed(f: &CnfFormula, x: Option<&[bool]>, _: u64) -> ufg_core::Result<PassOutput> {
    let u = build_poly_universal(f.n())?;
    let out = embed_formula(&u, f)?;
    let lifted = x.map(|x| lift_assignment(&u, &out, x));
    Ok(cnf(out, lifted))
}

fn run_circuit(f: &CnfFormula, x: Option<&[bool]>, _: u64) -> ufg_core::Result<PassOutput> {
    let t = circuit_to_3cnf(&build_consistency_circuit(f.n(), f.m()));
    let out = t.instantiate(f)?;
    let lifted = x.map(|x| t.witness(f, x)).transpose()?;
    Ok(cnf(out, lifted))
}

fn run_formula2graph(f: &CnfFormula, x: Option<&[bool]>, _: u64) -> ufg_core::Result<PassOutput> {
    let g = to_constraint_graph(f)?;
    let lifted = x.map(|x| g.lift(f, x));
    Ok(hyper(g.graph, lifted))
}

fn run_regularize(f: &CnfFormula, x: Option<&[bool]>, s: u64) -> ufg_core::Result<PassOutput> {
    let g = to_constraint_graph(f)?;
    let r = regularize(&g.graph, 3, s)?;
    let lifted = x.map(|x| r.lift(&g.lift(f, x)));
    Ok(hyper(r.graph, lifted))
}

fn run_expanderize(f: &CnfFormula, x: Option<&[bool]>, s: u64) -> ufg_core::Result<PassOutput> {
    let g = to_constraint_graph(f)?;
    let r = regularize(&g.graph, 3, s)?;
    let e = expanderize(&r.graph, 3, s)?;
    // Expanderizing only adds always-true edges, so the assignment carries over.
    let lifted = x.map(|x| r.lift(&g.lift(f, x)));
    Ok(hyper(e, lifted))
}

fn run_power(f: &CnfFormula, x: Option<&[bool]>, s: u64) -> ufg_core::Result<PassOutput> {
    let g = to_constraint_graph(f)?;
    let r = regularize(&g.graph, 3, s)?;
    let e = expanderize(&r.graph, 3, s)?;
    let p = power_graph(&e, 1, Mode::Exhaustive)?;
    let lifted = x.map(|x| p.lift(&r.lift(&g.lift(f, x))));
    Ok(hyper(p.graph, lifted))
}

fn run_alphabet(f: &CnfFormula, x: Option<&[bool]>, s: u64) -> ufg_core::Result<PassOutput> {
    let g = to_constraint_graph(f)?;
    let r = regularize(&g.graph, 3, s)?;
    let e = expanderize(&r.graph, 3, s)?;
    let p = power_graph(&e, 1, Mode::Exhaustive)?;
    let a = alphabet_reduce(&p.graph, Mode::Sample { count: 400, seed: s })?;
    let lifted = x.map(|x| a.lift(&p.graph, &p.lift(&r.lift(&g.lift(f, x)))));
    Ok(hyper(a.hypergraph, lifted))
}

fn run_double_gap(f: &CnfFormula, x: Option<&[bool]>, s: u64) -> ufg_core::Result<PassOutput> {
    let params = FgprParams { alphabet_mode: Mode::Sample { count: 300, seed: s }, seed: s, ..FgprParams::default() };
    let out = double_gap(f, &params)?;
    let lifted = x.map(|x| out.lift(x));
    Ok(cnf(out.formula, lifted))
}

fn run_eksat(f: &CnfFormula, x: Option<&[bool]>, _: u64) -> ufg_core::Result<PassOutput> {
    let e = eksat_reduce(f, &EkSatParams { k: 4, gamma: ratio(1, 16), epsilon: None })?;
    let lifted = x.map(|x| e.lift(x));
    Ok(cnf(e.formula, lifted))
}

fn run_sat3_nae4(f: &CnfFormula, _: Option<&[bool]>, _: u64) -> ufg_core::Result<PassOutput> {
    Ok(cnf(sat3_to_nae4(f)?, None))
}

fn run_nae4_nae3(f: &CnfFormula, _: Option<&[bool]>, _: u64) -> ufg_core::Result<PassOutput> {
    Ok(cnf(nae4_to_nae3(f)?, None))
}

fn run_nae3_lin2(f: &CnfFormula, _: Option<&[bool]>, _: u64) -> ufg_core::Result<PassOutput> {
    Ok(cnf(nae3_to_lin2(f)?, None))
}

/// Each XOR clause becomes one edge over F₂ with the constraint
/// `x_1 + … + x_r + (number of negations) = 1`.
pub fn lin_to_hypergraph(f: &CnfFormula) -> ConstraintHypergraph {
    let mut h = ConstraintHypergraph::new(f.n(), 1);
    for c in f.clauses() {
        let negations = c.lits.iter().filter(|l| l.negated).count();
        let monomials = (0..c.len() as u32).map(|s| Monomial::Linear(Coord::new(s, 0))).collect();
        let p = Gf2Poly::new(monomials, negations % 2 == 0);
        h.add_edge(c.lits.iter().map(|l| l.var - 1).collect(), Constraint::Restricted(vec![p]));
    }
    h
}

fn run_verifier(f: &CnfFormula, x: Option<&[bool]>, s: u64) -> ufg_core::Result<PassOutput> {
    let h = lin_to_hypergraph(f);
    let v = build_verifier_formula(&h, &VerifierParams { seed: s, ..VerifierParams::default() })?;
    let lifted = x.map(|x| v.lift(&HyperAssignment::from_flat(1, x)));
    Ok(cnf(v.formula, lifted))
}

/// Negative control: drops clauses whose first literal is negated, so the
/// output structure depends on the polarities.
fn run_broken(f: &CnfFormula, _: Option<&[bool]>, _: u64) -> ufg_core::Result<PassOutput> {
    let kept: Vec<Clause> = f.clauses().iter().filter(|c| !c.lits[0].negated).cloned().collect();
    Ok(cnf(CnfFormula::new(f.n(), f.kind(), kept)?, None))
}

pub fn registry() -> Vec<Pass> {
    let pass = |name, about, generate, run| Pass { name, about, control: false, complete_unsat: (0, 1), generate, run };
    vec![
        pass("poly-embed", "embedding into the polynomial-size universal graph", gen_small_3sat, run_poly_embed),
        pass("circuit-instantiate", "instantiating the consistency-circuit template", gen_two_clauses, run_circuit),
        pass("formula2graph", "3CNF to 2-restricted constraint graph", gen_small_3sat, run_formula2graph),
        pass("regularize", "constraint graph to regular graph", gen_small_3sat, run_regularize),
        pass("expanderize", "regular graph to positive expander", gen_small_3sat, run_expanderize),
        pass("power", "walk powering, t = 1", gen_small_3sat, run_power),
        pass("alphabet", "alphabet reduction to a 1-restricted hypergraph", gen_small_3sat, run_alphabet),
        pass("double-gap", "one full gap-doubling round", gen_small_3sat, run_double_gap),
        pass("eksat", "E3SAT to weighted E4SAT mixture", gen_3sat, run_eksat),
        pass("sat3-nae4", "3SAT to 4NAE", gen_3sat, run_sat3_nae4),
        pass("nae4-nae3", "4NAE to 3NAE", gen_nae4, run_nae4_nae3),
        // A satisfied NAE clause satisfies exactly two of its three XOR clauses.
        Pass { complete_unsat: (1, 3), ..pass("nae3-lin2", "3NAE to 2LIN", gen_nae3, run_nae3_lin2) },
        pass("verifier", "long-code verifier formula of a linear system", gen_lin, run_verifier),
        Pass { control: true, ..pass("broken-control", "polarity leaks into structure", gen_3sat, run_broken) },
    ]
}

pub fn find(name: &str) -> Option<Pass> {
    registry().into_iter().find(|p| p.name == name)
}

#[derive(Clone, Debug, Serialize)]
pub struct TrialReport {
    pub trial: usize,
    /// The completion's polarities, one `+`/`-` per slot.
    pub template: String,
    pub input_sat: Option<bool>,
    /// Exact output UNSAT, when within the oracle cap.
    pub output_unsat: Option<String>,
    pub lifted_ok: Option<bool>,
    /// Satisfiable input kept within the pass's completeness bound; `None`
    /// when the input is unsatisfiable or nothing could be checked.
    pub complete: Option<bool>,
    pub same_factor_graph: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub pass: String,
    pub trials: usize,
    pub seed: u64,
    pub factor_graph: String,
    /// Trials where completeness could be checked (input satisfiable).
    pub completeness_checked: usize,
    pub results: Vec<TrialReport>,
    pub failures: Vec<String>,
    pub passed: bool,
}

fn witness(f: &CnfFormula, oracle: &Oracle) -> Option<Option<Vec<bool>>> {
    let (unsat, mask) = oracle.minimize(f).ok()?;
    Some((unsat == ratio(0, 1)).then(|| (0..f.n()).map(|i| (mask >> i) & 1 == 1).collect()))
}

pub fn run_fgpr_suite(pass: &Pass, trials: usize, seed: u64, oracle: &Oracle) -> SuiteReport {
    let mut rng = seed::stream(&format!("suite/{}", pass.name), seed);
    let graph = pass.generate(&mut rng);
    let templates: Vec<PolarityTemplate> =
        (0..trials).map(|_| PolarityTemplate::new((0..graph.slot_count()).map(|_| rng.gen()).collect())).collect();
    let pass_seed = seed::stream_seed(pass.name, seed);

    let runs: Vec<(TrialReport, Option<Shape>)> = templates
        .par_iter()
        .enumerate()
        .map(|(trial, t)| {
            let signs: String = t.bits.iter().map(|&b| if b { '-' } else { '+' }).collect();
            let mut report = TrialReport {
                trial,
                template: signs,
                input_sat: None,
                output_unsat: None,
                lifted_ok: None,
                complete: None,
                same_factor_graph: true,
                error: None,
                ok: true,
            };
            let result = graph.apply(t).and_then(|f| {
                let x = witness(&f, oracle);
                report.input_sat = x.as_ref().map(Option::is_some);
                let out = pass.run(&f, x.as_ref().and_then(|x| x.as_deref()), pass_seed)?;
                Ok(out)
            });
            match result {
                Ok(out) => {
                    let unsat = out.instance.unsat(oracle);
                    report.output_unsat = unsat.map(fmt_weight);
                    report.lifted_ok = out.lifted_ok;
                    if report.input_sat == Some(true) && (unsat.is_some() || out.lifted_ok.is_some()) {
                        let within = unsat.is_none_or(|u| u <= ratio(pass.complete_unsat.0, pass.complete_unsat.1));
                        report.complete = Some(within && out.lifted_ok != Some(false));
                    }
                    (report, Some(out.instance.shape()))
                }
                Err(e) => {
                    report.error = Some(e.to_string());
                    report.ok = false;
                    (report, None)
                }
            }
        })
        .collect();

    let reference = runs.first().and_then(|r| r.1.clone());
    let mut failures = Vec::new();
    let mut results = Vec::with_capacity(runs.len());
    for (mut report, shape) in runs {
        if let Some(e) = &report.error {
            failures.push(format!("trial {}: {e}", report.trial));
        } else {
            report.same_factor_graph = shape == reference;
            if !report.same_factor_graph {
                failures.push(format!("trial {}: output factor graph differs from trial 0", report.trial));
            }
            if report.complete == Some(false) {
                failures.push(format!("trial {}: satisfiable input lost completeness", report.trial));
            }
            report.ok = report.same_factor_graph && report.complete != Some(false);
        }
        results.push(report);
    }
    let completeness_checked = results
        .iter()
        .filter(|r| r.complete.is_some())
        .count();
    SuiteReport {
        pass: pass.name.into(),
        trials,
        seed,
        factor_graph: emit_fgraph(&graph),
        completeness_checked,
        results,
        passed: failures.is_empty(),
        failures,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lin_edges_match_xor_semantics() {
        let f = CnfFormula::new(3, Kind::Lin, vec![Clause::from_dimacs(&[1, -2, 3]).unwrap(), Clause::from_dimacs(&[2, 3]).unwrap()]).unwrap();
        let h = lin_to_hypergraph(&f);
        for m in 0..8u32 {
            let x: Vec<bool> = (0..3).map(|i| (m >> i) & 1 == 1).collect();
            assert_eq!(f.is_satisfied_by(&x), h.is_satisfied_by(&HyperAssignment::from_flat(1, &x)));
        }
    }

    #[test]
    fn names_are_unique() {
        let r = registry();
        for (i, p) in r.iter().enumerate() {
            assert!(r[i + 1..].iter().all(|q| q.name != p.name));
        }
    }
}
