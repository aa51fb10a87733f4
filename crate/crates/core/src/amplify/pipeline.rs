use serde::{Deserialize, Serialize};

use super::{
    alphabet_reduce, expanderize, hypergraph_to_3sat, power_graph, regularize, to_constraint_graph, AlphabetReduced,
    ConstraintGraphOf, HyperCnf, Mode, Powered, Regularized, DEFAULT_DEGREE,
};
use crate::csp::{ratio, CnfFormula, ConstraintHypergraph, Oracle, Weight};
use crate::{Error, Result};

/// Parameters of one gap-doubling round.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FgprParams {
    /// Claimed gap factor per round.
    pub delta: Weight,
    /// Claimed bound on the size blowup per round, reported against the measured one.
    pub d: u64,
    /// Cap on the claimed gap.
    pub xi: Weight,
    /// Walk length parameter of graph powering.
    pub t: u32,
    /// Degree of the expanders used by regularization and expanderization.
    pub expander_degree: u32,
    pub power_mode: Mode,
    pub alphabet_mode: Mode,
    /// Seed of the expander constructions.
    pub seed: u64,
}

impl Default for FgprParams {
    fn default() -> Self {
        FgprParams {
            delta: ratio(2, 1),
            d: 1 << 40,
            xi: ratio(1, 4),
            t: 1,
            expander_degree: DEFAULT_DEGREE,
            power_mode: Mode::Exhaustive,
            alphabet_mode: Mode::Sample { count: 4096, seed: 0 },
            seed: 0,
        }
    }
}

impl FgprParams {
    pub fn validate(&self) -> Result<()> {
        if self.delta <= Weight::from_integer(0) || self.xi <= Weight::from_integer(0) {
            return Err(Error::InvalidParameter("delta and xi must be positive".into()));
        }
        if self.d == 0 || self.t == 0 || self.expander_degree == 0 {
            return Err(Error::InvalidParameter("d, t and expander degree must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageSize {
    pub stage: String,
    pub vertices: u64,
    pub edges: u64,
    pub alphabet_bits: u32,
}

impl StageSize {
    fn graph(stage: &str, g: &ConstraintHypergraph) -> Self {
        StageSize { stage: stage.into(), vertices: g.vertex_count as u64, edges: g.edge_count() as u64, alphabet_bits: g.alphabet_bits }
    }

    fn formula(stage: &str, f: &CnfFormula) -> Self {
        StageSize { stage: stage.into(), vertices: f.n() as u64, edges: f.m() as u64, alphabet_bits: 1 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundStats {
    pub stages: Vec<StageSize>,
    pub size_in: u64,
    pub size_out: u64,
    /// `size_out ≤ d · size_in`.
    pub within_size_bound: bool,
    /// Exact UNSAT of the input, when within the oracle cap.
    pub unsat_in: Option<Weight>,
    /// Exact UNSAT of the output, when within the oracle cap.
    pub unsat_out: Option<Weight>,
    /// `min(delta · unsat_in, xi)`, reported only.
    pub claimed_unsat_out: Option<Weight>,
}

/// One round's output with every intermediate stage kept for lifting.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DoubledGap {
    pub formula: CnfFormula,
    pub stats: RoundStats,
    graph: ConstraintGraphOf,
    regular: Regularized,
    powered: Powered,
    reduced: AlphabetReduced,
    cnf: HyperCnf,
    input: CnfFormula,
}

/// formula → constraint graph → regular graph → positive expander → powered
/// graph → 1-restricted hypergraph → 3CNF.
pub fn double_gap(phi: &CnfFormula, params: &FgprParams) -> Result<DoubledGap> {
    params.validate()?;
    let oracle = Oracle::default();
    let graph = to_constraint_graph(phi)?;
    let regular = regularize(&graph.graph, params.expander_degree, params.seed)?;
    let expanded = expanderize(&regular.graph, params.expander_degree, params.seed)?;
    let powered = power_graph(&expanded, params.t, params.power_mode)?;
    let reduced = alphabet_reduce(&powered.graph, params.alphabet_mode)?;
    let cnf = hypergraph_to_3sat(&reduced.hypergraph)?;
    let formula = cnf.formula.clone();
    let stages = vec![
        StageSize::formula("input", phi),
        StageSize::graph("constraint-graph", &graph.graph),
        StageSize::graph("regular", &regular.graph),
        StageSize::graph("expander", &expanded),
        StageSize::graph("power", &powered.graph),
        StageSize::graph("alphabet", &reduced.hypergraph),
        StageSize::formula("output", &formula),
    ];
    let unsat_in = oracle.unsat(phi).ok();
    let unsat_out = oracle.unsat(&formula).ok();
    let claimed_unsat_out = unsat_in.map(|u| (u * params.delta).min(params.xi));
    let (size_in, size_out) = (phi.size(), formula.size());
    let stats = RoundStats {
        stages,
        size_in,
        size_out,
        within_size_bound: size_out as u128 <= params.d as u128 * size_in as u128,
        unsat_in,
        unsat_out,
        claimed_unsat_out,
    };
    Ok(DoubledGap { formula, stats, graph, regular, powered, reduced, cnf, input: phi.clone() })
}

impl DoubledGap {
    /// Maps a satisfying assignment of the input to one of the output.
    pub fn lift(&self, x: &[bool]) -> Vec<bool> {
        let a = self.graph.lift(&self.input, x);
        let a = self.regular.lift(&a);
        let a = self.powered.lift(&a);
        let a = self.reduced.lift(&self.powered.graph, &a);
        self.cnf.lift(&a)
    }
}

/// Repeats `double_gap` for `rounds` rounds, deriving each round's seeds from
/// the round index.
pub fn amplify(phi: &CnfFormula, rounds: u32, params: &FgprParams) -> Result<(CnfFormula, Vec<RoundStats>)> {
    let mut current = phi.clone();
    let mut stats = Vec::with_capacity(rounds as usize);
    for round in 0..rounds {
        let p = round_params(params, round);
        let out = double_gap(&current, &p)?;
        stats.push(out.stats);
        current = out.formula;
    }
    Ok((current, stats))
}

fn round_params(params: &FgprParams, round: u32) -> FgprParams {
    let bump = |m: Mode| match m {
        Mode::Sample { count, seed } => Mode::Sample { count, seed: seed.wrapping_add(round as u64) },
        Mode::Exhaustive => Mode::Exhaustive,
    };
    FgprParams {
        power_mode: bump(params.power_mode),
        alphabet_mode: bump(params.alphabet_mode),
        seed: params.seed.wrapping_add(round as u64),
        ..*params
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csp::{apply_polarities, find_satisfying, PolarityTemplate, DEFAULT_SEARCH_BUDGET};
    use rand::{Rng, SeedableRng};

    fn small_params() -> FgprParams {
        FgprParams { alphabet_mode: Mode::Sample { count: 300, seed: 7 }, ..FgprParams::default() }
    }

    #[test]
    fn satisfiable_stays_satisfiable() {
        let phi = CnfFormula::from_dimacs(3, &[&[1, -2, 3], &[-1, 2]]).unwrap();
        let out = double_gap(&phi, &small_params()).unwrap();
        let x = find_satisfying(&phi, DEFAULT_SEARCH_BUDGET).unwrap().unwrap();
        assert!(out.formula.is_satisfied_by(&out.lift(&x)));
        assert!(out.formula.max_arity() <= 3);
    }

    #[test]
    fn output_factor_graph_ignores_polarities() {
        let phi = CnfFormula::from_dimacs(3, &[&[1, 2, 3], &[1, 2]]).unwrap();
        let fg = phi.factor_graph();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let mut first = None;
        for _ in 0..4 {
            let t = PolarityTemplate::new((0..fg.slot_count()).map(|_| rng.gen()).collect());
            let f = apply_polarities(&fg, &t).unwrap();
            let out = double_gap(&f, &small_params()).unwrap().formula.factor_graph();
            match &first {
                None => first = Some(out),
                Some(g) => assert_eq!(g, &out),
            }
        }
    }

    #[test]
    fn amplify_runs_two_rounds_in_sample_mode() {
        let phi = CnfFormula::from_dimacs(2, &[&[1, 2], &[-1]]).unwrap();
        let params = FgprParams {
            power_mode: Mode::Sample { count: 40, seed: 1 },
            alphabet_mode: Mode::Sample { count: 40, seed: 2 },
            ..FgprParams::default()
        };
        let (out, stats) = amplify(&phi, 2, &params).unwrap();
        assert_eq!(stats.len(), 2);
        assert!(out.max_arity() <= 3);
        assert_eq!(stats[1].size_in, stats[0].size_out);
    }
}
