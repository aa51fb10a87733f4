use super::expander::make_expander_with;
use super::graph_degrees;
use super::regularize::check_rank_two;
use crate::csp::{Constraint, ConstraintHypergraph};
use crate::{Error, Result};

/// Superimposes a seeded `degree`-regular expander and then `degree + d0`
/// self loops per vertex, all with always-satisfied constraints, on a
/// `d0`-regular graph. The result is `2·degree + 2·d0`-regular with at least
/// half of every vertex's edges being self loops.
pub fn expanderize(g: &ConstraintHypergraph, degree: u32, seed: u64) -> Result<ConstraintHypergraph> {
    check_rank_two(g)?;
    let deg = graph_degrees(g);
    let d0 = deg.first().copied().unwrap_or(0);
    if deg.iter().any(|&d| d != d0) {
        return Err(Error::NotRegular);
    }
    let mut out = g.clone();
    let x = make_expander_with(g.vertex_count, degree, seed);
    for (a, b) in x.edges {
        out.add_edge(vec![a, b], Constraint::always());
    }
    for v in 0..g.vertex_count {
        for _ in 0..degree as usize + d0 {
            out.add_edge(vec![v, v], Constraint::always());
        }
    }
    Ok(out)
}

/// Degree of a positive expander-shaped graph: regular, and every vertex has
/// at least half its degree in self loops. `None` otherwise.
pub fn is_positive(g: &ConstraintHypergraph) -> Option<usize> {
    let deg = graph_degrees(g);
    let d = *deg.first()?;
    if deg.iter().any(|&x| x != d) {
        return None;
    }
    let mut loops = vec![0usize; deg.len()];
    for vs in &g.edges {
        if vs.len() == 2 && vs[0] == vs[1] {
            loops[vs[0] as usize] += 1;
        }
    }
    loops.iter().all(|&l| 2 * l >= d).then_some(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amplify::{regularize, to_constraint_graph};
    use crate::csp::CnfFormula;

    #[test]
    fn positive_and_regular() {
        let phi = CnfFormula::from_dimacs(3, &[&[1, 2, 3], &[-1, 2, -3]]).unwrap();
        let g1 = regularize(&to_constraint_graph(&phi).unwrap().graph, 3, 4).unwrap().graph;
        let g2 = expanderize(&g1, 3, 4).unwrap();
        assert_eq!(is_positive(&g2), Some(2 * 3 + 2 * 4));
        assert_eq!(expanderize(&to_constraint_graph(&phi).unwrap().graph, 3, 4), Err(Error::NotRegular));
    }
}
