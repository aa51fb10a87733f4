use super::expander::make_expander_with;
use super::graph_degrees;
use crate::csp::{Constraint, ConstraintHypergraph, Coord, Gf2Poly, HyperAssignment};
use crate::{Error, Result};

/// A regular graph built from a rank-2 graph, plus the cloud of each vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Regularized {
    pub graph: ConstraintHypergraph,
    /// New vertices standing for each input vertex, one per incidence.
    pub clouds: Vec<Vec<u32>>,
}

fn equality(k: u32) -> Constraint {
    Constraint::Restricted((0..k).map(|b| Gf2Poly::equality(Coord::new(0, b), Coord::new(1, b), false)).collect())
}

pub(crate) fn check_rank_two(g: &ConstraintHypergraph) -> Result<()> {
    match g.edges.iter().position(|vs| vs.len() != 2) {
        Some(e) => Err(Error::BadRank(e, g.edges[e].len())),
        None => Ok(()),
    }
}

/// Replaces each vertex `u` by `deg(u)` vertices joined by a seeded
/// `degree`-regular expander carrying equality constraints; the `i`-th edge at
/// `u` is re-attached to the `i`-th vertex of its cloud. Isolated vertices
/// disappear. The result is `(degree + 1)`-regular (self loops count once).
pub fn regularize(g: &ConstraintHypergraph, degree: u32, seed: u64) -> Result<Regularized> {
    check_rank_two(g)?;
    g.validate()?;
    let deg = graph_degrees(g);
    let mut clouds = Vec::with_capacity(deg.len());
    let mut next = 0u32;
    for &d in &deg {
        clouds.push((next..next + d as u32).collect::<Vec<u32>>());
        next += d as u32;
    }
    let mut out = ConstraintHypergraph::new(next, g.alphabet_bits);
    let mut used = vec![0usize; deg.len()];
    for ((vs, c), &w) in g.edges.iter().zip(&g.constraints).zip(&g.weights) {
        let (a, b) = (vs[0] as usize, vs[1] as usize);
        let ca = clouds[a][used[a]];
        used[a] += 1;
        let cb = if a == b {
            ca
        } else {
            used[b] += 1;
            clouds[b][used[b] - 1]
        };
        out.add_weighted_edge(vec![ca, cb], c.clone(), w);
    }
    let eq = equality(g.alphabet_bits);
    for cloud in &clouds {
        if cloud.is_empty() {
            continue;
        }
        let x = make_expander_with(cloud.len() as u32, degree, seed);
        for (a, b) in x.edges {
            let c = if a == b { Constraint::always() } else { eq.clone() };
            out.add_edge(vec![cloud[a as usize], cloud[b as usize]], c);
        }
    }
    Ok(Regularized { graph: out, clouds })
}

impl Regularized {
    /// Copies each vertex's value to its whole cloud.
    pub fn lift(&self, a: &HyperAssignment) -> HyperAssignment {
        let k = self.graph.alphabet_bits;
        let mut out = HyperAssignment::zeros(self.graph.vertex_count, k);
        for (u, cloud) in self.clouds.iter().enumerate() {
            for &c in cloud {
                for b in 0..k {
                    out.set(c, b, a.get(u as u32, b));
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amplify::to_constraint_graph;
    use crate::csp::CnfFormula;

    #[test]
    fn output_is_regular() {
        let phi = CnfFormula::from_dimacs(3, &[&[1, 2, 3], &[-1, 2], &[3]]).unwrap();
        let g = to_constraint_graph(&phi).unwrap().graph;
        let r = regularize(&g, 3, 1).unwrap();
        assert!(graph_degrees(&r.graph).iter().all(|&d| d == 4));
        // A vertex of degree 1 becomes a single vertex.
        let deg = graph_degrees(&g);
        for (u, cloud) in r.clouds.iter().enumerate() {
            assert_eq!(cloud.len(), deg[u]);
        }
    }

    #[test]
    fn lift_preserves_satisfaction() {
        let phi = CnfFormula::from_dimacs(3, &[&[1, 2, 3], &[-1, 2], &[3]]).unwrap();
        let g = to_constraint_graph(&phi).unwrap();
        let r = regularize(&g.graph, 3, 1).unwrap();
        let a = g.lift(&phi, &[false, true, true]);
        assert!(g.graph.is_satisfied_by(&a));
        assert!(r.graph.is_satisfied_by(&r.lift(&a)));
    }

    #[test]
    fn unsat_ratio_on_random_graphs() {
        use crate::amplify::expanderize;
        use crate::csp::Oracle;
        use num_traits::Zero;
        use rand::{Rng, SeedableRng};

        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let oracle = Oracle::default();
        let mut worst_reg: Option<crate::csp::Weight> = None;
        let mut worst_exp: Option<crate::csp::Weight> = None;
        for _ in 0..10 {
            let mut g = ConstraintHypergraph::new(3, 1);
            for _ in 0..4 {
                let (a, b) = (rng.gen_range(0..3), rng.gen_range(0..3));
                let p = Gf2Poly::equality(Coord::new(0, 0), Coord::new(1, 0), rng.gen());
                g.add_edge(vec![a, b], Constraint::Restricted(vec![p]));
            }
            let r = regularize(&g, 3, 2).unwrap();
            let x = expanderize(&r.graph, 3, 2).unwrap();
            let (u, ur, ux) = (oracle.unsat(&g).unwrap(), oracle.unsat(&r.graph).unwrap(), oracle.unsat(&x).unwrap());
            assert_eq!(u.is_zero(), ur.is_zero());
            assert_eq!(ur.is_zero(), ux.is_zero());
            if !u.is_zero() {
                let (dr, dx) = (ur / u, ux / ur);
                worst_reg = Some(worst_reg.map_or(dr, |w| w.min(dr)));
                worst_exp = Some(worst_exp.map_or(dx, |w| w.min(dx)));
            }
        }
        println!("measured regularize ratio {worst_reg:?}, expanderize ratio {worst_exp:?}");
        assert!(worst_reg.is_some());
    }
}
