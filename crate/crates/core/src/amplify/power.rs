use std::collections::{HashSet, VecDeque};

use rand::Rng;
use rayon::prelude::*;

use super::expanderize::is_positive;
use super::{Mode, EXHAUSTIVE_EDGE_CAP};
use crate::csp::{Constraint, ConstraintHypergraph, Coord, Gf2Poly, HyperAssignment};
use crate::{seed, Error, Result};

/// Walk-powered graph: each vertex holds an opinion on every vertex within
/// distance `t`, laid out as `k`-bit blocks in the order of `balls[v]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Powered {
    pub graph: ConstraintHypergraph,
    pub balls: Vec<Vec<u32>>,
    pub base_bits: u32,
    pub t: u32,
    pub degree: usize,
}

struct Walker<'a> {
    g: &'a ConstraintHypergraph,
    neighbors: Vec<Vec<(u32, usize)>>,
    balls: Vec<Vec<u32>>,
    k: u32,
}

impl Walker<'_> {
    fn pos(&self, v: u32, u: u32) -> Option<u32> {
        self.balls[v as usize].binary_search(&u).ok().map(|p| p as u32)
    }

    /// Constraint of the walk `a → … → b` along `steps` (edge ids and vertices).
    fn constraint(&self, a: u32, path: &[(usize, u32)]) -> (Vec<u32>, Constraint) {
        let b = path.last().map_or(a, |s| s.1);
        let k = self.k;
        let mut polys = Vec::new();
        if a != b {
            let mut seen = HashSet::new();
            for u in std::iter::once(a).chain(path.iter().map(|s| s.1)) {
                if !seen.insert(u) {
                    continue;
                }
                if let (Some(pa), Some(pb)) = (self.pos(a, u), self.pos(b, u)) {
                    for bit in 0..k {
                        polys.push(Gf2Poly::equality(Coord::new(0, pa * k + bit), Coord::new(1, pb * k + bit), false));
                    }
                }
            }
        }
        let mut seen = HashSet::new();
        for &(e, _) in path {
            let ends = &self.g.edges[e];
            let view = if ends.iter().all(|&x| self.pos(a, x).is_some()) {
                Some((0u32, a))
            } else if ends.iter().all(|&x| self.pos(b, x).is_some()) {
                Some((1u32, b))
            } else {
                None
            };
            let Some((slot, owner)) = view else { continue };
            if !seen.insert((e, slot)) {
                continue;
            }
            let ps = self.g.constraints[e].polys().expect("checked restricted");
            for p in ps {
                polys.push(p.map(|c| {
                    let at = self.pos(owner, ends[c.slot as usize]).expect("endpoint in ball");
                    Coord::new(slot, at * k + c.bit)
                }));
            }
        }
        (vec![a, b], Constraint::Restricted(polys))
    }
}

fn balls(neighbors: &[Vec<(u32, usize)>], t: u32) -> Vec<Vec<u32>> {
    (0..neighbors.len())
        .map(|v| {
            let mut dist = vec![u32::MAX; neighbors.len()];
            dist[v] = 0;
            let mut queue = VecDeque::from([v as u32]);
            let mut ball = Vec::new();
            while let Some(x) = queue.pop_front() {
                ball.push(x);
                if dist[x as usize] == t {
                    continue;
                }
                for &(y, _) in &neighbors[x as usize] {
                    if dist[y as usize] == u32::MAX {
                        dist[y as usize] = dist[x as usize] + 1;
                        queue.push_back(y);
                    }
                }
            }
            ball.sort_unstable();
            ball
        })
        .collect()
}

/// Powers a positive expander-shaped graph along random walks that stop after
/// each step with probability `1/t` and become null after `5t` steps.
///
/// Exhaustive mode emits one edge per distinct walk prefix, weighted by the
/// number of `(neighbor, coin)` sequences of length `5t` sharing it; null
/// walks become one always-satisfied self loop per start vertex. Sample mode
/// draws `count` sequences from a seeded stream, each with weight 1.
pub fn power_graph(g: &ConstraintHypergraph, t: u32, mode: Mode) -> Result<Powered> {
    if t == 0 {
        return Err(Error::InvalidParameter("t must be at least 1".into()));
    }
    g.restriction()?;
    let degree = is_positive(g).ok_or(Error::NotPositive)?;
    let mut neighbors: Vec<Vec<(u32, usize)>> = vec![Vec::new(); g.vertex_count as usize];
    for (e, vs) in g.edges.iter().enumerate() {
        let (x, y) = (vs[0], vs[1]);
        neighbors[x as usize].push((y, e));
        if x != y {
            neighbors[y as usize].push((x, e));
        }
    }
    for list in &mut neighbors {
        list.sort_unstable();
    }
    let balls = balls(&neighbors, t);
    let k = g.alphabet_bits;
    let max_ball = balls.iter().map(Vec::len).max().unwrap_or(0) as u32;
    let walker = Walker { g, neighbors, balls, k };
    let mut out = ConstraintHypergraph::new(g.vertex_count, max_ball * k);
    let steps = 5 * t;
    let d = degree as u64;
    match mode {
        Mode::Exhaustive => {
            let tt = t as u64;
            let weight = |len: u32| -> Result<u64> {
                let coins = (tt - 1).checked_pow(len - 1);
                let rest = (d * tt).checked_pow(steps - len);
                coins.zip(rest).and_then(|(a, b)| a.checked_mul(b)).ok_or(Error::Overflow("walk multiplicity"))
            };
            let max_len = if t == 1 { 1 } else { steps };
            let mut count: u64 = 0;
            for len in 1..=max_len {
                count = count.saturating_add(d.saturating_pow(len));
            }
            if count.saturating_mul(g.vertex_count as u64) > EXHAUSTIVE_EDGE_CAP {
                return Err(Error::SizeCap(format!("{count} walks per vertex in exhaustive mode")));
            }
            let weights: Vec<u64> = (1..=max_len).map(weight).collect::<Result<_>>()?;
            let per_vertex: Vec<Vec<(Vec<u32>, Constraint, u64)>> = (0..g.vertex_count)
                .into_par_iter()
                .map(|a| {
                    let mut edges = Vec::new();
                    let mut path: Vec<(usize, u32)> = Vec::new();
                    enumerate(&walker, a, max_len, &weights, &mut path, &mut edges);
                    edges
                })
                .collect();
            for edges in per_vertex {
                for (vs, c, w) in edges {
                    out.add_weighted_edge(vs, c, w);
                }
            }
            let null = (d * (tt - 1)).checked_pow(steps).ok_or(Error::Overflow("null walk multiplicity"))?;
            if null > 0 {
                for a in 0..g.vertex_count {
                    out.add_weighted_edge(vec![a, a], Constraint::always(), null);
                }
            }
        }
        Mode::Sample { count, seed } => {
            let mut rng = seed::stream("power", seed);
            let walks: Vec<(u32, Option<Vec<usize>>)> = (0..count)
                .map(|_| {
                    let a = rng.gen_range(0..g.vertex_count);
                    let mut choices = Vec::new();
                    for _ in 0..steps {
                        choices.push(rng.gen_range(0..degree));
                        if rng.gen_range(0..t) == 0 {
                            return (a, Some(choices));
                        }
                    }
                    (a, None)
                })
                .collect();
            let edges: Vec<(Vec<u32>, Constraint)> = walks
                .par_iter()
                .map(|(a, choices)| match choices {
                    None => (vec![*a, *a], Constraint::always()),
                    Some(choices) => {
                        let mut v = *a;
                        let path: Vec<(usize, u32)> = choices
                            .iter()
                            .map(|&i| {
                                let (next, e) = walker.neighbors[v as usize][i];
                                v = next;
                                (e, next)
                            })
                            .collect();
                        walker.constraint(*a, &path)
                    }
                })
                .collect();
            for (vs, c) in edges {
                out.add_edge(vs, c);
            }
        }
    }
    let balls = walker.balls;
    Ok(Powered { graph: out, balls, base_bits: k, t, degree })
}

fn enumerate(
    w: &Walker<'_>,
    a: u32,
    max_len: u32,
    weights: &[u64],
    path: &mut Vec<(usize, u32)>,
    out: &mut Vec<(Vec<u32>, Constraint, u64)>,
) {
    let v = path.last().map_or(a, |s| s.1);
    for &(next, e) in &w.neighbors[v as usize] {
        path.push((e, next));
        let len = path.len();
        if weights[len - 1] > 0 {
            let (vs, c) = w.constraint(a, path);
            out.push((vs, c, weights[len - 1]));
        }
        if (len as u32) < max_len {
            enumerate(w, a, max_len, weights, path, out);
        }
        path.pop();
    }
}

impl Powered {
    /// Every vertex's opinion is the true value of each vertex in its ball.
    pub fn lift(&self, a: &HyperAssignment) -> HyperAssignment {
        let k = self.base_bits;
        let mut out = HyperAssignment::zeros(self.graph.vertex_count, self.graph.alphabet_bits);
        for (v, ball) in self.balls.iter().enumerate() {
            for (p, &u) in ball.iter().enumerate() {
                for b in 0..k {
                    out.set(v as u32, p as u32 * k + b, a.get(u, b));
                }
            }
        }
        out
    }
}
