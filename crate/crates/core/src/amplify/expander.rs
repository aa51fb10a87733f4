use num_rational::Rational64;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::seed;

pub const DEFAULT_DEGREE: u32 = 3;

/// Largest vertex count whose expansion is certified by enumerating subsets.
pub const EXACT_CERTIFICATE_LIMIT: u32 = 20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Certificate {
    /// Exact edge expansion `min |∂S| / |S|` over `1 ≤ |S| ≤ n/2`.
    Exact(Rational64),
    /// No subset qualifies (a single vertex).
    Vacuous,
    /// Cheeger lower bound `(d - λ₂) / 2` from a power-iteration estimate.
    Spectral(f64),
}

impl Certificate {
    pub fn is_expanding(&self) -> bool {
        match self {
            Certificate::Exact(eta) => *eta > Rational64::from_integer(0),
            Certificate::Vacuous => true,
            Certificate::Spectral(bound) => *bound > 1e-9,
        }
    }
}

/// A `degree`-regular multigraph; a self loop adds one to its vertex's degree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpanderSpec {
    pub vertex_count: u32,
    pub degree: u32,
    pub edges: Vec<(u32, u32)>,
    pub positive: bool,
    pub certificate: Certificate,
}

/// `make_expander_with(vertex_count, DEFAULT_DEGREE, seed)`.
pub fn make_expander(vertex_count: u32, seed: u64) -> ExpanderSpec {
    make_expander_with(vertex_count, DEFAULT_DEGREE, seed)
}

/// Union of `degree` seeded random perfect matchings (an odd vertex out gets a
/// self loop), redrawn until the certificate shows positive expansion.
pub fn make_expander_with(vertex_count: u32, degree: u32, seed: u64) -> ExpanderSpec {
    let mut rng = seed::stream(&format!("expander/{vertex_count}/{degree}"), seed);
    let mut best: Option<ExpanderSpec> = None;
    for _ in 0..64 {
        let mut edges = Vec::with_capacity((vertex_count * degree) as usize);
        let mut order: Vec<u32> = (0..vertex_count).collect();
        for _ in 0..degree {
            order.shuffle(&mut rng);
            for pair in order.chunks(2) {
                let (a, b) = if pair.len() == 2 { (pair[0], pair[1]) } else { (pair[0], pair[0]) };
                edges.push((a.min(b), a.max(b)));
            }
        }
        edges.sort_unstable();
        let certificate = certify(vertex_count, degree, &edges);
        let spec = ExpanderSpec { vertex_count, degree, edges, positive: false, certificate };
        if spec.certificate.is_expanding() {
            return spec;
        }
        best.get_or_insert(spec);
    }
    // Degree ≥ 2 on ≥ 2 vertices is connected with overwhelming probability;
    // degree 1 may never expand, in which case the last draw is returned.
    best.expect("at least one draw")
}

impl ExpanderSpec {
    /// Adds `degree` self loops per vertex, doubling the degree.
    pub fn positive(mut self) -> ExpanderSpec {
        for v in 0..self.vertex_count {
            for _ in 0..self.degree {
                self.edges.push((v, v));
            }
        }
        self.edges.sort_unstable();
        self.degree *= 2;
        self.positive = true;
        self.certificate = certify(self.vertex_count, self.degree, &self.edges);
        self
    }

    pub fn degrees(&self) -> Vec<u32> {
        let mut d = vec![0; self.vertex_count as usize];
        for &(a, b) in &self.edges {
            d[a as usize] += 1;
            if a != b {
                d[b as usize] += 1;
            }
        }
        d
    }

    pub fn self_loops(&self) -> Vec<u32> {
        let mut d = vec![0; self.vertex_count as usize];
        for &(a, b) in &self.edges {
            if a == b {
                d[a as usize] += 1;
            }
        }
        d
    }

    pub fn is_regular(&self) -> bool {
        self.degrees().iter().all(|&d| d == self.degree)
    }

    /// Adjacency bytes for determinism checks.
    pub fn adjacency_bytes(&self) -> Vec<u8> {
        self.edges.iter().flat_map(|&(a, b)| a.to_le_bytes().into_iter().chain(b.to_le_bytes())).collect()
    }
}

pub fn certify(vertex_count: u32, degree: u32, edges: &[(u32, u32)]) -> Certificate {
    if vertex_count <= 1 {
        return Certificate::Vacuous;
    }
    if vertex_count <= EXACT_CERTIFICATE_LIMIT {
        Certificate::Exact(exact_expansion(vertex_count, edges))
    } else {
        Certificate::Spectral(spectral_bound(vertex_count, degree, edges))
    }
}

/// `min_{1 ≤ |S| ≤ n/2} |{(u,v) ∈ E : u ∈ S, v ∉ S}| / |S|`.
pub fn exact_expansion(vertex_count: u32, edges: &[(u32, u32)]) -> Rational64 {
    let crossing: Vec<u32> = edges.iter().filter(|(a, b)| a != b).map(|&(a, b)| (1 << a) | (1 << b)).collect();
    let half = vertex_count / 2;
    let mut best = Rational64::from_integer(i64::MAX);
    for s in 1u32..1 << vertex_count {
        let size = s.count_ones();
        if size > half {
            continue;
        }
        let cut = crossing.iter().filter(|&&m| (s & m).count_ones() == 1).count() as i64;
        let ratio = Rational64::new(cut, size as i64);
        if ratio < best {
            best = ratio;
        }
    }
    best
}

/// Cheeger-style lower bound from the second adjacency eigenvalue.
fn spectral_bound(vertex_count: u32, degree: u32, edges: &[(u32, u32)]) -> f64 {
    let n = vertex_count as usize;
    let d = degree as f64;
    let apply = |x: &[f64]| {
        let mut y: Vec<f64> = x.iter().map(|v| v * d).collect();
        for &(a, b) in edges {
            let (a, b) = (a as usize, b as usize);
            if a == b {
                y[a] += x[a];
            } else {
                y[a] += x[b];
                y[b] += x[a];
            }
        }
        y
    };
    // Power iteration on A + dI (spectrum in [0, 2d]) restricted to 1⊥.
    let mut x: Vec<f64> = (0..n).map(|i| ((i * 7919 + 13) % 101) as f64 - 50.0).collect();
    let mut lambda = 0.0;
    for _ in 0..500 {
        let mean = x.iter().sum::<f64>() / n as f64;
        x.iter_mut().for_each(|v| *v -= mean);
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            break;
        }
        x.iter_mut().for_each(|v| *v /= norm);
        let y = apply(&x);
        lambda = x.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>();
        x = y;
    }
    let lambda2 = lambda - d;
    (d - lambda2) / 2.0
}
