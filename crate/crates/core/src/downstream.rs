//! Reductions out of 3SAT: the weighted E3SAT → EkSAT mixture, its unweighted
//! variant, and the chain 3SAT → 4NAE → 3NAE → 2LIN.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::csp::{ratio, Clause, CnfFormula, Kind, Literal, Weight};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EkSatParams {
    pub k: u32,
    /// Unsatisfiable fraction of the source instances, in `(0, 1/8)`.
    pub gamma: Weight,
    /// When set, requires `2^q ≥ (1−ε)/ε · (1/(8γ) − 1)`.
    pub epsilon: Option<Weight>,
}

impl EkSatParams {
    pub fn q(&self) -> u32 {
        self.k - 3
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 4 || self.k > 40 {
            return Err(Error::InvalidParameter(format!("k = {} outside [4, 40]", self.k)));
        }
        if self.gamma <= Weight::zero() || self.gamma >= ratio(1, 8) {
            return Err(Error::InvalidParameter(format!("gamma = {} outside (0, 1/8)", self.gamma)));
        }
        if let Some(eps) = self.epsilon {
            if eps <= Weight::zero() || eps >= Weight::one() {
                return Err(Error::InvalidParameter(format!("epsilon = {eps} outside (0, 1)")));
            }
            let needed = (Weight::one() - eps) / eps * (Weight::one() / (self.gamma * 8) - Weight::one());
            if Weight::from_integer(1i64 << self.q()) < needed {
                return Err(Error::InvalidParameter(format!("2^q = {} below {needed}", 1u64 << self.q())));
            }
        }
        Ok(())
    }

    /// `2^q − 1 + 1/(8γ)`.
    pub fn total_weight(&self) -> Weight {
        Weight::from_integer((1i64 << self.q()) - 1) + Weight::one() / (self.gamma * 8)
    }
}

/// The EkSAT mixture and where its auxiliary variables live.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EkSat {
    pub formula: CnfFormula,
    pub params: EkSatParams,
    /// Variables of the source formula.
    pub source_vars: u32,
    /// Clauses of the source formula (the first `m` clauses of the output).
    pub source_clauses: usize,
}

impl EkSat {
    pub fn y(&self, j: u32) -> u32 {
        self.source_vars + j
    }

    pub fn z(&self, j: u32) -> u32 {
        self.source_vars + self.params.q() + j
    }

    /// A satisfying assignment of the source extended with all `y` true.
    pub fn lift(&self, x: &[bool]) -> Vec<bool> {
        let mut out = x[..self.source_vars as usize].to_vec();
        out.resize(self.formula.n() as usize, true);
        out
    }
}

fn check_exact(phi: &CnfFormula, k: usize) -> Result<()> {
    for (i, c) in phi.clauses().iter().enumerate() {
        let mut vars: Vec<u32> = c.lits.iter().map(|l| l.var).collect();
        vars.sort_unstable();
        vars.dedup();
        if c.len() != k || vars.len() != k {
            return Err(Error::BadArity(i));
        }
    }
    Ok(())
}

fn require_kind(phi: &CnfFormula, expected: Kind) -> Result<()> {
    if phi.kind() != expected {
        return Err(Error::KindMismatch { expected: expected.as_str(), got: phi.kind().as_str() });
    }
    Ok(())
}

/// `ψ0`: every source clause extended by `¬y_1 … ¬y_q`, sharing weight
/// `1/(8γ)`; `ψ_i` for `1 ≤ i < 2^q`: eight clauses over `y` (`y_j` positive
/// iff bit `j−1` of `i` is set) and every sign pattern of `z_1 z_2 z_3`, weight
/// `1/8` each. Variables: `y_j = n + j`, `z_j = n + q + j`.
pub fn eksat_reduce(phi: &CnfFormula, params: &EkSatParams) -> Result<EkSat> {
    params.validate()?;
    require_kind(phi, Kind::Sat)?;
    check_exact(phi, 3)?;
    if phi.m() == 0 {
        return Err(Error::InvalidParameter("empty formula".into()));
    }
    let (n, q) = (phi.n(), params.q());
    let y = |j: u32| n + j;
    let z = |j: u32| n + q + j;
    let w0 = Weight::one() / (params.gamma * 8 * phi.m() as i64);
    let mut clauses = Vec::with_capacity(phi.m() + 8 * ((1usize << q) - 1));
    for c in phi.clauses() {
        let mut lits = c.lits.clone();
        lits.extend((1..=q).map(|j| Literal::neg(y(j))));
        clauses.push(Clause::weighted(lits, w0));
    }
    for i in 1u64..1 << q {
        for pattern in 0..8u32 {
            let mut lits: Vec<Literal> = (1..=q).map(|j| Literal::new(y(j), (i >> (j - 1)) & 1 == 0)).collect();
            lits.extend((1..=3).map(|j| Literal::new(z(j), (pattern >> (j - 1)) & 1 == 1)));
            clauses.push(Clause::weighted(lits, ratio(1, 8)));
        }
    }
    let formula = CnfFormula::new(n + q + 3, Kind::Sat, clauses)?;
    Ok(EkSat { formula, params: *params, source_vars: n, source_clauses: phi.m() })
}

/// Unweighted EkSAT with the `ψ_i` blocks repeated `γ'm` times.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Unweighted {
    pub formula: CnfFormula,
    /// `γ' = ⌊γm⌋ / m ≤ γ`.
    pub gamma_used: Weight,
    pub copies: u64,
}

/// Scales weights so `ψ0` clauses weigh 1 and repeats the `ψ_1 … ψ_{2^q−1}`
/// block `γ'm` times; copy `c` uses its own `z` triple (`c = 0` the original,
/// later copies numbered after all existing variables).
pub fn unweight(e: &EkSat) -> Result<Unweighted> {
    let m = e.source_clauses as i64;
    let copies = (e.params.gamma * m).floor().to_integer();
    if copies < 1 {
        return Err(Error::InvalidParameter(format!("gamma·m = {} < 1", e.params.gamma * m)));
    }
    let q = e.params.q();
    let base = e.formula.n();
    let mut clauses: Vec<Clause> =
        e.formula.clauses()[..e.source_clauses].iter().map(|c| Clause::new(c.lits.clone())).collect();
    let block = &e.formula.clauses()[e.source_clauses..];
    for copy in 0..copies as u32 {
        for c in block {
            let lits = c
                .lits
                .iter()
                .map(|l| {
                    let is_z = l.var > e.source_vars + q;
                    if is_z && copy > 0 {
                        let j = l.var - e.source_vars - q;
                        Literal::new(base + 3 * (copy - 1) + j, l.negated)
                    } else {
                        *l
                    }
                })
                .collect();
            clauses.push(Clause::new(lits));
        }
    }
    let n = base + 3 * (copies as u32 - 1);
    Ok(Unweighted { formula: CnfFormula::new(n, Kind::Sat, clauses)?, gamma_used: ratio(copies, m), copies: copies as u64 })
}

/// NAE of each clause with one global fresh variable `w = n + 1` appended.
pub fn sat3_to_nae4(phi: &CnfFormula) -> Result<CnfFormula> {
    require_kind(phi, Kind::Sat)?;
    let w = phi.n() + 1;
    let clauses = phi
        .clauses()
        .iter()
        .enumerate()
        .map(|(i, c)| {
            if c.len() > 3 {
                return Err(Error::BadArity(i));
            }
            let mut lits = c.lits.clone();
            lits.push(Literal::pos(w));
            Ok(Clause::weighted(lits, c.weight))
        })
        .collect::<Result<_>>()?;
    CnfFormula::new(w, Kind::Nae, clauses)
}

/// `NAE(a,b,c,d)` → `NAE(a,b,v) ∧ NAE(c,d,¬v)` with a fresh `v` per clause.
pub fn nae4_to_nae3(phi: &CnfFormula) -> Result<CnfFormula> {
    require_kind(phi, Kind::Nae)?;
    let mut clauses = Vec::with_capacity(2 * phi.m());
    for (i, c) in phi.clauses().iter().enumerate() {
        if c.len() != 4 {
            return Err(Error::BadArity(i));
        }
        let v = phi.n() + 1 + i as u32;
        let l = &c.lits;
        clauses.push(Clause::weighted(vec![l[0], l[1], Literal::pos(v)], c.weight));
        clauses.push(Clause::weighted(vec![l[2], l[3], Literal::neg(v)], c.weight));
    }
    CnfFormula::new(phi.n() + phi.m() as u32, Kind::Nae, clauses)
}

/// `NAE(a,b,c)` → `a⊕b, b⊕c, a⊕c`: exactly two hold when the NAE holds, none
/// otherwise.
pub fn nae3_to_lin2(phi: &CnfFormula) -> Result<CnfFormula> {
    require_kind(phi, Kind::Nae)?;
    let mut clauses = Vec::with_capacity(3 * phi.m());
    for (i, c) in phi.clauses().iter().enumerate() {
        if c.len() != 3 {
            return Err(Error::BadArity(i));
        }
        let l = &c.lits;
        for (a, b) in [(0, 1), (1, 2), (0, 2)] {
            clauses.push(Clause::weighted(vec![l[a], l[b]], c.weight));
        }
    }
    CnfFormula::new(phi.n(), Kind::Lin, clauses)
}

/// One step of the chain 3SAT → 4NAE → 3NAE → 2LIN.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChainStep {
    Nae4,
    Nae3,
    Lin2,
}

impl ChainStep {
    pub fn parse(s: &str) -> Option<ChainStep> {
        match s {
            "nae4" => Some(ChainStep::Nae4),
            "nae3" => Some(ChainStep::Nae3),
            "lin2" => Some(ChainStep::Lin2),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ChainStep::Nae4 => "nae4",
            ChainStep::Nae3 => "nae3",
            ChainStep::Lin2 => "lin2",
        }
    }

    pub fn apply(self, phi: &CnfFormula) -> Result<CnfFormula> {
        match self {
            ChainStep::Nae4 => sat3_to_nae4(phi),
            ChainStep::Nae3 => nae4_to_nae3(phi),
            ChainStep::Lin2 => nae3_to_lin2(phi),
        }
    }
}
