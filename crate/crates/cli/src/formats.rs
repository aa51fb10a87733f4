//! Line-oriented text formats.
//!
//! Formulas: `p cnf n m` (unweighted SAT, plain DIMACS) or `p wcnf n m kind`,
//! then one clause per line, `0`-terminated, optionally followed by
//! `w p/q`. Factor graphs: `p fgraph n m kind` with variable lists in the same
//! layout. Templates: one `+`/`-` per slot, a line per clause. Hypergraphs:
//! `p hyper V E k`, then `e w v1 .. vr : poly ; poly` per edge, or
//! `e w v1 .. vr : table <hex words>` for an explicit table. A polynomial is
//! `+`-joined terms `s.b`, `s.b*s.b` or `1` (`0` for the zero polynomial).
//! Lines starting with `c` are comments.

use std::fmt::Write;

use ufg_core::csp::{
    Clause, CnfFormula, Constraint, ConstraintHypergraph, Coord, FactorGraph, Gf2Poly, Kind, Literal, Monomial,
    PolarityTemplate, TruthTable, Weight,
};

use crate::error::{parse_err, CliError, Result};

struct Tokens<'a> {
    items: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> Tokens<'a> {
    fn next(&mut self) -> Option<(usize, &'a str)> {
        let t = self.items.get(self.pos).copied();
        self.pos += 1;
        t
    }

    fn peek(&self) -> Option<&'a str> {
        self.items.get(self.pos).map(|t| t.1)
    }

    fn last_line(&self) -> usize {
        self.items.last().map_or(0, |t| t.0)
    }
}

fn is_comment(line: &str) -> bool {
    line.starts_with('c') || line.starts_with('%')
}

/// Splits off the `p ...` header; the rest is tokenized with line numbers.
fn split_header(text: &str) -> Result<(usize, Vec<&str>, Tokens<'_>)> {
    let mut header = None;
    let mut items = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || is_comment(line) {
            continue;
        }
        if header.is_none() {
            if !line.starts_with('p') {
                return Err(parse_err(i + 1, "expected a `p` header line"));
            }
            header = Some((i + 1, line.split_whitespace().collect::<Vec<_>>()));
            continue;
        }
        items.extend(line.split_whitespace().map(|t| (i + 1, t)));
    }
    let (line, fields) = header.ok_or_else(|| parse_err(0, "missing `p` header line"))?;
    Ok((line, fields, Tokens { items, pos: 0 }))
}

fn number<T: std::str::FromStr>(line: usize, tok: &str, what: &str) -> Result<T> {
    tok.parse().map_err(|_| parse_err(line, format!("bad {what} `{tok}`")))
}

fn kind(line: usize, tok: &str) -> Result<Kind> {
    Kind::parse(tok).ok_or_else(|| parse_err(line, format!("unknown kind `{tok}`")))
}

/// `p/q` or an integer; negative or zero-denominator weights are rejected.
pub fn parse_weight(line: usize, tok: &str) -> Result<Weight> {
    let (p, q) = match tok.split_once('/') {
        Some((p, q)) => (number::<i64>(line, p, "weight")?, number::<i64>(line, q, "weight")?),
        None => (number::<i64>(line, tok, "weight")?, 1),
    };
    if q <= 0 {
        return Err(parse_err(line, format!("bad weight denominator in `{tok}`")));
    }
    if p < 0 {
        return Err(parse_err(line, format!("negative weight `{tok}`")));
    }
    Ok(Weight::new(p, q))
}

pub fn fmt_weight(w: Weight) -> String {
    format!("{}/{}", w.numer(), w.denom())
}

/// One clause-shaped record: the integers before `0` and the optional weight.
fn record(tokens: &mut Tokens<'_>) -> Result<Option<(usize, Vec<i64>, Weight)>> {
    let Some((line, first)) = tokens.next() else {
        return Ok(None);
    };
    let mut values = Vec::new();
    let mut tok = first;
    let mut at = line;
    loop {
        let v: i64 = number(at, tok, "literal")?;
        if v == 0 {
            break;
        }
        values.push(v);
        match tokens.next() {
            Some((l, t)) => {
                at = l;
                tok = t;
            }
            None => return Err(parse_err(at, "clause is not terminated by 0")),
        }
    }
    if values.is_empty() {
        return Err(parse_err(at, "empty clause"));
    }
    let mut weight = Weight::new(1, 1);
    if tokens.peek() == Some("w") {
        tokens.next();
        let (l, t) = tokens.next().ok_or_else(|| parse_err(at, "missing weight after `w`"))?;
        weight = parse_weight(l, t)?;
    }
    Ok(Some((line, values, weight)))
}

fn header_dims(line: usize, fields: &[&str], tag: &str, with_kind: bool) -> Result<(u32, usize, Option<Kind>)> {
    let want = if with_kind { 5 } else { 4 };
    if fields.len() != want || fields[0] != "p" || fields[1] != tag {
        return Err(parse_err(line, format!("malformed header, expected `p {tag} n m{}`", if with_kind { " kind" } else { "" })));
    }
    let n = number(line, fields[2], "variable count")?;
    let m = number(line, fields[3], "clause count")?;
    let k = if with_kind { Some(kind(line, fields[4])?) } else { None };
    Ok((n, m, k))
}

pub fn parse_cnf(text: &str) -> Result<CnfFormula> {
    let (hline, fields, mut tokens) = split_header(text)?;
    let (n, m, k) = match fields.get(1) {
        Some(&"cnf") => header_dims(hline, &fields, "cnf", false)?,
        Some(&"wcnf") => header_dims(hline, &fields, "wcnf", true)?,
        _ => return Err(parse_err(hline, "malformed header, expected `p cnf` or `p wcnf`")),
    };
    let mut clauses = Vec::with_capacity(m);
    while let Some((line, values, weight)) = record(&mut tokens)? {
        if let Some(&v) = values.iter().find(|v| v.unsigned_abs() > n as u64) {
            return Err(parse_err(line, format!("literal {v} out of range for {n} variables")));
        }
        let lits = values.iter().map(|&v| Literal::new(v.unsigned_abs() as u32, v < 0)).collect();
        clauses.push(Clause::weighted(lits, weight));
    }
    if clauses.len() != m {
        return Err(parse_err(tokens.last_line(), format!("header declares {m} clauses, found {}", clauses.len())));
    }
    Ok(CnfFormula::new(n, k.unwrap_or(Kind::Sat), clauses)?)
}

fn push_weight(out: &mut String, weighted: bool, w: Weight) {
    if weighted {
        let _ = write!(out, " w {}", fmt_weight(w));
    }
}

pub fn emit_cnf(f: &CnfFormula) -> String {
    let weighted = !f.is_unweighted();
    let mut out = String::new();
    if f.kind() == Kind::Sat && !weighted {
        let _ = writeln!(out, "p cnf {} {}", f.n(), f.m());
    } else {
        let _ = writeln!(out, "p wcnf {} {} {}", f.n(), f.m(), f.kind());
    }
    for c in f.clauses() {
        for l in &c.lits {
            let _ = write!(out, "{} ", l.to_dimacs());
        }
        out.push('0');
        push_weight(&mut out, weighted, c.weight);
        out.push('\n');
    }
    out
}

pub fn parse_fgraph(text: &str) -> Result<FactorGraph> {
    let (hline, fields, mut tokens) = split_header(text)?;
    let (n, m, k) = header_dims(hline, &fields, "fgraph", true)?;
    let mut slots = Vec::with_capacity(m);
    let mut weights = Vec::with_capacity(m);
    while let Some((line, values, weight)) = record(&mut tokens)? {
        if let Some(&v) = values.iter().find(|&&v| v < 0 || v > n as i64) {
            return Err(parse_err(line, format!("variable {v} out of range for {n} variables")));
        }
        slots.push(values.iter().map(|&v| v as u32).collect());
        weights.push(weight);
    }
    if slots.len() != m {
        return Err(parse_err(tokens.last_line(), format!("header declares {m} clauses, found {}", slots.len())));
    }
    Ok(FactorGraph { n, kind: k.unwrap_or(Kind::Sat), slots, weights })
}

pub fn emit_fgraph(g: &FactorGraph) -> String {
    let weighted = g.weights.iter().any(|w| *w != Weight::new(1, 1));
    let mut out = String::new();
    let _ = writeln!(out, "p fgraph {} {} {}", g.n, g.m(), g.kind);
    for (vars, &w) in g.slots.iter().zip(&g.weights) {
        for v in vars {
            let _ = write!(out, "{v} ");
        }
        out.push('0');
        push_weight(&mut out, weighted, w);
        out.push('\n');
    }
    out
}

pub fn parse_template(text: &str) -> Result<PolarityTemplate> {
    let mut bits = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || is_comment(line) {
            continue;
        }
        for tok in line.split_whitespace() {
            bits.push(match tok {
                "+" | "+1" | "1" => false,
                "-" | "-1" => true,
                _ => return Err(parse_err(i + 1, format!("bad polarity `{tok}`"))),
            });
        }
    }
    Ok(PolarityTemplate::new(bits))
}

/// One line per clause of `shape`.
pub fn emit_template(t: &PolarityTemplate, shape: &FactorGraph) -> Result<String> {
    if t.len() != shape.slot_count() {
        return Err(ufg_core::Error::TemplateLength { expected: shape.slot_count(), got: t.len() }.into());
    }
    let mut out = String::new();
    let mut bits = t.bits.iter();
    for vars in &shape.slots {
        let signs: Vec<&str> = vars.iter().map(|_| if *bits.next().unwrap_or(&false) { "-" } else { "+" }).collect();
        out.push_str(&signs.join(" "));
        out.push('\n');
    }
    Ok(out)
}

/// Text of `f` rebuilt from its factor graph and template files.
pub fn join(graph: &str, template: &str) -> Result<String> {
    let g = parse_fgraph(graph)?;
    let t = parse_template(template)?;
    Ok(emit_cnf(&g.apply(&t)?))
}

fn coord(line: usize, tok: &str) -> Result<Coord> {
    let (s, b) = tok.split_once('.').ok_or_else(|| parse_err(line, format!("bad coordinate `{tok}`")))?;
    Ok(Coord::new(number(line, s, "slot")?, number(line, b, "bit")?))
}

fn parse_poly(line: usize, text: &str) -> Result<Gf2Poly> {
    let mut monomials = Vec::new();
    let mut constant = false;
    for term in text.split('+').map(str::trim) {
        match term {
            "0" => {}
            "1" => constant = !constant,
            _ => match term.split_once('*') {
                Some((a, b)) => monomials.push(Monomial::product(coord(line, a.trim())?, coord(line, b.trim())?)),
                None => monomials.push(Monomial::Linear(coord(line, term)?)),
            },
        }
    }
    Ok(Gf2Poly::new(monomials, constant))
}

fn fmt_poly(p: &Gf2Poly) -> String {
    let mut terms: Vec<String> = p
        .monomials()
        .iter()
        .map(|m| match m {
            Monomial::Linear(c) => format!("{}.{}", c.slot, c.bit),
            Monomial::Quadratic(a, b) => format!("{}.{}*{}.{}", a.slot, a.bit, b.slot, b.bit),
        })
        .collect();
    if p.constant_term() {
        terms.push("1".into());
    }
    if terms.is_empty() {
        "0".into()
    } else {
        terms.join("+")
    }
}

pub fn parse_hypergraph(text: &str) -> Result<ConstraintHypergraph> {
    let mut header: Option<(u32, usize, u32)> = None;
    let mut h = ConstraintHypergraph::new(0, 0);
    let mut last = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let at = i + 1;
        if line.is_empty() || is_comment(line) {
            continue;
        }
        last = at;
        if header.is_none() {
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 5 || f[0] != "p" || f[1] != "hyper" {
                return Err(parse_err(at, "malformed header, expected `p hyper V E k`"));
            }
            let dims = (number(at, f[2], "vertex count")?, number(at, f[3], "edge count")?, number(at, f[4], "alphabet bits")?);
            h = ConstraintHypergraph::new(dims.0, dims.2);
            header = Some(dims);
            continue;
        }
        let (left, right) = line.split_once(':').ok_or_else(|| parse_err(at, "edge line needs `:`"))?;
        let mut f = left.split_whitespace();
        if f.next() != Some("e") {
            return Err(parse_err(at, "edge line must start with `e`"));
        }
        let w: u64 = number(at, f.next().ok_or_else(|| parse_err(at, "missing edge weight"))?, "edge weight")?;
        let vs = f.map(|t| number(at, t, "vertex")).collect::<Result<Vec<u32>>>()?;
        let right = right.trim();
        let constraint = if let Some(words) = right.strip_prefix("table") {
            let bits = words
                .split_whitespace()
                .map(|t| u64::from_str_radix(t, 16).map_err(|_| parse_err(at, format!("bad table word `{t}`"))))
                .collect::<Result<Vec<u64>>>()?;
            Constraint::Table(TruthTable { bits })
        } else if right.is_empty() {
            Constraint::always()
        } else {
            Constraint::Restricted(right.split(';').map(|p| parse_poly(at, p)).collect::<Result<_>>()?)
        };
        h.add_weighted_edge(vs, constraint, w);
    }
    let (_, e, _) = header.ok_or_else(|| parse_err(0, "missing `p hyper` header line"))?;
    if h.edge_count() != e {
        return Err(parse_err(last, format!("header declares {e} edges, found {}", h.edge_count())));
    }
    h.validate().map_err(CliError::from)?;
    Ok(h)
}

pub fn emit_hypergraph(h: &ConstraintHypergraph) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "p hyper {} {} {}", h.vertex_count, h.edge_count(), h.alphabet_bits);
    for ((vs, c), w) in h.edges.iter().zip(&h.constraints).zip(&h.weights) {
        let _ = write!(out, "e {w}");
        for v in vs {
            let _ = write!(out, " {v}");
        }
        out.push_str(" :");
        match c {
            Constraint::Restricted(ps) if !ps.is_empty() => {
                let polys: Vec<String> = ps.iter().map(fmt_poly).collect();
                let _ = write!(out, " {}", polys.join(" ; "));
            }
            Constraint::Restricted(_) => {}
            Constraint::Table(t) => {
                out.push_str(" table");
                for word in &t.bits {
                    let _ = write!(out, " {word:016x}");
                }
            }
        }
        out.push('\n');
    }
    out
}

/// Reads a `c <tag> <fields..>` comment line, if present.
pub fn tagged_comment<'a>(text: &'a str, tag: &str) -> Option<Vec<&'a str>> {
    text.lines().find_map(|l| {
        let mut f = l.split_whitespace();
        (f.next() == Some("c") && f.next() == Some(tag)).then(|| f.collect())
    })
}
