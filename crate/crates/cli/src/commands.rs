//! Subcommands. Each writes its outputs plus a JSON manifest naming them.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use ufg_core::amplify::{amplify, FgprParams, Mode};
use ufg_core::csp::{CnfFormula, FactorGraph, Oracle, PolarityTemplate, Weight, DEFAULT_ORACLE_CAP};
use ufg_core::downstream::{eksat_reduce, unweight, ChainStep, EkSatParams};
use ufg_core::longcode::{
    build_verifier_formula, count_close_long_codes, delta_lower_bound, encode_long_code,
    folded_affine_codewords, linearity_failure, nearest_in_code, read_blob, write_blob, FoldingBasis, FunctionSpace,
    LongCodeWord, VerifierParams,
};
use ufg_core::sparsify::{sparsify, SparsifyParams};
use ufg_core::universal_circuit::{build_consistency_circuit, circuit_to_3cnf, CircuitTemplate};
use ufg_core::universal_poly::{build_poly_universal, embed_poly, PolyUniversal};

use crate::error::{CliError, Result};
use crate::formats::{
    emit_cnf, emit_fgraph, emit_template, fmt_weight, parse_cnf, parse_fgraph, parse_hypergraph, parse_template,
    parse_weight, tagged_comment,
};
use crate::manifest::{FileEntry, Manifest};
use crate::suite::{find, registry, run_fgpr_suite};

/// Environment variable overriding the exhaustive oracle's assignment cap.
pub const ORACLE_CAP_ENV: &str = "UFG_ORACLE_CAP";

#[derive(Debug, Parser)]
#[command(name = "ufg", version, about = "Universal factor graphs and factor-graph-preserving reductions")]
pub struct Cli {
    /// Record wall time in the manifest (breaks byte-identical reruns).
    #[arg(long, global = true)]
    pub timing: bool,
    /// Print nothing on stdout (suite verdicts, UNSAT values); files are unchanged.
    #[arg(long, short, global = true)]
    pub quiet: bool,
    /// Manifest path; defaults to `<output>.manifest.json`.
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a universal factor graph: polynomial size, or a circuit template with --m.
    BuildUniversal(BuildUniversal),
    /// Polarity template embedding a formula into a universal factor graph.
    Embed(Embed),
    /// Apply a polarity template to a factor graph.
    Instantiate(Instantiate),
    /// Split a 3CNF formula into sparse branches.
    Sparsify(Sparsify),
    /// Run gap-doubling rounds.
    Amplify(Amplify),
    /// Fold a long-code table over a basis.
    Fold(Fold),
    /// Distances and test statistics of a stored long-code table.
    VerifyLongcode(VerifyLongcode),
    /// Inner-verifier 3CNF of a 1-restricted hypergraph over F2.
    BuildVerifier(BuildVerifier),
    /// E3SAT to weighted (or unweighted) EkSAT.
    Eksat(Eksat),
    /// Run the chain 3SAT → 4NAE → 3NAE → 2LIN.
    Reduce(Reduce),
    /// Exact UNSAT value by exhaustive search.
    Unsat(Unsat),
    /// Factor-graph-preservation suite for one or all passes.
    Suite(Suite),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum UniversalKind {
    Poly,
    Circuit,
}

#[derive(Debug, Args)]
pub struct BuildUniversal {
    /// Defaults to `circuit` when -m is given, `poly` otherwise.
    #[arg(long, value_enum)]
    pub kind: Option<UniversalKind>,
    #[arg(short, long)]
    pub n: u32,
    /// Clause count of the circuit template.
    #[arg(short, long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct Embed {
    #[arg(long)]
    pub universal: PathBuf,
    #[arg(long)]
    pub formula: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct Instantiate {
    /// Universal factor graph the polarity template applies to.
    #[arg(long, required_unless_present = "source")]
    pub universal: Option<PathBuf>,
    /// A polarity template, or with --source the universal file itself.
    #[arg(long)]
    pub template: PathBuf,
    /// Formula to embed directly into the universal file given as --template.
    #[arg(long, conflicts_with = "universal")]
    pub source: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct Sparsify {
    #[arg(long, required_unless_present = "input")]
    pub formula: Option<PathBuf>,
    /// The formula, as an alternative to --formula.
    #[arg(conflicts_with = "formula")]
    pub input: Option<PathBuf>,
    /// Rational in (0, 1), e.g. `3/10`.
    #[arg(long, default_value = "1/10")]
    pub epsilon: String,
    /// Threshold override for one-literal hearts (needs --theta2).
    #[arg(long, requires = "theta2")]
    pub theta1: Option<u64>,
    #[arg(long, requires = "theta1")]
    pub theta2: Option<u64>,
    /// Directory receiving `branch-NNNN.cnf` files.
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct Amplify {
    #[arg(long, required_unless_present = "input")]
    pub formula: Option<PathBuf>,
    /// The formula, as an alternative to --formula.
    #[arg(conflicts_with = "formula")]
    pub input: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub rounds: u32,
    #[arg(long, default_value_t = 1)]
    pub t: u32,
    #[arg(long, default_value_t = 3)]
    pub degree: u32,
    /// Walk enumeration: `exhaustive` or `sample:N`.
    #[arg(long, default_value = "exhaustive")]
    pub mode: String,
    /// Sampled constraint tuples in alphabet reduction.
    #[arg(long, default_value_t = 4096)]
    pub alphabet_samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct Fold {
    /// Stored table (blob); its basis is used unless --basis is given.
    #[arg(long, conflicts_with = "long_code")]
    pub input: Option<PathBuf>,
    /// Start from the long code of this point instead (needs --n).
    #[arg(long, requires = "n")]
    pub long_code: Option<u32>,
    #[arg(long)]
    pub n: Option<u32>,
    /// Comma-separated `h:b` pairs, `h` a function id and `b` 0 or 1.
    #[arg(long)]
    pub basis: Option<String>,
    /// Add the pair (1, 1) in front of the basis.
    #[arg(long)]
    pub over_true: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct VerifyLongcode {
    #[arg(long)]
    pub input: PathBuf,
    /// Closeness margin: long codes within 1/2 − δ are counted.
    #[arg(long, default_value = "1/4")]
    pub delta: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BuildVerifier {
    #[arg(long)]
    pub hyper: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub tests_per_unit: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct Eksat {
    #[arg(long, required_unless_present = "input")]
    pub formula: Option<PathBuf>,
    /// The formula, as an alternative to --formula.
    #[arg(conflicts_with = "formula")]
    pub input: Option<PathBuf>,
    #[arg(long, default_value_t = 4)]
    pub k: u32,
    #[arg(long, default_value = "1/16")]
    pub gamma: String,
    #[arg(long)]
    pub epsilon: Option<String>,
    #[arg(long)]
    pub unweight: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct Reduce {
    #[arg(long, required_unless_present = "input")]
    pub formula: Option<PathBuf>,
    /// The formula, as an alternative to --formula.
    #[arg(conflicts_with = "formula")]
    pub input: Option<PathBuf>,
    /// Comma-separated steps, e.g. `3sat,nae4,nae3,lin2`.
    #[arg(long, default_value = "3sat,nae4,nae3,lin2")]
    pub chain: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct Unsat {
    #[arg(long, required_unless_present = "hyper")]
    pub formula: Option<PathBuf>,
    #[arg(long, conflicts_with = "formula")]
    pub hyper: Option<PathBuf>,
    /// JSON report; the value is always printed.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Suite {
    /// A pass name, or `all` for every non-control pass.
    #[arg(long, default_value = "all")]
    pub pass: String,
    #[arg(long, default_value_t = 16)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// JSON report.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// List the registered passes and exit.
    #[arg(long)]
    pub list: bool,
}

pub fn oracle_from_env() -> Result<Oracle> {
    match std::env::var(ORACLE_CAP_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Oracle::with_cap)
            .map_err(|_| CliError::Usage(format!("{ORACLE_CAP_ENV} must be a positive integer, got `{v}`"))),
        Err(_) => Ok(Oracle::with_cap(DEFAULT_ORACLE_CAP)),
    }
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

/// The formula named by `--formula` or the positional argument.
fn formula_path<'a>(flag: &'a Option<PathBuf>, positional: &'a Option<PathBuf>) -> Result<&'a Path> {
    flag.as_deref()
        .or(positional.as_deref())
        .ok_or_else(|| CliError::Usage("no input formula given".into()))
}

fn read_formula(path: &Path, m: &mut Manifest) -> Result<CnfFormula> {
    let text = read_text(path)?;
    m.inputs.push(FileEntry { path: path.display().to_string(), bytes: text.len() as u64 });
    parse_cnf(&text)
}

fn write(path: &Path, bytes: &[u8], m: &mut Manifest) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.display().to_string(), source })?;
    }
    std::fs::write(path, bytes).map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
    m.outputs.push(FileEntry { path: path.display().to_string(), bytes: bytes.len() as u64 });
    Ok(())
}

fn rational(text: &str, what: &str) -> Result<Weight> {
    parse_weight(0, text).map_err(|_| CliError::Usage(format!("{what} must be a nonnegative rational `p/q`, got `{text}`")))
}

fn formula_sizes(m: &mut Manifest, prefix: &str, f: &CnfFormula) {
    m.size(&format!("{prefix}_variables"), f.n() as u64)
        .size(&format!("{prefix}_clauses"), f.m() as u64)
        .size(&format!("{prefix}_slots"), f.slot_count() as u64);
}

fn record_unsat(m: &mut Manifest, oracle: &Oracle, key: &str, f: &CnfFormula) {
    if let Ok(u) = oracle.unsat(f) {
        m.unsat.insert(key.into(), fmt_weight(u));
    }
}

fn parse_mode(text: &str, seed: u64) -> Result<Mode> {
    if text == "exhaustive" {
        return Ok(Mode::Exhaustive);
    }
    text.strip_prefix("sample:")
        .and_then(|n| n.parse().ok())
        .filter(|&n: &usize| n > 0)
        .map(|count| Mode::Sample { count, seed })
        .ok_or_else(|| CliError::Usage(format!("mode must be `exhaustive` or `sample:N`, got `{text}`")))
}

/// A universal factor graph file names what it is in its first comment, so
/// `embed` can rebuild the structure and refuse mismatched files.
enum Universal {
    Poly(PolyUniversal),
    Circuit(Box<CircuitTemplate>),
}

const UNIVERSAL_TAG: &str = "ufg-universal";

fn load_universal(path: &Path, m: &mut Manifest) -> Result<Universal> {
    let text = read_text(path)?;
    m.inputs.push(FileEntry { path: path.display().to_string(), bytes: text.len() as u64 });
    let tag = tagged_comment(&text, UNIVERSAL_TAG)
        .ok_or_else(|| CliError::Usage(format!("{} has no `c {UNIVERSAL_TAG}` line", path.display())))?;
    let num = |i: usize| -> Result<u64> {
        tag.get(i).and_then(|t| t.parse().ok()).ok_or_else(|| CliError::Usage(format!("malformed `c {UNIVERSAL_TAG}` line")))
    };
    let (u, fg) = match tag.first() {
        Some(&"poly") => {
            let u = build_poly_universal(num(1)? as u32)?;
            let fg = u.fg.clone();
            (Universal::Poly(u), fg)
        }
        Some(&"circuit") => {
            let t = circuit_to_3cnf(&build_consistency_circuit(num(1)? as u32, num(2)? as usize));
            let fg = t.fg.clone();
            (Universal::Circuit(Box::new(t)), fg)
        }
        _ => return Err(CliError::Usage(format!("unknown universal kind in {}", path.display()))),
    };
    if parse_fgraph(&text)? != fg {
        return Err(CliError::Usage(format!("{} does not match the structure its header names", path.display())));
    }
    Ok(u)
}

fn build_universal(a: &BuildUniversal, m: &mut Manifest) -> Result<()> {
    let kind = a.kind.unwrap_or(if a.m.is_some() { UniversalKind::Circuit } else { UniversalKind::Poly });
    m.param("n", a.n).param("m", a.m).param("kind", format!("{kind:?}").to_lowercase());
    let (header, fg) = match (kind, a.m) {
        (UniversalKind::Poly, None) => {
            let u = build_poly_universal(a.n)?;
            (format!("c {UNIVERSAL_TAG} poly {}\n", a.n), u.fg)
        }
        (UniversalKind::Circuit, Some(clauses)) => {
            let t = circuit_to_3cnf(&build_consistency_circuit(a.n, clauses));
            m.size("width", t.width() as u64).size("selector_variables", t.selector_vars.len() as u64);
            (format!("c {UNIVERSAL_TAG} circuit {} {clauses}\n", a.n), t.fg)
        }
        (UniversalKind::Poly, Some(_)) => return Err(CliError::Usage("-m only applies to --kind circuit".into())),
        (UniversalKind::Circuit, None) => return Err(CliError::Usage("--kind circuit needs -m".into())),
    };
    m.size("variables", fg.n as u64).size("clauses", fg.m() as u64).size("slots", fg.slot_count() as u64);
    write(&a.out, (header + &emit_fgraph(&fg)).as_bytes(), m)
}

fn polarities(u: &Universal, f: &CnfFormula) -> Result<(PolarityTemplate, FactorGraph)> {
    Ok(match u {
        Universal::Poly(u) => (embed_poly(u, f)?, u.fg.clone()),
        Universal::Circuit(t) => (t.polarities_for(f)?, t.fg.clone()),
    })
}

fn embed(a: &Embed, m: &mut Manifest) -> Result<()> {
    let u = load_universal(&a.universal, m)?;
    let f = read_formula(&a.formula, m)?;
    formula_sizes(m, "input", &f);
    let (t, fg) = polarities(&u, &f)?;
    m.size("slots", t.len() as u64);
    write(&a.out, emit_template(&t, &fg)?.as_bytes(), m)
}

fn instantiate(a: &Instantiate, m: &mut Manifest) -> Result<()> {
    let f = match (&a.source, &a.universal) {
        (Some(source), _) => {
            let u = load_universal(&a.template, m)?;
            let phi = read_formula(source, m)?;
            formula_sizes(m, "input", &phi);
            let (t, fg) = polarities(&u, &phi)?;
            fg.apply(&t)?
        }
        (None, Some(universal)) => {
            let g = read_text(universal)?;
            let t = read_text(&a.template)?;
            m.inputs.push(FileEntry { path: universal.display().to_string(), bytes: g.len() as u64 });
            m.inputs.push(FileEntry { path: a.template.display().to_string(), bytes: t.len() as u64 });
            parse_fgraph(&g)?.apply(&parse_template(&t)?)?
        }
        (None, None) => return Err(CliError::Usage("instantiate needs --universal or --source".into())),
    };
    formula_sizes(m, "output", &f);
    write(&a.out, emit_cnf(&f).as_bytes(), m)
}

fn run_sparsify(a: &Sparsify, m: &mut Manifest, oracle: &Oracle) -> Result<()> {
    let f = read_formula(formula_path(&a.formula, &a.input)?, m)?;
    let eps = rational(&a.epsilon, "epsilon")?;
    m.param("epsilon", &a.epsilon).param("theta1", a.theta1).param("theta2", a.theta2);
    let params = match (a.theta1, a.theta2) {
        (Some(t1), Some(t2)) => SparsifyParams::with_thresholds(eps, t1, t2),
        _ => SparsifyParams::new(eps),
    };
    let out = sparsify(&f, &params)?;
    formula_sizes(m, "input", &f);
    m.size("branches", out.branches.len() as u64).size("max_branch_clauses", out.max_clauses() as u64);
    m.detail("schedule", out.schedule).detail("branch_bound", out.branch_bound);
    record_unsat(m, oracle, "input", &f);
    for (i, b) in out.branches.iter().enumerate() {
        write(&a.out_dir.join(format!("branch-{i:04}.cnf")), emit_cnf(b).as_bytes(), m)?;
    }
    Ok(())
}

fn run_amplify(a: &Amplify, m: &mut Manifest, oracle: &Oracle) -> Result<()> {
    let f = read_formula(formula_path(&a.formula, &a.input)?, m)?;
    let params = FgprParams {
        t: a.t,
        expander_degree: a.degree,
        power_mode: parse_mode(&a.mode, a.seed)?,
        alphabet_mode: Mode::Sample { count: a.alphabet_samples, seed: a.seed },
        seed: a.seed,
        ..FgprParams::default()
    };
    m.param("rounds", a.rounds)
        .param("t", a.t)
        .param("degree", a.degree)
        .param("alphabet_samples", a.alphabet_samples)
        .param("delta", fmt_weight(params.delta))
        .param("xi", fmt_weight(params.xi))
        .param("d", params.d);
    m.seeds.insert("seed".into(), a.seed);
    m.mode = Some(a.mode.clone());
    let (out, stats) = amplify(&f, a.rounds, &params)?;
    formula_sizes(m, "input", &f);
    formula_sizes(m, "output", &out);
    record_unsat(m, oracle, "input", &f);
    record_unsat(m, oracle, "output", &out);
    m.detail("rounds", &stats);
    write(&a.out, emit_cnf(&out).as_bytes(), m)
}

fn parse_basis(text: &str) -> Result<Vec<(u32, bool)>> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|pair| {
            let bad = || CliError::Usage(format!("basis pairs look like `h:b`, got `{pair}`"));
            let (h, b) = pair.trim().split_once(':').ok_or_else(bad)?;
            let h = h.parse().map_err(|_| bad())?;
            let b = match b {
                "0" => false,
                "1" => true,
                _ => return Err(bad()),
            };
            Ok((h, b))
        })
        .collect()
}

fn fold(a: &Fold, m: &mut Manifest) -> Result<()> {
    let (word, stored_basis) = match (&a.input, a.long_code) {
        (Some(path), _) => {
            let bytes = read_bytes(path)?;
            m.inputs.push(FileEntry { path: path.display().to_string(), bytes: bytes.len() as u64 });
            read_blob(&bytes)?
        }
        (None, Some(x)) => {
            let n = a.n.unwrap_or(0);
            let w = encode_long_code(n, x)?;
            let space = w.space;
            (w, FoldingBasis::empty(space))
        }
        (None, None) => return Err(CliError::Usage("fold needs --input or --long-code".into())),
    };
    let space = word.space;
    let mut pairs = match &a.basis {
        Some(text) => parse_basis(text)?,
        None => stored_basis.pairs.clone(),
    };
    if a.over_true {
        pairs.insert(0, (space.one(), true));
    }
    if pairs.iter().any(|&(h, _)| h as usize >= space.size()) {
        return Err(CliError::Usage(format!("basis function out of range for n = {}", space.n())));
    }
    let basis = if pairs.is_empty() { FoldingBasis::empty(space) } else { FoldingBasis::new(space, pairs)? };
    m.param("n", space.n()).param("long_code", a.long_code).param("basis", &basis.pairs);
    let folded = basis.fold(&word);
    m.size("table_bits", folded.len() as u64).size("representatives", basis.representatives().len() as u64);
    write(&a.out, &write_blob(&folded, &basis.pairs), m)
}

#[derive(Serialize)]
struct LongCodeReport {
    n: u32,
    basis: Vec<(u32, bool)>,
    nearest_long_code: u32,
    nearest_long_code_distance: String,
    close_long_codes: usize,
    closeness_radius: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    linearity_failure: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    nearest_affine_distance: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    delta_bound: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bound_holds: Option<bool>,
}

fn long_code_report(word: &LongCodeWord, basis: &FoldingBasis, delta: Weight) -> Result<LongCodeReport> {
    let space: FunctionSpace = word.space;
    let codes = (0..space.points()).map(|x| encode_long_code(space.n(), x)).collect::<ufg_core::Result<Vec<_>>>()?;
    let (nearest, dist) = nearest_in_code(word, &codes)?;
    let radius = Weight::new(1, 2) - delta;
    let mut report = LongCodeReport {
        n: space.n(),
        basis: basis.pairs.clone(),
        nearest_long_code: nearest as u32,
        nearest_long_code_distance: fmt_weight(dist),
        close_long_codes: count_close_long_codes(word, radius)?,
        closeness_radius: fmt_weight(radius),
        linearity_failure: None,
        nearest_affine_distance: None,
        delta_bound: None,
        bound_holds: None,
    };
    if space.n() <= 3 {
        let fail = linearity_failure(word)?;
        let (_, x) = nearest_in_code(word, &folded_affine_codewords(space))?;
        let bound = delta_lower_bound(x)?;
        report.linearity_failure = Some(fmt_weight(fail));
        report.nearest_affine_distance = Some(fmt_weight(x));
        report.delta_bound = Some(fmt_weight(bound));
        report.bound_holds = Some(fail >= bound);
    }
    Ok(report)
}

fn verify_longcode(a: &VerifyLongcode, m: &mut Manifest) -> Result<()> {
    let bytes = read_bytes(&a.input)?;
    m.inputs.push(FileEntry { path: a.input.display().to_string(), bytes: bytes.len() as u64 });
    let (word, basis) = read_blob(&bytes)?;
    let delta = rational(&a.delta, "delta")?;
    m.param("delta", &a.delta);
    let report = long_code_report(&word, &basis, delta)?;
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    m.size("table_bits", word.len() as u64);
    write(&a.out, text.as_bytes(), m)
}

fn build_verifier(a: &BuildVerifier, m: &mut Manifest) -> Result<()> {
    let text = read_text(&a.hyper)?;
    m.inputs.push(FileEntry { path: a.hyper.display().to_string(), bytes: text.len() as u64 });
    let h = parse_hypergraph(&text)?;
    let params = VerifierParams { tests_per_unit: a.tests_per_unit, seed: a.seed, ..VerifierParams::default() };
    m.param("tests_per_unit", a.tests_per_unit).param("mix", [params.mix.linearity, params.mix.product, params.mix.consistency]);
    m.seeds.insert("seed".into(), a.seed);
    let v = build_verifier_formula(&h, &params)?;
    m.size("input_vertices", h.vertex_count as u64).size("input_edges", h.edge_count() as u64);
    m.size("exhaustive_queries", v.exhaustive_queries as u64)
        .size("sampled_queries", v.sampled_queries as u64)
        .size("placeholder_queries", v.placeholder_queries as u64);
    formula_sizes(m, "output", &v.formula);
    write(&a.out, emit_cnf(&v.formula).as_bytes(), m)
}

fn run_eksat(a: &Eksat, m: &mut Manifest, oracle: &Oracle) -> Result<()> {
    let f = read_formula(formula_path(&a.formula, &a.input)?, m)?;
    let params = EkSatParams {
        k: a.k,
        gamma: rational(&a.gamma, "gamma")?,
        epsilon: a.epsilon.as_deref().map(|e| rational(e, "epsilon")).transpose()?,
    };
    m.param("k", a.k).param("gamma", &a.gamma).param("epsilon", &a.epsilon).param("unweight", a.unweight);
    let e = eksat_reduce(&f, &params)?;
    formula_sizes(m, "input", &f);
    m.detail("total_weight", fmt_weight(e.formula.total_weight()));
    let out = if a.unweight {
        let u = unweight(&e)?;
        m.detail("gamma_used", fmt_weight(u.gamma_used)).size("copies", u.copies);
        u.formula
    } else {
        e.formula
    };
    formula_sizes(m, "output", &out);
    record_unsat(m, oracle, "input", &f);
    record_unsat(m, oracle, "output", &out);
    write(&a.out, emit_cnf(&out).as_bytes(), m)
}

fn reduce(a: &Reduce, m: &mut Manifest, oracle: &Oracle) -> Result<()> {
    let mut f = read_formula(formula_path(&a.formula, &a.input)?, m)?;
    m.param("chain", &a.chain);
    formula_sizes(m, "input", &f);
    record_unsat(m, oracle, "input", &f);
    for (i, name) in a.chain.split(',').map(str::trim).enumerate() {
        if i == 0 && (name == "3sat" || name == "sat") {
            continue;
        }
        let step = ChainStep::parse(name).ok_or_else(|| CliError::Usage(format!("unknown chain step `{name}`")))?;
        f = step.apply(&f)?;
        formula_sizes(m, step.as_str(), &f);
        record_unsat(m, oracle, step.as_str(), &f);
    }
    write(&a.out, emit_cnf(&f).as_bytes(), m)
}

fn unsat(a: &Unsat, m: &mut Manifest, oracle: &Oracle) -> Result<String> {
    m.param("oracle_cap", oracle.cap);
    let value = match (&a.formula, &a.hyper) {
        (Some(path), _) => {
            let f = read_formula(path, m)?;
            formula_sizes(m, "input", &f);
            oracle.unsat(&f)?
        }
        (None, Some(path)) => {
            let text = read_text(path)?;
            m.inputs.push(FileEntry { path: path.display().to_string(), bytes: text.len() as u64 });
            let h = parse_hypergraph(&text)?;
            m.size("input_vertices", h.vertex_count as u64).size("input_edges", h.edge_count() as u64);
            oracle.unsat(&h)?
        }
        (None, None) => return Err(CliError::Usage("unsat needs --formula or --hyper".into())),
    };
    m.unsat.insert("input".into(), fmt_weight(value));
    if let Some(out) = &a.out {
        write(out, format!("{{\n  \"unsat\": \"{}\"\n}}\n", fmt_weight(value)).as_bytes(), m)?;
    }
    Ok(fmt_weight(value))
}

fn suite(a: &Suite, m: &mut Manifest, oracle: &Oracle, quiet: bool) -> Result<bool> {
    if a.list {
        for p in registry() {
            println!("{:<20} {}{}", p.name, p.about, if p.control { " (control, expected to fail)" } else { "" });
        }
        return Ok(true);
    }
    let passes = if a.pass == "all" {
        registry().into_iter().filter(|p| !p.control).collect()
    } else {
        vec![find(&a.pass).ok_or_else(|| CliError::Usage(format!("no pass named `{}`", a.pass)))?]
    };
    m.param("pass", &a.pass).param("trials", a.trials).param("oracle_cap", oracle.cap);
    m.seeds.insert("seed".into(), a.seed);
    let mut reports = Vec::new();
    for p in &passes {
        let r = run_fgpr_suite(p, a.trials, a.seed, oracle);
        if !quiet {
            println!(
                "{} {} ({} trials, completeness checked on {})",
                if r.passed { "PASS" } else { "FAIL" },
                r.pass,
                r.trials,
                r.completeness_checked
            );
            for f in &r.failures {
                println!("  {f}");
            }
        }
        reports.push(r);
    }
    let passed = reports.iter().all(|r| r.passed);
    m.detail("passed", passed);
    if let Some(out) = &a.out {
        let mut text = serde_json::to_string_pretty(&reports)?;
        text.push('\n');
        write(out, text.as_bytes(), m)?;
    }
    Ok(passed)
}

fn default_manifest_path(cmd: &Command) -> Option<PathBuf> {
    let with_suffix = |p: &Path| {
        let mut s = p.as_os_str().to_owned();
        s.push(".manifest.json");
        PathBuf::from(s)
    };
    match cmd {
        Command::BuildUniversal(a) => Some(with_suffix(&a.out)),
        Command::Embed(a) => Some(with_suffix(&a.out)),
        Command::Instantiate(a) => Some(with_suffix(&a.out)),
        Command::Sparsify(a) => Some(a.out_dir.join("manifest.json")),
        Command::Amplify(a) => Some(with_suffix(&a.out)),
        Command::Fold(a) => Some(with_suffix(&a.out)),
        Command::VerifyLongcode(a) => Some(with_suffix(&a.out)),
        Command::BuildVerifier(a) => Some(with_suffix(&a.out)),
        Command::Eksat(a) => Some(with_suffix(&a.out)),
        Command::Reduce(a) => Some(with_suffix(&a.out)),
        Command::Unsat(a) => a.out.as_deref().map(with_suffix),
        Command::Suite(a) => a.out.as_deref().map(with_suffix),
    }
}

fn name(cmd: &Command) -> &'static str {
    match cmd {
        Command::BuildUniversal(_) => "build-universal",
        Command::Embed(_) => "embed",
        Command::Instantiate(_) => "instantiate",
        Command::Sparsify(_) => "sparsify",
        Command::Amplify(_) => "amplify",
        Command::Fold(_) => "fold",
        Command::VerifyLongcode(_) => "verify-longcode",
        Command::BuildVerifier(_) => "build-verifier",
        Command::Eksat(_) => "eksat",
        Command::Reduce(_) => "reduce",
        Command::Unsat(_) => "unsat",
        Command::Suite(_) => "suite",
    }
}

/// Runs one command; returns the process exit code.
pub fn run(cli: &Cli) -> Result<i32> {
    let start = Instant::now();
    let oracle = oracle_from_env()?;
    let mut m = Manifest::new(name(&cli.command));
    let mut code = 0;
    match &cli.command {
        Command::BuildUniversal(a) => build_universal(a, &mut m)?,
        Command::Embed(a) => embed(a, &mut m)?,
        Command::Instantiate(a) => instantiate(a, &mut m)?,
        Command::Sparsify(a) => run_sparsify(a, &mut m, &oracle)?,
        Command::Amplify(a) => run_amplify(a, &mut m, &oracle)?,
        Command::Fold(a) => fold(a, &mut m)?,
        Command::VerifyLongcode(a) => verify_longcode(a, &mut m)?,
        Command::BuildVerifier(a) => build_verifier(a, &mut m)?,
        Command::Eksat(a) => run_eksat(a, &mut m, &oracle)?,
        Command::Reduce(a) => reduce(a, &mut m, &oracle)?,
        Command::Unsat(a) => {
            let value = unsat(a, &mut m, &oracle)?;
            if !cli.quiet {
                println!("{value}");
            }
        }
        Command::Suite(a) => {
            if a.list {
                suite(a, &mut m, &oracle, cli.quiet)?;
                return Ok(0);
            }
            if !suite(a, &mut m, &oracle, cli.quiet)? {
                code = 1;
            }
        }
    }
    if cli.timing {
        m.wall_time_ms = Some(start.elapsed().as_millis() as u64);
    }
    if let Some(path) = cli.manifest.clone().or_else(|| default_manifest_path(&cli.command)) {
        let text = m.to_json();
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.display().to_string(), source })?;
        }
        std::fs::write(&path, text).map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
    }
    Ok(code)
}
