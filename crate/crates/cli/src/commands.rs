//! The sweeps behind each subcommand. Every command builds its grid in
//! canonical order, evaluates cells on the worker pool and keeps that order.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use qbeurling::beurling::{cb_norm_estimate, classify_boundedness, Trend};
use qbeurling::corep::{rep_norm, verify_fusion};
use qbeurling::freeqg::{
    ofplus_char_check, ofplus_in_spec, snplus_char_check, suq2_char_in_spec, ufplus_char_check, ufplus_in_spec,
};
use qbeurling::linalg::{self, inverse, op_norm};
use qbeurling::qgmatrix::{
    anq_bot, check_anq, check_doubly_commute, check_slq2c, check_suq2, decompose_anq, iwasawa_compose, make_as,
};
use qbeurling::{CMat, Complex64, FMatrix, HalfInt, QParam, RelationReport, TwoByTwoOp, Weight};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::SweepConfig;
use crate::output::{Cell, Table};

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config or input files: exit code 2.
    Usage(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => f.write_str(msg),
        }
    }
}

/// A finished sweep. Any entry in `failures` turns into exit code 1.
#[derive(Debug)]
pub struct Report {
    pub table: Table,
    pub meta: Vec<(&'static str, String)>,
    pub summary: String,
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Group {
    Ofplus,
    Ufplus,
    Snplus,
    Suq2,
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Group::Ofplus => "ofplus",
            Group::Ufplus => "ufplus",
            Group::Snplus => "snplus",
            Group::Suq2 => "suq2",
        })
    }
}

fn run_pool<T: Sync, R: Send>(jobs: usize, tasks: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
        Ok(pool) => pool.install(|| tasks.par_iter().map(&f).collect()),
        Err(_) => tasks.iter().map(f).collect(),
    }
}

fn qf(q: QParam) -> Cell {
    q.value().into()
}

fn half(s: HalfInt) -> Cell {
    s.to_string().into()
}

// ---------------------------------------------------------------- relations

#[derive(Clone)]
enum RelationCase {
    As { q: QParam, s: HalfInt, corrupt: bool },
    Iwasawa { q: QParam, s: HalfInt, theta: f64 },
}

const IWASAWA_ANGLES: [f64; 3] = [0.0, 1.1, -2.3];

fn relation_row(family: String, q: QParam, s: HalfInt, report: &RelationReport) -> Vec<Cell> {
    let worst = report.worst().map(|(l, _)| l.to_string()).unwrap_or_default();
    vec![
        family.into(),
        qf(q),
        half(s),
        report.kind.into(),
        report.normalized_residual.into(),
        worst.into(),
        report.passed.into(),
    ]
}

fn relation_failure(family: &str, q: QParam, s: HalfInt, report: &RelationReport) -> String {
    let worst = report.worst().map(|(l, r)| format!("{l} (residual {r:.3e})")).unwrap_or_default();
    format!(
        "{} relation failure for {family} at q={q}, s={s}: {worst}, normalized residual {:.3e} > {:.1e}",
        report.kind, report.normalized_residual, report.tol
    )
}

fn corrupted(m: &TwoByTwoOp) -> TwoByTwoOp {
    let mut out = m.clone();
    out.a[(0, 0)] *= Complex64::new(1.01, 0.0);
    out
}

fn doubly_commute_residual(x: &CMat, y: &CMat) -> f64 {
    let ys = y.adjoint();
    op_norm(&(x * y - y * x)).max(op_norm(&(x * &ys - &ys * x)))
}

type Rows = Vec<(Vec<Cell>, Option<String>)>;

fn push_report(rows: &mut Rows, family: String, q: QParam, s: HalfInt, report: RelationReport) {
    let failure = (!report.passed).then(|| relation_failure(&family, q, s, &report));
    rows.push((relation_row(family, q, s, &report), failure));
}

fn relation_cell(case: &RelationCase, tol: f64) -> Rows {
    let mut rows = Rows::new();
    match *case {
        RelationCase::As { q, s, corrupt } => {
            let base = make_as(q, s);
            let m = if corrupt { corrupted(&base) } else { base };
            let family = if corrupt { "A_s (corrupted)" } else { "A_s" };
            match check_anq(&m, q, tol) {
                Ok(report) => push_report(&mut rows, family.into(), q, s, report),
                Err(e) => {
                    let row = vec![family.into(), qf(q), half(s), "AN_q".into(), f64::NAN.into(), e.to_string().into(), false.into()];
                    rows.push((row, Some(format!("AN_q check failed for {family} at q={q}, s={s}: {e}"))));
                }
            }
            push_report(&mut rows, family.into(), q, s, check_slq2c(&m, q, tol));
        }
        RelationCase::Iwasawa { q, s, theta } => {
            let ac = TwoByTwoOp::character(Complex64::from_polar(1.0, theta)).expect("unit modulus");
            if s.twice() == 0 {
                let label = format!("character(theta={theta})");
                push_report(&mut rows, label, q, s, check_suq2(&ac, q, tol));
            }
            let family = format!("iwasawa(theta={theta})");
            match iwasawa_compose(&ac, &make_as(q, s), q, tol) {
                Ok(p) => {
                    push_report(&mut rows, family.clone(), q, s, check_slq2c(&p.product, q, tol));
                    let mut worst: f64 = 0.0;
                    let mut ok = true;
                    for x in p.compact.entries() {
                        for y in p.solvable.entries() {
                            ok &= check_doubly_commute(x, y, tol);
                            worst = worst.max(doubly_commute_residual(x, y));
                        }
                    }
                    let row = vec![
                        family.clone().into(),
                        qf(q),
                        half(s),
                        "doubly-commute".into(),
                        worst.into(),
                        "".into(),
                        ok.into(),
                    ];
                    let failure = (!ok).then(|| format!("factors of {family} at q={q}, s={s} do not doubly commute ({worst:.3e})"));
                    rows.push((row, failure));
                }
                Err(e) => {
                    let row = vec![family.clone().into(), qf(q), half(s), "SL_q(2,C)".into(), f64::NAN.into(), e.to_string().into(), false.into()];
                    rows.push((row, Some(format!("Iwasawa composition failed for {family} at q={q}, s={s}: {e}"))));
                }
            }
        }
    }
    rows
}

pub fn check_relations(cfg: &SweepConfig, corrupt: bool) -> Result<Report, CliError> {
    let mut cases = Vec::new();
    for (qi, &q) in cfg.q.iter().enumerate() {
        for s in HalfInt::up_to(cfg.s_max) {
            cases.push(RelationCase::As { q, s, corrupt: corrupt && qi == 0 && s.twice() == 0 });
        }
        for s in HalfInt::up_to(cfg.s_max) {
            for theta in IWASAWA_ANGLES {
                cases.push(RelationCase::Iwasawa { q, s, theta });
            }
        }
    }
    let results = run_pool(cfg.jobs, &cases, |c| relation_cell(c, cfg.tol));
    let mut table = Table::new(vec!["family", "q", "s", "relations", "normalized_residual", "worst_relation", "passed"]);
    let mut failures = Vec::new();
    for (row, failure) in results.into_iter().flatten() {
        table.push(row);
        failures.extend(failure);
    }
    let summary = format!("{} relation families checked, {} failed", table.rows.len(), failures.len());
    Ok(Report { table, meta: Vec::new(), summary, failures })
}

// --------------------------------------------------------------- norm table

/// Slack on the sandwich comparison, relative to `max(1, norm)`.
const SANDWICH_SLACK: f64 = 1e-9;

pub fn norm_table(cfg: &SweepConfig) -> Result<Report, CliError> {
    let half_s = HalfInt::from_twice(1);
    let ts: Vec<HalfInt> = HalfInt::up_to(cfg.t_max).collect();
    let mut cells = Vec::new();
    for &q in &cfg.q {
        for s in HalfInt::up_to(cfg.s_max) {
            for &t in &ts {
                cells.push((q, s, t));
            }
        }
    }
    let fundamental: Vec<(QParam, HalfInt)> = cfg.q.iter().flat_map(|&q| ts.iter().map(move |&t| (q, t))).collect();
    let upper_base = run_pool(cfg.jobs, &fundamental, |&(q, t)| rep_norm(&make_as(q, half_s), q, t));
    let norms = run_pool(cfg.jobs, &cells, |&(q, s, t)| rep_norm(&make_as(q, s), q, t));

    let mut table = Table::new(vec![
        "q",
        "s",
        "t",
        "norm",
        "lower_bound",
        "upper_proxy",
        "ratio_upper",
        "weighted_norm",
        "sandwich_ok",
    ]);
    let mut failures = Vec::new();
    for (i, (&(q, s, t), norm)) in cells.iter().zip(norms).enumerate() {
        let qi = i / (cells.len() / cfg.q.len());
        let ti = ts.iter().position(|&x| x == t).expect("t from grid");
        let (norm, base) = match (norm, upper_base[qi * ts.len() + ti].as_ref()) {
            (Ok(n), Ok(b)) => (n, *b),
            (Err(e), _) => {
                failures.push(format!("rep_norm failed at q={q}, s={s}, t={t}: {e}"));
                continue;
            }
            (_, Err(e)) => {
                failures.push(format!("rep_norm failed at q={q}, s={s}, t={t}: {e}"));
                continue;
            }
        };
        let lower = q.abs().powf(-2.0 * s.value() * t.value());
        let upper = base.powi(s.twice() as i32);
        let slack = SANDWICH_SLACK * norm.max(1.0);
        let ok = lower - slack <= norm && norm <= upper + slack;
        if !ok {
            failures.push(format!("sandwich violated at q={q}, s={s}, t={t}: {lower:.6e} <= {norm:.6e} <= {upper:.6e}"));
        }
        let weighted = cfg.weight.value(t).map(|w| norm / w).unwrap_or(f64::NAN);
        table.push(vec![qf(q), half(s), half(t), norm.into(), lower.into(), upper.into(), (norm / upper).into(), weighted.into(), ok.into()]);
    }
    let summary = format!("{} norm rows, {} sandwich violations", table.rows.len(), failures.len());
    Ok(Report { table, meta: vec![("weight_column", cfg.weight.to_string())], summary, failures })
}

// ------------------------------------------------------------- boundedness

/// Rows with `|β − |q|^{-s}| ≤ 1e-3 |q|^{-s}` are reported but not scored.
const THRESHOLD_BAND: f64 = 1e-3;

fn beta_grid(cfg: &SweepConfig, threshold: f64) -> Vec<f64> {
    if !cfg.beta.is_empty() {
        return cfg.beta.clone();
    }
    [0.25, 0.5, 1.0, 2.0, 4.0].iter().map(|f| f * threshold).filter(|b| *b >= 1.0).collect()
}

pub fn boundedness(cfg: &SweepConfig) -> Result<Report, CliError> {
    let mut cells = Vec::new();
    for &q in &cfg.q {
        for s in HalfInt::up_to(cfg.s_max) {
            let threshold = q.abs().powf(-s.value());
            for beta in beta_grid(cfg, threshold) {
                cells.push((q, s, beta, threshold));
            }
        }
    }
    let results = run_pool(cfg.jobs, &cells, |&(q, s, beta, _)| {
        let closed = classify_boundedness(q, s, beta)?;
        let w = Weight::exponential(beta)?;
        let est = cb_norm_estimate(&make_as(q, s), q, &w, cfg.t_max)?;
        Ok::<_, qbeurling::Error>((closed, est))
    });
    let mut table = Table::new(vec![
        "q",
        "s",
        "beta",
        "threshold",
        "closed_form",
        "numeric_trend",
        "sup_ratio",
        "argmax_t",
        "agree",
    ]);
    let mut failures = Vec::new();
    let (mut agreed, mut inconclusive) = (0, 0);
    for (&(q, s, beta, threshold), result) in cells.iter().zip(results) {
        let (bounded, est) = match result {
            Ok(r) => r,
            Err(e) => {
                failures.push(format!("boundedness cell q={q}, s={s}, beta={beta} failed: {e}"));
                continue;
            }
        };
        let matches = bounded == (est.trend == Trend::Saturating);
        let agree = if (beta - threshold).abs() <= THRESHOLD_BAND * threshold {
            inconclusive += 1;
            "inconclusive"
        } else if matches {
            agreed += 1;
            "yes"
        } else {
            failures.push(format!(
                "q={q}, s={s}, beta={beta}: closed form says {} but the estimate is {}",
                if bounded { "bounded" } else { "unbounded" },
                est.trend
            ));
            "no"
        };
        table.push(vec![
            qf(q),
            half(s),
            beta.into(),
            threshold.into(),
            (if bounded { "bounded" } else { "unbounded" }).into(),
            est.trend.to_string().into(),
            est.sup.into(),
            half(est.argmax),
            agree.into(),
        ]);
    }
    let summary = format!(
        "{} cells: {agreed} agree, {inconclusive} inconclusive, {} disagree",
        table.rows.len(),
        failures.len()
    );
    Ok(Report { table, meta: Vec::new(), summary, failures })
}

// ------------------------------------------------------- character spectra

#[derive(Debug, Clone)]
enum Candidate {
    Matrix { label: String, v: CMat, f: Option<CMat> },
    Scalar { label: String, rho: Complex64 },
}

fn parse_complex(s: &str) -> Result<Complex64, String> {
    let s = s.trim();
    let z = Complex64::from_str(s).map_err(|_| format!("{s:?} is not a complex number"))?;
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(format!("{s:?} is not finite"))
    }
}

/// Rows separated by `;`, entries by `,`: `"1, 0; 0, 2+1i"`.
fn parse_matrix(s: &str) -> Result<CMat, String> {
    let rows: Vec<Vec<Complex64>> = s
        .split(';')
        .map(|row| row.split(',').map(parse_complex).collect::<Result<Vec<_>, _>>())
        .collect::<Result<_, _>>()?;
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(format!("{s:?} is not a square matrix"));
    }
    Ok(CMat::from_fn(n, n, |i, j| rows[i][j]))
}

fn read_candidates(group: Group, path: &Path) -> Result<Vec<Candidate>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read input {}: {e}", path.display())))?;
    let mut f: Option<CMat> = None;
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let at = |e: String| CliError::Usage(format!("{}:{}: {e}", path.display(), lineno + 1));
        let label = format!("line {}", lineno + 1);
        if let Some(rest) = line.strip_prefix("F").map(str::trim_start).and_then(|r| r.strip_prefix('=')) {
            if !matches!(group, Group::Ofplus | Group::Ufplus) {
                return Err(at(format!("an F line only applies to ofplus and ufplus, not {group}")));
            }
            f = Some(parse_matrix(rest).map_err(at)?);
            continue;
        }
        out.push(match group {
            Group::Suq2 => {
                let rho = parse_complex(line).map_err(at)?;
                if rho == linalg::ZERO {
                    return Err(at("rho must be non-zero".into()));
                }
                Candidate::Scalar { label, rho }
            }
            _ => Candidate::Matrix { label, v: parse_matrix(line).map_err(at)?, f: f.clone() },
        });
    }
    if out.is_empty() {
        return Err(CliError::Usage(format!("{} contains no candidates", path.display())));
    }
    Ok(out)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..n {
            let mut next = p.clone();
            next.insert(pos, n - 1);
            out.push(next);
        }
    }
    out.sort();
    out
}

fn perm_matrix(p: &[usize]) -> CMat {
    CMat::from_fn(p.len(), p.len(), |i, j| if p[i] == j { linalg::ONE } else { linalg::ZERO })
}

fn perm_label(p: &[usize]) -> String {
    p.iter().map(usize::to_string).collect::<Vec<_>>().join("")
}

fn hyperbolic(theta: f64) -> CMat {
    let (ch, sh) = (theta.cosh(), theta.sinh());
    CMat::from_row_slice(2, 2, &[Complex64::new(ch, 0.0), Complex64::new(0.0, sh), Complex64::new(0.0, -sh), Complex64::new(ch, 0.0)])
}

/// `F = diag(1, 2)` for the `U_F^+` sampler, so that characters are the
/// invertible diagonal `V`.
fn ufplus_sample_f() -> CMat {
    linalg::real_diag(&[1.0, 2.0])
}

fn sample_candidates(group: Group, samples: usize, seed: u64) -> Vec<Candidate> {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    match group {
        Group::Snplus => {
            let perms = permutations(4);
            for p in &perms {
                out.push(Candidate::Matrix { label: format!("perm {}", perm_label(p)), v: perm_matrix(p), f: None });
            }
            for _ in 0..samples {
                let p = &perms[r.random_range(0..perms.len())];
                let mut v = perm_matrix(p);
                let (i, j) = (r.random_range(0..4), r.random_range(0..4));
                let size = 10f64.powf(r.random_range(-6.0..-0.3));
                v[(i, j)] += Complex64::from_polar(size, r.random_range(0.0..2.0 * PI));
                out.push(Candidate::Matrix {
                    label: format!("perm {} + {size:.3e} at ({i},{j})", perm_label(p)),
                    v,
                    f: None,
                });
            }
        }
        Group::Ofplus => {
            out.push(Candidate::Matrix { label: "theta=0".into(), v: linalg::identity(2), f: None });
            for _ in 0..samples {
                let theta: f64 = r.random_range(-2.0..2.0);
                out.push(Candidate::Matrix { label: format!("theta={theta:.6}"), v: hyperbolic(theta), f: None });
            }
        }
        Group::Ufplus => {
            for k in 0..samples {
                let entries: Vec<Complex64> =
                    (0..2).map(|_| Complex64::from_polar(10f64.powf(r.random_range(-0.7..0.7)), r.random_range(0.0..2.0 * PI))).collect();
                let mut v = CMat::from_diagonal(&qbeurling::nalgebra::DVector::from_vec(entries.clone()));
                // every fifth candidate gets an off-diagonal entry, which breaks V G = G V
                let label = if k % 5 == 4 {
                    v[(0, 1)] = Complex64::new(0.25, 0.0);
                    format!("diag({:.4}, {:.4}) + offdiag", entries[0], entries[1])
                } else {
                    format!("diag({:.4}, {:.4})", entries[0], entries[1])
                };
                out.push(Candidate::Matrix { label, v, f: Some(ufplus_sample_f()) });
            }
        }
        Group::Suq2 => {
            for _ in 0..samples {
                let radius = 10f64.powf(r.random_range(-0.7..0.7));
                let rho = Complex64::from_polar(radius, r.random_range(0.0..2.0 * PI));
                out.push(Candidate::Scalar { label: format!("rho={rho:.6}"), rho });
            }
        }
    }
    out
}

const SPEC_T_MAX: HalfInt = HalfInt::from_twice(16);

fn judge(group: Group, cand: &Candidate, beta: f64, q: QParam, tol: f64) -> Result<Vec<Cell>, String> {
    let err = |e: qbeurling::Error| e.to_string();
    match (group, cand) {
        (Group::Snplus, Candidate::Matrix { v, .. }) => {
            let ok = snplus_char_check(v, tol.max(1e-12));
            Ok(vec![op_norm(v).into(), ok.into()])
        }
        (Group::Ofplus, Candidate::Matrix { v, f, .. }) => {
            let f = FMatrix::orthogonal(f.clone().unwrap_or_else(|| linalg::identity(v.nrows())), 1e-10).map_err(err)?;
            let char_ok = ofplus_char_check(v, &f, tol).map_err(err)?;
            let inside = ofplus_in_spec(v, &f, beta, tol).map_err(err)?;
            Ok(vec![op_norm(v).into(), char_ok.into(), inside.into()])
        }
        (Group::Ufplus, Candidate::Matrix { v, f, .. }) => {
            let f = FMatrix::unitary(f.clone().unwrap_or_else(|| linalg::identity(v.nrows()))).map_err(err)?;
            let char_ok = ufplus_char_check(v, &f, tol).map_err(err)?;
            let norm_inv = inverse(v).map(|w| op_norm(&w)).unwrap_or(f64::INFINITY);
            let inside = ufplus_in_spec(v, &f, beta, tol).map_err(err)?;
            Ok(vec![op_norm(v).into(), norm_inv.into(), char_ok.into(), inside.into()])
        }
        (Group::Suq2, Candidate::Scalar { rho, .. }) => {
            let inside = suq2_char_in_spec(*rho, beta).map_err(err)?;
            let est = cb_norm_estimate(&TwoByTwoOp::character(*rho).map_err(err)?, q, &Weight::exponential(beta).map_err(err)?, SPEC_T_MAX)
                .map_err(err)?;
            let agree = inside == (est.trend == Trend::Saturating);
            Ok(vec![rho.norm().into(), inside.into(), est.trend.to_string().into(), agree.into()])
        }
        _ => Err("candidate kind does not match the group".into()),
    }
}

pub fn char_spec(cfg: &SweepConfig, group: Group, input: Option<&Path>, samples: usize) -> Result<Report, CliError> {
    let candidates = match input {
        Some(path) => read_candidates(group, path)?,
        None => sample_candidates(group, samples, cfg.seed),
    };
    let betas = if cfg.beta.is_empty() { vec![2.0] } else { cfg.beta.clone() };
    if group == Group::Snplus {
        if let Some(Candidate::Matrix { label, .. }) =
            candidates.iter().find(|c| matches!(c, Candidate::Matrix { v, .. } if v.nrows() == 0))
        {
            return Err(CliError::Usage(format!("{label}: empty matrix")));
        }
    }
    let cells: Vec<(usize, f64)> = (0..candidates.len()).flat_map(|i| betas.iter().map(move |&b| (i, b))).collect();
    let q = cfg.q[0];
    let results = run_pool(cfg.jobs, &cells, |&(i, b)| judge(group, &candidates[i], b, q, cfg.tol));

    let mut columns = vec!["index", "candidate", "beta"];
    columns.extend_from_slice(match group {
        Group::Snplus => &["norm", "accepted"][..],
        Group::Ofplus => &["norm", "char_ok", "accepted"][..],
        Group::Ufplus => &["norm", "norm_inverse", "char_ok", "accepted"][..],
        Group::Suq2 => &["abs_rho", "accepted", "numeric_trend", "agree"][..],
    });
    let accepted_col = columns.iter().position(|c| *c == "accepted").expect("every group has a verdict");
    let mut table = Table::new(columns);
    let mut failures = Vec::new();
    let mut accepted = 0;
    for (&(i, beta), result) in cells.iter().zip(results) {
        let label = match &candidates[i] {
            Candidate::Matrix { label, .. } | Candidate::Scalar { label, .. } => label.clone(),
        };
        match result {
            Ok(values) => {
                let mut row: Vec<Cell> = vec![i.into(), label.clone().into(), beta.into()];
                row.extend(values);
                if row[accepted_col] == Cell::Bool(true) {
                    accepted += 1;
                }
                if group == Group::Suq2 && row.last() == Some(&Cell::Bool(false)) {
                    failures.push(format!("{label}, beta={beta}: annulus verdict disagrees with the cb-norm trend"));
                }
                table.push(row);
            }
            Err(e) => failures.push(format!("{label}, beta={beta}: {e}")),
        }
    }
    let summary = format!("{group}: {accepted} of {} candidate verdicts accepted", table.rows.len());
    let mut meta = vec![("group", group.to_string())];
    meta.push(("source", input.map(|p| p.display().to_string()).unwrap_or_else(|| format!("sampler:{samples}"))));
    Ok(Report { table, meta, summary, failures })
}

// ------------------------------------------------------------------ fusion

#[derive(Clone)]
enum FusionCase {
    Rep { q: QParam, label: String, m: TwoByTwoOp, t1: HalfInt, t2: HalfInt },
    Decompose { q: QParam, s: HalfInt },
}

fn fusion_families(q: QParam) -> Vec<(String, TwoByTwoOp)> {
    let chars = [
        ("character(rho=exp(i pi/3))", Complex64::from_polar(1.0, PI / 3.0)),
        ("character(rho=2)", Complex64::new(2.0, 0.0)),
        ("character(rho=3exp(-i))", Complex64::from_polar(3.0, -1.0)),
    ];
    let mut out: Vec<(String, TwoByTwoOp)> =
        chars.iter().map(|(l, rho)| (l.to_string(), TwoByTwoOp::character(*rho).expect("non-zero"))).collect();
    out.push(("A_1/2".into(), make_as(q, HalfInt::from_twice(1))));
    out.push(("A_1".into(), make_as(q, HalfInt::from_twice(2))));
    out
}

fn format_blocks(blocks: &[(HalfInt, usize)]) -> String {
    blocks.iter().map(|(s, m)| format!("{s}x{m}")).collect::<Vec<_>>().join(" ")
}

pub fn fusion_verify(cfg: &SweepConfig) -> Result<Report, CliError> {
    let mut cases = Vec::new();
    for &q in &cfg.q {
        for (label, m) in fusion_families(q) {
            for t1 in HalfInt::up_to(cfg.fusion_t_max) {
                for t2 in HalfInt::up_to(cfg.fusion_t_max) {
                    cases.push(FusionCase::Rep { q, label: label.clone(), m: m.clone(), t1, t2 });
                }
            }
        }
        for s in HalfInt::up_to(cfg.s_max).skip(1) {
            cases.push(FusionCase::Decompose { q, s });
        }
    }
    let tol = cfg.fusion_tol;
    let results = run_pool(cfg.jobs, &cases, |case| -> Result<(String, f64), String> {
        match case {
            FusionCase::Rep { q, m, t1, t2, .. } => {
                let rep = verify_fusion(m, *q, *t1, *t2, tol).map_err(|e| e.to_string())?;
                let comps = rep.components.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" ");
                Ok((comps, rep.residual))
            }
            FusionCase::Decompose { q, s } => {
                let prod = anq_bot(&make_as(*q, HalfInt::from_twice(1)), &make_as(*q, *s), *q, tol).map_err(|e| e.to_string())?;
                let dec = decompose_anq(&prod, *q, tol).map_err(|e| e.to_string())?;
                Ok((format_blocks(&dec.blocks), dec.residual))
            }
        }
    });

    let mut table = Table::new(vec!["q", "check", "family", "t1", "t2", "components", "residual", "passed"]);
    let mut failures = Vec::new();
    let mut max_residual: f64 = 0.0;
    for (case, result) in cases.iter().zip(results) {
        let (q, check, family, t1, t2) = match case {
            FusionCase::Rep { q, label, t1, t2, .. } => (*q, "fusion", label.clone(), half(*t1), half(*t2)),
            FusionCase::Decompose { q, s } => (*q, "decompose", format!("A_1/2 bot A_{s}"), half(HalfInt::from_twice(1)), half(*s)),
        };
        let (components, residual, passed) = match result {
            Ok((comps, res)) => {
                max_residual = max_residual.max(res);
                let passed = res <= tol;
                if !passed {
                    failures.push(format!("{check} {family} at q={q}: residual {res:.3e} > {tol:.1e}"));
                }
                (comps, res, passed)
            }
            Err(e) => {
                failures.push(format!("{check} {family} at q={q} failed: {e}"));
                (e, f64::NAN, false)
            }
        };
        table.push(vec![qf(q), check.into(), family.into(), t1, t2, components.into(), residual.into(), passed.into()]);
    }
    let summary = format!("{} fusion checks, max residual {max_residual:.3e}, {} failed", table.rows.len(), failures.len());
    Ok(Report { table, meta: Vec::new(), summary, failures })
}
