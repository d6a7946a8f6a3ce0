//! Shared helpers for the integration suites: a brute-force LP oracle,
//! random problem generators, naive kernel arithmetic, and a parser for the
//! exported closed-form expressions.
//!
//! Everything here is deliberately independent of the crate's own solver
//! and kernel code paths: the oracle answers come from first principles
//! (vertex enumeration, direct double loops, string parsing), so agreement
//! is evidence rather than tautology.

#![allow(dead_code)]

use fatmargin::dataset::Dataset;
use fatmargin::lp::{LpProblem, Relation};
use rand::Rng;

/// Where the bundled benchmark CSVs live, relative to this crate.
pub fn data_path(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
}

// ---------------------------------------------------------------------------
// Dense linear-system solve (Gaussian elimination, partial pivoting)
// ---------------------------------------------------------------------------

/// Solve `a · x = rhs` for square `a`; `None` when the system is singular
/// to working precision.
pub fn solve_square_system(a: &[Vec<f64>], rhs: &[f64]) -> Option<Vec<f64>> {
    let n = rhs.len();
    let mut m: Vec<Vec<f64>> = a.iter().cloned().collect();
    let mut b = rhs.to_vec();
    let scale = m
        .iter()
        .flat_map(|row| row.iter().map(|v| v.abs()))
        .fold(1.0f64, f64::max);
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .expect("column range is non-empty");
        if m[pivot_row][col].abs() < 1e-11 * scale {
            return None;
        }
        m.swap(col, pivot_row);
        b.swap(col, pivot_row);
        for row in 0..n {
            if row == col {
                continue;
            }
            let factor = m[row][col] / m[col][col];
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                m[row][k] -= factor * m[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    Some((0..n).map(|i| b[i] / m[i][i]).collect())
}

// ---------------------------------------------------------------------------
// Vertex-enumeration LP oracle
// ---------------------------------------------------------------------------

/// Oracle verdict for a bounded LP.
#[derive(Debug, Clone, PartialEq)]
pub enum OracleVerdict {
    /// No vertex satisfies every constraint.
    Infeasible,
    /// Best vertex found.
    Optimal {
        /// Minimal objective value over feasible vertices.
        objective: f64,
        /// A vertex attaining it.
        point: Vec<f64>,
    },
}

/// Brute-force a *bounded* LP by enumerating candidate vertices.
///
/// Every vertex of a bounded polyhedron is the intersection of `n`
/// linearly independent active hyperplanes drawn from the constraint rows
/// (taken as equalities) and the finite variable bounds. This walks all
/// `n`-subsets of that pool, solves each square system, keeps the solutions
/// feasible within `feas_eps`, and returns the objective minimum. Exponential
/// and proud of it — callers keep `n ≤ 6` and rows `≤ 8`.
pub fn enumerate_lp_vertices(problem: &LpProblem, feas_eps: f64) -> OracleVerdict {
    let n = problem.num_vars();
    // Hyperplane pool: (coefficient row, rhs).
    let mut pool: Vec<(Vec<f64>, f64)> = Vec::new();
    for c in &problem.constraints {
        pool.push((c.coeffs.clone(), c.rhs));
    }
    for (j, b) in problem.bounds.iter().enumerate() {
        let mut unit = vec![0.0; n];
        unit[j] = 1.0;
        if let Some(lo) = b.lower {
            pool.push((unit.clone(), lo));
        }
        if let Some(hi) = b.upper {
            pool.push((unit, hi));
        }
    }
    assert!(
        pool.len() >= n,
        "oracle needs at least {n} hyperplanes to form a vertex, got {}",
        pool.len()
    );

    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut chosen = vec![0usize; n];
    enumerate_subsets(pool.len(), n, 0, 0, &mut chosen, &mut |subset| {
        let a: Vec<Vec<f64>> = subset.iter().map(|&i| pool[i].0.clone()).collect();
        let rhs: Vec<f64> = subset.iter().map(|&i| pool[i].1).collect();
        let Some(x) = solve_square_system(&a, &rhs) else {
            return;
        };
        if !point_is_feasible(problem, &x, feas_eps) {
            return;
        }
        let obj: f64 = problem.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
        match &best {
            Some((incumbent, _)) if obj >= *incumbent => {}
            _ => best = Some((obj, x)),
        }
    });
    match best {
        None => OracleVerdict::Infeasible,
        Some((objective, point)) => OracleVerdict::Optimal { objective, point },
    }
}

fn enumerate_subsets(
    pool: usize,
    want: usize,
    next: usize,
    depth: usize,
    chosen: &mut Vec<usize>,
    visit: &mut impl FnMut(&[usize]),
) {
    if depth == want {
        visit(chosen);
        return;
    }
    // Not enough items left to fill the subset: prune.
    for i in next..=pool.saturating_sub(want - depth) {
        chosen[depth] = i;
        enumerate_subsets(pool, want, i + 1, depth + 1, chosen, visit);
    }
}

/// Check `point` against every constraint row and bound of `problem`.
pub fn point_is_feasible(problem: &LpProblem, point: &[f64], eps: f64) -> bool {
    for c in &problem.constraints {
        let lhs: f64 = c.coeffs.iter().zip(point).map(|(a, x)| a * x).sum();
        let ok = match c.relation {
            Relation::Le => lhs <= c.rhs + eps,
            Relation::Ge => lhs >= c.rhs - eps,
            Relation::Eq => (lhs - c.rhs).abs() <= eps,
        };
        if !ok {
            return false;
        }
    }
    for (x, b) in point.iter().zip(&problem.bounds) {
        if let Some(lo) = b.lower {
            if *x < lo - eps {
                return false;
            }
        }
        if let Some(hi) = b.upper {
            if *x > hi + eps {
                return false;
            }
        }
    }
    true
}

/// Random LP that is bounded by construction: every variable carries a
/// finite box, rows mix ≤/≥ with an occasional equality.
pub fn random_boxed_lp(rng: &mut impl Rng) -> LpProblem {
    let n = rng.gen_range(1..=6);
    let rows = rng.gen_range(1..=8);
    let objective: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
    let mut p = LpProblem::new(objective);
    for j in 0..n {
        let lo = rng.gen_range(-3.0..0.0);
        let hi = rng.gen_range(0.1..4.0);
        p.set_bounds(j, Some(lo), Some(hi));
    }
    for _ in 0..rows {
        let coeffs: Vec<f64> = (0..n)
            .map(|_| {
                if rng.gen_bool(0.2) {
                    0.0
                } else {
                    rng.gen_range(-3.0..3.0)
                }
            })
            .collect();
        let rhs = rng.gen_range(-4.0..4.0);
        let relation = match rng.gen_range(0..10) {
            0 => Relation::Eq,
            1..=5 => Relation::Le,
            _ => Relation::Ge,
        };
        p.push_constraint(coeffs, relation, rhs);
    }
    p
}

// ---------------------------------------------------------------------------
// Random datasets
// ---------------------------------------------------------------------------

/// A 2-D dataset separable by a known hyperplane with a real gap: points
/// within `0.3` of the plane are rejected, so a unit-margin solution exists.
pub fn separable_dataset_2d(rng: &mut impl Rng, points: usize) -> Dataset {
    let theta = rng.gen_range(0.0..std::f64::consts::TAU);
    let w = [theta.cos(), theta.sin()];
    let b = rng.gen_range(-0.5..0.5);
    let mut features = Vec::with_capacity(points);
    let mut labels = Vec::with_capacity(points);
    // Force one point on each side so both classes are present.
    while features.len() < points {
        let x = [rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)];
        let score = w[0] * x[0] + w[1] * x[1] + b;
        if score.abs() < 0.3 {
            continue;
        }
        let need_pos = features.is_empty();
        let need_neg = features.len() == 1;
        if (need_pos && score < 0.0) || (need_neg && score > 0.0) {
            continue;
        }
        features.push(x.to_vec());
        labels.push(if score > 0.0 { 1.0 } else { -1.0 });
    }
    Dataset::new(features, labels).expect("constructed dataset is well-formed")
}

/// Random dataset with standard-normal features and both classes present;
/// with `m > n` the feature matrix is full-rank with probability one.
pub fn random_dataset(rng: &mut impl Rng, m: usize, n: usize) -> Dataset {
    assert!(m >= 2, "need at least one sample per class, got {m}");
    let features: Vec<Vec<f64>> = (0..m)
        .map(|_| (0..n).map(|_| standard_normal(rng)).collect())
        .collect();
    let labels: Vec<f64> = (0..m)
        .map(|i| match i {
            0 => 1.0,
            1 => -1.0,
            _ => {
                if rng.gen_bool(0.5) {
                    1.0
                } else {
                    -1.0
                }
            }
        })
        .collect();
    Dataset::new(features, labels).expect("constructed dataset is well-formed")
}

/// Box–Muller standard normal draw.
pub fn standard_normal(rng: &mut impl Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

// ---------------------------------------------------------------------------
// Naive kernel arithmetic (direct loops, no shared code with the crate)
// ---------------------------------------------------------------------------

/// `exp(−gamma · ‖p − q‖²)` computed the obvious way.
pub fn naive_gaussian(p: &[f64], q: &[f64], gamma: f64) -> f64 {
    let d2: f64 = p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum();
    (-gamma * d2).exp()
}

/// Plain dot product.
pub fn naive_dot(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).map(|(a, b)| a * b).sum()
}

// ---------------------------------------------------------------------------
// Closed-form expression oracle
// ---------------------------------------------------------------------------

/// One `weight · exp[−Σ a·(x_k − c)²]` term of a parsed expression.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpTerm {
    /// Signed multiplier in front of the exponential.
    pub weight: f64,
    /// Squared factors: `(a, center, zero-based variable index)`.
    pub squares: Vec<(f64, f64, usize)>,
}

/// A parsed `f(x1, …) = sign{ … }` expression.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedForm {
    /// Number of input variables the header declares.
    pub num_vars: usize,
    /// Exponential terms in print order.
    pub terms: Vec<ExpTerm>,
    /// Trailing constant.
    pub offset: f64,
}

impl ClosedForm {
    /// Evaluate the discriminant at `x` (raw feature coordinates).
    pub fn score(&self, x: &[f64]) -> f64 {
        assert_eq!(
            x.len(),
            self.num_vars,
            "probe has {} coordinates, expression wants {}",
            x.len(),
            self.num_vars
        );
        let mut total = self.offset;
        for term in &self.terms {
            let exponent: f64 = term
                .squares
                .iter()
                .map(|&(a, c, var)| {
                    let d = x[var] - c;
                    a * d * d
                })
                .sum();
            total += term.weight * (-exponent).exp();
        }
        total
    }

    /// Label at `x` with the same tie rule as the crate: zero goes to +1.
    pub fn label(&self, x: &[f64]) -> f64 {
        if self.score(x) >= 0.0 {
            1.0
        } else {
            -1.0
        }
    }
}

/// Parse the plain-text closed form produced by the model exporter.
///
/// Grammar accepted (one term per line inside the braces):
///
/// ```text
/// f(x1, x2) = sign{
///     12.3456 * exp[-(0.5000*(x1 - 1.0000)^2 + 0.5000*x2^2)]
///     - 0.2500
/// }
/// ```
///
/// Panics with a descriptive message on anything unexpected — a parse
/// failure in tests means the export format drifted.
pub fn parse_closed_form(text: &str) -> ClosedForm {
    let mut lines = text.lines();
    let header = lines.next().expect("expression has a header line");
    let open = header.find('(').expect("header has an opening parenthesis");
    let close = header.find(')').expect("header has a closing parenthesis");
    let num_vars = header[open + 1..close].split(',').count();
    assert!(
        header.ends_with("sign{"),
        "header should end with 'sign{{': {header:?}"
    );

    let mut terms = Vec::new();
    let mut offset: Option<f64> = None;
    for line in lines {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if trimmed == "}" {
            break;
        }
        assert!(
            offset.is_none(),
            "offset must be the final term, found {trimmed:?} after it"
        );
        let (sign, rest) = split_sign(trimmed);
        match rest.split_once(" * exp[-(") {
            Some((magnitude, tail)) => {
                let body = tail
                    .strip_suffix(")]")
                    .unwrap_or_else(|| panic!("exponential not closed by ')]': {trimmed:?}"));
                let weight = sign * parse_number(magnitude);
                let squares = split_top_level_plus(body)
                    .into_iter()
                    .map(|sq| parse_square(sq, num_vars))
                    .collect();
                terms.push(ExpTerm { weight, squares });
            }
            None => offset = Some(sign * parse_number(rest)),
        }
    }
    ClosedForm {
        num_vars,
        terms,
        offset: offset.expect("expression ends with a constant offset term"),
    }
}

/// Strip a leading `- ` / `+ ` (or a bare `-`) and return the sign factor.
fn split_sign(term: &str) -> (f64, &str) {
    if let Some(rest) = term.strip_prefix("- ") {
        (-1.0, rest)
    } else if let Some(rest) = term.strip_prefix("+ ") {
        (1.0, rest)
    } else if let Some(rest) = term.strip_prefix('-') {
        (-1.0, rest)
    } else {
        (1.0, term)
    }
}

/// Split on `" + "` at parenthesis depth zero only, so centers like
/// `(x1 + 2.5)^2` survive intact.
fn split_top_level_plus(body: &str) -> Vec<&str> {
    let bytes = body.as_bytes();
    let mut depth = 0usize;
    let mut start = 0usize;
    let mut parts = Vec::new();
    let mut i = 0usize;
    while i < bytes.len() {
        match bytes[i] {
            b'(' => depth += 1,
            b')' => depth -= 1,
            b' ' if depth == 0 && bytes[i..].starts_with(b" + ") => {
                parts.push(&body[start..i]);
                i += 3;
                start = i;
                continue;
            }
            _ => {}
        }
        i += 1;
    }
    parts.push(&body[start..]);
    parts
}

/// Parse one squared factor: `A*xK^2`, `A*(xK - C)^2`, or `A*(xK + C)^2`.
fn parse_square(sq: &str, num_vars: usize) -> (f64, f64, usize) {
    let (a, center, var) = if let Some((coeff, inner)) = sq.split_once("*(") {
        let inner = inner
            .strip_suffix(")^2")
            .unwrap_or_else(|| panic!("squared factor not closed by ')^2': {sq:?}"));
        let (var_tok, center) = if let Some((v, c)) = inner.split_once(" - ") {
            (v, parse_number(c))
        } else if let Some((v, c)) = inner.split_once(" + ") {
            (v, -parse_number(c))
        } else {
            panic!("squared factor center neither added nor subtracted: {sq:?}");
        };
        (parse_number(coeff), center, parse_var(var_tok))
    } else if let Some((coeff, var_part)) = sq.split_once('*') {
        let var_tok = var_part
            .strip_suffix("^2")
            .unwrap_or_else(|| panic!("squared factor missing '^2': {sq:?}"));
        (parse_number(coeff), 0.0, parse_var(var_tok))
    } else {
        panic!("unrecognized squared factor: {sq:?}");
    };
    assert!(var < num_vars, "variable index {var} out of range in {sq:?}");
    (a, center, var)
}

/// `x7` → 6 (the export numbers variables from 1).
fn parse_var(tok: &str) -> usize {
    let digits = tok
        .strip_prefix('x')
        .unwrap_or_else(|| panic!("variable token should start with 'x': {tok:?}"));
    let one_based: usize = digits
        .parse()
        .unwrap_or_else(|_| panic!("variable token should be x<digits>: {tok:?}"));
    assert!(one_based >= 1, "variables are numbered from x1, got {tok:?}");
    one_based - 1
}

/// Parse a printed number (plain decimal or scientific).
fn parse_number(tok: &str) -> f64 {
    tok.trim()
        .parse()
        .unwrap_or_else(|_| panic!("unparseable number: {tok:?}"))
}
