//! Linear programming: problem description and a dense two-phase simplex.
//!
//! The solver minimizes a linear objective over inequality/equality
//! constraints with per-variable bounds, including free variables. It is
//! deliberately small and deterministic: every classifier in this crate
//! trains by handing one `LpProblem` to [`solve`], and reproducible pivots
//! make training runs bit-for-bit repeatable.

mod simplex;

use crate::error::Error;
use crate::Result;

/// Constraint sense.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    /// Row ≤ rhs.
    Le,
    /// Row ≥ rhs.
    Ge,
    /// Row = rhs.
    Eq,
}

impl Relation {
    fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Eq => "=",
        }
    }
}

/// One linear constraint: `coeffs · x  relation  rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    /// Row coefficients, one per variable.
    pub coeffs: Vec<f64>,
    /// Sense of the row.
    pub relation: Relation,
    /// Right-hand-side scalar.
    pub rhs: f64,
}

/// Closed bounds on one variable; `None` means unbounded on that side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    /// Lower bound, or `None` for −∞.
    pub lower: Option<f64>,
    /// Upper bound, or `None` for +∞.
    pub upper: Option<f64>,
}

impl Bounds {
    /// Nonnegative: `[0, +∞)`.
    pub fn nonnegative() -> Self {
        Bounds {
            lower: Some(0.0),
            upper: None,
        }
    }

    /// Unbounded on both sides.
    pub fn free() -> Self {
        Bounds {
            lower: None,
            upper: None,
        }
    }
}

/// A minimization LP: `min objective · x` subject to constraints and bounds.
///
/// Variables default to nonnegative; call [`LpProblem::set_free`] or
/// [`LpProblem::set_bounds`] to change individual variables.
#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    /// Objective coefficients (length fixes the variable count).
    pub objective: Vec<f64>,
    /// Constraint rows.
    pub constraints: Vec<Constraint>,
    /// Per-variable bounds, same length as `objective`.
    pub bounds: Vec<Bounds>,
}

impl LpProblem {
    /// New problem with the given objective and all variables nonnegative.
    pub fn new(objective: Vec<f64>) -> Self {
        let n = objective.len();
        LpProblem {
            objective,
            constraints: Vec::new(),
            bounds: vec![Bounds::nonnegative(); n],
        }
    }

    /// Number of variables.
    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    /// Number of constraint rows (bounds not included).
    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    /// Append one constraint row.
    pub fn push_constraint(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) {
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
    }

    /// Make variable `var` free (unbounded both sides).
    pub fn set_free(&mut self, var: usize) {
        self.bounds[var] = Bounds::free();
    }

    /// Set explicit bounds on variable `var`.
    pub fn set_bounds(&mut self, var: usize, lower: Option<f64>, upper: Option<f64>) {
        self.bounds[var] = Bounds { lower, upper };
    }

    /// Check the structural invariants: row lengths match the variable
    /// count, bounds are ordered, and no coefficient is non-finite.
    pub fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        if self.bounds.len() != n {
            return Err(Error::structural(format!(
                "bounds length {} does not match variable count {n}",
                self.bounds.len()
            )));
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if c.coeffs.len() != n {
                return Err(Error::structural(format!(
                    "constraint {i} has {} coefficients, expected {n}",
                    c.coeffs.len()
                )));
            }
            if !c.rhs.is_finite() || c.coeffs.iter().any(|v| !v.is_finite()) {
                return Err(Error::structural(format!(
                    "constraint {i} contains a non-finite value"
                )));
            }
        }
        if self.objective.iter().any(|v| !v.is_finite()) {
            return Err(Error::structural("objective contains a non-finite value"));
        }
        for (j, b) in self.bounds.iter().enumerate() {
            if let (Some(lo), Some(hi)) = (b.lower, b.upper) {
                if lo > hi {
                    return Err(Error::structural(format!(
                        "variable {j} has lower bound {lo} above upper bound {hi}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Plain-text dump of the problem, used for debugging and test fixtures.
    ///
    /// Layout: an objective header, one line per constraint (coefficients,
    /// relation symbol, rhs), then a bounds section.
    pub fn dump(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::new();
        out.push_str("minimize\n  ");
        for (j, c) in self.objective.iter().enumerate() {
            if j > 0 {
                out.push(' ');
            }
            let _ = write!(out, "{c}");
        }
        out.push_str("\nsubject to\n");
        for c in &self.constraints {
            out.push_str("  ");
            for (j, v) in c.coeffs.iter().enumerate() {
                if j > 0 {
                    out.push(' ');
                }
                let _ = write!(out, "{v}");
            }
            let _ = writeln!(out, " {} {}", c.relation.symbol(), c.rhs);
        }
        out.push_str("bounds\n");
        for (j, b) in self.bounds.iter().enumerate() {
            let line = match (b.lower, b.upper) {
                (None, None) => format!("x{j} free"),
                (Some(lo), None) => format!("x{j} >= {lo}"),
                (None, Some(hi)) => format!("x{j} <= {hi}"),
                (Some(lo), Some(hi)) if lo == hi => format!("x{j} = {lo}"),
                (Some(lo), Some(hi)) => format!("x{j} in [{lo}, {hi}]"),
            };
            let _ = writeln!(out, "  {line}");
        }
        out
    }
}

/// Terminal state of a solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum LpStatus {
    /// An optimal basic feasible solution was found.
    Optimal,
    /// Phase 1 proved no feasible point exists.
    Infeasible,
    /// The objective decreases without bound over the feasible region.
    Unbounded,
    /// The pivot budget ran out before termination.
    IterationLimit,
}

/// Result of a solve, in the original variable space.
#[derive(Debug, Clone)]
pub struct LpSolution {
    /// How the solve ended.
    pub status: LpStatus,
    /// Variable values (meaningful when `status == Optimal`; best-effort
    /// last iterate otherwise).
    pub point: Vec<f64>,
    /// Objective at `point`.
    pub objective_value: f64,
    /// Simplex pivots performed across both phases.
    pub iterations: usize,
}

/// Solver knobs.
#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    /// Feasibility and reduced-cost tolerance.
    pub feasibility_tolerance: f64,
    /// Pivot budget; `None` means `50 · (variables + constraint rows)`.
    pub max_iterations: Option<usize>,
    /// Consecutive degenerate pivots before switching to Bland's rule.
    pub degenerate_pivot_limit: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            feasibility_tolerance: 1e-9,
            max_iterations: None,
            degenerate_pivot_limit: 40,
        }
    }
}

/// Solve `problem` with a two-phase primal simplex.
///
/// Free variables are split internally, bounded variables are shifted so the
/// working form has only nonnegative variables; the returned point is mapped
/// back to the caller's coordinates. Entering columns follow Dantzig's rule
/// (most negative reduced cost, lowest index on ties) and fall back to
/// Bland's rule after `degenerate_pivot_limit` consecutive degenerate
/// pivots, which rules out cycling.
pub fn solve(problem: &LpProblem, options: &SolveOptions) -> Result<LpSolution> {
    problem.validate()?;
    Ok(simplex::solve(problem, options))
}

/// Worst constraint and bound violations of a candidate point.
#[derive(Debug, Clone, Copy)]
pub struct ResidualReport {
    /// Largest amount by which any constraint row is violated.
    pub max_constraint_violation: f64,
    /// Largest amount by which any variable bound is violated.
    pub max_bound_violation: f64,
}

impl ResidualReport {
    /// True when both maxima are at or below `tolerance`.
    pub fn within(&self, tolerance: f64) -> bool {
        self.max_constraint_violation <= tolerance && self.max_bound_violation <= tolerance
    }
}

/// Measure how far `point` is from satisfying `problem`.
///
/// Pure computation used by tests and by training assertions; a feasible
/// point reports zeros.
pub fn check_solution(problem: &LpProblem, point: &[f64]) -> Result<ResidualReport> {
    if point.len() != problem.num_vars() {
        return Err(Error::structural(format!(
            "point length {} does not match variable count {}",
            point.len(),
            problem.num_vars()
        )));
    }
    let mut worst_row = 0.0f64;
    for c in &problem.constraints {
        let lhs: f64 = c.coeffs.iter().zip(point).map(|(a, x)| a * x).sum();
        let violation = match c.relation {
            Relation::Le => lhs - c.rhs,
            Relation::Ge => c.rhs - lhs,
            Relation::Eq => (lhs - c.rhs).abs(),
        };
        worst_row = worst_row.max(violation);
    }
    let mut worst_bound = 0.0f64;
    for (x, b) in point.iter().zip(&problem.bounds) {
        if let Some(lo) = b.lower {
            worst_bound = worst_bound.max(lo - x);
        }
        if let Some(hi) = b.upper {
            worst_bound = worst_bound.max(x - hi);
        }
    }
    Ok(ResidualReport {
        max_constraint_violation: worst_row,
        max_bound_violation: worst_bound,
    })
}
