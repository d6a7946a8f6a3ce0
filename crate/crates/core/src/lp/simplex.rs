//! Dense two-phase primal simplex over a nonnegative working form.
//!
//! The public problem (free variables, two-sided bounds, mixed relations)
//! is rewritten into `min c·t, A t {≤,≥,=} b, t ≥ 0`:
//!
//! * a variable with a lower bound is shifted so the bound sits at zero;
//! * a variable with only an upper bound is mirrored (`x = u − t`);
//! * a doubly-bounded variable is shifted and gets an extra `t ≤ u − l` row;
//! * a free variable is split into a difference of two nonnegatives;
//! * equal bounds fix the variable and fold it into the right-hand sides.
//!
//! Rows are then normalized to nonnegative right-hand sides, slack columns
//! are added to `≤` rows, surplus columns to `≥` rows, and artificial
//! columns to `≥`/`=` rows. Phase 1 drives the artificial sum to zero (or
//! proves infeasibility); phase 2 optimizes the real objective with the
//! artificial columns barred from entering. Pivot choices are deterministic
//! throughout so that identical problems take identical paths.

use super::{LpProblem, LpSolution, LpStatus, Relation, SolveOptions};

/// How one public variable maps onto the nonnegative working variables.
#[derive(Debug, Clone, Copy)]
enum VarMap {
    /// `x = t[col] + offset`.
    Shifted { col: usize, offset: f64 },
    /// `x = upper − t[col]` (upper bound only).
    Mirrored { col: usize, upper: f64 },
    /// `x = t[pos] − t[neg]` (free variable).
    Split { pos: usize, neg: usize },
    /// `x` is pinned by equal bounds.
    Fixed { value: f64 },
}

/// Working row before slack/artificial columns are attached.
struct WorkRow {
    coeffs: Vec<f64>,
    relation: Relation,
    rhs: f64,
}

pub(super) fn solve(problem: &LpProblem, options: &SolveOptions) -> LpSolution {
    let tol = options.feasibility_tolerance.max(1e-13);

    // ---- rewrite variables ------------------------------------------------
    let mut maps = Vec::with_capacity(problem.num_vars());
    let mut nt = 0usize; // working-variable count
    let mut bound_rows: Vec<(usize, f64)> = Vec::new(); // (col, upper) extras
    for b in &problem.bounds {
        let map = match (b.lower, b.upper) {
            (Some(lo), Some(hi)) if lo == hi => VarMap::Fixed { value: lo },
            (Some(lo), Some(hi)) => {
                let col = nt;
                nt += 1;
                bound_rows.push((col, hi - lo));
                VarMap::Shifted { col, offset: lo }
            }
            (Some(lo), None) => {
                let col = nt;
                nt += 1;
                VarMap::Shifted { col, offset: lo }
            }
            (None, Some(hi)) => {
                let col = nt;
                nt += 1;
                VarMap::Mirrored { col, upper: hi }
            }
            (None, None) => {
                let pos = nt;
                let neg = nt + 1;
                nt += 2;
                VarMap::Split { pos, neg }
            }
        };
        maps.push(map);
    }

    // Objective over working variables plus the constant from fixed/shifted
    // parts (reported objective is recomputed from the mapped point, so the
    // constant itself never needs tracking).
    let mut cost = vec![0.0; nt];
    for (j, map) in maps.iter().enumerate() {
        let c = problem.objective[j];
        match *map {
            VarMap::Shifted { col, .. } => cost[col] += c,
            VarMap::Mirrored { col, .. } => cost[col] -= c,
            VarMap::Split { pos, neg } => {
                cost[pos] += c;
                cost[neg] -= c;
            }
            VarMap::Fixed { .. } => {}
        }
    }

    // ---- rewrite rows -----------------------------------------------------
    let mut rows: Vec<WorkRow> = Vec::with_capacity(problem.constraints.len() + bound_rows.len());
    for c in &problem.constraints {
        let mut coeffs = vec![0.0; nt];
        let mut rhs = c.rhs;
        for (j, map) in maps.iter().enumerate() {
            let a = c.coeffs[j];
            if a == 0.0 {
                continue;
            }
            match *map {
                VarMap::Shifted { col, offset } => {
                    coeffs[col] += a;
                    rhs -= a * offset;
                }
                VarMap::Mirrored { col, upper } => {
                    coeffs[col] -= a;
                    rhs -= a * upper;
                }
                VarMap::Split { pos, neg } => {
                    coeffs[pos] += a;
                    coeffs[neg] -= a;
                }
                VarMap::Fixed { value } => rhs -= a * value,
            }
        }
        rows.push(WorkRow {
            coeffs,
            relation: c.relation,
            rhs,
        });
    }
    for &(col, upper) in &bound_rows {
        let mut coeffs = vec![0.0; nt];
        coeffs[col] = 1.0;
        rows.push(WorkRow {
            coeffs,
            relation: Relation::Le,
            rhs: upper,
        });
    }

    // Normalize right-hand sides to be nonnegative.
    for row in &mut rows {
        if row.rhs < 0.0 {
            row.rhs = -row.rhs;
            for a in &mut row.coeffs {
                *a = -*a;
            }
            row.relation = match row.relation {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
    }

    // ---- attach slack/surplus/artificial columns --------------------------
    let m = rows.len();
    let n_slack = rows
        .iter()
        .filter(|r| matches!(r.relation, Relation::Le))
        .count();
    let n_art = m - n_slack; // one artificial per >= or = row
    let n_surplus = rows
        .iter()
        .filter(|r| matches!(r.relation, Relation::Ge))
        .count();
    let width = nt + n_slack + n_surplus + n_art + 1; // + rhs column
    let rhs_col = width - 1;
    let art_start = nt + n_slack + n_surplus;

    let mut tab = vec![0.0; m * width];
    let mut basis = vec![usize::MAX; m];
    let mut is_artificial = vec![false; width - 1];
    for j in art_start..width - 1 {
        is_artificial[j] = true;
    }

    let mut next_slack = nt;
    let mut next_surplus = nt + n_slack;
    let mut next_art = art_start;
    for (r, row) in rows.iter().enumerate() {
        let base = r * width;
        tab[base..base + nt].copy_from_slice(&row.coeffs);
        tab[base + rhs_col] = row.rhs;
        match row.relation {
            Relation::Le => {
                tab[base + next_slack] = 1.0;
                basis[r] = next_slack;
                next_slack += 1;
            }
            Relation::Ge => {
                tab[base + next_surplus] = -1.0;
                tab[base + next_art] = 1.0;
                basis[r] = next_art;
                next_surplus += 1;
                next_art += 1;
            }
            Relation::Eq => {
                tab[base + next_art] = 1.0;
                basis[r] = next_art;
                next_art += 1;
            }
        }
    }

    // Raw (uncanonicalized) cost rows. Phase 1 minimizes the artificial
    // sum; phase 2 minimizes the real objective. Canonical reduced-cost
    // rows are derived from these against the current tableau whenever a
    // phase starts or the tableau is refactorized.
    let mut raw_z1 = vec![0.0; width];
    for j in art_start..width - 1 {
        raw_z1[j] = 1.0;
    }
    let mut raw_z2 = vec![0.0; width];
    raw_z2[..nt].copy_from_slice(&cost);

    let mut state = Tableau {
        orig: tab.clone(),
        row_ids: (0..m).collect(),
        tab,
        basis,
        m,
        width,
        rhs_col,
        is_artificial,
        iterations: 0,
        since_refactor: 0,
        refactor_ok: true,
        tol,
    };

    let max_iter = options.max_iterations.unwrap_or_else(|| {
        50 * (problem.num_vars() + problem.num_constraints()).max(1)
    });

    let debug = std::env::var("FATMARGIN_LP_DEBUG").is_ok();

    // ---- phase 1 ----------------------------------------------------------
    if n_art > 0 {
        let mut z1 = vec![0.0; width];
        state.canonicalize_cost(&raw_z1, &mut z1);
        let outcome =
            state.optimize(&mut z1, &raw_z1, max_iter, options.degenerate_pivot_limit, false);
        if debug {
            eprintln!(
                "DEBUG phase1: {outcome:?} after {} iters (m {}, nt {})",
                state.iterations, state.m, nt
            );
        }
        match outcome {
            RunOutcome::Done => {}
            RunOutcome::Unbounded => {
                // The artificial sum is bounded below by zero; reaching this
                // arm means numerics broke down, which reads as infeasible.
                return finish(problem, &maps, &state, LpStatus::Infeasible, None);
            }
            RunOutcome::OutOfIterations => {
                return finish(problem, &maps, &state, LpStatus::IterationLimit, None);
            }
        }
        // Rebuild on fresh numbers before judging feasibility: the relaxed
        // ratio test may have let small infeasibilities through, and drift
        // may be hiding real ones. The rebuild exposes the exact basic
        // point, and a dual pass repairs what it can while the phase-1
        // costs are still dual feasible.
        if state.refactorize_keep_negative() {
            state.since_refactor = 0;
            state.canonicalize_cost(&raw_z1, &mut z1);
            state.dual_repair(&mut z1, 4 * state.m);
        }
        // Total remaining violation of the exact basic point: artificials
        // still carrying value, plus rows the dual pass could not lift back
        // above its own floor (sub-floor negatives are roundoff, not
        // evidence).
        let repair_floor = 10.0 * tol * state.rhs_scale();
        let infeasibility: f64 = (0..state.m)
            .map(|r| {
                let v = state.tab[r * state.width + state.rhs_col];
                if state.is_artificial[state.basis[r]] {
                    v.abs()
                } else if -v > repair_floor {
                    -v
                } else {
                    0.0
                }
            })
            .sum();
        let rhs_scale = rows.iter().fold(1.0f64, |acc, r| acc.max(r.rhs.abs()));
        if infeasibility > tol * rhs_scale {
            if debug {
                eprintln!(
                    "DEBUG phase1 end: infeasibility {infeasibility:.6e} vs gate {:.3e}, iters {}, m {}",
                    tol * rhs_scale,
                    state.iterations,
                    state.m
                );
            }
            return finish(problem, &maps, &state, LpStatus::Infeasible, None);
        }
        state.evict_artificials();
    }

    // ---- phase 2 ----------------------------------------------------------
    let mut z2 = vec![0.0; width];
    state.canonicalize_cost(&raw_z2, &mut z2);
    let outcome =
        state.optimize(&mut z2, &raw_z2, max_iter, options.degenerate_pivot_limit, false);
    if debug {
        eprintln!("DEBUG phase2: {outcome:?} after {} total iters", state.iterations);
    }
    // A claimed optimum is not trusted as-is: the relaxed ratio test trades
    // small infeasibilities for stability. Rebuild from pristine data and
    // repair what surfaced with dual pivots (the basis is dual feasible
    // here); that feasible exact vertex is the baseline answer. Any further
    // optimization must prove itself: each strict pass is followed by
    // another rebuild-and-repair, and only a verified objective improvement
    // is kept — otherwise the best vertex so far is restored. On an
    // ill-conditioned basis the "improving" columns a rebuild reveals are
    // frequently artifacts whose pursuit wrecks feasibility, so unverified
    // progress counts for nothing.
    let pre_cleanup = if matches!(outcome, RunOutcome::Done) {
        Some((state.tab.clone(), state.basis.clone(), state.since_refactor))
    } else {
        None
    };
    if matches!(outcome, RunOutcome::Done) && state.refactorize_keep_negative() {
        state.since_refactor = 0;
        state.canonicalize_cost(&raw_z2, &mut z2);
        let repaired = state.dual_repair(&mut z2, 4 * state.m);
        if debug {
            eprintln!(
                "DEBUG cleanup: baseline repaired {repaired}, objective {:.9e}",
                state.objective(&raw_z2)
            );
        }
        if !repaired {
            // The exact basic point is more infeasible than the drifted
            // working tableau and dual pivots could not mend it; put the
            // working tableau back and let extraction pick the better point.
            if let Some((tab, basis, since)) = pre_cleanup {
                state.tab = tab;
                state.basis = basis;
                state.since_refactor = since;
            }
        } else {
            let mut best = (state.tab.clone(), state.basis.clone());
            let mut best_obj = state.objective(&raw_z2);
            for round in 0..2 {
                let improve =
                    state.optimize(&mut z2, &raw_z2, max_iter, options.degenerate_pivot_limit, true);
                if !matches!(improve, RunOutcome::Done) {
                    break;
                }
                if !state.refactorize_keep_negative() {
                    break;
                }
                state.since_refactor = 0;
                state.canonicalize_cost(&raw_z2, &mut z2);
                let again = state.dual_repair(&mut z2, 4 * state.m);
                let obj = state.objective(&raw_z2);
                if debug {
                    eprintln!(
                        "DEBUG cleanup round {round}: repaired {again}, objective {obj:.9e} vs best {best_obj:.9e}"
                    );
                }
                if again && obj < best_obj - 1e-9 * (1.0 + best_obj.abs()) {
                    best = (state.tab.clone(), state.basis.clone());
                    best_obj = obj;
                } else {
                    break;
                }
            }
            state.tab = best.0;
            state.basis = best.1;
            // Keep the drift-aware safeguards active for the final
            // extraction; the restored tableau is one repair past pristine.
            state.since_refactor = 1;
        }
    }
    let status = match outcome {
        RunOutcome::Done => LpStatus::Optimal,
        RunOutcome::Unbounded => LpStatus::Unbounded,
        RunOutcome::OutOfIterations => LpStatus::IterationLimit,
    };

    // A claimed optimum gets one fresh solve of the basis system against
    // the pristine data to strip accumulated pivot roundoff. The fresh point
    // is kept only when it actually satisfies the working rows better — a
    // near-singular basis can make the exact basic point worse than the
    // drifted one, and the drifted one is then the better certificate.
    let chosen = if status == LpStatus::Optimal {
        let from_tableau = state.extract(nt);
        match state.refined_basic_values() {
            Some(vals) => {
                let mut refined = vec![0.0; nt];
                for (r, &col) in state.basis.iter().enumerate() {
                    if col < nt {
                        refined[col] = vals[r].max(0.0);
                    }
                }
                if working_residual(&rows, &refined) <= working_residual(&rows, &from_tableau) {
                    Some(refined)
                } else {
                    Some(from_tableau)
                }
            }
            None => Some(from_tableau),
        }
    } else {
        None
    };
    finish(problem, &maps, &state, status, chosen)
}

/// Worst violation of the normalized working rows at `t ≥ 0`.
fn working_residual(rows: &[WorkRow], t: &[f64]) -> f64 {
    let mut worst = 0.0f64;
    for row in rows {
        let v: f64 = row.coeffs.iter().zip(t).map(|(a, x)| a * x).sum();
        let violation = match row.relation {
            Relation::Le => v - row.rhs,
            Relation::Ge => row.rhs - v,
            Relation::Eq => (v - row.rhs).abs(),
        };
        worst = worst.max(violation);
    }
    worst
}

#[derive(Debug)]
enum RunOutcome {
    Done,
    Unbounded,
    OutOfIterations,
}

enum LeaveOutcome {
    /// Pivot here.
    Row(usize),
    /// Positive entries exist but all at roundoff level; the column is
    /// unusable for this basis.
    ZeroColumn,
    /// No positive entry at all: a genuine recession direction.
    Unbounded,
}

/// Feasibility relaxation for the ratio test: each row may be driven past
/// its bound by this fraction of its right-hand-side scale, which widens the
/// set of near-tied rows so the tie-break can favor large pivot elements.
/// The infeasibility this admits per pivot is bounded by the relaxation
/// itself and is cleared afterwards by a rebuild-and-repair pass.
const RATIO_RELAX: f64 = 1e-8;

/// A pivot element smaller than this fraction of the column's largest entry
/// is rejected on a drifted tableau: dividing by it would blow accumulated
/// roundoff up past any feasibility tolerance.
const PIVOT_STABILITY_RATIO: f64 = 1e-6;

struct Tableau {
    /// Row-major constraint matrix, `m` rows of `width` (rhs in last column).
    tab: Vec<f64>,
    /// Pristine pre-pivot copy of `tab`, used to rebuild working data free
    /// of accumulated elimination roundoff.
    orig: Vec<f64>,
    /// Current row → row index in `orig` (rows move when redundant ones are
    /// dropped).
    row_ids: Vec<usize>,
    /// Basic column per row.
    basis: Vec<usize>,
    m: usize,
    width: usize,
    rhs_col: usize,
    /// Marks artificial columns (never eligible to enter).
    is_artificial: Vec<bool>,
    iterations: usize,
    /// Pivots since the tableau was last rebuilt from pristine data.
    since_refactor: usize,
    /// Cleared when a refactorization fails (numerically singular basis);
    /// further attempts are pointless and the drifted tableau carries on.
    refactor_ok: bool,
    tol: f64,
}

impl Tableau {
    /// How many pivots may pass between rebuilds from pristine data.
    fn refactor_period(&self) -> usize {
        (2 * self.m).max(64)
    }

    /// Run simplex pivots until the reduced costs in `z` are nonnegative.
    ///
    /// `raw_z` is the uncanonicalized cost row `z` derives from; it is
    /// needed to restore canonical reduced costs after a refactorization.
    /// Entering columns use Dantzig's rule, switching to Bland's rule after
    /// `degenerate_limit` consecutive degenerate pivots; under Bland the
    /// ratio test breaks ties by the smallest basis column, so that regime
    /// is cycle-free.
    fn optimize(
        &mut self,
        z: &mut Vec<f64>,
        raw_z: &[f64],
        max_iter: usize,
        degenerate_limit: usize,
        strict: bool,
    ) -> RunOutcome {
        // Anti-cycling: after `degenerate_limit` consecutive degenerate
        // pivots, switch to Bland's rule for a bounded stay; each
        // re-engagement doubles the stay, so a truly stuck plateau ends up
        // under Bland's termination guarantee while ordinary plateaus pay
        // only a brief slowdown before Dantzig resumes.
        let mut bland_left = 0usize;
        let mut bland_stay = degenerate_limit.max(1);
        let mut degenerate_run = 0usize;
        // Columns whose positive entries are all at roundoff level for the
        // current basis: numerically dependent, unusable as pivots. They are
        // skipped rather than misread as directions of unboundedness, and
        // the set is cleared whenever the tableau is rebuilt.
        let mut banned = vec![false; self.width - 1];
        loop {
            if self.refactor_ok && self.since_refactor >= self.refactor_period() {
                if self.refactorize() {
                    self.since_refactor = 0;
                    self.canonicalize_cost(raw_z, z);
                    banned.fill(false);
                } else {
                    self.refactor_ok = false;
                }
            }
            if self.iterations >= max_iter {
                return RunOutcome::OutOfIterations;
            }
            let bland = bland_left > 0;
            let Some(enter) = self.pick_entering(z, bland, &banned) else {
                // Optimal — unless a banned column still prices as
                // improving, in which case one rebuild restores its true
                // column and the verdict is retried on clean numbers.
                let banned_improving =
                    (0..self.width - 1).any(|j| banned[j] && z[j] < -self.tol);
                if banned_improving
                    && self.refactor_ok
                    && self.since_refactor > 0
                    && self.refactorize()
                {
                    self.since_refactor = 0;
                    self.canonicalize_cost(raw_z, z);
                    banned.fill(false);
                    continue;
                }
                return RunOutcome::Done;
            };
            let leave = match self.pick_leaving(enter, bland, strict) {
                LeaveOutcome::Row(r) => r,
                LeaveOutcome::ZeroColumn => {
                    banned[enter] = true;
                    continue;
                }
                LeaveOutcome::Unbounded => return RunOutcome::Unbounded,
            };
            let degenerate = self.tab[leave * self.width + self.rhs_col] <= self.tol;
            self.pivot(leave, enter, z);
            self.iterations += 1;
            self.since_refactor += 1;
            if bland {
                bland_left -= 1;
            }
            if degenerate {
                degenerate_run += 1;
                if degenerate_run > degenerate_limit && bland_left == 0 {
                    bland_left = bland_stay;
                    bland_stay = bland_stay.saturating_mul(2);
                    degenerate_run = 0;
                }
            } else {
                degenerate_run = 0;
            }
        }
    }

    /// `z := raw − Σ_r raw[basis_r] · row_r`: canonical reduced costs for
    /// the current (fully eliminated) tableau, derived from scratch.
    fn canonicalize_cost(&self, raw: &[f64], z: &mut Vec<f64>) {
        z.clear();
        z.extend_from_slice(raw);
        for r in 0..self.m {
            let f = z[self.basis[r]];
            if f != 0.0 {
                let base = r * self.width;
                for j in 0..self.width {
                    z[j] -= f * self.tab[base + j];
                }
                z[self.basis[r]] = 0.0;
            }
        }
    }

    /// Rebuild the tableau for the current basis directly from the pristine
    /// rows: Gauss–Jordan elimination over the basis columns with partial
    /// pivoting over rows. Accumulated drift from the pivot path is wiped.
    /// Returns `false` — leaving the tableau untouched — when the basis
    /// matrix is numerically singular or its exact vertex is infeasible
    /// beyond tolerance (both mean the rebuilt data would be unusable).
    fn refactorize(&mut self) -> bool {
        self.refactorize_mode(false)
    }

    /// `refactorize`, but keeping exact negative right-hand sides instead of
    /// clamping or rejecting them, so a dual repair pass can see and fix the
    /// genuine infeasibilities of the current basis.
    fn refactorize_keep_negative(&mut self) -> bool {
        self.refactorize_mode(true)
    }

    fn refactorize_mode(&mut self, keep_negative: bool) -> bool {
        let w = self.width;
        let m = self.m;
        let mut fresh = vec![0.0; m * w];
        for (r, &orig_row) in self.row_ids.iter().enumerate() {
            fresh[r * w..(r + 1) * w].copy_from_slice(&self.orig[orig_row * w..(orig_row + 1) * w]);
        }
        // Process basis columns in ascending order for determinism; each
        // claims the still-unclaimed row with the largest entry.
        let mut cols: Vec<usize> = self.basis.clone();
        cols.sort_unstable();
        let mut claimed = vec![false; m];
        let mut new_basis = vec![0usize; m];
        for &col in &cols {
            let mut piv_row = usize::MAX;
            let mut piv_abs = 0.0;
            for r in 0..m {
                if claimed[r] {
                    continue;
                }
                let v = fresh[r * w + col].abs();
                if v > piv_abs {
                    piv_abs = v;
                    piv_row = r;
                }
            }
            if piv_abs == 0.0 {
                return false;
            }
            claimed[piv_row] = true;
            new_basis[piv_row] = col;
            let pbase = piv_row * w;
            let inv = 1.0 / fresh[pbase + col];
            for j in 0..w {
                fresh[pbase + j] *= inv;
            }
            fresh[pbase + col] = 1.0;
            for r in 0..m {
                if r == piv_row {
                    continue;
                }
                let base = r * w;
                let factor = fresh[base + col];
                if factor != 0.0 {
                    for j in 0..w {
                        fresh[base + j] -= factor * fresh[pbase + j];
                    }
                    fresh[base + col] = 0.0;
                }
            }
        }
        // The exact basic point must still be (near-)feasible; clamp the
        // roundoff-level negatives and reject anything real — unless the
        // caller wants the negatives preserved for repair.
        if !keep_negative {
            let rhs_scale =
                (0..m).fold(1.0f64, |acc, r| acc.max(fresh[r * w + self.rhs_col].abs()));
            for r in 0..m {
                let v = fresh[r * w + self.rhs_col];
                if v < 0.0 {
                    if v < -1e3 * self.tol * rhs_scale {
                        return false;
                    }
                    fresh[r * w + self.rhs_col] = 0.0;
                }
            }
        }
        self.tab = fresh;
        self.basis = new_basis;
        true
    }

    /// Dual-simplex repair: starting from a dual-feasible basis (all reduced
    /// costs in `z` nonnegative up to tolerance) whose right-hand sides may
    /// have gone negative, pivot until the basic point is feasible again.
    ///
    /// Each step picks the most negative row still considered repairable
    /// and, within a small ratio window that keeps the reduced costs from
    /// dipping below roundoff level, the entering column with the largest
    /// pivot magnitude. A row whose only candidates are tiny relative to
    /// its best candidate is given up on rather than pivoted unstably.
    /// Returns `true` when every row ends at or above the feasibility
    /// floor.
    fn dual_repair(&mut self, z: &mut Vec<f64>, budget: usize) -> bool {
        let debug = std::env::var("FATMARGIN_LP_DEBUG").is_ok();
        let floor = -10.0 * self.tol * self.rhs_scale();
        if debug {
            let worst = (0..self.m)
                .map(|r| self.tab[r * self.width + self.rhs_col])
                .fold(f64::INFINITY, f64::min);
            let below = (0..self.m)
                .filter(|&r| self.tab[r * self.width + self.rhs_col] < floor)
                .count();
            eprintln!("DEBUG repair entry: worst rhs {worst:.3e}, {below} rows below floor");
        }
        let mut gave_up = vec![false; self.m];
        let mut spent = 0usize;
        loop {
            // Once the step count passes the row count the aggressive
            // most-negative/largest-pivot policy has likely entered a
            // degenerate cycle; fall back to smallest-index selection, which
            // cannot revisit a basis.
            let bland = spent > self.m;
            let mut worst: Option<(usize, f64)> = None;
            let mut any_below = false;
            for r in 0..self.m {
                let v = self.tab[r * self.width + self.rhs_col];
                if v < floor {
                    any_below = true;
                    if !gave_up[r] {
                        if bland {
                            worst = Some((r, v));
                            break;
                        }
                        match worst {
                            Some((_, wv)) if v >= wv => {}
                            _ => worst = Some((r, v)),
                        }
                    }
                }
            }
            let Some((row, _)) = worst else {
                return !any_below;
            };
            if spent >= budget {
                return false;
            }
            let base = row * self.width;
            let mut bound: Option<f64> = None;
            let mut row_max = 0.0f64;
            for j in 0..self.width - 1 {
                if self.is_artificial[j] {
                    continue;
                }
                let a = self.tab[base + j];
                if a < -self.tol {
                    row_max = row_max.max(-a);
                    let relaxed = (z[j].max(0.0) + self.tol * (1.0 + z[j].abs())) / -a;
                    bound = Some(match bound {
                        None => relaxed,
                        Some(b) => b.min(relaxed),
                    });
                }
            }
            let Some(bound) = bound else {
                gave_up[row] = true;
                continue;
            };
            let mut best: Option<(usize, f64)> = None; // (col, |a|)
            for j in 0..self.width - 1 {
                if self.is_artificial[j] {
                    continue;
                }
                let a = self.tab[base + j];
                if a < -self.tol {
                    let ratio = z[j].max(0.0) / -a;
                    if ratio <= bound {
                        if bland {
                            if -a >= PIVOT_STABILITY_RATIO * row_max {
                                best = Some((j, -a));
                                break;
                            }
                        } else {
                            match best {
                                Some((_, babs)) if -a <= babs => {}
                                _ => best = Some((j, -a)),
                            }
                        }
                    }
                }
            }
            match best {
                Some((_, babs)) if babs < PIVOT_STABILITY_RATIO * row_max => {
                    if debug {
                        eprintln!(
                            "DEBUG repair give-up (unstable): row {row}, rhs {:.3e}, best |a| {babs:.3e}, row max {row_max:.3e}",
                            self.tab[base + self.rhs_col]
                        );
                    }
                    gave_up[row] = true;
                }
                Some((col, _)) => {
                    self.pivot(row, col, z);
                    self.iterations += 1;
                    self.since_refactor += 1;
                    spent += 1;
                }
                None => {
                    if debug {
                        eprintln!(
                            "DEBUG repair give-up (no candidate): row {row}, rhs {:.3e}, row max {row_max:.3e}",
                            self.tab[base + self.rhs_col]
                        );
                    }
                    gave_up[row] = true;
                }
            }
        }
    }

    /// Objective value of the current basic point under the raw cost row.
    fn objective(&self, raw: &[f64]) -> f64 {
        (0..self.m)
            .map(|r| raw[self.basis[r]] * self.tab[r * self.width + self.rhs_col].max(0.0))
            .sum()
    }

    /// Largest absolute right-hand side among the pristine rows still in
    /// play; used to scale feasibility decisions.
    fn rhs_scale(&self) -> f64 {
        self.row_ids
            .iter()
            .map(|&i| self.orig[i * self.width + self.rhs_col].abs())
            .fold(1.0f64, f64::max)
    }

    /// Most negative reduced cost (lowest index wins ties); under Bland's
    /// rule, the first negative reduced cost. `None` means optimal.
    fn pick_entering(&self, z: &[f64], bland: bool, banned: &[bool]) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for j in 0..self.width - 1 {
            if self.is_artificial[j] || banned[j] {
                continue;
            }
            let c = z[j];
            if c < -self.tol {
                if bland {
                    return Some(j);
                }
                match best {
                    Some((_, b)) if c >= b => {}
                    _ => best = Some((j, c)),
                }
            }
        }
        best.map(|(j, _)| j)
    }

    /// Minimum-ratio row for the entering column, chosen in two passes.
    /// The first pass finds the tightest *relaxed* bound: each row's ratio
    /// computed as if its right-hand side carried a sliver of extra slack.
    /// The second pass treats every row whose plain ratio fits under that
    /// bound as tied and picks the one with the largest pivot element,
    /// which keeps roundoff amplification down on degenerate plateaus. The
    /// slack caps how far any row can be driven past its bound by one
    /// pivot; a later rebuild-and-repair pass clears what accumulates.
    /// Under Bland's rule the smallest basic column index wins the tie
    /// instead, as the anti-cycling guarantee requires.
    ///
    /// A column whose best in-window pivot element is still tiny relative
    /// to the column's largest entry is reported as unusable rather than
    /// pivoted on: dividing by it would amplify existing roundoff past any
    /// feasibility tolerance.
    ///
    /// `strict` shrinks the slack to roundoff width while keeping the
    /// largest-pivot tie-break; cleanup passes use it so they cannot
    /// introduce fresh infeasibility of their own.
    fn pick_leaving(&self, enter: usize, bland: bool, strict: bool) -> LeaveOutcome {
        let relax = if bland || strict { self.tol } else { RATIO_RELAX };
        let mut bound: Option<f64> = None;
        let mut any_positive = false;
        let mut col_max = 0.0f64;
        for r in 0..self.m {
            let a = self.tab[r * self.width + enter];
            col_max = col_max.max(a.abs());
            if a <= self.tol {
                any_positive |= a > 0.0;
                continue;
            }
            let rhs = self.tab[r * self.width + self.rhs_col];
            let relaxed = (rhs.max(0.0) + relax * (1.0 + rhs.abs())) / a;
            bound = Some(match bound {
                None => relaxed,
                Some(b) => b.min(relaxed),
            });
        }
        let Some(bound) = bound else {
            // Entries exist but every one sits at roundoff level: the column
            // is numerically dependent on the basis, not a recession
            // direction.
            return if any_positive {
                LeaveOutcome::ZeroColumn
            } else {
                LeaveOutcome::Unbounded
            };
        };
        let mut best: Option<(usize, f64)> = None; // (row, pivot element)
        for r in 0..self.m {
            let a = self.tab[r * self.width + enter];
            if a <= self.tol {
                continue;
            }
            let ratio = (self.tab[r * self.width + self.rhs_col]).max(0.0) / a;
            if ratio > bound {
                continue;
            }
            let better = match best {
                None => true,
                Some((br, bpivot)) => {
                    if bland {
                        self.basis[r] < self.basis[br]
                    } else {
                        a > bpivot
                    }
                }
            };
            if better {
                best = Some((r, a));
            }
        }
        match best {
            // On a freshly rebuilt tableau the entries are exact, so a small
            // pivot is genuine data rather than noise and stays usable.
            Some((_, pivot))
                if self.since_refactor > 0 && pivot < PIVOT_STABILITY_RATIO * col_max =>
            {
                LeaveOutcome::ZeroColumn
            }
            Some((r, _)) => LeaveOutcome::Row(r),
            None => LeaveOutcome::ZeroColumn,
        }
    }

    /// Gauss–Jordan pivot on (`leave`, `enter`), also eliminating the cost
    /// row so reduced costs stay canonical.
    fn pivot(&mut self, leave: usize, enter: usize, z: &mut [f64]) {
        let width = self.width;
        let pbase = leave * width;
        let pivot = self.tab[pbase + enter];
        let inv = 1.0 / pivot;
        for j in 0..width {
            self.tab[pbase + j] *= inv;
        }
        self.tab[pbase + enter] = 1.0; // exact unit after normalization
        for r in 0..self.m {
            if r == leave {
                continue;
            }
            let base = r * width;
            let factor = self.tab[base + enter];
            if factor != 0.0 {
                for j in 0..width {
                    self.tab[base + j] -= factor * self.tab[pbase + j];
                }
                self.tab[base + enter] = 0.0;
            }
        }
        let zf = z[enter];
        if zf != 0.0 {
            for j in 0..width {
                z[j] -= zf * self.tab[pbase + j];
            }
            z[enter] = 0.0;
        }
        self.basis[leave] = enter;
    }

    /// After a successful phase 1, force any artificial still in the basis
    /// out (its value is zero): pivot on any usable structural column in its
    /// row, or delete the row entirely when it has become redundant.
    fn evict_artificials(&mut self) {
        let mut r = 0;
        while r < self.m {
            if !self.is_artificial[self.basis[r]] {
                r += 1;
                continue;
            }
            let base = r * self.width;
            let pivot_col = (0..self.width - 1)
                .find(|&j| !self.is_artificial[j] && self.tab[base + j].abs() > self.tol);
            match pivot_col {
                Some(j) => {
                    // Degenerate pivot: swaps the basis label without moving
                    // the current (feasible) point. Cost rows are re-derived
                    // at phase-2 entry, so none is updated here.
                    let mut dummy = vec![0.0; self.width];
                    self.pivot(r, j, &mut dummy);
                    r += 1;
                }
                None => {
                    // Row is all zeros over structural columns: the original
                    // constraint was redundant. Drop it.
                    let last = self.m - 1;
                    if r != last {
                        let (head, tail) = self.tab.split_at_mut(last * self.width);
                        head[r * self.width..(r + 1) * self.width]
                            .copy_from_slice(&tail[..self.width]);
                        self.basis[r] = self.basis[last];
                        self.row_ids[r] = self.row_ids[last];
                    }
                    self.tab.truncate(last * self.width);
                    self.basis.truncate(last);
                    self.row_ids.truncate(last);
                    self.m = last;
                }
            }
        }
    }

    /// Current working-variable values (basic = rhs, nonbasic = 0).
    fn extract(&self, nt: usize) -> Vec<f64> {
        let mut t = vec![0.0; nt];
        for r in 0..self.m {
            let col = self.basis[r];
            if col < nt {
                t[col] = self.tab[r * self.width + self.rhs_col];
            }
        }
        t
    }

    /// Re-derive the basic values by solving `B x_B = b` against the
    /// pristine pre-pivot data. Thousands of rank-one tableau updates drift;
    /// one fresh factorization leaves residuals at roundoff level no matter
    /// how long the pivot path was. `None` when the basis matrix turns out
    /// numerically singular (caller keeps the tableau values).
    fn refined_basic_values(&self) -> Option<Vec<f64>> {
        let n = self.m;
        let mut a = vec![0.0; n * n];
        let mut b = vec![0.0; n];
        for (i, &orig_row) in self.row_ids.iter().enumerate() {
            let base = orig_row * self.width;
            for (k, &col) in self.basis.iter().enumerate() {
                a[i * n + k] = self.orig[base + col];
            }
            b[i] = self.orig[base + self.rhs_col];
        }
        if !solve_dense(&mut a, n, &mut b) || b.iter().any(|v| !v.is_finite()) {
            return None;
        }
        Some(b)
    }
}

/// In-place Gaussian elimination with partial pivoting; `b` becomes the
/// solution. `false` when a pivot column is exactly zero (singular matrix).
fn solve_dense(a: &mut [f64], n: usize, b: &mut [f64]) -> bool {
    for k in 0..n {
        let mut piv = k;
        let mut max = a[k * n + k].abs();
        for i in k + 1..n {
            let v = a[i * n + k].abs();
            if v > max {
                max = v;
                piv = i;
            }
        }
        if max == 0.0 {
            return false;
        }
        if piv != k {
            for j in k..n {
                a.swap(k * n + j, piv * n + j);
            }
            b.swap(k, piv);
        }
        let inv = 1.0 / a[k * n + k];
        for i in k + 1..n {
            let f = a[i * n + k] * inv;
            if f != 0.0 {
                for j in k + 1..n {
                    a[i * n + j] -= f * a[k * n + j];
                }
                b[i] -= f * b[k];
            }
        }
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for j in i + 1..n {
            s -= a[i * n + j] * b[j];
        }
        b[i] = s / a[i * n + i];
    }
    true
}

/// Map the working point back to the caller's variables and package the
/// solution. `point_override` supplies an already-chosen working point
/// (the refined-vs-tableau winner); otherwise the tableau values are read.
fn finish(
    problem: &LpProblem,
    maps: &[VarMap],
    state: &Tableau,
    status: LpStatus,
    point_override: Option<Vec<f64>>,
) -> LpSolution {
    let nt = maps
        .iter()
        .map(|m| match m {
            VarMap::Split { neg, .. } => neg + 1,
            VarMap::Shifted { col, .. } | VarMap::Mirrored { col, .. } => col + 1,
            VarMap::Fixed { .. } => 0,
        })
        .max()
        .unwrap_or(0);
    let t = point_override.unwrap_or_else(|| state.extract(nt));
    let point: Vec<f64> = maps
        .iter()
        .map(|m| match *m {
            VarMap::Shifted { col, offset } => t[col] + offset,
            VarMap::Mirrored { col, upper } => upper - t[col],
            VarMap::Split { pos, neg } => t[pos] - t[neg],
            VarMap::Fixed { value } => value,
        })
        .collect();
    let objective_value = problem
        .objective
        .iter()
        .zip(&point)
        .map(|(c, x)| c * x)
        .sum();
    LpSolution {
        status,
        point,
        objective_value,
        iterations: state.iterations,
    }
}
