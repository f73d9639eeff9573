//! Bounded-variable primal simplex with Bland's anti-cycling rule.
//!
//! Two phases: slack/artificial start, minimize infeasibility, then maximize
//! the real objective with artificials pinned to zero. Nonbasic variables sit
//! on a bound; the ratio test admits bound flips as well as basis exchanges.
//! Entering and leaving choices always take the smallest eligible variable
//! index, so runs are fully deterministic for a given problem.

use super::{LpProblem, LpSolution, LpStatus, Sense};

pub const DEFAULT_TOLERANCE: f64 = 1e-7;
pub const DEFAULT_MAX_ITERATIONS: usize = 50_000;

/// Entries this small are treated as structural zeros in pivots and ratios.
const PIVOT_EPS: f64 = 1e-9;

#[derive(Clone, Copy, PartialEq, Eq)]
enum VarState {
    AtLower,
    AtUpper,
    Basic,
}

pub fn solve_lp(problem: &LpProblem) -> LpSolution {
    solve_lp_with(problem, DEFAULT_TOLERANCE, DEFAULT_MAX_ITERATIONS)
}

pub fn solve_lp_with(problem: &LpProblem, tolerance: f64, max_iterations: usize) -> LpSolution {
    let n_struct = problem.variables.len();
    assert_eq!(
        problem.objective.len(),
        n_struct,
        "objective length must match variable count"
    );
    for (j, v) in problem.variables.iter().enumerate() {
        assert!(
            v.lower.is_finite() && v.upper.is_finite() && v.lower <= v.upper,
            "variable {j} ({}) needs finite ordered bounds, got [{}, {}]",
            v.name,
            v.lower,
            v.upper
        );
    }
    for (i, row) in problem.rows.iter().enumerate() {
        assert!(row.rhs.is_finite(), "row {i} rhs must be finite");
        for &(j, c) in &row.terms {
            assert!(j < n_struct, "row {i} references variable {j} of {n_struct}");
            assert!(c.is_finite(), "row {i} coefficient for variable {j} not finite");
        }
    }

    let m = problem.rows.len();
    let n_slack = problem
        .rows
        .iter()
        .filter(|r| r.sense == Sense::Le)
        .count();

    // Nonbasic structurals start at their lower bound.
    let x0: Vec<f64> = problem.variables.iter().map(|v| v.lower).collect();
    let resid: Vec<f64> = problem
        .rows
        .iter()
        .map(|row| row.rhs - row.terms.iter().map(|&(j, c)| c * x0[j]).sum::<f64>())
        .collect();

    // Column map: structurals, then slacks, then artificials.
    let mut slack_col = vec![usize::MAX; m];
    let mut next = n_struct;
    for (i, row) in problem.rows.iter().enumerate() {
        if row.sense == Sense::Le {
            slack_col[i] = next;
            next += 1;
        }
    }
    let mut art_col = vec![usize::MAX; m];
    for (i, row) in problem.rows.iter().enumerate() {
        let needs_artificial = match row.sense {
            Sense::Eq => true,
            Sense::Le => resid[i] < 0.0,
        };
        if needs_artificial {
            art_col[i] = next;
            next += 1;
        }
    }
    let n_total = next;
    let n_art = n_total - n_struct - n_slack;

    let mut lower = vec![0.0; n_total];
    let mut upper = vec![f64::INFINITY; n_total];
    for (j, v) in problem.variables.iter().enumerate() {
        lower[j] = v.lower;
        upper[j] = v.upper;
    }

    let mut t = vec![0.0; m * n_total];
    let mut basis = vec![usize::MAX; m];
    let mut x_b = vec![0.0; m];
    let mut state = vec![VarState::AtLower; n_total];
    for i in 0..m {
        let row = &problem.rows[i];
        let tr = &mut t[i * n_total..(i + 1) * n_total];
        for &(j, c) in &row.terms {
            tr[j] += c;
        }
        if slack_col[i] != usize::MAX {
            tr[slack_col[i]] = 1.0;
        }
        if art_col[i] == usize::MAX {
            // Feasible slack start.
            basis[i] = slack_col[i];
            x_b[i] = resid[i];
        } else {
            let sigma = if resid[i] < 0.0 { -1.0 } else { 1.0 };
            tr[art_col[i]] = sigma;
            // Row scaled so the basic column carries +1; the basis matrix is
            // then the identity and the tableau already equals B^-1 A.
            if sigma < 0.0 {
                for v in tr.iter_mut() {
                    *v = -*v;
                }
            }
            basis[i] = art_col[i];
            x_b[i] = resid[i].abs();
        }
        state[basis[i]] = VarState::Basic;
    }

    let mut cost = vec![0.0; n_total];
    let mut iterations_left = max_iterations;
    let extract = |state: &[VarState],
                   basis: &[usize],
                   x_b: &[f64],
                   lower: &[f64],
                   upper: &[f64]| {
        let mut values = vec![0.0; n_struct];
        for j in 0..n_struct {
            values[j] = match state[j] {
                VarState::AtLower => lower[j],
                VarState::AtUpper => upper[j],
                VarState::Basic => {
                    let row = basis.iter().position(|&b| b == j).unwrap();
                    x_b[row]
                }
            };
        }
        values
    };

    if n_art > 0 {
        for i in 0..m {
            if art_col[i] != usize::MAX {
                cost[art_col[i]] = -1.0;
            }
        }
        let finished = iterate(
            &mut t, &mut x_b, &mut basis, &mut state, &lower, &upper, &cost, n_total, m, tolerance,
            &mut iterations_left,
        );
        if !finished {
            let values = extract(&state, &basis, &x_b, &lower, &upper);
            let objective = problem.objective_value(&values);
            return LpSolution {
                status: LpStatus::IterationLimit,
                objective,
                values,
            };
        }
        let infeasibility: f64 = (0..m)
            .filter(|&i| art_col[i] != usize::MAX && basis[i] == art_col[i])
            .map(|i| x_b[i].max(0.0))
            .sum();
        if infeasibility > tolerance * 10.0 {
            let values = extract(&state, &basis, &x_b, &lower, &upper);
            let objective = problem.objective_value(&values);
            return LpSolution {
                status: LpStatus::Infeasible,
                objective,
                values,
            };
        }
        // Drive leftover degenerate artificials out of the basis where a
        // nonzero pivot exists; redundant rows keep theirs, pinned at zero.
        for i in 0..m {
            if art_col[i] == usize::MAX || basis[i] != art_col[i] {
                continue;
            }
            let tr_start = i * n_total;
            let mut pivot_col = None;
            for j in 0..n_struct + n_slack {
                if state[j] != VarState::Basic && t[tr_start + j].abs() > 1e-7 {
                    pivot_col = Some(j);
                    break;
                }
            }
            if let Some(q) = pivot_col {
                let old = basis[i];
                let entering_value = match state[q] {
                    VarState::AtLower => lower[q],
                    VarState::AtUpper => upper[q],
                    VarState::Basic => unreachable!(),
                };
                // Degenerate exchange at step zero; the reduced-cost row is
                // rebuilt for phase 2, so none is maintained here.
                pivot(&mut t, n_total, m, i, q, &mut Vec::new());
                state[old] = VarState::AtLower;
                state[q] = VarState::Basic;
                basis[i] = q;
                x_b[i] = entering_value;
            }
        }
        for i in 0..m {
            if art_col[i] != usize::MAX {
                let col = art_col[i];
                upper[col] = 0.0;
                lower[col] = 0.0;
            }
        }
    }

    cost.iter_mut().for_each(|c| *c = 0.0);
    cost[..n_struct].copy_from_slice(&problem.objective);
    let finished = iterate(
        &mut t, &mut x_b, &mut basis, &mut state, &lower, &upper, &cost, n_total, m, tolerance,
        &mut iterations_left,
    );
    let values = extract(&state, &basis, &x_b, &lower, &upper);
    let objective = problem.objective_value(&values);
    LpSolution {
        status: if finished {
            LpStatus::Optimal
        } else {
            LpStatus::IterationLimit
        },
        objective,
        values,
    }
}

/// Runs simplex passes until optimal for the current cost vector. Returns
/// false if the iteration budget ran out.
#[allow(clippy::too_many_arguments)]
fn iterate(
    t: &mut [f64],
    x_b: &mut [f64],
    basis: &mut [usize],
    state: &mut [VarState],
    lower: &[f64],
    upper: &[f64],
    cost: &[f64],
    n_total: usize,
    m: usize,
    tolerance: f64,
    iterations_left: &mut usize,
) -> bool {
    // Reduced costs d = c - c_B^T B^-1 A over the current basis. Rebuilt
    // periodically to shed incremental-update drift.
    let refresh = |t: &[f64], basis: &[usize]| {
        let mut d: Vec<f64> = cost.to_vec();
        for i in 0..m {
            let cb = cost[basis[i]];
            if cb != 0.0 {
                let tr = &t[i * n_total..(i + 1) * n_total];
                for (dj, &tij) in d.iter_mut().zip(tr) {
                    *dj -= cb * tij;
                }
            }
        }
        d
    };
    let mut d = refresh(t, basis);
    let mut since_refresh = 0usize;

    loop {
        if *iterations_left == 0 {
            return false;
        }
        *iterations_left -= 1;
        since_refresh += 1;
        if since_refresh >= 512 {
            d = refresh(t, basis);
            since_refresh = 0;
        }

        // Entering: smallest index whose reduced cost improves the objective.
        let mut entering = None;
        for j in 0..n_total {
            match state[j] {
                VarState::Basic => continue,
                VarState::AtLower | VarState::AtUpper => {
                    if upper[j] - lower[j] <= 0.0 {
                        continue;
                    }
                    let improving = match state[j] {
                        VarState::AtLower => d[j] > tolerance,
                        VarState::AtUpper => d[j] < -tolerance,
                        VarState::Basic => unreachable!(),
                    };
                    if improving {
                        entering = Some(j);
                        break;
                    }
                }
            }
        }
        let Some(q) = entering else {
            return true;
        };
        let dir = if state[q] == VarState::AtLower { 1.0 } else { -1.0 };

        // Ratio test: the entering variable moves by step >= 0 along dir until
        // it hits its own far bound or drives a basic variable to a bound.
        let mut step = upper[q] - lower[q]; // may be infinite
        let mut leave_row: Option<usize> = None;
        for i in 0..m {
            let yi = t[i * n_total + q];
            if yi.abs() <= PIVOT_EPS {
                continue;
            }
            let move_rate = dir * yi;
            let b = basis[i];
            let cap = if move_rate > 0.0 {
                (x_b[i] - lower[b]).max(0.0) / move_rate
            } else if upper[b].is_finite() {
                (upper[b] - x_b[i]).max(0.0) / -move_rate
            } else {
                continue;
            };
            let better = match leave_row {
                None => cap < step,
                Some(r) => cap < step || (cap == step && b < basis[r]),
            };
            if better {
                step = cap;
                leave_row = Some(i);
            }
        }

        match leave_row {
            None => {
                assert!(
                    step.is_finite(),
                    "objective unbounded; box-bounded problems cannot reach this"
                );
                // Bound flip: q crosses to its opposite bound, basis unchanged.
                for i in 0..m {
                    let yi = t[i * n_total + q];
                    if yi.abs() > PIVOT_EPS {
                        x_b[i] -= step * dir * yi;
                    }
                }
                state[q] = if state[q] == VarState::AtLower {
                    VarState::AtUpper
                } else {
                    VarState::AtLower
                };
            }
            Some(r) => {
                let entering_value = if dir > 0.0 {
                    lower[q] + step
                } else {
                    upper[q] - step
                };
                for i in 0..m {
                    if i != r {
                        let yi = t[i * n_total + q];
                        if yi.abs() > PIVOT_EPS {
                            x_b[i] -= step * dir * yi;
                        }
                    }
                }
                let leaving = basis[r];
                let y_r = t[r * n_total + q];
                state[leaving] = if dir * y_r > 0.0 {
                    VarState::AtLower
                } else {
                    VarState::AtUpper
                };
                state[q] = VarState::Basic;
                basis[r] = q;
                x_b[r] = entering_value;
                pivot(t, n_total, m, r, q, &mut d);
            }
        }
    }
}

/// Gauss-Jordan pivot on (row, col): scales the pivot row to unit and
/// eliminates the column elsewhere, including from the reduced-cost row when
/// one is supplied.
fn pivot(t: &mut [f64], n_total: usize, m: usize, row: usize, col: usize, d: &mut Vec<f64>) {
    let piv = t[row * n_total + col];
    debug_assert!(piv.abs() > PIVOT_EPS, "pivot {piv} too small");
    let inv = 1.0 / piv;
    let row_start = row * n_total;
    for j in 0..n_total {
        t[row_start + j] *= inv;
    }
    t[row_start + col] = 1.0;
    for i in 0..m {
        if i == row {
            continue;
        }
        let factor = t[i * n_total + col];
        if factor == 0.0 {
            continue;
        }
        let (before, rest) = t.split_at_mut(row_start.max(i * n_total));
        let (pivot_row, other_row) = if i < row {
            (&rest[..n_total], &mut before[i * n_total..i * n_total + n_total])
        } else {
            (&before[row_start..row_start + n_total], &mut rest[..n_total])
        };
        for j in 0..n_total {
            other_row[j] -= factor * pivot_row[j];
        }
        other_row[col] = 0.0;
    }
    if !d.is_empty() {
        let factor = d[col];
        if factor != 0.0 {
            let pivot_row = &t[row_start..row_start + n_total];
            for j in 0..n_total {
                d[j] -= factor * pivot_row[j];
            }
            d[col] = 0.0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::routing::{ConstraintFamily, ConstraintRow, LpVariable};

    fn var(name: &str, lower: f64, upper: f64) -> LpVariable {
        LpVariable {
            name: name.into(),
            lower,
            upper,
        }
    }

    fn le(terms: Vec<(usize, f64)>, rhs: f64) -> ConstraintRow {
        ConstraintRow {
            terms,
            sense: Sense::Le,
            rhs,
            family: ConstraintFamily::ArcCapacity,
        }
    }

    fn eq(terms: Vec<(usize, f64)>, rhs: f64) -> ConstraintRow {
        ConstraintRow {
            terms,
            sense: Sense::Eq,
            rhs,
            family: ConstraintFamily::FlowConservation,
        }
    }

    #[test]
    fn maximizes_simple_product_mix() {
        // max 3a + 5b, a <= 4, 2b <= 12, 3a + 2b <= 18 — classic, opt 36 at (2, 6).
        let lp = LpProblem {
            variables: vec![var("a", 0.0, 100.0), var("b", 0.0, 100.0)],
            objective: vec![3.0, 5.0],
            rows: vec![
                le(vec![(0, 1.0)], 4.0),
                le(vec![(1, 2.0)], 12.0),
                le(vec![(0, 3.0), (1, 2.0)], 18.0),
            ],
        };
        let sol = solve_lp(&lp);
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective - 36.0).abs() < 1e-9);
        assert!((sol.values[0] - 2.0).abs() < 1e-9);
        assert!((sol.values[1] - 6.0).abs() < 1e-9);
    }

    #[test]
    fn upper_bounds_bind_without_rows() {
        let lp = LpProblem {
            variables: vec![var("a", 0.0, 2.5), var("b", 1.0, 3.0)],
            objective: vec![1.0, 2.0],
            rows: vec![],
        };
        let sol = solve_lp(&lp);
        assert_eq!(sol.status, LpStatus::Optimal);
        assert_eq!(sol.values, vec![2.5, 3.0]);
        assert!((sol.objective - 8.5).abs() < 1e-12);
    }

    #[test]
    fn equality_rows_honored() {
        // max a + b st a + b = 3, a - b = 1 -> a = 2, b = 1.
        let lp = LpProblem {
            variables: vec![var("a", 0.0, 10.0), var("b", 0.0, 10.0)],
            objective: vec![1.0, 1.0],
            rows: vec![
                eq(vec![(0, 1.0), (1, 1.0)], 3.0),
                eq(vec![(0, 1.0), (1, -1.0)], 1.0),
            ],
        };
        let sol = solve_lp(&lp);
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.values[0] - 2.0).abs() < 1e-9);
        assert!((sol.values[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn detects_infeasible_system() {
        // a + b = 5 with a, b <= 2 cannot hold.
        let lp = LpProblem {
            variables: vec![var("a", 0.0, 2.0), var("b", 0.0, 2.0)],
            objective: vec![1.0, 0.0],
            rows: vec![eq(vec![(0, 1.0), (1, 1.0)], 5.0)],
        };
        let sol = solve_lp(&lp);
        assert_eq!(sol.status, LpStatus::Infeasible);
    }

    #[test]
    fn negative_rhs_le_row_needs_phase_one() {
        // -a <= -3 i.e. a >= 3; maximize -a -> a = 3.
        let lp = LpProblem {
            variables: vec![var("a", 0.0, 10.0)],
            objective: vec![-1.0],
            rows: vec![le(vec![(0, -1.0)], -3.0)],
        };
        let sol = solve_lp(&lp);
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.values[0] - 3.0).abs() < 1e-9);
    }

    #[test]
    fn degenerate_vertices_terminate() {
        // Highly degenerate: many redundant rows through the same vertex.
        let lp = LpProblem {
            variables: vec![var("a", 0.0, 1.0), var("b", 0.0, 1.0)],
            objective: vec![1.0, 1.0],
            rows: vec![
                le(vec![(0, 1.0), (1, 1.0)], 1.0),
                le(vec![(0, 2.0), (1, 2.0)], 2.0),
                le(vec![(0, 1.0), (1, 2.0)], 1.0),
                le(vec![(0, 2.0), (1, 1.0)], 2.0),
                eq(vec![(1, 1.0), (1, 0.0)], 0.0),
            ],
        };
        let sol = solve_lp(&lp);
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective - 1.0).abs() < 1e-9);
        assert!((sol.values[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn iteration_limit_reports_best_known() {
        let lp = LpProblem {
            variables: vec![var("a", 0.0, 4.0), var("b", 0.0, 4.0)],
            objective: vec![1.0, 1.0],
            rows: vec![le(vec![(0, 1.0), (1, 1.0)], 6.0)],
        };
        let sol = solve_lp_with(&lp, 1e-7, 1);
        assert_eq!(sol.status, LpStatus::IterationLimit);
        assert!(sol.objective <= 6.0 + 1e-9);
    }

    #[test]
    fn feasible_solutions_respect_rows_and_bounds() {
        let lp = LpProblem {
            variables: vec![
                var("a", 0.0, 3.0),
                var("b", 0.5, 2.0),
                var("c", 0.0, 9.0),
            ],
            objective: vec![2.0, -1.0, 1.0],
            rows: vec![
                le(vec![(0, 1.0), (1, 1.0), (2, 1.0)], 5.0),
                eq(vec![(0, 1.0), (2, -1.0)], 0.0),
                le(vec![(1, -2.0), (2, 1.0)], 1.0),
            ],
        };
        let sol = solve_lp(&lp);
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!(lp.max_violation(&sol.values) < 1e-7);
        // a = c from the equality, so max 3a - b with 2a + b <= 5 and
        // a <= 1 + 2b. Both bind at b = 0.6, a = c = 2.2: obj 6.6 - 0.6 = 6.
        assert!((sol.objective - 6.0).abs() < 1e-7, "got {}", sol.objective);
    }

    #[test]
    fn deterministic_across_runs() {
        let lp = LpProblem {
            variables: (0..6).map(|i| var(&format!("v{i}"), 0.0, 5.0)).collect(),
            objective: vec![1.0, 2.0, 3.0, 1.0, 2.0, 3.0],
            rows: vec![
                le(vec![(0, 1.0), (1, 1.0), (2, 1.0)], 7.0),
                le(vec![(3, 1.0), (4, 1.0), (5, 1.0)], 7.0),
                eq(vec![(0, 1.0), (3, -1.0)], 0.0),
                le(vec![(1, 2.0), (4, 2.0)], 9.0),
            ],
        };
        let a = solve_lp(&lp);
        let b = solve_lp(&lp);
        assert_eq!(a.status, b.status);
        assert_eq!(a.values, b.values);
        let bits_a: Vec<u64> = a.values.iter().map(|v| v.to_bits()).collect();
        let bits_b: Vec<u64> = b.values.iter().map(|v| v.to_bits()).collect();
        assert_eq!(bits_a, bits_b);
    }
}
