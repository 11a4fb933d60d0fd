//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use qcmc_core::lp::{Direction, Sense, SimplexProblem, Status};

/// Solves a small dense system by Gaussian elimination with partial
/// pivoting; `None` when (numerically) singular.
pub fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-10 {
            return None;
        }
        a.swap(piv, col);
        b.swap(piv, col);
        for r in 0..n {
            if r != col {
                let f = a[r][col] / a[col][col];
                if f != 0.0 {
                    for k in col..n {
                        a[r][k] -= f * a[col][k];
                    }
                    b[r] -= f * b[col];
                }
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

/// Best objective over basic feasible points of `problem` with each
/// variable additionally capped at `cap`; `None` if no feasible vertex.
fn boxed_vertex_optimum(problem: &SimplexProblem, cap: f64) -> Option<f64> {
    let n = problem.variables();
    // every constraint as g·x ≤ h
    let mut rows: Vec<(Vec<f64>, f64)> = Vec::new();
    for i in 0..problem.constraints() {
        let s = if problem.direction == Direction::LessEq { 1.0 } else { -1.0 };
        rows.push((problem.row(i).iter().map(|a| s * a).collect(), s * problem.rhs[i]));
    }
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = -1.0;
        rows.push((e.clone(), 0.0));
        e[j] = 1.0;
        rows.push((e, cap));
    }
    let sign = if problem.sense == Sense::Max { 1.0 } else { -1.0 };
    let mut best: Option<f64> = None;
    let total = rows.len();
    let mut pick: Vec<usize> = (0..n).collect();
    loop {
        let a: Vec<Vec<f64>> = pick.iter().map(|&i| rows[i].0.clone()).collect();
        let b: Vec<f64> = pick.iter().map(|&i| rows[i].1).collect();
        if let Some(x) = solve_dense(a, b) {
            let feasible = rows
                .iter()
                .all(|(g, h)| g.iter().zip(&x).map(|(p, q)| p * q).sum::<f64>() <= h + 1e-7 * (1.0 + h.abs()));
            if feasible {
                let v = sign * problem.objective_value(&x);
                best = Some(best.map_or(v, |b: f64| b.max(v)));
            }
        }
        // next n-combination of 0..total
        let mut i = n;
        loop {
            if i == 0 {
                return best.map(|b| sign * b);
            }
            i -= 1;
            if pick[i] < total - n + i {
                pick[i] += 1;
                for k in i + 1..n {
                    pick[k] = pick[k - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Status and optimum by vertex enumeration. Unboundedness is detected by
/// the boxed optimum growing when the box doubles.
pub fn vertex_oracle(problem: &SimplexProblem) -> (Status, f64) {
    let cap = 1e4;
    match boxed_vertex_optimum(problem, cap) {
        None => (Status::Infeasible, f64::NAN),
        Some(v) => {
            let v2 = boxed_vertex_optimum(problem, 2.0 * cap).unwrap();
            if (v2 - v).abs() > 1e-6 * (1.0 + v.abs()) {
                (Status::Unbounded, f64::NAN)
            } else {
                (Status::Optimal, v)
            }
        }
    }
}
