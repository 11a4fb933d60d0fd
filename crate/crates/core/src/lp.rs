//! Dense tableau simplex with Bland's rule.
//!
//! Problems are stated in the symmetric form `max|min c·x` subject to
//! `A x ≤ b` (or `≥ b` for every row) and `x ≥ 0`. A first phase on
//! artificial variables is run only when some right-hand side has the
//! wrong sign for a slack basis.

use crate::error::{Error, Result};

/// Pivot and feasibility tolerance.
pub const PIVOT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Max,
    Min,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    LessEq,
    GreaterEq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexProblem {
    pub sense: Sense,
    pub direction: Direction,
    pub objective: Vec<f64>,
    /// Row-major `rows × objective.len()`.
    pub matrix: Vec<f64>,
    pub rhs: Vec<f64>,
}

impl SimplexProblem {
    pub fn new(sense: Sense, direction: Direction, objective: Vec<f64>, rows: &[Vec<f64>], rhs: Vec<f64>) -> Result<Self> {
        let n = objective.len();
        if rows.len() != rhs.len() {
            return Err(Error::DimensionMismatch { expected: rows.len(), got: rhs.len() });
        }
        let mut matrix = Vec::with_capacity(rows.len() * n);
        for r in rows {
            if r.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: r.len() });
            }
            matrix.extend_from_slice(r);
        }
        let p = Self { sense, direction, objective, matrix, rhs };
        p.validate()?;
        Ok(p)
    }

    pub fn variables(&self) -> usize {
        self.objective.len()
    }

    pub fn constraints(&self) -> usize {
        self.rhs.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.variables();
        &self.matrix[i * n..(i + 1) * n]
    }

    pub fn validate(&self) -> Result<()> {
        if self.matrix.len() != self.variables() * self.constraints() {
            return Err(Error::DimensionMismatch {
                expected: self.variables() * self.constraints(),
                got: self.matrix.len(),
            });
        }
        let all = self.objective.iter().chain(&self.matrix).chain(&self.rhs);
        if all.into_iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("linear program data".into()));
        }
        Ok(())
    }

    /// Largest violation of `A x (dir) b` and `x ≥ 0`.
    pub fn violation(&self, x: &[f64]) -> f64 {
        let mut worst = x.iter().fold(0.0f64, |w, &v| w.max(-v));
        for i in 0..self.constraints() {
            let ax: f64 = self.row(i).iter().zip(x).map(|(a, v)| a * v).sum();
            let gap = match self.direction {
                Direction::LessEq => ax - self.rhs[i],
                Direction::GreaterEq => self.rhs[i] - ax,
            };
            worst = worst.max(gap);
        }
        worst
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Optimal,
    Unbounded,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexOutcome {
    pub status: Status,
    /// Primal solution (meaningful when optimal).
    pub x: Vec<f64>,
    /// Dual solution with `b·y` equal to the optimum.
    pub y: Vec<f64>,
    pub objective: f64,
    pub pivots: usize,
}

struct Tableau {
    rows: usize,
    cols: usize,
    /// `(rows + 1) × (cols + 1)`; the last row is the objective row holding
    /// `z_j - c_j`, the last column the right-hand side.
    t: Vec<f64>,
    basis: Vec<usize>,
    pivots: usize,
    #[cfg(debug_assertions)]
    seen: std::collections::HashSet<Vec<usize>>,
}

impl Tableau {
    fn at(&self, r: usize, c: usize) -> f64 {
        self.t[r * (self.cols + 1) + c]
    }

    fn rhs(&self, r: usize) -> f64 {
        self.at(r, self.cols)
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let w = self.cols + 1;
        let p = self.at(pr, pc);
        for c in 0..w {
            self.t[pr * w + c] /= p;
        }
        let (before, rest) = self.t.split_at_mut(pr * w);
        let (prow, after) = rest.split_at_mut(w);
        for row in before.chunks_exact_mut(w).chain(after.chunks_exact_mut(w)) {
            let f = row[pc];
            if f != 0.0 {
                for (x, &p) in row.iter_mut().zip(prow.iter()) {
                    *x -= f * p;
                }
                row[pc] = 0.0;
            }
        }
        self.basis[pr] = pc;
        self.pivots += 1;
        #[cfg(debug_assertions)]
        {
            let mut b = self.basis.clone();
            b.sort_unstable();
            // Bland's rule never revisits a basis within one phase
            assert!(self.seen.insert(b), "simplex basis repeated");
        }
    }

    /// Runs simplex on the current objective row over columns allowed by
    /// `eligible`. Returns `false` if unbounded.
    fn optimize(&mut self, eligible: impl Fn(usize) -> bool, limit: usize) -> Result<bool> {
        #[cfg(debug_assertions)]
        self.seen.clear();
        loop {
            if self.pivots >= limit {
                return Err(Error::IterationLimit(limit));
            }
            let obj = self.rows;
            let Some(pc) = (0..self.cols).find(|&c| eligible(c) && self.at(obj, c) < -PIVOT_TOL) else {
                return Ok(true);
            };
            let mut best: Option<(usize, f64)> = None;
            for r in 0..self.rows {
                let a = self.at(r, pc);
                if a > PIVOT_TOL {
                    let ratio = self.rhs(r) / a;
                    best = match best {
                        None => Some((r, ratio)),
                        Some((br, bv)) => {
                            if ratio < bv - PIVOT_TOL * bv.abs().max(1.0)
                                || (ratio <= bv + PIVOT_TOL * bv.abs().max(1.0) && self.basis[r] < self.basis[br])
                            {
                                Some((r, ratio))
                            } else {
                                Some((br, bv))
                            }
                        }
                    };
                }
            }
            match best {
                None => return Ok(false),
                Some((pr, _)) => self.pivot(pr, pc),
            }
        }
    }
}

/// Solves `problem`; infeasible and unbounded outcomes are statuses, not
/// errors.
pub fn solve(problem: &SimplexProblem) -> Result<SimplexOutcome> {
    problem.validate()?;
    let n = problem.variables();
    let m = problem.constraints();

    // canonical form: max c̃·x, Ã x ≤ b̃
    let obj_sign = if problem.sense == Sense::Max { 1.0 } else { -1.0 };
    let row_sign = if problem.direction == Direction::LessEq { 1.0 } else { -1.0 };
    // rows with negative b̃ are negated and get an artificial variable
    let flips: Vec<f64> = problem.rhs.iter().map(|&b| if row_sign * b < 0.0 { -1.0 } else { 1.0 }).collect();
    let artificial_rows: Vec<usize> = (0..m).filter(|&i| flips[i] < 0.0).collect();
    let k = artificial_rows.len();
    let cols = n + m + k;
    let w = cols + 1;
    let mut t = vec![0.0; (m + 1) * w];
    let mut basis = vec![0; m];
    for i in 0..m {
        let s = row_sign * flips[i];
        for j in 0..n {
            t[i * w + j] = s * problem.row(i)[j];
        }
        t[i * w + n + i] = flips[i];
        t[i * w + cols] = s * problem.rhs[i];
        basis[i] = n + i;
    }
    for (a, &i) in artificial_rows.iter().enumerate() {
        t[i * w + n + m + a] = 1.0;
        basis[i] = n + m + a;
    }
    let mut tab = Tableau {
        rows: m,
        cols,
        t,
        basis,
        pivots: 0,
        #[cfg(debug_assertions)]
        seen: Default::default(),
    };
    let limit = 50_000 + 200 * (m + cols);

    if k > 0 {
        // phase one: minimize the artificial sum, i.e. objective row
        // entries z_j - c_j for max(-Σ art)
        let obj = m * w;
        for &i in &artificial_rows {
            for c in 0..w {
                tab.t[obj + c] -= tab.t[i * w + c];
            }
        }
        for a in 0..k {
            tab.t[obj + n + m + a] = 0.0;
        }
        tab.optimize(|_| true, limit)?;
        // the objective row holds -Σ artificials
        let scale = 1.0 + problem.rhs.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        if -tab.rhs(m) > PIVOT_TOL * scale {
            return Ok(SimplexOutcome {
                status: Status::Infeasible,
                x: vec![0.0; n],
                y: vec![0.0; m],
                objective: f64::NAN,
                pivots: tab.pivots,
            });
        }
        // drive remaining artificials out of the basis where possible
        for r in 0..m {
            if tab.basis[r] >= n + m {
                if let Some(c) = (0..n + m).find(|&c| tab.at(r, c).abs() > PIVOT_TOL) {
                    tab.pivot(r, c);
                }
            }
        }
    }

    // phase two objective row: z_j - c_j = c_B B⁻¹ a_j - c_j
    let obj = m * w;
    for c in 0..w {
        tab.t[obj + c] = 0.0;
    }
    for j in 0..n {
        tab.t[obj + j] = -obj_sign * problem.objective[j];
    }
    for r in 0..m {
        let b = tab.basis[r];
        if b < n {
            let cb = obj_sign * problem.objective[b];
            if cb != 0.0 {
                for c in 0..w {
                    tab.t[obj + c] += cb * tab.t[r * w + c];
                }
            }
        }
    }
    let bounded = tab.optimize(|c| c < n + m, limit)?;
    let mut x = vec![0.0; n];
    for r in 0..m {
        if tab.basis[r] < n {
            x[tab.basis[r]] = tab.rhs(r);
        }
    }
    if !bounded {
        return Ok(SimplexOutcome {
            status: Status::Unbounded,
            x,
            y: vec![0.0; m],
            objective: obj_sign * f64::INFINITY,
            pivots: tab.pivots,
        });
    }
    // dual of the canonical form from the slack columns, mapped back to the
    // caller's sense and direction
    let dual_sign = obj_sign * row_sign;
    let y: Vec<f64> = (0..m).map(|i| dual_sign * tab.at(m, n + i)).collect();
    Ok(SimplexOutcome {
        status: Status::Optimal,
        objective: problem.objective_value(&x),
        x,
        y,
        pivots: tab.pivots,
    })
}

/// Solution of `min Σz` subject to `A z ≥ ε`, `z ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualRealization {
    pub z: Vec<f64>,
    /// Optimal multipliers of the dual `max ε Σt` subject to `Aᵀt ≤ 1`.
    pub t: Vec<f64>,
    pub objective: f64,
}

/// Solves the feasibility program `A z ≥ ε, z ≥ 0` (minimizing `Σz`) through
/// its dual, whose origin is feasible, and reads `z` from the dual's final
/// tableau. An unbounded dual means the system has no solution.
pub fn realize_via_dual(rows: &[Vec<f64>], epsilon: f64) -> Result<DualRealization> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidConfig(format!("epsilon must be positive, got {epsilon}")));
    }
    let k = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != m) {
        return Err(Error::DimensionMismatch { expected: m, got: rows.iter().map(Vec::len).find(|&l| l != m).unwrap() });
    }
    // Aᵀ: m rows, k columns
    let transposed: Vec<Vec<f64>> = (0..m).map(|j| rows.iter().map(|r| r[j]).collect()).collect();
    let dual = SimplexProblem::new(Sense::Max, Direction::LessEq, vec![epsilon; k], &transposed, vec![1.0; m])?;
    let out = solve(&dual)?;
    match out.status {
        Status::Optimal => Ok(DualRealization {
            z: out.y,
            t: out.x,
            objective: out.objective,
        }),
        Status::Unbounded => Err(Error::Infeasible("dual unbounded: the sign constraints admit no solution".into())),
        Status::Infeasible => unreachable!("origin is feasible for the dual"),
    }
}

/// Parses the small text format used by the `lp solve` command:
///
/// ```text
/// sense max
/// direction <=
/// c 3 2
/// row 1 1 4      # coefficients followed by the right-hand side
/// row 1 3 6
/// ```
pub fn parse_lp_text(text: &str) -> Result<SimplexProblem> {
    let mut sense = None;
    let mut direction = None;
    let mut c: Option<Vec<f64>> = None;
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        let nums = |ts: &[&str]| -> Result<Vec<f64>> {
            ts.iter()
                .map(|t| t.parse::<f64>().map_err(|_| Error::Parse { line: ln, msg: format!("bad number {t:?}") }))
                .collect()
        };
        match (toks[0], toks.len()) {
            ("sense", 2) => {
                sense = Some(match toks[1] {
                    "max" => Sense::Max,
                    "min" => Sense::Min,
                    s => return Err(Error::Parse { line: ln, msg: format!("sense must be max or min, got {s:?}") }),
                })
            }
            ("direction", 2) => {
                direction = Some(match toks[1] {
                    "<=" => Direction::LessEq,
                    ">=" => Direction::GreaterEq,
                    s => return Err(Error::Parse { line: ln, msg: format!("direction must be <= or >=, got {s:?}") }),
                })
            }
            ("c", _) => c = Some(nums(&toks[1..])?),
            ("row", l) if l >= 3 => {
                let v = nums(&toks[1..])?;
                rhs.push(*v.last().unwrap());
                rows.push(v[..v.len() - 1].to_vec());
            }
            (kw, _) => return Err(Error::Parse { line: ln, msg: format!("unexpected line starting with {kw:?}") }),
        }
    }
    let c = c.ok_or(Error::Parse { line: 0, msg: "missing objective line `c ...`".into() })?;
    SimplexProblem::new(
        sense.unwrap_or(Sense::Max),
        direction.unwrap_or(Direction::LessEq),
        c,
        &rows,
        rhs,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(sense: Sense, dir: Direction, c: &[f64], rows: &[&[f64]], b: &[f64]) -> SimplexProblem {
        let rows: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
        SimplexProblem::new(sense, dir, c.to_vec(), &rows, b.to_vec()).unwrap()
    }

    fn assert_duality(prob: &SimplexProblem, out: &SimplexOutcome) {
        let dual: f64 = prob.rhs.iter().zip(&out.y).map(|(b, y)| b * y).sum();
        assert!((dual - out.objective).abs() < 1e-8, "primal {} dual {dual}", out.objective);
        assert!(prob.violation(&out.x) < 1e-8);
    }

    #[test]
    fn one_variable() {
        let prob = p(Sense::Max, Direction::LessEq, &[1.0], &[&[1.0]], &[1.0]);
        let out = solve(&prob).unwrap();
        assert_eq!(out.status, Status::Optimal);
        assert_eq!(out.x, vec![1.0]);
        assert_eq!(out.objective, 1.0);
        assert_duality(&prob, &out);
    }

    #[test]
    fn two_variable_vertex() {
        let prob = p(Sense::Max, Direction::LessEq, &[3.0, 2.0], &[&[1.0, 1.0], &[1.0, 3.0]], &[4.0, 6.0]);
        let out = solve(&prob).unwrap();
        assert_eq!(out.status, Status::Optimal);
        assert_eq!(out.x, vec![4.0, 0.0]);
        assert_eq!(out.objective, 12.0);
        assert_duality(&prob, &out);
        assert_eq!(out.y, vec![3.0, 0.0]);
    }

    #[test]
    fn unbounded() {
        let prob = p(Sense::Max, Direction::LessEq, &[1.0], &[&[-1.0]], &[1.0]);
        assert_eq!(solve(&prob).unwrap().status, Status::Unbounded);
    }

    #[test]
    fn infeasible_needs_phase_one() {
        // x ≥ 2 and x ≤ 1
        let prob = p(Sense::Max, Direction::LessEq, &[1.0], &[&[-1.0], &[1.0]], &[-2.0, 1.0]);
        assert_eq!(solve(&prob).unwrap().status, Status::Infeasible);
    }

    #[test]
    fn min_with_greater_rows() {
        // min x + y s.t. x + 2y ≥ 2, 3x + y ≥ 3 → (4/5, 3/5), objective 7/5
        let prob = p(Sense::Min, Direction::GreaterEq, &[1.0, 1.0], &[&[1.0, 2.0], &[3.0, 1.0]], &[2.0, 3.0]);
        let out = solve(&prob).unwrap();
        assert_eq!(out.status, Status::Optimal);
        assert!((out.objective - 1.4).abs() < 1e-12);
        assert!(out.y.iter().all(|&y| y >= -1e-12));
        assert_duality(&prob, &out);
    }

    #[test]
    fn max_with_greater_rows_and_min_with_less_rows() {
        let prob = p(Sense::Max, Direction::GreaterEq, &[-1.0, -2.0], &[&[1.0, 1.0]], &[3.0]);
        let out = solve(&prob).unwrap();
        assert!((out.objective + 3.0).abs() < 1e-12);
        assert_duality(&prob, &out);
        let prob = p(Sense::Min, Direction::LessEq, &[-1.0, -1.0], &[&[1.0, 2.0], &[2.0, 1.0]], &[4.0, 4.0]);
        let out = solve(&prob).unwrap();
        assert!((out.objective + 8.0 / 3.0).abs() < 1e-12);
        assert_duality(&prob, &out);
    }

    #[test]
    fn degenerate_cycling_example() {
        // Beale's example cycles under the textbook largest-coefficient rule
        let prob = p(
            Sense::Max,
            Direction::LessEq,
            &[0.75, -150.0, 0.02, -6.0],
            &[&[0.25, -60.0, -0.04, 9.0], &[0.5, -90.0, -0.02, 3.0], &[0.0, 0.0, 1.0, 0.0]],
            &[0.0, 0.0, 1.0],
        );
        let out = solve(&prob).unwrap();
        assert_eq!(out.status, Status::Optimal);
        assert!((out.objective - 0.05).abs() < 1e-12);
        assert_duality(&prob, &out);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(SimplexProblem::new(Sense::Max, Direction::LessEq, vec![1.0], &[vec![1.0, 2.0]], vec![1.0]).is_err());
        assert!(SimplexProblem::new(Sense::Max, Direction::LessEq, vec![f64::NAN], &[vec![1.0]], vec![1.0]).is_err());
        assert!(SimplexProblem::new(Sense::Max, Direction::LessEq, vec![1.0], &[vec![1.0]], vec![]).is_err());
    }

    #[test]
    fn dual_realization_single_row() {
        let eps = 0.125;
        let r = realize_via_dual(&[vec![1.0, 0.0, 0.0]], eps).unwrap();
        assert_eq!(r.z, vec![eps, 0.0, 0.0]);
        assert!((r.objective - eps).abs() < 1e-15);
    }

    #[test]
    fn dual_realization_inconsistent() {
        assert!(matches!(realize_via_dual(&[vec![1.0], vec![-1.0]], 0.1), Err(Error::Infeasible(_))));
    }

    #[test]
    fn dual_realization_satisfies_rows() {
        let rows = vec![vec![1.0, -1.0, 0.5], vec![0.0, 2.0, -1.0], vec![-1.0, 1.0, 1.0]];
        let eps = 0.01;
        let r = realize_via_dual(&rows, eps).unwrap();
        for row in &rows {
            let v: f64 = row.iter().zip(&r.z).map(|(a, z)| a * z).sum();
            assert!(v >= eps - 1e-12, "{v}");
        }
        assert!(r.z.iter().all(|&z| z >= -1e-12));
        assert!((r.z.iter().sum::<f64>() - r.objective).abs() < 1e-12);
    }

    #[test]
    fn text_format() {
        let prob = parse_lp_text("# demo\nsense max\ndirection <=\nc 3 2\nrow 1 1 4\nrow 1 3 6\n").unwrap();
        assert_eq!(solve(&prob).unwrap().objective, 12.0);
        assert!(matches!(parse_lp_text("c 1\nrow 1\n"), Err(Error::Parse { line: 2, .. })));
        assert!(parse_lp_text("c 1 2\nrow 1 1\n").is_err());
        assert!(matches!(parse_lp_text("sense up\n"), Err(Error::Parse { line: 1, .. })));
    }
}
