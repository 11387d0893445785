//! Dense bounded-variable primal simplex.
//!
//! Solves `maximize c·x` subject to row constraints `a_i·x {<=,>=,=} b_i`
//! and per-variable bounds `l_j <= x_j <= u_j` (either side may be infinite).
//! Every row gets a slack column whose bounds encode the relation, so the
//! tableau always starts from the slack basis. Phase 1 adds one artificial
//! per row whose slack starts outside its bounds.

const PIVOT_EPS: f64 = 1e-11;
const COST_EPS: f64 = 1e-10;
const FEAS_EPS: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug)]
pub struct LinearProgram {
    objective: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    rows: Vec<Vec<f64>>,
    relations: Vec<Relation>,
    rhs: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub value: f64,
}

#[derive(Clone, Debug)]
pub enum LpOutcome {
    Optimal(LpSolution),
    /// Rows whose phase-1 artificial could not be driven to zero.
    Infeasible { rows: Vec<usize> },
    Unbounded,
    IterationLimit,
}

impl LpOutcome {
    pub fn optimal(self) -> Option<LpSolution> {
        match self {
            LpOutcome::Optimal(s) => Some(s),
            _ => None,
        }
    }
}

impl LinearProgram {
    /// A maximisation problem over free variables.
    pub fn maximize(objective: Vec<f64>) -> Self {
        let n = objective.len();
        Self {
            objective,
            lower: vec![f64::NEG_INFINITY; n],
            upper: vec![f64::INFINITY; n],
            rows: Vec::new(),
            relations: Vec::new(),
            rhs: Vec::new(),
        }
    }

    /// A feasibility problem (zero objective).
    pub fn feasibility(n: usize) -> Self {
        Self::maximize(vec![0.0; n])
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn set_bounds(&mut self, j: usize, lower: f64, upper: f64) -> &mut Self {
        self.lower[j] = lower;
        self.upper[j] = upper;
        self
    }

    pub fn nonnegative(&mut self) -> &mut Self {
        for j in 0..self.num_vars() {
            self.lower[j] = self.lower[j].max(0.0);
        }
        self
    }

    pub fn add_row(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) -> &mut Self {
        assert_eq!(coeffs.len(), self.num_vars(), "row length must match variable count");
        self.rows.push(coeffs);
        self.relations.push(relation);
        self.rhs.push(rhs);
        self
    }

    pub fn solve(&self) -> LpOutcome {
        for j in 0..self.num_vars() {
            if self.lower[j] > self.upper[j] + FEAS_EPS {
                return LpOutcome::Infeasible { rows: Vec::new() };
            }
        }
        Tableau::new(self).run(self)
    }
}

struct Tableau {
    m: usize,
    n: usize,
    ncol: usize,
    t: Vec<Vec<f64>>,
    beta: Vec<f64>,
    basis: Vec<usize>,
    row_of: Vec<Option<usize>>,
    value: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    artificial_start: usize,
    artificial_row: Vec<usize>,
}

fn initial_value(lo: f64, hi: f64) -> f64 {
    if lo.is_finite() {
        lo
    } else if hi.is_finite() {
        hi
    } else {
        0.0
    }
}

impl Tableau {
    fn new(lp: &LinearProgram) -> Self {
        let m = lp.num_rows();
        let n = lp.num_vars();
        let mut lo = lp.lower.clone();
        let mut hi = lp.upper.clone();
        for rel in &lp.relations {
            let (a, b) = match rel {
                Relation::Le => (0.0, f64::INFINITY),
                Relation::Ge => (f64::NEG_INFINITY, 0.0),
                Relation::Eq => (0.0, 0.0),
            };
            lo.push(a);
            hi.push(b);
        }
        let mut value: Vec<f64> = (0..n).map(|j| initial_value(lo[j], hi[j])).collect();
        value.extend(std::iter::repeat(0.0).take(m));

        let mut beta = vec![0.0; m];
        let mut needs_art = Vec::new();
        for i in 0..m {
            let ax: f64 = lp.rows[i].iter().zip(&value[..n]).map(|(a, x)| a * x).sum();
            let s = lp.rhs[i] - ax;
            beta[i] = s;
            if s < lo[n + i] - FEAS_EPS || s > hi[n + i] + FEAS_EPS {
                needs_art.push(i);
            }
        }
        let k = needs_art.len();
        let ncol = n + m + k;
        let mut t = vec![vec![0.0; ncol]; m];
        for i in 0..m {
            t[i][..n].copy_from_slice(&lp.rows[i]);
            t[i][n + i] = 1.0;
        }
        let mut basis: Vec<usize> = (0..m).map(|i| n + i).collect();
        let mut row_of = vec![None; ncol];
        for i in 0..m {
            row_of[n + i] = Some(i);
        }
        let artificial_start = n + m;
        let mut artificial_row = Vec::with_capacity(k);
        for (a, &i) in needs_art.iter().enumerate() {
            let col = artificial_start + a;
            let s = beta[i];
            let bound = if s < lo[n + i] { lo[n + i] } else { hi[n + i] };
            let r = s - bound;
            let sigma = if r >= 0.0 { 1.0 } else { -1.0 };
            // row: A_i x + s_i + sigma * a = b_i, with the slack parked at its bound.
            t[i][col] = sigma;
            for v in t[i].iter_mut() {
                *v *= sigma;
            }
            row_of[n + i] = None;
            value[n + i] = bound;
            basis[i] = col;
            row_of[col] = Some(i);
            beta[i] = r.abs();
            artificial_row.push(i);
            lo.push(0.0);
            hi.push(f64::INFINITY);
            value.push(0.0);
        }
        Self {
            m,
            n,
            ncol,
            t,
            beta,
            basis,
            row_of,
            value,
            lo,
            hi,
            artificial_start,
            artificial_row,
        }
    }

    fn run(mut self, lp: &LinearProgram) -> LpOutcome {
        let scale = 1.0 + lp.rhs.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        if self.ncol > self.artificial_start {
            let mut cost = vec![0.0; self.ncol];
            for c in cost.iter_mut().skip(self.artificial_start) {
                *c = -1.0;
            }
            match self.optimize(&cost) {
                Step::Done => {}
                Step::Unbounded => return LpOutcome::Infeasible { rows: Vec::new() },
                Step::Limit => return LpOutcome::IterationLimit,
            }
            let mut bad = Vec::new();
            for (a, &row) in self.artificial_row.iter().enumerate() {
                let col = self.artificial_start + a;
                if self.current(col) > FEAS_EPS * scale {
                    bad.push(row);
                }
            }
            if !bad.is_empty() {
                bad.sort_unstable();
                return LpOutcome::Infeasible { rows: bad };
            }
            for col in self.artificial_start..self.ncol {
                self.lo[col] = 0.0;
                self.hi[col] = 0.0;
                if self.row_of[col].is_none() {
                    self.value[col] = 0.0;
                }
            }
            self.evict_artificials();
        }
        let mut cost = vec![0.0; self.ncol];
        cost[..self.n].copy_from_slice(&lp.objective);
        match self.optimize(&cost) {
            Step::Done => {}
            Step::Unbounded => return LpOutcome::Unbounded,
            Step::Limit => return LpOutcome::IterationLimit,
        }
        let x: Vec<f64> = (0..self.n).map(|j| self.current(j)).collect();
        let value = x.iter().zip(&lp.objective).map(|(a, b)| a * b).sum();
        LpOutcome::Optimal(LpSolution { x, value })
    }

    fn current(&self, col: usize) -> f64 {
        match self.row_of[col] {
            Some(r) => self.beta[r],
            None => self.value[col],
        }
    }

    fn evict_artificials(&mut self) {
        for r in 0..self.m {
            let col = self.basis[r];
            if col < self.artificial_start {
                continue;
            }
            let mut best = None;
            let mut best_abs = 1e-9;
            for j in 0..self.artificial_start {
                if self.row_of[j].is_none() && self.t[r][j].abs() > best_abs {
                    best_abs = self.t[r][j].abs();
                    best = Some(j);
                }
            }
            if let Some(j) = best {
                // Degenerate pivot: the artificial sits at zero, so nothing moves.
                let v = self.value[j];
                self.pivot(r, j);
                self.beta[r] = v;
                self.value[col] = 0.0;
            }
        }
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let p = self.t[r][j];
        for v in self.t[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.t[r].clone();
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.t[i][j];
            if f != 0.0 {
                for (a, b) in self.t[i].iter_mut().zip(&pivot_row) {
                    *a -= f * b;
                }
            }
        }
        let leaving = self.basis[r];
        self.row_of[leaving] = None;
        self.basis[r] = j;
        self.row_of[j] = Some(r);
    }

    fn reduced_costs(&self, cost: &[f64]) -> Vec<f64> {
        let mut d = cost.to_vec();
        for i in 0..self.m {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                for (dj, tij) in d.iter_mut().zip(&self.t[i]) {
                    *dj -= cb * tij;
                }
            }
        }
        d
    }

    fn optimize(&mut self, cost: &[f64]) -> Step {
        let limit = 50 * (self.m + self.ncol) + 1000;
        let mut degenerate_run = 0usize;
        for _ in 0..limit {
            let d = self.reduced_costs(cost);
            let bland = degenerate_run > self.m + 10;
            let mut entering: Option<(usize, f64)> = None;
            let mut best = 0.0;
            for j in 0..self.ncol {
                if self.row_of[j].is_some() || self.hi[j] - self.lo[j] <= 0.0 {
                    continue;
                }
                let x = self.value[j];
                let dir = if d[j] > COST_EPS && x < self.hi[j] {
                    1.0
                } else if d[j] < -COST_EPS && x > self.lo[j] {
                    -1.0
                } else {
                    continue;
                };
                if bland {
                    entering = Some((j, dir));
                    break;
                }
                if d[j].abs() > best {
                    best = d[j].abs();
                    entering = Some((j, dir));
                }
            }
            let Some((j, dir)) = entering else {
                return Step::Done;
            };

            let mut theta = f64::INFINITY;
            let mut leave: Option<(usize, f64)> = None;
            let mut leave_mag = 0.0;
            if self.hi[j].is_finite() && self.lo[j].is_finite() {
                theta = self.hi[j] - self.lo[j];
            }
            for i in 0..self.m {
                let a = self.t[i][j] * dir;
                if a.abs() <= PIVOT_EPS {
                    continue;
                }
                let col = self.basis[i];
                let (limit_i, bound) = if a > 0.0 {
                    if !self.lo[col].is_finite() {
                        continue;
                    }
                    (((self.beta[i] - self.lo[col]) / a).max(0.0), self.lo[col])
                } else {
                    if !self.hi[col].is_finite() {
                        continue;
                    }
                    (((self.hi[col] - self.beta[i]) / -a).max(0.0), self.hi[col])
                };
                let better = match leave {
                    None => limit_i <= theta,
                    Some((r0, _)) => {
                        limit_i < theta - 1e-12
                            || (limit_i <= theta + 1e-12
                                && if bland {
                                    col < self.basis[r0]
                                } else {
                                    a.abs() > leave_mag
                                })
                    }
                };
                if better {
                    theta = limit_i;
                    leave = Some((i, bound));
                    leave_mag = a.abs();
                }
            }
            if !theta.is_finite() {
                return Step::Unbounded;
            }
            if theta <= 1e-12 {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            let delta = dir * theta;
            for i in 0..self.m {
                self.beta[i] -= self.t[i][j] * delta;
            }
            let entering_value = self.value[j] + delta;
            match leave {
                Some((r, bound)) => {
                    let leaving = self.basis[r];
                    self.pivot(r, j);
                    self.value[leaving] = bound;
                    self.beta[r] = entering_value;
                }
                None => {
                    // Bound flip of the entering variable.
                    self.value[j] = if dir > 0.0 { self.hi[j] } else { self.lo[j] };
                }
            }
        }
        Step::Limit
    }
}

enum Step {
    Done,
    Unbounded,
    Limit,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_maximum() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18, x, y >= 0 -> 36 at (2, 6)
        let mut lp = LinearProgram::maximize(vec![3.0, 5.0]);
        lp.nonnegative();
        lp.add_row(vec![1.0, 0.0], Relation::Le, 4.0);
        lp.add_row(vec![0.0, 2.0], Relation::Le, 12.0);
        lp.add_row(vec![3.0, 2.0], Relation::Le, 18.0);
        let s = lp.solve().optimal().unwrap();
        assert!((s.value - 36.0).abs() < 1e-9);
        assert!((s.x[0] - 2.0).abs() < 1e-9 && (s.x[1] - 6.0).abs() < 1e-9);
    }

    #[test]
    fn needs_phase_one() {
        // max -x - y s.t. x + y >= 2, x - y = 0 -> (1, 1)
        let mut lp = LinearProgram::maximize(vec![-1.0, -1.0]);
        lp.add_row(vec![1.0, 1.0], Relation::Ge, 2.0);
        lp.add_row(vec![1.0, -1.0], Relation::Eq, 0.0);
        let s = lp.solve().optimal().unwrap();
        assert!((s.x[0] - 1.0).abs() < 1e-9 && (s.x[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        let mut lp = LinearProgram::feasibility(1);
        lp.add_row(vec![1.0], Relation::Ge, 2.0);
        lp.add_row(vec![1.0], Relation::Le, 1.0);
        assert!(matches!(lp.solve(), LpOutcome::Infeasible { .. }));

        let mut lp = LinearProgram::maximize(vec![1.0, 0.0]);
        lp.add_row(vec![1.0, -1.0], Relation::Le, 0.0);
        assert!(matches!(lp.solve(), LpOutcome::Unbounded));
    }

    #[test]
    fn box_bounds_without_rows() {
        let mut lp = LinearProgram::maximize(vec![1.0, -2.0]);
        lp.set_bounds(0, -1.0, 3.0).set_bounds(1, -4.0, 5.0);
        let s = lp.solve().optimal().unwrap();
        assert!((s.value - 11.0).abs() < 1e-12);
    }
}
