//! Exact linear programming over the rationals.
//!
//! Dense two-phase primal simplex with Bland's rule. Every variable is
//! nonnegative; free variables are modelled by the caller as a difference of
//! two nonnegative columns. Arithmetic is exact, so feasibility verdicts on
//! the boundary of a polytope are decided without tolerance.

use num_traits::{One, Signed, Zero};

use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub terms: Vec<(usize, Rational)>,
    pub relation: Relation,
    pub rhs: Rational,
}

#[derive(Debug, Clone)]
pub struct LinearProgram {
    num_vars: usize,
    sense: Sense,
    objective: Vec<Rational>,
    constraints: Vec<Constraint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub values: Vec<Rational>,
    pub objective: Rational,
    pub pivots: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal(LpSolution),
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn optimal(self) -> Option<LpSolution> {
        match self {
            LpOutcome::Optimal(sol) => Some(sol),
            _ => None,
        }
    }
}

impl LinearProgram {
    pub fn new(num_vars: usize, sense: Sense) -> Self {
        LinearProgram {
            num_vars,
            sense,
            objective: vec![Rational::zero(); num_vars],
            constraints: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn add_var(&mut self) -> usize {
        self.objective.push(Rational::zero());
        self.num_vars += 1;
        self.num_vars - 1
    }

    pub fn set_objective(&mut self, var: usize, coeff: Rational) {
        self.objective[var] = coeff;
    }

    /// Adds `sum(coeff * x[var]) relation rhs`. Repeated variables are summed.
    pub fn add_constraint(&mut self, terms: Vec<(usize, Rational)>, relation: Relation, rhs: Rational) {
        debug_assert!(terms.iter().all(|(v, _)| *v < self.num_vars));
        self.constraints.push(Constraint { terms, relation, rhs });
    }

    pub fn solve(&self) -> LpOutcome {
        Tableau::build(self).run(self)
    }
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    /// Reduced-cost row; the last entry holds minus the current objective value.
    cost: Vec<Rational>,
    width: usize,
    first_artificial: usize,
    pivots: usize,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Tableau {
        let n = lp.num_vars;
        let m = lp.constraints.len();
        let slack_count = lp
            .constraints
            .iter()
            .filter(|c| c.relation != Relation::Eq)
            .count();
        let first_slack = n;
        let first_artificial = n + slack_count;

        // Rows whose slack can serve as the initial basic variable need no artificial.
        let mut needs_artificial = Vec::with_capacity(m);
        let mut normalized = Vec::with_capacity(m);
        for c in &lp.constraints {
            let mut dense = vec![Rational::zero(); n];
            for (v, coeff) in &c.terms {
                dense[*v] += coeff;
            }
            let (dense, relation, rhs) = if c.rhs.is_negative() {
                let flipped = match c.relation {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
                (dense.into_iter().map(|x| -x).collect::<Vec<_>>(), flipped, -c.rhs.clone())
            } else {
                (dense, c.relation, c.rhs.clone())
            };
            needs_artificial.push(relation != Relation::Le);
            normalized.push((dense, relation, rhs));
        }
        let artificial_count = needs_artificial.iter().filter(|&&a| a).count();
        let width = first_artificial + artificial_count;

        let mut rows = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let mut slack = first_slack;
        let mut artificial = first_artificial;
        for (dense, relation, rhs) in normalized {
            let mut row = dense;
            row.resize(width + 1, Rational::zero());
            match relation {
                Relation::Le => {
                    row[slack] = Rational::one();
                    basis.push(slack);
                    slack += 1;
                }
                Relation::Ge => {
                    row[slack] = -Rational::one();
                    slack += 1;
                    row[artificial] = Rational::one();
                    basis.push(artificial);
                    artificial += 1;
                }
                Relation::Eq => {
                    row[artificial] = Rational::one();
                    basis.push(artificial);
                    artificial += 1;
                }
            }
            row[width] = rhs;
            rows.push(row);
        }

        Tableau {
            rows,
            basis,
            cost: vec![Rational::zero(); width + 1],
            width,
            first_artificial,
            pivots: 0,
        }
    }

    fn run(mut self, lp: &LinearProgram) -> LpOutcome {
        // Phase 1: minimise the sum of artificials.
        if self.first_artificial < self.width {
            let mut phase1 = vec![Rational::zero(); self.width];
            for c in phase1.iter_mut().skip(self.first_artificial) {
                *c = Rational::one();
            }
            self.load_costs(&phase1);
            self.iterate(self.width);
            if !self.cost[self.width].is_zero() {
                // cost[width] = -objective; a positive artificial sum remains
                return LpOutcome::Infeasible;
            }
            self.evict_artificials();
        }

        let mut phase2 = vec![Rational::zero(); self.width];
        for (j, c) in lp.objective.iter().enumerate() {
            phase2[j] = match lp.sense {
                Sense::Minimize => c.clone(),
                Sense::Maximize => -c.clone(),
            };
        }
        self.load_costs(&phase2);
        if !self.iterate(self.first_artificial) {
            return LpOutcome::Unbounded;
        }

        let mut values = vec![Rational::zero(); lp.num_vars];
        for (r, &b) in self.basis.iter().enumerate() {
            if b < lp.num_vars {
                values[b] = self.rows[r][self.width].clone();
            }
        }
        let objective = values
            .iter()
            .zip(&lp.objective)
            .filter(|(_, c)| !c.is_zero())
            .map(|(x, c)| x * c)
            .fold(Rational::zero(), |acc, t| acc + t);
        LpOutcome::Optimal(LpSolution {
            values,
            objective,
            pivots: self.pivots,
        })
    }

    fn load_costs(&mut self, costs: &[Rational]) {
        let mut row = costs.to_vec();
        row.push(Rational::zero());
        for (r, &b) in self.basis.iter().enumerate() {
            let cb = &costs[b];
            if cb.is_zero() {
                continue;
            }
            for (j, a) in self.rows[r].iter().enumerate() {
                if !a.is_zero() {
                    row[j] -= cb * a;
                }
            }
        }
        self.cost = row;
    }

    /// Runs Bland-rule pivots over columns `< limit`. Returns false if unbounded.
    fn iterate(&mut self, limit: usize) -> bool {
        loop {
            let Some(enter) = (0..limit).find(|&j| self.cost[j].is_negative()) else {
                return true;
            };
            let mut leave: Option<(usize, Rational)> = None;
            for (r, row) in self.rows.iter().enumerate() {
                let a = &row[enter];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &row[self.width] / a;
                let better = match &leave {
                    None => true,
                    Some((best_r, best)) => {
                        ratio < *best || (ratio == *best && self.basis[r] < self.basis[*best_r])
                    }
                };
                if better {
                    leave = Some((r, ratio));
                }
            }
            let Some((row, _)) = leave else {
                return false;
            };
            self.pivot(row, enter);
        }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        self.pivots += 1;
        let inv = self.rows[r][c].recip();
        for x in self.rows[r].iter_mut() {
            if !x.is_zero() {
                *x *= &inv;
            }
        }
        let support: Vec<usize> = (0..=self.width)
            .filter(|&j| !self.rows[r][j].is_zero())
            .collect();
        let pivot_row = std::mem::take(&mut self.rows[r]);
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let factor = row[c].clone();
            for &j in &support {
                row[j] -= &factor * &pivot_row[j];
            }
        }
        if !self.cost[c].is_zero() {
            let factor = self.cost[c].clone();
            for &j in &support {
                self.cost[j] -= &factor * &pivot_row[j];
            }
        }
        self.rows[r] = pivot_row;
        self.basis[r] = c;
    }

    /// After phase 1, pivots zero-valued artificials out of the basis and
    /// drops rows that are linear combinations of the others.
    fn evict_artificials(&mut self) {
        let mut r = 0;
        while r < self.rows.len() {
            if self.basis[r] < self.first_artificial {
                r += 1;
                continue;
            }
            match (0..self.first_artificial).find(|&j| !self.rows[r][j].is_zero()) {
                Some(j) => {
                    self.pivot(r, j);
                    r += 1;
                }
                None => {
                    self.rows.remove(r);
                    self.basis.remove(r);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn solve(lp: &LinearProgram) -> LpSolution {
        lp.solve().optimal().expect("optimal")
    }

    #[test]
    fn textbook_maximisation() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18  -> (2, 6), 36
        let mut lp = LinearProgram::new(2, Sense::Maximize);
        lp.set_objective(0, int(3));
        lp.set_objective(1, int(5));
        lp.add_constraint(vec![(0, int(1))], Relation::Le, int(4));
        lp.add_constraint(vec![(1, int(2))], Relation::Le, int(12));
        lp.add_constraint(vec![(0, int(3)), (1, int(2))], Relation::Le, int(18));
        let sol = solve(&lp);
        assert_eq!(sol.objective, int(36));
        assert_eq!(sol.values, vec![int(2), int(6)]);
    }

    #[test]
    fn equality_and_ge_rows_with_fractional_optimum() {
        // min x + y, x + 3y = 2, 3x + y >= 2  -> x = y = 1/2
        let mut lp = LinearProgram::new(2, Sense::Minimize);
        lp.set_objective(0, int(1));
        lp.set_objective(1, int(1));
        lp.add_constraint(vec![(0, int(1)), (1, int(3))], Relation::Eq, int(2));
        lp.add_constraint(vec![(0, int(3)), (1, int(1))], Relation::Ge, int(2));
        let sol = solve(&lp);
        assert_eq!(sol.objective, int(1));
        assert_eq!(sol.values, vec![ratio(1, 2), ratio(1, 2)]);
    }

    #[test]
    fn infeasible_system() {
        let mut lp = LinearProgram::new(1, Sense::Minimize);
        lp.add_constraint(vec![(0, int(1))], Relation::Ge, int(2));
        lp.add_constraint(vec![(0, int(1))], Relation::Le, int(1));
        assert_eq!(lp.solve(), LpOutcome::Infeasible);
    }

    #[test]
    fn unbounded_objective() {
        let mut lp = LinearProgram::new(2, Sense::Maximize);
        lp.set_objective(0, int(1));
        lp.add_constraint(vec![(0, int(1)), (1, int(-1))], Relation::Le, int(1));
        assert_eq!(lp.solve(), LpOutcome::Unbounded);
    }

    #[test]
    fn redundant_equalities_are_dropped() {
        // x + y = 1 stated twice plus a scaled copy
        let mut lp = LinearProgram::new(2, Sense::Maximize);
        lp.set_objective(0, int(1));
        lp.add_constraint(vec![(0, int(1)), (1, int(1))], Relation::Eq, int(1));
        lp.add_constraint(vec![(0, int(1)), (1, int(1))], Relation::Eq, int(1));
        lp.add_constraint(vec![(0, int(2)), (1, int(2))], Relation::Eq, int(2));
        let sol = solve(&lp);
        assert_eq!(sol.objective, int(1));
    }

    #[test]
    fn negative_rhs_is_normalised() {
        // -x <= -3  ==  x >= 3 ; min x
        let mut lp = LinearProgram::new(1, Sense::Minimize);
        lp.set_objective(0, int(1));
        lp.add_constraint(vec![(0, int(-1))], Relation::Le, int(-3));
        assert_eq!(solve(&lp).objective, int(3));
    }

    #[test]
    fn degenerate_cycling_example_terminates() {
        // Beale's example cycles under the textbook largest-coefficient rule.
        let mut lp = LinearProgram::new(4, Sense::Minimize);
        for (j, c) in [ratio(-3, 4), int(150), ratio(-1, 50), int(6)].into_iter().enumerate() {
            lp.set_objective(j, c);
        }
        lp.add_constraint(
            vec![(0, ratio(1, 4)), (1, int(-60)), (2, ratio(-1, 25)), (3, int(9))],
            Relation::Le,
            int(0),
        );
        lp.add_constraint(
            vec![(0, ratio(1, 2)), (1, int(-90)), (2, ratio(-1, 50)), (3, int(3))],
            Relation::Le,
            int(0),
        );
        lp.add_constraint(vec![(2, int(1))], Relation::Le, int(1));
        let sol = solve(&lp);
        assert_eq!(sol.objective, ratio(-1, 20));
    }

    #[test]
    fn empty_program_is_trivially_optimal() {
        let lp = LinearProgram::new(3, Sense::Maximize);
        let sol = solve(&lp);
        assert_eq!(sol.objective, int(0));
    }
}
