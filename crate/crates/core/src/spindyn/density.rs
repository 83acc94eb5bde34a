use nalgebra::{DMatrix, DVector};
use num_traits::{One, Zero};
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use super::moves::Generator;
use super::SpinDynError;
use crate::rational::{to_f64, Rational};

/// Total-variation target for uniformization.
pub const EVOLVE_TOLERANCE: f64 = 1e-12;
/// Largest `Λτ` handled in one uniformization step.
const MAX_STEP_MASS: f64 = 50.0;
pub const STATIONARY_RESIDUAL: f64 = 1e-10;
/// Classes up to this size are solved exactly when rates are rational.
const EXACT_CLASS_LIMIT: usize = 300;
const DENSE_CLASS_LIMIT: usize = 3000;

fn check_density(rho: &[f64], n: usize) -> Result<(), SpinDynError> {
    if rho.len() != n {
        return Err(SpinDynError::InvalidModel(format!("density has {} entries, expected {n}", rho.len())));
    }
    if rho.iter().any(|&p| !(p.is_finite() && p >= 0.0)) {
        return Err(SpinDynError::InvalidModel("density entries must be nonnegative".into()));
    }
    if (rho.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(SpinDynError::InvalidModel("density must sum to 1".into()));
    }
    Ok(())
}

/// `ρ(τ) = ρ₀ e^{τQ}` by uniformization, split into steps with `Λτ ≤ 50`.
pub fn evolve_density(rho0: &[f64], tau: f64, gen: &Generator) -> Result<Vec<f64>, SpinDynError> {
    check_density(rho0, gen.len())?;
    if !(tau.is_finite() && tau >= 0.0) {
        return Err(SpinDynError::InvalidModel("evolution time must be finite and nonnegative".into()));
    }
    let lambda = gen.max_exit_rate();
    if tau == 0.0 || lambda == 0.0 {
        return Ok(rho0.to_vec());
    }
    let total = lambda * tau;
    let steps = (total / MAX_STEP_MASS).ceil().max(1.0) as usize;
    let step_tol = (EVOLVE_TOLERANCE / steps as f64).max(1e-15);
    let m = total / steps as f64;
    let cap = (m + 60.0 * m.sqrt() + 200.0) as usize;

    let mut rho = rho0.to_vec();
    for _ in 0..steps {
        rho = uniformized_step(&rho, m, lambda, gen, step_tol, cap)?;
    }
    let mass: f64 = rho.iter().sum();
    rho.iter_mut().for_each(|p| *p /= mass);
    Ok(rho)
}

fn uniformized_step(
    rho: &[f64],
    m: f64,
    lambda: f64,
    gen: &Generator,
    tol: f64,
    cap: usize,
) -> Result<Vec<f64>, SpinDynError> {
    let n = gen.len();
    let mut v = rho.to_vec();
    let mut weight = (-m).exp();
    let mut acc: Vec<f64> = v.iter().map(|x| x * weight).collect();
    let mut covered = weight;
    let mut k = 0usize;
    while 1.0 - covered > tol {
        k += 1;
        if k > cap {
            return Err(SpinDynError::Tolerance(format!(
                "uniformization did not reach {tol:e} within {cap} terms"
            )));
        }
        // v ← v P with P = I + Q/Λ
        let mut next = v.clone();
        for i in 0..n {
            if v[i] == 0.0 {
                continue;
            }
            for (j, r) in gen.row(i) {
                let flow = v[i] * r.approx / lambda;
                next[*j] += flow;
                next[i] -= flow;
            }
        }
        next.iter_mut().for_each(|x| *x = x.max(0.0));
        v = next;
        weight *= m / k as f64;
        covered += weight;
        for (a, x) in acc.iter_mut().zip(&v) {
            *a += weight * x;
        }
    }
    Ok(acc)
}

#[derive(Debug, Clone)]
pub struct StationaryReport {
    pub density: Vec<f64>,
    /// Present when every recurrent class was solved in rational arithmetic.
    pub exact: Option<Vec<Rational>>,
    /// Closed communicating classes, each mixed with equal weight.
    pub recurrent_classes: Vec<Vec<usize>>,
    pub residual: f64,
}

impl StationaryReport {
    pub fn multiplicity(&self) -> usize {
        self.recurrent_classes.len()
    }
}

/// Closed strongly connected components, sorted by smallest member.
pub fn recurrent_classes(gen: &Generator) -> Vec<Vec<usize>> {
    let mut g = DiGraph::<(), ()>::with_capacity(gen.len(), gen.transition_count());
    let nodes: Vec<_> = (0..gen.len()).map(|_| g.add_node(())).collect();
    for i in 0..gen.len() {
        for (j, r) in gen.row(i) {
            if r.approx > 0.0 {
                g.add_edge(nodes[i], nodes[*j], ());
            }
        }
    }
    let sccs = tarjan_scc(&g);
    let mut comp = vec![0usize; gen.len()];
    for (c, members) in sccs.iter().enumerate() {
        for n in members {
            comp[n.index()] = c;
        }
    }
    let mut closed: Vec<Vec<usize>> = sccs
        .iter()
        .enumerate()
        .filter(|(c, members)| {
            members.iter().all(|n| {
                gen.row(n.index())
                    .iter()
                    .all(|(j, r)| r.approx == 0.0 || comp[*j] == *c)
            })
        })
        .map(|(_, members)| {
            let mut v: Vec<usize> = members.iter().map(|n| n.index()).collect();
            v.sort_unstable();
            v
        })
        .collect();
    closed.sort();
    closed
}

/// Stationary density of each recurrent class, mixed uniformly over classes.
pub fn stationary_density(gen: &Generator) -> Result<StationaryReport, SpinDynError> {
    let n = gen.len();
    if n == 0 {
        return Err(SpinDynError::InvalidModel("empty generator".into()));
    }
    let classes = recurrent_classes(gen);
    let share = 1.0 / classes.len() as f64;
    let exact_possible = gen.is_exact() && classes.iter().all(|c| c.len() <= EXACT_CLASS_LIMIT);

    let mut density = vec![0.0; n];
    let mut exact = exact_possible.then(|| vec![Rational::zero(); n]);
    let class_share = Rational::new(1.into(), classes.len().into());
    for class in &classes {
        if let Some(ex) = exact.as_mut() {
            let pi = exact_class_solution(gen, class)?;
            for (&s, p) in class.iter().zip(pi) {
                density[s] = to_f64(&p) * share;
                ex[s] = p * &class_share;
            }
        } else {
            let pi = float_class_solution(gen, class)?;
            for (&s, p) in class.iter().zip(pi) {
                density[s] = p * share;
            }
        }
    }
    let residual = balance_residual(gen, &density);
    if residual > STATIONARY_RESIDUAL * gen.max_exit_rate().max(1.0) {
        return Err(SpinDynError::NumericalRank(format!("stationary residual {residual:e} too large")));
    }
    Ok(StationaryReport {
        density,
        exact,
        recurrent_classes: classes,
        residual,
    })
}

/// `‖ρ Q‖∞`.
pub fn balance_residual(gen: &Generator, rho: &[f64]) -> f64 {
    let mut flow = vec![0.0; gen.len()];
    for i in 0..gen.len() {
        for (j, r) in gen.row(i) {
            flow[*j] += rho[i] * r.approx;
            flow[i] -= rho[i] * r.approx;
        }
    }
    flow.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Exact `ρ Q = 0` restricted to the class, one balance row replaced by
/// normalisation. Gauss-Jordan over rationals.
fn exact_class_solution(gen: &Generator, class: &[usize]) -> Result<Vec<Rational>, SpinDynError> {
    let k = class.len();
    let pos = |s: usize| class.binary_search(&s).ok();
    // a[j][i] = Q[i][j] so that unknowns are ρ_i
    let mut a = vec![vec![Rational::zero(); k + 1]; k];
    for (ci, &i) in class.iter().enumerate() {
        for (j, r) in gen.row(i) {
            let q = r.exact.clone().expect("exact generator");
            if let Some(cj) = pos(*j) {
                a[cj][ci] += &q;
            }
            a[ci][ci] -= q;
        }
    }
    for x in a[k - 1].iter_mut() {
        *x = Rational::one();
    }
    for col in 0..k {
        let pivot = (col..k)
            .find(|&r| !a[r][col].is_zero())
            .ok_or_else(|| SpinDynError::NumericalRank("singular balance system".into()))?;
        a.swap(col, pivot);
        let p = a[col][col].clone();
        for x in a[col].iter_mut() {
            *x /= &p;
        }
        let pivot_row = a[col].clone();
        for (r, row) in a.iter_mut().enumerate() {
            if r == col || row[col].is_zero() {
                continue;
            }
            let f = row[col].clone();
            for (x, y) in row.iter_mut().zip(&pivot_row) {
                if !y.is_zero() {
                    *x -= &f * y;
                }
            }
        }
    }
    Ok(a.into_iter().map(|row| row[k].clone()).collect())
}

fn float_class_solution(gen: &Generator, class: &[usize]) -> Result<Vec<f64>, SpinDynError> {
    let k = class.len();
    if k == 1 {
        return Ok(vec![1.0]);
    }
    let pos = |s: usize| class.binary_search(&s).ok();
    if k > DENSE_CLASS_LIMIT {
        return power_iteration(gen, class);
    }
    let mut a = DMatrix::<f64>::zeros(k, k);
    for (ci, &i) in class.iter().enumerate() {
        for (j, r) in gen.row(i) {
            if let Some(cj) = pos(*j) {
                a[(cj, ci)] += r.approx;
            }
            a[(ci, ci)] -= r.approx;
        }
    }
    for c in 0..k {
        a[(k - 1, c)] = 1.0;
    }
    let mut b = DVector::<f64>::zeros(k);
    b[k - 1] = 1.0;
    let x = a
        .lu()
        .solve(&b)
        .ok_or_else(|| SpinDynError::NumericalRank("balance matrix is singular".into()))?;
    let mut pi: Vec<f64> = x.iter().map(|v| v.max(0.0)).collect();
    let s: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|p| *p /= s);
    Ok(pi)
}

/// Lazy uniformized power iteration for classes too large for a dense solve.
fn power_iteration(gen: &Generator, class: &[usize]) -> Result<Vec<f64>, SpinDynError> {
    let k = class.len();
    let pos = |s: usize| class.binary_search(&s).ok();
    let lambda = class.iter().map(|&i| gen.exit_rate(i)).fold(0.0, f64::max) * 2.0;
    let mut v = vec![1.0 / k as f64; k];
    for _ in 0..200_000 {
        let mut next = v.clone();
        for (ci, &i) in class.iter().enumerate() {
            for (j, r) in gen.row(i) {
                let flow = v[ci] * r.approx / lambda;
                if let Some(cj) = pos(*j) {
                    next[cj] += flow;
                }
                next[ci] -= flow;
            }
        }
        let diff = next.iter().zip(&v).map(|(a, b)| (a - b).abs()).sum::<f64>();
        v = next;
        if diff < 1e-15 {
            return Ok(v);
        }
    }
    Err(SpinDynError::NumericalRank("power iteration did not converge".into()))
}
