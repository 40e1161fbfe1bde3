//! Transition kernels: construction from a system, irreducibility and period
//! classification, exact stationary laws, and total-variation mixing profiles.

use num::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::ratio::{rat_to_f64, Rat};
use crate::scc;
use crate::system::RandomMapSystem;

/// Row-stochastic transition matrix with exact rational entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Kernel {
    labels: Vec<String>,
    matrix: Vec<Vec<Rat>>,
}

impl Kernel {
    pub fn d(&self) -> usize {
        self.matrix.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn entry(&self, x: usize, y: usize) -> &Rat {
        &self.matrix[x][y]
    }

    pub fn row(&self, x: usize) -> &[Rat] {
        &self.matrix[x]
    }

    /// Support digraph: edge `x -> y` iff the transition has positive weight.
    pub fn support_adjacency(&self) -> Vec<Vec<u32>> {
        self.matrix
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(_, p)| p.is_positive())
                    .map(|(y, _)| y as u32)
                    .collect()
            })
            .collect()
    }
}

/// `matrix[x][y] = sum of weights of maps sending x to y`; rows sum to 1
/// exactly because the map weights do.
pub fn build_kernel(system: &RandomMapSystem) -> Kernel {
    let d = system.d();
    let mut matrix = vec![vec![Rat::zero(); d]; d];
    for m in system.maps() {
        for x in 0..d {
            matrix[x][m.map.apply(x)] += m.weight.clone();
        }
    }
    for row in &matrix {
        let sum: Rat = row.iter().fold(Rat::zero(), |a, p| a + p.clone());
        assert!(sum.is_one(), "kernel row does not sum to 1");
    }
    Kernel {
        labels: system.states().labels().to_vec(),
        matrix,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KernelClass {
    pub irreducible: bool,
    pub aperiodic: bool,
    /// Defined only for irreducible kernels.
    pub period: Option<usize>,
}

/// Irreducibility via strong connectivity of the support digraph; the period
/// is the gcd of `dist(u) + 1 - dist(v)` over support edges `u -> v` from a
/// breadth-first search rooted at state 0 (valid in the irreducible case).
pub fn classify_kernel(kernel: &Kernel) -> KernelClass {
    let adj = kernel.support_adjacency();
    let components = scc::tarjan(&adj);
    if components.count != 1 {
        return KernelClass {
            irreducible: false,
            aperiodic: false,
            period: None,
        };
    }
    let d = kernel.d();
    let mut dist = vec![i64::MIN; d];
    dist[0] = 0;
    let mut queue = std::collections::VecDeque::from([0usize]);
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if dist[v as usize] == i64::MIN {
                dist[v as usize] = dist[u] + 1;
                queue.push_back(v as usize);
            }
        }
    }
    let mut g: i64 = 0;
    for (u, targets) in adj.iter().enumerate() {
        for &v in targets {
            g = num::integer::gcd(g, dist[u] + 1 - dist[v as usize]);
        }
    }
    let period = g.unsigned_abs() as usize;
    KernelClass {
        irreducible: true,
        aperiodic: period == 1,
        period: Some(period),
    }
}

/// Strongly connected components of the support digraph, as label lists.
pub fn support_components(kernel: &Kernel) -> Vec<Vec<String>> {
    let components = scc::tarjan(&kernel.support_adjacency());
    scc::component_lists(&components)
        .into_iter()
        .map(|c| c.into_iter().map(|v| kernel.labels()[v].clone()).collect())
        .collect()
}

/// Probability vector over the state space, exact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Distribution {
    weights: Vec<Rat>,
}

impl Distribution {
    pub fn new(weights: Vec<Rat>) -> Result<Self> {
        if weights.iter().any(|w| w.is_negative()) {
            return Err(Error::Document("negative probability weight".into()));
        }
        let sum: Rat = weights.iter().fold(Rat::zero(), |a, w| a + w.clone());
        if !sum.is_one() {
            return Err(Error::Document(
                "probability weights do not sum to 1".into(),
            ));
        }
        Ok(Distribution { weights })
    }

    pub(crate) fn from_weights_unchecked(weights: Vec<Rat>) -> Self {
        Distribution { weights }
    }

    pub fn uniform(d: usize) -> Self {
        let w = Rat::new(1.into(), (d as i64).into());
        Distribution {
            weights: vec![w; d],
        }
    }

    pub fn dirac(d: usize, x: usize) -> Self {
        let mut weights = vec![Rat::zero(); d];
        weights[x] = Rat::one();
        Distribution { weights }
    }

    /// Uniform law on a subset of states.
    pub fn uniform_on(d: usize, support: &[usize]) -> Self {
        let w = Rat::new(1.into(), (support.len() as i64).into());
        let mut weights = vec![Rat::zero(); d];
        for &x in support {
            weights[x] = w.clone();
        }
        Distribution { weights }
    }

    pub fn d(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[Rat] {
        &self.weights
    }

    pub fn weight(&self, x: usize) -> &Rat {
        &self.weights[x]
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.d())
            .filter(|&x| self.weights[x].is_positive())
            .collect()
    }

    /// Exact total-variation distance `(1/2) Σ |p - q|`.
    pub fn tv(&self, other: &Distribution) -> Rat {
        let sum: Rat = self
            .weights
            .iter()
            .zip(&other.weights)
            .fold(Rat::zero(), |a, (p, q)| a + (p.clone() - q.clone()).abs());
        sum / Rat::from_integer(2.into())
    }

    pub fn tv_f64(&self, other: &Distribution) -> f64 {
        rat_to_f64(&self.tv(other))
    }

    pub fn to_f64_vec(&self) -> Vec<f64> {
        self.weights.iter().map(rat_to_f64).collect()
    }
}

/// Exact solve of `πΠ = π`, `Σπ = 1` by Gaussian elimination over the
/// rationals; unique for irreducible kernels. The result is re-verified by
/// exact multiplication before being returned.
pub fn stationary_distribution(kernel: &Kernel) -> Result<Distribution> {
    let class = classify_kernel(kernel);
    if !class.irreducible {
        return Err(Error::Reducible {
            components: support_components(kernel),
        });
    }
    let d = kernel.d();
    // Balance equations (Π^T - I)π = 0 plus the normalization row.
    let mut rows: Vec<Vec<Rat>> = Vec::with_capacity(d + 1);
    let mut rhs: Vec<Rat> = Vec::with_capacity(d + 1);
    for y in 0..d {
        let mut row: Vec<Rat> = (0..d).map(|x| kernel.entry(x, y).clone()).collect();
        row[y] -= Rat::one();
        rows.push(row);
        rhs.push(Rat::zero());
    }
    rows.push(vec![Rat::one(); d]);
    rhs.push(Rat::one());

    let pi = solve_consistent(&mut rows, &mut rhs, d)
        .ok_or_else(|| Error::Inconsistent("stationary system has no unique solution".into()))?;

    for y in 0..d {
        let lhs: Rat = (0..d).fold(Rat::zero(), |a, x| {
            a + pi[x].clone() * kernel.entry(x, y).clone()
        });
        if lhs != pi[y] {
            return Err(Error::Inconsistent(
                "stationary candidate fails exact balance re-check".into(),
            ));
        }
    }
    Distribution::new(pi)
}

/// Gaussian elimination on an overdetermined but consistent system; returns
/// the unique solution when the coefficient rank equals the variable count.
fn solve_consistent(rows: &mut [Vec<Rat>], rhs: &mut [Rat], vars: usize) -> Option<Vec<Rat>> {
    let m = rows.len();
    let mut pivot_row_of_col = vec![usize::MAX; vars];
    let mut next_row = 0;
    for col in 0..vars {
        let Some(p) = (next_row..m).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(next_row, p);
        rhs.swap(next_row, p);
        let inv = rows[next_row][col].clone();
        for c in col..vars {
            let v = rows[next_row][c].clone() / inv.clone();
            rows[next_row][c] = v;
        }
        rhs[next_row] = rhs[next_row].clone() / inv;
        for r in 0..m {
            if r != next_row && !rows[r][col].is_zero() {
                let factor = rows[r][col].clone();
                for c in col..vars {
                    let delta = factor.clone() * rows[next_row][c].clone();
                    rows[r][c] -= delta;
                }
                let delta = factor * rhs[next_row].clone();
                rhs[r] -= delta;
            }
        }
        pivot_row_of_col[col] = next_row;
        next_row += 1;
    }
    // all variables must be pinned and remaining rows must read 0 = 0
    let mut solution = vec![Rat::zero(); vars];
    for col in 0..vars {
        let r = pivot_row_of_col[col];
        if r == usize::MAX {
            return None;
        }
        solution[col] = rhs[r].clone();
    }
    for r in next_row..m {
        if !rhs[r].is_zero() {
            return None;
        }
    }
    Some(solution)
}

/// `profile[n] = max_x TV(Π^n(x,·), π)` for `n = 0..=n_max`, computed in
/// floating point by repeated multiplication. Requires irreducible aperiodic.
pub fn mixing_profile(kernel: &Kernel, n_max: usize) -> Result<Vec<f64>> {
    let class = classify_kernel(kernel);
    if !class.irreducible {
        return Err(Error::Reducible {
            components: support_components(kernel),
        });
    }
    if !class.aperiodic {
        return Err(Error::Periodic {
            period: class.period.unwrap_or(0),
        });
    }
    let pi = stationary_distribution(kernel)?;
    let pi_f: Vec<f64> = pi.to_f64_vec();
    let d = kernel.d();
    let p_f: Vec<Vec<f64>> = (0..d)
        .map(|x| (0..d).map(|y| rat_to_f64(kernel.entry(x, y))).collect())
        .collect();

    let mut cur: Vec<Vec<f64>> = (0..d)
        .map(|x| (0..d).map(|y| if x == y { 1.0 } else { 0.0 }).collect())
        .collect();
    let mut profile = Vec::with_capacity(n_max + 1);
    for _ in 0..=n_max {
        let dn = cur
            .iter()
            .map(|row| {
                0.5 * row
                    .iter()
                    .zip(&pi_f)
                    .map(|(p, q)| (p - q).abs())
                    .sum::<f64>()
            })
            .fold(0.0f64, f64::max);
        profile.push(dn);
        let next: Vec<Vec<f64>> = (0..d)
            .map(|x| {
                (0..d)
                    .map(|y| (0..d).map(|z| cur[x][z] * p_f[z][y]).sum())
                    .collect()
            })
            .collect();
        cur = next;
    }
    Ok(profile)
}
