//! Exact Wasserstein-q distances between small discrete measures, and the
//! field-level E4 metric between empirical solution measures on a mesh
//! hierarchy.
//!
//! The optimal coupling is found with the transportation simplex on the
//! dense bipartite graph: northwest-corner start, duals from the spanning
//! tree, Dantzig entering rule with a Bland fallback after degenerate
//! stalls (guaranteeing termination), and exact pivots on the unique basis
//! cycle. Atom counts here are the number of mesh levels — single digits —
//! so exactness is cheap and no regularization is used or wanted: the
//! brute-force vertex-enumeration oracle in the tests must be matched to
//! 1e-9.

use crate::error::{Error, Result};
use crate::gas::GasModel;
use crate::kconv::{MetricsTable, SolutionStack, Variable};
use crate::measure::{euclid, DiscreteMeasure};
use crate::scalar::Scalar;
use rayon::prelude::*;

/// Coordinates closer than this (per component) merge before solving.
const MERGE_TOL: f64 = 1e-14;

/// A coupling between two atom lists: `pi[i*cols + j]` ships mass from
/// source atom i to target atom j.
#[derive(Clone, Debug)]
pub struct TransportPlan<S> {
    rows: usize,
    cols: usize,
    pi: Vec<S>,
}

impl<S: Scalar> TransportPlan<S> {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn value(&self, i: usize, j: usize) -> S {
        self.pi[i * self.cols + j]
    }

    /// Largest absolute violation of the marginal constraints against the
    /// given source/target weights.
    pub fn max_marginal_violation(&self, source: &[S], target: &[S]) -> S {
        let mut worst = S::zero();
        for i in 0..self.rows {
            let mut sum = S::zero();
            for j in 0..self.cols {
                sum += self.value(i, j);
            }
            worst = worst.max((sum - source[i]).abs());
        }
        for j in 0..self.cols {
            let mut sum = S::zero();
            for i in 0..self.rows {
                sum += self.value(i, j);
            }
            worst = worst.max((sum - target[j]).abs());
        }
        worst
    }
}

#[inline]
fn pair_cost<S: Scalar>(a: &[S], b: &[S], q: S) -> S {
    let d = euclid(a, b);
    if q == S::one() {
        d
    } else if q == S::lit(2.0) {
        d * d
    } else {
        d.powf(q)
    }
}

fn check_q<S: Scalar>(q: S) -> Result<()> {
    if !(q >= S::one()) || !q.is_finite() {
        return Err(Error::Param(format!(
            "Wasserstein order q must lie in [1, ∞), got {}",
            q.to_f64_lossy()
        )));
    }
    Ok(())
}

/// W_q(μ, ν) with an optimal coupling on the *original* atom indices
/// (coincident atoms are merged for the solve and the plan re-expanded).
/// The reported distance is (Σ π·|ζ−ξ|^q)^{1/q}.
pub fn wq_distance<S: Scalar>(
    mu: &DiscreteMeasure<S>,
    nu: &DiscreteMeasure<S>,
    q: S,
) -> Result<(S, TransportPlan<S>)> {
    check_q(q)?;
    if mu.dim() != nu.dim() {
        return Err(Error::Param(format!(
            "atom dimensions differ: {} vs {}",
            mu.dim(),
            nu.dim()
        )));
    }
    let (mu_m, map_mu) = mu.merge_coincident_with_map(S::lit(MERGE_TOL));
    let (nu_m, map_nu) = nu.merge_coincident_with_map(S::lit(MERGE_TOL));

    let m = mu_m.n_atoms();
    let n = nu_m.n_atoms();
    let mut cost = vec![S::zero(); m * n];
    for i in 0..m {
        for j in 0..n {
            cost[i * n + j] = pair_cost(mu_m.atom(i), nu_m.atom(j), q);
        }
    }
    let (total, pi_merged) = solve_transport(mu_m.weights(), nu_m.weights(), &cost)?;

    // Expand the merged plan back to original indices, splitting each
    // merged row/column in proportion to the original weights.
    let rows = mu.n_atoms();
    let cols = nu.n_atoms();
    let frac = |w: S, group_w: S| {
        if group_w > S::zero() {
            w / group_w
        } else {
            S::zero()
        }
    };
    let mut pi = vec![S::zero(); rows * cols];
    for (i, &gi) in map_mu.iter().enumerate() {
        let fi = frac(mu.weight(i), mu_m.weight(gi));
        for (j, &gj) in map_nu.iter().enumerate() {
            let fj = frac(nu.weight(j), nu_m.weight(gj));
            pi[i * cols + j] = pi_merged[gi * n + gj] * fi * fj;
        }
    }
    let distance = if q == S::one() { total } else { total.powf(S::one() / q) };
    Ok((distance, TransportPlan { rows, cols, pi }))
}

/// Minimal Σ π·cost over couplings of the merged measures; used by the
/// field metric where only the q-th power is needed.
fn wq_cost<S: Scalar>(mu: &DiscreteMeasure<S>, nu: &DiscreteMeasure<S>, q: S) -> Result<S> {
    let mu_m = mu.merge_coincident(S::lit(MERGE_TOL));
    let nu_m = nu.merge_coincident(S::lit(MERGE_TOL));
    let m = mu_m.n_atoms();
    let n = nu_m.n_atoms();
    let mut cost = vec![S::zero(); m * n];
    for i in 0..m {
        for j in 0..n {
            cost[i * n + j] = pair_cost(mu_m.atom(i), nu_m.atom(j), q);
        }
    }
    Ok(solve_transport(mu_m.weights(), nu_m.weights(), &cost)?.0)
}

/// Transportation simplex. `cost` is row-major m×n; supplies and demands
/// must balance (both sum to 1 here). Returns (objective, plan).
fn solve_transport<S: Scalar>(a: &[S], b: &[S], cost: &[S]) -> Result<(S, Vec<S>)> {
    let m = a.len();
    let n = b.len();
    debug_assert_eq!(cost.len(), m * n);
    let mut pi = vec![S::zero(); m * n];

    // Northwest-corner initial basis: a staircase spanning tree with
    // exactly m+n−1 cells (zero-valued basics appear under degeneracy).
    let mut basis: Vec<(usize, usize)> = Vec::with_capacity(m + n - 1);
    let mut in_basis = vec![false; m * n];
    {
        let mut rem_a: Vec<S> = a.to_vec();
        let mut rem_b: Vec<S> = b.to_vec();
        let (mut i, mut j) = (0usize, 0usize);
        loop {
            let q = rem_a[i].min(rem_b[j]);
            pi[i * n + j] = q;
            rem_a[i] -= q;
            rem_b[j] -= q;
            basis.push((i, j));
            in_basis[i * n + j] = true;
            if i == m - 1 && j == n - 1 {
                break;
            }
            if rem_a[i] == S::zero() && i < m - 1 {
                i += 1;
            } else {
                j += 1;
            }
        }
    }
    debug_assert_eq!(basis.len(), m + n - 1);

    let scale = cost
        .iter()
        .fold(S::one(), |acc, c| acc.max(c.abs()));
    let eps = S::lit(1e-13) * scale;

    let max_iters = 10_000 * (m + n);
    let mut bland = false;
    let mut stalled = 0usize;
    let mut iters = 0usize;
    // Scratch reused across iterations.
    let mut u: Vec<S> = vec![S::zero(); m];
    let mut v: Vec<S> = vec![S::zero(); n];
    let mut known_u = vec![false; m];
    let mut known_v = vec![false; n];

    loop {
        iters += 1;
        if iters > max_iters {
            return Err(Error::NoConvergence {
                iters: max_iters as u32,
            });
        }

        // Duals from the basis tree: u_i + v_j = c_ij on basic cells.
        known_u.iter_mut().for_each(|x| *x = false);
        known_v.iter_mut().for_each(|x| *x = false);
        known_u[0] = true;
        u[0] = S::zero();
        let mut settled = 1usize;
        while settled < m + n {
            let mut progress = false;
            for &(i, j) in &basis {
                match (known_u[i], known_v[j]) {
                    (true, false) => {
                        v[j] = cost[i * n + j] - u[i];
                        known_v[j] = true;
                        settled += 1;
                        progress = true;
                    }
                    (false, true) => {
                        u[i] = cost[i * n + j] - v[j];
                        known_u[i] = true;
                        settled += 1;
                        progress = true;
                    }
                    _ => {}
                }
            }
            if !progress {
                // Basis lost connectivity — cannot happen if pivots are
                // correct; treated as a solver failure rather than UB.
                return Err(Error::NoConvergence { iters: iters as u32 });
            }
        }

        // Entering cell: most negative reduced cost (Dantzig), or the
        // first eligible one once Bland's rule is active.
        let mut enter: Option<(usize, usize)> = None;
        let mut best = -eps;
        'scan: for i in 0..m {
            for j in 0..n {
                if in_basis[i * n + j] {
                    continue;
                }
                let r = cost[i * n + j] - u[i] - v[j];
                if r < best {
                    enter = Some((i, j));
                    if bland {
                        break 'scan;
                    }
                    best = r;
                }
            }
        }
        let (ie, je) = match enter {
            Some(c) => c,
            None => break,
        };

        // Unique cycle: path from Row(ie) to Col(je) through the tree.
        let path = tree_path(&basis, m, n, ie, je)
            .ok_or(Error::NoConvergence { iters: iters as u32 })?;
        // Entering cell is +; path arcs alternate − , + , … from the
        // Row(ie) end (bipartite cycles have an odd arc-path).
        let mut theta = S::infinity();
        let mut leave: Option<(usize, usize)> = None;
        for (t, &(i, j)) in path.iter().enumerate() {
            if t % 2 == 0 {
                let val = pi[i * n + j];
                let better = match leave {
                    None => true,
                    Some(l) => val < theta || (val == theta && (i, j) < l),
                };
                if better {
                    theta = val;
                    leave = Some((i, j));
                }
            }
        }
        let (il, jl) = leave.expect("cycle has at least one minus arc");

        for (t, &(i, j)) in path.iter().enumerate() {
            if t % 2 == 0 {
                pi[i * n + j] = (pi[i * n + j] - theta).max(S::zero());
            } else {
                pi[i * n + j] += theta;
            }
        }
        pi[ie * n + je] = theta;
        pi[il * n + jl] = S::zero();
        in_basis[il * n + jl] = false;
        in_basis[ie * n + je] = true;
        let slot = basis
            .iter()
            .position(|&c| c == (il, jl))
            .expect("leaving cell is basic");
        basis[slot] = (ie, je);

        if theta > S::zero() {
            stalled = 0;
        } else {
            stalled += 1;
            if stalled > 4 * m * n {
                bland = true;
            }
        }
    }

    let mut total = S::zero();
    for &(i, j) in &basis {
        total += pi[i * n + j] * cost[i * n + j];
    }
    Ok((total, pi))
}

/// Arc path between row node `ie` and column node `je` in the basis tree.
/// Nodes are rows 0..m and columns m..m+n; returns the arcs in order from
/// the row end.
fn tree_path(
    basis: &[(usize, usize)],
    m: usize,
    n: usize,
    ie: usize,
    je: usize,
) -> Option<Vec<(usize, usize)>> {
    let nodes = m + n;
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nodes]; // (other node, arc idx)
    for (t, &(i, j)) in basis.iter().enumerate() {
        adj[i].push((m + j, t));
        adj[m + j].push((i, t));
    }
    let start = ie;
    let goal = m + je;
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; nodes]; // (prev node, arc idx)
    let mut visited = vec![false; nodes];
    visited[start] = true;
    let mut queue = std::collections::VecDeque::new();
    queue.push_back(start);
    while let Some(node) = queue.pop_front() {
        if node == goal {
            break;
        }
        for &(next, arc) in &adj[node] {
            if !visited[next] {
                visited[next] = true;
                parent[next] = Some((node, arc));
                queue.push_back(next);
            }
        }
    }
    if !visited[goal] {
        return None;
    }
    let mut arcs_rev = Vec::new();
    let mut node = goal;
    while node != start {
        let (prev, arc) = parent[node]?;
        arcs_rev.push(basis[arc]);
        node = prev;
    }
    arcs_rev.reverse();
    Some(arcs_rev)
}

/// Options for the field-level measure comparison.
#[derive(Clone, Copy, Debug)]
pub struct E4Options<S> {
    /// Per-component scaling of the atom tuple (ρ, m₁, m₂, S, E).
    pub scaling: [S; 5],
    /// Drop the energy coordinate (compare the (ρ, m₁, m₂, S) marginal).
    pub marginal: bool,
}

impl<S: Scalar> Default for E4Options<S> {
    fn default() -> Self {
        Self {
            scaling: [S::one(); 5],
            marginal: false,
        }
    }
}

/// L^q(Ω) norm of the cellwise W_q distance between the two empirical
/// measures built from solution-stack prefixes: at every finest-grid cell,
/// prefix `upto` of a stack contributes one atom per level — the prolonged
/// (ρ, m₁, m₂, S, E) tuple — with uniform weights.
///
/// Both stacks must share γ and the final time; entropy atoms use one
/// common analysis reference entropy (the smaller of the two stacks').
pub fn e4_field<S: Scalar>(
    stack_a: &SolutionStack<S>,
    upto_a: usize,
    stack_b: &SolutionStack<S>,
    upto_b: usize,
    q: S,
    opts: &E4Options<S>,
) -> Result<S> {
    check_q(q)?;
    if stack_a.gas().gamma() != stack_b.gas().gamma() {
        return Err(Error::Param("stacks have different gas models".into()));
    }
    if (stack_a.time() - stack_b.time()).abs() > S::lit(1e-12) {
        return Err(Error::Param("stacks have different final times".into()));
    }
    let target = stack_a.finest_n().max(stack_b.finest_n());
    let floor = stack_a.analysis_floor()?.min(stack_b.analysis_floor()?);
    let gas = stack_a.gas().with_s_floor(floor)?;

    let dim = if opts.marginal { 4 } else { 5 };
    let atoms_a = prefix_atoms(stack_a, upto_a, target, &gas, opts)?;
    let atoms_b = prefix_atoms(stack_b, upto_b, target, &gas, opts)?;

    let n_cells = target * target;
    let costs: Vec<S> = (0..n_cells)
        .into_par_iter()
        .map(|c| -> Result<S> {
            let coords_a: Vec<S> = atoms_a
                .iter()
                .flat_map(|planes| planes.iter().map(move |p| p[c]))
                .collect();
            let coords_b: Vec<S> = atoms_b
                .iter()
                .flat_map(|planes| planes.iter().map(move |p| p[c]))
                .collect();
            let mu = DiscreteMeasure::uniform(dim, coords_a)?;
            let nu = DiscreteMeasure::uniform(dim, coords_b)?;
            wq_cost(&mu, &nu, q)
        })
        .collect::<Result<Vec<S>>>()?;

    let area = (S::one() / S::from_usize(target).expect("grid size")).powi(2);
    let mut sum = S::zero();
    for c in costs {
        sum += c;
    }
    let total = sum * area;
    Ok(if q == S::one() { total } else { total.powf(S::one() / q) })
}

/// Per-level scaled atom planes on the target grid: outer index level,
/// inner index component (dim entries of length target²).
fn prefix_atoms<S: Scalar>(
    stack: &SolutionStack<S>,
    upto: usize,
    target: usize,
    gas: &GasModel<S>,
    opts: &E4Options<S>,
) -> Result<Vec<Vec<Vec<S>>>> {
    if upto == 0 || upto > stack.len() {
        return Err(Error::Param(format!(
            "prefix length {upto} outside 1..={}",
            stack.len()
        )));
    }
    let components: &[Variable] = if opts.marginal {
        &[
            Variable::Density,
            Variable::MomentumX,
            Variable::MomentumY,
            Variable::TotalEntropy,
        ]
    } else {
        &[
            Variable::Density,
            Variable::MomentumX,
            Variable::MomentumY,
            Variable::TotalEntropy,
            Variable::TotalEnergy,
        ]
    };
    let mut out = Vec::with_capacity(upto);
    for k in 0..upto {
        let field = stack.level(k);
        let n = field.grid().n();
        let mut per_level = Vec::with_capacity(components.len());
        for (ci, &var) in components.iter().enumerate() {
            let mut plane = crate::kconv::scalar_plane(field, gas, var)?;
            let s = opts.scaling[ci];
            if s != S::one() {
                for v in &mut plane {
                    *v = *v * s;
                }
            }
            per_level.push(crate::kconv::prolong(&plane, n, target)?);
        }
        out.push(per_level);
    }
    Ok(out)
}

/// E4 values for each row of the convergence table: prefix k+1 of the
/// stack against the full stack (a single-level stack yields one zero).
pub fn e4_column<S: Scalar>(
    stack: &SolutionStack<S>,
    q: S,
    opts: &E4Options<S>,
) -> Result<Vec<f64>> {
    let len = stack.len();
    if len == 0 {
        return Err(Error::Param("empty solution stack".into()));
    }
    if len == 1 {
        return Ok(vec![0.0]);
    }
    (0..len - 1)
        .map(|k| Ok(e4_field(stack, k + 1, stack, len, q, opts)?.to_f64_lossy()))
        .collect()
}

/// Attaches an E4 column (from [`e4_column`]) to a metrics table.
pub fn attach_e4(table: &mut MetricsTable, e4: &[f64]) -> Result<()> {
    if table.rows.len() != e4.len() {
        return Err(Error::Param(format!(
            "E4 column has {} entries for {} table rows",
            e4.len(),
            table.rows.len()
        )));
    }
    for (row, &v) in table.rows.iter_mut().zip(e4) {
        row.e4 = Some(v);
    }
    Ok(())
}
