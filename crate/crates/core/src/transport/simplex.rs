//! Primal network simplex for the balanced transportation problem.
//!
//! Supply atoms `0..n`, demand atoms `n..n+m` and an artificial root `n+m`.
//! The initial spanning tree joins every supply node to the root by an arc
//! of cost 0 and the root to every demand node by an arc of prohibitive cost,
//! which gives a strongly feasible basis. Entering arcs are chosen by block
//! search; the leaving arc follows the strongly feasible tie-breaking rule
//! (last blocking arc on the source side, first on the target side), so
//! degenerate pivots cannot cycle.

use nalgebra::DMatrix;

use super::{Method, TransportResult};
use crate::error::{Error, Result};

/// Largest number of cost entries accepted.
pub const SIZE_CAP: usize = 1 << 20;
/// Tolerance of the dual-feasibility certificate on the scaled costs.
pub const DUAL_TOL: f64 = 1e-9;

const PRICE_EPS: f64 = 1e-12;
const DIR_UP: i8 = 1;
const DIR_DOWN: i8 = -1;
const NONE: usize = usize::MAX;

struct Network {
    n: usize,
    m: usize,
    root: usize,
    cost: Vec<f64>,
    art_cost: f64,
    flow: Vec<f64>,
    parent: Vec<usize>,
    pred: Vec<usize>,
    dir: Vec<i8>,
    depth: Vec<usize>,
    pi: Vec<f64>,
    children: Vec<Vec<usize>>,
}

impl Network {
    fn real_arcs(&self) -> usize {
        self.n * self.m
    }

    fn source(&self, a: usize) -> usize {
        let r = self.real_arcs();
        if a < r {
            a / self.m
        } else {
            let u = a - r;
            if u < self.n {
                u
            } else {
                self.root
            }
        }
    }

    fn target(&self, a: usize) -> usize {
        let r = self.real_arcs();
        if a < r {
            self.n + a % self.m
        } else {
            let u = a - r;
            if u < self.n {
                self.root
            } else {
                u
            }
        }
    }

    fn arc_cost(&self, a: usize) -> f64 {
        let r = self.real_arcs();
        if a < r {
            self.cost[a]
        } else if a - r < self.n {
            0.0
        } else {
            self.art_cost
        }
    }

    fn reduced(&self, a: usize) -> f64 {
        self.cost[a] + self.pi[a / self.m] - self.pi[self.n + a % self.m]
    }

    fn new(cost: Vec<f64>, supply: &[f64], demand: &[f64]) -> Self {
        let n = supply.len();
        let m = demand.len();
        let nodes = n + m;
        let root = nodes;
        let art_cost = (nodes as f64 + 1.0) * 2.0;
        let r = n * m;
        let mut flow = vec![0.0; r + nodes];
        let mut parent = vec![root; nodes + 1];
        let mut pred = vec![NONE; nodes + 1];
        let mut dir = vec![0i8; nodes + 1];
        let mut pi = vec![0.0; nodes + 1];
        let mut depth = vec![1; nodes + 1];
        parent[root] = NONE;
        depth[root] = 0;
        for u in 0..nodes {
            let e = r + u;
            pred[u] = e;
            if u < n {
                dir[u] = DIR_UP;
                flow[e] = supply[u];
            } else {
                dir[u] = DIR_DOWN;
                flow[e] = demand[u - n];
                pi[u] = art_cost;
            }
        }
        let mut children = vec![Vec::new(); nodes + 1];
        children[root] = (0..nodes).collect();
        Self {
            n,
            m,
            root,
            cost,
            art_cost,
            flow,
            parent,
            pred,
            dir,
            depth,
            pi,
            children,
        }
    }

    /// Block pivot search over the real arcs.
    fn find_entering(&self, next: &mut usize, block: usize) -> Option<usize> {
        let total = self.real_arcs();
        let mut best = NONE;
        let mut best_rc = -PRICE_EPS;
        let mut count = 0;
        for k in 0..total {
            let a = (*next + k) % total;
            let rc = self.reduced(a);
            if rc < best_rc {
                best_rc = rc;
                best = a;
            }
            count += 1;
            if count == block {
                if best != NONE {
                    *next = (a + 1) % total;
                    return Some(best);
                }
                count = 0;
            }
        }
        if best != NONE {
            *next = (best + 1) % total;
            return Some(best);
        }
        None
    }

    fn join(&self, mut u: usize, mut v: usize) -> usize {
        while u != v {
            if self.depth[u] >= self.depth[v] {
                u = self.parent[u];
            } else {
                v = self.parent[v];
            }
        }
        u
    }

    fn remove_child(&mut self, p: usize, c: usize) {
        let list = &mut self.children[p];
        if let Some(pos) = list.iter().position(|&x| x == c) {
            list.swap_remove(pos);
        }
    }

    fn pivot(&mut self, e: usize) -> Result<()> {
        let s = self.source(e);
        let t = self.target(e);
        let j = self.join(s, t);

        let mut delta = f64::INFINITY;
        let mut u_out = NONE;
        let mut on_source_side = false;
        let mut u = s;
        while u != j {
            if self.dir[u] == DIR_UP {
                let d = self.flow[self.pred[u]];
                if d < delta {
                    delta = d;
                    u_out = u;
                    on_source_side = true;
                }
            }
            u = self.parent[u];
        }
        u = t;
        while u != j {
            if self.dir[u] == DIR_DOWN {
                let d = self.flow[self.pred[u]];
                if d <= delta {
                    delta = d;
                    u_out = u;
                    on_source_side = false;
                }
            }
            u = self.parent[u];
        }
        if u_out == NONE {
            return Err(Error::Infeasible {
                residual: f64::INFINITY,
            });
        }
        let delta = delta.max(0.0);

        if delta > 0.0 {
            self.flow[e] += delta;
            u = s;
            while u != j {
                let a = self.pred[u];
                self.flow[a] -= self.dir[u] as f64 * delta;
                u = self.parent[u];
            }
            u = t;
            while u != j {
                let a = self.pred[u];
                self.flow[a] += self.dir[u] as f64 * delta;
                u = self.parent[u];
            }
        }
        let leaving = self.pred[u_out];
        self.flow[leaving] = 0.0;

        // re-hang the subtree below the leaving arc at the entering arc
        let (u_in, attach, in_dir) = if on_source_side {
            (s, t, DIR_UP)
        } else {
            (t, s, DIR_DOWN)
        };
        let old_parent_of_out = self.parent[u_out];
        self.remove_child(old_parent_of_out, u_out);

        let mut path = vec![u_in];
        let mut v = u_in;
        while v != u_out {
            v = self.parent[v];
            path.push(v);
        }
        for k in (1..path.len()).rev() {
            let child = path[k - 1];
            let par = path[k];
            self.remove_child(par, child);
            self.parent[par] = child;
            self.pred[par] = self.pred[child];
            self.dir[par] = -self.dir[child];
            self.children[child].push(par);
        }
        self.parent[u_in] = attach;
        self.pred[u_in] = e;
        self.dir[u_in] = in_dir;
        self.children[attach].push(u_in);

        let mut stack = vec![u_in];
        while let Some(x) = stack.pop() {
            let p = self.parent[x];
            let a = self.pred[x];
            let c = self.arc_cost(a);
            self.depth[x] = self.depth[p] + 1;
            self.pi[x] = if self.dir[x] == DIR_UP {
                self.pi[p] - c
            } else {
                self.pi[p] + c
            };
            stack.extend(self.children[x].iter().copied());
        }
        Ok(())
    }
}

/// Min-cost coupling of `w_mu` and `w_nu` under the cost matrix, with an
/// optimal basic plan. Optimality is certified by dual feasibility.
pub fn discrete_ot_exact(cost: &DMatrix<f64>, w_mu: &[f64], w_nu: &[f64]) -> Result<TransportResult> {
    let (rows, cols) = (cost.nrows(), cost.ncols());
    if rows != w_mu.len() || cols != w_nu.len() {
        return Err(Error::DimensionMismatch {
            expected: rows * cols,
            found: w_mu.len() * w_nu.len(),
        });
    }
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidWeights("empty support".into()));
    }
    if rows.saturating_mul(cols) > SIZE_CAP {
        return Err(Error::SizeCap {
            rows,
            cols,
            cap: SIZE_CAP,
        });
    }
    let ta: f64 = w_mu.iter().sum();
    let tb: f64 = w_nu.iter().sum();
    if (ta - 1.0).abs() > 1e-9 || (tb - 1.0).abs() > 1e-9 || w_mu.iter().chain(w_nu).any(|w| !(*w >= 0.0)) {
        return Err(Error::InvalidWeights(format!(
            "marginal masses {ta} and {tb} must be normalized and nonnegative"
        )));
    }
    if cost.iter().any(|c| !c.is_finite()) {
        return Err(Error::DomainError("cost matrix has non-finite entries".into()));
    }

    let ia: Vec<usize> = (0..rows).filter(|&i| w_mu[i] > 0.0).collect();
    let ib: Vec<usize> = (0..cols).filter(|&j| w_nu[j] > 0.0).collect();
    let supply: Vec<f64> = ia.iter().map(|&i| w_mu[i]).collect();
    let mut demand: Vec<f64> = ib.iter().map(|&j| w_nu[j]).collect();
    // absorb the mass rounding difference into the largest demand
    let gap = supply.iter().sum::<f64>() - demand.iter().sum::<f64>();
    if let Some(k) = (0..demand.len()).max_by(|&a, &b| demand[a].total_cmp(&demand[b])) {
        demand[k] += gap;
    }

    let (n, m) = (ia.len(), ib.len());
    let shift = cost.min();
    let scale = {
        let span = cost.max() - shift;
        if span > 0.0 {
            span
        } else {
            1.0
        }
    };
    let mut scaled = Vec::with_capacity(n * m);
    for &i in &ia {
        for &j in &ib {
            scaled.push((cost[(i, j)] - shift) / scale);
        }
    }

    let mut net = Network::new(scaled, &supply, &demand);
    let block = ((n * m) as f64).sqrt().ceil().max(10.0) as usize;
    let mut next = 0;
    let limit = 64 * (n * m + n + m) + 1_000_000;
    let mut iters = 0;
    while let Some(e) = net.find_entering(&mut next, block) {
        net.pivot(e)?;
        iters += 1;
        if iters > limit {
            return Err(Error::Infeasible {
                residual: f64::NAN,
            });
        }
    }

    let residual: f64 = (0..n + m).map(|u| net.flow[n * m + u]).sum();
    if residual > 1e-9 {
        return Err(Error::Infeasible { residual });
    }
    let worst = (0..n * m).map(|a| net.reduced(a)).fold(0.0f64, f64::min);
    if worst < -DUAL_TOL {
        return Err(Error::Infeasible { residual: worst });
    }

    let mut plan = Vec::new();
    let mut total = 0.0;
    for a in 0..n * m {
        let f = net.flow[a];
        if f > 0.0 {
            let (i, j) = (ia[a / m], ib[a % m]);
            plan.push((i, j, f));
            total += f * cost[(i, j)];
        }
    }
    Ok(TransportResult {
        cost: total,
        plan: Some(plan),
        method: Method::ExactOt,
        error: -worst * scale,
    })
}
