//! Resistive network solver built for stiff source-switch topologies.
//!
//! Driver switches in their on state are nine orders of magnitude below the
//! memristor resistances; stamping them as conductances makes the node
//! matrix hopelessly ill-conditioned. Instead, any resistor at or below
//! `R_TIE` becomes a hard node merge (union-find), and fixed voltages live
//! on merged roots as Dirichlet values folded into the right-hand side.
//!
//! Devices whose resistance changes during a transient are declared as
//! movers. The base matrix excludes them entirely, so it is factored once
//! per topology; each integrator step then resolves only a k-by-k capacitance
//! system (k = number of movers) via the Woodbury identity and yields the
//! voltage drop across every mover in O(k^2).

use crate::error::{Error, Result};

/// Resistances at or below this merge their endpoints into one node.
pub const R_TIE: f64 = 1e-3;

pub type NodeId = usize;
pub type MoverId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Branch {
    a: NodeId,
    b: NodeId,
}

#[derive(Debug, Clone)]
pub struct NetBuilder {
    parent: Vec<usize>,
    rank: Vec<u8>,
    dirichlet: Vec<Option<f64>>,
    branches: Vec<(Branch, f64)>,
    movers: Vec<Branch>,
}

impl Default for NetBuilder {
    fn default() -> Self {
        Self::new()
    }
}

impl NetBuilder {
    pub fn new() -> Self {
        Self {
            parent: Vec::new(),
            rank: Vec::new(),
            dirichlet: Vec::new(),
            branches: Vec::new(),
            movers: Vec::new(),
        }
    }

    pub fn node(&mut self) -> NodeId {
        let id = self.parent.len();
        self.parent.push(id);
        self.rank.push(0);
        self.dirichlet.push(None);
        id
    }

    /// Allocate a node pinned to a fixed voltage.
    pub fn source(&mut self, volts: f64) -> NodeId {
        let n = self.node();
        self.dirichlet[n] = Some(volts);
        n
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn set_dirichlet(&mut self, n: NodeId, volts: f64) -> Result<()> {
        let r = self.find(n);
        match self.dirichlet[r] {
            Some(v) if (v - volts).abs() > 1e-12 * v.abs().max(volts.abs()).max(1.0) => {
                Err(Error::SingularNetwork(format!(
                    "node pinned to conflicting voltages {v} and {volts}"
                )))
            }
            _ => {
                self.dirichlet[r] = Some(volts);
                Ok(())
            }
        }
    }

    /// Merge two nodes into one electrical point.
    pub fn tie(&mut self, a: NodeId, b: NodeId) -> Result<()> {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return Ok(());
        }
        let merged = match (self.dirichlet[ra], self.dirichlet[rb]) {
            (Some(va), Some(vb)) => {
                if (va - vb).abs() > 1e-12 * va.abs().max(vb.abs()).max(1.0) {
                    return Err(Error::SingularNetwork(format!(
                        "tie would short fixed voltages {va} and {vb}"
                    )));
                }
                Some(va)
            }
            (v, None) => v,
            (None, v) => v,
        };
        let root = if self.rank[ra] >= self.rank[rb] {
            self.parent[rb] = ra;
            if self.rank[ra] == self.rank[rb] {
                self.rank[ra] += 1;
            }
            ra
        } else {
            self.parent[ra] = rb;
            rb
        };
        self.dirichlet[root] = merged;
        Ok(())
    }

    /// Fixed resistor. Values at or below `R_TIE` become a tie.
    pub fn resistor(&mut self, a: NodeId, b: NodeId, r: f64) -> Result<()> {
        if !(r >= 0.0) || !r.is_finite() {
            return Err(Error::InvalidParams(format!("resistance {r} is not physical")));
        }
        if r <= R_TIE {
            return self.tie(a, b);
        }
        self.branches.push((Branch { a, b }, 1.0 / r));
        Ok(())
    }

    /// Variable-resistance branch; its value is supplied at solve time.
    /// Returned ids index the `resistances` slice passed to the solvers.
    pub fn mover(&mut self, a: NodeId, b: NodeId) -> MoverId {
        self.movers.push(Branch { a, b });
        self.movers.len() - 1
    }

    pub fn finalize(mut self) -> Result<FactoredNet> {
        // Mark roots touched by any branch or mover; untouched nodes never
        // enter the system. Free roots are then indexed by the smallest
        // node id in their component, so callers control matrix ordering
        // (and thus the bandwidth) through node creation order.
        let n_nodes = self.parent.len();
        let mut touched = vec![false; n_nodes];
        let ends: Vec<NodeId> = self
            .branches
            .iter()
            .flat_map(|(br, _)| [br.a, br.b])
            .chain(self.movers.iter().flat_map(|br| [br.a, br.b]))
            .collect();
        for n in ends {
            let r = self.find(n);
            touched[r] = true;
        }
        let mut index: Vec<Option<usize>> = vec![None; n_nodes];
        let mut m = 0usize;
        for n in 0..n_nodes {
            let r = self.find(n);
            if touched[r] && self.dirichlet[r].is_none() && index[r].is_none() {
                index[r] = Some(m);
                m += 1;
            }
        }

        let mut node_root = vec![0usize; n_nodes];
        for (n, nr) in node_root.iter_mut().enumerate() {
            *nr = self.find(n);
        }
        let root_dir: Vec<Option<f64>> = self.dirichlet.clone();

        let mut fixed: Vec<(usize, usize, f64)> = Vec::new();
        for &(br, g) in &self.branches {
            let (ra, rb) = (node_root[br.a], node_root[br.b]);
            if ra == rb {
                continue; // endpoints merged
            }
            fixed.push((ra, rb, g));
        }
        let mover_ends: Vec<(usize, usize)> = self
            .movers
            .iter()
            .map(|br| (node_root[br.a], node_root[br.b]))
            .collect();

        // Border extraction: roots incident to branches spanning far more
        // than the typical locality would wreck a banded factorization, so
        // they are permuted last and handled as a dense border block.
        let (perm, n_border) = choose_ordering(m, &index, &fixed);
        let mut root_free: Vec<Option<usize>> = vec![None; n_nodes];
        for r in 0..n_nodes {
            if let Some(i) = index[r] {
                root_free[r] = Some(perm[i]);
            }
        }

        // Stamp the base system (movers excluded).
        let mut b0 = vec![0.0; m];
        let mut stamps: Vec<(usize, usize, f64)> = Vec::new();
        for &(ra, rb, g) in &fixed {
            match (root_free[ra], root_free[rb]) {
                (Some(i), Some(j)) => {
                    stamps.push((i, i, g));
                    stamps.push((j, j, g));
                    stamps.push((i.min(j), i.max(j), -g));
                }
                (Some(i), None) => {
                    stamps.push((i, i, g));
                    b0[i] += g * root_dir[rb].unwrap_or(0.0);
                }
                (None, Some(j)) => {
                    stamps.push((j, j, g));
                    b0[j] += g * root_dir[ra].unwrap_or(0.0);
                }
                (None, None) => {} // source-to-source: no unknown involved
            }
        }

        let factor = Factor::build(m, n_border, &stamps)?;
        let y0 = factor.solve_vec(&b0);

        let k = mover_ends.len();
        let mut z: Vec<Vec<f64>> = Vec::with_capacity(k);
        let mut uty0 = vec![0.0; k];
        let mut s_off = vec![0.0; k];
        for (mi, &(ra, rb)) in mover_ends.iter().enumerate() {
            let mut u = vec![0.0; m];
            if let Some(i) = root_free[ra] {
                u[i] += 1.0;
                uty0[mi] += y0[i];
            } else {
                s_off[mi] += root_dir[ra].unwrap_or(0.0);
            }
            if let Some(j) = root_free[rb] {
                u[j] -= 1.0;
                uty0[mi] -= y0[j];
            } else {
                s_off[mi] -= root_dir[rb].unwrap_or(0.0);
            }
            z.push(factor.solve_vec(&u));
        }
        let mut utz = vec![0.0; k * k];
        for i in 0..k {
            let (ra, rb) = mover_ends[i];
            for j in 0..k {
                let mut acc = 0.0;
                if let Some(a) = root_free[ra] {
                    acc += z[j][a];
                }
                if let Some(b) = root_free[rb] {
                    acc -= z[j][b];
                }
                utz[i * k + j] = acc;
            }
        }

        Ok(FactoredNet {
            m,
            y0,
            z,
            uty0,
            utz,
            s_off,
            node_root,
            root_free,
            root_dir,
            fixed,
            mover_ends,
        })
    }
}

/// Permutation moving long-branch roots to the end (dense border block).
/// Returns (old index -> new index, number of border roots). Movers do not
/// enter the base matrix and so never force a border.
fn choose_ordering(
    m: usize,
    index: &[Option<usize>],
    fixed: &[(usize, usize, f64)],
) -> (Vec<usize>, usize) {
    let limit = banded_span_limit(m);
    let pairs: Vec<(usize, usize)> = fixed
        .iter()
        .filter_map(|&(ra, rb, _)| match (index[ra], index[rb]) {
            (Some(i), Some(j)) => Some((i, j)),
            _ => None,
        })
        .collect();
    let mut long_count = vec![0usize; m];
    for &(i, j) in &pairs {
        if i.abs_diff(j) > limit {
            long_count[i] += 1;
            long_count[j] += 1;
        }
    }
    // Greedy cover: the root participating in more long branches absorbs
    // them into the border.
    let mut border = vec![false; m];
    let mut n_border = 0usize;
    for &(i, j) in &pairs {
        if i.abs_diff(j) > limit && !border[i] && !border[j] {
            let pick = if long_count[i] >= long_count[j] { i } else { j };
            border[pick] = true;
            n_border += 1;
        }
    }
    let mut perm = vec![0usize; m];
    let mut next = 0usize;
    for (i, p) in perm.iter_mut().enumerate() {
        if !border[i] {
            *p = next;
            next += 1;
        }
    }
    for (i, p) in perm.iter_mut().enumerate() {
        if border[i] {
            *p = next;
            next += 1;
        }
    }
    (perm, n_border)
}

fn banded_span_limit(m: usize) -> usize {
    (2.0 * (m as f64).sqrt()) as usize + 16
}

/// Cholesky factorization of the base matrix: dense for small systems,
/// banded with a dense border block for large structured ones.
enum Factor {
    Dense {
        n: usize,
        l: Vec<f64>, // row-major lower triangle, full storage
    },
    Banded {
        n1: usize,
        bw: usize,
        lb: Vec<f64>, // column-banded: lb[j*(bw+1) + (i-j)] = L[i][j]
        nb: usize,
        x: Vec<f64>,  // L_B^{-1} C, column-major n1 x nb
        ld: Vec<f64>, // dense Cholesky of the border Schur complement
    },
}

impl Factor {
    fn build(m: usize, n_border: usize, stamps: &[(usize, usize, f64)]) -> Result<Self> {
        if m == 0 {
            return Ok(Factor::Dense { n: 0, l: Vec::new() });
        }
        let nb = n_border;
        let n1 = m - nb;
        // Bandwidth over the leading (non-border) block.
        let mut bw = 0usize;
        for &(i, j, _) in stamps {
            let (lo, hi) = (i.min(j), i.max(j));
            if hi < n1 {
                bw = bw.max(hi - lo);
            }
        }
        let dense_cost = m * m;
        let banded_cost = n1 * (bw + 1) + n1 * nb + nb * nb;
        if m <= 1024 || banded_cost * 4 >= dense_cost {
            // Dense path.
            let mut a = vec![0.0; m * m];
            for &(i, j, g) in stamps {
                if i == j {
                    a[i * m + i] += g;
                } else {
                    a[i.max(j) * m + i.min(j)] += g;
                }
            }
            let l = dense_cholesky(m, a)?;
            return Ok(Factor::Dense { n: m, l });
        }
        // Banded + border path.
        let mut band = vec![0.0; n1 * (bw + 1)];
        let mut c = vec![0.0; n1 * nb]; // column-major border coupling
        let mut d = vec![0.0; nb * nb];
        for &(i, j, g) in stamps {
            let (lo, hi) = (i.min(j), i.max(j));
            if hi < n1 {
                if lo == hi {
                    band[lo * (bw + 1)] += g;
                } else {
                    band[lo * (bw + 1) + (hi - lo)] += g;
                }
            } else if lo < n1 {
                c[(hi - n1) * n1 + lo] += g;
            } else if lo == hi {
                d[(lo - n1) * nb + (lo - n1)] += g;
            } else {
                d[(hi - n1) * nb + (lo - n1)] += g;
                d[(lo - n1) * nb + (hi - n1)] += g;
            }
        }
        banded_cholesky(n1, bw, &mut band)?;
        let mut x = vec![0.0; n1 * nb];
        for col in 0..nb {
            let (src, dst) = (&c[col * n1..(col + 1) * n1], &mut x[col * n1..(col + 1) * n1]);
            dst.copy_from_slice(src);
            banded_forward(n1, bw, &band, dst);
        }
        // Border Schur complement D - X^T X, then its dense Cholesky.
        let mut dp = d;
        for i in 0..nb {
            for j in 0..=i {
                let mut acc = 0.0;
                let (xi, xj) = (&x[i * n1..(i + 1) * n1], &x[j * n1..(j + 1) * n1]);
                for t in 0..n1 {
                    acc += xi[t] * xj[t];
                }
                dp[i * nb + j] -= acc;
                if i != j {
                    dp[j * nb + i] -= acc;
                }
            }
        }
        let ld = dense_cholesky(nb, dp)?;
        Ok(Factor::Banded {
            n1,
            bw,
            lb: band,
            nb,
            x,
            ld,
        })
    }

    fn solve_vec(&self, b: &[f64]) -> Vec<f64> {
        let mut v = b.to_vec();
        self.solve_in_place(&mut v);
        v
    }

    fn solve_in_place(&self, b: &mut [f64]) {
        match self {
            Factor::Dense { n, l } => {
                dense_forward(*n, l, b);
                dense_backward(*n, l, b);
            }
            Factor::Banded { n1, bw, lb, nb, x, ld } => {
                let (b1, b2) = b.split_at_mut(*n1);
                banded_forward(*n1, *bw, lb, b1);
                for col in 0..*nb {
                    let xc = &x[col * n1..(col + 1) * n1];
                    let mut acc = 0.0;
                    for t in 0..*n1 {
                        acc += xc[t] * b1[t];
                    }
                    b2[col] -= acc;
                }
                dense_forward(*nb, ld, b2);
                dense_backward(*nb, ld, b2);
                for col in 0..*nb {
                    let xc = &x[col * n1..(col + 1) * n1];
                    for t in 0..*n1 {
                        b1[t] -= xc[t] * b2[col];
                    }
                }
                banded_backward(*n1, *bw, lb, b1);
            }
        }
    }
}

fn dense_cholesky(n: usize, mut a: Vec<f64>) -> Result<Vec<f64>> {
    for j in 0..n {
        for k in 0..j {
            let ljk = a[j * n + k];
            if ljk != 0.0 {
                for i in j..n {
                    a[i * n + j] -= a[i * n + k] * ljk;
                }
            }
        }
        let d = a[j * n + j];
        if !(d > 0.0) {
            return Err(Error::SingularNetwork(format!(
                "node matrix not positive definite at pivot {j} (floating subnetwork?)"
            )));
        }
        let inv = 1.0 / d.sqrt();
        for i in j..n {
            a[i * n + j] *= inv;
        }
    }
    Ok(a)
}

fn dense_forward(n: usize, l: &[f64], b: &mut [f64]) {
    for i in 0..n {
        let mut acc = b[i];
        for k in 0..i {
            acc -= l[i * n + k] * b[k];
        }
        b[i] = acc / l[i * n + i];
    }
}

fn dense_backward(n: usize, l: &[f64], b: &mut [f64]) {
    for i in (0..n).rev() {
        let mut acc = b[i];
        for k in i + 1..n {
            acc -= l[k * n + i] * b[k];
        }
        b[i] = acc / l[i * n + i];
    }
}

fn banded_cholesky(n: usize, bw: usize, band: &mut [f64]) -> Result<()> {
    let w = bw + 1;
    for j in 0..n {
        for k in j.saturating_sub(bw)..j {
            let ljk = band[k * w + (j - k)];
            if ljk != 0.0 {
                let hi = (k + bw).min(n - 1);
                for i in j..=hi {
                    band[j * w + (i - j)] -= ljk * band[k * w + (i - k)];
                }
            }
        }
        let d = band[j * w];
        if !(d > 0.0) {
            return Err(Error::SingularNetwork(format!(
                "node matrix not positive definite at banded pivot {j}"
            )));
        }
        let inv = 1.0 / d.sqrt();
        let hi = (j + bw).min(n - 1);
        for i in j..=hi {
            band[j * w + (i - j)] *= inv;
        }
    }
    Ok(())
}

fn banded_forward(n: usize, bw: usize, band: &[f64], b: &mut [f64]) {
    let w = bw + 1;
    for i in 0..n {
        let mut acc = b[i];
        for k in i.saturating_sub(bw)..i {
            acc -= band[k * w + (i - k)] * b[k];
        }
        b[i] = acc / band[i * w];
    }
}

fn banded_backward(n: usize, bw: usize, band: &[f64], b: &mut [f64]) {
    let w = bw + 1;
    for i in (0..n).rev() {
        let mut acc = b[i];
        let hi = (i + bw).min(n - 1);
        for j in i + 1..=hi {
            acc -= band[i * w + (j - i)] * b[j];
        }
        b[i] = acc / band[i * w];
    }
}

/// A factored network ready for repeated solves with varying mover values.
pub struct FactoredNet {
    m: usize,
    y0: Vec<f64>,
    z: Vec<Vec<f64>>,
    uty0: Vec<f64>,
    utz: Vec<f64>,
    s_off: Vec<f64>,
    /// Union-find root of each original node.
    node_root: Vec<usize>,
    /// Per root: index into the free unknown vector, if any.
    root_free: Vec<Option<usize>>,
    /// Per root: imposed voltage, if any.
    root_dir: Vec<Option<f64>>,
    /// Every conducting branch as (root a, root b, conductance).
    fixed: Vec<(usize, usize, f64)>,
    mover_ends: Vec<(usize, usize)>,
}

/// Full node-voltage solution for one set of mover resistances.
pub struct NetSolution<'a> {
    net: &'a FactoredNet,
    v: Vec<f64>,
    drops: Vec<f64>,
}

impl FactoredNet {
    pub fn num_free(&self) -> usize {
        self.m
    }

    pub fn num_movers(&self) -> usize {
        self.mover_ends.len()
    }

    /// Voltage drop across each mover (a side minus b side) for the given
    /// mover resistances. O(k^2) after the one-time factorization.
    pub fn solve_drops(&self, resistances: &[f64]) -> Result<Vec<f64>> {
        Ok(self.cap_solve(resistances)?.1)
    }

    fn cap_solve(&self, resistances: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let k = self.mover_ends.len();
        assert_eq!(resistances.len(), k, "one resistance per mover");
        let mut cap = self.utz.clone();
        let mut rhs = vec![0.0; k];
        for i in 0..k {
            if !(resistances[i] > R_TIE) || !resistances[i].is_finite() {
                return Err(Error::InvalidParams(format!(
                    "mover {i} resistance {} out of range",
                    resistances[i]
                )));
            }
            cap[i * k + i] += resistances[i]; // G^{-1} diagonal
            rhs[i] = self.uty0[i] + self.s_off[i];
        }
        let w = small_solve(k, &mut cap, &rhs)?;
        let mut drops = vec![0.0; k];
        for i in 0..k {
            let mut acc = self.uty0[i] + self.s_off[i];
            for j in 0..k {
                acc -= self.utz[i * k + j] * w[j];
            }
            drops[i] = acc;
        }
        Ok((w, drops))
    }

    /// Full solution with every node voltage materialized; O(m k).
    pub fn solve_full(&self, resistances: &[f64]) -> Result<NetSolution<'_>> {
        let (w, drops) = self.cap_solve(resistances)?;
        let mut v = self.y0.clone();
        for (j, zj) in self.z.iter().enumerate() {
            let wj = w[j];
            if wj != 0.0 {
                for (vi, zi) in v.iter_mut().zip(zj.iter()) {
                    *vi -= zi * wj;
                }
            }
        }
        Ok(NetSolution { net: self, v, drops })
    }
}

impl NetSolution<'_> {
    pub fn voltage(&self, node: NodeId) -> f64 {
        self.root_voltage(self.net.node_root[node])
    }

    fn root_voltage(&self, root: usize) -> f64 {
        if let Some(val) = self.net.root_dir[root] {
            return val;
        }
        match self.net.root_free[root] {
            Some(i) => self.v[i],
            None => f64::NAN, // node never wired into the network
        }
    }

    pub fn mover_drop(&self, m: MoverId) -> f64 {
        self.drops[m]
    }

    /// Net current flowing into the given set of nodes from the rest of the
    /// network. Used to sense the current absorbed by grounded line ends.
    pub fn current_into(&self, sinks: &[NodeId], resistances: &[f64]) -> f64 {
        let mut is_sink = vec![false; self.net.root_dir.len()];
        for &n in sinks {
            is_sink[self.net.node_root[n]] = true;
        }
        let mut total = 0.0;
        for &(ra, rb, g) in &self.net.fixed {
            match (is_sink[ra], is_sink[rb]) {
                (true, false) => total += g * (self.root_voltage(rb) - self.root_voltage(ra)),
                (false, true) => total += g * (self.root_voltage(ra) - self.root_voltage(rb)),
                _ => {}
            }
        }
        for (mi, &(ra, rb)) in self.net.mover_ends.iter().enumerate() {
            let i_ab = self.drops[mi] / resistances[mi];
            match (is_sink[ra], is_sink[rb]) {
                (true, false) => total -= i_ab,
                (false, true) => total += i_ab,
                _ => {}
            }
        }
        total
    }

    /// Largest relative KCL violation over free nodes, for auditing.
    pub fn kcl_residual(&self, resistances: &[f64]) -> f64 {
        let m = self.net.m;
        let mut net_current = vec![0.0f64; m];
        let mut scale = vec![0.0f64; m];
        for &(ra, rb, g) in &self.net.fixed {
            let i_ab = g * (self.root_voltage(ra) - self.root_voltage(rb));
            if let Some(i) = self.net.root_free[ra] {
                net_current[i] -= i_ab;
                scale[i] = scale[i].max(i_ab.abs());
            }
            if let Some(j) = self.net.root_free[rb] {
                net_current[j] += i_ab;
                scale[j] = scale[j].max(i_ab.abs());
            }
        }
        for (mi, &(ra, rb)) in self.net.mover_ends.iter().enumerate() {
            let i_ab = self.drops[mi] / resistances[mi];
            if let Some(i) = self.net.root_free[ra] {
                net_current[i] -= i_ab;
                scale[i] = scale[i].max(i_ab.abs());
            }
            if let Some(j) = self.net.root_free[rb] {
                net_current[j] += i_ab;
                scale[j] = scale[j].max(i_ab.abs());
            }
        }
        net_current
            .iter()
            .zip(scale.iter())
            .map(|(r, s)| if *s > 0.0 { r.abs() / s } else { r.abs() })
            .fold(0.0, f64::max)
    }
}

/// Gaussian elimination with partial pivoting for the k-by-k capacitance
/// system; k is 1 or 2 in practice.
fn small_solve(k: usize, a: &mut [f64], b: &[f64]) -> Result<Vec<f64>> {
    let mut x = b.to_vec();
    for col in 0..k {
        let piv = (col..k)
            .max_by(|&i, &j| a[i * k + col].abs().partial_cmp(&a[j * k + col].abs()).unwrap())
            .unwrap();
        if a[piv * k + col].abs() < 1e-300 {
            return Err(Error::SingularNetwork("degenerate mover coupling".into()));
        }
        if piv != col {
            for c in 0..k {
                a.swap(col * k + c, piv * k + c);
            }
            x.swap(col, piv);
        }
        let inv = 1.0 / a[col * k + col];
        for row in col + 1..k {
            let f = a[row * k + col] * inv;
            if f != 0.0 {
                for c in col..k {
                    a[row * k + c] -= f * a[col * k + c];
                }
                x[row] -= f * x[col];
            }
        }
    }
    for row in (0..k).rev() {
        let mut acc = x[row];
        for c in row + 1..k {
            acc -= a[row * k + c] * x[c];
        }
        x[row] = acc / a[row * k + row];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn series_switch_collapses_to_tie() {
        // 1 V - 1e-9 ohm - node - 1 kohm - 2 kohm - gnd: the switch must
        // not degrade the divider.
        let mut nb = NetBuilder::new();
        let src = nb.source(1.0);
        let top = nb.node();
        let mid = nb.node();
        let gnd = nb.source(0.0);
        nb.resistor(src, top, 1e-9).unwrap();
        nb.resistor(top, mid, 1e3).unwrap();
        nb.resistor(mid, gnd, 2e3).unwrap();
        let net = nb.finalize().unwrap();
        let sol = net.solve_full(&[]).unwrap();
        assert!((sol.voltage(mid) - 2.0 / 3.0).abs() < 1e-14);
        assert!((sol.voltage(top) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn mover_drop_matches_direct_restamp() {
        // Random ladder with two movers: the Woodbury drops must agree with
        // re-stamping the movers as fixed resistors.
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        for _ in 0..20 {
            let n = 12;
            let r: Vec<f64> = (0..n + 1).map(|_| rng.gen_range(1e2..1e6)).collect();
            let (rm1, rm2) = (rng.gen_range(1e3..1e6), rng.gen_range(1e3..1e6));

            let mut nb = NetBuilder::new();
            let src = nb.source(1.0);
            let gnd = nb.source(0.0);
            let nodes: Vec<_> = (0..n).map(|_| nb.node()).collect();
            nb.resistor(src, nodes[0], r[0]).unwrap();
            for i in 0..n - 1 {
                nb.resistor(nodes[i], nodes[i + 1], r[i + 1]).unwrap();
            }
            nb.resistor(nodes[n - 1], gnd, r[n]).unwrap();
            let _ = nb.mover(nodes[2], gnd);
            let _ = nb.mover(nodes[7], nodes[3]);
            let net = nb.finalize().unwrap();
            let drops = net.solve_drops(&[rm1, rm2]).unwrap();

            let mut nb2 = NetBuilder::new();
            let src2 = nb2.source(1.0);
            let gnd2 = nb2.source(0.0);
            let nodes2: Vec<_> = (0..n).map(|_| nb2.node()).collect();
            nb2.resistor(src2, nodes2[0], r[0]).unwrap();
            for i in 0..n - 1 {
                nb2.resistor(nodes2[i], nodes2[i + 1], r[i + 1]).unwrap();
            }
            nb2.resistor(nodes2[n - 1], gnd2, r[n]).unwrap();
            nb2.resistor(nodes2[2], gnd2, rm1).unwrap();
            nb2.resistor(nodes2[7], nodes2[3], rm2).unwrap();
            let net2 = nb2.finalize().unwrap();
            let sol2 = net2.solve_full(&[]).unwrap();

            let d1 = sol2.voltage(nodes2[2]) - 0.0;
            let d2 = sol2.voltage(nodes2[7]) - sol2.voltage(nodes2[3]);
            assert!((drops[0] - d1).abs() < 1e-9 * d1.abs().max(1.0), "{} vs {}", drops[0], d1);
            assert!((drops[1] - d2).abs() < 1e-9 * d2.abs().max(1.0));

            let sol = net.solve_full(&[rm1, rm2]).unwrap();
            let res = sol.kcl_residual(&[rm1, rm2]);
            assert!(res < 1e-10, "residual = {res:.3e}");
        }
    }

    #[test]
    fn conflicting_sources_rejected() {
        let mut nb = NetBuilder::new();
        let a = nb.source(1.0);
        let b = nb.source(0.5);
        assert!(nb.resistor(a, b, 1e-9).is_err());
    }

    #[test]
    fn floating_subnetwork_is_singular() {
        let mut nb = NetBuilder::new();
        let a = nb.node();
        let b = nb.node();
        nb.resistor(a, b, 1e3).unwrap();
        assert!(nb.finalize().is_err());
    }

    #[test]
    fn banded_path_matches_dense_on_grid() {
        // A resistor grid large enough to trigger the banded factorization,
        // solved both ways by toggling construction size.
        let build = |n: usize| -> (FactoredNet, Vec<NodeId>) {
            let mut nb = NetBuilder::new();
            let src = nb.source(1.0);
            let gnd = nb.source(0.0);
            let nodes: Vec<NodeId> = (0..n * n).map(|_| nb.node()).collect();
            for r in 0..n {
                for c in 0..n {
                    let i = nodes[r * n + c];
                    if c + 1 < n {
                        nb.resistor(i, nodes[r * n + c + 1], 100.0 + (r + c) as f64).unwrap();
                    }
                    if r + 1 < n {
                        nb.resistor(i, nodes[(r + 1) * n + c], 150.0 + (r * c) as f64).unwrap();
                    }
                }
            }
            nb.resistor(src, nodes[0], 10.0).unwrap();
            nb.resistor(nodes[n * n - 1], gnd, 10.0).unwrap();
            (nb.finalize().unwrap(), nodes)
        };
        // 40x40 grid: 1600 free nodes, above the dense cutoff.
        let (net, nodes) = build(40);
        let sol = net.solve_full(&[]).unwrap();
        assert!(sol.kcl_residual(&[]) < 1e-10);
        // Potentials must descend monotonically along the main diagonal.
        let d0 = sol.voltage(nodes[0]);
        let d1 = sol.voltage(nodes[20 * 40 + 20]);
        let d2 = sol.voltage(nodes[40 * 40 - 1]);
        assert!(d0 > d1 && d1 > d2, "{d0} {d1} {d2}");
    }
}
