//! Ulam discretization of piecewise affine maps and the ergodic
//! decomposition read off from it.
//!
//! Cell-to-cell weights are exact: the image of a cell under an affine
//! branch is an interval, and the weight of `i → j` is the fraction of that
//! image lying in cell `j`. Terminal strongly connected classes of the
//! positive-weight digraph stand in for acip supports, their cyclic period
//! for the mixing period, and the stationary vector for the density.
//!
//! Bin boundaries are the uniform grid, every branch endpoint, and the first
//! `orbit_depth` one-sided forward images of the branch endpoints. Support
//! boundaries of the acips are such images, so the supports become exact
//! unions of cells.

use crate::pwamap::{MapError, PiecewiseAffineMap, Side};
use rayon::prelude::*;
use serde::Serialize;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ErgodicError {
    #[error("map is not expanding (minimum |slope| = {0})")]
    NotExpanding(f64),
    #[error("need at least 10 bins, got {0}")]
    TooFewBins(usize),
    #[error("power iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error(transparent)]
    Map(#[from] MapError),
}

/// Tunables of the discretization and of the density solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UlamConfig {
    /// Number of forward images of each branch endpoint inserted as bin edges.
    /// `None` picks the depth at which the minimal expansion reaches `1e6`.
    pub orbit_depth: Option<usize>,
    /// Transitions lighter than this are dropped.
    pub edge_threshold: f64,
    /// Total-variation stopping tolerance for power iteration.
    pub power_tol: f64,
    pub power_max_iter: usize,
    /// Run the `2n` refinement check in [`analyze_with`].
    pub refine: bool,
    /// Density refinement passes when `TV(n, 2n) ≤ density_tv_constant / n`.
    pub density_tv_constant: f64,
}

impl Default for UlamConfig {
    fn default() -> Self {
        UlamConfig {
            orbit_depth: None,
            edge_threshold: 1e-14,
            power_tol: 1e-12,
            power_max_iter: 1_000_000,
            refine: true,
            density_tv_constant: 50.0,
        }
    }
}

/// Row-stochastic cell transition structure, stored row-compressed.
#[derive(Debug, Clone)]
pub struct UlamModel {
    edges: Vec<f64>,
    uniform_bins: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    weights: Vec<f64>,
}

impl UlamModel {
    pub fn cell_count(&self) -> usize {
        self.edges.len() - 1
    }

    pub fn uniform_bins(&self) -> usize {
        self.uniform_bins
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn cell(&self, i: usize) -> (f64, f64) {
        (self.edges[i], self.edges[i + 1])
    }

    pub fn width(&self, i: usize) -> f64 {
        self.edges[i + 1] - self.edges[i]
    }

    /// Nonzero entries `(j, weight)` of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.weights[r].iter().copied())
    }

    pub fn successors(&self, i: usize) -> &[usize] {
        &self.cols[self.row_ptr[i]..self.row_ptr[i + 1]]
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    /// Largest deviation of a row sum from 1.
    pub fn max_row_error(&self) -> f64 {
        (0..self.cell_count())
            .map(|i| (self.row(i).map(|(_, w)| w).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Cell containing `x` (cells are half-open on the right, the last closed).
    pub fn cell_of(&self, x: f64) -> usize {
        self.edges
            .partition_point(|&e| e <= x)
            .saturating_sub(1)
            .min(self.cell_count() - 1)
    }
}

pub fn build_ulam(f: &PiecewiseAffineMap, n: usize) -> Result<UlamModel, ErgodicError> {
    build_ulam_with(f, n, &UlamConfig::default())
}

/// Relative distance below which two bin edges are identified.
const MERGE_TOL: f64 = 1e-9;

fn auto_depth(expansion: f64) -> usize {
    ((1e6f64).ln() / expansion.ln()).ceil().clamp(16.0, 2048.0) as usize
}

fn bin_edges(f: &PiecewiseAffineMap, n: usize, cfg: &UlamConfig) -> Result<Vec<f64>, ErgodicError> {
    let (lo, hi) = f.domain();
    let len = hi - lo;
    let depth = cfg.orbit_depth.unwrap_or_else(|| auto_depth(f.min_expansion()));
    // (position, priority): branch endpoints win merges, then orbit points
    // by depth, then the uniform grid
    let uniform = usize::MAX;
    let mut points: Vec<(f64, usize)> = (0..=n).map(|k| (lo + len * (k as f64) / (n as f64), uniform)).collect();
    for b in f.branches() {
        points.push((b.lo, 0));
        points.push((b.hi, 0));
        for (x0, side) in [(b.lo, Side::Right), (b.hi, Side::Left)] {
            let (mut x, mut side) = (x0, side);
            for step in 1..=depth {
                match f.eval_limit(x, side) {
                    Ok(l) => {
                        points.push((l.value, step));
                        x = l.value;
                        side = l.side;
                    }
                    Err(_) => break,
                }
            }
        }
    }
    points.sort_by(|p, q| p.0.total_cmp(&q.0));
    let merge = MERGE_TOL * len;
    let mut edges: Vec<f64> = Vec::with_capacity(points.len());
    let mut i = 0;
    while i < points.len() {
        let mut best = points[i];
        let mut j = i + 1;
        while j < points.len() && points[j].0 - points[j - 1].0 <= merge {
            if points[j].1 < best.1 {
                best = points[j];
            }
            j += 1;
        }
        edges.push(best.0);
        i = j;
    }
    edges[0] = lo;
    let last = edges.len() - 1;
    edges[last] = hi;
    Ok(edges)
}

pub fn build_ulam_with(f: &PiecewiseAffineMap, n: usize, cfg: &UlamConfig) -> Result<UlamModel, ErgodicError> {
    if n < 10 {
        return Err(ErgodicError::TooFewBins(n));
    }
    if !f.is_expanding() {
        return Err(ErgodicError::NotExpanding(f.min_expansion()));
    }
    let edges = bin_edges(f, n, cfg)?;
    let cells = edges.len() - 1;
    let max_slope = f.branches().iter().map(|b| b.slope.abs()).fold(0.0, f64::max);
    let snap = MERGE_TOL * f.len() * max_slope;
    // Image endpoints snap to a nearby edge, but never by more than a
    // quarter of the excess of the image over the cell, so snapped images
    // stay strictly longer than their cells.
    let snap_to_edge = |y: f64, limit: f64| {
        let k = edges.partition_point(|&e| e < y);
        [k.wrapping_sub(1), k]
            .iter()
            .filter_map(|&c| edges.get(c).copied())
            .filter(|e| (e - y).abs() <= limit)
            .min_by(|p, q| (p - y).abs().total_cmp(&(q - y).abs()))
            .unwrap_or(y)
    };
    let rows: Vec<Vec<(usize, f64)>> = (0..cells)
        .into_par_iter()
        .map(|i| {
            let (a, b) = (edges[i], edges[i + 1]);
            let branch = &f.branches()[f.locate(0.5 * (a + b), Side::Right).expect("cell inside domain")];
            let (u, v) = (branch.apply(a), branch.apply(b));
            let (u, v) = (u.min(v), u.max(v));
            let limit = snap.min(0.25 * ((v - u) - (b - a)));
            let (ya, yb) = (snap_to_edge(u, limit), snap_to_edge(v, limit));
            let span = yb - ya;
            let mut row = Vec::new();
            let mut j = edges.partition_point(|&e| e <= ya).saturating_sub(1).min(cells - 1);
            while j < cells && edges[j] < yb {
                let overlap = yb.min(edges[j + 1]) - ya.max(edges[j]);
                let w = overlap / span;
                if w >= cfg.edge_threshold {
                    row.push((j, w));
                }
                j += 1;
            }
            let total: f64 = row.iter().map(|&(_, w)| w).sum();
            for e in &mut row {
                e.1 /= total;
            }
            row
        })
        .collect();
    let mut row_ptr = Vec::with_capacity(cells + 1);
    let mut cols = Vec::new();
    let mut weights = Vec::new();
    row_ptr.push(0);
    for row in rows {
        for (j, w) in row {
            cols.push(j);
            weights.push(w);
        }
        row_ptr.push(cols.len());
    }
    Ok(UlamModel {
        edges,
        uniform_bins: n,
        row_ptr,
        cols,
        weights,
    })
}

/// Strongly connected components (iterative Tarjan), in discovery order.
fn strongly_connected(model: &UlamModel) -> Vec<Vec<usize>> {
    let n = model.cell_count();
    const UNSEEN: usize = usize::MAX;
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comps = Vec::new();
    let mut next = 0usize;
    // (vertex, position in its successor list)
    let mut call: Vec<(usize, usize)> = Vec::new();
    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        call.push((root, 0));
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            let succ = model.successors(v);
            if *pos < succ.len() {
                let w = succ[*pos];
                *pos += 1;
                if index[w] == UNSEEN {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack");
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    comps.push(comp);
                }
            }
        }
    }
    comps
}

/// Closed strongly connected classes of the transition digraph, ordered by
/// their first cell.
pub fn terminal_classes(model: &UlamModel) -> Vec<Vec<usize>> {
    let comps = strongly_connected(model);
    let mut comp_of = vec![0usize; model.cell_count()];
    for (c, comp) in comps.iter().enumerate() {
        for &v in comp {
            comp_of[v] = c;
        }
    }
    let mut out: Vec<Vec<usize>> = comps
        .iter()
        .enumerate()
        .filter(|(c, comp)| {
            comp.iter()
                .all(|&v| model.successors(v).iter().all(|&w| comp_of[w] == *c))
        })
        .map(|(_, comp)| comp.clone())
        .collect();
    out.sort_by_key(|c| c[0]);
    out
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Period of a closed class and its cyclic parts, listed so that the
/// transitions carry part `r` into part `r + 1 (mod period)`.
pub fn class_period(model: &UlamModel, class: &[usize]) -> (usize, Vec<Vec<usize>>) {
    let n = model.cell_count();
    let mut member = vec![false; n];
    for &v in class {
        member[v] = true;
    }
    let mut level = vec![usize::MAX; n];
    let mut queue = std::collections::VecDeque::new();
    level[class[0]] = 0;
    queue.push_back(class[0]);
    while let Some(u) = queue.pop_front() {
        for &w in model.successors(u) {
            if member[w] && level[w] == usize::MAX {
                level[w] = level[u] + 1;
                queue.push_back(w);
            }
        }
    }
    let mut g = 0usize;
    for &u in class {
        for &w in model.successors(u) {
            if member[w] {
                let diff = (level[u] as i64 + 1 - level[w] as i64).unsigned_abs() as usize;
                g = gcd(g, diff);
            }
        }
    }
    let period = g.max(1);
    let mut parts = vec![Vec::new(); period];
    for &v in class {
        parts[level[v] % period].push(v);
    }
    (period, parts)
}

/// Stationary vector restricted to a class.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityEstimate {
    /// Probability mass per class cell (same order as the class).
    pub mass: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

/// Left fixed vector of the class-restricted transitions, by power iteration
/// on the operator averaged over one period.
pub fn stationary_density(
    model: &UlamModel,
    class: &[usize],
    period: usize,
    tol: f64,
    max_iter: usize,
) -> Result<DensityEstimate, ErgodicError> {
    let n = model.cell_count();
    let mut local = vec![usize::MAX; n];
    for (k, &v) in class.iter().enumerate() {
        local[v] = k;
    }
    let m = class.len();
    let rows: Vec<Vec<(usize, f64)>> = class
        .iter()
        .map(|&v| {
            model
                .row(v)
                .filter(|&(w, _)| local[w] != usize::MAX)
                .map(|(w, p)| (local[w], p))
                .collect()
        })
        .collect();
    let total_width: f64 = class.iter().map(|&v| model.width(v)).sum();
    let mut v: Vec<f64> = class.iter().map(|&c| model.width(c) / total_width).collect();
    let mut acc = vec![0.0; m];
    let mut w = vec![0.0; m];
    let mut tmp = vec![0.0; m];
    let period = period.max(1);
    let mut residual = f64::INFINITY;
    for it in 1..=max_iter {
        acc.iter_mut().for_each(|a| *a = 0.0);
        w.copy_from_slice(&v);
        for step in 0..period {
            for (a, x) in acc.iter_mut().zip(&w) {
                *a += x;
            }
            if step + 1 < period {
                tmp.iter_mut().for_each(|t| *t = 0.0);
                for (i, row) in rows.iter().enumerate() {
                    let xi = w[i];
                    if xi != 0.0 {
                        for &(j, p) in row {
                            tmp[j] += xi * p;
                        }
                    }
                }
                std::mem::swap(&mut w, &mut tmp);
            }
        }
        // one more step so that the averaged operator is Σ_{j=1..k} P^j / k
        tmp.iter_mut().for_each(|t| *t = 0.0);
        for (i, row) in rows.iter().enumerate() {
            let xi = acc[i];
            if xi != 0.0 {
                for &(j, p) in row {
                    tmp[j] += xi * p;
                }
            }
        }
        let sum: f64 = tmp.iter().sum();
        residual = 0.5 * tmp.iter().zip(&v).map(|(a, b)| (a / sum - b).abs()).sum::<f64>();
        for (x, t) in v.iter_mut().zip(&tmp) {
            *x = t / sum;
        }
        if residual < tol {
            return Ok(DensityEstimate {
                mass: v,
                iterations: it,
                residual,
            });
        }
    }
    Err(ErgodicError::NoConvergence {
        iterations: max_iter,
        residual,
    })
}

/// One ergodic component as seen by the discretization.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErgodicComponent {
    /// Union of cells, merged into maximal intervals.
    pub support: Vec<[f64; 2]>,
    pub support_measure: f64,
    pub period: usize,
    pub cell_count: usize,
    pub density_iterations: usize,
    pub density_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub density_csv: Option<String>,
    #[serde(skip)]
    pub cells: Vec<usize>,
    #[serde(skip)]
    pub cyclic_parts: Vec<Vec<usize>>,
    /// Stationary mass per cell, aligned with `cells`.
    #[serde(skip)]
    pub mass: Vec<f64>,
    #[serde(skip)]
    pub cell_bounds: Vec<[f64; 2]>,
}

impl ErgodicComponent {
    /// CSV with columns `bin_lo,bin_hi,density` (mass divided by width).
    pub fn density_table(&self) -> String {
        let mut out = String::from("bin_lo,bin_hi,density\n");
        for (b, m) in self.cell_bounds.iter().zip(&self.mass) {
            let _ = writeln!(out, "{},{},{}", b[0], b[1], m / (b[1] - b[0]));
        }
        out
    }

    /// Whether every support interval lies within `radius` of some point of
    /// `trace` (distance measured around a circle of length `period_len`).
    pub fn within(&self, trace: &[f64], radius: f64, period_len: f64) -> bool {
        let dist = |x: f64, t: f64| {
            let d = (x - t).abs() % period_len;
            d.min(period_len - d)
        };
        self.support.iter().all(|iv| {
            trace.iter().any(|&t| {
                let nearest = t.clamp(iv[0], iv[1]);
                dist(nearest, t) <= radius && dist(iv[0], t) <= radius && dist(iv[1], t) <= radius
            })
        })
    }
}

/// Outcome of rerunning the analysis on a grid twice as fine.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefinementCheck {
    pub bin_count: usize,
    pub component_count: usize,
    pub periods: Vec<usize>,
    /// Component count and sorted periods agree with the coarse run.
    pub stable: bool,
    /// Total-variation distance per coarse component after rebinning.
    pub density_tv: Vec<f64>,
    pub density_tv_bound: f64,
    pub density_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErgodicReport {
    pub bin_count: usize,
    pub uniform_bins: usize,
    pub map_digest: String,
    pub max_row_error: f64,
    pub components: Vec<ErgodicComponent>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refinement: Option<RefinementCheck>,
}

impl ErgodicReport {
    pub fn component_count(&self) -> usize {
        self.components.len()
    }

    pub fn periods(&self) -> Vec<usize> {
        self.components.iter().map(|c| c.period).collect()
    }

    /// True when a refinement check ran and disagreed with this run.
    pub fn unresolved(&self) -> bool {
        self.refinement
            .as_ref()
            .map_or(false, |r| !r.stable || !r.density_ok)
    }
}

fn merge_cells(model: &UlamModel, cells: &[usize]) -> Vec<[f64; 2]> {
    let mut out: Vec<[f64; 2]> = Vec::new();
    let mut prev: Option<usize> = None;
    for &c in cells {
        let (a, b) = model.cell(c);
        match (prev, out.last_mut()) {
            (Some(p), Some(last)) if p + 1 == c => last[1] = b,
            _ => out.push([a, b]),
        }
        prev = Some(c);
    }
    out
}

/// Components of an already built model.
pub fn components(model: &UlamModel, cfg: &UlamConfig) -> Result<Vec<ErgodicComponent>, ErgodicError> {
    let classes = terminal_classes(model);
    let built: Vec<Result<ErgodicComponent, ErgodicError>> = classes
        .into_par_iter()
        .map(|cells| {
            let (period, cyclic_parts) = class_period(model, &cells);
            let est = stationary_density(model, &cells, period, cfg.power_tol, cfg.power_max_iter)?;
            let support = merge_cells(model, &cells);
            let support_measure = cells.iter().map(|&c| model.width(c)).sum();
            let cell_bounds = cells
                .iter()
                .map(|&c| {
                    let (a, b) = model.cell(c);
                    [a, b]
                })
                .collect();
            Ok(ErgodicComponent {
                support,
                support_measure,
                period,
                cell_count: cells.len(),
                density_iterations: est.iterations,
                density_residual: est.residual,
                density_csv: None,
                cells,
                cyclic_parts,
                mass: est.mass,
                cell_bounds,
            })
        })
        .collect();
    built.into_iter().collect()
}

pub fn analyze(f: &PiecewiseAffineMap, n: usize) -> Result<ErgodicReport, ErgodicError> {
    analyze_with(f, n, &UlamConfig::default())
}

/// Full decomposition at `n` uniform bins, plus the `2n` refinement check
/// when enabled.
pub fn analyze_with(f: &PiecewiseAffineMap, n: usize, cfg: &UlamConfig) -> Result<ErgodicReport, ErgodicError> {
    let model = build_ulam_with(f, n, cfg)?;
    let comps = components(&model, cfg)?;
    let refinement = if cfg.refine {
        let fine = build_ulam_with(f, 2 * n, cfg)?;
        let fine_comps = components(&fine, cfg)?;
        Some(refinement_check(&model, &comps, &fine, &fine_comps, cfg))
    } else {
        None
    };
    Ok(ErgodicReport {
        bin_count: model.cell_count(),
        uniform_bins: n,
        map_digest: f.digest(),
        max_row_error: model.max_row_error(),
        components: comps,
        refinement,
    })
}

fn refinement_check(
    coarse: &UlamModel,
    coarse_comps: &[ErgodicComponent],
    fine: &UlamModel,
    fine_comps: &[ErgodicComponent],
    cfg: &UlamConfig,
) -> RefinementCheck {
    let mut p0: Vec<usize> = coarse_comps.iter().map(|c| c.period).collect();
    let mut p1: Vec<usize> = fine_comps.iter().map(|c| c.period).collect();
    p0.sort_unstable();
    p1.sort_unstable();
    let stable = p0 == p1;
    // fine cell → coarse cell by midpoint
    let parent: Vec<usize> = (0..fine.cell_count())
        .map(|i| {
            let (a, b) = fine.cell(i);
            coarse.cell_of(0.5 * (a + b))
        })
        .collect();
    let rebinned: Vec<Vec<f64>> = fine_comps
        .iter()
        .map(|fc| {
            let mut v = vec![0.0; coarse.cell_count()];
            for (&c, &m) in fc.cells.iter().zip(&fc.mass) {
                v[parent[c]] += m;
            }
            v
        })
        .collect();
    let density_tv: Vec<f64> = coarse_comps
        .iter()
        .map(|cc| {
            let mut coarse_mass = vec![0.0; coarse.cell_count()];
            for (&c, &m) in cc.cells.iter().zip(&cc.mass) {
                coarse_mass[c] = m;
            }
            rebinned
                .iter()
                .map(|fm| 0.5 * coarse_mass.iter().zip(fm).map(|(a, b)| (a - b).abs()).sum::<f64>())
                .fold(1.0, f64::min)
        })
        .collect();
    let bound = cfg.density_tv_constant / coarse.uniform_bins() as f64;
    let density_ok = density_tv.iter().all(|&tv| tv <= bound);
    RefinementCheck {
        bin_count: fine.cell_count(),
        component_count: fine_comps.len(),
        periods: fine_comps.iter().map(|c| c.period).collect(),
        stable,
        density_tv,
        density_tv_bound: bound,
        density_ok,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pwamap::AffineBranch;

    fn doubling() -> PiecewiseAffineMap {
        PiecewiseAffineMap::mod_one(2.0, 0.5).unwrap()
    }

    fn model_from_rows(rows: Vec<Vec<(usize, f64)>>) -> UlamModel {
        let n = rows.len();
        let mut row_ptr = vec![0];
        let (mut cols, mut weights) = (Vec::new(), Vec::new());
        for r in rows {
            for (j, w) in r {
                cols.push(j);
                weights.push(w);
            }
            row_ptr.push(cols.len());
        }
        UlamModel {
            edges: (0..=n).map(|k| k as f64 / n as f64).collect(),
            uniform_bins: n,
            row_ptr,
            cols,
            weights,
        }
    }

    #[test]
    fn doubling_rows_split_evenly() {
        let cfg = UlamConfig {
            orbit_depth: Some(0),
            ..UlamConfig::default()
        };
        let m = build_ulam_with(&doubling(), 12, &cfg).unwrap();
        assert_eq!(m.cell_count(), 12);
        for i in 0..12 {
            let row: Vec<_> = m.row(i).collect();
            assert_eq!(row.len(), 2, "row {i}: {row:?}");
            assert!(row.iter().all(|&(_, w)| (w - 0.5).abs() < 1e-12));
        }
    }

    #[test]
    fn non_expanding_rejected() {
        let f = PiecewiseAffineMap::new(0.0, 1.0, vec![AffineBranch::new(0.0, 1.0, -1.0, 1.0)]).unwrap();
        assert!(matches!(build_ulam(&f, 100), Err(ErgodicError::NotExpanding(_))));
        assert!(matches!(build_ulam(&doubling(), 5), Err(ErgodicError::TooFewBins(5))));
    }

    #[test]
    fn rows_are_stochastic() {
        let phi3 = PiecewiseAffineMap::mod_one(-2.0, 0.5).unwrap();
        let m = build_ulam(&phi3, 1000).unwrap();
        assert!(m.max_row_error() < 1e-12);
    }

    #[test]
    fn single_cycle_class() {
        let m = model_from_rows(vec![vec![(1, 1.0)], vec![(2, 1.0)], vec![(3, 1.0)], vec![(0, 1.0)]]);
        let classes = terminal_classes(&m);
        assert_eq!(classes, vec![vec![0, 1, 2, 3]]);
        let (p, parts) = class_period(&m, &classes[0]);
        assert_eq!(p, 4);
        assert_eq!(parts, vec![vec![0], vec![1], vec![2], vec![3]]);
        let est = stationary_density(&m, &classes[0], p, 1e-12, 1000).unwrap();
        assert!(est.mass.iter().all(|&x| (x - 0.25).abs() < 1e-12));
    }

    #[test]
    fn self_loop_period_one() {
        let m = model_from_rows(vec![
            vec![(0, 0.5), (1, 0.5)],
            vec![(2, 1.0)],
            vec![(2, 1.0)],
            vec![(0, 1.0)],
        ]);
        let classes = terminal_classes(&m);
        assert_eq!(classes, vec![vec![2]]);
        assert_eq!(class_period(&m, &classes[0]).0, 1);
    }

    #[test]
    fn doubling_density_uniform() {
        let r = analyze(&doubling(), 200).unwrap();
        assert_eq!(r.component_count(), 1);
        let c = &r.components[0];
        assert_eq!(c.period, 1);
        for (b, m) in c.cell_bounds.iter().zip(&c.mass) {
            assert!((m / (b[1] - b[0]) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn phi3_density_flat() {
        let phi3 = PiecewiseAffineMap::mod_one(-2.0, 0.5).unwrap();
        for n in [250, 1000] {
            let r = analyze(&phi3, n).unwrap();
            assert_eq!(r.component_count(), 1);
            let c = &r.components[0];
            let max_dev = c
                .cell_bounds
                .iter()
                .zip(&c.mass)
                .map(|(b, m)| (m / (b[1] - b[0]) - 1.0).abs())
                .fold(0.0, f64::max);
            assert!(max_dev < 4.0 / n as f64, "n = {n}: {max_dev}");
            assert!(!r.unresolved());
        }
    }

    #[test]
    fn two_invariant_halves() {
        // [0, 1/2] and [1/2, 1] are each mapped onto themselves with slope 2
        let f = PiecewiseAffineMap::new(
            0.0,
            1.0,
            vec![
                AffineBranch::through(0.0, 0.25, 0.0, 0.5),
                AffineBranch::through(0.25, 0.5, 0.0, 0.5),
                AffineBranch::through(0.5, 0.75, 0.5, 1.0),
                AffineBranch::through(0.75, 1.0, 0.5, 1.0),
            ],
        )
        .unwrap();
        let r = analyze(&f, 100).unwrap();
        assert_eq!(r.component_count(), 2);
        assert_eq!(r.components[0].support, vec![[0.0, 0.5]]);
        assert_eq!(r.components[1].support, vec![[0.5, 1.0]]);
    }

    #[test]
    fn swap_has_period_two() {
        // halves exchanged with slope 2 on each branch
        let f = PiecewiseAffineMap::new(
            0.0,
            1.0,
            vec![
                AffineBranch::through(0.0, 0.25, 0.5, 1.0),
                AffineBranch::through(0.25, 0.5, 0.5, 1.0),
                AffineBranch::through(0.5, 0.75, 0.0, 0.5),
                AffineBranch::through(0.75, 1.0, 0.0, 0.5),
            ],
        )
        .unwrap();
        let r = analyze(&f, 100).unwrap();
        assert_eq!(r.component_count(), 1);
        assert_eq!(r.components[0].period, 2);
        assert_eq!(r.components[0].cyclic_parts.len(), 2);
    }

    #[test]
    fn density_csv_header() {
        let r = analyze(&doubling(), 20).unwrap();
        let csv = r.components[0].density_table();
        assert!(csv.starts_with("bin_lo,bin_hi,density\n"));
        assert_eq!(csv.lines().count(), r.components[0].cell_count + 1);
    }
}
