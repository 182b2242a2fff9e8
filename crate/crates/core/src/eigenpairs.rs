//! The eigenpair set in the s-lambda plane for linear perturbations:
//! zero set of det(L + sN - lambda C) over a window, classified into
//! horizontal lines, closed curves, and isolated points, plus axis-aligned
//! conic fits for the closed curves.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::operator::PerturbedProblem;

/// Tolerance on |eigenpair_det| for accepted component samples.
pub const SAMPLE_DET_TOL: f64 = 1e-9;

/// Row norms below this fraction of the largest row norm are floored before
/// scaling, keeping the scaled determinant continuous at degenerate rows.
const ROW_FLOOR_REL: f64 = 1e-2;

const ZERO_ROW_TOL: f64 = 1e-9;
const LINE_FRACTION: f64 = 0.95;
const LINE_SPREAD_TOL: f64 = 1e-7;
const ISO_CAND_TOL: f64 = 0.25;
const ISO_SIGMA_REL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ComponentKind {
    Line,
    ClosedCurve,
    IsolatedPoint,
}

/// Axis-aligned conic s^2/a_s^2 + (lambda - lambda0)^2 / a_lambda^2 = 1.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ConicFit {
    /// (s0, lambda0)
    pub center: (f64, f64),
    /// (a_s, a_lambda)
    pub half_axes: (f64, f64),
    /// RMS of the normalized algebraic residual over the samples.
    pub residual: f64,
}

/// One connected component of the eigenpair set.
#[derive(Clone, Debug, Serialize)]
pub struct EigenpairComponent {
    pub kind: ComponentKind,
    /// Ordered (s, lambda) samples.
    pub samples: Vec<(f64, f64)>,
    pub conic_fit: Option<ConicFit>,
}

/// Rectangle in the (s, lambda) plane.
#[derive(Clone, Copy, Debug)]
pub struct MapWindow {
    pub s: (f64, f64),
    pub lambda: (f64, f64),
}

/// Row-equilibrated determinant of L + sN - lambda C; zero exactly on the
/// eigenpair set of the truncation. Row norms are floored at a fraction of the
/// largest one so the value stays continuous (and small) near rows that vanish
/// identically, as they do on the horizontal eigenpair lines.
pub fn eigenpair_det(problem: &PerturbedProblem, s: f64, lambda: f64) -> Result<f64> {
    let n_matrix = problem.perturbation().linear_matrix().ok_or_else(|| {
        Error::UnsupportedMap(
            "eigenpair maps require a linear perturbation; use the continuation \
                 tracer for nonlinear N"
                .to_string(),
        )
    })?;
    let m = problem.pencil().l() + s * n_matrix - lambda * problem.pencil().c();
    Ok(scaled_det(&m))
}

fn scaled_det(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut row_norms = Vec::with_capacity(n);
    let mut max_norm = 0.0f64;
    for i in 0..n {
        let norm = m.row(i).norm();
        max_norm = max_norm.max(norm);
        row_norms.push(norm);
    }
    if max_norm == 0.0 {
        return 0.0;
    }
    let floor = ROW_FLOOR_REL * max_norm;
    let mut scaled = m.clone();
    for i in 0..n {
        let divisor = row_norms[i].max(floor);
        for j in 0..n {
            scaled[(i, j)] /= divisor;
        }
    }
    scaled.lu().determinant()
}

struct Grid {
    s_values: Vec<f64>,
    l_values: Vec<f64>,
    /// values[j][i] = d(s_i, lambda_j)
    values: Vec<Vec<f64>>,
}

impl Grid {
    fn sample(problem: &PerturbedProblem, window: &MapWindow, cells: usize) -> Result<Grid> {
        let (s0, s1) = window.s;
        let (l0, l1) = window.lambda;
        if !(s0 < s1) || !(l0 < l1) {
            return Err(Error::Precondition("empty map window".to_string()));
        }
        let s_values: Vec<f64> = (0..=cells)
            .map(|i| s0 + (s1 - s0) * (i as f64) / (cells as f64))
            .collect();
        let l_values: Vec<f64> = (0..=cells)
            .map(|j| l0 + (l1 - l0) * (j as f64) / (cells as f64))
            .collect();
        let mut values = Vec::with_capacity(l_values.len());
        for lambda in &l_values {
            let mut row = Vec::with_capacity(s_values.len());
            for s in &s_values {
                row.push(eigenpair_det(problem, *s, *lambda)?);
            }
            values.push(row);
        }
        Ok(Grid {
            s_values,
            l_values,
            values,
        })
    }
}

/// Contour the eigenpair determinant over the window and classify the zero
/// set: horizontal lines, closed curves, isolated points.
///
/// `grid` is the number of cells per axis. When two distinct contour chains
/// share a cell the grid is refined (twice at most) before giving up with a
/// resolution error.
pub fn trace_components(
    problem: &PerturbedProblem,
    window: &MapWindow,
    grid: usize,
) -> Result<Vec<EigenpairComponent>> {
    if grid < 16 {
        return Err(Error::Precondition(
            "map grid must have at least 16 cells per axis".to_string(),
        ));
    }
    trace_components_at_depth(problem, window, grid, 0)
}

fn trace_components_at_depth(
    problem: &PerturbedProblem,
    window: &MapWindow,
    cells: usize,
    depth: usize,
) -> Result<Vec<EigenpairComponent>> {
    match attempt_trace(problem, window, cells) {
        Ok(components) => Ok(components),
        Err(Error::Resolution(msg)) => {
            if depth >= 2 {
                Err(Error::Resolution(msg))
            } else {
                trace_components_at_depth(problem, window, cells * 2, depth + 1)
            }
        }
        Err(e) => Err(e),
    }
}

fn attempt_trace(
    problem: &PerturbedProblem,
    window: &MapWindow,
    cells: usize,
) -> Result<Vec<EigenpairComponent>> {
    let grid = Grid::sample(problem, window, cells)?;
    let n_s = grid.s_values.len();
    let n_l = grid.l_values.len();

    // Row intervals consumed by detected lines are dropped from marching.
    let mut consumed = vec![false; n_l - 1];
    let mut lines: Vec<EigenpairComponent> = Vec::new();

    // Identically-zero interior grid rows.
    for j in 1..n_l - 1 {
        let near_zero = grid.values[j]
            .iter()
            .filter(|d| d.abs() <= ZERO_ROW_TOL)
            .count();
        if (near_zero as f64) >= LINE_FRACTION * n_s as f64 {
            let lambda = grid.l_values[j];
            let samples: Vec<(f64, f64)> = grid.s_values.iter().map(|s| (*s, lambda)).collect();
            lines.push(EigenpairComponent {
                kind: ComponentKind::Line,
                samples,
                conic_fit: None,
            });
            consumed[j - 1] = true;
            consumed[j] = true;
        }
    }

    // Sign-flip row intervals: a horizontal line between two grid rows flips
    // the determinant sign in (almost) every column at a common root.
    for j in 0..n_l - 1 {
        if consumed[j] {
            continue;
        }
        let flips = (0..n_s)
            .filter(|i| grid.values[j][*i] * grid.values[j + 1][*i] < 0.0)
            .count();
        if (flips as f64) < LINE_FRACTION * n_s as f64 {
            continue;
        }
        let mut roots: Vec<(f64, f64)> = Vec::new();
        for i in 0..n_s {
            let s = grid.s_values[i];
            if grid.values[j][i] * grid.values[j + 1][i] < 0.0 {
                let root = bisect(
                    |l| eigenpair_det(problem, s, l).unwrap_or(f64::NAN),
                    grid.l_values[j],
                    grid.l_values[j + 1],
                );
                if let Some(l) = root {
                    roots.push((s, l));
                }
            }
        }
        if roots.is_empty() {
            continue;
        }
        let min = roots.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
        let max = roots.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
        if max - min <= LINE_SPREAD_TOL {
            lines.push(EigenpairComponent {
                kind: ComponentKind::Line,
                samples: roots,
                conic_fit: None,
            });
            consumed[j] = true;
        }
    }

    let curves = march_curves(problem, &grid, &consumed)?;
    let points = isolated_points(problem, &grid, &lines, &curves)?;

    let mut components = lines;
    components.extend(curves);
    // The window is open: a line sitting on (or within half a cell of) the
    // lambda boundary is not inside it.
    let half_cell = 0.5 * (grid.l_values[1] - grid.l_values[0]);
    let (l0, l1) = window.lambda;
    components.retain(|c| {
        if c.kind != ComponentKind::Line {
            return true;
        }
        let lambda = c.samples.iter().map(|p| p.1).sum::<f64>() / c.samples.len() as f64;
        lambda > l0 + half_cell && lambda < l1 - half_cell
    });
    components.extend(points);
    components.sort_by(|a, b| {
        let key = |c: &EigenpairComponent| {
            let min_l = c.samples.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
            let min_s = c.samples.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
            (c.kind as usize, min_l, min_s)
        };
        key(a).partial_cmp(&key(b)).unwrap()
    });
    Ok(components)
}

fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> Option<f64> {
    let mut fa = f(a);
    let fb = f(b);
    if !fa.is_finite() || !fb.is_finite() || fa * fb > 0.0 {
        return None;
    }
    for _ in 0..80 {
        let mid = 0.5 * (a + b);
        let fm = f(mid);
        if !fm.is_finite() {
            return None;
        }
        if fa * fm <= 0.0 {
            b = mid;
        } else {
            a = mid;
            fa = fm;
        }
    }
    Some(0.5 * (a + b))
}

/// Edge of the sampling grid, identified by its lower-left node and direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum EdgeId {
    H(usize, usize),
    V(usize, usize),
}

fn march_curves(
    problem: &PerturbedProblem,
    grid: &Grid,
    consumed: &[bool],
) -> Result<Vec<EigenpairComponent>> {
    use std::collections::HashMap;

    let n_s = grid.s_values.len();
    let n_l = grid.l_values.len();
    // Nodes where d vanishes exactly (an isolated zero or a contour passing
    // through a grid node) count as positive-side, so a single zero node never
    // produces a spurious micro-loop of cells around itself.
    let positive = |i: usize, j: usize| grid.values[j][i] > -1e-12;

    // Segments as unordered pairs of crossed edges per cell.
    let mut segments: Vec<(EdgeId, EdgeId)> = Vec::new();
    let mut segment_cell: Vec<(usize, usize)> = Vec::new();
    for j in 0..n_l - 1 {
        if consumed[j] {
            continue;
        }
        for i in 0..n_s - 1 {
            let b0 = positive(i, j);
            let b1 = positive(i + 1, j);
            let b2 = positive(i + 1, j + 1);
            let b3 = positive(i, j + 1);
            let mask = (b0 as usize) | (b1 as usize) << 1 | (b2 as usize) << 2 | (b3 as usize) << 3;
            if mask == 0 || mask == 15 {
                continue;
            }
            let e_bottom = EdgeId::H(i, j);
            let e_top = EdgeId::H(i, j + 1);
            let e_left = EdgeId::V(i, j);
            let e_right = EdgeId::V(i + 1, j);
            let mut push = |a: EdgeId, b: EdgeId| {
                segments.push((a, b));
                segment_cell.push((i, j));
            };
            match mask {
                1 | 14 => push(e_left, e_bottom),
                2 | 13 => push(e_bottom, e_right),
                3 | 12 => push(e_left, e_right),
                4 | 11 => push(e_right, e_top),
                6 | 9 => push(e_bottom, e_top),
                7 | 8 => push(e_left, e_top),
                5 | 10 => {
                    // Saddle: the center sample decides the connectivity.
                    let sc = 0.5 * (grid.s_values[i] + grid.s_values[i + 1]);
                    let lc = 0.5 * (grid.l_values[j] + grid.l_values[j + 1]);
                    let center = eigenpair_det(problem, sc, lc)?;
                    let center_pos = center > 0.0;
                    if (mask == 5) == center_pos {
                        push(e_left, e_top);
                        push(e_bottom, e_right);
                    } else {
                        push(e_left, e_bottom);
                        push(e_right, e_top);
                    }
                }
                _ => unreachable!(),
            }
        }
    }

    // Adjacency: each crossed edge meets at most two segments.
    let mut incidence: HashMap<EdgeId, Vec<usize>> = HashMap::new();
    for (idx, (a, b)) in segments.iter().enumerate() {
        incidence.entry(*a).or_default().push(idx);
        incidence.entry(*b).or_default().push(idx);
    }
    for (edge, segs) in &incidence {
        if segs.len() > 2 {
            return Err(Error::Resolution(format!(
                "edge {edge:?} is crossed by {} contour segments",
                segs.len()
            )));
        }
    }

    let mut visited = vec![false; segments.len()];
    let mut chains: Vec<(Vec<EdgeId>, bool)> = Vec::new();

    let walk =
        |start_seg: usize, start_edge: EdgeId, visited: &mut Vec<bool>| -> (Vec<EdgeId>, bool) {
            let mut chain = vec![start_edge];
            let mut seg = start_seg;
            let mut edge = start_edge;
            loop {
                visited[seg] = true;
                let (a, b) = segments[seg];
                let next_edge = if a == edge { b } else { a };
                chain.push(next_edge);
                let next_seg = incidence[&next_edge].iter().copied().find(|s| !visited[*s]);
                match next_seg {
                    Some(s) => {
                        seg = s;
                        edge = next_edge;
                    }
                    None => {
                        let closed = next_edge == chain[0];
                        return (chain, closed);
                    }
                }
            }
        };

    // Open chains first (edges met by a single segment), then loops.
    for (edge, segs) in incidence.iter() {
        if segs.len() == 1 && !visited[segs[0]] {
            let chain = walk(segs[0], *edge, &mut visited);
            chains.push(chain);
        }
    }
    for idx in 0..segments.len() {
        if !visited[idx] {
            let chain = walk(idx, segments[idx].0, &mut visited);
            chains.push(chain);
        }
    }

    // Different chains must not share a cell; that is the grid-resolution
    // failure condition.
    {
        let mut cell_chain: HashMap<(usize, usize), usize> = HashMap::new();
        let mut seg_chain: HashMap<EdgeId, usize> = HashMap::new();
        for (cid, (chain, _)) in chains.iter().enumerate() {
            for e in chain {
                seg_chain.entry(*e).or_insert(cid);
            }
        }
        for (idx, cell) in segment_cell.iter().enumerate() {
            let (a, _) = segments[idx];
            if let Some(cid) = seg_chain.get(&a) {
                if let Some(prev) = cell_chain.insert(*cell, *cid) {
                    if prev != *cid {
                        return Err(Error::Resolution(format!(
                            "two components share the cell at ({}, {})",
                            grid.s_values[cell.0], grid.l_values[cell.1]
                        )));
                    }
                }
            }
        }
    }

    let mut curves = Vec::new();
    for (chain, closed) in chains {
        let mut samples = Vec::with_capacity(chain.len());
        for edge in &chain {
            samples.push(polish_edge_crossing(problem, grid, *edge)?);
        }
        if closed {
            curves.push(EigenpairComponent {
                kind: ComponentKind::ClosedCurve,
                samples,
                conic_fit: None,
            });
            continue;
        }
        // An open chain that is numerically horizontal is a residual line;
        // anything else means the window clips a component.
        let min = samples.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        let max = samples
            .iter()
            .map(|p| p.1)
            .fold(f64::NEG_INFINITY, f64::max);
        if max - min <= LINE_SPREAD_TOL {
            curves.push(EigenpairComponent {
                kind: ComponentKind::Line,
                samples,
                conic_fit: None,
            });
        } else {
            return Err(Error::Resolution(
                "open contour chain: the window clips a component or the grid is too coarse"
                    .to_string(),
            ));
        }
    }
    Ok(curves)
}

fn polish_edge_crossing(
    problem: &PerturbedProblem,
    grid: &Grid,
    edge: EdgeId,
) -> Result<(f64, f64)> {
    let point = match edge {
        EdgeId::H(i, j) => {
            let lambda = grid.l_values[j];
            let root = bisect(
                |s| eigenpair_det(problem, s, lambda).unwrap_or(f64::NAN),
                grid.s_values[i],
                grid.s_values[i + 1],
            );
            match root {
                Some(s) => (s, lambda),
                None => (0.5 * (grid.s_values[i] + grid.s_values[i + 1]), lambda),
            }
        }
        EdgeId::V(i, j) => {
            let s = grid.s_values[i];
            let root = bisect(
                |l| eigenpair_det(problem, s, l).unwrap_or(f64::NAN),
                grid.l_values[j],
                grid.l_values[j + 1],
            );
            match root {
                Some(l) => (s, l),
                None => (s, 0.5 * (grid.l_values[j] + grid.l_values[j + 1])),
            }
        }
    };
    Ok(point)
}

fn isolated_points(
    problem: &PerturbedProblem,
    grid: &Grid,
    lines: &[EigenpairComponent],
    curves: &[EigenpairComponent],
) -> Result<Vec<EigenpairComponent>> {
    let n_s = grid.s_values.len();
    let n_l = grid.l_values.len();
    let cell_s = grid.s_values[1] - grid.s_values[0];
    let cell_l = grid.l_values[1] - grid.l_values[0];

    let near_existing = |s: f64, l: f64| {
        lines
            .iter()
            .chain(curves.iter())
            .flat_map(|c| c.samples.iter())
            .any(|(ps, pl)| (ps - s).abs() <= 2.0 * cell_s && (pl - l).abs() <= 2.0 * cell_l)
    };

    let mut points = Vec::new();
    for j in 1..n_l - 1 {
        for i in 1..n_s - 1 {
            let d = grid.values[j][i];
            if d.abs() > ISO_CAND_TOL {
                continue;
            }
            let mut strict_min = true;
            let mut patch_min = f64::INFINITY;
            let mut patch_max = f64::NEG_INFINITY;
            for dj in -1i64..=1 {
                for di in -1i64..=1 {
                    let v = grid.values[(j as i64 + dj) as usize][(i as i64 + di) as usize];
                    patch_min = patch_min.min(v);
                    patch_max = patch_max.max(v);
                    if (di != 0 || dj != 0) && v.abs() <= d.abs() {
                        strict_min = false;
                    }
                }
            }
            // A sign change in the patch belongs to a curve, not a point.
            if !strict_min || (patch_min < -ZERO_ROW_TOL && patch_max > ZERO_ROW_TOL) {
                continue;
            }
            let s = grid.s_values[i];
            let l = grid.l_values[j];
            if near_existing(s, l) {
                continue;
            }
            // Two x4 local refinements: any sign change appearing at the finer
            // scales means unresolved structure, not an isolated point.
            let mut refinement_clean = true;
            for level in 1..=2 {
                let scale = 4f64.powi(level);
                let hs = cell_s / scale;
                let hl = cell_l / scale;
                let mut min_v = f64::INFINITY;
                let mut max_v = f64::NEG_INFINITY;
                for dj in -4i64..=4 {
                    for di in -4i64..=4 {
                        let v = eigenpair_det(problem, s + di as f64 * hs, l + dj as f64 * hl)?;
                        min_v = min_v.min(v);
                        max_v = max_v.max(v);
                    }
                }
                if min_v < -ZERO_ROW_TOL && max_v > ZERO_ROW_TOL {
                    refinement_clean = false;
                    break;
                }
            }
            if !refinement_clean {
                return Err(Error::Resolution(format!(
                    "sign changes appear under refinement near ({s}, {l})"
                )));
            }
            if let Some((ps, pl)) = refine_isolated_point(problem, s, l, cell_s.max(cell_l)) {
                let d_here = eigenpair_det(problem, ps, pl)?;
                if d_here.abs() <= SAMPLE_DET_TOL
                    && points.iter().all(|c: &EigenpairComponent| {
                        let (qs, ql) = c.samples[0];
                        (qs - ps).hypot(ql - pl) > cell_s.max(cell_l)
                    })
                {
                    points.push(EigenpairComponent {
                        kind: ComponentKind::IsolatedPoint,
                        samples: vec![(ps, pl)],
                        conic_fit: None,
                    });
                }
            }
        }
    }
    Ok(points)
}

/// Locate a rank-deficient point by shrinking quadratic fits of the squared
/// smallest singular value; determinant magnitude cannot see even-order zeros.
fn refine_isolated_point(
    problem: &PerturbedProblem,
    s0: f64,
    l0: f64,
    h0: f64,
) -> Option<(f64, f64)> {
    let n_matrix = problem.perturbation().linear_matrix()?;
    let f = |s: f64, l: f64| -> (f64, f64) {
        let m = problem.pencil().l() + s * n_matrix - l * problem.pencil().c();
        let sv = m.svd(false, false).singular_values;
        let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = sv.iter().cloned().fold(0.0f64, f64::max);
        (min, max)
    };

    let mut center = (s0, l0);
    let mut h = h0;
    let (mut best_val, _) = f(s0, l0);
    let mut best = center;
    let mut sigma_max = 1.0f64;

    for _ in 0..40 {
        // 5x5 stencil, quadratic least squares in scaled coordinates.
        let mut rows = Vec::with_capacity(25);
        let mut rhs = Vec::with_capacity(25);
        for dj in -2i64..=2 {
            for di in -2i64..=2 {
                let s = center.0 + di as f64 * h;
                let l = center.1 + dj as f64 * h;
                let (val, smax) = f(s, l);
                sigma_max = sigma_max.max(smax);
                if val < best_val {
                    best_val = val;
                    best = (s, l);
                }
                let u = di as f64;
                let v = dj as f64;
                rows.push([1.0, u, v, u * u, u * v, v * v]);
                rhs.push(val * val);
            }
        }
        let design = DMatrix::from_fn(25, 6, |r, c| rows[r][c]);
        let b = DVector::from_vec(rhs);
        let svd = design.svd(true, true);
        let coeff = match svd.solve(&b, 1e-14) {
            Ok(c) => c,
            Err(_) => {
                h *= 0.25;
                center = best;
                continue;
            }
        };
        // Stationary point of the fitted quadratic.
        let (c1, c2, c20, c11, c02) = (coeff[1], coeff[2], coeff[3], coeff[4], coeff[5]);
        let det = 4.0 * c20 * c02 - c11 * c11;
        let positive_definite = det > 0.0 && c20 > 0.0;
        if positive_definite {
            let u = (-2.0 * c02 * c1 + c11 * c2) / det;
            let v = (c11 * c1 - 2.0 * c20 * c2) / det;
            if u.abs() <= 2.5 && v.abs() <= 2.5 {
                center = (center.0 + u * h, center.1 + v * h);
            } else {
                center = best;
            }
        } else {
            center = best;
        }
        h *= 0.25;
        if h < 1e-13 * (1.0 + center.0.abs() + center.1.abs()) {
            break;
        }
    }
    let (sigma_min, smax) = f(center.0, center.1);
    if sigma_min <= ISO_SIGMA_REL * smax.max(sigma_max) {
        Some(center)
    } else {
        None
    }
}

/// Axis-aligned conic least-squares fit of a closed curve.
pub fn fit_conic(component: &EigenpairComponent) -> Result<ConicFit> {
    if component.kind != ComponentKind::ClosedCurve {
        return Err(Error::Precondition(
            "conic fits apply to closed curves only".to_string(),
        ));
    }
    if component.samples.len() < 20 {
        return Err(Error::Precondition(format!(
            "conic fit needs at least 20 samples, got {}",
            component.samples.len()
        )));
    }
    // Homogeneous axis-aligned conic A s^2 + B s + C l^2 + D l + E = 0; the
    // coefficient vector is the null direction of the sample design matrix.
    let m = component.samples.len();
    let design = DMatrix::from_fn(m, 5, |r, c| {
        let (s, l) = component.samples[r];
        match c {
            0 => s * s,
            1 => s,
            2 => l * l,
            3 => l,
            _ => 1.0,
        }
    });
    let svd = design.svd(false, true);
    let v_t = svd.v_t.as_ref().expect("svd with v");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|a, b| {
        svd.singular_values[*a]
            .partial_cmp(&svd.singular_values[*b])
            .unwrap()
    });
    let sv_max = svd.singular_values[*order.last().unwrap()];
    // A second vanishing singular value means the conic is not determined.
    if svd.singular_values[order[1]] <= 1e-10 * sv_max {
        return Err(Error::FitError(
            "rank-deficient normal equations".to_string(),
        ));
    }
    let mut coeff: DVector<f64> = v_t.row(order[0]).transpose();
    if coeff[0] < 0.0 {
        coeff.neg_mut();
    }
    let (a, b, c, d, e) = (coeff[0], coeff[1], coeff[2], coeff[3], coeff[4]);
    if a <= 1e-12 || c <= 1e-12 {
        return Err(Error::FitError(
            "fitted conic is not an ellipse".to_string(),
        ));
    }
    let s0 = -b / (2.0 * a);
    let l0 = -d / (2.0 * c);
    let f = a * s0 * s0 + c * l0 * l0 - e;
    if f <= 0.0 {
        return Err(Error::FitError("degenerate ellipse radius".to_string()));
    }
    let a_s = (f / a).sqrt();
    let a_l = (f / c).sqrt();
    let mut acc = 0.0;
    for (s, l) in &component.samples {
        let r = (s - s0).powi(2) / (a_s * a_s) + (l - l0).powi(2) / (a_l * a_l) - 1.0;
        acc += r * r;
    }
    let residual = (acc / m as f64).sqrt();
    Ok(ConicFit {
        center: (s0, l0),
        half_axes: (a_s, a_l),
        residual,
    })
}
