//! Numerical tracing of the solution set of psi_plus(s, lambda, x) = 0 on
//! R x R x S^{n-1}: pseudo-arclength predictor-corrector on the extended
//! system, branch classification per the global alternative (unbounded or
//! returning to a different eigenset), and bifurcation-point extraction on
//! eigenspheres.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;
use crate::operator::PerturbedProblem;
use crate::spectrum::{kernel_basis, pencil_eigenvalues, CLUSTER_RADIUS};

/// Step control and tolerance knobs for the tracer.
#[derive(Clone, Debug)]
pub struct TraceSettings {
    pub initial_step: f64,
    pub min_step: f64,
    pub max_step: f64,
    pub grow_factor: f64,
    pub shrink_factor: f64,
    /// Consecutive corrector successes before the step grows.
    pub grow_after: usize,
    /// Relative residual target inside the Newton corrector.
    pub corrector_tol: f64,
    /// Relative residual bound for accepted points.
    pub residual_tol: f64,
    pub corrector_max_iter: usize,
    pub max_steps: usize,
    /// Radius in the (s, lambda) plane beyond which a branch is unbounded.
    pub bound: f64,
    /// |s| threshold for trivial-return detection.
    pub s_return_tol: f64,
    /// Distance tolerance to a known eigensphere for trivial returns.
    pub eigensphere_tol: f64,
    /// Distance tolerance for closed-loop detection at the anchor.
    pub loop_tol: f64,
    /// Points per great circle in the eigensphere sample grid.
    pub grid_density: usize,
    /// Fixed |s| of the first slice used when hunting emanating branches.
    pub slice_s: f64,
    /// Number of halvings in the s -> 0 extrapolation ladder.
    pub ladder_levels: usize,
}

impl Default for TraceSettings {
    fn default() -> Self {
        TraceSettings {
            initial_step: 1e-2,
            min_step: 1e-8,
            max_step: 0.1,
            grow_factor: 1.3,
            shrink_factor: 0.5,
            grow_after: 4,
            corrector_tol: 1e-11,
            residual_tol: 1e-9,
            corrector_max_iter: 16,
            max_steps: 20_000,
            bound: 10.0,
            s_return_tol: 1e-7,
            eigensphere_tol: 1e-6,
            loop_tol: 1e-6,
            grid_density: 12,
            slice_s: 0.05,
            ladder_levels: 6,
        }
    }
}

/// A solution triple (s, lambda, x) with its residual.
#[derive(Clone, Debug)]
pub struct SolutionPoint {
    pub s: f64,
    pub lambda: f64,
    pub x: DVector<f64>,
    pub residual: f64,
}

impl SolutionPoint {
    /// A trivial solution (0, lambda, x) with its measured residual.
    pub fn trivial(problem: &PerturbedProblem, lambda: f64, x: DVector<f64>) -> Self {
        let residual = problem.psi_plus_ambient(0.0, lambda, &x).norm();
        SolutionPoint {
            s: 0.0,
            lambda,
            x,
            residual,
        }
    }

    fn from_state(problem: &PerturbedProblem, u: &DVector<f64>) -> Self {
        let (s, lambda, x) = unpack(u);
        let residual = problem.psi_plus_ambient(s, lambda, &x).norm();
        SolutionPoint {
            s,
            lambda,
            x,
            residual,
        }
    }
}

/// How a traced branch ended.
#[derive(Clone, Debug)]
pub enum Termination {
    /// The branch left |(s, lambda)| <= R.
    Unbounded { radius: f64 },
    /// The branch returned to the trivial set at a different eigenvalue.
    TrivialReturn {
        lambda_second: f64,
        x_second: DVector<f64>,
    },
    /// The branch closed onto its anchor.
    ClosedLoop,
    /// Corrector failure or step budget exhaustion.
    StepFailure { diagnostics: String },
}

/// An ordered trace of solution points with its termination verdict.
#[derive(Clone, Debug)]
pub struct Branch {
    pub anchor: SolutionPoint,
    pub points: Vec<SolutionPoint>,
    pub termination: Termination,
}

impl Branch {
    /// Whether every traced point stayed in the anchor eigenset (s = 0 and
    /// lambda fixed at working tolerances).
    pub fn confined_to_anchor_eigenset(&self, settings: &TraceSettings) -> bool {
        self.points.iter().all(|p| {
            p.s.abs() <= settings.s_return_tol
                && (p.lambda - self.anchor.lambda).abs() <= settings.eigensphere_tol
        })
    }
}

/// Aggregated verdict for the connected component through a trivial anchor.
#[derive(Clone, Debug)]
pub enum ComponentVerdict {
    Unbounded,
    TrivialReturn {
        lambda_second: f64,
        x_second: DVector<f64>,
    },
    IsolatedCompact,
    Inconclusive {
        diagnostics: String,
    },
}

fn pack(s: f64, lambda: f64, x: &DVector<f64>) -> DVector<f64> {
    let n = x.len();
    let mut u = DVector::zeros(n + 2);
    u[0] = s;
    u[1] = lambda;
    u.rows_mut(2, n).copy_from(x);
    u
}

fn unpack(u: &DVector<f64>) -> (f64, f64, DVector<f64>) {
    let n = u.len() - 2;
    (u[0], u[1], u.rows(2, n).clone_owned())
}

/// Rows 1..n+1 of the extended Jacobian at u = (s, lambda, x):
/// [ N_bar(x) | -Cx | L - lambda C + s dN_bar(x) ] over the norm row
/// [ 0 | 0 | x^T ].
fn extended_jacobian_top(problem: &PerturbedProblem, u: &DVector<f64>) -> DMatrix<f64> {
    let n = problem.dim();
    let (s, lambda, x) = unpack(u);
    let mut j = DMatrix::zeros(n + 1, n + 2);
    let n_bar = problem.perturbation().homogeneous_extension(&x);
    let cx = problem.pencil().c() * &x;
    let mut a = problem.pencil().matrix_at(lambda);
    if s != 0.0 {
        a += s * problem.perturbation().extension_jacobian(&x);
    }
    j.view_mut((0, 0), (n, 1)).copy_from(&n_bar);
    j.view_mut((0, 1), (n, 1)).copy_from(&(-cx));
    j.view_mut((0, 2), (n, n)).copy_from(&a);
    for i in 0..n {
        j[(n, 2 + i)] = x[i];
    }
    j
}

/// Newton corrector on {psi_plus = 0, |x|^2 = 1, t . (u - plane_base) = 0},
/// started at `seed`. Returns the corrected state and its residual.
fn corrector(
    problem: &PerturbedProblem,
    seed: &DVector<f64>,
    plane_base: &DVector<f64>,
    tangent: &DVector<f64>,
    settings: &TraceSettings,
) -> Option<(DVector<f64>, f64)> {
    let n = problem.dim();
    let mut u = seed.clone();
    let mut converged = false;
    for _ in 0..settings.corrector_max_iter {
        let (s, lambda, x) = unpack(&u);
        let psi = problem.psi_plus_ambient(s, lambda, &x);
        let scale = problem.scale_at(s, lambda);
        let norm_defect = 0.5 * (x.norm_squared() - 1.0);
        let plane_defect = tangent.dot(&(&u - plane_base));
        if psi.norm() <= settings.corrector_tol * scale
            && norm_defect.abs() <= 1e-11
            && plane_defect.abs() <= 1e-9 * u.norm().max(1.0)
        {
            converged = true;
            break;
        }
        let mut g = DVector::zeros(n + 2);
        g.rows_mut(0, n).copy_from(&psi);
        g[n] = norm_defect;
        g[n + 1] = plane_defect;

        let top = extended_jacobian_top(problem, &u);
        let mut jac = DMatrix::zeros(n + 2, n + 2);
        jac.view_mut((0, 0), (n + 1, n + 2)).copy_from(&top);
        for c in 0..n + 2 {
            jac[(n + 1, c)] = tangent[c];
        }
        let delta = linalg::solve_or_least_squares(&jac, &(-g))?;
        if !delta.iter().all(|v| v.is_finite()) || delta.norm() > 2.0 * u.norm().max(1.0) {
            return None;
        }
        u += delta;
    }
    if !converged {
        return None;
    }
    // Renormalize x exactly onto the sphere and re-measure the residual.
    let (s, lambda, mut x) = unpack(&u);
    let norm = x.norm();
    if norm == 0.0 {
        return None;
    }
    x /= norm;
    let residual = problem.psi_plus_ambient(s, lambda, &x).norm();
    if residual > settings.residual_tol * problem.scale_at(s, lambda) {
        return None;
    }
    Some((pack(s, lambda, &x), residual))
}

/// Tangent direction at u: unit null vector of the extended Jacobian. With a
/// previous tangent the projection onto the null space keeps continuity; at an
/// anchor the null direction with the largest ds-component is chosen, with a
/// lexicographic tie-break.
fn tangent_at(
    problem: &PerturbedProblem,
    u: &DVector<f64>,
    previous: Option<&DVector<f64>>,
) -> Result<DVector<f64>> {
    let top = extended_jacobian_top(problem, u);
    let ns = linalg::nullspace(&top);
    if ns.ncols() == 0 {
        return Err(Error::Precondition(
            "extended Jacobian has no null direction: point is not on a solution curve".to_string(),
        ));
    }
    let dim = u.len();
    let pick = |target: &DVector<f64>| -> Option<DVector<f64>> {
        let coeffs = ns.transpose() * target;
        let v = &ns * coeffs;
        let norm = v.norm();
        if norm > 1e-8 {
            Some(v / norm)
        } else {
            None
        }
    };
    let mut t = match previous {
        Some(prev) => match pick(prev) {
            Some(v) => v,
            None => ns.column(0).into_owned(),
        },
        None => {
            let mut e_s = DVector::zeros(dim);
            e_s[0] = 1.0;
            match pick(&e_s) {
                Some(v) => v,
                None => lexicographic_pick(&ns),
            }
        }
    };
    // Deterministic sign: align with the previous tangent, or make the entry
    // of largest magnitude positive.
    match previous {
        Some(prev) => {
            if t.dot(prev) < 0.0 {
                t.neg_mut();
            }
        }
        None => {
            canonical_sign(&mut t);
        }
    }
    Ok(t)
}

fn canonical_sign(v: &mut DVector<f64>) {
    let mut idx = 0;
    let mut best = 0.0;
    for (i, value) in v.iter().enumerate() {
        if value.abs() > best {
            best = value.abs();
            idx = i;
        }
    }
    if v[idx] < 0.0 {
        v.neg_mut();
    }
}

fn lexicographic_pick(ns: &DMatrix<f64>) -> DVector<f64> {
    let mut best: Option<DVector<f64>> = None;
    for j in 0..ns.ncols() {
        let mut cand: DVector<f64> = ns.column(j).into();
        canonical_sign(&mut cand);
        let better = match &best {
            None => true,
            Some(b) => {
                let mut cmp = std::cmp::Ordering::Equal;
                for i in 0..cand.len() {
                    cmp = cand[i]
                        .partial_cmp(&b[i])
                        .unwrap_or(std::cmp::Ordering::Equal);
                    if cmp != std::cmp::Ordering::Equal {
                        break;
                    }
                }
                cmp == std::cmp::Ordering::Greater
            }
        };
        if better {
            best = Some(cand);
        }
    }
    best.expect("nonempty null space")
}

/// Newton solve of the trivial system {Lx = lambda Cx, |x| = 1} from a seed.
fn solve_trivial(
    problem: &PerturbedProblem,
    lambda0: f64,
    x0: &DVector<f64>,
) -> Option<(f64, DVector<f64>)> {
    let pencil = problem.pencil();
    let n = pencil.dim();
    let mut lambda = lambda0;
    let mut x = x0.clone();
    let norm = x.norm();
    if norm == 0.0 {
        return None;
    }
    x /= norm;
    for _ in 0..40 {
        let fx = pencil.l() * &x - lambda * (pencil.c() * &x);
        let defect = 0.5 * (x.norm_squared() - 1.0);
        let scale = pencil.scale_at(lambda).max(1.0);
        if fx.norm() <= 1e-12 * scale && defect.abs() <= 1e-13 {
            let norm = x.norm();
            return Some((lambda, x / norm));
        }
        let mut g = DVector::zeros(n + 1);
        g.rows_mut(0, n).copy_from(&fx);
        g[n] = defect;
        let mut jac = DMatrix::zeros(n + 1, n + 1);
        let cx = pencil.c() * &x;
        jac.view_mut((0, 0), (n, 1)).copy_from(&(-cx));
        jac.view_mut((0, 1), (n, n))
            .copy_from(&pencil.matrix_at(lambda));
        for i in 0..n {
            jac[(n, 1 + i)] = x[i];
        }
        let delta = linalg::solve_or_least_squares(&jac, &(-g))?;
        if !delta.iter().all(|v| v.is_finite()) || delta.norm() > 10.0 {
            return None;
        }
        lambda += delta[0];
        for i in 0..n {
            x[i] += delta[1 + i];
        }
    }
    None
}

/// Newton solve of the fixed-s slice {psi_plus(s, ., .) = 0, |x| = 1}.
fn solve_fixed_s(
    problem: &PerturbedProblem,
    s: f64,
    lambda0: f64,
    x0: &DVector<f64>,
) -> Option<(f64, DVector<f64>)> {
    let n = problem.dim();
    let mut lambda = lambda0;
    let mut x = x0.clone();
    for _ in 0..60 {
        let fx = problem.psi_plus_ambient(s, lambda, &x);
        let defect = 0.5 * (x.norm_squared() - 1.0);
        let scale = problem.scale_at(s, lambda);
        if fx.norm() <= 1e-12 * scale && defect.abs() <= 1e-13 {
            let norm = x.norm();
            return Some((lambda, x / norm));
        }
        let mut g = DVector::zeros(n + 1);
        g.rows_mut(0, n).copy_from(&fx);
        g[n] = defect;
        let mut jac = DMatrix::zeros(n + 1, n + 1);
        let cx = problem.pencil().c() * &x;
        let mut a = problem.pencil().matrix_at(lambda);
        a += s * problem.perturbation().extension_jacobian(&x);
        jac.view_mut((0, 0), (n, 1)).copy_from(&(-cx));
        jac.view_mut((0, 1), (n, n)).copy_from(&a);
        for i in 0..n {
            jac[(n, 1 + i)] = x[i];
        }
        let delta = linalg::solve_or_least_squares(&jac, &(-g))?;
        if !delta.iter().all(|v| v.is_finite()) || delta.norm() > 10.0 {
            return None;
        }
        lambda += delta[0];
        for i in 0..n {
            x[i] += delta[1 + i];
        }
    }
    None
}

/// Deterministic sample grid on the unit sphere of a kernel: the union of the
/// great circles spanned by each pair of kernel basis vectors.
fn eigensphere_grid(kernel: &DMatrix<f64>, density: usize) -> Vec<DVector<f64>> {
    let m = kernel.ncols();
    let mut points: Vec<DVector<f64>> = Vec::new();
    let mut push = |p: DVector<f64>| {
        if points.iter().all(|q| (q - &p).norm() > 1e-9) {
            points.push(p);
        }
    };
    if m == 1 {
        let v: DVector<f64> = kernel.column(0).into();
        push(v.clone());
        push(-v);
        return points;
    }
    for i in 0..m {
        for j in (i + 1)..m {
            let vi: DVector<f64> = kernel.column(i).into();
            let vj: DVector<f64> = kernel.column(j).into();
            for a in 0..density {
                let theta = 2.0 * std::f64::consts::PI * (a as f64) / (density as f64);
                push(theta.cos() * &vi + theta.sin() * &vj);
            }
        }
    }
    points
}

/// Trivial solutions (0, lambda, x) for every eigenvalue in the window: the
/// twin pair for simple eigenvalues, a great-circle grid for multiple ones.
pub fn find_trivial_solutions(
    problem: &PerturbedProblem,
    window: (f64, f64),
    settings: &TraceSettings,
) -> Result<Vec<SolutionPoint>> {
    let infos = pencil_eigenvalues(problem.pencil(), window)?;
    let mut anchors = Vec::new();
    for info in &infos {
        for x in eigensphere_grid(&info.kernel_basis, settings.grid_density) {
            anchors.push(SolutionPoint::trivial(problem, info.lambda, x));
        }
    }
    Ok(anchors)
}

/// Pseudo-arclength trace of the solution branch through `anchor`.
pub fn trace_branch(
    problem: &PerturbedProblem,
    anchor: &SolutionPoint,
    direction: i32,
    settings: &TraceSettings,
) -> Result<Branch> {
    let scale = problem.scale_at(anchor.s, anchor.lambda);
    if anchor.residual > settings.residual_tol * scale {
        return Err(Error::Precondition(format!(
            "anchor residual {:e} exceeds the corrector tolerance",
            anchor.residual
        )));
    }
    if (anchor.x.norm() - 1.0).abs() > 1e-9 {
        return Err(Error::NonUnitVector {
            norm: anchor.x.norm(),
        });
    }

    let u_anchor = pack(anchor.s, anchor.lambda, &anchor.x);
    let dir = if direction >= 0 { 1.0 } else { -1.0 };
    let t0 = tangent_at(problem, &u_anchor, None)? * dir;

    let mut u = u_anchor.clone();
    let mut tangent = t0.clone();
    let mut h = settings.initial_step;
    let mut successes = 0usize;
    let mut arclength = 0.0;
    let warmup = 20.0 * settings.initial_step;
    let mut points = vec![anchor.clone()];

    let finish = |points: Vec<SolutionPoint>, termination: Termination| Branch {
        anchor: anchor.clone(),
        points,
        termination,
    };

    for _ in 0..settings.max_steps {
        let u_pred = &u + h * &tangent;
        let corrected = corrector(problem, &u_pred, &u_pred, &tangent, settings);
        let (u_new, _) = match corrected {
            Some(v) => v,
            None => {
                h *= settings.shrink_factor;
                successes = 0;
                if h < settings.min_step {
                    return Ok(finish(
                        points,
                        Termination::StepFailure {
                            diagnostics: "corrector diverged at the minimum step size".to_string(),
                        },
                    ));
                }
                continue;
            }
        };

        let step_len = (&u_new - &u).norm();
        arclength += step_len;
        let point = SolutionPoint::from_state(problem, &u_new);
        let s_prev = u[0];

        // Trivial-return events: a sign change of s from a genuine excursion,
        // or landing with |s| at tolerance away from the anchor eigenset.
        let crossed =
            s_prev * point.s < 0.0 && s_prev.abs().max(point.s.abs()) > settings.s_return_tol;
        let landed = point.s.abs() <= settings.s_return_tol
            && (point.lambda - anchor.lambda).abs() > CLUSTER_RADIUS;
        if crossed || landed {
            let w = if (point.s - s_prev).abs() > 0.0 {
                (s_prev / (s_prev - point.s)).clamp(0.0, 1.0)
            } else {
                1.0
            };
            let u_mid = (1.0 - w) * &u + w * &u_new;
            let (_, lambda_mid, x_mid) = unpack(&u_mid);
            if let Some((lambda2, x2)) = solve_trivial(problem, lambda_mid, &x_mid) {
                if (lambda2 - anchor.lambda).abs() > CLUSTER_RADIUS {
                    points.push(point);
                    points.push(SolutionPoint::trivial(problem, lambda2, x2.clone()));
                    return Ok(finish(
                        points,
                        Termination::TrivialReturn {
                            lambda_second: lambda2,
                            x_second: x2,
                        },
                    ));
                }
            }
        }

        // Unbounded in the (s, lambda) plane.
        let radius = point.s.hypot(point.lambda);
        if radius > settings.bound {
            points.push(point);
            return Ok(finish(points, Termination::Unbounded { radius }));
        }

        // Closed loop: when the trace comes within a step of the anchor,
        // refine onto the hyperplane through the anchor and compare.
        if arclength > warmup {
            let dist = (&u_new - &u_anchor).norm();
            if dist <= (1.5 * step_len).max(10.0 * settings.loop_tol) {
                if let Some((u_loop, _)) = corrector(problem, &u_new, &u_anchor, &tangent, settings)
                {
                    if (&u_loop - &u_anchor).norm() <= settings.loop_tol && tangent.dot(&t0) > 0.0 {
                        points.push(point);
                        return Ok(finish(points, Termination::ClosedLoop));
                    }
                }
            }
        }

        points.push(point);
        match tangent_at(problem, &u_new, Some(&tangent)) {
            Ok(t) => tangent = t,
            Err(e) => {
                return Ok(finish(
                    points,
                    Termination::StepFailure {
                        diagnostics: format!("tangent update failed: {e}"),
                    },
                ));
            }
        }
        u = u_new;

        successes += 1;
        if successes >= settings.grow_after {
            h = (h * settings.grow_factor).min(settings.max_step);
            successes = 0;
        }
    }

    Ok(finish(
        points,
        Termination::StepFailure {
            diagnostics: "step budget exhausted".to_string(),
        },
    ))
}

/// Classify the connected component through a trivial anchor: trace from the
/// anchor (and from every detected bifurcation point when the eigensphere is
/// multiple) in both directions and aggregate.
pub fn classify_component(
    problem: &PerturbedProblem,
    anchor: &SolutionPoint,
    bound: f64,
    settings: &TraceSettings,
) -> Result<ComponentVerdict> {
    if anchor.s.abs() > settings.s_return_tol {
        return Err(Error::Precondition(
            "classification anchor must be a trivial solution".to_string(),
        ));
    }
    let mut settings = settings.clone();
    settings.bound = bound;

    let kernel = kernel_basis(problem.pencil(), anchor.lambda);
    if kernel.ncols() == 0 {
        return Err(Error::NotAnEigenvalue {
            lambda: anchor.lambda,
        });
    }

    let mut anchors = vec![anchor.clone()];
    let mut bifurcation_branches = false;
    if kernel.ncols() > 1 {
        for rep in detect_bifurcation_points(problem, anchor.lambda, &settings)? {
            bifurcation_branches = true;
            for sign in [1.0, -1.0] {
                anchors.push(SolutionPoint::trivial(problem, anchor.lambda, sign * &rep));
            }
        }
    }

    let mut trivial_return: Option<(f64, DVector<f64>)> = None;
    let mut saw_unbounded = false;
    let mut failures: Vec<String> = Vec::new();
    for a in &anchors {
        for dir in [1, -1] {
            let branch = trace_branch(problem, a, dir, &settings)?;
            match branch.termination {
                Termination::Unbounded { .. } => saw_unbounded = true,
                Termination::TrivialReturn {
                    lambda_second,
                    x_second,
                } => {
                    if trivial_return.is_none() {
                        trivial_return = Some((lambda_second, x_second));
                    }
                }
                Termination::ClosedLoop => {}
                Termination::StepFailure { ref diagnostics } => {
                    // A trace confined to the anchor eigensphere is a loop in
                    // the trivial set, not a failure of classification.
                    if !branch.confined_to_anchor_eigenset(&settings) {
                        failures.push(format!(
                            "anchor lambda={} dir={dir}: {diagnostics}",
                            a.lambda
                        ));
                    }
                }
            }
        }
    }

    if saw_unbounded {
        return Ok(ComponentVerdict::Unbounded);
    }
    if let Some((lambda_second, x_second)) = trivial_return {
        return Ok(ComponentVerdict::TrivialReturn {
            lambda_second,
            x_second,
        });
    }
    if failures.is_empty() && !bifurcation_branches {
        return Ok(ComponentVerdict::IsolatedCompact);
    }
    Ok(ComponentVerdict::Inconclusive {
        diagnostics: if failures.is_empty() {
            "bifurcating branches found but none produced a conclusive trace".to_string()
        } else {
            failures.join("; ")
        },
    })
}

/// Bifurcation points on a multiple eigensphere: limits x-hat of x(s)/|x(s)|
/// along branches emanating with s != 0, extrapolated over a decreasing |s|
/// ladder. Antipodal and near-duplicate hits are reported once, each
/// representative standing for the twin pair {x-hat, -x-hat}.
pub fn detect_bifurcation_points(
    problem: &PerturbedProblem,
    lambda_star: f64,
    settings: &TraceSettings,
) -> Result<Vec<DVector<f64>>> {
    let pencil = problem.pencil();
    let kernel = kernel_basis(pencil, lambda_star);
    if kernel.ncols() < 2 {
        return Err(Error::Precondition(
            "bifurcation-point detection requires a multiple eigensphere".to_string(),
        ));
    }

    // Guard radius in lambda: half the gap to the nearest other eigenvalue.
    let scan = pencil_eigenvalues(pencil, (lambda_star - 5.0, lambda_star + 5.0))?;
    let gap = scan
        .iter()
        .filter(|i| (i.lambda - lambda_star).abs() > CLUSTER_RADIUS)
        .map(|i| (i.lambda - lambda_star).abs())
        .fold(f64::INFINITY, f64::min);
    let guard = if gap.is_finite() { gap / 2.0 } else { 1.0 };

    let s0 = settings.slice_s;
    let mut slice_solutions: Vec<(f64, DVector<f64>)> = Vec::new();
    for seed in eigensphere_grid(&kernel, settings.grid_density) {
        if let Some((lambda, x)) = solve_fixed_s(problem, s0, lambda_star, &seed) {
            if (lambda - lambda_star).abs() <= guard
                && slice_solutions.iter().all(|(_, q)| (q - &x).norm() > 1e-6)
            {
                slice_solutions.push((lambda, x));
            }
        }
    }

    let mut limits: Vec<DVector<f64>> = Vec::new();
    for (lambda_init, x_init) in &slice_solutions {
        let mut nodes: Vec<(f64, DVector<f64>)> = Vec::new();
        let mut lambda = *lambda_init;
        let mut x = x_init.clone();
        for level in 0..settings.ladder_levels {
            let s = s0 / 2f64.powi(level as i32);
            match solve_fixed_s(problem, s, lambda, &x) {
                Some((l2, x2)) => {
                    lambda = l2;
                    x = x2.clone();
                    nodes.push((s, x2));
                }
                None => break,
            }
        }
        if nodes.len() < 4 {
            continue;
        }
        let mut x_hat = neville_extrapolate(&nodes);
        let norm = x_hat.norm();
        if norm == 0.0 {
            continue;
        }
        x_hat /= norm;
        // The limit must sit on the eigensphere itself.
        let in_kernel = &kernel * (kernel.transpose() * &x_hat);
        if (&x_hat - in_kernel).norm() > 1e-3 {
            continue;
        }
        limits.push(x_hat);
    }

    // Antipodal/near-duplicate dedup with a canonical sign representative.
    let mut reps: Vec<DVector<f64>> = Vec::new();
    for mut cand in limits {
        canonical_sign_vec(&mut cand);
        if reps.iter().all(|r| (r - &cand).norm() > 1e-5) {
            reps.push(cand);
        }
    }
    Ok(reps)
}

fn canonical_sign_vec(v: &mut DVector<f64>) {
    for i in 0..v.len() {
        if v[i].abs() > 1e-8 {
            if v[i] < 0.0 {
                v.neg_mut();
            }
            return;
        }
    }
}

/// Componentwise polynomial extrapolation of x(s) to s = 0 (Neville scheme).
fn neville_extrapolate(nodes: &[(f64, DVector<f64>)]) -> DVector<f64> {
    let k = nodes.len();
    let dim = nodes[0].1.len();
    let mut table: Vec<DVector<f64>> = nodes.iter().map(|(_, v)| v.clone()).collect();
    let s: Vec<f64> = nodes.iter().map(|(s, _)| *s).collect();
    for level in 1..k {
        for i in 0..k - level {
            let denom = s[i] - s[i + level];
            let mut next = DVector::zeros(dim);
            for c in 0..dim {
                next[c] = (s[i] * table[i + 1][c] - s[i + level] * table[i][c]) / denom;
            }
            table[i] = next;
        }
    }
    table[0].clone()
}
