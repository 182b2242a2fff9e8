//! Acceptance suite: one test per criterion, each printing its own PASS line.
//! Run with `cargo test -p spherebranch --test acceptance -- --nocapture`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use spherebranch_core::continuation::{
    classify_component, detect_bifurcation_points, trace_branch, ComponentVerdict, SolutionPoint,
    Termination, TraceSettings,
};
use spherebranch_core::degree::{
    conjecture_check, degree_on_interval, eigenset_contribution, eigenset_contribution_detailed,
    ls_sign, simple_eigenpoint_sign, OrientationConvention,
};
use spherebranch_core::eigenpairs::{fit_conic, trace_components, ComponentKind, MapWindow};
use spherebranch_core::linalg::det_sign;
use spherebranch_core::operator::{example_problem, Pencil, Perturbation};
use spherebranch_core::orientation::{
    companions_equivalent, is_companion, operator_sign, OrientedOperator,
};
use spherebranch_core::spectrum::{certify, pencil_eigenvalues};

const N: usize = 16;

fn unit(n: usize, i: usize) -> DVector<f64> {
    let mut v = DVector::zeros(n);
    v[i] = 1.0;
    v
}

fn pencil(k: usize) -> Pencil {
    Pencil::tk_harmonic(k, N).unwrap()
}

/// Criterion 1: the spectra of the three examples over [-1, 10.5] match the
/// known lists with eigenvalue error <= 1e-9.
#[test]
fn criterion_01_spectrum_reproduction() {
    for k in 1..=3usize {
        let infos = pencil_eigenvalues(&pencil(k), (-1.0, 10.5)).unwrap();
        let mut expected: Vec<(f64, usize)> = vec![(0.0, k)];
        for m in (k + 1)..=10 {
            expected.push((m as f64, 1));
        }
        assert_eq!(infos.len(), expected.len(), "k={k}");
        for (info, (lambda, mult)) in infos.iter().zip(expected.iter()) {
            assert!(
                (info.lambda - lambda).abs() <= 1e-9,
                "k={k}: eigenvalue {} vs {lambda}",
                info.lambda
            );
            assert_eq!(info.geometric_mult, *mult, "k={k} lambda={lambda}");
        }
    }
    println!("criterion 01 PASS: spectrum reproduction for k=1,2,3 at n=16");
}

/// Criterion 2: certificates at lambda* = 0.
#[test]
fn criterion_02_certificates() {
    for (k, odd) in [(1usize, true), (2, false), (3, true)] {
        let cert = certify(&pencil(k), 0.0).unwrap();
        assert!(cert.h3_holds, "k={k}");
        assert_eq!(cert.h2_odd, odd, "k={k}");
    }
    println!("criterion 02 PASS: H3 certificates for all k, H2 parity matches");
}

/// Criterion 3: conic fits of the eigenpair ellipses, each parameter within
/// 1e-4 and fit residual <= 1e-8.
#[test]
fn criterion_03_eigenpair_ellipses() {
    let check = |fit: spherebranch_core::eigenpairs::ConicFit,
                 center: (f64, f64),
                 axes: (f64, f64),
                 label: &str| {
        assert!((fit.center.0 - center.0).abs() <= 1e-4, "{label} s0");
        assert!((fit.center.1 - center.1).abs() <= 1e-4, "{label} l0");
        assert!((fit.half_axes.0 - axes.0).abs() <= 1e-4, "{label} a_s");
        assert!((fit.half_axes.1 - axes.1).abs() <= 1e-4, "{label} a_l");
        assert!(fit.residual <= 1e-8, "{label} residual {:e}", fit.residual);
    };

    let k3 = example_problem(3, N).unwrap();
    let comps = trace_components(
        &k3,
        &MapWindow {
            s: (-1.0, 1.0),
            lambda: (-1.0, 8.0),
        },
        128,
    )
    .unwrap();
    let curve = comps
        .iter()
        .find(|c| c.kind == ComponentKind::ClosedCurve)
        .unwrap();
    check(
        fit_conic(curve).unwrap(),
        (0.0, 2.0),
        (1.0 / 3.0_f64.sqrt(), 2.0),
        "k3",
    );

    let k2 = example_problem(2, N).unwrap();
    let comps = trace_components(
        &k2,
        &MapWindow {
            s: (-0.3, 0.3),
            lambda: (2.5, 4.5),
        },
        128,
    )
    .unwrap();
    let curve = comps
        .iter()
        .find(|c| c.kind == ComponentKind::ClosedCurve)
        .unwrap();
    check(
        fit_conic(curve).unwrap(),
        (0.0, 3.5),
        (1.0 / 48.0_f64.sqrt(), 0.5),
        "k2",
    );

    let k1 = example_problem(1, N).unwrap();
    let comps = trace_components(
        &k1,
        &MapWindow {
            s: (-1.0, 1.0),
            lambda: (-0.5, 4.5),
        },
        128,
    )
    .unwrap();
    let mut fits: Vec<_> = comps
        .iter()
        .filter(|c| c.kind == ComponentKind::ClosedCurve)
        .map(|c| fit_conic(c).unwrap())
        .collect();
    assert_eq!(fits.len(), 2, "k1 curve count");
    fits.sort_by(|a, b| a.center.1.partial_cmp(&b.center.1).unwrap());
    check(fits[0], (0.0, 1.0), (1.0 / 2.0_f64.sqrt(), 1.0), "k1 lower");
    check(
        fits[1],
        (0.0, 3.5),
        (1.0 / 48.0_f64.sqrt(), 0.5),
        "k1 upper",
    );

    println!("criterion 03 PASS: ellipse centers, half-axes, and residuals");
}

/// Criterion 4: the k=2 eigenpair map has exactly one component, the isolated
/// point at the origin located within 1e-8.
#[test]
fn criterion_04_isolated_eigenpair() {
    let problem = example_problem(2, N).unwrap();
    let comps = trace_components(
        &problem,
        &MapWindow {
            s: (-0.3, 0.3),
            lambda: (-0.5, 0.5),
        },
        128,
    )
    .unwrap();
    assert_eq!(comps.len(), 1);
    assert_eq!(comps[0].kind, ComponentKind::IsolatedPoint);
    let (s, l) = comps[0].samples[0];
    assert!(s.abs() <= 1e-8 && l.abs() <= 1e-8, "point ({s}, {l})");
    println!("criterion 04 PASS: k=2 isolated eigenpair (0, 0) within 1e-8");
}

/// Criterion 5: the k=3 branch endpoints and bifurcation points.
#[test]
fn criterion_05_branch_endpoints() {
    let problem = example_problem(3, N).unwrap();
    let settings = TraceSettings::default();
    let anchor = SolutionPoint::trivial(&problem, 0.0, unit(N, 2));
    match classify_component(&problem, &anchor, 10.0, &settings).unwrap() {
        ComponentVerdict::TrivialReturn {
            lambda_second,
            x_second,
        } => {
            assert!(
                (lambda_second - 4.0).abs() <= 1e-6,
                "lambda {lambda_second}"
            );
            let e4 = unit(N, 3);
            let dist = (&x_second - &e4).norm().min((&x_second + &e4).norm());
            assert!(dist <= 1e-6, "x_second off e4 by {dist:e}");
        }
        other => panic!("expected TrivialReturn, got {other:?}"),
    }
    let reps = detect_bifurcation_points(&problem, 0.0, &settings).unwrap();
    assert_eq!(reps.len(), 1, "one twin pair of bifurcation points");
    let e3 = unit(N, 2);
    let dist = (&reps[0] - &e3).norm().min((&reps[0] + &e3).norm());
    assert!(dist <= 1e-4, "bifurcation point off e3 by {dist:e}");
    println!(
        "criterion 05 PASS: k=3 TrivialReturn at lambda=4 with x=+-e4; bifurcation points +-e3"
    );
}

/// Criterion 6: the k=3 lines at lambda = 5, 6 are unbounded and stay on
/// x = +-e_lambda to 1e-8.
#[test]
fn criterion_06_unbounded_lines() {
    let problem = example_problem(3, N).unwrap();
    let settings = TraceSettings::default();
    for idx in [4usize, 5] {
        let lambda = (idx + 1) as f64;
        let anchor = SolutionPoint::trivial(&problem, lambda, unit(N, idx));
        let verdict = classify_component(&problem, &anchor, 10.0, &settings).unwrap();
        assert!(
            matches!(verdict, ComponentVerdict::Unbounded),
            "lambda={lambda}: {verdict:?}"
        );
        for dir in [1, -1] {
            let branch = trace_branch(&problem, &anchor, dir, &settings).unwrap();
            assert!(matches!(branch.termination, Termination::Unbounded { .. }));
            let e = unit(N, idx);
            for p in &branch.points {
                let dist = (&p.x - &e).norm().min((&p.x + &e).norm());
                assert!(dist <= 1e-8, "lambda={lambda}: point off axis by {dist:e}");
            }
        }
    }
    println!("criterion 06 PASS: k=3 lines at lambda=5,6 unbounded with x=+-e_lambda");
}

/// Criterion 7: twin-sign equality at every simple eigenpoint of the example
/// pencils and of 20 seeded random pencils.
#[test]
fn criterion_07_twin_sign_property() {
    let conv = OrientationConvention::default();
    let mut violations = 0usize;
    let mut tested = 0usize;
    let mut check = |pencil: &Pencil, window: (f64, f64)| {
        for info in pencil_eigenvalues(pencil, window).unwrap() {
            if info.geometric_mult != 1 {
                continue;
            }
            let Ok(cert) = certify(pencil, info.lambda) else {
                continue;
            };
            if !cert.is_simple() {
                continue;
            }
            let x: DVector<f64> = info.kernel_basis.column(0).into();
            let a = simple_eigenpoint_sign(pencil, info.lambda, &x, conv).unwrap();
            let b = simple_eigenpoint_sign(pencil, info.lambda, &(-&x), conv).unwrap();
            if a != b {
                violations += 1;
            }
            tested += 1;
        }
    };
    for k in 1..=3usize {
        check(&pencil(k), (-1.0, N as f64 + 0.5));
    }
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let n = 4 + (seed as usize) % 5;
        let l = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let mut c = DMatrix::from_fn(n, n, |_, _| 0.3 * rng.random_range(-1.0..1.0));
        for i in 0..n {
            c[(i, i)] += 1.0 + rng.random_range(0.0..1.0);
        }
        let Ok(p) = Pencil::new(l, c, false) else {
            continue;
        };
        check(&p, (-8.0, 8.0));
    }
    assert_eq!(violations, 0);
    assert!(tested >= 40, "only {tested} eigenpoints exercised");
    println!("criterion 07 PASS: twin signs agree at {tested} simple eigenpoints, zero violations");
}

/// Criterion 8: parity of the eigenset contribution at lambda* = 0 and
/// stability under epsilon halving.
#[test]
fn criterion_08_contribution_parity() {
    let conv = OrientationConvention::default();
    for k in [1usize, 3] {
        let value = eigenset_contribution(&pencil(k), 0.0, (-1.0, 1.0), conv).unwrap();
        assert_ne!(value, 0, "k={k}");
        assert_eq!(value.rem_euclid(4), 2, "k={k} value={value}");
    }
    let value = eigenset_contribution(&pencil(2), 0.0, (-1.0, 1.0), conv).unwrap();
    assert_eq!(value, 0);
    // two consecutive epsilon levels agree
    for k in [2usize, 3] {
        let (a, _) =
            eigenset_contribution_detailed(&pencil(k), 0.0, (-1.0, 1.0), conv, Some(0.08)).unwrap();
        let (b, _) =
            eigenset_contribution_detailed(&pencil(k), 0.0, (-1.0, 1.0), conv, Some(0.04)).unwrap();
        assert_eq!(a, b, "k={k}");
    }
    println!(
        "criterion 08 PASS: contribution parity (2 mod 4 for odd k, 0 for k=2), epsilon-stable"
    );
}

/// Criterion 9: the compact-component corollary ties the branch verdict to the
/// degree contribution.
#[test]
fn criterion_09_degree_branch_consistency() {
    let conv = OrientationConvention::default();
    let settings = TraceSettings::default();

    let k2 = example_problem(2, N).unwrap();
    let anchor = SolutionPoint::trivial(&k2, 0.0, unit(N, 0));
    let verdict = classify_component(&k2, &anchor, 10.0, &settings).unwrap();
    let contribution = eigenset_contribution(k2.pencil(), 0.0, (-1.0, 1.0), conv).unwrap();
    assert!(matches!(verdict, ComponentVerdict::IsolatedCompact));
    assert_eq!(contribution, 0);

    for (k, idx) in [(1usize, 0usize), (3, 2)] {
        let problem = example_problem(k, N).unwrap();
        let anchor = SolutionPoint::trivial(&problem, 0.0, unit(N, idx));
        let verdict = classify_component(&problem, &anchor, 10.0, &settings).unwrap();
        assert!(
            !matches!(verdict, ComponentVerdict::IsolatedCompact),
            "k={k}: {verdict:?}"
        );
    }
    println!("criterion 09 PASS: IsolatedCompact iff zero contribution (k=2); never for k=1,3");
}

/// Criterion 10: the LS sign flips across lambda* = 0 exactly when k is odd,
/// matching the diagonal determinant-product oracle.
#[test]
fn criterion_10_ls_sign_jump() {
    let oracle = |k: usize, lambda: f64| -> i32 {
        let mut sign = 1.0f64;
        for m in 1..=N {
            let factor = if m <= k {
                -lambda / m as f64
            } else {
                1.0 - lambda / m as f64
            };
            sign *= factor.signum();
        }
        sign as i32
    };
    for k in 1..=3usize {
        let p = pencil(k);
        let minus = ls_sign(&p, 1.0, -0.25).unwrap();
        let plus = ls_sign(&p, 1.0, 0.25).unwrap();
        assert_eq!(minus, oracle(k, -0.25) * oracle(k, 1.0), "k={k} at -0.25");
        assert_eq!(plus, oracle(k, 0.25) * oracle(k, 1.0), "k={k} at +0.25");
        let flips = minus != plus;
        assert_eq!(flips, k % 2 == 1, "k={k}");
    }
    println!("criterion 10 PASS: LS-sign jump across 0 for k=1,3 only, matching the oracle");
}

/// Criterion 11: the endpoint-sign experiment agrees on a midpoint sweep over
/// all three examples; any disagreement is printed with full diagnostics.
#[test]
fn criterion_11_conjecture_experiment() {
    let conv = OrientationConvention::default();
    let mut disagreements = Vec::new();
    for k in 1..=3usize {
        let p = pencil(k);
        let lambdas: Vec<f64> = pencil_eigenvalues(&p, (-1.0, 8.2))
            .unwrap()
            .iter()
            .map(|i| i.lambda)
            .collect();
        let mut boundaries = vec![lambdas[0] - 0.5];
        for pair in lambdas.windows(2) {
            boundaries.push(0.5 * (pair[0] + pair[1]));
        }
        boundaries.push(lambdas.last().unwrap() + 0.5);
        // every interval with endpoints on the midpoint grid, one eigenvalue
        // and several eigenvalues alike
        for i in 0..boundaries.len() {
            for j in (i + 1)..boundaries.len() {
                let record = conjecture_check(&p, boundaries[i], boundaries[j], conv).unwrap();
                if !record.agree {
                    disagreements.push((k, record));
                }
            }
        }
    }
    for (k, record) in &disagreements {
        println!(
            "criterion 11 DIAGNOSTIC: k={k} interval ({}, {}): degree={} ls=({}, {}) -> \
             deg_nonzero={} signs_differ={}",
            record.alpha,
            record.beta,
            record.degree_value,
            record.ls_sign_alpha,
            record.ls_sign_beta,
            record.deg_nonzero,
            record.endpoint_signs_differ
        );
    }
    assert!(
        disagreements.is_empty(),
        "{} disagreements",
        disagreements.len()
    );
    println!("criterion 11 PASS: conjecture experiment agrees on every sweep interval");
}

/// Criterion 12: the remaining property suites at their stated tolerances with
/// seed-reproducible randomness.
#[test]
fn criterion_12_property_suites() {
    let conv = OrientationConvention::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE97);

    // additivity/excision of degree_on_interval
    for k in 1..=3usize {
        let p = pencil(k);
        let total = degree_on_interval(&p, -0.6, 4.7, conv).unwrap();
        for _ in 0..4 {
            let gamma = loop {
                let g: f64 = rng.random_range(-0.5..4.6);
                if (g - g.round()).abs() > 0.1 {
                    break g;
                }
            };
            let left = degree_on_interval(&p, -0.6, gamma, conv).unwrap();
            let right = degree_on_interval(&p, gamma, 4.7, conv).unwrap();
            assert_eq!(total.value, left.value + right.value, "k={k}");
        }
        let shrunk = degree_on_interval(&p, -0.35, 0.45, conv).unwrap();
        let wide = degree_on_interval(&p, -0.5, 0.5, conv).unwrap();
        assert_eq!(shrunk.value, wide.value, "excision k={k}");
    }

    // two-class companion partition
    for _ in 0..10 {
        let n = rng.random_range(2..=6usize);
        let t = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let mut companions = Vec::new();
        while companions.len() < 20 {
            let k = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
            if is_companion(&t, &k).unwrap() {
                companions.push(k);
            }
        }
        let reference = companions[0].clone();
        let mut flipped = &t + &reference;
        flipped.column_mut(0).neg_mut();
        let witness = &flipped - &t;
        for k in &companions {
            let a = companions_equivalent(&t, &reference, k).unwrap();
            let b = companions_equivalent(&t, &witness, k).unwrap();
            assert!(a ^ b);
        }
    }

    // oriented-composition sign multiplicativity
    let mut done = 0;
    while done < 20 {
        let n = rng.random_range(2..=6usize);
        let t1 = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let t2 = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        if det_sign(&t1) == 0 || det_sign(&t2) == 0 {
            continue;
        }
        let k1 = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let k2 = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let (Ok(op1), Ok(op2)) = (OrientedOperator::new(t1, k1), OrientedOperator::new(t2, k2))
        else {
            continue;
        };
        let composed = op2.compose(&op1).unwrap();
        assert_eq!(
            operator_sign(&composed),
            operator_sign(&op2) * operator_sign(&op1)
        );
        done += 1;
    }

    // derivative-vs-finite-difference on a nonlinear perturbation
    let n = 6;
    let a = DVector::from_fn(n, |i, _| 0.5 + (i as f64) * 0.1);
    let a2 = a.clone();
    let p = Perturbation::from_fns_seeded(
        n,
        move |x: &DVector<f64>| x * a.dot(x),
        move |x: &DVector<f64>| DMatrix::identity(n, n) * a2.dot(x) + x * a2.transpose(),
        0xACCE97,
    );
    assert!(
        p.is_ok(),
        "finite-difference validation rejected a correct derivative"
    );

    println!("criterion 12 PASS: additivity/excision, two-class partition, sign multiplicativity, FD derivative");
}
