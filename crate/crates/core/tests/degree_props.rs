//! Property suites for the degree machinery: twin-sign equality, the parity of
//! odd-multiplicity contributions, additivity over subintervals, stability of
//! the epsilon route, and constancy of the LS sign between eigenvalues.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use spherebranch_core::degree::{
    degree_on_interval, eigenset_contribution, eigenset_contribution_detailed, ls_sign,
    simple_eigenpoint_sign, OrientationConvention,
};
use spherebranch_core::operator::Pencil;
use spherebranch_core::spectrum::{certify, pencil_eigenvalues};

fn random_pencil(n: usize, rng: &mut ChaCha8Rng) -> Option<Pencil> {
    let l = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    let mut c = DMatrix::from_fn(n, n, |_, _| 0.3 * rng.random_range(-1.0..1.0));
    for i in 0..n {
        c[(i, i)] += 1.0 + rng.random_range(0.0..1.0);
    }
    Pencil::new(l, c, false).ok()
}

#[test]
fn twin_signs_agree_on_example_pencils() {
    let conv = OrientationConvention::default();
    for k in 1..=3usize {
        for n in [8usize, 14, 20] {
            let pencil = Pencil::tk_harmonic(k, n).unwrap();
            let infos = pencil_eigenvalues(&pencil, (-1.0, n as f64 - 0.5)).unwrap();
            let mut tested = 0;
            for info in infos.iter().filter(|i| i.geometric_mult == 1) {
                let cert = certify(&pencil, info.lambda).unwrap();
                assert!(cert.is_simple());
                let x: DVector<f64> = info.kernel_basis.column(0).into();
                let a = simple_eigenpoint_sign(&pencil, info.lambda, &x, conv).unwrap();
                let b = simple_eigenpoint_sign(&pencil, info.lambda, &(-&x), conv).unwrap();
                assert_eq!(a, b, "twin mismatch k={k} n={n} lambda={}", info.lambda);
                tested += 1;
            }
            assert!(tested >= n - k - 1);
        }
    }
}

#[test]
fn twin_signs_agree_on_seeded_random_pencils() {
    let conv = OrientationConvention::default();
    let mut total = 0;
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let n = 4 + (seed as usize) % 5; // 4..=8
        let Some(pencil) = random_pencil(n, &mut rng) else {
            continue;
        };
        let Ok(infos) = pencil_eigenvalues(&pencil, (-8.0, 8.0)) else {
            continue;
        };
        for info in infos.iter().filter(|i| i.geometric_mult == 1) {
            let Ok(cert) = certify(&pencil, info.lambda) else {
                continue;
            };
            if !cert.is_simple() {
                continue;
            }
            let x: DVector<f64> = info.kernel_basis.column(0).into();
            let a = simple_eigenpoint_sign(&pencil, info.lambda, &x, conv).unwrap();
            let b = simple_eigenpoint_sign(&pencil, info.lambda, &(-&x), conv).unwrap();
            assert_eq!(a, b, "twin mismatch seed={seed} lambda={}", info.lambda);
            total += 1;
        }
    }
    assert!(
        total >= 20,
        "only {total} simple eigenpoints were exercised"
    );
}

#[test]
fn odd_kernels_contribute_two_mod_four() {
    let conv = OrientationConvention::default();
    for (k, n) in [(1usize, 10usize), (3, 10), (3, 16), (5, 12)] {
        let pencil = Pencil::tk_harmonic(k, n).unwrap();
        let cert = certify(&pencil, 0.0).unwrap();
        assert_eq!(cert.h2_odd, k % 2 == 1);
        if !cert.h2_odd {
            continue;
        }
        let value = eigenset_contribution(&pencil, 0.0, (-1.0, 1.0), conv).unwrap();
        assert_ne!(value, 0, "k={k} n={n}");
        assert_eq!(value.rem_euclid(4), 2, "k={k} n={n} value={value}");
    }
    // the even case vanishes
    for (k, n) in [(2usize, 10usize), (4, 12)] {
        let pencil = Pencil::tk_harmonic(k, n).unwrap();
        let value = eigenset_contribution(&pencil, 0.0, (-1.0, 1.0), conv).unwrap();
        assert_eq!(value, 0, "k={k} n={n}");
    }
}

#[test]
fn parity_is_invariant_under_orthogonal_conjugation() {
    let conv = OrientationConvention::default();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let n = 9;
    let base = Pencil::tk_harmonic(3, n).unwrap();
    let raw = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0_f64..1.0));
    let q = raw.qr().q();
    let pencil = Pencil::new(
        q.transpose() * base.l() * &q,
        q.transpose() * base.c() * &q,
        true,
    )
    .unwrap();
    let value = eigenset_contribution(&pencil, 0.0, (-1.0, 1.0), conv).unwrap();
    assert_ne!(value, 0);
    assert_eq!(value.rem_euclid(4), 2);
}

#[test]
fn parity_survives_general_two_sided_equivalence() {
    // det(A (L - lambda C) B) = det A det B det(L - lambda C): two-sided
    // transforms by well-conditioned matrices keep the spectrum, the kernel
    // structure, and the contribution parity, while making every splitting
    // genuinely oblique.
    let conv = OrientationConvention::default();
    let mut rng = ChaCha8Rng::seed_from_u64(57);
    let n = 9;
    let base = Pencil::tk_harmonic(3, n).unwrap();
    let well_conditioned = |rng: &mut ChaCha8Rng| {
        let mut m = DMatrix::from_fn(n, n, |_, _| 0.3 * rng.random_range(-1.0..1.0));
        for i in 0..n {
            m[(i, i)] += 1.0;
        }
        m
    };
    let a = well_conditioned(&mut rng);
    let b = well_conditioned(&mut rng);
    let pencil = Pencil::new(&a * base.l() * &b, &a * base.c() * &b, true).unwrap();

    let infos = pencil_eigenvalues(&pencil, (-1.0, 6.5)).unwrap();
    assert_eq!(infos.len(), 4);
    assert!(infos[0].lambda.abs() < 1e-7 && infos[0].geometric_mult == 3);
    let cert = certify(&pencil, infos[0].lambda).unwrap();
    assert!(cert.h2_odd && cert.h3_holds);

    let value = eigenset_contribution(&pencil, infos[0].lambda, (-1.0, 1.0), conv).unwrap();
    assert_ne!(value, 0);
    assert_eq!(value.rem_euclid(4), 2);

    // simple eigenvalues keep their twin property as well
    for info in infos.iter().skip(1) {
        let x: DVector<f64> = info.kernel_basis.column(0).into();
        let s1 = simple_eigenpoint_sign(&pencil, info.lambda, &x, conv).unwrap();
        let s2 = simple_eigenpoint_sign(&pencil, info.lambda, &(-&x), conv).unwrap();
        assert_eq!(s1, s2);
    }
}

#[test]
fn degree_is_additive_over_subintervals() {
    let conv = OrientationConvention::default();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for k in 1..=3usize {
        let pencil = Pencil::tk_harmonic(k, 12).unwrap();
        let (alpha, beta) = (-0.6, 4.7);
        let total = degree_on_interval(&pencil, alpha, beta, conv).unwrap();
        for _ in 0..5 {
            // random split point bounded away from the integer eigenvalues
            let gamma = loop {
                let g: f64 = rng.random_range(alpha..beta);
                if (g - g.round()).abs() > 0.1 {
                    break g;
                }
            };
            let left = degree_on_interval(&pencil, alpha, gamma, conv).unwrap();
            let right = degree_on_interval(&pencil, gamma, beta, conv).unwrap();
            assert_eq!(total.value, left.value + right.value, "k={k} gamma={gamma}");
        }
    }
}

#[test]
fn excision_shrinks_to_the_same_contribution() {
    let conv = OrientationConvention::default();
    let pencil = Pencil::tk_harmonic(3, 12).unwrap();
    let wide = degree_on_interval(&pencil, -1.0, 1.0, conv).unwrap();
    let narrow = degree_on_interval(&pencil, -0.25, 0.75, conv).unwrap();
    assert_eq!(wide.value, narrow.value);
}

#[test]
fn epsilon_route_is_stable_under_halving() {
    let conv = OrientationConvention::default();
    let pencil = Pencil::tk_harmonic(3, 12).unwrap();
    let mut values = Vec::new();
    for eps in [0.08, 0.04, 0.02, 0.01] {
        let (value, _) =
            eigenset_contribution_detailed(&pencil, 0.0, (-1.0, 1.0), conv, Some(eps)).unwrap();
        values.push(value);
    }
    assert!(values.windows(2).all(|w| w[0] == w[1]), "{values:?}");
}

#[test]
fn ls_sign_is_constant_between_eigenvalues() {
    for k in 1..=3usize {
        let pencil = Pencil::tk_harmonic(k, 12).unwrap();
        let lambda_hat = 0.5;
        // eigenvalue-free intervals for every k in scope: (k+0.1, k+0.9) etc.
        for window in [(0.05, 0.95), (4.05, 4.95)] {
            let mut signs = Vec::new();
            for j in 0..12 {
                let lambda = window.0 + (window.1 - window.0) * (j as f64) / 11.0;
                signs.push(ls_sign(&pencil, lambda_hat, lambda).unwrap());
            }
            assert!(signs.windows(2).all(|w| w[0] == w[1]), "k={k} {signs:?}");
        }
    }
}

#[test]
fn global_sign_flip_negates_every_contribution() {
    let conv = OrientationConvention::default();
    let flipped = conv.flipped();
    for k in 1..=3usize {
        let pencil = Pencil::tk_harmonic(k, 10).unwrap();
        let a = eigenset_contribution(&pencil, 0.0, (-1.0, 1.0), conv).unwrap();
        let b = eigenset_contribution(&pencil, 0.0, (-1.0, 1.0), flipped).unwrap();
        assert_eq!(a, -b);
    }
}
