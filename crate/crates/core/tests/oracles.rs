//! Independent oracles for the numeric routes: every clever computation in
//! the library is checked here against a slower route that shares no code
//! with it.

use cbnorm::constructions::{check_von_neumann, gowers_u3, mobius, random_cubic, ZnFunction};
use cbnorm::poly::MultilinearPoly;
use cbnorm::rng::SplitMix64;
use cbnorm::slices::{operator_norm, slice};
use cbnorm::witness::{build_chsh_witness, objective, quartic_lower_bound};
use nalgebra::{DMatrix, DVector};

// ---------------------------------------------------------------------------
// Gowers U^3: literal quadruple loop vs the autocorrelation regrouping
// ---------------------------------------------------------------------------

/// The U^3 norm as written: the average of D_b D_c D_d g(a) over all of
/// Z_n^4, eighth root. O(n^4), used only as an oracle.
fn gowers_u3_bruteforce(g: &ZnFunction) -> f64 {
    let n = g.modulus();
    let v = g.values();
    let mut total = 0.0;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let mut p = 1.0;
                    for bits in 0..8usize {
                        let mut s = a;
                        if bits & 1 != 0 {
                            s += b;
                        }
                        if bits & 2 != 0 {
                            s += c;
                        }
                        if bits & 4 != 0 {
                            s += d;
                        }
                        p *= v[s % n];
                    }
                    total += p;
                }
            }
        }
    }
    let avg = total / (n as f64).powi(4);
    assert!(avg >= -1e-12);
    avg.max(0.0).powf(0.125)
}

fn random_zn(n: usize, seed: u64) -> ZnFunction {
    let mut rng = SplitMix64::new(seed);
    ZnFunction::new((0..n).map(|_| rng.next_u64() as f64 / u64::MAX as f64 * 2.0 - 1.0).collect())
}

#[test]
fn gowers_matches_bruteforce_on_indicators() {
    for n in [5usize, 7, 11] {
        let g = ZnFunction::indicator_of_zero(n);
        let fast = gowers_u3(&g).unwrap();
        let slow = gowers_u3_bruteforce(&g);
        assert!((fast - slow).abs() < 1e-12, "n = {n}: {fast} vs {slow}");
        assert!((fast - (n as f64).powf(-0.5)).abs() < 1e-10);
    }
}

#[test]
fn gowers_matches_bruteforce_on_mobius() {
    for n in [5usize, 7, 11] {
        let g = mobius(n);
        let fast = gowers_u3(&g).unwrap();
        let slow = gowers_u3_bruteforce(&g);
        assert!((fast - slow).abs() < 1e-12, "n = {n}: {fast} vs {slow}");
    }
}

#[test]
fn gowers_matches_bruteforce_on_random_functions() {
    for (n, seed) in [(6usize, 1u64), (9, 2), (12, 3)] {
        let g = random_zn(n, seed);
        let fast = gowers_u3(&g).unwrap();
        let slow = gowers_u3_bruteforce(&g);
        assert!((fast - slow).abs() < 1e-12, "n = {n}: {fast} vs {slow}");
    }
}

// ---------------------------------------------------------------------------
// Operator norm: power iteration with deflation vs the eigensolver
// ---------------------------------------------------------------------------

/// All eigenvalues of a symmetric matrix by power iteration with deflation:
/// extract the dominant eigenpair with a seeded start vector, subtract
/// `lambda v v^T`, repeat. Independent of the library's eigensolver.
fn power_iteration_spectrum(m: &DMatrix<f64>, seed: u64) -> Vec<f64> {
    let n = m.nrows();
    let mut work = m.clone();
    let mut rng = SplitMix64::new(seed);
    let mut spectrum = Vec::with_capacity(n);
    for _ in 0..n {
        let mut v = DVector::from_fn(n, |_, _| rng.next_u64() as f64 / u64::MAX as f64 - 0.5);
        v /= v.norm();
        let mut lambda = 0.0;
        for _ in 0..20_000 {
            let av = &work * &v;
            let norm = av.norm();
            if norm == 0.0 {
                break;
            }
            v = av / norm;
            lambda = v.dot(&(&work * &v));
        }
        spectrum.push(lambda);
        work -= lambda * &v * v.transpose();
    }
    spectrum
}

fn random_symmetric(n: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = SplitMix64::new(seed);
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let x = rng.next_u64() as f64 / u64::MAX as f64 * 2.0 - 1.0;
            m[(i, j)] = x;
            m[(j, i)] = x;
        }
    }
    m
}

#[test]
fn operator_norm_matches_power_iteration() {
    for seed in 1..=10u64 {
        let m = random_symmetric(8, seed);
        let spectrum = power_iteration_spectrum(&m, 1000 + seed);
        // Sanity of the oracle itself: the extracted spectrum reproduces
        // the trace and the Frobenius norm.
        let trace: f64 = (0..8).map(|i| m[(i, i)]).sum();
        assert!((spectrum.iter().sum::<f64>() - trace).abs() < 1e-7);
        let frob2: f64 = m.iter().map(|x| x * x).sum();
        assert!((spectrum.iter().map(|l| l * l).sum::<f64>() - frob2).abs() < 1e-6);

        let oracle = spectrum.iter().fold(0.0f64, |acc, l| acc.max(l.abs()));
        let fast = operator_norm(&m).unwrap();
        assert!((fast - oracle).abs() <= 1e-8 * oracle.max(1.0), "seed {seed}: {fast} vs {oracle}");
    }
}

#[test]
fn slice_norms_match_power_iteration() {
    let f = random_cubic(8, 77).unwrap();
    for i in 1..=8 {
        let s = slice(&f, i).unwrap();
        let spectrum = power_iteration_spectrum(&s.matrix, 55 + i as u64);
        let oracle = spectrum.iter().fold(0.0f64, |acc, l| acc.max(l.abs()));
        let fast = operator_norm(&s.matrix).unwrap();
        assert!((fast - oracle).abs() <= 1e-8 * oracle.max(1.0));
    }
}

// ---------------------------------------------------------------------------
// hat_seq: literal expectation vs Fourier-coefficient lookup
// ---------------------------------------------------------------------------

#[test]
fn hat_seq_equals_coefficient_of_parity_set() {
    let f = random_cubic(7, 5).unwrap();
    let mut rng = SplitMix64::new(99);
    for _ in 0..200 {
        let len = 1 + (rng.next_below(4)) as usize;
        let seq: Vec<usize> = (0..len).map(|_| 1 + rng.next_below(8) as usize).collect();
        let by_enum = f.hat_seq(&seq).unwrap();
        let by_lookup = f.coeff_mask(f.seq_parity_set(&seq).unwrap());
        assert_eq!(by_enum, by_lookup, "sequence {seq:?}");
    }
}

// ---------------------------------------------------------------------------
// Objective: cube average vs the Plancherel coefficient sum
// ---------------------------------------------------------------------------

fn plancherel_objective(phi: &MultilinearPoly, target: &MultilinearPoly, w: f64) -> f64 {
    let dot: f64 = phi.iter_coeffs().map(|(mask, c)| c * target.coeff_mask(mask)).sum();
    dot - w
}

#[test]
fn objective_matches_plancherel() {
    let wit = build_chsh_witness();
    let by_enum = objective(&wit).unwrap();
    let by_coeffs = plancherel_objective(&wit.phi, &wit.target, wit.w);
    assert!((by_enum - by_coeffs).abs() < 1e-14);

    for seed in [3u64, 8, 21] {
        let f = random_cubic(9, seed).unwrap();
        let qb = quartic_lower_bound(&f).unwrap();
        let by_enum = qb.objective;
        let by_coeffs = plancherel_objective(&qb.witness.phi, &qb.witness.target, qb.witness.w);
        assert!(
            (by_enum - by_coeffs).abs() <= 1e-12 * by_coeffs.abs().max(1.0),
            "seed {seed}: {by_enum} vs {by_coeffs}"
        );
    }
}

// ---------------------------------------------------------------------------
// Parseval at the top of the enumeration range
// ---------------------------------------------------------------------------

#[test]
fn parseval_exact_at_twenty_variables() {
    // 2^20-point enumeration of a C(20,3)-term sign form: the average of
    // integer squares over a power-of-two denominator is exact, so the
    // enumerated 2-norm equals the coefficient count without tolerance.
    let f = random_cubic(20, 1).unwrap();
    assert_eq!(f.two_norm_squared().unwrap(), 1140.0);
    assert_eq!(f.two_norm_squared_parseval(), 1140.0);
}

// ---------------------------------------------------------------------------
// Serialization surfaces for tuples and slices
// ---------------------------------------------------------------------------

#[test]
fn tuple_and_slice_json_shapes() {
    let f = random_cubic(4, 2).unwrap();
    let tuple = cbnorm::build_trilinear(&f).unwrap();
    let value: serde_json::Value = serde_json::from_str(&tuple.to_json()).unwrap();
    assert_eq!(value["d"], 10);
    assert_eq!(value["alphabet"], 4);
    assert_eq!(value["matrices"].as_array().unwrap().len(), 4);
    assert_eq!(value["matrices"][0].as_array().unwrap().len(), 100);
    assert_eq!(value["u"].as_array().unwrap().len(), 10);

    let s = slice(&f, 2).unwrap();
    let value: serde_json::Value = serde_json::from_str(&s.to_json()).unwrap();
    assert_eq!(value["index"], 2);
    assert_eq!(value["n"], 4);
    let flat = value["matrix"].as_array().unwrap();
    assert_eq!(flat.len(), 16);
    // row-major: entry (0,2) of slice 2 is c_{{1,2,3}}
    assert_eq!(flat[2].as_f64().unwrap(), f.coeff(&[1, 2, 3]).unwrap());
}

// ---------------------------------------------------------------------------
// Frozen endpoints of the generalized von Neumann inequality
// ---------------------------------------------------------------------------

#[test]
fn von_neumann_frozen_endpoints() {
    // Exact infinity norms of the Mobius AP forms at the two admissible
    // exact moduli, frozen from an independent enumeration.
    let r5 = check_von_neumann(5, &mobius(5)).unwrap();
    assert_eq!(r5.inf_norm, 13.0);
    assert!((r5.ratio - 0.75105908412872269).abs() < 1e-12);

    let r7 = check_von_neumann(7, &mobius(7)).unwrap();
    assert!(r7.inf_norm_exact);
    assert_eq!(r7.inf_norm, 23.0);
    assert!((r7.ratio - 0.64325935713850091).abs() < 1e-12);
    assert_eq!(r7.holds, Some(true));
}
