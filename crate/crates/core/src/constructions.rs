//! The two counterexample families — random sign cubic forms and
//! arithmetic-progression forms with Mobius coefficients — together with the
//! Gowers-norm machinery that validates the explicit family.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;
use crate::poly::{MultilinearPoly, DEFAULT_ENUM_CAP};
use crate::rng::SplitMix64;
use crate::slices::delta;

/// A real-valued function on `Z_n`, stored as its value table on
/// `{0, 1, ..., n-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZnFunction {
    modulus: usize,
    values: Vec<f64>,
}

impl ZnFunction {
    pub fn new(values: Vec<f64>) -> Self {
        Self { modulus: values.len(), values }
    }

    pub fn constant(n: usize, value: f64) -> Self {
        Self::new(vec![value; n])
    }

    /// Indicator of `{0}` on `Z_n`.
    pub fn indicator_of_zero(n: usize) -> Self {
        let mut values = vec![0.0; n];
        values[0] = 1.0;
        Self::new(values)
    }

    pub fn modulus(&self) -> usize {
        self.modulus
    }

    /// Value at `a` reduced modulo `n`.
    pub fn get(&self, a: usize) -> f64 {
        self.values[a % self.modulus]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// True when every value lies in `[-1, 1]`.
    pub fn is_bounded(&self) -> bool {
        self.values.iter().all(|v| v.abs() <= 1.0)
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self::new(self.values.iter().map(|v| factor * v).collect())
    }

    /// JSON wire format: `{"n": ..., "values": [...]}`.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&ZnJson { n: self.modulus, values: self.values.clone() })
            .expect("plain struct")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let parsed: ZnJson = serde_json::from_str(text)?;
        if parsed.values.len() != parsed.n {
            return Err(Error::ModulusMismatch { expected: parsed.n, actual: parsed.values.len() });
        }
        Ok(Self::new(parsed.values))
    }
}

#[derive(Serialize, Deserialize)]
struct ZnJson {
    n: usize,
    values: Vec<f64>,
}

/// Mobius function table on `{0, ..., limit}` by linear sieve, with the
/// convention `mu(0) = 0`.
pub fn mobius_sieve(limit: usize) -> Vec<i8> {
    let mut mu = vec![1i8; limit + 1];
    mu[0] = 0;
    let mut is_composite = vec![false; limit + 1];
    let mut primes = Vec::new();
    for i in 2..=limit {
        if !is_composite[i] {
            primes.push(i);
            mu[i] = -1;
        }
        for &p in &primes {
            let Some(ip) = i.checked_mul(p).filter(|&ip| ip <= limit) else {
                break;
            };
            is_composite[ip] = true;
            if i % p == 0 {
                mu[ip] = 0;
                break;
            }
            mu[ip] = -mu[i];
        }
    }
    mu
}

/// The Mobius function restricted to `{0, ..., n-1}`, identified with `Z_n`:
/// `+1` on square-free integers with an even number of prime factors, `-1`
/// with an odd number, `0` otherwise, and `0` at the origin.
pub fn mobius(n: usize) -> ZnFunction {
    assert!(n >= 1, "modulus must be positive");
    let mu = mobius_sieve(n.saturating_sub(1));
    ZnFunction::new((0..n).map(|a| f64::from(mu[a])).collect())
}

/// Exact count of square-free integers in `{1, ..., n}`, by marking
/// multiples of squares (independent of the Mobius sieve; the two agree by
/// `Q(n) = sum mu(a)^2`, which the tests cross-check).
pub fn squarefree_count(n: usize) -> u64 {
    let mut squarefree = vec![true; n + 1];
    let mut d = 2usize;
    while d * d <= n {
        let mut m = d * d;
        while m <= n {
            squarefree[m] = false;
            m += d * d;
        }
        d += 1;
    }
    (1..=n).filter(|&a| squarefree[a]).count() as u64
}

/// Random multilinear cubic form: every coefficient `c_S`, `|S| = 3`, is an
/// independent uniform sign from the splitmix64 stream, drawn in ascending
/// lexicographic order of `(i, j, k)`. Deterministic in the seed.
pub fn random_cubic(n: usize, seed: u64) -> Result<MultilinearPoly> {
    if !(3..=64).contains(&n) {
        return Err(Error::VariableLimit { n, max: 64 });
    }
    let mut rng = SplitMix64::new(seed);
    let mut poly = MultilinearPoly::zero(n)?;
    for i in 1..=n {
        for j in i + 1..=n {
            for k in j + 1..=n {
                let mask = (1u128 << (i - 1)) | (1 << (j - 1)) | (1 << (k - 1));
                poly.add_to_coeff(mask, rng.next_sign());
            }
        }
    }
    Ok(poly)
}

// ---------------------------------------------------------------------------
// Arithmetic-progression forms
// ---------------------------------------------------------------------------

/// Fixed bijection between the variable grid `[3] x Z_n` and `{1, ..., 3n}`:
/// `(i, a) -> (i-1) n + a + 1`. Recorded so certificates are reproducible.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ApFormIndex {
    pub n: usize,
}

impl ApFormIndex {
    pub fn var(&self, block: usize, residue: usize) -> usize {
        debug_assert!((1..=3).contains(&block));
        (block - 1) * self.n + residue % self.n + 1
    }

    pub fn block_residue(&self, var: usize) -> (usize, usize) {
        debug_assert!((1..=3 * self.n).contains(&var));
        ((var - 1) / self.n + 1, (var - 1) % self.n)
    }
}

/// The 3n-variable cubic form
/// `f(x) = sum_{a,b} x(1,a) x(2,a+b) x(3,a+2b) f0(a+3b)`.
#[derive(Debug, Clone)]
pub struct ApForm {
    pub n: usize,
    pub poly: MultilinearPoly,
    pub index: ApFormIndex,
}

impl ApForm {
    /// The hypothesis of the von Neumann bound; callers should warn (not
    /// fail) when it does not hold.
    pub fn coprime_to_six(&self) -> bool {
        coprime_to_six(self.n)
    }
}

pub fn coprime_to_six(n: usize) -> bool {
    gcd(n, 6) == 1
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Build the arithmetic-progression form for `f0` on `Z_n`.
///
/// Each pair `(a, b)` contributes one monomial with exactly one variable per
/// block, with coefficient `f0(a + 3b)`; distinct pairs give distinct
/// monomials, so Parseval gives `||f||_2^2 = n * sum_a f0(a)^2`.
pub fn ap_form(n: usize, f0: &ZnFunction) -> Result<ApForm> {
    if n < 2 {
        return Err(Error::VariableLimit { n, max: 2 });
    }
    if f0.modulus() != n {
        return Err(Error::ModulusMismatch { expected: n, actual: f0.modulus() });
    }
    let index = ApFormIndex { n };
    let mut poly = MultilinearPoly::zero(3 * n)?;
    for a in 0..n {
        for b in 0..n {
            let c = f0.get(a + 3 * b);
            if c != 0.0 {
                let mask = (1u128 << (index.var(1, a) - 1))
                    | (1 << (index.var(2, a + b) - 1))
                    | (1 << (index.var(3, a + 2 * b) - 1));
                poly.add_to_coeff(mask, c);
            }
        }
    }
    Ok(ApForm { n, poly, index })
}

// ---------------------------------------------------------------------------
// Gowers uniformity
// ---------------------------------------------------------------------------

/// Cap on the U^3 modulus; the certified inequality needs the exact value,
/// so there is no sampling fallback above it.
pub const GOWERS_CAP: usize = 512;

/// The Gowers 3-uniformity norm
/// `||g||_{U^3} = (E_{a,b,c,d} D_b D_c D_d g(a))^{1/8}` with multiplicative
/// derivatives `D_b g(a) = g(a+b) g(a)`, computed exactly.
///
/// The quadruple average is regrouped, without approximation, as
/// `n^{-4} sum_b sum_t (sum_a h_b(a) h_b(a+t))^2` with `h_b = D_b g`:
/// averaging over `c, d` of `D_c D_d h_b(a)` is the sum of squared
/// autocorrelations of `h_b`. This is `O(n^3)`, makes the inner average a
/// manifest sum of squares (hence nonnegative), and is checked against the
/// literal `O(n^4)` quadruple loop by the oracle tests.
pub fn gowers_u3(g: &ZnFunction) -> Result<f64> {
    let n = g.modulus();
    if n > GOWERS_CAP {
        return Err(Error::CapExceeded { needed: n, cap: GOWERS_CAP });
    }
    if n == 0 {
        return Err(Error::VariableLimit { n: 0, max: GOWERS_CAP });
    }
    let vals = g.values();
    let partials = par::ordered_map(n as u64, |b| {
        let b = b as usize;
        let h: Vec<f64> = (0..n).map(|a| vals[(a + b) % n] * vals[a]).collect();
        let mut sum = 0.0;
        for t in 0..n {
            let mut ac = 0.0;
            for a in 0..n {
                ac += h[a] * h[(a + t) % n];
            }
            sum += ac * ac;
        }
        sum
    });
    let total: f64 = partials.into_iter().sum();
    let avg = total / (n as f64).powi(4);
    debug_assert!(avg >= -1e-12, "inner U^3 average must be nonnegative, got {avg}");
    Ok(avg.max(0.0).powf(0.125))
}

// ---------------------------------------------------------------------------
// Generalized von Neumann check
// ---------------------------------------------------------------------------

const VON_NEUMANN_TOL: f64 = 1e-9;
const VON_NEUMANN_SAMPLE_SEED: u64 = 0xAF03;

/// Measured sides of the inequality `||f||_inf <= n^2 ||f0||_{U^3}`.
#[derive(Debug, Clone, Serialize)]
pub struct VonNeumannReport {
    pub n: usize,
    pub gowers_u3: f64,
    /// Right-hand side `n^2 ||f0||_{U^3}`.
    pub bound: f64,
    pub inf_norm: f64,
    /// Whether `inf_norm` is the exact maximum or a sampled lower bound.
    pub inf_norm_exact: bool,
    pub ratio: f64,
    /// `Some(true/false)` when the comparison is decisive: exact mode
    /// decides both ways, sampled mode can only refute.
    pub holds: Option<bool>,
}

/// Compare `||f||_inf` of the AP form against `n^2 ||f0||_{U^3}`.
///
/// Requires `gcd(n, 6) = 1` (the bound's hypothesis). Exact when the
/// 3n-variable cube fits the enumeration cap (n <= 8, so n in {5, 7} among
/// admissible moduli); otherwise the infinity norm is a sampled lower bound
/// and the check can only refute, not confirm.
pub fn check_von_neumann(n: usize, f0: &ZnFunction) -> Result<VonNeumannReport> {
    if !coprime_to_six(n) {
        return Err(Error::NotCoprime { n });
    }
    let form = ap_form(n, f0)?;
    let u3 = gowers_u3(f0)?;
    let bound = (n * n) as f64 * u3;
    let exact = 3 * n <= DEFAULT_ENUM_CAP;
    let inf_norm = if exact {
        form.poly.p_norm(f64::INFINITY)?
    } else {
        form.poly.inf_norm_lower_bound(VON_NEUMANN_SAMPLE_SEED ^ n as u64)
    };
    let ratio = if bound == 0.0 {
        if inf_norm == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        inf_norm / bound
    };
    let holds = if exact {
        Some(ratio <= 1.0 + VON_NEUMANN_TOL)
    } else if ratio > 1.0 + VON_NEUMANN_TOL {
        Some(false) // the lower bound alone already exceeds the bound
    } else {
        None
    };
    Ok(VonNeumannReport { n, gowers_u3: u3, bound, inf_norm, inf_norm_exact: exact, ratio, holds })
}

/// The completely-bounded lower bound `||f||_2^2 / Delta(f)` of a nonzero
/// cubic form.
///
/// The 2-norm is taken through Parseval (`sum_S c_S^2`), which stays exact
/// above the enumeration cap; agreement with the cube average is covered by
/// the Parseval property tests.
pub fn counterexample_ratio(f: &MultilinearPoly) -> Result<f64> {
    let d = delta(f)?;
    if d == 0.0 {
        return Err(Error::ZeroDelta);
    }
    Ok(f.two_norm_squared_parseval() / d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::slices::{all_slices, operator_norm};

    #[test]
    fn mobius_small_values() {
        let f0 = mobius(13);
        assert_eq!(f0.get(0), 0.0);
        assert_eq!(f0.get(1), 1.0);
        assert_eq!(f0.get(4), 0.0);
        assert_eq!(f0.get(6), 1.0);
        let expect = [0.0, 1.0, -1.0, -1.0, 0.0, -1.0, 1.0, -1.0, 0.0, 0.0, 1.0, -1.0, 0.0];
        assert_eq!(f0.values(), &expect);
    }

    #[test]
    fn squarefree_counts() {
        assert_eq!(squarefree_count(1), 1);
        assert_eq!(squarefree_count(10), 7);
        assert_eq!(squarefree_count(25), 16);
        // within 2 sqrt(n) of (6/pi^2) n
        let n = 10_000;
        let count = squarefree_count(n) as f64;
        let asymptotic = 6.0 / (std::f64::consts::PI.powi(2)) * n as f64;
        assert!((count - asymptotic).abs() <= 2.0 * (n as f64).sqrt());
    }

    #[test]
    fn squarefree_count_matches_mobius_squares() {
        // Two independent sieves: multiples-of-squares vs sum of mu^2.
        for n in [1usize, 2, 10, 25, 997, 5000] {
            let mu = mobius_sieve(n);
            let by_mu: u64 = (1..=n).map(|a| (mu[a] * mu[a]) as u64).sum();
            assert_eq!(squarefree_count(n), by_mu, "n = {n}");
        }
    }

    #[test]
    fn random_cubic_is_deterministic_and_signed() {
        let f1 = random_cubic(10, 1).unwrap();
        let f2 = random_cubic(10, 1).unwrap();
        assert_eq!(f1, f2);
        assert_eq!(f1.support_len(), 120);
        assert!(f1.iter_coeffs().all(|(_, c)| c == 1.0 || c == -1.0));
        assert_eq!(f1.two_norm_squared_parseval(), 120.0);
        assert!(random_cubic(2, 1).is_err());
        assert!(random_cubic(65, 1).is_err());
    }

    #[test]
    fn random_cubic_median_delta_below_three_sqrt_n() {
        // Desk-scale proxy for slice-norm concentration: the median Delta
        // over 50 seeds at n = 12 sits well under 3 sqrt(n).
        let n = 12usize;
        let mut deltas: Vec<f64> =
            (1..=50u64).map(|seed| delta(&random_cubic(n, seed).unwrap()).unwrap()).collect();
        deltas.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = 0.5 * (deltas[24] + deltas[25]);
        assert!(median <= 3.0 * (n as f64).sqrt(), "median Delta = {median}");
    }

    #[test]
    fn random_cubic_inf_norm_concentration() {
        // Desk-scale proxy for sup-norm concentration: over 30 seeds at
        // each n, no instance exceeds 5 n^2.
        for n in [8usize, 10, 12] {
            let mut worst = 0.0f64;
            for seed in 1..=30u64 {
                let f = random_cubic(n, seed).unwrap();
                worst = worst.max(f.p_norm(f64::INFINITY).unwrap());
            }
            assert!(worst <= 5.0 * (n * n) as f64, "n = {n}: max inf norm {worst}");
        }
    }

    #[test]
    fn random_cubic_pinned_stream() {
        // First coefficients for seed 1, in lexicographic triple order;
        // frozen against the reference splitmix64 stream.
        let f = random_cubic(8, 1).unwrap();
        assert_eq!(f.coeff(&[1, 2, 3]).unwrap(), -1.0);
        assert_eq!(f.coeff(&[1, 2, 4]).unwrap(), -1.0);
        assert_eq!(f.coeff(&[1, 2, 5]).unwrap(), -1.0);
        assert_eq!(f.coeff(&[1, 2, 6]).unwrap(), 1.0);
        assert_eq!(f.coeff(&[1, 2, 7]).unwrap(), 1.0);
        assert_eq!(f.coeff(&[1, 2, 8]).unwrap(), -1.0);
    }

    #[test]
    fn ap_form_structure() {
        let n = 5;
        let form = ap_form(n, &mobius(n)).unwrap();
        assert_eq!(form.poly.n(), 15);
        // mu is nonzero at 1, 2, 3 within {0..4}; n pairs (a,b) per residue.
        assert_eq!(form.poly.support_len(), 15);
        assert_eq!(form.poly.two_norm_squared_parseval(), 15.0);
        assert!(form.coprime_to_six());

        // Coefficient of x(1,a) x(2,a+b) x(3,a+2b) is f0(a+3b).
        let idx = form.index;
        let (a, b) = (2usize, 4usize);
        let mut vars = [idx.var(1, a), idx.var(2, a + b), idx.var(3, a + 2 * b)];
        vars.sort_unstable();
        let expected = mobius(n).get(a + 3 * b);
        assert_eq!(form.poly.coeff(&vars).unwrap(), expected);
    }

    #[test]
    fn ap_form_zero_function_gives_zero_form() {
        let form = ap_form(4, &ZnFunction::constant(4, 0.0)).unwrap();
        assert!(form.poly.is_zero());
        assert!(!form.coprime_to_six());
    }

    #[test]
    fn ap_form_rejects_modulus_mismatch() {
        assert!(matches!(
            ap_form(5, &mobius(6)),
            Err(Error::ModulusMismatch { expected: 5, actual: 6 })
        ));
    }

    #[test]
    fn ap_slices_are_sub_permutation_matrices() {
        // Each slice has at most one nonzero per row and column, so its
        // operator norm is exactly max |f0|.
        let n = 5;
        let form = ap_form(n, &mobius(n)).unwrap();
        let max_f0 = mobius(n).values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for s in all_slices(&form.poly).unwrap() {
            for r in 0..15 {
                assert!(s.matrix.row(r).iter().filter(|&&x| x != 0.0).count() <= 1);
                assert!(s.matrix.column(r).iter().filter(|&&x| x != 0.0).count() <= 1);
            }
            let norm = operator_norm(&s.matrix).unwrap();
            let max_entry = s.matrix.amax();
            assert!((norm - max_entry).abs() <= 1e-10);
            assert!(norm <= max_f0 + 1e-12);
        }
        assert!(delta(&form.poly).unwrap() <= 1.0 + 1e-12);
    }

    #[test]
    fn ap_slice_block_values() {
        // The (1,a) slice carries f0(a+3b) at block-(2,3) coordinate
        // (a+b, a+2b).
        let n = 5;
        let f0 = mobius(n);
        let form = ap_form(n, &f0).unwrap();
        let a = 3usize;
        let s = crate::slices::slice(&form.poly, form.index.var(1, a)).unwrap();
        for b in 0..n {
            let row = form.index.var(2, a + b) - 1;
            let col = form.index.var(3, a + 2 * b) - 1;
            assert_eq!(s.matrix[(row, col)], f0.get(a + 3 * b));
        }
    }

    #[test]
    fn gowers_constants() {
        assert_eq!(gowers_u3(&ZnFunction::constant(9, 1.0)).unwrap(), 1.0);
        assert_eq!(gowers_u3(&ZnFunction::constant(9, 0.0)).unwrap(), 0.0);
        assert!(gowers_u3(&ZnFunction::constant(513, 1.0)).is_err());
    }

    #[test]
    fn gowers_indicator_is_inverse_sqrt() {
        for n in [5usize, 7, 11] {
            let g = ZnFunction::indicator_of_zero(n);
            let u3 = gowers_u3(&g).unwrap();
            assert!((u3 - (n as f64).powf(-0.5)).abs() < 1e-14, "n = {n}");
        }
    }

    #[test]
    fn gowers_mobius_frozen_values() {
        // Frozen from an independent quadruple-loop computation.
        let u5 = gowers_u3(&mobius(5)).unwrap();
        assert!((u5 - 0.69235564949358652).abs() < 1e-13, "{u5}");
        let u7 = gowers_u3(&mobius(7)).unwrap();
        assert!((u7 - 0.72970217983315933).abs() < 1e-13, "{u7}");
    }

    #[test]
    fn gowers_scaling() {
        let g = mobius(11);
        let u = gowers_u3(&g).unwrap();
        let u3 = gowers_u3(&g.scale(-3.0)).unwrap();
        assert!((u3 - 3.0 * u).abs() < 1e-12);
    }

    #[test]
    fn von_neumann_exact_small_moduli() {
        let r5 = check_von_neumann(5, &mobius(5)).unwrap();
        assert!(r5.inf_norm_exact);
        assert_eq!(r5.inf_norm, 13.0);
        assert_eq!(r5.holds, Some(true));
        assert!((r5.ratio - 0.75105908412872269).abs() < 1e-12, "{}", r5.ratio);

        // All-ones saturates: ||f||_inf = n^2, U^3 = 1, ratio exactly 1.
        let ones = check_von_neumann(5, &ZnFunction::constant(5, 1.0)).unwrap();
        assert_eq!(ones.inf_norm, 25.0);
        assert_eq!(ones.gowers_u3, 1.0);
        assert_eq!(ones.ratio, 1.0);
        assert_eq!(ones.holds, Some(true));
    }

    #[test]
    fn von_neumann_rejects_non_coprime() {
        assert!(matches!(check_von_neumann(6, &mobius(6)), Err(Error::NotCoprime { n: 6 })));
    }

    #[test]
    fn von_neumann_sampled_above_cap() {
        let r = check_von_neumann(11, &mobius(11)).unwrap();
        assert!(!r.inf_norm_exact);
        assert!(r.holds != Some(false), "sampled lower bound exceeded the bound: {r:?}");
    }

    #[test]
    fn ratio_examples() {
        let mono = MultilinearPoly::from_coeffs(3, [(&[1usize, 2, 3][..], 1.0)]).unwrap();
        assert_eq!(counterexample_ratio(&mono).unwrap(), 1.0);

        let form = ap_form(5, &mobius(5)).unwrap();
        let r = counterexample_ratio(&form.poly).unwrap();
        assert!(r >= 15.0 - 1e-9, "{r}");

        let f = random_cubic(10, 2).unwrap();
        let expected = 120.0 / delta(&f).unwrap();
        assert!((counterexample_ratio(&f).unwrap() - expected).abs() < 1e-12);

        assert!(counterexample_ratio(&MultilinearPoly::zero(3).unwrap()).is_err());
    }
}
