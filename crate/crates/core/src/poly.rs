//! Multilinear polynomials on the Boolean cube `{-1,1}^n`, represented by
//! their Fourier coefficients, plus the raw (arbitrary-exponent) polynomials
//! they are reduced from.
//!
//! Subsets of `[n]` are bitmasks with bit `i-1` standing for variable `i`.
//! A cube point is also a bitmask: bit `j` set means `x_{j+1} = -1`, so the
//! character value is `chi_S(x) = (-1)^{|S AND x|}`. Norms over the cube are
//! exact averages over all `2^n` points, guarded by an enumeration cap.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;
use crate::rng::SplitMix64;

/// Hard limit on the variable count (subset masks are 128-bit).
pub const MAX_VARS: usize = 128;

/// Default cap on exact cube enumeration: at most `2^24` point evaluations.
pub const DEFAULT_ENUM_CAP: usize = 24;

/// A subset of `[n]` as a bitmask; bit `i-1` stands for variable `i`.
pub type VarSet = u128;

/// Convert a sorted list of 1-based variable indices into a mask.
pub fn vars_to_mask(vars: &[usize], n: usize) -> Result<VarSet> {
    let mut mask: VarSet = 0;
    for &i in vars {
        if i == 0 || i > n {
            return Err(Error::IndexOutOfRange { index: i, max: n });
        }
        mask |= 1 << (i - 1);
    }
    Ok(mask)
}

/// Convert a mask back to sorted 1-based variable indices.
pub fn mask_to_vars(mask: VarSet) -> Vec<usize> {
    (0..MAX_VARS).filter(|i| mask >> i & 1 == 1).map(|i| i + 1).collect()
}

/// Real multilinear polynomial `f(x) = sum_S c_S prod_{i in S} x_i`.
///
/// Immutable after construction; all operations are pure.
#[derive(Debug, Clone, PartialEq)]
pub struct MultilinearPoly {
    n: usize,
    coeffs: BTreeMap<VarSet, f64>,
}

impl MultilinearPoly {
    /// The zero polynomial on `n` variables.
    pub fn zero(n: usize) -> Result<Self> {
        if n > MAX_VARS {
            return Err(Error::VariableLimit { n, max: MAX_VARS });
        }
        Ok(Self { n, coeffs: BTreeMap::new() })
    }

    /// Build from `(variables, coefficient)` pairs; variables are 1-based.
    /// Coefficients on the same subset accumulate; exact zeros are dropped.
    pub fn from_coeffs<'a, I>(n: usize, coeffs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a [usize], f64)>,
    {
        let mut poly = Self::zero(n)?;
        for (vars, c) in coeffs {
            let mask = vars_to_mask(vars, n)?;
            poly.add_to_coeff(mask, c);
        }
        Ok(poly)
    }

    pub(crate) fn add_to_coeff(&mut self, mask: VarSet, c: f64) {
        let entry = self.coeffs.entry(mask).or_insert(0.0);
        *entry += c;
        if *entry == 0.0 {
            self.coeffs.remove(&mask);
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Number of monomials with nonzero coefficient.
    pub fn support_len(&self) -> usize {
        self.coeffs.len()
    }

    /// Coefficient of the monomial on `vars` (1-based), zero if absent.
    pub fn coeff(&self, vars: &[usize]) -> Result<f64> {
        Ok(self.coeff_mask(vars_to_mask(vars, self.n)?))
    }

    pub fn coeff_mask(&self, mask: VarSet) -> f64 {
        self.coeffs.get(&mask).copied().unwrap_or(0.0)
    }

    /// Coefficients in ascending mask order.
    pub fn iter_coeffs(&self) -> impl Iterator<Item = (VarSet, f64)> + '_ {
        self.coeffs.iter().map(|(&m, &c)| (m, c))
    }

    /// Largest monomial degree (0 for the zero polynomial).
    pub fn degree(&self) -> usize {
        self.coeffs.keys().map(|m| m.count_ones() as usize).max().unwrap_or(0)
    }

    /// True when every monomial has degree exactly 3.
    pub fn is_cubic_form(&self) -> bool {
        self.offending_non_cubic().is_none()
    }

    /// First monomial (ascending mask order) whose degree is not 3.
    pub fn offending_non_cubic(&self) -> Option<VarSet> {
        self.coeffs.keys().find(|m| m.count_ones() != 3).copied()
    }

    /// Rescale every coefficient by `factor`.
    pub fn scale(&self, factor: f64) -> Self {
        let coeffs = if factor == 0.0 {
            BTreeMap::new()
        } else {
            self.coeffs.iter().map(|(&m, &c)| (m, factor * c)).collect()
        };
        Self { n: self.n, coeffs }
    }

    /// The `(n+1)`-variable polynomial `x_1 * f(x_2, ..., x_{n+1})`.
    ///
    /// Every subset is shifted up by one position and joined with the fresh
    /// leading variable.
    pub fn times_fresh_variable(&self) -> Result<Self> {
        if self.n + 1 > MAX_VARS {
            return Err(Error::VariableLimit { n: self.n + 1, max: MAX_VARS });
        }
        let coeffs = self.coeffs.iter().map(|(&m, &c)| ((m << 1) | 1, c)).collect();
        Ok(Self { n: self.n + 1, coeffs })
    }

    /// Evaluate at a sign vector (entries -1 or +1, length `n`).
    pub fn evaluate(&self, x: &[i8]) -> Result<f64> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, actual: x.len() });
        }
        let mut mask: VarSet = 0;
        for (j, &s) in x.iter().enumerate() {
            match s {
                1 => {}
                -1 => mask |= 1 << j,
                _ => return Err(Error::InvalidSign { position: j, value: s }),
            }
        }
        Ok(self.eval_mask(mask))
    }

    /// Evaluate at the cube point encoded by `mask` (bit `j` set means
    /// `x_{j+1} = -1`): the sum `sum_S c_S (-1)^{|S AND mask|}`.
    pub fn eval_mask(&self, mask: VarSet) -> f64 {
        let mut acc = 0.0;
        for (&m, &c) in &self.coeffs {
            if (m & mask).count_ones() & 1 == 0 {
                acc += c;
            } else {
                acc -= c;
            }
        }
        acc
    }

    /// Snapshot of the coefficient table for enumeration loops. Whenever a
    /// cube is small enough to enumerate, its masks fit in 64 bits, where
    /// the parity popcount is a single instruction.
    fn table(&self) -> Vec<(u64, f64)> {
        debug_assert!(self.n < 64);
        self.iter_coeffs().map(|(m, c)| (m as u64, c)).collect()
    }

    fn check_cap(&self, needed_bits: usize, cap: usize) -> Result<()> {
        if needed_bits > cap || needed_bits >= 64 {
            return Err(Error::CapExceeded { needed: needed_bits, cap: cap.min(63) });
        }
        Ok(())
    }

    /// The norm `||f||_p = (E_x |f(x)|^p)^{1/p}` for `p in [1, inf]`,
    /// by exact enumeration of all `2^n` cube points (default cap).
    pub fn p_norm(&self, p: f64) -> Result<f64> {
        self.p_norm_with_cap(p, DEFAULT_ENUM_CAP)
    }

    /// Like [`Self::p_norm`] with an explicit enumeration cap.
    pub fn p_norm_with_cap(&self, p: f64, cap: usize) -> Result<f64> {
        if !(p >= 1.0) {
            return Err(Error::InvalidExponent { p });
        }
        self.check_cap(self.n, cap)?;
        let table = self.table();
        let points = 1u64 << self.n;
        let scale = 1.0 / points as f64;
        if p == f64::INFINITY {
            return Ok(par::block_max(points, |i| eval_table64(&table, i).abs()));
        }
        let mean = if p == 1.0 {
            par::block_sum(points, |i| eval_table64(&table, i).abs()) * scale
        } else if p == 2.0 {
            let v = par::block_sum(points, |i| {
                let y = eval_table64(&table, i);
                y * y
            });
            return Ok((v * scale).sqrt());
        } else {
            par::block_sum(points, |i| eval_table64(&table, i).abs().powf(p)) * scale
        };
        Ok(if p == 1.0 { mean } else { mean.powf(1.0 / p) })
    }

    /// `||f||_2^2` by exact enumeration (no square root, so integer-valued
    /// results stay exact: the point sum is dyadic).
    pub fn two_norm_squared(&self) -> Result<f64> {
        self.two_norm_squared_with_cap(DEFAULT_ENUM_CAP)
    }

    pub fn two_norm_squared_with_cap(&self, cap: usize) -> Result<f64> {
        self.check_cap(self.n, cap)?;
        let table = self.table();
        let points = 1u64 << self.n;
        let v = par::block_sum(points, |i| {
            let y = eval_table64(&table, i);
            y * y
        });
        Ok(v / points as f64)
    }

    /// `||f||_2^2` as the coefficient sum `sum_S c_S^2`.
    ///
    /// This is the algebraic route; agreement with the enumeration route is
    /// the Parseval invariant covered by the property tests. It is the only
    /// 2-norm available above the enumeration cap.
    pub fn two_norm_squared_parseval(&self) -> f64 {
        self.coeffs.values().map(|c| c * c).sum()
    }

    /// Seeded lower bound on `||f||_inf` for instances above the cap:
    /// random restarts followed by greedy single-coordinate ascent.
    ///
    /// The returned value is a certified lower bound only, never an upper
    /// bound; callers must label it as such.
    pub fn inf_norm_lower_bound(&self, seed: u64) -> f64 {
        const RESTARTS: usize = 32;
        // this path serves instances too wide to enumerate, so keep the
        // full-width masks
        let table: Vec<(VarSet, f64)> = self.iter_coeffs().collect();
        let mut rng = SplitMix64::new(seed);
        let mut best = 0.0f64;
        for _ in 0..RESTARTS {
            let mut mask: VarSet = 0;
            for j in 0..self.n {
                if rng.next_u64() >> 63 == 1 {
                    mask |= 1 << j;
                }
            }
            let mut value = eval_table(&table, mask);
            loop {
                let mut improved = false;
                for j in 0..self.n {
                    let flipped = mask ^ (1 << j);
                    let v = eval_table(&table, flipped);
                    if v.abs() > value.abs() {
                        mask = flipped;
                        value = v;
                        improved = true;
                    }
                }
                if !improved {
                    break;
                }
            }
            best = best.max(value.abs());
        }
        best
    }

    /// The moment `phi_hat(i) = E_x f(x) prod_j x_{i_j}` for a sequence of
    /// indices in `[n+1]`, with the convention `x_{n+1} = 1`.
    ///
    /// Computed as the literal expectation over all `2^n` points (default
    /// cap applies). For a degree-`t` multilinear form and a length-`t`
    /// sequence this picks out `c_S` exactly when the sequence's odd-
    /// multiplicity index set is `S`.
    pub fn hat_seq(&self, indices: &[usize]) -> Result<f64> {
        self.check_cap(self.n, DEFAULT_ENUM_CAP)?;
        let chi = self.seq_parity_set(indices)? as u64;
        let table = self.table();
        let points = 1u64 << self.n;
        let v = par::block_sum(points, |i| {
            let f = eval_table64(&table, i);
            if (chi & i).count_ones() & 1 == 0 {
                f
            } else {
                -f
            }
        });
        Ok(v / points as f64)
    }

    /// Odd-multiplicity variable set of an index sequence over `[n+1]`,
    /// with the padding index `n+1` discarded (it stands for the constant 1).
    pub fn seq_parity_set(&self, indices: &[usize]) -> Result<VarSet> {
        let mut set: VarSet = 0;
        for &i in indices {
            if i == 0 || i > self.n + 1 {
                return Err(Error::IndexOutOfRange { index: i, max: self.n + 1 });
            }
            if i <= self.n {
                set ^= 1 << (i - 1);
            }
        }
        Ok(set)
    }
}

fn eval_table(table: &[(VarSet, f64)], mask: VarSet) -> f64 {
    let mut acc = 0.0;
    for &(m, c) in table {
        if (m & mask).count_ones() & 1 == 0 {
            acc += c;
        } else {
            acc -= c;
        }
    }
    acc
}

fn eval_table64(table: &[(u64, f64)], mask: u64) -> f64 {
    let mut acc = 0.0;
    for &(m, c) in table {
        // branchless sign flip: xor-ing the IEEE sign bit negates exactly
        let parity = ((m & mask).count_ones() as u64 & 1) << 63;
        acc += f64::from_bits(c.to_bits() ^ parity);
    }
    acc
}

/// Polynomial with arbitrary nonnegative integer exponents, kept only as
/// the input side of multilinear reduction.
#[derive(Debug, Clone, PartialEq)]
pub struct RawPoly {
    n: usize,
    terms: Vec<(Vec<u32>, f64)>,
}

impl RawPoly {
    /// Build from `(exponent vector, coefficient)` terms. Every exponent
    /// vector must have length `n` and appear at most once.
    pub fn new(n: usize, terms: Vec<(Vec<u32>, f64)>) -> Result<Self> {
        if n > MAX_VARS {
            return Err(Error::VariableLimit { n, max: MAX_VARS });
        }
        for (alpha, _) in &terms {
            if alpha.len() != n {
                return Err(Error::DimensionMismatch { expected: n, actual: alpha.len() });
            }
        }
        for (i, (alpha, _)) in terms.iter().enumerate() {
            if terms[..i].iter().any(|(a, _)| a == alpha) {
                return Err(Error::DuplicateTerm { alpha: alpha.clone() });
            }
        }
        Ok(Self { n, terms })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[(Vec<u32>, f64)] {
        &self.terms
    }

    /// Coefficient of the exponent vector `alpha`, zero if absent.
    pub fn coeff(&self, alpha: &[u32]) -> f64 {
        self.terms.iter().find(|(a, _)| a.as_slice() == alpha).map(|&(_, c)| c).unwrap_or(0.0)
    }

    pub fn evaluate(&self, x: &[i8]) -> Result<f64> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, actual: x.len() });
        }
        for (j, &s) in x.iter().enumerate() {
            if s != 1 && s != -1 {
                return Err(Error::InvalidSign { position: j, value: s });
            }
        }
        let mut acc = 0.0;
        for (alpha, c) in &self.terms {
            // prod x_i^{a_i} = (-1)^{sum of a_i over coordinates at -1}
            let odd = alpha.iter().zip(x).filter(|(a, &s)| s == -1 && **a % 2 == 1).count();
            acc += if odd % 2 == 0 { *c } else { -*c };
        }
        Ok(acc)
    }

    /// Reduce exponents modulo 2 (`x_i^2 = 1` on the cube) and merge terms.
    ///
    /// The result agrees with `self` at every cube point; terms whose merged
    /// coefficient cancels exactly disappear, so identities like
    /// `x1^2 x2^2 - x1^2 - x2^2 + 1` reduce to the zero polynomial.
    pub fn multilinear_reduce(&self) -> MultilinearPoly {
        let mut poly = MultilinearPoly::zero(self.n).expect("n already validated");
        for (alpha, c) in &self.terms {
            let mut mask: VarSet = 0;
            for (j, &a) in alpha.iter().enumerate() {
                if a % 2 == 1 {
                    mask |= 1 << j;
                }
            }
            poly.add_to_coeff(mask, *c);
        }
        poly
    }
}

// ---------------------------------------------------------------------------
// Character orthogonality
// ---------------------------------------------------------------------------

/// Result of the exhaustive character-orthogonality scan.
#[derive(Debug, Clone, Serialize)]
pub struct OrthogonalityReport {
    pub n: usize,
    pub pairs_checked: u64,
    /// Max of `|E_x chi_S(x) chi_T(x) - delta_{S,T}|` over all pairs,
    /// computed from exact integer point sums.
    pub max_deviation: f64,
}

/// Verify `E_x chi_S(x) chi_T(x) = delta_{S,T}` for every pair of subsets
/// of `[n]`, in exact integer arithmetic.
///
/// Pointwise `chi_S chi_T = chi_{S XOR T}` (a product of signs), so the scan
/// brute-forces the integer sum `sum_x chi_U(x)` for every subset `U` and
/// then visits all `4^n` pairs through their symmetric difference.
pub fn orthogonality_check(n: usize) -> Result<OrthogonalityReport> {
    const MAX_N: usize = 12;
    if n > MAX_N {
        return Err(Error::CapExceeded { needed: 2 * n, cap: 2 * MAX_N });
    }
    let points = 1u64 << n;
    let sums: Vec<i64> = par::ordered_map(points, |u| {
        let mut s = 0i64;
        for x in 0..points {
            if (u & x).count_ones() & 1 == 0 {
                s += 1;
            } else {
                s -= 1;
            }
        }
        s
    });
    let mut max_int_dev = 0i64;
    for s in 0..points {
        for t in 0..points {
            let u = (s ^ t) as usize;
            let expected = if s == t { points as i64 } else { 0 };
            max_int_dev = max_int_dev.max((sums[u] - expected).abs());
        }
    }
    Ok(OrthogonalityReport {
        n,
        pairs_checked: points * points,
        max_deviation: max_int_dev as f64 / points as f64,
    })
}

// ---------------------------------------------------------------------------
// JSON wire formats
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct CoeffJson {
    #[serde(rename = "S")]
    vars: Vec<usize>,
    c: f64,
}

#[derive(Serialize, Deserialize)]
struct PolyJson {
    n: usize,
    coeffs: Vec<CoeffJson>,
}

#[derive(Serialize, Deserialize)]
struct RawTermJson {
    alpha: Vec<u32>,
    c: f64,
}

#[derive(Serialize, Deserialize)]
struct RawPolyJson {
    n: usize,
    terms: Vec<RawTermJson>,
}

impl MultilinearPoly {
    /// Canonical JSON: `{"n": ..., "coeffs": [{"S": [...], "c": ...}]}` with
    /// subsets in ascending mask order and floats at 17 significant digits.
    pub fn to_json(&self) -> String {
        let mut out = String::new();
        self.write_json(&mut out);
        out
    }

    pub(crate) fn write_json(&self, out: &mut String) {
        use std::fmt::Write;
        write!(out, "{{\"n\":{},\"coeffs\":[", self.n).unwrap();
        for (k, (mask, c)) in self.iter_coeffs().enumerate() {
            if k > 0 {
                out.push(',');
            }
            out.push_str("{\"S\":[");
            for (j, v) in mask_to_vars(mask).iter().enumerate() {
                if j > 0 {
                    out.push(',');
                }
                write!(out, "{v}").unwrap();
            }
            write!(out, "],\"c\":{}}}", crate::certificate::float17(c)).unwrap();
        }
        out.push_str("]}");
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let parsed: PolyJson = serde_json::from_str(text)?;
        Self::from_poly_json(parsed)
    }

    fn from_poly_json(parsed: PolyJson) -> Result<Self> {
        let mut poly = Self::zero(parsed.n)?;
        for entry in parsed.coeffs {
            let mask = vars_to_mask(&entry.vars, parsed.n)?;
            poly.add_to_coeff(mask, entry.c);
        }
        Ok(poly)
    }

    pub(crate) fn from_json_value(value: serde_json::Value) -> Result<Self> {
        let parsed: PolyJson = serde_json::from_value(value)?;
        Self::from_poly_json(parsed)
    }
}

impl RawPoly {
    pub fn to_json(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        write!(out, "{{\"n\":{},\"terms\":[", self.n).unwrap();
        for (k, (alpha, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            out.push_str("{\"alpha\":[");
            for (j, a) in alpha.iter().enumerate() {
                if j > 0 {
                    out.push(',');
                }
                write!(out, "{a}").unwrap();
            }
            write!(out, "],\"c\":{}}}", crate::certificate::float17(*c)).unwrap();
        }
        out.push_str("]}");
        out
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let parsed: RawPolyJson = serde_json::from_str(text)?;
        Self::new(parsed.n, parsed.terms.into_iter().map(|t| (t.alpha, t.c)).collect())
    }
}
