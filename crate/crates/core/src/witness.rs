//! Feasible points of the query-degree SDP and their exhaustive
//! verification.
//!
//! A witness for a target `f` consists of a correlator `phi` with
//! `||phi||_1 = 1`, a weight `w > 0`, and per-position contraction-valued
//! maps `A_1, ..., A_t` over the alphabet `[m]`, `m = n+1` (index `m` is the
//! padding variable fixed to 1), together with unit vectors `u, v` such that
//!
//! ```text
//! phi_hat(i) / w = <u, A_1(i_1) ... A_t(i_t) v>   for every i in [m]^t.
//! ```
//!
//! The verified objective `E[phi f] - w` exceeding some `epsilon >= 0` rules
//! out `floor(t/2)`-query algorithms with additive error `epsilon`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::certificate::{CertKind, Certificate, Provenance};
use crate::error::{Error, Result};
use crate::par;
use crate::poly::{MultilinearPoly, DEFAULT_ENUM_CAP};
use crate::report::{CheckReport, PropertyCheck};
use crate::slices::{delta, operator_norm};
use crate::varopoulos::{build_chsh, build_trilinear, chsh_form, CommutingTuple};

/// Hard cap on the exhaustively scanned sequence space `m^t`.
pub const SEQUENCE_CAP: u64 = 10_000_000;

/// Tolerance on the `m^t` moment equations.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

/// Tolerance on the correlator normalization `||phi||_1 = 1`.
pub const PHI_NORMALIZATION_TOL: f64 = 1e-9;

/// A contraction-valued map on the alphabet `{1, ..., m}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContractionMap {
    mats: Vec<DMatrix<f64>>,
}

impl ContractionMap {
    pub fn new(mats: Vec<DMatrix<f64>>) -> Self {
        Self { mats }
    }

    pub fn len(&self) -> usize {
        self.mats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mats.is_empty()
    }

    pub fn matrix(&self, i: usize) -> Result<&DMatrix<f64>> {
        self.mats
            .get(i.wrapping_sub(1))
            .ok_or(Error::IndexOutOfRange { index: i, max: self.mats.len() })
    }
}

/// A feasible point of the degree-`t` program for `target`.
#[derive(Debug, Clone, PartialEq)]
pub struct SdpWitness {
    pub target: MultilinearPoly,
    pub phi: MultilinearPoly,
    pub w: f64,
    /// One contraction map per position; the built-in witnesses reuse a
    /// single map, but the verifier never assumes that.
    pub family: Vec<ContractionMap>,
    pub u: DVector<f64>,
    pub v: DVector<f64>,
}

impl SdpWitness {
    pub fn new(
        target: MultilinearPoly,
        phi: MultilinearPoly,
        w: f64,
        family: Vec<ContractionMap>,
        u: DVector<f64>,
        v: DVector<f64>,
    ) -> Result<Self> {
        if target.n() != phi.n() {
            return Err(Error::DimensionMismatch { expected: phi.n(), actual: target.n() });
        }
        if family.is_empty() {
            return Err(Error::DimensionMismatch { expected: 1, actual: 0 });
        }
        let m = phi.n() + 1;
        let d = u.len();
        for map in &family {
            if map.len() != m {
                return Err(Error::AlphabetMismatch { tuple_vars: map.len(), poly_vars: phi.n() });
            }
            for mat in &map.mats {
                if mat.nrows() != d || mat.ncols() != d {
                    return Err(Error::DimensionMismatch { expected: d, actual: mat.nrows() });
                }
            }
        }
        if v.len() != d {
            return Err(Error::DimensionMismatch { expected: d, actual: v.len() });
        }
        if !(w > 0.0) {
            return Err(Error::BadCertificate(format!("weight w = {w} must be positive")));
        }
        Ok(Self { target, phi, w, family, u, v })
    }

    /// Number of positions `t`.
    pub fn t(&self) -> usize {
        self.family.len()
    }

    /// Alphabet size `m = n + 1` (the last index is the padding variable).
    pub fn alphabet_len(&self) -> usize {
        self.phi.n() + 1
    }

    pub fn dim(&self) -> usize {
        self.u.len()
    }

    /// The witness moment `<u, A_1(i_1) ... A_t(i_t) v>`.
    pub fn moment(&self, seq: &[usize]) -> Result<f64> {
        if seq.len() != self.t() {
            return Err(Error::DimensionMismatch { expected: self.t(), actual: seq.len() });
        }
        let mut vec = self.v.clone();
        for (pos, &i) in seq.iter().enumerate().rev() {
            vec = self.family[pos].matrix(i)? * vec;
        }
        Ok(self.u.dot(&vec))
    }

    /// The same witness with the target rescaled by `c` (feasibility does
    /// not involve the target, so the witness stays feasible).
    pub fn with_scaled_target(&self, c: f64) -> Self {
        let mut scaled = self.clone();
        scaled.target = self.target.scale(c);
        scaled
    }
}

/// One failed moment equation.
#[derive(Debug, Clone, Serialize)]
pub struct MomentMismatch {
    pub sequence: Vec<usize>,
    pub expected: f64,
    pub actual: f64,
}

/// Outcome of exhaustive membership verification.
#[derive(Debug, Clone, Serialize)]
pub struct MembershipReport {
    pub checks: Vec<PropertyCheck>,
    pub sequences_checked: u64,
    /// Largest `|phi_hat(i)/w - <u, A...v>|` over the scan.
    pub max_moment_violation: f64,
    /// Lexicographically first failing sequence, if any.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_failure: Option<MomentMismatch>,
}

impl MembershipReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn as_check_report(&self) -> CheckReport {
        CheckReport::new(self.checks.clone())
    }
}

fn contraction_norm(m: &DMatrix<f64>) -> f64 {
    let gram = m.transpose() * m;
    let sym = (&gram + gram.transpose()) * 0.5;
    operator_norm(&sym).expect("Gram matrix is symmetric").max(0.0).sqrt()
}

/// Exhaustively verify a witness: unit vectors, every contraction norm, and
/// all `m^t` moment equations `phi_hat(i)/w = <u, A_1(i_1)...A_t(i_t) v>`.
///
/// `phi_hat(i)` is evaluated through the parity-set identity (the Fourier
/// coefficient on the odd-multiplicity index set, padding dropped), which
/// the orthogonality and `hat_seq` tests pin against literal enumeration.
/// The scan parallelizes over the leading index; failures are folded in
/// order so the reported sequence is the lexicographically first one.
pub fn verify_membership(wit: &SdpWitness) -> Result<MembershipReport> {
    let m = wit.alphabet_len();
    let t = wit.t();
    let space = (m as u128).pow(t as u32);
    if space > SEQUENCE_CAP as u128 {
        return Err(Error::SequenceSpaceTooLarge { size: space, cap: SEQUENCE_CAP });
    }

    let mut checks = Vec::new();
    let unit_dev = (wit.u.norm() - 1.0).abs().max((wit.v.norm() - 1.0).abs());
    checks.push(PropertyCheck::new("unit_vectors", unit_dev, 1e-12));

    let mut norm_excess = 0.0f64;
    let mut norm_worst = None;
    for (pos, map) in wit.family.iter().enumerate() {
        for i in 1..=m {
            let excess = (contraction_norm(map.matrix(i)?) - 1.0).max(0.0);
            if excess > norm_excess {
                norm_excess = excess;
                norm_worst = Some(format!("position {} index {}", pos + 1, i));
            }
        }
    }
    let mut contraction = PropertyCheck::new("contraction_norms", norm_excess, 1e-12);
    if let Some(worst) = norm_worst.filter(|_| !contraction.pass) {
        contraction = contraction.with_worst(worst);
    }
    checks.push(contraction);

    // Per-chunk scan over the trailing t-1 digits. Left partial products
    // ys[j] = (A_1(i_1) ... A_j(i_j))^T u are kept on a stack, so bumping
    // the fastest digit costs a single transposed matrix-vector product.
    let scan_chunk = |lead: usize| -> (f64, Option<MomentMismatch>, u64) {
        let mut digits = vec![1usize; t];
        digits[0] = lead;
        let mut ys: Vec<DVector<f64>> = Vec::with_capacity(t + 1);
        ys.push(wit.u.clone());
        for j in 0..t {
            let next = wit.family[j].matrix(digits[j]).expect("validated").tr_mul(&ys[j]);
            ys.push(next);
        }
        let mut max_violation = 0.0f64;
        let mut first_failure: Option<MomentMismatch> = None;
        let mut checked = 0u64;
        loop {
            let actual = ys[t].dot(&wit.v);
            let parity = wit.phi.seq_parity_set(&digits).expect("validated digits");
            let expected = wit.phi.coeff_mask(parity) / wit.w;
            let violation = (actual - expected).abs();
            checked += 1;
            if violation > max_violation {
                max_violation = violation;
            }
            if violation > MEMBERSHIP_TOL && first_failure.is_none() {
                first_failure = Some(MomentMismatch { sequence: digits.clone(), expected, actual });
            }
            // advance the odometer over 0-based positions t-1, ..., 1
            let mut bumped = t; // 0-based index of the leftmost changed digit
            loop {
                if bumped <= 1 {
                    return (max_violation, first_failure, checked);
                }
                bumped -= 1;
                if digits[bumped] < m {
                    digits[bumped] += 1;
                    break;
                }
                digits[bumped] = 1;
            }
            for j in bumped..t {
                ys[j + 1] = wit.family[j].matrix(digits[j]).expect("validated").tr_mul(&ys[j]);
            }
        }
    };

    let chunked = par::ordered_map(m as u64, |lead| scan_chunk(lead as usize + 1));
    let mut max_violation = 0.0f64;
    let mut first_failure = None;
    let mut sequences_checked = 0u64;
    for (violation, failure, count) in chunked {
        sequences_checked += count;
        max_violation = max_violation.max(violation);
        if first_failure.is_none() {
            first_failure = failure;
        }
    }
    let mut moments = PropertyCheck::new("moment_equations", max_violation, MEMBERSHIP_TOL);
    if let Some(ref fail) = first_failure {
        moments = moments.with_worst(format!(
            "sequence {:?}: expected {:.17e}, got {:.17e}",
            fail.sequence, fail.expected, fail.actual
        ));
    }
    checks.push(moments);

    Ok(MembershipReport {
        checks,
        sequences_checked,
        max_moment_violation: max_violation,
        first_failure,
    })
}

/// The correlation `E_x phi(x) target(x)` by exact cube enumeration.
pub fn correlation(wit: &SdpWitness) -> Result<f64> {
    let n = wit.phi.n();
    if n > DEFAULT_ENUM_CAP {
        return Err(Error::CapExceeded { needed: n, cap: DEFAULT_ENUM_CAP });
    }
    let phi_table: Vec<(u64, f64)> = wit.phi.iter_coeffs().map(|(m, c)| (m as u64, c)).collect();
    let f_table: Vec<(u64, f64)> = wit.target.iter_coeffs().map(|(m, c)| (m as u64, c)).collect();
    let eval = |table: &[(u64, f64)], mask: u64| {
        let mut acc = 0.0;
        for &(m, c) in table {
            if (m & mask).count_ones() & 1 == 0 {
                acc += c;
            } else {
                acc -= c;
            }
        }
        acc
    };
    let points = 1u64 << n;
    let sum = par::block_sum(points, |i| eval(&phi_table, i) * eval(&f_table, i));
    Ok(sum / points as f64)
}

/// The program objective `E[phi * target] - w`.
pub fn objective(wit: &SdpWitness) -> Result<f64> {
    objective_with_constant(wit, 1.0)
}

/// Objective against the rescaled target `c * target`; affine in `c`.
pub fn objective_with_constant(wit: &SdpWitness, c: f64) -> Result<f64> {
    Ok(c * correlation(wit)? - wit.w)
}

/// The built-in bilinear witness: `phi = target` is the CHSH form,
/// `t = 2`, `w = 1/sqrt(2)`, and both positions share the 6x6 commuting
/// map. Its objective is `1 - 1/sqrt(2)`.
pub fn build_chsh_witness() -> SdpWitness {
    let tuple = build_chsh();
    let map = tuple_map(&tuple);
    let f = chsh_form();
    SdpWitness::new(
        f.clone(),
        f,
        std::f64::consts::FRAC_1_SQRT_2,
        vec![map.clone(), map],
        tuple.u().clone(),
        tuple.v().clone(),
    )
    .expect("static witness is well-formed")
}

fn tuple_map(tuple: &CommutingTuple) -> ContractionMap {
    ContractionMap::new(
        (1..=tuple.alphabet_len()).map(|i| tuple.matrix(i).unwrap().clone()).collect(),
    )
}

/// The quartic witness of a cubic form, with the exactly-enumerated
/// quantities it is assembled from.
#[derive(Debug, Clone)]
pub struct QuarticBound {
    pub witness: SdpWitness,
    /// `E[phi g] - w`, which equals
    /// `||f||_2^2 / (||f||_1 ||f||_inf) - Delta(f) / ||f||_1`.
    pub objective: f64,
    pub two_norm_squared: f64,
    pub one_norm: f64,
    pub inf_norm: f64,
    pub delta: f64,
}

/// Build the degree-4 witness for the bounded quartic target
/// `g = x_0 f / ||f||_inf` from a nonzero cubic form `f`:
/// `phi = x_0 f / ||f||_1`, `w = Delta(f) / ||f||_1`, and all four positions
/// share the trilinear tuple extended by `A(x_0) = I` and the padding zero
/// matrix. The fresh variable `x_0` becomes variable 1.
pub fn quartic_lower_bound(f: &MultilinearPoly) -> Result<QuarticBound> {
    let n = f.n();
    if n + 1 > DEFAULT_ENUM_CAP {
        return Err(Error::CapExceeded { needed: n + 1, cap: DEFAULT_ENUM_CAP });
    }
    let dlt = delta(f)?;
    if dlt == 0.0 {
        return Err(Error::ZeroDelta);
    }
    let tuple = build_trilinear(f)?;
    let inf_norm = f.p_norm(f64::INFINITY)?;
    let one_norm = f.p_norm(1.0)?;
    let two_norm_squared = f.two_norm_squared()?;

    let lifted = f.times_fresh_variable()?;
    let target = lifted.scale(1.0 / inf_norm);
    let phi = lifted.scale(1.0 / one_norm);
    let w = dlt / one_norm;

    let d = tuple.dim();
    let mut mats = Vec::with_capacity(n + 2);
    mats.push(DMatrix::identity(d, d));
    for i in 1..=n {
        mats.push(tuple.matrix(i)?.clone());
    }
    mats.push(DMatrix::zeros(d, d));
    let map = ContractionMap::new(mats);

    let witness = SdpWitness::new(
        target,
        phi,
        w,
        vec![map.clone(), map.clone(), map.clone(), map],
        tuple.u().clone(),
        tuple.v().clone(),
    )?;
    let objective = objective(&witness)?;
    Ok(QuarticBound { witness, objective, two_norm_squared, one_norm, inf_norm, delta: dlt })
}

/// Emit an additive-error certificate: no `floor(t/2)`-query algorithm
/// approximates the target within `epsilon`, backed by the verified witness
/// whose objective strictly exceeds `epsilon`.
pub fn certify(wit: &SdpWitness, epsilon: f64, seed: Option<u64>) -> Result<Certificate> {
    certify_kind(wit, CertKind::Additive, 1.0, epsilon, seed)
}

/// Emit a multiplicative certificate for the rescaled target `c * target`.
pub fn certify_scaled(
    wit: &SdpWitness,
    c: f64,
    epsilon: f64,
    seed: Option<u64>,
) -> Result<Certificate> {
    certify_kind(wit, CertKind::Multiplicative, c, epsilon, seed)
}

fn certify_kind(
    wit: &SdpWitness,
    kind: CertKind,
    c: f64,
    epsilon: f64,
    seed: Option<u64>,
) -> Result<Certificate> {
    if !(epsilon >= 0.0) {
        return Err(Error::BadCertificate(format!("epsilon = {epsilon} must be nonnegative")));
    }
    let membership = verify_membership(wit)?;
    if !membership.pass() {
        return Err(Error::MembershipFailed { max_violation: membership.max_moment_violation });
    }
    // the program also demands ||phi||_1 = 1; without it the objective can
    // be inflated by scaling phi and w together, which membership alone
    // does not see
    let one_norm = wit.phi.p_norm(1.0)?;
    if (one_norm - 1.0).abs() > PHI_NORMALIZATION_TOL {
        return Err(Error::BadCertificate(format!("||phi||_1 = {one_norm}, must be 1")));
    }
    let value = objective_with_constant(wit, c)?;
    if !(value > epsilon) {
        return Err(Error::ObjectiveNotAboveEpsilon { objective: value, epsilon });
    }
    Ok(Certificate::assemble(
        kind,
        c,
        epsilon,
        value,
        wit.t() / 2,
        wit.clone(),
        Provenance::now(seed),
    ))
}
