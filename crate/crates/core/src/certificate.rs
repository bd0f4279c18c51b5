//! Machine-readable impossibility certificates.
//!
//! A certificate packages a verified witness, the target it speaks about,
//! the claimed objective value and the error threshold it beats. Files are
//! written by a canonical serializer — fixed field order, every float at 17
//! significant digits — so a certificate re-read from disk reproduces the
//! original doubles bit for bit. Parsing is schema-driven and accepts any
//! field order. A SHA-256 hash over the canonical body (everything except
//! the provenance block) is embedded so edits are detectable even when they
//! leave the numbers plausible.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::poly::MultilinearPoly;
use crate::witness::{
    objective_with_constant, verify_membership, ContractionMap, MembershipReport, SdpWitness,
};

/// Render a double with 17 significant digits (one leading digit plus 16
/// after the point), enough to round-trip every f64 exactly.
pub fn float17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Kind of impossibility claim the certificate makes about `C * target`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertKind {
    /// No `queries`-query algorithm gets within `epsilon` of the target.
    Additive,
    /// Same, for the target rescaled by the recorded constant `C`.
    Multiplicative,
}

impl CertKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CertKind::Additive => "additive",
            CertKind::Multiplicative => "multiplicative",
        }
    }

    fn parse(s: &str) -> Result<Self> {
        match s {
            "additive" => Ok(CertKind::Additive),
            "multiplicative" => Ok(CertKind::Multiplicative),
            other => Err(Error::BadCertificate(format!("unknown kind {other:?}"))),
        }
    }
}

/// Where the certificate came from: the seed that generated the instance,
/// the crate version, a timestamp, and the canonical-body hash.
#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub seed: Option<u64>,
    pub code_version: String,
    pub timestamp: String,
    pub witness_hash: String,
}

impl Provenance {
    /// Stamped with the current UTC time; the hash is filled in by
    /// [`Certificate::assemble`].
    pub fn now(seed: Option<u64>) -> Self {
        Self {
            seed,
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Micros, true),
            witness_hash: String::new(),
        }
    }
}

/// A re-checkable impossibility claim.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub kind: CertKind,
    /// Scaling constant applied to the target in the claim (1 for additive).
    pub c: f64,
    pub epsilon: f64,
    /// The verified objective; must strictly exceed `epsilon`.
    pub value: f64,
    /// `floor(t/2)` — the number of queries ruled out.
    pub queries: usize,
    pub witness: SdpWitness,
    pub provenance: Provenance,
}

impl Certificate {
    /// Build a certificate and stamp the canonical-body hash into its
    /// provenance. Callers have already verified the witness.
    pub fn assemble(
        kind: CertKind,
        c: f64,
        epsilon: f64,
        value: f64,
        queries: usize,
        witness: SdpWitness,
        provenance: Provenance,
    ) -> Self {
        let mut cert = Self { kind, c, epsilon, value, queries, witness, provenance };
        cert.provenance.witness_hash = cert.canonical_hash();
        cert
    }

    /// SHA-256 (hex) of the canonical body.
    pub fn canonical_hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.canonical_body().as_bytes());
        let digest = hasher.finalize();
        let mut hex = String::with_capacity(64);
        for byte in digest {
            write!(hex, "{byte:02x}").unwrap();
        }
        hex
    }

    /// The claim and witness as canonical JSON, provenance omitted — the
    /// hash preimage.
    pub fn canonical_body(&self) -> String {
        let mut out = String::new();
        out.push('{');
        self.write_body_fields(&mut out);
        out.push('}');
        out
    }

    fn write_body_fields(&self, out: &mut String) {
        write!(out, "\"kind\":\"{}\",\"target\":", self.kind.as_str()).unwrap();
        self.witness.target.write_json(out);
        write!(
            out,
            ",\"C\":{},\"epsilon\":{},\"value\":{},\"queries\":{}",
            float17(self.c),
            float17(self.epsilon),
            float17(self.value),
            self.queries
        )
        .unwrap();
        out.push_str(",\"witness\":");
        write_witness_json(&self.witness, out);
    }

    /// Full canonical JSON, including provenance.
    pub fn to_json(&self) -> String {
        let mut out = String::new();
        out.push('{');
        self.write_body_fields(&mut out);
        out.push_str(",\"provenance\":{\"seed\":");
        match self.provenance.seed {
            Some(s) => write!(out, "{s}").unwrap(),
            None => out.push_str("null"),
        }
        write!(
            out,
            ",\"code-version\":{},\"timestamp\":{},\"witness-hash\":{}}}",
            json_string(&self.provenance.code_version),
            json_string(&self.provenance.timestamp),
            json_string(&self.provenance.witness_hash)
        )
        .unwrap();
        out.push('}');
        out
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let parsed: CertJson = serde_json::from_str(text)?;
        let kind = CertKind::parse(&parsed.kind)?;
        let target = MultilinearPoly::from_json_value(parsed.target)?;
        let phi = MultilinearPoly::from_json_value(parsed.witness.phi)?;
        let d = parsed.witness.d;
        let w = parsed.witness.w;
        let t = parsed.witness.t;
        if parsed.witness.matrices.len() != t {
            return Err(Error::BadCertificate(format!(
                "expected {t} position maps, found {}",
                parsed.witness.matrices.len()
            )));
        }
        if parsed.queries != t / 2 {
            return Err(Error::BadCertificate(format!(
                "queries = {} does not match floor(t/2) for t = {t}",
                parsed.queries
            )));
        }
        let mut family = Vec::with_capacity(t);
        for position in parsed.witness.matrices {
            if position.len() != parsed.witness.alphabet {
                return Err(Error::BadCertificate(format!(
                    "expected {} matrices per position, found {}",
                    parsed.witness.alphabet,
                    position.len()
                )));
            }
            let mut mats = Vec::with_capacity(position.len());
            for rows in position {
                if rows.len() != d * d {
                    return Err(Error::BadCertificate(format!(
                        "matrix has {} entries, expected {}",
                        rows.len(),
                        d * d
                    )));
                }
                mats.push(DMatrix::from_row_slice(d, d, &rows));
            }
            family.push(ContractionMap::new(mats));
        }
        if parsed.witness.u.len() != d || parsed.witness.v.len() != d {
            return Err(Error::BadCertificate("u/v length does not match d".into()));
        }
        let witness = SdpWitness::new(
            target,
            phi,
            w,
            family,
            DVector::from_vec(parsed.witness.u),
            DVector::from_vec(parsed.witness.v),
        )?;
        Ok(Self {
            kind,
            c: parsed.c,
            epsilon: parsed.epsilon,
            value: parsed.value,
            queries: parsed.queries,
            witness,
            provenance: Provenance {
                seed: parsed.provenance.seed,
                code_version: parsed.provenance.code_version,
                timestamp: parsed.provenance.timestamp,
                witness_hash: parsed.provenance.witness_hash,
            },
        })
    }

    /// Re-run membership, the correlator normalization, and the objective
    /// from the embedded witness and compare against the stored claim.
    pub fn reverify(&self) -> Result<Reverification> {
        let hash_matches = self.canonical_hash() == self.provenance.witness_hash;
        let membership = verify_membership(&self.witness)?;
        let phi_normalized =
            (self.witness.phi.p_norm(1.0)? - 1.0).abs() <= crate::witness::PHI_NORMALIZATION_TOL;
        let recomputed_value = objective_with_constant(&self.witness, self.c)?;
        let value_error = (recomputed_value - self.value).abs();
        let value_reproduced = value_error <= 1e-9;
        let bit_identical = recomputed_value.to_bits() == self.value.to_bits();
        let exceeds_epsilon = recomputed_value > self.epsilon;
        let pass = hash_matches
            && membership.pass()
            && phi_normalized
            && value_reproduced
            && exceeds_epsilon;
        Ok(Reverification {
            membership,
            phi_normalized,
            recomputed_value,
            value_error,
            value_reproduced,
            bit_identical,
            hash_matches,
            exceeds_epsilon,
            pass,
        })
    }
}

/// Outcome of re-checking a parsed certificate.
#[derive(Debug, Clone, serde::Serialize)]
pub struct Reverification {
    pub membership: MembershipReport,
    pub phi_normalized: bool,
    pub recomputed_value: f64,
    pub value_error: f64,
    pub value_reproduced: bool,
    /// Whether recomputation reproduced the stored value bit for bit.
    pub bit_identical: bool,
    pub hash_matches: bool,
    pub exceeds_epsilon: bool,
    pub pass: bool,
}

fn write_witness_json(wit: &SdpWitness, out: &mut String) {
    write!(out, "{{\"t\":{},\"phi\":", wit.t()).unwrap();
    wit.phi.write_json(out);
    write!(
        out,
        ",\"w\":{},\"d\":{},\"alphabet\":{},\"matrices\":[",
        float17(wit.w),
        wit.dim(),
        wit.alphabet_len()
    )
    .unwrap();
    let d = wit.dim();
    for (p, map) in wit.family.iter().enumerate() {
        if p > 0 {
            out.push(',');
        }
        out.push('[');
        for i in 1..=map.len() {
            if i > 1 {
                out.push(',');
            }
            let mat = map.matrix(i).expect("in range");
            out.push('[');
            let mut first = true;
            for r in 0..d {
                for c in 0..d {
                    if !first {
                        out.push(',');
                    }
                    first = false;
                    out.push_str(&float17(mat[(r, c)]));
                }
            }
            out.push(']');
        }
        out.push(']');
    }
    out.push_str("],\"u\":");
    write_vector(&wit.u, out);
    out.push_str(",\"v\":");
    write_vector(&wit.v, out);
    out.push('}');
}

fn write_vector(v: &DVector<f64>, out: &mut String) {
    out.push('[');
    for (i, x) in v.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&float17(*x));
    }
    out.push(']');
}

fn json_string(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialize")
}

#[derive(Deserialize)]
struct CertJson {
    kind: String,
    target: serde_json::Value,
    #[serde(rename = "C")]
    c: f64,
    epsilon: f64,
    value: f64,
    queries: usize,
    witness: WitnessJson,
    provenance: ProvJson,
}

#[derive(Deserialize)]
struct WitnessJson {
    t: usize,
    phi: serde_json::Value,
    w: f64,
    d: usize,
    alphabet: usize,
    matrices: Vec<Vec<Vec<f64>>>,
    u: Vec<f64>,
    v: Vec<f64>,
}

#[derive(Deserialize)]
struct ProvJson {
    seed: Option<u64>,
    #[serde(rename = "code-version")]
    code_version: String,
    timestamp: String,
    #[serde(rename = "witness-hash")]
    witness_hash: String,
}
