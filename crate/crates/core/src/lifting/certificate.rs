//! Lifting certificates: the inequality checked per eigenvalue index, with
//! every precondition evaluated numerically and recorded alongside.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::gap::Hypothesis;
use crate::numfmt;

/// Relative tolerance on margins, in units of the operator norm.
pub const MARGIN_TOL: f64 = 1e-10;
/// Relative slack allowed in form and positivity preconditions.
pub const POSITIVITY_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TheoremTag {
    Bottom,
    GapLeft,
    GapLeftOpt,
    GapRight,
    GapRightOpt,
    Monotone,
}

impl TheoremTag {
    pub fn as_str(self) -> &'static str {
        match self {
            TheoremTag::Bottom => "bottom",
            TheoremTag::GapLeft => "gap-left",
            TheoremTag::GapLeftOpt => "gap-left-opt",
            TheoremTag::GapRight => "gap-right",
            TheoremTag::GapRightOpt => "gap-right-opt",
            TheoremTag::Monotone => "monotone",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    PreconditionFailed,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::PreconditionFailed => "precondition_failed",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Param {
    pub name: String,
    #[serde(with = "numfmt")]
    pub value: f64,
}

pub(crate) fn param(name: &str, value: f64) -> Param {
    Param { name: name.to_string(), value }
}

pub(crate) fn hypothesis(name: &str, pass: bool, witness: f64) -> Hypothesis {
    Hypothesis { name: name.to_string(), pass, witness }
}

/// One asserted inequality `after ≥ comparator`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexShift {
    /// 1-based eigenvalue index in the relevant enumeration.
    pub k: usize,
    #[serde(with = "numfmt")]
    pub before: f64,
    #[serde(with = "numfmt")]
    pub after: f64,
    /// `after − before`
    #[serde(with = "numfmt")]
    pub shift: f64,
    /// Lower bound the theorem asserts for `after`.
    #[serde(with = "numfmt")]
    pub comparator: f64,
    /// `after − comparator`
    #[serde(with = "numfmt")]
    pub margin: f64,
}

impl IndexShift {
    pub(crate) fn new(k: usize, before: f64, after: f64, comparator: f64) -> Self {
        let margin = if after == comparator { 0.0 } else { after - comparator };
        let shift = if after == before { 0.0 } else { after - before };
        Self { k, before, after, shift, comparator, margin }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LiftingCertificate {
    pub tag: TheoremTag,
    pub variant: String,
    pub inputs: Vec<Param>,
    #[serde(with = "numfmt")]
    pub kappa: f64,
    pub preconditions: Vec<Hypothesis>,
    pub shifts: Vec<IndexShift>,
    /// Minimum of the per-index margins; `+∞` if no index is in range and
    /// NaN when a precondition failed and no claim is made.
    #[serde(with = "numfmt")]
    pub margin: f64,
    pub tolerance: f64,
    pub status: Status,
    pub pass: bool,
}

impl LiftingCertificate {
    pub(crate) fn assemble(
        tag: TheoremTag,
        variant: &str,
        inputs: Vec<Param>,
        kappa: f64,
        preconditions: Vec<Hypothesis>,
        shifts: impl FnOnce() -> Result<Vec<IndexShift>>,
        tolerance: f64,
    ) -> Result<Self> {
        let ok = preconditions.iter().all(|h| h.pass);
        let (shifts, margin, status) = if ok {
            let shifts = shifts()?;
            let margin = shifts.iter().map(|s| s.margin).fold(f64::INFINITY, f64::min);
            let status = if margin >= -tolerance { Status::Pass } else { Status::Fail };
            (shifts, margin, status)
        } else {
            (Vec::new(), f64::NAN, Status::PreconditionFailed)
        };
        Ok(Self {
            tag,
            variant: variant.to_string(),
            inputs,
            kappa,
            preconditions,
            shifts,
            margin,
            tolerance,
            pass: status == Status::Pass,
            status,
        })
    }

    pub fn precondition_failed(&self) -> bool {
        self.status == Status::PreconditionFailed
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

pub const CSV_HEADER: [&str; 6] = ["tag", "variant", "kappa", "min_margin", "status", "pass"];

/// One summary row per certificate.
pub fn write_csv(certs: &[LiftingCertificate], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for c in certs {
        w.write_record([
            c.tag.as_str().to_string(),
            c.variant.clone(),
            numfmt::cell(c.kappa),
            numfmt::cell(c.margin),
            c.status.as_str().to_string(),
            c.pass.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
