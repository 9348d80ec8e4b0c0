//! Explicit lifting constants and certificates for the lifting inequalities
//! at the bottom of the spectrum and inside spectral gaps.

mod certificate;
mod constant;
mod ucp;
mod verify;

pub use certificate::{
    write_csv, IndexShift, LiftingCertificate, Param, Status, TheoremTag, CSV_HEADER, MARGIN_TOL, POSITIVITY_TOL,
};
pub use constant::{c_uc, critical_n, exponent_factor, kappa, kappa_constant, minimize_exponent, Kappa, UcpConstant};
pub use ucp::{ucp_verify, UcpReport, UcpSample, TRUST_FACTOR};
pub use verify::{
    davis_kahan_check, interval_movement_check, verify_bottom_lifting, verify_gap_comparison_left,
    verify_gap_comparison_right, verify_gap_lifting_left, verify_gap_lifting_right, verify_monotone,
    ComparisonVariant, DavisKahanReport, IntervalMovementReport, LeftVariant, RightVariant, MAX_COUPLING_STEPS,
};
