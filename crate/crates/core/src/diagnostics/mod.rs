//! Classification, localized virial monitors and finite-horizon verdicts.

mod cutoff;
mod verdict;
mod virial;

pub use cutoff::{theta, CutoffKind, CutoffProfile};
pub use verdict::{
    classify, detect, membership_of, windowed_strichartz, Classification, DetectorOptions, Membership, Outcome, Verdict,
    WindowedNorm,
};
pub use virial::{
    center_of_mass, leakage_check, localized_mass, mass_outside, virial_series, CenterOfMass, LeakageReport,
    VirialTerms,
};
