//! Exact a-priori probabilities for two-group Boolean data sets.
//!
//! Given the sizes of an instance (observations per group, number of
//! attributes in a candidate subset `Y` and in its complement `Z`), the crate
//! counts how many random instances exhibit a structural event, such as the
//! positive group collapsing to a single `Y`-value, and divides by the number of
//! admissible instances. All counts are exact big integers.
//!
//! Two random models are provided. In [`model_m1`] the groups are disjoint and
//! their projections on `Y` are disjoint as well; in [`model_m2`] only the
//! groups are disjoint. [`lad`] loads concrete instances and finds small
//! separating subsets and patterns, [`oracle`] validates the formulas by brute
//! force and sampling, and [`asymptotics`] covers the regime `|Z| -> infinity`.

pub mod asymptotics;
pub mod error;
pub mod exactmath;
pub mod lad;
pub mod model_m1;
pub mod model_m2;
pub mod oracle;
pub mod report;

pub use error::{Error, Result};
pub use exactmath::{big_binomial, big_multinomial, to_decimal, DomainSpec, ExactInt, ExactProb};
pub use model_m1::{M1Case, SizeProfile};
