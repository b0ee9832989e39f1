//! Trace-preserving (quantum-channel) extensions, probabilistic-operation
//! extensions, the Hilbert-metric existence criterion, and the minimal
//! unital-scale search.
//!
//! The channel question pairs a weighted primal program (how far is the
//! data from admitting a channel, the non-Markovianity score) with its
//! dual witness program; both are solved and cross-validated, and unlike
//! the unconstrained CP case the primal optimum here is always attained,
//! so a zero score is equivalent to exact extendability.

mod cptp;
mod hilbert;
mod probabilistic;
mod unital;

pub use cptp::{channel_extension, cptp_delta, cptp_delta_hard, ChannelExtension, TpExtensionResult};
pub use hilbert::{hilbert_metric_check, HilbertCheck, HilbertVerdict};
pub use probabilistic::{
    probabilistic_maximin, probabilistic_weighted, ObjectiveKind, ProbabilisticOutcome,
    ProbabilisticResult,
};
pub use unital::minimal_unital_scale;
