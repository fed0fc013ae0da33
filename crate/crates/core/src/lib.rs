//! Software stack for modular, backdrivable hip/knee exoskeletons: the
//! quasi-direct-drive actuator model and its identification, the
//! gravity-compensation controller, bench and squat simulation, and the
//! EMG effort pipeline.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod actuator;
pub mod benchsim;
pub mod emg;
pub mod error;
pub mod filter;
pub mod gravcomp;
pub mod stats;
pub mod sysid;
pub mod trial;

pub use actuator::ActuatorParams;
pub use benchsim::{GridSpec, SineBackdriveSpec, SquatSpec};
pub use emg::EmgRecording;
pub use gravcomp::{ExoConfig, Layout};
pub use error::{Error, Result};
pub use trial::TrialLog;
