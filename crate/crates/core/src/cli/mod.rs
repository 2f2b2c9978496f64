//! Batch front end: spec files in, reports out.

pub mod report;
pub mod spec_file;

pub use report::{parse_machine, render, render_machine, render_text, run, Format, RunOptions, RunReport};
pub use spec_file::{load_spec, load_spec_str, LoadedSpec, Mode, RunSection, SpecError};

/// Process exit status for a spec that fails to load or validate.
pub const EXIT_SPEC_ERROR: i32 = 1;
/// Process exit status when no admissible sample point can be found.
pub const EXIT_SAMPLING_ERROR: i32 = 2;
