//! Declarative scenarios: JSON configs, named presets, and the analyze / simulate / sweep runners
//! that write CSV and JSON artifacts.

mod canned;
mod config;
mod run;

pub use canned::{canned, Variant, CANNED_NAMES, HALF_WIDTH, RECTANGLE_GAMMA2, RECTANGLE_GAMMA2_DEGENERATE};
pub use config::{
    Coefficients, DomainConfig, InitialConfig, InitialState, ObserverConfig, QuadratureConfig, Scenario, ScenarioConfig, StateKeyword, SubIntervalConfig,
    SubRectangleConfig, SubregionConfig, TruncationConfig, TruncationOneD, TruncationTwoD,
};
pub use run::{
    analyze, exit_code, observer_system, simulate_cmd, simulation_options, sweep, sweep_csv, sweep_rows, trajectory_csv, DecayOutcome, RunOptions, RunReport, SweepRow,
    SweepSpec, TAIL_FRACTION,
};
