pub mod harness;
pub mod scenario;

pub use harness::{
    rate_grid, run_replicate, run_scenario, run_scenario_on, sweep_observed_rate, DesignKind,
    OperatingCharacteristics, ReplicateRecord, ScenarioResult, SimSetup, SweepRow,
};
pub use scenario::{gen_historical, gen_new_trial, gen_world, responders, HistoricalWorld, ScenarioConfig};
