//! Derived fields, VTK snapshots, CSV time series and case files.

mod config;
mod derived;
mod timeseries;
mod vtk;

pub use config::{
    parse_config, read_config, BcConfig, CaseConfig, FixedDisplacement, FixedPressure, LoadConfig,
    MeshConfig, ModelConfig, ModelKind, ProbeConfig, RegionSplit, ScheduleConfig, TractionConfig,
};
pub use derived::{dissipation, seepage_velocity, DerivedFields};
pub use timeseries::{
    compare_tables, format_timeseries, header, parse_table, read_timeseries, write_timeseries,
    ColumnDeviation, Table,
};
pub use vtk::{format_vtk, parse_vtk, read_snapshot, write_snapshot, VtkData, VtkFile};
