//! Config loading, file output and the command pipeline around
//! [`gdfif_core`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod pipeline;
pub mod render;

pub use config::{load_config, parse_config, ConfigError, ProjectConfig};
pub use pipeline::{cmd_eval, cmd_render, cmd_run, cmd_validate, CommandOutput, Overrides};
pub use render::{export_csv, import_csv, render_pgm, render_svg, PlotData, PlotSpec, RenderError};
