//! File formats, graphics, parallel benchmarks and the `msplot` command-line
//! tool on top of [`msplot_core`].

pub mod bench;
pub mod cli;
pub mod csvio;
pub mod plot;
