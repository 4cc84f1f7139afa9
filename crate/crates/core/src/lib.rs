//! Scene Language toolkit: parse, validate, execute, render, export and edit
//! hierarchical, function-based scene programs.

pub mod backends;
pub mod cli;
pub mod dsl;
pub mod edit;
pub mod interp;
pub mod math;
pub mod render;
pub mod scene;
