//! Command-line front end, reports and randomized campaigns on top of
//! [`stc_core`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod campaign;
pub mod cli;
pub mod commands;
pub mod report;
pub mod spec;
