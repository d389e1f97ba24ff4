//! Serialization, instance generators and the suite runner behind the
//! `atomkit` command.

pub mod generate;
pub mod io;
pub mod suite;
