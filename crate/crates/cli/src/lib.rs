//! Configuration, orchestration and output plumbing behind the
//! `qedft-maps` binary.

pub mod config;
pub mod output;
pub mod run;

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/cli.md")]
struct Book;
