//! Core of a checker for Martin-Löf type theory with propositional truncation.
//!
//! Everything here works over `alloc` only; file access and reporting live in
//! the companion `mltt` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod check;
pub mod eval;
pub mod lexer;
pub mod parser;
pub mod print;
pub mod resolve;
pub mod session;
pub mod syntax;
pub mod value;
