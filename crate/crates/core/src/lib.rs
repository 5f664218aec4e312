//! Reidemeister–Schreier and Tietze machinery for braid-like groups.
//!
//! The pipeline runs `presentation` → `quotient` → `rewriting` → `tietze`, with
//! `abelian` certifying invariants and `autaction` deciding the word problem in
//! welded braid groups through their action on a free group.

pub mod abelian;
pub mod autaction;
pub mod presentation;
pub mod quotient;
pub mod rewriting;
pub mod tietze;
pub mod verify;
pub mod words;
