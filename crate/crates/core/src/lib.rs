// Copyright (c) 2026 qmt Contributors
// SPDX-License-Identifier: Apache-2.0

//! Toolkit for oracle machines whose query lengths obey monotonicity
//! constraints.
//!
//! The crate is `no_std` (with `alloc`) so the algorithmic core can be
//! embedded anywhere; file formats and the CLI live in the companion
//! `qmt-cli` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod backends;
pub mod bitcodec;
pub mod diag;
pub mod encodings;
pub mod machine;
pub mod padding;
pub mod robust;
pub mod transform;

pub use bitcodec::BitString;
