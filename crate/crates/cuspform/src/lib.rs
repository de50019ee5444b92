//! Exact verification of Frobenius structures attached to affine cusp polynomials.

#![allow(clippy::needless_range_loop)]

pub mod cases;
pub mod cli;
pub mod frobenius;
pub mod ideal;
pub mod linalg;
pub mod ratpoly;
pub mod report;
pub mod residue;
pub mod selftest;
pub mod unfolding;
