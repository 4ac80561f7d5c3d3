//! Certified neural abstraction of nonlinear dynamical models.
//!
//! This crate turns a nonlinear ODE `ẋ = f(x) + d, ‖d‖ ≤ δ` over a box
//! domain into a hybrid automaton with affine modes that provably
//! overapproximates it, then checks safety of the automaton by flowpipe
//! propagation. Four stages:
//!
//! 1. **Learning** ([`train`]): fit a ReLU network `N ≈ f` on samples
//!    of the vector field by full-batch Adam.
//! 2. **Certification** ([`certify`]): prove `|f_i(x) − N_i(x)| ≤ e_i − δ`
//!    over the whole domain by interval branch-and-bound, or produce a
//!    concrete counterexample. Learner and certifier alternate in a
//!    CEGIS loop ([`cegis`]) until a certificate lands.
//! 3. **Translation** ([`hybrid`]): enumerate the feasible activation
//!    configurations of the certified network; each becomes a mode with
//!    an affine flow, a polyhedral invariant, and the box disturbance
//!    `∏[−e_i, e_i]` absorbing the certified error.
//! 4. **Reachability** ([`reach`]): propagate zonotope flowpipes through
//!    the automaton and test intersection with the bad set. Verdicts
//!    are `Safe` or `Unknown`, never `Unsafe`: the abstraction only
//!    overapproximates, so safety transfers to the concrete model while
//!    bad-set contact does not.
//!
//! The [`mesh`] module carries the affine simplicial-mesh baseline the
//! abstraction is compared against, reusing the same certifier.
//!
//! The crate is `no_std`-compatible (with `alloc`); enable the `libm`
//! feature for float math without the standard library. Wall-clock
//! budgets are injected through [`clock::Clock`] so the core stays free
//! of platform timers; budgets only ever abort work early, they never
//! change the content of a completed result.

#![cfg_attr(not(feature = "std"), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod cegis;
pub mod certify;
pub mod clock;
pub mod expm;
pub mod expr;
pub mod hybrid;
pub mod interval;
pub mod mesh;
pub mod model;
pub mod net;
pub mod poly;
pub mod reach;
pub mod train;
pub mod zonotope;

mod affine;
mod math;
mod simplex;

pub use cegis::{synthesize, LoopConfig, NeuralAbstraction, SynthesisOutcome};
pub use certify::{certify, CertBudget, CertResult, CertVerdict, ErrorBound};
pub use expr::Expr;
pub use hybrid::{build_automaton, HybridAutomaton, Mode};
pub use interval::{Interval, IntervalBox};
pub use model::DynamicalModel;
pub use net::NeuralNet;
pub use reach::{reach, Flowpipe, ReachConfig, SafetyVerdict};
