//! Outage probability of a dual-hop amplify-and-forward NOMA downlink.
//!
//! A multi-antenna base station talks to `L` single-data-stream users through
//! a multi-antenna AF relay.  Both hops use maximum ratio transmission at the
//! transmitter and receive antenna selection at the receiver, the links fade
//! as Nakagami-m, and the channel estimates carry a tunable estimation error.
//! Users are ordered by their selected second-hop channel gain and decode by
//! successive interference cancellation.
//!
//! The crate computes per-user outage probability three independent ways and
//! cross-checks them:
//!
//! * [`analytic::op_closed_form`]: closed-form series built from incomplete
//!   gamma terms, power-series coefficient tables and modified Bessel
//!   functions of the second kind;
//! * [`analytic::op_quadrature`]: adaptive Gauss-Kronrod evaluation of the
//!   exact one-dimensional outage integral;
//! * [`simulator::estimate_op`]: reproducible Monte Carlo over the fading
//!   ensemble.
//!
//! On top of those sit error-floor and high-SNR asymptotics (diversity order
//! and array gain), an OMA baseline, and a CLI that emits CSV sweeps and SVG
//! figures.

pub mod analytic;
pub mod channel;
pub mod cli;
pub mod quad;
pub mod simulator;
pub mod specfun;
