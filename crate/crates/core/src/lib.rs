//! Testing statistical hypotheses by betting.
//!
//! A bet against a null distribution `P` is a nonnegative payoff `S` with
//! `E_P(S) = 1`; the betting score `S(y)` measures the evidence the outcome
//! `y` gives against `P`. This crate builds such bets, reports their
//! implied alternatives and targets, calibrates p-values into scores, runs
//! multi-round testing protocols, and cuts warranty sets from capital
//! curves.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bet;
pub mod bounded;
pub mod calibration;
pub mod dist;
pub mod error;
pub mod neyman_pearson;
pub mod protocol;
pub mod quadrature;
pub mod special;
pub mod warranty;

pub use bet::{likelihood_ratio_bet, make_bet, Bet, ImpliedAlternative, Payoff, TestReport};
pub use dist::{ChiSquaredModel, DiscreteDistribution, DistributionModel, NormalModel, Outcome};
pub use error::{Error, Result};
pub use neyman_pearson::{all_or_nothing_bet, neyman_pearson_bet, NeymanPearsonBet, RejectionRegion};
pub use protocol::{run_protocol, CapitalProcess, ConditionalModel, RoundRecord, SkepticStrategy};
pub use warranty::{warranty_set, WarrantyCurve, WarrantySet};
