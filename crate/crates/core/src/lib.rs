//! Exact evaluation of finite Markov decision processes whose reward streams
//! are aggregated by finitely additive charges on the set of stages.

pub mod blackwell;
pub mod charge;
pub mod mdp;
pub mod poly;
pub mod rational;
pub mod sets;
pub mod stream;
pub mod suite;
pub mod syntax;

pub use blackwell::{average_value, blackwell_policy, discounted_value, BlackwellError};
pub use charge::{CValue, ChargeError, ChargeExpr};
pub use mdp::format::{parse_mdp, parse_strategy, FormatError};
pub use mdp::{Mdp, MdpBuilder, PureSchedule, Strategy};
pub use poly::{Polynomial, RationalFunction, Sign};
pub use rational::Rational;
pub use sets::{EventuallyPeriodicSet, SetError};
pub use stream::RationalStream;
pub use suite::VerificationReport;
pub use syntax::{parse_charge, parse_set, parse_stream, ParseError};
