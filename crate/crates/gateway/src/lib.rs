//! HTTP boundary for the human decision-maker: one session, a replayable
//! event stream and recommendation submission into a running scenario.

mod credentials;
mod http;
mod session;

pub use credentials::{hash_secret, Credentials, CredentialsError};
pub use http::{router, serve};
pub use session::{Ack, Gateway, GatewayError, Session, StateView};
