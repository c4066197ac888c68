//! Command-line front end for the folding-ray engine: trace replay, the
//! reachability oracle, scene digests and a WebSocket session server.

pub mod commands;
pub mod protocol;
pub mod serve;
