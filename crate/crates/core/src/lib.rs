pub mod engine;
pub mod cp;
pub mod maxsat;
pub mod oracle;
pub mod rcpsp;
