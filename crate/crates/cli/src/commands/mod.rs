pub mod analyze;
pub mod experiment;
pub mod prc;
pub mod script;
