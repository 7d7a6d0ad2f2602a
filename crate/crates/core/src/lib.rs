pub mod cli;
pub mod harness;
pub mod lang;
pub mod logic;
pub mod model;
pub mod policy;
pub mod semantic;
pub mod verdict;
