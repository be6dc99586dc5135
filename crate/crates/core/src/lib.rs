//! Model checking for quantitative hyperproperties over weighted Kripke structures.

pub mod automata;
pub mod checker;
pub mod cli;
pub mod compile;
pub mod formula;
pub mod kripke;
pub mod oracle;
pub mod rational;
pub mod values;
