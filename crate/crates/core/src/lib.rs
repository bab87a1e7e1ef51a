pub mod corpus;
pub mod induction;
pub mod llm;
pub mod metrics;
pub mod optimizer;
pub mod prompt;
pub mod runner;
pub mod seed;
