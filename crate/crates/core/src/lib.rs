pub mod analysis;
pub mod cli;
pub mod constraint;
pub mod dot;
pub mod federation;
pub mod game;
pub mod gen;
pub mod operators;
pub mod oracle;
pub mod semantics;
pub mod syntax;
pub mod tioa;
pub mod word;
pub mod zone;
