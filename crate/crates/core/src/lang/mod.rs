//! Object languages: syntax, typing and denotations.

pub mod denote;
pub mod lexer;
pub mod parser;
pub mod printer;
pub mod subst;
pub mod syntax;
pub mod typecheck;
pub mod types;

pub use denote::{denote, denote_closed, Env};
pub use parser::{parse, ParseError};
pub use syntax::{Expr, Frame, Lang};
pub use typecheck::typecheck;
pub use types::{Ty, TypeError};
