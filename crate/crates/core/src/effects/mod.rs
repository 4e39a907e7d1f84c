//! Effect families: store, call/cc, exceptions, delimited control and fork.

pub mod callcc;
pub mod delim;
pub mod exc;
pub mod fork;
pub mod store;

use std::rc::Rc;

use crate::engine::Reifier;

pub fn store() -> Rc<dyn Reifier> {
    Rc::new(store::Store)
}

pub fn callcc() -> Rc<dyn Reifier> {
    Rc::new(callcc::CallCc)
}

pub fn exc() -> Rc<dyn Reifier> {
    Rc::new(exc::Exceptions)
}

pub fn delim() -> Rc<dyn Reifier> {
    Rc::new(delim::Delim)
}

pub fn fork() -> Rc<dyn Reifier> {
    Rc::new(fork::Fork)
}
