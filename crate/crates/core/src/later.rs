//! Delayed values: a memoized thunk standing in for the later modality.

use std::cell::{OnceCell, RefCell};
use std::fmt;
use std::rc::Rc;

type Thunk<T> = Box<dyn FnOnce() -> T>;

struct Inner<T> {
    value: OnceCell<T>,
    thunk: RefCell<Option<Thunk<T>>>,
}

/// A value available "one step later".
///
/// Forcing runs the producer at most once; every later force returns a clone
/// of the cached result.
pub struct Later<T>(Rc<Inner<T>>);

impl<T> Clone for Later<T> {
    fn clone(&self) -> Self {
        Later(Rc::clone(&self.0))
    }
}

impl<T: Clone + 'static> Later<T> {
    /// Delay a computation.
    pub fn new(f: impl FnOnce() -> T + 'static) -> Self {
        Later(Rc::new(Inner {
            value: OnceCell::new(),
            thunk: RefCell::new(Some(Box::new(f))),
        }))
    }

    /// `Next`: wrap an already available value.
    pub fn now(v: T) -> Self {
        let value = OnceCell::new();
        let _ = value.set(v);
        Later(Rc::new(Inner {
            value,
            thunk: RefCell::new(None),
        }))
    }

    pub fn force(&self) -> T {
        if let Some(v) = self.0.value.get() {
            return v.clone();
        }
        let thunk = self
            .0
            .thunk
            .borrow_mut()
            .take()
            .expect("Later forced re-entrantly while being computed");
        let v = thunk();
        let _ = self.0.value.set(v.clone());
        v
    }

    pub fn is_forced(&self) -> bool {
        self.0.value.get().is_some()
    }

    /// Applicative map under the delay.
    pub fn map<U: Clone + 'static>(&self, f: impl FnOnce(T) -> U + 'static) -> Later<U> {
        let me = self.clone();
        Later::new(move || f(me.force()))
    }

    pub fn ptr_eq(a: &Self, b: &Self) -> bool {
        Rc::ptr_eq(&a.0, &b.0)
    }
}

impl<T> fmt::Debug for Later<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.value.get().is_some() {
            f.write_str("▷<forced>")
        } else {
            f.write_str("▷<delayed>")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::cell::Cell;

    #[test]
    fn producer_runs_once() {
        let hits = Rc::new(Cell::new(0));
        let h = hits.clone();
        let l = Later::new(move || {
            h.set(h.get() + 1);
            7u32
        });
        assert!(!l.is_forced());
        assert_eq!(l.force(), 7);
        assert_eq!(l.clone().force(), 7);
        assert_eq!(hits.get(), 1);
    }

    #[test]
    fn now_is_already_forced() {
        let l = Later::now(3u8);
        assert!(l.is_forced());
        assert_eq!(l.map(|x| x + 1).force(), 4);
    }
}
