//! Execution mode for the data-parallel loops.
//!
//! With the `parallel` feature (on by default) the loops run on the rayon
//! pool unless [`set_mode`] selects [`Mode::Sequential`]. Without the feature
//! everything is sequential. Results are always returned in input order, so
//! both modes produce identical output.

use std::sync::atomic::{AtomicU8, Ordering};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Sequential,
    Parallel,
}

static MODE: AtomicU8 = AtomicU8::new(1);

pub fn set_mode(mode: Mode) {
    MODE.store(
        match mode {
            Mode::Sequential => 0,
            Mode::Parallel => 1,
        },
        Ordering::Relaxed,
    );
}

/// The mode loops will actually use.
pub fn mode() -> Mode {
    if cfg!(feature = "parallel") && MODE.load(Ordering::Relaxed) == 1 {
        Mode::Parallel
    } else {
        Mode::Sequential
    }
}

/// Maps `f` over `items`, preserving order.
pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode() == Mode::Parallel {
        return items.par_iter().map(f).collect();
    }
    items.iter().map(f).collect()
}

/// Fallible [`map`]; on failure returns the error of the lowest failing index.
pub fn try_map<T, R, E, F>(items: &[T], f: F) -> Result<Vec<R>, E>
where
    T: Sync,
    R: Send,
    E: Send,
    F: Fn(&T) -> Result<R, E> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode() == Mode::Parallel {
        let all: Vec<Result<R, E>> = items.par_iter().map(f).collect();
        return all.into_iter().collect();
    }
    items.iter().map(f).collect()
}
