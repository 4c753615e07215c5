//! Ordering systems over ordinals below a fixed bound: closed sets and
//! closures, VC dimension of set families, a transfinite construction
//! with closed initial segments, and finite forcing conditions.

pub mod cli;
pub mod closure;
pub mod format;
pub mod generic;
pub mod omega1;
pub mod order;
pub mod ordinal;
pub mod sets;
pub mod system;
pub mod vc;
pub mod verify;

/// Outcome of a property check, carrying a witness on failure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Check<W> {
    Pass,
    Fail(W),
}

impl<W> Check<W> {
    pub fn passed(&self) -> bool {
        matches!(self, Check::Pass)
    }

    pub fn witness(&self) -> Option<&W> {
        match self {
            Check::Pass => None,
            Check::Fail(w) => Some(w),
        }
    }
}
