//! Numerical tolerances shared across modules.

/// Assertions on states, flags and physics results.
pub const ASSERT: f64 = 1e-10;

/// Pure-algebra identities (composition, commutation, exact weak values).
pub const ALGEBRA: f64 = 1e-12;

/// Postselection probabilities at or below this are treated as impossible.
pub const IMPOSSIBLE: f64 = 1e-14;

/// Weak-value denominators at or below this are treated as vanishing.
pub const OVERLAP: f64 = 1e-12;
