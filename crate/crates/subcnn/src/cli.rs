//! Placeholder, replaced next.
