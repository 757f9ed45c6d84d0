//! Shortest round-trip formatting of floats.

/// Plain decimal for `1e-4 <= |x| < 1e15` (and zero), scientific otherwise.
/// Both forms are Rust's shortest representation that parses back to `x`.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}
