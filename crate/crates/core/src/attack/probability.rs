/// Probability that `r` uniform guesses hit the cell of width `2/n_eps`
/// containing a fixed matrix entry at least once: `1 - (1 - 1/n_eps)^r`.
pub fn hit_probability(n_eps: u64, r: u64) -> f64 {
    assert!(n_eps >= 1, "n_eps must be at least 1");
    if r == 0 {
        return 0.0;
    }
    if n_eps == 1 {
        return 1.0;
    }
    // 1 - exp(r ln(1 - 1/n)), written to keep precision for large n.
    -(r as f64 * (-1.0 / n_eps as f64).ln_1p()).exp_m1()
}
