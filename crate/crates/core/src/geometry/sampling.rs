const PRIMES: [usize; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Van der Corput radical inverse of `index` in `base`.
pub fn radical_inverse(mut index: usize, base: usize) -> f64 {
    let inv = 1.0 / base as f64;
    let mut scale = inv;
    let mut out = 0.0;
    while index > 0 {
        out += (index % base) as f64 * scale;
        index /= base;
        scale *= inv;
    }
    out
}

/// The `index`-th Halton point in `[0, 1)^dim`, bases 2, 3, 5, ...
pub fn halton(index: usize, dim: usize) -> Vec<f64> {
    assert!(dim <= PRIMES.len(), "Halton sampling supports up to {} dimensions", PRIMES.len());
    PRIMES[..dim].iter().map(|&b| radical_inverse(index, b)).collect()
}
