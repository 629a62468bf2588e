//! Special functions needed by the kernel quadrature.

/// Riemann zeta function for real `s != 1`.
///
/// Euler–Maclaurin summation with `N = 12` and eight Bernoulli correction
/// terms; accurate to a few ulps for `-4 < s < 4`, which covers every use here
/// (`s = α - 1 ∈ (-1, 1)`).
pub fn zeta(s: f64) -> f64 {
    debug_assert!(s != 1.0, "zeta has a pole at s = 1");
    const N: usize = 12;
    // B_2, B_4, ..., B_16
    const BERNOULLI: [f64; 8] = [
        1.0 / 6.0,
        -1.0 / 30.0,
        1.0 / 42.0,
        -1.0 / 30.0,
        5.0 / 66.0,
        -691.0 / 2730.0,
        7.0 / 6.0,
        -3617.0 / 510.0,
    ];
    let n = N as f64;
    let mut sum: f64 = (1..N).map(|k| (k as f64).powf(-s)).sum();
    sum += n.powf(1.0 - s) / (s - 1.0) + 0.5 * n.powf(-s);

    // term_j = B_2j/(2j)! · s(s+1)…(s+2j-2) · N^{-s-2j+1}
    let mut rising = s; // s(s+1)…(s+2j-2)
    let mut factorial = 2.0; // (2j)!
    let mut power = n.powf(-s - 1.0);
    for (j, b) in BERNOULLI.iter().enumerate() {
        let j = j + 1;
        sum += b / factorial * rising * power;
        let k = 2 * j as u32;
        rising *= (s + (k - 1) as f64) * (s + k as f64);
        factorial *= ((k + 1) * (k + 2)) as f64;
        power /= n * n;
    }
    sum
}

/// Gamma function (delegates to the C math library routine).
pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}
