//! Independent numerical oracles for the integration tests.
//!
//! Everything here is deliberately written from scratch against the textbook
//! formulas — no code shared with the crate's integrators — so that the two
//! routes can check each other.

use num_complex::Complex64;

/// Coefficient matrix of the rotating-frame pair:
/// `[[0, -i w e^{i phi}], [-i w e^{-i phi}, 0]]` with
/// `phi(t) = eps (cos(omega0 t) - 1)/omega0`.
pub fn pair_matrix(omega: f64, eps: f64, omega0: f64, t: f64) -> [[Complex64; 2]; 2] {
    let phi = eps * ((omega0 * t).cos() - 1.0) / omega0;
    let e = Complex64::new(0.0, phi).exp();
    let miw = Complex64::new(0.0, -omega);
    [
        [Complex64::new(0.0, 0.0), miw * e],
        [miw * e.conj(), Complex64::new(0.0, 0.0)],
    ]
}

fn matvec(m: [[Complex64; 2]; 2], v: [Complex64; 2]) -> [Complex64; 2] {
    [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
}

/// Plain RK4 for `y' = M(t) y` over `[t0, t1]` in `n` steps.
pub fn rk4_linear2<F>(coeff: F, y0: [Complex64; 2], t0: f64, t1: f64, n: usize) -> [Complex64; 2]
where
    F: Fn(f64) -> [[Complex64; 2]; 2],
{
    let h = (t1 - t0) / n as f64;
    let mut y = y0;
    for k in 0..n {
        let t = t0 + k as f64 * h;
        let k1 = matvec(coeff(t), y);
        let k2 = matvec(
            coeff(t + 0.5 * h),
            [y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]],
        );
        let k3 = matvec(
            coeff(t + 0.5 * h),
            [y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]],
        );
        let k4 = matvec(coeff(t + h), [y[0] + h * k3[0], y[1] + h * k3[1]]);
        y = [
            y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        ];
    }
    y
}

/// Integrates with step halving until the result moves by less than `tol`
/// (in the max norm), starting from `n0` steps. Panics if 2^22 steps are not
/// enough — that would mean the oracle itself failed to converge.
pub fn rk4_linear2_converged<F>(
    coeff: F,
    y0: [Complex64; 2],
    t0: f64,
    t1: f64,
    n0: usize,
    tol: f64,
) -> [Complex64; 2]
where
    F: Fn(f64) -> [[Complex64; 2]; 2],
{
    let mut n = n0;
    let mut prev = rk4_linear2(&coeff, y0, t0, t1, n);
    loop {
        n *= 2;
        assert!(n <= 1 << 22, "oracle failed to converge to {tol}");
        let next = rk4_linear2(&coeff, y0, t0, t1, n);
        let delta = (next[0] - prev[0]).norm().max((next[1] - prev[1]).norm());
        if delta < tol {
            return next;
        }
        prev = next;
    }
}
