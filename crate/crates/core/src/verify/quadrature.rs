//! Adaptive Simpson quadrature, including a semi-infinite variant that walks
//! geometrically growing intervals until the remaining mass is negligible.

const MAX_DEPTH: u32 = 48;

pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    refine(f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH)
}

#[allow(clippy::too_many_arguments)]
fn refine<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol.max(f64::EPSILON * whole.abs()) {
        return left + right + delta / 15.0;
    }
    refine(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + refine(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// `int_0^inf f`, for integrands that are eventually decreasing. Integrates
/// `[0,1]`, `[1,2]`, `[2,4]`, ... and stops after three consecutive pieces
/// each below `rel_tol` of the running total.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(f: F, rel_tol: f64) -> f64 {
    let mut total = adaptive_simpson(&f, 0.0, 1.0, rel_tol);
    let mut quiet = 0;
    let mut lo = 1.0f64;
    for _ in 0..1000 {
        let hi = 2.0 * lo;
        let piece = adaptive_simpson(&f, lo, hi, rel_tol * total.abs().max(f64::MIN_POSITIVE));
        total += piece;
        if piece.abs() <= rel_tol * total.abs() {
            quiet += 1;
            if quiet == 3 {
                break;
            }
        } else {
            quiet = 0;
        }
        lo = hi;
    }
    total
}
