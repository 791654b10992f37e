//! Bracketed scalar root finding.

/// Bisection down to a narrow bracket, then Illinois false position.
///
/// `f(lo)` and `f(hi)` must have opposite signs (or one of them be zero).
/// Returns `None` when they do not. The bracket is kept at every step, so the
/// result always lies in `[lo, hi]`.
pub fn bracketed_root<F>(mut f: F, lo: f64, hi: f64, max_iter: usize) -> Option<f64>
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Some(a);
    }
    if fb == 0.0 {
        return Some(b);
    }
    if fa.is_nan() || fb.is_nan() || fa.signum() == fb.signum() {
        return None;
    }

    const SWITCH_WIDTH: f64 = 1e-2;
    let mut side = 0i8;
    for _ in 0..max_iter {
        let width = b - a;
        let scale = a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
        if width <= 4.0 * f64::EPSILON * scale {
            break;
        }
        let narrow = width <= SWITCH_WIDTH * scale && a != 0.0 && b != 0.0;
        let mut c = if narrow {
            (a * fb - b * fa) / (fb - fa)
        } else {
            0.5 * (a + b)
        };
        if !(c > a && c < b) {
            c = 0.5 * (a + b);
            if !(c > a && c < b) {
                break;
            }
        }
        let fc = f(c);
        if fc == 0.0 {
            return Some(c);
        }
        if fc.is_nan() {
            return None;
        }
        if fc.signum() == fa.signum() {
            a = c;
            fa = fc;
            if narrow && side == -1 {
                fb *= 0.5;
            }
            side = -1;
        } else {
            b = c;
            fb = fc;
            if narrow && side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
    }
    Some(if fa.abs() < fb.abs() { a } else { b })
}
