//! Golden-section search for unimodal functions on a closed interval.

const INV_PHI: f64 = 0.618_033_988_749_894_8;

#[derive(Debug, Clone, Copy)]
pub struct GoldenResult {
    pub x: f64,
    pub value: f64,
    /// Width of the final bracket.
    pub bracket: f64,
    pub evaluations: usize,
}

/// Maximizes `f` on `[lo, hi]`, stopping once the bracket is narrower than `width`.
pub fn golden_section_max(f: impl Fn(f64) -> f64, lo: f64, hi: f64, width: f64) -> GoldenResult {
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut evaluations = 2;
    while b - a > width {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        evaluations += 1;
        // Degenerate bracket once the width reaches floating resolution.
        if c >= d {
            break;
        }
    }
    let (x, value) = if fc >= fd { (c, fc) } else { (d, fd) };
    GoldenResult {
        x,
        value,
        bracket: b - a,
        evaluations,
    }
}

/// Minimizes `f` on `[lo, hi]`.
pub fn golden_section_min(f: impl Fn(f64) -> f64, lo: f64, hi: f64, width: f64) -> GoldenResult {
    let r = golden_section_max(|x| -f(x), lo, hi, width);
    GoldenResult {
        value: -r.value,
        ..r
    }
}
