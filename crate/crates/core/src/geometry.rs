//! Exact area of a disc intersected with an axis-aligned rectangle.

use std::f64::consts::PI;

/// `∫_0^u √(r² − t²) dt` for `|u| ≤ r`.
fn s(u: f64, r: f64) -> f64 {
    let u = u.clamp(-r, r);
    0.5 * (u * (r * r - u * u).max(0.0).sqrt() + r * r * (u / r).clamp(-1.0, 1.0).asin())
}

/// `∫_a^b min(c, √(r² − t²)) dt` for `−r ≤ a ≤ b ≤ r` and `c ≥ 0`.
fn capped_chord(a: f64, b: f64, c: f64, r: f64) -> f64 {
    if c >= r {
        return s(b, r) - s(a, r);
    }
    let tc = (r * r - c * c).sqrt();
    let lo = a.max(-tc);
    let hi = b.min(tc);
    let flat = if hi > lo { c * (hi - lo) } else { 0.0 };
    let left = if a < -tc { s(b.min(-tc), r) - s(a, r) } else { 0.0 };
    let right = if b > tc { s(b, r) - s(a.max(tc), r) } else { 0.0 };
    flat + left + right
}

/// Area of `{|z| ≤ r} ∩ {z₁ ≤ x, z₂ ≤ y}` for a disc centred at the origin.
fn corner(x: f64, y: f64, r: f64) -> f64 {
    let x = x.clamp(-r, r);
    if x <= -r {
        return 0.0;
    }
    let half = s(x, r) - s(-r, r);
    let cap = capped_chord(-r, x, y.abs(), r);
    half + y.signum() * cap
}

/// Area of the disc of radius `r` centred at `c` inside `[x0, x1] × [y0, y1]`.
pub fn disc_rect_area(c: [f64; 2], r: f64, x0: f64, x1: f64, y0: f64, y1: f64) -> f64 {
    if r <= 0.0 || x1 <= x0 || y1 <= y0 {
        return 0.0;
    }
    let (x0, x1, y0, y1) = (x0 - c[0], x1 - c[0], y0 - c[1], y1 - c[1]);
    let a = corner(x1, y1, r) - corner(x0, y1, r) - corner(x1, y0, r) + corner(x0, y0, r);
    a.clamp(0.0, PI * r * r)
}

/// Fraction of the square cell of side `h` centred at `p` covered by the disc.
pub fn cell_fraction(c: [f64; 2], r: f64, p: [f64; 2], h: f64) -> f64 {
    let half = 0.5 * h;
    let dx = (p[0] - c[0]).abs();
    let dy = (p[1] - c[1]).abs();
    let near = (dx - half).max(0.0).hypot((dy - half).max(0.0));
    if near >= r {
        return 0.0;
    }
    let far = (dx + half).hypot(dy + half);
    if far <= r {
        return 1.0;
    }
    disc_rect_area(c, r, p[0] - half, p[0] + half, p[1] - half, p[1] + half) / (h * h)
}
