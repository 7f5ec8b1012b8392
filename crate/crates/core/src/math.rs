//! Thin `libm` wrappers so the rest of the crate reads like ordinary float code
//! without `std`.

pub use core::f64::consts::PI;

pub const TWO_PI: f64 = 2.0 * PI;

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn sin(x: f64) -> f64 {
    libm::sin(x)
}

#[inline]
pub fn cos(x: f64) -> f64 {
    libm::cos(x)
}

#[inline]
pub fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[inline]
pub fn powi(x: f64, n: i32) -> f64 {
    libm::pow(x, n as f64)
}

#[inline]
pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}

#[inline]
pub fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}

#[inline]
pub fn tgamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// `n` log-spaced samples between `a` and `b` inclusive (`a, b > 0`).
pub fn geomspace(a: f64, b: f64, n: usize) -> alloc::vec::Vec<f64> {
    if n == 1 {
        return alloc::vec![a];
    }
    let (la, lb) = (ln(a), ln(b));
    (0..n)
        .map(|i| {
            if i == n - 1 {
                b
            } else {
                exp(la + (lb - la) * i as f64 / (n - 1) as f64)
            }
        })
        .collect()
}

/// Golden-section search for a minimum of a unimodal `f` on `[a, b]`;
/// returns `(argmin, min)`.
pub fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, iters: usize) -> (f64, f64) {
    let r = 0.5 * (sqrt(5.0) - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..iters {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}
