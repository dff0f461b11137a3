use crate::error::{Error, Result};

/// The biased density on `[−H, H]` that oversamples near the ends:
/// `D(t) = c/(1 − |t|/H)` on `|t| ≤ H(1 − 1/k)` and `c·k` on the two edge
/// bands, with `c^{-1} = 2H(ln k + 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiasedTimeDensity {
    half_width: f64,
    k: f64,
    c: f64,
}

impl BiasedTimeDensity {
    pub fn new(half_width: f64, k: f64) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "half-width must be positive, got {half_width}"
            )));
        }
        if !(k >= 1.0 && k.is_finite()) {
            return Err(Error::InvalidArgument(format!("k must be at least 1, got {k}")));
        }
        let c = 1.0 / (2.0 * half_width * (k.ln() + 1.0));
        Ok(Self { half_width, k, c })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn normalizer(&self) -> f64 {
        self.c
    }

    /// Where the logarithmic core ends and the flat band starts.
    fn core_edge(&self) -> f64 {
        self.half_width * (1.0 - 1.0 / self.k)
    }

    fn core_mass(&self) -> f64 {
        self.c * self.half_width * self.k.ln()
    }

    pub fn pdf(&self, t: f64) -> f64 {
        let a = t.abs();
        if a > self.half_width {
            0.0
        } else if a <= self.core_edge() {
            self.c / (1.0 - a / self.half_width)
        } else {
            self.c * self.k
        }
    }

    /// Mass of `[0, a]` for `0 ≤ a ≤ H`.
    fn half_mass(&self, a: f64) -> f64 {
        let h = self.half_width;
        if a <= self.core_edge() {
            -self.c * h * (-a / h).ln_1p()
        } else {
            self.core_mass() + self.c * self.k * (a - self.core_edge())
        }
    }

    pub fn cdf(&self, t: f64) -> f64 {
        if t <= -self.half_width {
            return 0.0;
        }
        if t >= self.half_width {
            return 1.0;
        }
        let m = self.half_mass(t.abs());
        if t >= 0.0 {
            0.5 + m
        } else {
            0.5 - m
        }
    }

    /// Closed-form inverse of [`cdf`](Self::cdf) for `u ∈ [0, 1]`.
    pub fn inverse_cdf(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        let m = (u - 0.5).abs();
        let h = self.half_width;
        let core = self.core_mass();
        let a = if m <= core {
            -h * (-m / (self.c * h)).exp_m1()
        } else {
            (self.core_edge() + (m - core) / (self.c * self.k)).min(h)
        };
        if u >= 0.5 {
            a
        } else {
            -a
        }
    }
}
