//! Log-likelihood (G²) keyness of a lemma in a text against a reference
//! corpus, and the chi-square(1) critical value used as its cut-off.

use crate::error::{Error, Result};

/// Occurrences of one lemma in a text (`k1` out of `n1` lemmas) and in the
/// reference corpus (`k2` out of `n2`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ContingencyCounts {
    pub k1: u64,
    pub n1: u64,
    pub k2: u64,
    pub n2: u64,
}

impl ContingencyCounts {
    pub fn new(k1: u64, n1: u64, k2: u64, n2: u64) -> Result<Self> {
        let counts = Self { k1, n1, k2, n2 };
        if counts.is_valid() {
            Ok(counts)
        } else {
            Err(Error::InvalidCounts { k1, n1, k2, n2 })
        }
    }

    pub fn is_valid(&self) -> bool {
        self.n1 > 0 && self.n2 > 0 && self.k1 <= self.n1 && self.k2 <= self.n2
    }

    /// `k1/n1 > k2/n2`, compared exactly.
    pub fn overrepresented(&self) -> bool {
        (self.k1 as u128) * (self.n2 as u128) > (self.k2 as u128) * (self.n1 as u128)
    }
}

/// Dunning's log-likelihood ratio for the 2×2 table
/// `[[k1, n1-k1], [k2, n2-k2]]`, natural log, with `0·ln 0 = 0`.
pub fn g2(counts: ContingencyCounts) -> Result<f64> {
    if !counts.is_valid() {
        let ContingencyCounts { k1, n1, k2, n2 } = counts;
        return Err(Error::InvalidCounts { k1, n1, k2, n2 });
    }
    Ok(g2_unchecked(counts))
}

/// G² written as `2 Σ E·φ(O/E)` with `φ(r) = r ln r − r + 1`, which is the
/// usual `2 Σ O ln(O/E)` plus the vanishing `Σ (E − O)`. Every cell deviates
/// from its expectation by `±D/N` with the exact integer
/// `D = k1·n2 − k2·n1`, so each term is evaluated from an exact relative
/// deviation and no large terms cancel.
pub(crate) fn g2_unchecked(c: ContingencyCounts) -> f64 {
    let ContingencyCounts { k1, n1, k2, n2 } = c;
    let d = (k1 as i128) * (n2 as i128) - (k2 as i128) * (n1 as i128);
    if d == 0 {
        return 0.0;
    }
    let total = (n1 + n2) as f64;
    let col_hit = k1 + k2;
    let col_miss = (n1 - k1) + (n2 - k2);
    // (observed, row total, column total, sign of O - E)
    let cells = [
        (k1, n1, col_hit, 1.0),
        (n1 - k1, n1, col_miss, -1.0),
        (k2, n2, col_hit, -1.0),
        (n2 - k2, n2, col_miss, 1.0),
    ];
    let d = d as f64;
    let mut sum = 0.0;
    for (observed, row, col, sign) in cells {
        if row == 0 || col == 0 {
            continue;
        }
        let row_col = (row as f64) * (col as f64);
        let expected = row_col / total;
        if observed == 0 {
            sum += expected;
        } else {
            sum += expected * phi(sign * d / row_col);
        }
    }
    (2.0 * sum).max(0.0)
}

/// `φ(1 + δ) = (1 + δ) ln(1 + δ) − δ`.
fn phi(delta: f64) -> f64 {
    if delta.abs() < 0.125 {
        // Σ_{n≥2} (−δ)^n / (n (n − 1))
        let mut sum = 0.0;
        let mut power = delta * delta;
        let mut n = 2.0;
        while n < 60.0 {
            let term = power / (n * (n - 1.0));
            sum += term;
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
            power *= -delta;
            n += 1.0;
        }
        sum
    } else {
        (1.0 + delta) * delta.ln_1p() - delta
    }
}

/// Critical value `c` with `P(X > c) = p` for `X ~ χ²(1)`.
pub fn g2_threshold(p_value: f64) -> Result<f64> {
    if !(p_value > 0.0 && p_value <= 1.0) {
        return Err(Error::InvalidPValue(p_value));
    }
    if p_value == 1.0 {
        return Ok(0.0);
    }
    let mut lo = 0.0_f64;
    let mut hi = 1.0_f64;
    while chi2_1_survival(hi) > p_value {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if chi2_1_survival(mid) > p_value {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Upper tail of chi-square with one degree of freedom.
pub fn chi2_1_survival(x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else {
        erfc((0.5 * x).sqrt())
    }
}

const FRAC_2_SQRT_PI: f64 = std::f64::consts::FRAC_2_SQRT_PI;

/// Complementary error function for `x >= 0`: series below 2.5, continued
/// fraction above. Accurate to a few ulp of relative error over the range
/// the threshold search visits.
fn erfc(x: f64) -> f64 {
    debug_assert!(x >= 0.0);
    if x < 2.5 {
        // erf(x) = 2/√π · e^{-x²} · Σ (2x²)^n x / (1·3·…·(2n+1))
        let x2 = x * x;
        let mut term = x;
        let mut sum = x;
        let mut n = 0.0;
        loop {
            n += 1.0;
            term *= 2.0 * x2 / (2.0 * n + 1.0);
            sum += term;
            if term <= 1e-17 * sum {
                break;
            }
        }
        1.0 - FRAC_2_SQRT_PI * (-x2).exp() * sum
    } else {
        // erfc(x) = e^{-x²}/√π · 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + …))))
        let mut frac = x;
        for k in (1..=80).rev() {
            frac = x + (k as f64 / 2.0) / frac;
        }
        0.5 * FRAC_2_SQRT_PI * (-x * x).exp() / frac
    }
}
