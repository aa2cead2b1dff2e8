//! Finite-blocklength power accounting for the AWGN channel (normal
//! approximation).

use crate::error::{Error, Result};
use crate::special::{db_to_linear, linear_to_db, q_inverse};

pub const P_BRACKET: (f64, f64) = (1e-6, 1e6);

/// `½ lg(1 + P)` bits per channel use.
pub fn awgn_capacity(p: f64) -> Result<f64> {
    check_power(p)?;
    Ok(0.5 * (1.0 + p).log2())
}

/// `P(P + 2) / (2(P + 1)²) · (lg e)²` bits² per channel use.
pub fn awgn_dispersion(p: f64) -> Result<f64> {
    check_power(p)?;
    let log2e = std::f64::consts::LOG2_E;
    Ok(p * (p + 2.0) / (2.0 * (p + 1.0) * (p + 1.0)) * log2e * log2e)
}

fn check_power(p: f64) -> Result<()> {
    if p >= 0.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::param(format!("power must be finite and nonnegative, got {p}")))
    }
}

/// `C(P) − √(V(P)/n′)·Q⁻¹(ε) − bits/n′`; increasing in `P` on the bracket.
pub fn rate_gap(p: f64, bits: f64, blocklength: f64, eps: f64) -> Result<f64> {
    Ok(awgn_capacity(p)? - (awgn_dispersion(p)? / blocklength).sqrt() * q_inverse(eps)
        - bits / blocklength)
}

/// Smallest power at which `bits` can be sent in `blocklength` uses with
/// error probability `eps`.
pub fn solve_p_star(bits: f64, blocklength: usize, eps: f64) -> Result<f64> {
    if !(bits > 0.0) || blocklength == 0 {
        return Err(Error::param("bits and blocklength must be positive"));
    }
    if !(eps > 0.0 && eps <= 0.5) {
        return Err(Error::param(format!("eps must lie in (0, 1/2], got {eps}")));
    }
    let n = blocklength as f64;
    let (mut lo, mut hi) = P_BRACKET;
    let g_lo = rate_gap(lo, bits, n, eps)?;
    let g_hi = rate_gap(hi, bits, n, eps)?;
    if g_lo > 0.0 || g_hi < 0.0 {
        return Err(Error::Infeasible(format!(
            "no power in [{lo:e}, {hi:e}] carries {bits} bits over {blocklength} uses at eps {eps}"
        )));
    }
    // bisect in log P: the bracket spans twelve decades
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if mid <= lo || mid >= hi {
            break;
        }
        if rate_gap(mid, bits, n, eps)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// Total energy per information bit, linear: `(½n′P* + J·ε_b1) / B`, where
/// `ε_b1` is the phase-one `E_b/N_0` (linear).
pub fn total_ebn0(
    message_bits: usize,
    prefix_bits: usize,
    slot_len: usize,
    p_star: f64,
    phase1_ebn0: f64,
) -> Result<f64> {
    if message_bits == 0 {
        return Err(Error::param("message must carry at least one bit"));
    }
    if !(p_star >= 0.0 && phase1_ebn0 >= 0.0) {
        return Err(Error::param("power and energy must be nonnegative"));
    }
    Ok((0.5 * slot_len as f64 * p_star + prefix_bits as f64 * phase1_ebn0) / message_bits as f64)
}

/// [`total_ebn0`] with the phase-one energy and result in dB.
pub fn total_ebn0_db(
    message_bits: usize,
    prefix_bits: usize,
    slot_len: usize,
    p_star: f64,
    phase1_ebn0_db: f64,
) -> Result<f64> {
    total_ebn0(
        message_bits,
        prefix_bits,
        slot_len,
        p_star,
        db_to_linear(phase1_ebn0_db),
    )
    .map(linear_to_db)
}
