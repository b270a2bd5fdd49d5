//! Asymptotic intersection minima Ω and the covering corrections q̃, δ_MB.
//!
//! Throughout, a puncture sign ± selects the opposite extremal winding α∓,
//! weighted by ∓1.

use super::orbit::{OrbitCatalog, OrbitClass, Perturbation, Relation, Side};
use crate::error::{Error, Result};
use crate::halfint::Half;
use crate::surface_model::Sign;

/// The side and weight attached to a puncture sign.
pub fn side_of(sign: Sign) -> (Side, i64) {
    match sign {
        Sign::Plus => (Side::Minus, -1),
        Sign::Minus => (Side::Plus, 1),
    }
}

/// ∓α∓(γ + ε), with ε = 0 allowed on Morse-Bott orbits (unperturbed
/// extremal windings of the nonzero spectrum).
fn weighted(cat: &OrbitCatalog, o: &OrbitClass, eps: Perturbation, sign: Sign) -> Result<i64> {
    let (side, f) = side_of(sign);
    Ok(f * cat.alpha_side(o, eps, side)?)
}

/// Ω±(γᵐ + ε, γⁿ + ε′) = m·n·min{∓α∓(γᵐ+ε)/m, ∓α∓(γⁿ+ε′)/n}, or 0 for
/// geometrically distinct orbits.
pub fn omega_pair(
    cat: &OrbitCatalog,
    a: &OrbitClass,
    ea: Perturbation,
    b: &OrbitClass,
    eb: Perturbation,
    sign: Sign,
) -> Result<i64> {
    if cat.relation(a, b)? == Relation::Distinct {
        return Ok(0);
    }
    let (m, n) = (i64::from(a.cover), i64::from(b.cover));
    let (wa, wb) = (weighted(cat, a, ea, sign)?, weighted(cat, b, eb, sign)?);
    Ok((n * wa).min(m * wb))
}

/// Self-intersection analogue for the k-fold cover γᵏ.
pub fn omega_self(cat: &OrbitCatalog, o: &OrbitClass, sign: Sign) -> Result<i64> {
    let (side, _) = side_of(sign);
    let k = i64::from(o.cover);
    let cov = i64::from(cat.cov_extremal(o, side)?);
    Ok((k - 1) * weighted(cat, o, Perturbation::ZERO, sign)? + cov - 1)
}

/// q̃ for γᵐ + δ covered k times against γⁿ + ε: the defect in
/// Ω(γᵏᵐ + kδ, γⁿ + ε) = k·Ω(γᵐ + δ, γⁿ + ε) − q̃.
pub fn q_tilde(
    cat: &OrbitCatalog,
    gm: &OrbitClass,
    delta: Perturbation,
    gn: &OrbitClass,
    eps: Perturbation,
    k: u32,
    sign: Sign,
) -> Result<i64> {
    if gm.simple() != gn.simple() {
        return Err(Error::Precondition(format!(
            "q̃ needs two covers of one simple orbit, got `{}` and `{}`",
            gm.id, gn.id
        )));
    }
    let (side, _) = side_of(sign);
    let (m, n, k) = (i64::from(gm.cover), i64::from(gn.cover), i64::from(k));
    let a = weighted(cat, gm, delta, sign)?;
    let b = weighted(cat, gn, eps, sign)?;
    let q = cat.q_of_cover(gm, delta, k as u32, side)?;
    Ok((k * n * a).min(k * m * b) - (k * n * a - n * q).min(k * m * b))
}

/// Extra self-intersections hidden in a Morse-Bott family at an
/// unconstrained end. Zero for ε > 0 and for nondegenerate orbits.
pub fn delta_mb(cat: &OrbitCatalog, o: &OrbitClass, eps: Perturbation, sign: Sign) -> Result<Half> {
    if !eps.is_negative() || cat.kernel_dim(o)? == 0 {
        return Ok(Half::ZERO);
    }
    let (side, _) = side_of(sign);
    let gen = match &o.generic {
        Some(id) => cat.get(id)?,
        // Isotropy 1 means the orbit is itself generic in its family.
        None if o.isotropy() == 1 => o,
        None => {
            return Err(Error::Missing(format!(
                "exceptional Morse-Bott orbit `{}` needs a `generic` orbit for unconstrained ends",
                o.id
            )))
        }
    };
    let gen_id = &gen.id;
    let m = i64::from(o.isotropy());
    let k = i64::from(o.cover) / m;
    let nu = cat.nu_pm(o)?;
    let nu = if side == Side::Minus { nu.0 } else { nu.1 };
    let twice = k * (m - 1) * nu + i64::from(cat.cov_extremal(o, side)?) - i64::from(cat.cov_extremal(gen, side)?);
    if twice < 0 {
        return Err(Error::Consistency(format!(
            "δ_MB at `{}` would be negative; the generic orbit `{gen_id}` has larger extremal covering number",
            o.id
        )));
    }
    Ok(Half::from_doubled(twice))
}
