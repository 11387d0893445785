//! Executable versions of the four counterexamples: a zero subgradient away
//! from the minimum, blow-up on the full unit ball, a quasiconvex function
//! breaking the bound, and the failure on an asymmetric domain.

use serde_json::json;

use crate::convex_geometry::{check_symmetry, vector, ConvexSet, Gauge, Halfspace};
use crate::error::{Error, Result};
use crate::function::ScalarFunction;
use crate::lipschitz::{bound, empirical_constant_on_pairs, theoretical_constant};
use crate::subdifferential::is_subgradient;

/// Probe indices for the unit-ball blow-up.
pub const BLOWUP_N: [u32; 4] = [4, 16, 64, 256];

fn centred(set: ConvexSet, c: &[f64]) -> Result<Gauge> {
    Gauge::new(set.with_center(vector(c))?)
}

/// `x^2 + y^2` with `mu(x, y) = |x|`: `0` is a subgradient at every `(0, y)`.
pub fn zero_subgradient_off_minimum() -> Result<serde_json::Value> {
    let f = ScalarFunction::from_expr("x1^2 + x2^2", 2)?;
    let strip = ConvexSet::halfspaces(
        2,
        vec![
            Halfspace {
                normal: vector(&[1.0, 0.0]),
                offset: 1.0,
            },
            Halfspace {
                normal: vector(&[-1.0, 0.0]),
                offset: 1.0,
            },
        ],
    )?;
    let g = centred(strip, &[0.0, 0.0])?;
    let zero = vector(&[0.0, 0.0]);
    let mut points = Vec::new();
    let mut all_zero = true;
    for y in [-1.0, 0.0, 0.7] {
        let u = vector(&[0.0, y]);
        let holds = is_subgradient(&f, &g, &u, &zero, 64)?;
        all_zero &= holds;
        points.push(json!({ "point": [0.0, y], "value": f.value(&u)?, "zero_in_subdifferential": holds }));
    }
    let not_minimum = f.value(&vector(&[0.0, 0.0]))? < f.value(&vector(&[0.0, 0.7]))?;
    let kernel_flagged = matches!(
        empirical_constant_on_pairs(&f, &g, &[(vector(&[0.0, 0.0]), vector(&[0.0, 0.7]))]),
        Err(Error::KernelViolation { .. })
    );
    Ok(json!({
        "name": "zero_subgradient_off_minimum",
        "function": f.name(),
        "gauge": "|x1|",
        "kernel_dim": g.kernel().dim(),
        "points": points,
        "point_0_0.7_not_minimum": not_minimum,
        "kernel_violation_across_y": kernel_flagged,
        "reproduced": all_zero && not_minimum && kernel_flagged,
    }))
}

/// `-sqrt(1 - |x|)` on `[-1, 1]`: the slope on `[1 - 1/n, 1]` is at least
/// `sqrt(n)/2`, so no constant works on the whole unit ball.
pub fn unit_ball_blowup() -> Result<serde_json::Value> {
    let f = ScalarFunction::from_expr("-sqrt(1 - abs(x1))", 1)?;
    let g = centred(ConvexSet::interval(-1.0, 1.0)?, &[0.0])?;
    let mut probes = Vec::new();
    let mut all = true;
    for n in BLOWUP_N {
        let n = n as f64;
        let pair = (vector(&[1.0 - 1.0 / n]), vector(&[1.0]));
        let l = empirical_constant_on_pairs(&f, &g, &[pair])?;
        let floor = n.sqrt() / 2.0;
        all &= l >= floor;
        probes.push(json!({ "n": n, "empirical_L": l, "lower_bound": floor, "exceeds": l >= floor }));
    }
    Ok(json!({
        "name": "unit_ball_blowup",
        "function": f.name(),
        "set": "[-1, 1]",
        "probes": probes,
        "reproduced": all,
    }))
}

/// `floor(x)` on `[-1, 1]` is quasiconvex; the pairs `±1/n` give quotients
/// `n/2`, which exceed the convex bound at `eps = 1/2`.
pub fn quasiconvex_floor() -> Result<serde_json::Value> {
    let f = ScalarFunction::from_expr("floor(x1)", 1)?;
    let c = ConvexSet::interval(-1.0, 1.0)?;
    let eps = 0.5;
    let cert = theoretical_constant(&f, &c, &vector(&[0.0]), eps)?;
    let g = cert.gauge.clone();
    let mut probes = Vec::new();
    let mut worst = 0.0f64;
    for n in [2u32, 4, 8, 16, 64, 256] {
        let n = n as f64;
        let l = empirical_constant_on_pairs(&f, &g, &[(vector(&[-1.0 / n]), vector(&[1.0 / n]))])?;
        worst = worst.max(l);
        probes.push(json!({ "n": n, "quotient": l }));
    }
    let limit = bound(cert.m, eps);
    Ok(json!({
        "name": "quasiconvex_floor",
        "function": f.name(),
        "epsilon": eps,
        "M": cert.m,
        "convex_bound": limit,
        "probes": probes,
        "max_quotient": worst,
        "reproduced": worst > limit,
    }))
}

/// `-x` on `[-1, inf)`: the gauge of `C - p` (`p` in the interior) vanishes on
/// `[0, inf)` and equals `-x / (1 + p)` below `0`;
/// the gauge of `C - C = R` vanishes everywhere.
pub fn asymmetric_domain() -> Result<serde_json::Value> {
    let f = ScalarFunction::from_expr("-x1", 1)?;
    let c = ConvexSet::halfspaces(
        1,
        vec![Halfspace {
            normal: vector(&[-1.0]),
            offset: 1.0,
        }],
    )?;
    let mut centres = Vec::new();
    let mut ok = true;
    for p in [-0.5, 0.0, 3.0] {
        let g = centred(c.clone(), &[p])?;
        let (up, down) = (g.eval(&vector(&[1.0]))?, g.eval(&vector(&[-1.0]))?);
        let symmetric = check_symmetry(&c, &vector(&[p]), 64)?;
        let flagged = matches!(
            empirical_constant_on_pairs(&f, &g, &[(vector(&[p + 1.0]), vector(&[p]))]),
            Err(Error::KernelViolation { .. })
        );
        ok &= up.abs() <= 1e-8 && (down - 1.0 / (1.0 + p)).abs() <= 1e-8 && !symmetric && flagged;
        centres.push(json!({
            "p": p,
            "mu(1)": up,
            "mu(-1)": down,
            "symmetric": symmetric,
            "kernel_violation": flagged,
        }));
    }
    let rejected = matches!(
        theoretical_constant(&f, &c, &vector(&[0.0]), 0.5),
        Err(Error::AsymmetricSet)
    );
    let diff = centred(ConvexSet::whole_space(1), &[0.0])?;
    let nu = diff.eval(&vector(&[1.0]))?;
    Ok(json!({
        "name": "asymmetric_domain",
        "function": f.name(),
        "set": "[-1, inf)",
        "centres": centres,
        "certificate_rejected": rejected,
        "difference_gauge_at_1": nu,
        "reproduced": ok && rejected && nu == 0.0,
    }))
}

/// All four sections, in a fixed order.
pub fn counterexample_suite() -> Result<serde_json::Value> {
    let sections = vec![
        zero_subgradient_off_minimum()?,
        unit_ball_blowup()?,
        quasiconvex_floor()?,
        asymmetric_domain()?,
    ];
    let all = sections.iter().all(|s| s["reproduced"] == true);
    Ok(json!({ "sections": sections, "all_reproduced": all }))
}
