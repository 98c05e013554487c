//! Separable interpolation stencils on regular grids.
//!
//! Interpolation and gradient scatter share the same weight computation so
//! the scatter is the exact transpose of the lookup.

/// Per-axis stencil: node indices (clamped), weights, and weight derivatives
/// with respect to the continuous grid coordinate u.
#[derive(Debug, Clone, Copy)]
pub struct AxisStencil<const N: usize> {
    pub idx: [usize; N],
    pub w: [f64; N],
    pub dw: [f64; N],
}

/// Cubic B-spline stencil at continuous coordinate `u` on an axis with `n`
/// nodes (nodes sit at integer u in [0, n-1]). Out-of-range coordinates are
/// clamped, which also realizes boundary replication of control points.
pub fn bspline_stencil(u: f64, n: usize) -> AxisStencil<4> {
    debug_assert!(n >= 2);
    let u = u.clamp(0.0, (n - 1) as f64);
    let mut i0 = u.floor() as i64;
    // u == n-1 lands exactly on the last node; keep t in [0,1).
    if i0 > (n - 2) as i64 {
        i0 = (n - 2) as i64;
    }
    let t = u - i0 as f64;
    let t2 = t * t;
    let t3 = t2 * t;

    let w = [
        (1.0 - t) * (1.0 - t) * (1.0 - t) / 6.0,
        (3.0 * t3 - 6.0 * t2 + 4.0) / 6.0,
        (-3.0 * t3 + 3.0 * t2 + 3.0 * t + 1.0) / 6.0,
        t3 / 6.0,
    ];
    let dw = [
        -(1.0 - t) * (1.0 - t) / 2.0,
        (3.0 * t2 - 4.0 * t) / 2.0,
        (-3.0 * t2 + 2.0 * t + 1.0) / 2.0,
        t2 / 2.0,
    ];

    let mut idx = [0usize; 4];
    for (k, slot) in idx.iter_mut().enumerate() {
        *slot = (i0 + k as i64 - 1).clamp(0, (n - 1) as i64) as usize;
    }
    AxisStencil { idx, w, dw }
}

/// Linear interpolation stencil with the same clamping rules.
pub fn linear_stencil(u: f64, n: usize) -> AxisStencil<2> {
    debug_assert!(n >= 2);
    let u = u.clamp(0.0, (n - 1) as f64);
    let mut i0 = u.floor() as i64;
    if i0 > (n - 2) as i64 {
        i0 = (n - 2) as i64;
    }
    let t = u - i0 as f64;
    AxisStencil {
        idx: [i0 as usize, i0 as usize + 1],
        w: [1.0 - t, t],
        dw: [-1.0, 1.0],
    }
}
