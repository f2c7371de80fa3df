//! The lifted trilinear variable `z ~ x_i x_j x_k`, its hull rows and the
//! rotated-cone caps built on it.

use std::collections::HashSet;

use crate::cuts::poly::LocalForm;
use crate::cuts::SwitchPattern;
use crate::model::{MomentPoint, Triple};

/// Arguments of a square root below `-NEG_ARG_TOL` make a cap infeasible.
const NEG_ARG_TOL: f64 = 1e-9;

/// The eight linear inequalities (`form >= 0`) describing the convex hull of
/// `(x, x_a x_b, x_0 x_1 x_2)` over the unit cube.
pub fn trilinear_hull_rows() -> [LocalForm; 8] {
    let f = |c: [f64; 3], off: [f64; 3], z: f64, b: f64| LocalForm {
        c,
        diag: [0.0; 3],
        off,
        z,
        b,
    };
    [
        f([0.0; 3], [0.0; 3], 1.0, 0.0),
        f([0.0; 3], [1.0, 0.0, 0.0], -1.0, 0.0),
        f([0.0; 3], [0.0, 1.0, 0.0], -1.0, 0.0),
        f([0.0; 3], [0.0, 0.0, 1.0], -1.0, 0.0),
        f([1.0, 0.0, 0.0], [-1.0, -1.0, 0.0], 1.0, 0.0),
        f([0.0, 1.0, 0.0], [-1.0, 0.0, -1.0], 1.0, 0.0),
        f([0.0, 0.0, 1.0], [0.0, -1.0, -1.0], 1.0, 0.0),
        f([-1.0; 3], [1.0; 3], -1.0, 1.0),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CapKind {
    /// From `z^2 <= X_00 X_12`.
    Product,
    /// From `(X_01 + z)^2 <= X_00 (X_11 + 3 X_12)`.
    Etri3,
}

/// `alpha^2 <= beta * gamma` with `beta, gamma >= 0`, in local coordinates.
/// `alpha` is `+-z` plus terms free of `z`; `beta` and `gamma` do not use `z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SocCap {
    pub kind: CapKind,
    pub pattern: SwitchPattern,
    pub alpha: LocalForm,
    pub beta: LocalForm,
    pub gamma: LocalForm,
}

impl SocCap {
    fn base(kind: CapKind) -> SocCap {
        let (alpha, beta, gamma) = match kind {
            CapKind::Product => (
                LocalForm {
                    z: 1.0,
                    ..Default::default()
                },
                LocalForm {
                    diag: [1.0, 0.0, 0.0],
                    ..Default::default()
                },
                LocalForm {
                    off: [0.0, 0.0, 1.0],
                    ..Default::default()
                },
            ),
            CapKind::Etri3 => (
                LocalForm {
                    off: [1.0, 0.0, 0.0],
                    z: 1.0,
                    ..Default::default()
                },
                LocalForm {
                    diag: [1.0, 0.0, 0.0],
                    ..Default::default()
                },
                LocalForm {
                    diag: [0.0, 1.0, 0.0],
                    off: [0.0, 0.0, 3.0],
                    ..Default::default()
                },
            ),
        };
        SocCap {
            kind,
            pattern: SwitchPattern::IDENTITY,
            alpha,
            beta,
            gamma,
        }
    }

    fn switched(&self, pattern: &SwitchPattern) -> SocCap {
        SocCap {
            kind: self.kind,
            pattern: self.pattern.then(pattern),
            alpha: self.alpha.switched(pattern),
            beta: self.beta.switched(pattern),
            gamma: self.gamma.switched(pattern),
        }
    }

    fn key(&self) -> Vec<i64> {
        let flat = |f: &LocalForm| -> Vec<i64> {
            f.c.iter()
                .chain(&f.diag)
                .chain(&f.off)
                .chain([&f.z, &f.b])
                .map(|v| v.round() as i64)
                .collect()
        };
        let sign = if self.alpha.z < 0.0 { -1.0 } else { 1.0 };
        let mut bg = [flat(&self.beta), flat(&self.gamma)];
        bg.sort();
        let mut key = flat(&self.alpha.scale(sign));
        key.extend(bg.concat());
        key
    }

    /// `alpha^2 - beta * gamma`, or `+inf` when `beta` or `gamma` is negative.
    pub fn violation(&self, x: &[f64; 3], xx: &[[f64; 3]; 3], z: f64) -> f64 {
        let (a, b, g) = (
            self.alpha.eval(x, xx, z),
            self.beta.eval(x, xx, 0.0),
            self.gamma.eval(x, xx, 0.0),
        );
        if b < -NEG_ARG_TOL || g < -NEG_ARG_TOL {
            return f64::INFINITY;
        }
        a * a - b.max(0.0) * g.max(0.0)
    }

    /// The range of `z` allowed by this cap alone, `None` if no `z` works.
    pub fn z_range(&self, x: &[f64; 3], xx: &[[f64; 3]; 3]) -> Option<(f64, f64)> {
        let (b, g) = (self.beta.eval(x, xx, 0.0), self.gamma.eval(x, xx, 0.0));
        if b < -NEG_ARG_TOL || g < -NEG_ARG_TOL {
            return None;
        }
        let r = (b.max(0.0) * g.max(0.0)).sqrt();
        let s = self.alpha.z;
        let a = self.alpha.eval(x, xx, 0.0);
        let (lo, hi) = ((-r - a) / s, (r - a) / s);
        Some((lo.min(hi), lo.max(hi)))
    }
}

/// Which caps a block carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CapSet {
    pub product: bool,
    pub etri3: bool,
    /// Include switchings; otherwise only index permutations.
    pub switched: bool,
}

impl Default for CapSet {
    fn default() -> Self {
        CapSet {
            product: true,
            etri3: true,
            switched: true,
        }
    }
}

impl CapSet {
    pub fn product_only() -> Self {
        CapSet {
            etri3: false,
            ..Default::default()
        }
    }

    pub fn etri3_only() -> Self {
        CapSet {
            product: false,
            ..Default::default()
        }
    }

    /// All distinct caps in this set, in a fixed order.
    pub fn caps(&self) -> Vec<SocCap> {
        let mut kinds = Vec::new();
        if self.product {
            kinds.push(CapKind::Product);
        }
        if self.etri3 {
            kinds.push(CapKind::Etri3);
        }
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for kind in kinds {
            let base = SocCap::base(kind);
            for p in SwitchPattern::all() {
                if !self.switched && p.flip_mask() != 0 {
                    continue;
                }
                let cap = base.switched(&p);
                if seen.insert(cap.key()) {
                    out.push(cap);
                }
            }
        }
        out
    }
}

/// A `z` variable on `triple` with its hull rows and a set of caps.
#[derive(Debug, Clone, PartialEq)]
pub struct TrilinearBlock {
    pub triple: Triple,
    pub caps: Vec<SocCap>,
}

impl TrilinearBlock {
    pub fn new(triple: Triple, caps: Vec<SocCap>) -> Self {
        TrilinearBlock { triple, caps }
    }

    pub fn full(triple: Triple, set: &CapSet) -> Self {
        TrilinearBlock {
            triple,
            caps: set.caps(),
        }
    }
}

/// Bounds on `z` implied at a fixed `(x, X)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZInterval {
    pub lower: f64,
    pub upper: f64,
}

impl ZInterval {
    pub fn is_empty(&self, tol: f64) -> bool {
        self.lower > self.upper + tol
    }

    pub fn gap(&self) -> f64 {
        self.lower - self.upper
    }
}

/// Local `(x, X)` of `p` on `triple`.
pub fn local_values(p: &MomentPoint, triple: Triple) -> ([f64; 3], [[f64; 3]; 3]) {
    let idx = [triple.0, triple.1, triple.2];
    let x = idx.map(|i| p.x[i]);
    let xx = std::array::from_fn(|a| std::array::from_fn(|b| p.lifted(idx[a], idx[b])));
    (x, xx)
}

/// Interval for `z` on `triple` from the hull rows and `caps`. A cap whose
/// square root has a negative argument makes the upper end `-inf`.
pub fn soc_z_interval(p: &MomentPoint, triple: Triple, caps: &[SocCap]) -> ZInterval {
    let (x, xx) = local_values(p, triple);
    interval_local(&x, &xx, caps)
}

pub(crate) fn interval_local(x: &[f64; 3], xx: &[[f64; 3]; 3], caps: &[SocCap]) -> ZInterval {
    let mut lower = f64::NEG_INFINITY;
    let mut upper = f64::INFINITY;
    for row in trilinear_hull_rows() {
        let rest = row.eval(x, xx, 0.0);
        // row.z * z + rest >= 0
        if row.z > 0.0 {
            lower = lower.max(-rest / row.z);
        } else {
            upper = upper.min(-rest / row.z);
        }
    }
    for cap in caps {
        match cap.z_range(x, xx) {
            Some((lo, hi)) => {
                lower = lower.max(lo);
                upper = upper.min(hi);
            }
            None => upper = f64::NEG_INFINITY,
        }
    }
    ZInterval { lower, upper }
}

/// Caps whose own `z` range misses the hull interval by more than `tol`.
pub fn conflicting_caps(p: &MomentPoint, triple: Triple, caps: &[SocCap], tol: f64) -> Vec<usize> {
    let (x, xx) = local_values(p, triple);
    let hull = interval_local(&x, &xx, &[]);
    caps.iter()
        .enumerate()
        .filter(|(_, c)| match c.z_range(&x, &xx) {
            None => true,
            Some((lo, hi)) => lo > hull.upper + tol || hi < hull.lower - tol,
        })
        .map(|(i, _)| i)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cap_counts() {
        assert_eq!(CapSet::product_only().caps().len(), 24);
        assert_eq!(CapSet::etri3_only().caps().len(), 48);
        assert_eq!(CapSet::default().caps().len(), 72);
        let unswitched = CapSet {
            switched: false,
            ..Default::default()
        };
        assert_eq!(unswitched.caps().len(), 3 + 6);
        for cap in CapSet::default().caps() {
            assert_eq!(cap.alpha.z.abs(), 1.0);
            assert_eq!(cap.beta.z, 0.0);
            assert_eq!(cap.gamma.z, 0.0);
        }
    }

    #[test]
    fn caps_hold_on_rank_one_lifts() {
        let caps = CapSet::default().caps();
        for m in 0..125 {
            let x = [m % 5, m / 5 % 5, m / 25].map(|v| v as f64 / 4.0);
            let xx = std::array::from_fn(|a| std::array::from_fn(|b| x[a] * x[b]));
            let z = x[0] * x[1] * x[2];
            for cap in &caps {
                assert!(cap.violation(&x, &xx, z) <= 1e-12, "{cap:?} at {x:?}");
            }
            let iv = interval_local(&x, &xx, &caps);
            assert!(iv.lower <= z + 1e-12 && z <= iv.upper + 1e-12);
        }
    }

    #[test]
    fn interval_examples() {
        let caps = CapSet::default().caps();
        let ones = MomentPoint::rank_one(&[1.0, 1.0, 1.0], false);
        let iv = soc_z_interval(&ones, (0, 1, 2), &caps);
        assert!((iv.lower - 1.0).abs() < 1e-12 && (iv.upper - 1.0).abs() < 1e-12);
        let origin = MomentPoint::rank_one(&[0.0, 0.0, 0.0], false);
        let iv = soc_z_interval(&origin, (0, 1, 2), &caps);
        assert!(iv.lower.abs() < 1e-12 && iv.upper.abs() < 1e-12);
    }
}
