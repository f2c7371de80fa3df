//! Polynomials in three box variables, used to carry out switchings and
//! permutations exactly.
//!
//! A lifted linear form over `(1, x_a, X_aa, X_ab, z)` on a triple is read as
//! the polynomial obtained by `X_aa -> x_a^2`, `X_ab -> x_a x_b` and
//! `z -> x_1 x_2 x_3`. Substituting `x_a -> 1 - x_a` and relabelling the
//! variables on the polynomial, then linearising back, gives exactly the
//! switching identities (`X_ab -> x_b - X_ab`, and so on).

use std::ops::{Add, Mul, Neg, Sub};

use super::SwitchPattern;

/// Per-variable exponent bound (exclusive).
const DEG: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Poly3 {
    // coef[e0][e1][e2] multiplies x0^e0 x1^e1 x2^e2
    coef: [[[f64; DEG]; DEG]; DEG],
}

impl Poly3 {
    pub fn zero() -> Self {
        Poly3 {
            coef: [[[0.0; DEG]; DEG]; DEG],
        }
    }

    pub fn constant(c: f64) -> Self {
        let mut p = Self::zero();
        p.coef[0][0][0] = c;
        p
    }

    pub fn monomial(exp: [usize; 3], c: f64) -> Self {
        let mut p = Self::zero();
        p.coef[exp[0]][exp[1]][exp[2]] = c;
        p
    }

    pub fn var(a: usize) -> Self {
        let mut e = [0; 3];
        e[a] = 1;
        Self::monomial(e, 1.0)
    }

    pub fn coefficient(&self, exp: [usize; 3]) -> f64 {
        self.coef[exp[0]][exp[1]][exp[2]]
    }

    fn terms(&self) -> impl Iterator<Item = ([usize; 3], f64)> + '_ {
        (0..DEG).flat_map(move |a| {
            (0..DEG).flat_map(move |b| {
                (0..DEG).filter_map(move |c| {
                    let v = self.coef[a][b][c];
                    (v != 0.0).then_some(([a, b, c], v))
                })
            })
        })
    }

    fn pow(&self, e: usize) -> Poly3 {
        (0..e).fold(Poly3::constant(1.0), |acc, _| acc * *self)
    }

    /// `p(T(x))` with `T(x)_a = s_a(x_perm[a])` where `s_a(t) = 1 - t` when
    /// position `a` is flipped.
    pub fn substitute(&self, pattern: &SwitchPattern) -> Poly3 {
        let images: [Poly3; 3] = std::array::from_fn(|a| {
            let v = Poly3::var(pattern.perm()[a]);
            if pattern.flips(a) {
                Poly3::constant(1.0) - v
            } else {
                v
            }
        });
        let mut out = Poly3::zero();
        for (exp, c) in self.terms() {
            let mut term = Poly3::constant(c);
            for (a, img) in images.iter().enumerate() {
                term = term * img.pow(exp[a]);
            }
            out = out + term;
        }
        out
    }
}

impl Add for Poly3 {
    type Output = Poly3;
    fn add(mut self, rhs: Poly3) -> Poly3 {
        for a in 0..DEG {
            for b in 0..DEG {
                for c in 0..DEG {
                    self.coef[a][b][c] += rhs.coef[a][b][c];
                }
            }
        }
        self
    }
}

impl Neg for Poly3 {
    type Output = Poly3;
    fn neg(self) -> Poly3 {
        Poly3::zero() - self
    }
}

impl Sub for Poly3 {
    type Output = Poly3;
    fn sub(mut self, rhs: Poly3) -> Poly3 {
        for a in 0..DEG {
            for b in 0..DEG {
                for c in 0..DEG {
                    self.coef[a][b][c] -= rhs.coef[a][b][c];
                }
            }
        }
        self
    }
}

impl Mul for Poly3 {
    type Output = Poly3;
    fn mul(self, rhs: Poly3) -> Poly3 {
        let mut out = Poly3::zero();
        for (ea, ca) in self.terms() {
            for (eb, cb) in rhs.terms() {
                let e = [ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2]];
                assert!(
                    e.iter().all(|&d| d < DEG),
                    "degree overflow in Poly3 product: {e:?}"
                );
                out.coef[e[0]][e[1]][e[2]] += ca * cb;
            }
        }
        out
    }
}

/// A form that is affine in the lifted variables of one triple:
/// `b + c.x + diag.(X_00, X_11, X_22) + off.(X_01, X_02, X_12) + z * x0x1x2`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LocalForm {
    pub c: [f64; 3],
    pub diag: [f64; 3],
    pub off: [f64; 3],
    pub z: f64,
    pub b: f64,
}

/// Local off-diagonal slot for the pair `(a, b)`, `a < b`.
pub fn off_slot(a: usize, b: usize) -> usize {
    match (a.min(b), a.max(b)) {
        (0, 1) => 0,
        (0, 2) => 1,
        (1, 2) => 2,
        _ => panic!("not an off-diagonal pair: ({a},{b})"),
    }
}

/// Inverse of [`off_slot`].
pub fn off_pair(slot: usize) -> (usize, usize) {
    [(0, 1), (0, 2), (1, 2)][slot]
}

impl LocalForm {
    pub fn to_poly(&self) -> Poly3 {
        let mut p = Poly3::constant(self.b);
        for a in 0..3 {
            let mut e = [0; 3];
            e[a] = 1;
            p = p + Poly3::monomial(e, self.c[a]);
            e[a] = 2;
            p = p + Poly3::monomial(e, self.diag[a]);
        }
        for slot in 0..3 {
            let (a, b) = off_pair(slot);
            let mut e = [0; 3];
            e[a] = 1;
            e[b] = 1;
            p = p + Poly3::monomial(e, self.off[slot]);
        }
        p + Poly3::monomial([1, 1, 1], self.z)
    }

    /// Linearises a polynomial back into lifted coordinates. Returns `None`
    /// when a monomial has no lifted counterpart (e.g. `x0^2 x1`).
    pub fn from_poly(p: &Poly3) -> Option<LocalForm> {
        let mut f = LocalForm::default();
        for (exp, c) in p.terms() {
            let degree: usize = exp.iter().sum();
            let nonzero: Vec<usize> = (0..3).filter(|&a| exp[a] > 0).collect();
            match (degree, nonzero.as_slice()) {
                (0, _) => f.b += c,
                (1, [a]) => f.c[*a] += c,
                (2, [a]) => f.diag[*a] += c,
                (2, [a, b]) => f.off[off_slot(*a, *b)] += c,
                (3, [_, _, _]) => f.z += c,
                _ => return None,
            }
        }
        Some(f)
    }

    pub fn switched(&self, pattern: &SwitchPattern) -> LocalForm {
        LocalForm::from_poly(&self.to_poly().substitute(pattern))
            .expect("switching preserves the lifted monomial set")
    }

    /// Evaluates with local values `x`, `X` (3x3, symmetric) and `z`.
    pub fn eval(&self, x: &[f64; 3], xx: &[[f64; 3]; 3], z: f64) -> f64 {
        let mut v = self.b + self.z * z;
        for a in 0..3 {
            v += self.c[a] * x[a] + self.diag[a] * xx[a][a];
        }
        for slot in 0..3 {
            let (a, b) = off_pair(slot);
            v += self.off[slot] * xx[a][b];
        }
        v
    }

    pub fn scale(mut self, s: f64) -> LocalForm {
        self.c.iter_mut().for_each(|v| *v *= s);
        self.diag.iter_mut().for_each(|v| *v *= s);
        self.off.iter_mut().for_each(|v| *v *= s);
        self.z *= s;
        self.b *= s;
        self
    }

    pub fn add(mut self, other: &LocalForm) -> LocalForm {
        for a in 0..3 {
            self.c[a] += other.c[a];
            self.diag[a] += other.diag[a];
            self.off[a] += other.off[a];
        }
        self.z += other.z;
        self.b += other.b;
        self
    }
}
