//! Linear valid inequalities on index triples and the switching algebra that
//! generates them.
//!
//! Every cut is stored in the tabulated convention
//! `sum c_a x_a + sum C_ab X_ab + b >= 0`; a negative left-hand side is a
//! violation of that magnitude.

mod catalog;
pub mod poly;
mod switch;

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{MomentPoint, SymIndex, Triple};
pub use catalog::{
    base_constraints, base_cut, export_table, generate_family, generate_local, golden_table, parse_table,
    CutCatalog, TABLE_HEADER,
};
use poly::{off_pair, LocalForm};
pub use switch::{SwitchPattern, PERMUTATIONS, SWITCH_ORDER};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    Diag,
    Rlt,
    Tri,
    Etri1,
    Etri2,
    Etri3,
    /// Hyperplanes of one order simplex of the box triangulation.
    Ordering,
}

impl Family {
    pub const TRIPLE_FAMILIES: [Family; 5] = [
        Family::Rlt,
        Family::Tri,
        Family::Etri1,
        Family::Etri2,
        Family::Etri3,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Diag => "DIAG",
            Family::Rlt => "RLT",
            Family::Tri => "TRI",
            Family::Etri1 => "ETRI1",
            Family::Etri2 => "ETRI2",
            Family::Etri3 => "ETRI3",
            Family::Ordering => "ORDER",
        }
    }

    pub fn is_etri(self) -> bool {
        matches!(self, Family::Etri1 | Family::Etri2 | Family::Etri3)
    }

    pub fn parse(s: &str) -> Option<Family> {
        match s.to_ascii_uppercase().as_str() {
            "DIAG" => Some(Family::Diag),
            "RLT" => Some(Family::Rlt),
            "TRI" => Some(Family::Tri),
            "ETRI1" => Some(Family::Etri1),
            "ETRI2" => Some(Family::Etri2),
            "ETRI3" => Some(Family::Etri3),
            _ => None,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which base inequality a cut came from and how it was switched.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct CutTag {
    pub base: usize,
    pub pattern: SwitchPattern,
}

/// A lifted variable of the `(x, X)` space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LiftedVar {
    X(usize),
    Lift(SymIndex),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearCut {
    indices: [usize; 3],
    arity: usize,
    form: LocalForm,
    pub family: Family,
    pub tag: CutTag,
}

impl LinearCut {
    /// `coeffs` in table order `x1 x2 x3 X11 X22 X33 X12 X13 X23 b`.
    pub fn on_triple(triple: Triple, coeffs: [f64; 10], family: Family) -> Self {
        let (i, j, k) = triple;
        assert!(i < j && j < k, "triple must be increasing: {triple:?}");
        LinearCut {
            indices: [i, j, k],
            arity: 3,
            form: form_from_row(&coeffs),
            family,
            tag: CutTag::default(),
        }
    }

    /// A cut on the pair `i < j`; `form` may only use local positions 0 and 1.
    pub fn on_pair(i: usize, j: usize, form: LocalForm, family: Family) -> Self {
        assert!(i < j);
        debug_assert!(form.c[2] == 0.0 && form.diag[2] == 0.0 && form.off[1] == 0.0);
        debug_assert!(form.off[2] == 0.0 && form.z == 0.0);
        LinearCut {
            indices: [i, j, usize::MAX],
            arity: 2,
            form,
            family,
            tag: CutTag::default(),
        }
    }

    pub fn on_single(i: usize, form: LocalForm, family: Family) -> Self {
        LinearCut {
            indices: [i, usize::MAX, usize::MAX],
            arity: 1,
            form,
            family,
            tag: CutTag::default(),
        }
    }

    pub(crate) fn from_local(triple: Triple, form: LocalForm, family: Family, tag: CutTag) -> Self {
        let mut cut = LinearCut::on_triple(triple, [0.0; 10], family);
        cut.form = form;
        cut.tag = tag;
        cut
    }

    pub fn with_tag(mut self, tag: CutTag) -> Self {
        self.tag = tag;
        self
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices[..self.arity]
    }

    /// The support as a triple; only meaningful for arity-3 cuts.
    pub fn triple(&self) -> Option<Triple> {
        (self.arity == 3).then(|| (self.indices[0], self.indices[1], self.indices[2]))
    }

    pub fn form(&self) -> &LocalForm {
        &self.form
    }

    pub fn c(&self) -> [f64; 3] {
        self.form.c
    }

    pub fn c_diag(&self) -> [f64; 3] {
        self.form.diag
    }

    pub fn c_off(&self) -> [f64; 3] {
        self.form.off
    }

    pub fn b(&self) -> f64 {
        self.form.b
    }

    /// Coefficients in table order `x1 x2 x3 X11 X22 X33 X12 X13 X23 b`.
    pub fn row(&self) -> [f64; 10] {
        let f = &self.form;
        [
            f.c[0], f.c[1], f.c[2], f.diag[0], f.diag[1], f.diag[2], f.off[0], f.off[1],
            f.off[2], f.b,
        ]
    }

    /// Same local coefficients placed on another triple.
    pub fn relocated(&self, triple: Triple) -> LinearCut {
        assert_eq!(self.arity, 3, "only triple cuts can be relocated");
        LinearCut::from_local(triple, self.form, self.family, self.tag)
    }

    /// Substitutes `x_a -> 1 - x_a` on the flipped positions, then relabels
    /// positions by the pattern's permutation.
    ///
    /// Panics if a lower-arity cut would be moved onto a position it does not
    /// have.
    pub fn apply_switch(&self, pattern: &SwitchPattern) -> LinearCut {
        let form = self.form.switched(pattern);
        for a in self.arity..3 {
            assert!(
                form.c[a] == 0.0 && form.diag[a] == 0.0,
                "pattern {pattern} moves the cut off its support"
            );
        }
        LinearCut {
            indices: self.indices,
            arity: self.arity,
            form,
            family: self.family,
            tag: CutTag {
                base: self.tag.base,
                pattern: self.tag.pattern.then(pattern),
            },
        }
    }

    /// Left-hand side at `p`.
    pub fn evaluate(&self, p: &MomentPoint) -> f64 {
        let f = &self.form;
        let idx = self.indices();
        let mut v = f.b;
        for (a, &g) in idx.iter().enumerate() {
            v += f.c[a] * p.x[g] + f.diag[a] * p.lifted(g, g);
        }
        for slot in 0..3 {
            let (a, b) = off_pair(slot);
            if b < self.arity {
                v += f.off[slot] * p.lifted(idx[a], idx[b]);
            }
        }
        v
    }

    /// Left-hand side at the rank-one lift of local values `x`.
    pub fn evaluate_local_rank_one(&self, x: [f64; 3]) -> f64 {
        let xx: [[f64; 3]; 3] = std::array::from_fn(|a| std::array::from_fn(|b| x[a] * x[b]));
        self.form.eval(&x, &xx, 0.0)
    }

    /// Euclidean norm of the nine variable coefficients.
    pub fn coefficient_norm(&self) -> f64 {
        self.row()[..9].iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Non-zero coefficients on lifted variables, plus the constant.
    pub fn terms(&self) -> (Vec<(LiftedVar, f64)>, f64) {
        let f = &self.form;
        let idx = self.indices();
        let mut out = Vec::new();
        for (a, &g) in idx.iter().enumerate() {
            if f.c[a] != 0.0 {
                out.push((LiftedVar::X(g), f.c[a]));
            }
            if f.diag[a] != 0.0 {
                out.push((LiftedVar::Lift(SymIndex::new(g, g)), f.diag[a]));
            }
        }
        for slot in 0..3 {
            let (a, b) = off_pair(slot);
            if b < self.arity && f.off[slot] != 0.0 {
                out.push((LiftedVar::Lift(SymIndex::new(idx[a], idx[b])), f.off[slot]));
            }
        }
        (out, f.b)
    }

    /// Integer coefficient tuple with any common positive factor removed;
    /// `None` if some coefficient is not integral.
    pub fn integer_key(&self) -> Option<[i64; 10]> {
        let row = self.row();
        let mut out = [0i64; 10];
        for (o, v) in out.iter_mut().zip(row) {
            if v.fract() != 0.0 {
                return None;
            }
            *o = v as i64;
        }
        let g = out.iter().fold(0i64, |g, &v| gcd(g, v.abs()));
        if g > 1 {
            out.iter_mut().for_each(|v| *v /= g);
        }
        Some(out)
    }

    /// Minimum left-hand side over uniform samples of the box with
    /// `X = xx'`, together with the eight box vertices.
    pub fn verify_validity_by_sampling(&self, samples: usize, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut min = f64::INFINITY;
        for m in 0..8u8 {
            let v = std::array::from_fn(|a| f64::from(m >> a & 1));
            min = min.min(self.evaluate_local_rank_one(v));
        }
        for _ in 0..samples.max(1) {
            let x: [f64; 3] = std::array::from_fn(|_| rng.random::<f64>());
            min = min.min(self.evaluate_local_rank_one(x));
        }
        min
    }
}

impl fmt::Display for LinearCut {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} on {:?}:", self.family, self.indices())?;
        for v in self.row() {
            write!(f, " {v}")?;
        }
        Ok(())
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Local form of a coefficient row in table order.
pub fn form_from_row(row: &[f64; 10]) -> LocalForm {
    LocalForm {
        c: [row[0], row[1], row[2]],
        diag: [row[3], row[4], row[5]],
        off: [row[6], row[7], row[8]],
        z: 0.0,
        b: row[9],
    }
}

/// Standalone form of [`LinearCut::apply_switch`].
pub fn apply_switch(cut: &LinearCut, pattern: &SwitchPattern) -> LinearCut {
    cut.apply_switch(pattern)
}

/// Standalone form of [`LinearCut::evaluate`].
pub fn evaluate_cut(cut: &LinearCut, p: &MomentPoint) -> f64 {
    cut.evaluate(p)
}

/// Standalone form of [`LinearCut::coefficient_norm`].
pub fn coefficient_norm(cut: &LinearCut) -> f64 {
    cut.coefficient_norm()
}

/// Every cut of the given families on every triple of `0..n`, with the
/// pair-level RLT and singleton DIAG cuts emitted once rather than per triple.
pub fn all_cuts(n: usize, families: &[Family]) -> Vec<LinearCut> {
    let mut out = Vec::new();
    if families.contains(&Family::Diag) || families.contains(&Family::Rlt) {
        out.extend(diag_cuts(n));
    }
    if families.contains(&Family::Rlt) {
        out.extend(rlt_pair_cuts(n));
    }
    for &fam in families {
        if matches!(fam, Family::Diag | Family::Rlt | Family::Ordering) {
            continue;
        }
        for t in triples(n) {
            out.extend(generate_family(fam, t));
        }
    }
    out
}

/// `X_ii <= x_i` for each `i`.
pub fn diag_cuts(n: usize) -> Vec<LinearCut> {
    (0..n)
        .map(|i| {
            let form = LocalForm {
                c: [1.0, 0.0, 0.0],
                diag: [-1.0, 0.0, 0.0],
                ..Default::default()
            };
            LinearCut::on_single(i, form, Family::Diag)
        })
        .collect()
}

/// The four McCormick inequalities on every pair `i < j`.
pub fn rlt_pair_cuts(n: usize) -> Vec<LinearCut> {
    let mut out = Vec::new();
    let x01 = LocalForm {
        off: [1.0, 0.0, 0.0],
        ..Default::default()
    };
    for i in 0..n {
        for j in (i + 1)..n {
            for flips in [0b00u8, 0b01, 0b10, 0b11] {
                let pattern = SwitchPattern::new(flips, [0, 1, 2]);
                let cut = LinearCut::on_pair(i, j, x01.switched(&pattern), Family::Rlt)
                    .with_tag(CutTag { base: 0, pattern });
                out.push(cut);
            }
        }
    }
    out
}

/// All triples `i < j < k < n` in lexicographic order.
pub fn triples(n: usize) -> impl Iterator<Item = Triple> {
    (0..n).flat_map(move |i| {
        ((i + 1)..n).flat_map(move |j| ((j + 1)..n).map(move |k| (i, j, k)))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn etri1_base() -> LinearCut {
        LinearCut::on_triple(
            (0, 1, 2),
            [2.0, 0.0, 0.0, 1.0, 0.0, 0.0, -2.0, -2.0, 1.0, 0.0],
            Family::Etri1,
        )
    }

    #[test]
    fn switch_examples() {
        let base = etri1_base();
        let s1 = base.apply_switch(&SwitchPattern::switch(&[0]));
        assert_eq!(
            s1.row(),
            [-4.0, -2.0, -2.0, 1.0, 0.0, 0.0, 2.0, 2.0, 1.0, 3.0]
        );
        let s2 = base.apply_switch(&SwitchPattern::switch(&[1]));
        assert_eq!(s2.row(), [0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 2.0, -2.0, -1.0, 0.0]);
        assert_eq!(base.apply_switch(&SwitchPattern::IDENTITY).row(), base.row());
    }

    #[test]
    fn evaluation_examples() {
        let base = etri1_base();
        assert_eq!(base.evaluate(&MomentPoint::rank_one(&[0.0; 3], false)), 0.0);
        assert_eq!(base.evaluate(&MomentPoint::rank_one(&[1.0; 3], false)), 0.0);
        assert_eq!(base.coefficient_norm(), 14f64.sqrt());
        let etri2 = LinearCut::on_triple(
            (0, 1, 2),
            [4.0, 0.0, 0.0, 4.0, 0.0, 0.0, -4.0, -4.0, 1.0, 0.0],
            Family::Etri2,
        );
        assert_eq!(etri2.evaluate_local_rank_one([1.0; 3]), 1.0);
    }

    #[test]
    fn sampling_flags_invalid_cut() {
        // -X12 >= 0 is false on most of the box
        let bad = LinearCut::on_triple(
            (0, 1, 2),
            [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0],
            Family::Rlt,
        );
        assert!(bad.verify_validity_by_sampling(100_000, 7) < -0.5);
        assert!(etri1_base().verify_validity_by_sampling(100_000, 7) >= -1e-12);
    }

    #[test]
    fn integer_key_clears_common_factor() {
        let a = LinearCut::on_triple((0, 1, 2), [2.0, 0.0, 0.0, 2.0, 0.0, 0.0, -4.0, 0.0, 0.0, 0.0], Family::Etri1);
        let b = LinearCut::on_triple((0, 1, 2), [1.0, 0.0, 0.0, 1.0, 0.0, 0.0, -2.0, 0.0, 0.0, 0.0], Family::Etri1);
        assert_eq!(a.integer_key(), b.integer_key());
        let c = LinearCut::on_triple((0, 1, 2), [0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0], Family::Etri1);
        assert_eq!(c.integer_key(), None);
    }

    #[test]
    fn global_terms_on_relocated_cut() {
        let cut = etri1_base().relocated((1, 3, 4));
        let (terms, b) = cut.terms();
        assert_eq!(b, 0.0);
        assert!(terms.contains(&(LiftedVar::X(1), 2.0)));
        assert!(terms.contains(&(LiftedVar::Lift(SymIndex::new(3, 4)), 1.0)));
        let p = MomentPoint::rank_one(&[0.3, 0.9, 0.1, 0.6, 0.4], false);
        let local = etri1_base().evaluate_local_rank_one([0.9, 0.6, 0.4]);
        assert!((cut.evaluate(&p) - local).abs() < 1e-15);
    }

    #[test]
    fn pair_cuts_cover_mccormick() {
        let cuts = rlt_pair_cuts(2);
        assert_eq!(cuts.len(), 4);
        let rows: Vec<_> = cuts.iter().map(|c| c.row()).collect();
        // X12 >= 0, x2 - X12 >= 0, x1 - X12 >= 0, X12 - x1 - x2 + 1 >= 0
        assert!(rows.contains(&[0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0]));
        assert!(rows.contains(&[0.0, 1.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0]));
        assert!(rows.contains(&[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0]));
        assert!(rows.contains(&[-1.0, -1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0]));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn switch_then_inverse_is_identity(
                first in 0usize..48,
                second in 0usize..48,
                x in proptest::array::uniform3(0.0f64..1.0),
            ) {
                let patterns: Vec<SwitchPattern> = SwitchPattern::all().collect();
                let (s, t) = (&patterns[first], &patterns[second]);
                let cut = etri1_base();
                let back = cut.apply_switch(s).apply_switch(&s.inverse());
                for (a, b) in back.row().iter().zip(cut.row()) {
                    prop_assert!((a - b).abs() <= 1e-12);
                }
                let two = cut.apply_switch(s).apply_switch(t);
                let one = cut.apply_switch(&SwitchPattern::compose(t, s));
                let p = MomentPoint::rank_one(&x, false);
                prop_assert!((two.evaluate(&p) - one.evaluate(&p)).abs() <= 1e-12);
            }
        }
    }
}
