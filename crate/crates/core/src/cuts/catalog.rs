//! Base inequalities, family generation by switching, and the tabulated
//! coefficient catalogs for the canonical triple.

use std::collections::{BTreeMap, HashSet};

use super::{CutTag, Family, LinearCut, SwitchPattern};
use crate::model::Triple;

#[path = "catalog_data.rs"]
mod data;

pub const TABLE_HEADER: &str = "x1 x2 x3 X11 X22 X33 X12 X13 X23 b";

/// The generating inequalities of each family, in table convention. All other
/// members are switchings and permutations of these.
pub fn base_constraints(family: Family) -> Vec<[i64; 10]> {
    match family {
        Family::Diag => vec![[1, 0, 0, -1, 0, 0, 0, 0, 0, 0]],
        // X12 >= 0 and the diagonal bound x1 - X11 >= 0
        Family::Rlt => vec![
            [1, 0, 0, -1, 0, 0, 0, 0, 0, 0],
            [0, 0, 0, 0, 0, 0, 1, 0, 0, 0],
        ],
        // X12 + X13 <= x1 + X23
        Family::Tri => vec![[1, 0, 0, 0, 0, 0, -1, -1, 1, 0]],
        Family::Etri1 => vec![
            [2, 0, 0, 1, 0, 0, -2, -2, 1, 0],
            [0, 2, 0, 0, 1, 0, -2, 1, -2, 0],
            [0, 0, 2, 0, 0, 1, 1, -2, -2, 0],
        ],
        Family::Etri2 => vec![
            [4, 0, 0, 4, 0, 0, -4, -4, 1, 0],
            [0, 4, 0, 0, 4, 0, -4, 1, -4, 0],
            [0, 0, 4, 0, 0, 4, 1, -4, -4, 0],
        ],
        Family::Etri3 => vec![
            [4, 0, 0, 4, 1, 0, -8, -4, 3, 0],
            [4, 0, 0, 4, 0, 1, -4, -8, 3, 0],
            [0, 4, 0, 1, 4, 0, -8, 3, -4, 0],
            [0, 4, 0, 0, 4, 1, -4, 3, -8, 0],
            [0, 0, 4, 1, 0, 4, 3, -8, -4, 0],
            [0, 0, 4, 0, 1, 4, 3, -4, -8, 0],
        ],
        Family::Ordering => Vec::new(),
    }
}

fn to_f64(row: &[i64; 10]) -> [f64; 10] {
    row.map(|v| v as f64)
}

/// The distinct members of a family on the canonical triple `(0, 1, 2)`.
///
/// Each base inequality is first switched in place (eight flip sets), then the
/// full 48-element group is applied to every base and anything new appended.
/// Duplicates are identified by integer coefficient tuples.
pub fn generate_local(family: Family) -> Vec<LinearCut> {
    let bases: Vec<LinearCut> = base_constraints(family)
        .iter()
        .enumerate()
        .map(|(b, row)| {
            LinearCut::on_triple((0, 1, 2), to_f64(row), family).with_tag(CutTag {
                base: b,
                pattern: SwitchPattern::IDENTITY,
            })
        })
        .collect();
    let switches_only = bases.iter().flat_map(|base| {
        super::SWITCH_ORDER
            .iter()
            .map(move |&f| base.apply_switch(&SwitchPattern::new(f, [0, 1, 2])))
    });
    let full_group = bases
        .iter()
        .flat_map(|base| SwitchPattern::all().map(move |p| base.apply_switch(&p)));

    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for cut in switches_only.chain(full_group) {
        let key = cut.integer_key().expect("catalog cuts are integral");
        if seen.insert(key) {
            out.push(cut);
        }
    }
    out
}

/// All members of `family` on the triple `i < j < k`.
pub fn generate_family(family: Family, triple: Triple) -> Vec<LinearCut> {
    generate_local(family)
        .into_iter()
        .map(|c| c.relocated(triple))
        .collect()
}

/// Published coefficient rows for the canonical triple, where they exist
/// (RLT and TRI are written out directly from their definitions).
pub fn golden_table(family: Family) -> Vec<[i64; 10]> {
    match family {
        Family::Etri1 => data::ETRI1_TABLE.to_vec(),
        Family::Etri2 => data::ETRI2_TABLE.to_vec(),
        Family::Etri3 => data::ETRI3_TABLE.to_vec(),
        Family::Tri => vec![
            [1, 0, 0, 0, 0, 0, -1, -1, 1, 0],
            [0, 1, 0, 0, 0, 0, -1, 1, -1, 0],
            [0, 0, 1, 0, 0, 0, 1, -1, -1, 0],
            [-1, -1, -1, 0, 0, 0, 1, 1, 1, 1],
        ],
        Family::Diag => vec![
            [1, 0, 0, -1, 0, 0, 0, 0, 0, 0],
            [0, 1, 0, 0, -1, 0, 0, 0, 0, 0],
            [0, 0, 1, 0, 0, -1, 0, 0, 0, 0],
        ],
        Family::Rlt => {
            let mut rows = golden_table(Family::Diag);
            for slot in 0..3 {
                let (a, b) = super::poly::off_pair(slot);
                let mut lo = [0i64; 10];
                lo[6 + slot] = 1;
                let mut up_a = lo.map(|v| -v);
                up_a[a] = 1;
                let mut up_b = lo.map(|v| -v);
                up_b[b] = 1;
                let mut mc = lo;
                mc[a] = -1;
                mc[b] = -1;
                mc[9] = 1;
                rows.extend([lo, up_a, up_b, mc]);
            }
            rows
        }
        Family::Ordering => Vec::new(),
    }
}

/// All generated families on the canonical triple.
#[derive(Debug, Clone)]
pub struct CutCatalog {
    pub families: BTreeMap<Family, Vec<LinearCut>>,
}

impl CutCatalog {
    pub fn generate() -> Self {
        let families = [
            Family::Rlt,
            Family::Tri,
            Family::Etri1,
            Family::Etri2,
            Family::Etri3,
        ]
        .into_iter()
        .map(|f| (f, generate_local(f)))
        .collect();
        CutCatalog { families }
    }

    pub fn get(&self, family: Family) -> &[LinearCut] {
        self.families.get(&family).map_or(&[], |v| v.as_slice())
    }

    /// Whether the generated rows of `family` equal the published rows as sets.
    pub fn matches_golden(&self, family: Family) -> bool {
        let gen: HashSet<[i64; 10]> = self
            .get(family)
            .iter()
            .filter_map(|c| c.integer_key())
            .collect();
        let gold: HashSet<[i64; 10]> = golden_table(family).into_iter().collect();
        gen.len() == self.get(family).len() && gen == gold
    }

    /// Smallest coefficient norm over the family.
    pub fn min_norm(&self, family: Family) -> f64 {
        self.get(family)
            .iter()
            .map(LinearCut::coefficient_norm)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Plain-text table, header then one cut per line, integers where integral.
pub fn export_table(cuts: &[LinearCut]) -> String {
    let mut out = String::from(TABLE_HEADER);
    out.push('\n');
    for cut in cuts {
        let cells: Vec<String> = cut.row().iter().map(|v| format!("{v}")).collect();
        out.push_str(&cells.join(" "));
        out.push('\n');
    }
    out
}

/// Reads rows written by [`export_table`]; blank lines and the header are
/// skipped.
pub fn parse_table(text: &str) -> Result<Vec<[i64; 10]>, String> {
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line == TABLE_HEADER {
            continue;
        }
        let vals: Result<Vec<i64>, _> = line.split_whitespace().map(str::parse).collect();
        match vals {
            Ok(v) if v.len() == 10 => rows.push(v.try_into().unwrap()),
            Ok(v) => return Err(format!("line {}: expected 10 values, found {}", lineno + 1, v.len())),
            Err(e) => return Err(format!("line {}: {e}", lineno + 1)),
        }
    }
    Ok(rows)
}

/// Base inequality `index` of `family` on the canonical triple.
pub fn base_cut(family: Family, index: usize) -> LinearCut {
    let row = base_constraints(family)[index];
    LinearCut::on_triple((0, 1, 2), to_f64(&row), family)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_sizes() {
        let cat = CutCatalog::generate();
        assert_eq!(cat.get(Family::Rlt).len(), 15);
        assert_eq!(cat.get(Family::Tri).len(), 4);
        assert_eq!(cat.get(Family::Etri1).len(), 24);
        assert_eq!(cat.get(Family::Etri2).len(), 24);
        assert_eq!(cat.get(Family::Etri3).len(), 48);
    }

    #[test]
    fn generated_rows_match_published_tables() {
        let cat = CutCatalog::generate();
        for f in [Family::Rlt, Family::Tri, Family::Etri1, Family::Etri2, Family::Etri3] {
            assert!(cat.matches_golden(f), "{f} differs from its table");
        }
    }

    #[test]
    fn published_groups_follow_their_base() {
        // each block of eight rows starts with a base inequality
        for (f, bases) in [
            (Family::Etri1, base_constraints(Family::Etri1)),
            (Family::Etri2, base_constraints(Family::Etri2)),
            (Family::Etri3, base_constraints(Family::Etri3)),
        ] {
            let gold = golden_table(f);
            for (g, base) in bases.iter().enumerate() {
                assert_eq!(&gold[8 * g], base, "{f} group {g}");
            }
        }
    }

    #[test]
    fn norms() {
        let cat = CutCatalog::generate();
        let sq = |f: Family| (cat.min_norm(f) * cat.min_norm(f)).round() as i64;
        assert_eq!(sq(Family::Etri1), 11);
        assert_eq!(sq(Family::Etri2), 50);
        assert_eq!(sq(Family::Etri3), 115);
        let base_sq = |f: Family| {
            base_constraints(f)[0][..9].iter().map(|v| v * v).sum::<i64>()
        };
        assert_eq!(base_sq(Family::Etri1), 14);
        assert_eq!(base_sq(Family::Etri2), 65);
        assert_eq!(base_sq(Family::Etri3), 122);
    }

    #[test]
    fn export_round_trip() {
        let cuts = generate_local(Family::Etri1);
        let text = export_table(&cuts);
        assert!(text.starts_with(TABLE_HEADER));
        let rows = parse_table(&text).unwrap();
        assert_eq!(rows.len(), 24);
        assert_eq!(rows[0], [2, 0, 0, 1, 0, 0, -2, -2, 1, 0]);
        assert!(parse_table("1 2 3").is_err());
    }
}
