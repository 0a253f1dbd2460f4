use std::collections::BTreeMap;

use encircle::classify::{pair_table_report, RowReport};
use encircle::{Family, HamiltonianSpec, LoopSpec};
use serde::Serialize;

use crate::error::CliResult;

#[derive(Debug, Clone, Serialize)]
pub struct PairTable {
    pub gamma: f64,
    /// Rows keyed `"<first>-<second>"` within `chirality` / `reciprocity`.
    pub families: BTreeMap<&'static str, BTreeMap<String, RowReport>>,
    pub all_agree: bool,
}

fn family_key(f: Family) -> &'static str {
    match f {
        Family::PtPassive => "PT_PASSIVE",
        Family::AptPassive => "APT_PASSIVE",
        Family::PtTraceless => "PT_TRACELESS",
        Family::AptPseudo => "APT_PSEUDO",
        Family::Custom => "CUSTOM",
    }
}

fn row_key(r: &RowReport) -> String {
    let kind = match r.row.kind {
        encircle::classify::PairKind::Chirality => "chirality",
        encircle::classify::PairKind::Reciprocity => "reciprocity",
    };
    format!("{kind}:{}-{}", r.row.first, r.row.second)
}

/// The pairing table for the passive PT and APT families on `template`'s
/// loop geometry.
pub fn pair_table(gamma: f64, template: &LoopSpec) -> CliResult<PairTable> {
    let mut families = BTreeMap::new();
    let mut all_agree = true;
    for family in [Family::PtPassive, Family::AptPassive] {
        let rows = pair_table_report(&HamiltonianSpec::new(family, gamma), template)?;
        all_agree &= rows.iter().all(RowReport::agrees);
        families.insert(family_key(family), rows.into_iter().map(|r| (row_key(&r), r)).collect());
    }
    Ok(PairTable { gamma, families, all_agree })
}

pub fn render(table: &PairTable) -> String {
    let mut s = String::new();
    for (fam, rows) in &table.families {
        for (key, r) in rows {
            s.push_str(&format!(
                "{fam:<12} {key:<18} table={:?} simulated={:?} predicted={:?} {}\n",
                r.row.relation,
                r.empirical.relation,
                r.predicted,
                if r.agrees() { "ok" } else { "MISMATCH" }
            ));
        }
    }
    s
}
