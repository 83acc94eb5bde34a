use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;

use super::{parse_usize, tokens, Document, Joined, Line, LoadError, Section};
use crate::contexts::{build_context_poset, make_partial_order, CausalOrder, Party};
use crate::forcing::{default_order_valuation, AtomKey, KripkeModel};
use crate::gluing::{BehaviorTable, Scenario};
use crate::rational::{parse_rational, Rational};

/// Largest context poset accepted from a file.
pub const MAX_CONTEXTS: usize = 64;

const SECTIONS: &[&str] = &["scenario", "contexts", "atoms", "posed", "behavior"];

#[derive(Debug, Clone)]
pub struct ScenarioFile {
    pub parties: Vec<Party>,
    pub settings: Option<Vec<usize>>,
    pub outcomes: Option<Vec<usize>>,
    /// Present when the file declares contexts.
    pub model: Option<KripkeModel>,
    pub behavior: Option<BehaviorTable>,
    /// Non-fatal diagnostics (duplicate relations, up-closed sets).
    pub warnings: Vec<String>,
}

impl ScenarioFile {
    pub fn scenario(&self) -> Option<Scenario> {
        self.behavior.as_ref().map(|b| b.scenario().clone())
    }
}

pub fn parse_scenario(src: &str, strict: bool) -> Result<ScenarioFile, LoadError> {
    let doc = Document::parse(src, SECTIONS)?;
    let head = doc
        .section("scenario")
        .ok_or_else(|| LoadError::global("missing [scenario] section"))?;
    let (parties, settings, outcomes) = parse_head(head)?;
    let mut warnings = Vec::new();

    let model = match doc.section("contexts") {
        Some(sec) => Some(parse_contexts(sec, &parties, &doc, strict, &mut warnings)?),
        None => {
            for name in ["atoms", "posed"] {
                if let Some(s) = doc.section(name) {
                    return Err(LoadError::at(s.line, format!("[{name}] requires a [contexts] section")));
                }
            }
            None
        }
    };

    let behavior = match doc.section("behavior") {
        Some(sec) => {
            let (Some(s), Some(o)) = (&settings, &outcomes) else {
                return Err(LoadError::at(
                    sec.line,
                    "[behavior] requires `settings:` and `outcomes:` in [scenario]",
                ));
            };
            let scenario = Scenario::new(parties.clone(), s.clone(), o.clone())
                .map_err(|e| LoadError::at(head.line, e.to_string()))?;
            Some(parse_behavior(sec, scenario)?)
        }
        None => None,
    };

    Ok(ScenarioFile {
        parties,
        settings,
        outcomes,
        model,
        behavior,
        warnings,
    })
}

type Head = (Vec<Party>, Option<Vec<usize>>, Option<Vec<usize>>);

fn parse_head(sec: &Section<'_>) -> Result<Head, LoadError> {
    let mut parties: Option<Vec<Party>> = None;
    let mut settings = None;
    let mut outcomes = None;
    for line in &sec.lines {
        let (key, value) = line.key_value()?;
        let value_line = line.sub(value);
        let toks = tokens(value);
        match key {
            "parties" => {
                let mut list: Vec<Party> = Vec::new();
                for t in &toks {
                    if !t.chars().all(|c| c.is_alphanumeric() || c == '_') {
                        return Err(value_line.error_at(t, format!("invalid party id `{t}`")).into());
                    }
                    if list.iter().any(|p| p.id == *t) {
                        return Err(LoadError::at(line.number, format!("duplicate party id `{t}`")));
                    }
                    list.push(Party::new(*t, list.len()));
                }
                if list.is_empty() {
                    return Err(value_line.error(0, "expected at least one party").into());
                }
                parties = Some(list);
            }
            "settings" | "outcomes" => {
                let nums = toks
                    .iter()
                    .map(|t| parse_usize(&value_line, t))
                    .collect::<Result<Vec<_>, _>>()?;
                if key == "settings" {
                    settings = Some((line.number, nums));
                } else {
                    outcomes = Some((line.number, nums));
                }
            }
            other => return Err(line.error(0, format!("unknown key `{other}` in [scenario]")).into()),
        }
    }
    let parties = parties.ok_or_else(|| LoadError::at(sec.line, "[scenario] needs `parties:`"))?;
    for (l, list) in [&settings, &outcomes].into_iter().flatten() {
        if list.len() != parties.len() {
            return Err(LoadError::at(
                *l,
                format!("{} cardinalities for {} parties", list.len(), parties.len()),
            ));
        }
    }
    Ok((parties, settings.map(|s| s.1), outcomes.map(|o| o.1)))
}

fn party_index(line: &Line<'_>, parties: &[Party], id: &str) -> Result<usize, LoadError> {
    parties
        .iter()
        .position(|p| p.id == id)
        .ok_or_else(|| LoadError::at(line.number, format!("unknown party `{id}`")))
}

/// `A<B, B<C` or chains `A<B<C`; `-` for the empty order.
fn parse_order(line: &Line<'_>, text: &str, parties: &[Party]) -> Result<CausalOrder, LoadError> {
    let mut pairs = BTreeSet::new();
    if text != "-" {
        for item in text.split(',') {
            let item = item.trim();
            let ids: Vec<&str> = item.split('<').map(str::trim).collect();
            if ids.len() < 2 || ids.iter().any(|s| s.is_empty()) {
                return Err(line.error_at(item, format!("expected `P<Q`, found `{item}`")).into());
            }
            for w in ids.windows(2) {
                pairs.insert((party_index(line, parties, w[0])?, party_index(line, parties, w[1])?));
            }
        }
    }
    make_partial_order(parties, &pairs).map_err(|e| LoadError::at(line.number, e.to_string()))
}

fn parse_contexts(
    sec: &Section<'_>,
    parties: &[Party],
    doc: &Document<'_>,
    strict: bool,
    warnings: &mut Vec<String>,
) -> Result<KripkeModel, LoadError> {
    let mut contexts = Vec::new();
    for line in &sec.lines {
        let (name, value) = line.key_value()?;
        if value.is_empty() {
            return Err(line.error(line.text.len(), "expected an order or `-`").into());
        }
        let order = parse_order(&line.sub(value), value, parties)?;
        contexts.push((name.to_string(), order));
    }
    if contexts.is_empty() {
        return Err(LoadError::at(sec.line, "[contexts] is empty"));
    }
    if contexts.len() > MAX_CONTEXTS {
        return Err(LoadError::at(sec.line, format!("more than {MAX_CONTEXTS} contexts")));
    }
    let poset = build_context_poset(contexts).map_err(|e| LoadError::at(sec.line, e.to_string()))?;
    for (a, b) in poset.duplicate_relations() {
        warnings.push(format!("contexts `{a}` and `{b}` carry the same order; kept incomparable"));
    }
    let mut model = default_order_valuation(&poset);

    let mut declared: BTreeMap<AtomKey, usize> = BTreeMap::new();
    for (section, forced) in [("atoms", true), ("posed", false)] {
        let Some(sec) = doc.section(section) else { continue };
        for line in &sec.lines {
            let (atom, ctxs) = line
                .text
                .split_once('@')
                .ok_or_else(|| line.error(line.text.len(), "expected `atom @ context ...`"))?;
            let atom = atom.trim();
            let key = atom_key(line, atom, parties)?;
            let mut set = BTreeSet::new();
            for t in tokens(ctxs) {
                let c = poset
                    .lookup(t)
                    .map_err(|_| LoadError::at(line.number, format!("unknown context `{t}`")))?;
                set.insert(c);
            }
            if !poset.is_up_closed(&set) {
                if strict {
                    return Err(LoadError::at(
                        line.number,
                        format!("[{section}] set of `{atom}` is not upward closed"),
                    ));
                }
                set = poset.up_closure(&set);
                warnings.push(format!("line {}: [{section}] set of `{atom}` closed upward", line.number));
            }
            if forced {
                if declared.insert(key.clone(), line.number).is_some() {
                    return Err(LoadError::at(line.number, format!("atom `{atom}` declared twice")));
                }
                model.set_forced(key, set);
            } else {
                if !model.is_known(&key) {
                    return Err(LoadError::at(line.number, format!("unknown atom `{atom}` in [posed]")));
                }
                if model.posed_at(&key).is_some() {
                    return Err(LoadError::at(line.number, format!("posedness of `{atom}` given twice")));
                }
                model.set_posed(key, set);
            }
        }
    }
    Ok(model)
}

fn atom_key(line: &Line<'_>, atom: &str, parties: &[Party]) -> Result<AtomKey, LoadError> {
    if let Some((a, b)) = atom.split_once('<') {
        let (i, j) = (party_index(line, parties, a.trim())?, party_index(line, parties, b.trim())?);
        if i == j {
            return Err(LoadError::at(line.number, format!("`{atom}` relates a party to itself")));
        }
        return Ok(AtomKey::Prec(i, j));
    }
    let valid = !atom.is_empty()
        && atom.chars().all(|c| c.is_alphanumeric() || c == '_')
        && !atom.chars().next().is_some_and(|c| c.is_ascii_digit())
        && atom != "false";
    if !valid {
        return Err(line.error(0, format!("invalid atom name `{atom}`")).into());
    }
    Ok(AtomKey::Named(atom.to_string()))
}

fn parse_behavior(sec: &Section<'_>, scenario: Scenario) -> Result<BehaviorTable, LoadError> {
    let mut p = vec![Rational::zero(); scenario.entries()];
    let mut seen = vec![false; scenario.entries()];
    let n = scenario.party_count();
    for line in &sec.lines {
        let parts: Vec<&str> = line.text.split(';').collect();
        if parts.len() != 3 {
            return Err(line.error(0, "expected `settings ; outcomes ; probability`").into());
        }
        let tuple = |part: &str, radix: &[usize], what: &str| -> Result<Vec<usize>, LoadError> {
            let toks = tokens(part);
            if toks.len() != n {
                return Err(line.error_at(part, format!("expected {n} {what}, found {}", toks.len())).into());
            }
            let mut out = Vec::with_capacity(n);
            for (t, &r) in toks.iter().zip(radix) {
                let v = parse_usize(line, t)?;
                if v >= r {
                    return Err(LoadError::at(line.number, format!("{what} value {v} out of range 0..{r}")));
                }
                out.push(v);
            }
            Ok(out)
        };
        let x = tuple(parts[0], scenario.settings(), "settings")?;
        let a = tuple(parts[1], scenario.outcomes(), "outcomes")?;
        let ptxt = parts[2].trim();
        let q = parse_rational(ptxt).ok_or_else(|| -> LoadError {
            line.error_at(ptxt, format!("expected a probability, found `{ptxt}`")).into()
        })?;
        let e = scenario.entry(scenario.setting_index(&x), scenario.outcome_index(&a));
        if seen[e] {
            return Err(LoadError::at(line.number, "entry given twice"));
        }
        seen[e] = true;
        p[e] = q;
    }
    BehaviorTable::new(scenario, p).map_err(|e| LoadError::at(sec.line, e.to_string()))
}

/// `[scenario]` and `[behavior]` sections readable by [`parse_scenario`].
pub fn format_behavior_document(table: &BehaviorTable) -> String {
    let s = table.scenario();
    let ids: Vec<&str> = s.parties().iter().map(|p| p.id.as_str()).collect();
    let mut out = String::new();
    out.push_str("[scenario]\n");
    out.push_str(&format!("parties: {}\n", Joined(&ids, " ")));
    out.push_str(&format!("settings: {}\n", Joined(s.settings(), " ")));
    out.push_str(&format!("outcomes: {}\n", Joined(s.outcomes(), " ")));
    out.push_str("\n[behavior]\n");
    out.push_str(&table.to_string());
    out
}
