use std::collections::BTreeMap;

use super::{parse_range, parse_usize, tokens, Document, Line, LoadError, ParseError, Section};
use crate::rational::{parse_rational, Rational};
use crate::spindyn::{
    admissible, EventPredicate, Feature, FeatureValue, Helicity, Intervention, KernelRow, MoveCatalogue, MoveKind,
    Primitive, SpinNetworkConfig, MAX_STATES,
};

const SECTIONS: &[&str] = &["graph", "spins", "helicity", "moves", "events", "interventions"];
const DEFAULT_CAP: usize = 10_000;

#[derive(Debug, Clone)]
pub struct ModelFile {
    pub vertex_names: Vec<String>,
    pub edge_names: Vec<String>,
    pub seed: SpinNetworkConfig,
    pub moves: MoveCatalogue,
    pub cap: usize,
    pub clock_edge: Option<usize>,
    pub events: Vec<EventPredicate>,
    pub interventions: Vec<Intervention>,
}

impl ModelFile {
    pub fn event(&self, name: &str) -> Option<&EventPredicate> {
        self.events.iter().find(|e| e.name == name)
    }
}

struct Names {
    vertices: Vec<String>,
    edges: Vec<String>,
}

impl Names {
    fn edge(&self, line: &Line<'_>, tok: &str) -> Result<usize, ParseError> {
        self.edges
            .iter()
            .position(|e| e == tok)
            .ok_or_else(|| line.error_at(tok, format!("unknown edge `{tok}`")))
    }
}

fn is_ident(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_alphanumeric() || c == '_')
}

pub fn parse_model(src: &str) -> Result<ModelFile, LoadError> {
    let doc = Document::parse(src, SECTIONS)?;
    let graph = doc
        .section("graph")
        .ok_or_else(|| LoadError::global("missing [graph] section"))?;
    let (names, endpoints) = parse_graph(graph)?;

    let spins = parse_spins(doc.section("spins"), &names)?;
    let helicity = parse_helicity(doc.section("helicity"), &names)?;
    let seed = SpinNetworkConfig::new(names.vertices.len(), endpoints, spins, helicity)
        .map_err(|e| LoadError::at(graph.line, e.to_string()))?;
    if !admissible(&seed) {
        return Err(LoadError::InadmissibleSeed);
    }

    let (moves, cap) = match doc.section("moves") {
        Some(sec) => parse_moves(sec, &names)?,
        None => (MoveCatalogue::default(), DEFAULT_CAP),
    };
    let (clock_edge, events) = match doc.section("events") {
        Some(sec) => parse_events(sec, &names)?,
        None => (None, Vec::new()),
    };
    let interventions = match doc.section("interventions") {
        Some(sec) => parse_interventions(sec, &names, &events)?,
        None => Vec::new(),
    };
    Ok(ModelFile {
        vertex_names: names.vertices,
        edge_names: names.edges,
        seed,
        moves,
        cap,
        clock_edge,
        events,
        interventions,
    })
}

fn parse_graph(sec: &Section<'_>) -> Result<(Names, Vec<(usize, usize)>), LoadError> {
    let mut vertices: Vec<String> = Vec::new();
    let mut edges = Vec::new();
    let mut endpoints = Vec::new();
    for line in &sec.lines {
        let (name, value) = line.key_value()?;
        let value_line = line.sub(value);
        if !is_ident(name) {
            return Err(line.error(0, format!("invalid edge name `{name}`")).into());
        }
        if edges.contains(&name.to_string()) {
            return Err(LoadError::at(line.number, format!("edge `{name}` declared twice")));
        }
        let toks = tokens(value);
        if toks.len() != 2 {
            return Err(value_line.error(0, "expected two endpoint vertices").into());
        }
        let mut ends = [0usize; 2];
        for (slot, t) in ends.iter_mut().zip(&toks) {
            if !is_ident(t) {
                return Err(value_line.error_at(t, format!("invalid vertex name `{t}`")).into());
            }
            *slot = match vertices.iter().position(|v| v == t) {
                Some(i) => i,
                None => {
                    vertices.push(t.to_string());
                    vertices.len() - 1
                }
            };
        }
        edges.push(name.to_string());
        endpoints.push((ends[0], ends[1]));
    }
    if edges.is_empty() {
        return Err(LoadError::at(sec.line, "[graph] has no edges"));
    }
    Ok((Names { vertices, edges }, endpoints))
}

fn parse_spins(sec: Option<&Section<'_>>, names: &Names) -> Result<Vec<u32>, LoadError> {
    let sec = sec.ok_or_else(|| LoadError::global("missing [spins] section"))?;
    let mut spins: Vec<Option<u32>> = vec![None; names.edges.len()];
    for line in &sec.lines {
        let (name, value) = line.key_value()?;
        let e = names.edge(line, name)?;
        let v = line.sub(value);
        let s = parse_usize(&v, value)?;
        if spins[e].replace(s as u32).is_some() {
            return Err(LoadError::at(line.number, format!("spin of `{name}` given twice")));
        }
    }
    spins
        .into_iter()
        .enumerate()
        .map(|(e, s)| s.ok_or_else(|| LoadError::at(sec.line, format!("no spin for edge `{}`", names.edges[e]))))
        .collect()
}

fn parse_sign(line: &Line<'_>, tok: &str) -> Result<Helicity, ParseError> {
    match tok {
        "+" => Ok(Helicity::Plus),
        "-" => Ok(Helicity::Minus),
        _ => Err(line.error_at(tok, format!("expected `+` or `-`, found `{tok}`"))),
    }
}

/// Omitted edges start at `-`.
fn parse_helicity(sec: Option<&Section<'_>>, names: &Names) -> Result<Vec<Helicity>, LoadError> {
    let mut out = vec![Helicity::Minus; names.edges.len()];
    let Some(sec) = sec else { return Ok(out) };
    let mut seen = vec![false; out.len()];
    for line in &sec.lines {
        let (name, value) = line.key_value()?;
        let e = names.edge(line, name)?;
        out[e] = parse_sign(&line.sub(value), value)?;
        if std::mem::replace(&mut seen[e], true) {
            return Err(LoadError::at(line.number, format!("helicity of `{name}` given twice")));
        }
    }
    Ok(out)
}

fn parse_positive_rational(line: &Line<'_>, tok: &str) -> Result<Rational, ParseError> {
    parse_rational(tok).ok_or_else(|| line.error_at(tok, format!("expected a number, found `{tok}`")))
}

fn parse_moves(sec: &Section<'_>, names: &Names) -> Result<(MoveCatalogue, usize), LoadError> {
    let mut m = MoveCatalogue::default();
    let mut cap = DEFAULT_CAP;
    for line in &sec.lines {
        let (key, value) = line.key_value()?;
        let v = line.sub(value);
        let toks = tokens(value);
        let edge_list = |toks: &[&str]| -> Result<Vec<usize>, ParseError> {
            toks.iter().map(|t| names.edge(&v, t)).collect()
        };
        match key {
            "kinds" => {
                m.kinds = toks
                    .iter()
                    .map(|t| match *t {
                        "spin" => Ok(MoveKind::SpinStep),
                        "helicity" => Ok(MoveKind::HelicityFlip),
                        "recouple" => Ok(MoveKind::Recouple),
                        other => Err(v.error_at(t, format!("unknown move kind `{other}`"))),
                    })
                    .collect::<Result<_, _>>()?;
            }
            "r0" => m.r0 = parse_positive_rational(&v, value)?,
            "gamma" => m.gamma = parse_positive_rational(&v, value)?,
            "beta" => {
                m.beta = value
                    .parse()
                    .map_err(|_| v.error(0, format!("expected a number, found `{value}`")))?
            }
            "spin_window" => m.spin_window = parse_range(&v, value)?,
            "spin_edges" => m.spin_edges = Some(edge_list(&toks)?),
            "helicity_edges" => m.helicity_edges = Some(edge_list(&toks)?),
            "recouple_edges" => m.recouple_edges = Some(edge_list(&toks)?),
            "scale" => {
                for t in &toks {
                    let (e, q) = t
                        .split_once('=')
                        .ok_or_else(|| v.error_at(t, "expected `edge=factor`"))?;
                    let e = names.edge(&v, e)?;
                    m.scale.insert(e, parse_positive_rational(&v, q)?);
                }
            }
            "cap" => cap = parse_usize(&v, value)?,
            other => return Err(line.error(0, format!("unknown key `{other}` in [moves]")).into()),
        }
    }
    m.validate(names.edges.len())
        .map_err(|e| LoadError::at(sec.line, e.to_string()))?;
    if cap == 0 || cap > MAX_STATES {
        return Err(LoadError::at(sec.line, format!("cap must be in 1..={MAX_STATES}")));
    }
    Ok((m, cap))
}

fn parse_primitive(line: &Line<'_>, text: &str, names: &Names) -> Result<Primitive, ParseError> {
    let t = tokens(text);
    match t.as_slice() {
        ["helicity", e, "=", s] => Ok(Primitive::Helicity {
            edge: names.edge(line, e)?,
            value: parse_sign(line, s)?,
        }),
        ["edge", e, "spin", "in", r] => {
            let (lo, hi) = parse_range(line, r)?;
            Ok(Primitive::Spin {
                edge: names.edge(line, e)?,
                lo,
                hi,
            })
        }
        ["clock", "in", r] => {
            let (lo, hi) = parse_range(line, r)?;
            Ok(Primitive::Clock { lo, hi })
        }
        _ => Err(line.error_at(
            text,
            format!("expected `helicity E = ±`, `edge E spin in a..b` or `clock in a..b`, found `{text}`"),
        )),
    }
}

fn parse_events(sec: &Section<'_>, names: &Names) -> Result<(Option<usize>, Vec<EventPredicate>), LoadError> {
    let mut clock = None;
    let mut raw = Vec::new();
    for line in &sec.lines {
        let (key, value) = line.key_value()?;
        let v = line.sub(value);
        if key == "clock" {
            clock = Some(names.edge(&v, value)?);
            continue;
        }
        if !is_ident(key) {
            return Err(line.error(0, format!("invalid event name `{key}`")).into());
        }
        if raw.iter().any(|(n, _, _): &(String, _, _)| n == key) {
            return Err(LoadError::at(line.number, format!("event `{key}` declared twice")));
        }
        let mut tests = Vec::new();
        for part in value.split('&') {
            let part = part.trim();
            tests.push(parse_primitive(&v, part, names)?);
        }
        raw.push((key.to_string(), tests, line.number));
    }
    let mut events = Vec::new();
    for (name, tests, number) in raw {
        if clock.is_none() && tests.iter().any(|t| matches!(t, Primitive::Clock { .. })) {
            return Err(LoadError::at(number, format!("event `{name}` uses the clock but no `clock:` is set")));
        }
        events.push(EventPredicate::new(name, tests, clock));
    }
    Ok((clock, events))
}

struct PartyDecl<'a> {
    name: String,
    event: String,
    settings: usize,
    outcomes: usize,
    features: Vec<(Line<'a>, &'a str)>,
    line: usize,
}

fn parse_interventions(
    sec: &Section<'_>,
    names: &Names,
    events: &[EventPredicate],
) -> Result<Vec<Intervention>, LoadError> {
    let mut decls: Vec<PartyDecl<'_>> = Vec::new();
    let mut kernel_lines = Vec::new();
    for line in &sec.lines {
        let (key, value) = line.key_value()?;
        let v = line.sub(value);
        let (kind, party) = key
            .split_once(char::is_whitespace)
            .map(|(a, b)| (a, b.trim()))
            .ok_or_else(|| line.error(0, "expected `party NAME:` or `kernel NAME:`"))?;
        match kind {
            "party" => {
                if !is_ident(party) {
                    return Err(line.error_at(party, format!("invalid party name `{party}`")).into());
                }
                if decls.iter().any(|d| d.name == party) {
                    return Err(LoadError::at(line.number, format!("party `{party}` declared twice")));
                }
                let mut event = None;
                let (mut settings, mut outcomes) = (None, None);
                let mut features = Vec::new();
                for field in value.split(',') {
                    let field = field.trim();
                    let (k, rest) = field.split_once(char::is_whitespace).unwrap_or((field, ""));
                    let rest = rest.trim();
                    match k {
                        "event" => event = Some(rest.to_string()),
                        "settings" => settings = Some(parse_usize(&v, rest)?),
                        "outcomes" => outcomes = Some(parse_usize(&v, rest)?),
                        "features" => features.extend(tokens(rest).into_iter().map(|t| (v.clone(), t))),
                        _ => return Err(v.error_at(field, format!("unknown field `{k}`")).into()),
                    }
                }
                let missing = |what: &str| LoadError::at(line.number, format!("party `{party}` needs `{what}`"));
                decls.push(PartyDecl {
                    name: party.to_string(),
                    event: event.ok_or_else(|| missing("event"))?,
                    settings: settings.ok_or_else(|| missing("settings"))?,
                    outcomes: outcomes.ok_or_else(|| missing("outcomes"))?,
                    features,
                    line: line.number,
                });
            }
            "kernel" => kernel_lines.push((line.clone(), party, v)),
            other => return Err(line.error(0, format!("unknown entry `{other}`")).into()),
        }
    }

    let party_names: Vec<String> = decls.iter().map(|d| d.name.clone()).collect();
    let mut out = Vec::new();
    for d in &decls {
        let event = events
            .iter()
            .find(|e| e.name == d.event)
            .ok_or_else(|| LoadError::at(d.line, format!("unknown event `{}`", d.event)))?
            .clone();
        let mut features = Vec::new();
        for (fl, tok) in &d.features {
            let inner = |prefix: &str| tok.strip_prefix(prefix).and_then(|r| r.strip_suffix(')'));
            let f = if let Some(p) = inner("record(") {
                let idx = party_names
                    .iter()
                    .position(|n| n == p)
                    .ok_or_else(|| LoadError::at(fl.number, format!("record of unknown party `{p}`")))?;
                Feature::Record(idx)
            } else if let Some(e) = inner("spin(") {
                Feature::Spin(names.edge(fl, e)?)
            } else if let Some(e) = inner("helicity(") {
                Feature::Helicity(names.edge(fl, e)?)
            } else {
                return Err(fl
                    .error_at(tok, format!("expected record(P), spin(E) or helicity(E), found `{tok}`"))
                    .into());
            };
            features.push(f);
        }
        out.push(Intervention {
            party: d.name.clone(),
            event,
            settings: d.settings,
            outcomes: d.outcomes,
            features,
            kernel: Vec::new(),
        });
    }

    let mut by_party: BTreeMap<usize, usize> = BTreeMap::new();
    for (line, party, v) in kernel_lines {
        let k = party_names
            .iter()
            .position(|n| n == party)
            .ok_or_else(|| LoadError::at(line.number, format!("kernel for undeclared party `{party}`")))?;
        let iv = &mut out[k];
        let row = parse_kernel_row(&v, v.text, iv)?;
        iv.kernel.push(row);
        *by_party.entry(k).or_default() += 1;
    }
    for (k, iv) in out.iter().enumerate() {
        if !by_party.contains_key(&k) {
            return Err(LoadError::at(decls[k].line, format!("party `{}` has no kernel rows", iv.party)));
        }
        iv.validate(out.len()).map_err(|e| LoadError::at(decls[k].line, e.to_string()))?;
    }
    Ok(out)
}

fn parse_kernel_row(line: &Line<'_>, text: &str, iv: &Intervention) -> Result<KernelRow, LoadError> {
    let (lhs, rhs) = text
        .split_once("=>")
        .ok_or_else(|| line.error(text.len(), "expected `setting features... => probabilities`"))?;
    let lt = tokens(lhs);
    if lt.len() != 1 + iv.features.len() {
        return Err(line
            .error(0, format!("expected a setting and {} feature values", iv.features.len()))
            .into());
    }
    let setting = match lt[0] {
        "*" => None,
        t => Some(parse_usize(line, t)?),
    };
    let mut features = Vec::new();
    for (t, f) in lt[1..].iter().zip(&iv.features) {
        if *t == "*" {
            features.push(None);
            continue;
        }
        let value = match f {
            Feature::Record(_) if *t == "-" => FeatureValue::Unseen,
            Feature::Record(_) => FeatureValue::Setting(parse_usize(line, t)?),
            Feature::Spin(_) => FeatureValue::Spin(parse_usize(line, t)? as u32),
            Feature::Helicity(_) => FeatureValue::Helicity(parse_sign(line, t)?),
        };
        features.push(Some(value));
    }
    let probabilities = tokens(rhs)
        .into_iter()
        .map(|t| parse_rational(t).ok_or_else(|| line.error_at(t, format!("expected a probability, found `{t}`"))))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(KernelRow {
        setting,
        features,
        probabilities,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    const RACE: &str = "\
[graph]
e0: v0 v1
e1: v0 v1
e2: v0 v1

[spins]
e0: 2
e1: 2
e2: 2

[moves]
kinds: helicity
helicity_edges: e0 e1
scale: e1=3

[events]
clock: e2
A: helicity e0 = +
B: helicity e1 = + & clock in 0..4

[interventions]
party A: event A, settings 2, outcomes 2, features record(B)
party B: event B, settings 2, outcomes 2, features record(A)
kernel A: * 1 => 0 1
kernel A: * * => 1 0
kernel B: * 1 => 0 1
kernel B: * * => 1 0
";

    #[test]
    fn loads_race_model() {
        let m = parse_model(RACE).unwrap();
        assert_eq!(m.seed.edge_count(), 3);
        assert_eq!(m.moves.scale.get(&1), Some(&int(3)));
        assert_eq!(m.clock_edge, Some(2));
        assert_eq!(m.events.len(), 2);
        assert_eq!(m.interventions.len(), 2);
        assert_eq!(m.interventions[0].features, vec![Feature::Record(1)]);
        assert_eq!(m.interventions[0].kernel[0].features, vec![Some(FeatureValue::Setting(1))]);
    }

    #[test]
    fn inadmissible_seed() {
        let src = RACE.replace("e2: 2\n\n[moves]", "e2: 3\n\n[moves]");
        assert!(matches!(parse_model(&src), Err(LoadError::InadmissibleSeed)));
    }

    #[test]
    fn errors() {
        let e = parse_model(&RACE.replace("helicity e0 = +", "helicity e9 = +")).unwrap_err();
        assert!(matches!(e, LoadError::Parse(ParseError { line: 18, column: 13, .. })), "{e}");
        let e = parse_model(&RACE.replace("kernel A: * * => 1 0", "kernel A: * * => 1 1")).unwrap_err();
        assert!(matches!(e, LoadError::Semantic { .. }), "{e}");
        let e = parse_model(&RACE.replace("event A,", "event Z,")).unwrap_err();
        assert!(matches!(e, LoadError::Semantic { .. }), "{e}");
        let e = parse_model(&RACE.replace("kinds: helicity", "kinds: warp")).unwrap_err();
        assert!(matches!(e, LoadError::Parse(_)), "{e}");
    }
}
