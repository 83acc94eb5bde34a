use std::collections::BTreeSet;

use causeglue::classifier::{classify_report, ClassifyError};
use causeglue::contexts::enumerate_total_orders;
use causeglue::forcing::{AtomKey, KripkeModel};
use causeglue::format::parse_scenario;
use causeglue::gluing::check_global_section;
use causeglue::proposition::parse_proposition;

use crate::report::{aligned, join_or_dash};
use crate::{load_error, read_input, write_csv, ClassifyArgs, CliError, GlobalArgs, Report};

pub fn run(g: &GlobalArgs, args: &ClassifyArgs) -> Result<Report, CliError> {
    let (path, src) = read_input(&g.scenario, "scenario")?;
    let file = parse_scenario(&src, g.strict).map_err(load_error(&path))?;
    let mut warnings = file.warnings.clone();
    let mut model = file
        .model
        .clone()
        .ok_or_else(|| CliError::Semantic(format!("{path}: no [contexts] section to classify over")))?;

    let props = args
        .props
        .iter()
        .map(|p| parse_proposition(p).map_err(|e| CliError::Usage(format!("--prop `{p}`: {e}"))))
        .collect::<Result<Vec<_>, _>>()?;

    let mut text = String::new();
    if let Some(atom) = &args.bind_sep {
        let line = bind_separability(&mut model, atom, &file, &mut warnings)?;
        text.push_str(&line);
    }

    let family: Vec<&str> = args.family.iter().map(String::as_str).collect();
    let rows = classify_report(&model, &family, &props).map_err(|e| match e {
        ClassifyError::EmptyFamily => CliError::Usage(e.to_string()),
        ClassifyError::Forcing(f) => CliError::Semantic(f.to_string()),
    })?;

    let mut table = vec![vec![
        "proposition".to_string(),
        "value".into(),
        "supported".into(),
        "refuted".into(),
        "indeterminate".into(),
    ]];
    let mut csv_rows = Vec::new();
    for r in &rows {
        table.push(vec![
            r.proposition.to_string(),
            r.value.to_string(),
            join_or_dash(&r.supporting),
            join_or_dash(&r.refuting),
            join_or_dash(&r.indeterminate),
        ]);
        csv_rows.push(vec![
            r.proposition.to_string(),
            r.value.to_string(),
            r.supporting.join(" "),
            r.refuting.join(" "),
            r.indeterminate.join(" "),
        ]);
    }
    text.push_str(&format!("family: {}\n", family.join(" ")));
    text.push_str(&aligned(&table, ""));

    if let Some(csv) = &g.emit_csv {
        write_csv(csv, &["prop", "value", "support", "refute", "indet"], &csv_rows)?;
    }
    Ok(Report::ok(text, warnings))
}

/// The atom is posed only at maximal contexts and forced there iff the
/// scenario's behaviour glues over all total orders.
fn bind_separability(
    model: &mut KripkeModel,
    atom: &str,
    file: &causeglue::format::ScenarioFile,
    warnings: &mut Vec<String>,
) -> Result<String, CliError> {
    let behavior = file
        .behavior
        .as_ref()
        .ok_or_else(|| CliError::Semantic("--bind-sep needs a [behavior] section".into()))?;
    let orders = enumerate_total_orders(behavior.scenario().parties()).map_err(|e| CliError::Semantic(e.to_string()))?;
    let verdict = check_global_section(behavior, &orders).map_err(|e| CliError::Runtime(e.to_string()))?;
    let key = AtomKey::Named(atom.to_string());
    if model.is_known(&key) {
        warnings.push(format!("--bind-sep replaces the declared valuation of `{atom}`"));
    }
    let poset = model.poset();
    let top: BTreeSet<usize> = (0..poset.len()).filter(|&c| poset.is_maximal(c)).collect();
    let names: Vec<String> = top.iter().map(|&c| poset.name(c).to_string()).collect();
    let forced = if verdict.gluable { top.clone() } else { BTreeSet::new() };
    model.set_forced(key.clone(), forced);
    model.set_posed(key, top);
    Ok(format!(
        "bound {atom} to {} at {}\n",
        if verdict.gluable { "GLUABLE" } else { "NOT GLUABLE" },
        names.join(" ")
    ))
}
