use causeglue::format::parse_scenario;

use crate::report::aligned;
use crate::{load_error, read_input, write_csv, CliError, GlobalArgs, Report};

pub fn run(g: &GlobalArgs) -> Result<Report, CliError> {
    let (path, src) = read_input(&g.scenario, "scenario")?;
    let file = parse_scenario(&src, g.strict).map_err(load_error(&path))?;
    let model = file
        .model
        .as_ref()
        .ok_or_else(|| CliError::Semantic(format!("{path}: no [contexts] section")))?;
    let poset = model.poset();

    let ids: Vec<&str> = poset.parties().iter().map(|p| p.id.as_str()).collect();
    let mut text = format!("parties: {}\n", ids.join(" "));
    text.push_str("contexts:\n");
    let rows: Vec<Vec<String>> = poset
        .contexts()
        .iter()
        .enumerate()
        .map(|(c, ctx)| {
            vec![
                format!("{}:", ctx.name),
                ctx.order.to_string(),
                if poset.is_maximal(c) { "(maximal)".into() } else { String::new() },
            ]
        })
        .collect();
    text.push_str(&aligned(&rows, "  "));

    let hasse = poset.hasse_edges();
    text.push_str("hasse:\n");
    if hasse.is_empty() {
        text.push_str("  -\n");
    }
    for &(lo, hi) in &hasse {
        text.push_str(&format!("  {} < {}\n", poset.name(lo), poset.name(hi)));
    }

    if let Some(csv) = &g.emit_csv {
        let rows: Vec<Vec<String>> = hasse
            .iter()
            .map(|&(lo, hi)| vec![poset.name(lo).to_string(), poset.name(hi).to_string()])
            .collect();
        write_csv(csv, &["lower", "upper"], &rows)?;
    }
    Ok(Report::ok(text, file.warnings))
}
