use causeglue::contexts::{enumerate_total_orders, CausalOrder};
use causeglue::format::{parse_scenario, ScenarioFile};
use causeglue::gluing::{
    causal_fraction, check_global_section, l1_distance_to_gluable, separating_witness, BehaviorTable, GlueError,
    GlueVerdict, Witness,
};
use causeglue::rational::{fmt_exact, fmt_prob, to_f64, Rational};

use crate::report::behavior_lines;
use crate::{
    load_error, read_input, write_csv, CliError, FractionArgs, GlobalArgs, GlueArgs, Measure, OrderSource, Report,
    EXIT_NOT_GLUABLE,
};

fn glue_error(e: GlueError) -> CliError {
    match e {
        GlueError::Size(_) | GlueError::Solver(_) => CliError::Runtime(e.to_string()),
        _ => CliError::Semantic(e.to_string()),
    }
}

fn load(g: &GlobalArgs) -> Result<(String, ScenarioFile, BehaviorTable), CliError> {
    let (path, src) = read_input(&g.scenario, "scenario")?;
    let file = parse_scenario(&src, g.strict).map_err(load_error(&path))?;
    let behavior = file
        .behavior
        .clone()
        .ok_or_else(|| CliError::Semantic(format!("{path}: no [behavior] section")))?;
    Ok((path, file, behavior))
}

fn select_orders(file: &ScenarioFile, table: &BehaviorTable, source: OrderSource) -> Result<Vec<CausalOrder>, CliError> {
    match source {
        OrderSource::All => enumerate_total_orders(table.scenario().parties()).map_err(|e| CliError::Semantic(e.to_string())),
        OrderSource::Contexts => {
            let model = file
                .model
                .as_ref()
                .ok_or_else(|| CliError::Semantic("--orders contexts needs a [contexts] section".into()))?;
            let mut out: Vec<CausalOrder> = Vec::new();
            for c in model.poset().contexts() {
                if c.order.is_total() && !out.iter().any(|o| o.relation() == c.order.relation()) {
                    out.push(c.order.clone());
                }
            }
            if out.is_empty() {
                return Err(CliError::Semantic("no declared context is a total order".into()));
            }
            Ok(out)
        }
    }
}

fn header(table: &BehaviorTable, orders: &[CausalOrder]) -> String {
    let s = table.scenario();
    let ids: Vec<&str> = s.parties().iter().map(|p| p.id.as_str()).collect();
    let nums = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(" ");
    let orders: Vec<String> = orders.iter().map(|o| o.to_string()).collect();
    format!(
        "parties: {}\nsettings: {}\noutcomes: {}\norders: {}\n",
        ids.join(" "),
        nums(s.settings()),
        nums(s.outcomes()),
        orders.join(" | ")
    )
}

fn witness_block(w: &Witness) -> String {
    format!(
        "witness: {w}\nwitness value: {} exceeds bound {}\n",
        fmt_prob(&w.value),
        w.bound
    )
}

/// Verdict block shared with `simulate --then-glue`.
pub fn verdict_text(v: &GlueVerdict) -> String {
    let mut out = String::new();
    out.push_str(if v.gluable { "verdict: GLUABLE\n" } else { "verdict: NOT GLUABLE\n" });
    if let Some(cert) = &v.certificate {
        out.push_str("certificate:\n");
        for c in cert {
            out.push_str(&format!("  order {} weight {}\n", c.order, fmt_prob(&c.weight)));
            out.push_str(&behavior_lines(&c.table, "    "));
        }
    }
    if let Some(w) = &v.witness {
        out.push_str(&witness_block(w));
    }
    out.push_str(&format!("causal fraction: {}\n", fmt_prob(&v.causal_fraction)));
    out.push_str(&format!("l1 distance: {}\n", fmt_prob(&v.l1_distance)));
    out
}

pub fn run_glue(g: &GlobalArgs, args: &GlueArgs) -> Result<Report, CliError> {
    let (_, file, table) = load(g)?;
    let orders = select_orders(&file, &table, args.orders)?;
    let verdict = check_global_section(&table, &orders).map_err(glue_error)?;
    let mut text = header(&table, &orders);
    text.push_str(&verdict_text(&verdict));

    if let Some(csv) = &g.emit_csv {
        let s = table.scenario();
        let nums = |v: Vec<usize>| v.iter().map(usize::to_string).collect::<Vec<_>>().join(" ");
        let rows: Vec<Vec<String>> = table
            .probabilities()
            .iter()
            .enumerate()
            .map(|(e, q)| {
                let (x, a) = s.split_entry(e);
                let coeff = verdict
                    .witness
                    .as_ref()
                    .map(|w| w.coefficients[e].to_string())
                    .unwrap_or_default();
                vec![
                    nums(s.setting_tuple(x)),
                    nums(s.outcome_tuple(a)),
                    fmt_exact(q),
                    format!("{:.6}", to_f64(q)),
                    coeff,
                ]
            })
            .collect();
        write_csv(csv, &["settings", "outcomes", "probability", "float", "witness_coefficient"], &rows)?;
    }
    let code = if verdict.gluable { crate::EXIT_OK } else { EXIT_NOT_GLUABLE };
    Ok(Report {
        text,
        warnings: file.warnings,
        code,
    })
}

pub fn run_fraction(g: &GlobalArgs, args: &FractionArgs) -> Result<Report, CliError> {
    let (_, file, table) = load(g)?;
    let orders = select_orders(&file, &table, args.orders)?;
    let mut text = header(&table, &orders);
    let mut csv_rows = Vec::new();
    let mut emit = |name: &str, q: &Rational, text: &mut String| {
        text.push_str(&format!("{name}: {}\n", fmt_prob(q)));
        csv_rows.push(vec![name.to_string(), fmt_exact(q), format!("{:.6}", to_f64(q))]);
    };
    let mut gluable = None;
    if matches!(args.measure, Measure::Cf | Measure::Both) {
        let cf = causal_fraction(&table, &orders).map_err(glue_error)?;
        gluable = Some(cf == Rational::from_integer(1.into()));
        emit("causal fraction", &cf, &mut text);
    }
    if matches!(args.measure, Measure::L1 | Measure::Both) {
        let l1 = l1_distance_to_gluable(&table, &orders).map_err(glue_error)?;
        gluable = Some(l1 == Rational::from_integer(0.into()));
        emit("l1 distance", &l1, &mut text);
    }
    if args.witness {
        if gluable == Some(true) {
            text.push_str("witness: none, the behaviour glues\n");
        } else {
            let w = separating_witness(&table, &orders).map_err(glue_error)?;
            text.push_str(&witness_block(&w));
        }
    }
    if let Some(csv) = &g.emit_csv {
        write_csv(csv, &["measure", "exact", "float"], &csv_rows)?;
    }
    Ok(Report::ok(text, file.warnings))
}
