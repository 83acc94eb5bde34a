use causeglue::contexts::enumerate_total_orders;
use causeglue::format::{format_behavior_document, parse_model, ModelFile};
use causeglue::gluing::check_global_section;
use causeglue::rational::{fmt_exact, fmt_prob, to_f64};
use causeglue::spindyn::{
    build_state_space, empirical_occupancy, envelope_histogram, envelope_overlap, evolve_density, induced_behavior,
    order_statistics, stationary_density, Generator, Histogram, SpinDynError, SpinNetworkConfig,
};

use crate::glue::verdict_text;
use crate::report::{aligned, behavior_lines};
use crate::{load_error, read_input, write_csv, CliError, GlobalArgs, Report, SimulateArgs, EXIT_NOT_GLUABLE};

const LISTED_STATES: usize = 32;

fn dyn_error(e: SpinDynError) -> CliError {
    match e {
        SpinDynError::InvalidModel(_)
        | SpinDynError::CapExceeded
        | SpinDynError::KernelNormalization { .. }
        | SpinDynError::KernelNoMatch { .. } => CliError::Semantic(e.to_string()),
        _ => CliError::Runtime(e.to_string()),
    }
}

fn describe(state: &SpinNetworkConfig, edges: &[String]) -> String {
    edges
        .iter()
        .enumerate()
        .map(|(e, name)| format!("{name}:{}{}", state.twice_spin[e], state.helicity[e]))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn run(g: &GlobalArgs, args: &SimulateArgs) -> Result<Report, CliError> {
    let seed = g
        .seed
        .ok_or_else(|| CliError::Usage("simulate needs --seed U64; no entropy is drawn silently".into()))?;
    let (path, src) = read_input(&g.model, "model")?;
    let model = parse_model(&src).map_err(load_error(&path))?;
    if args.samples == 0 {
        return Err(CliError::Usage("--samples must be positive".into()));
    }
    if args.bins == 0 {
        return Err(CliError::Usage("--bins must be positive".into()));
    }
    let horizon = match args.horizon {
        Some(h) if h.is_finite() && h > 0.0 => h,
        Some(h) => return Err(CliError::Usage(format!("--horizon must be positive, got {h}"))),
        None => 50.0 / to_f64(&model.moves.r0),
    };

    let gen = build_state_space(&model.seed, &model.moves, model.cap).map_err(|e| match e {
        SpinDynError::InadmissibleSeed => CliError::Load {
            path: path.clone(),
            source: causeglue::format::LoadError::InadmissibleSeed,
        },
        other => dyn_error(other),
    })?;
    let start = gen.index_of(&model.seed).expect("the seed is the first explored state");
    let mut warnings = Vec::new();
    if gen.truncated() {
        warnings.push(format!("state space truncated at the cap of {} states", model.cap));
    }

    let mut text = String::new();
    let kinds: Vec<String> = model.moves.kinds.iter().map(|k| k.to_string()).collect();
    text.push_str(&format!(
        "model: {} vertices, {} edges\nmoves: {} (r0 {}, beta {}, gamma {})\n",
        model.seed.vertices,
        model.seed.edge_count(),
        if kinds.is_empty() { "-".into() } else { kinds.join(" ") },
        fmt_exact(&model.moves.r0),
        model.moves.beta,
        fmt_exact(&model.moves.gamma)
    ));
    text.push_str(&format!(
        "states: {} ({} transitions, {} rates)\nseed: {seed}\nsamples: {}\nhorizon: {horizon}\n",
        gen.len(),
        gen.transition_count(),
        if gen.is_exact() { "exact" } else { "floating-point" },
        args.samples
    ));

    text.push_str(&stationary_block(&gen, &model)?);
    text.push_str(&occupancy_block(&gen, start, horizon, args.samples, seed)?);

    let mut csv_rows = Vec::new();
    if !model.events.is_empty() {
        text.push_str(&event_blocks(&gen, start, &model, args, horizon, seed, &mut csv_rows)?);
    }

    let mut code = crate::EXIT_OK;
    if model.interventions.is_empty() {
        if args.then_glue {
            return Err(CliError::Semantic("--then-glue needs an [interventions] section".into()));
        }
    } else {
        let induced = induced_behavior(&gen, start, &model.interventions, args.samples, horizon, seed).map_err(dyn_error)?;
        let no_hits: Vec<String> = model
            .interventions
            .iter()
            .zip(&induced.no_hit_runs)
            .map(|(iv, n)| format!("{} {n}", iv.party))
            .collect();
        text.push_str(&format!(
            "induced behaviour ({} runs; runs without a hit: {}):\n",
            induced.samples,
            no_hits.join(", ")
        ));
        let doc = format_behavior_document(&induced.table);
        let head = doc.split("[behavior]").next().unwrap_or_default();
        text.push_str(head);
        text.push_str("[behavior]\n");
        text.push_str(&behavior_lines(&induced.table, ""));

        if args.then_glue {
            let orders = enumerate_total_orders(induced.table.scenario().parties())
                .map_err(|e| CliError::Semantic(e.to_string()))?;
            let verdict = check_global_section(&induced.table, &orders).map_err(|e| CliError::Runtime(e.to_string()))?;
            text.push_str("glue:\n");
            text.push_str(&verdict_text(&verdict));
            if !verdict.gluable {
                code = EXIT_NOT_GLUABLE;
            }
        }
    }

    if let Some(csv) = &g.emit_csv {
        write_csv(csv, &["event", "bin", "lo", "hi", "count", "mass"], &csv_rows)?;
    }
    Ok(Report { text, warnings, code })
}

fn stationary_block(gen: &Generator, model: &ModelFile) -> Result<String, CliError> {
    let st = stationary_density(gen).map_err(dyn_error)?;
    let mut out = format!(
        "stationary density ({} recurrent class{}, residual {:.3e}):\n",
        st.multiplicity(),
        if st.multiplicity() == 1 { "" } else { "es" },
        st.residual
    );
    let mut rows = Vec::new();
    for i in 0..gen.len().min(LISTED_STATES) {
        let value = match &st.exact {
            Some(q) => fmt_prob(&q[i]),
            None => format!("{:.6}", st.density[i]),
        };
        let state = gen.state(i).expect("index in range");
        rows.push(vec![format!("{i}"), describe(state, &model.edge_names), value]);
    }
    out.push_str(&aligned(&rows, "  "));
    if gen.len() > LISTED_STATES {
        out.push_str(&format!("  ... {} more states\n", gen.len() - LISTED_STATES));
    }
    Ok(out)
}

/// Largest per-state z-score between the uniformized density at the horizon
/// and the Monte-Carlo end-state frequencies.
fn occupancy_z(gen: &Generator, start: usize, horizon: f64, samples: u64, seed: u64) -> Result<f64, SpinDynError> {
    let mut rho0 = vec![0.0; gen.len()];
    rho0[start] = 1.0;
    let rho = evolve_density(&rho0, horizon, gen)?;
    let counts = empirical_occupancy(gen, start, horizon, samples, seed)?;
    let n = samples as f64;
    let mut worst: f64 = 0.0;
    for (r, &c) in rho.iter().zip(&counts) {
        let diff = (c as f64 / n - r).abs();
        let se = (r * (1.0 - r) / n).sqrt();
        let z = if se > 0.0 {
            diff / se
        } else if diff < 1e-9 {
            0.0
        } else {
            f64::INFINITY
        };
        worst = worst.max(z);
    }
    Ok(worst)
}

fn occupancy_block(gen: &Generator, start: usize, horizon: f64, samples: u64, seed: u64) -> Result<String, CliError> {
    let z = occupancy_z(gen, start, horizon, samples, seed).map_err(dyn_error)?;
    Ok(format!(
        "occupancy at the horizon: max |z| {z:.3} over {} states (uniformization vs {samples} runs)\n",
        gen.len()
    ))
}

fn event_blocks(
    gen: &Generator,
    start: usize,
    model: &ModelFile,
    args: &SimulateArgs,
    horizon: f64,
    seed: u64,
    csv_rows: &mut Vec<Vec<String>>,
) -> Result<String, CliError> {
    let events = &model.events;
    let mut out = String::new();
    if events.len() > 1 {
        out.push_str("order statistics:\n");
        let mut rows = Vec::new();
        for i in 0..events.len() {
            for j in i + 1..events.len() {
                let (a, b) = (&events[i], &events[j]);
                let st = order_statistics(gen, start, a, b, args.samples, horizon, seed).map_err(dyn_error)?;
                rows.push(vec![format!("{} before {}:", a.name, b.name), st.a_first.to_string()]);
                rows.push(vec![format!("{} before {}:", b.name, a.name), st.b_first.to_string()]);
                rows.push(vec![format!("{}/{} tie or none:", a.name, b.name), st.tie_or_none.to_string()]);
            }
        }
        out.push_str(&aligned(&rows, "  "));
    }

    let hists: Vec<Histogram> = events
        .iter()
        .map(|e| envelope_histogram(gen, start, e, args.samples, horizon, args.bins, seed))
        .collect::<Result<_, _>>()
        .map_err(dyn_error)?;
    out.push_str(&format!(
        "envelopes ({} bins of width {} over [0, {horizon}], conditioned on a hit):\n",
        args.bins,
        hists[0].bin_width()
    ));
    let mut rows = vec![vec!["event".to_string(), "hits".into()]];
    for (e, h) in events.iter().zip(&hists) {
        rows.push(vec![e.name.clone(), format!("{}/{} ({:.6})", h.hits, h.samples, h.hit_fraction())]);
    }
    out.push_str(&aligned(&rows, "  "));
    let mut header = vec!["bin".to_string(), "lo".into(), "hi".into()];
    header.extend(events.iter().map(|e| e.name.clone()));
    let mut rows = vec![header];
    let w = hists[0].bin_width();
    for b in 0..args.bins {
        let (lo, hi) = (b as f64 * w, (b + 1) as f64 * w);
        let mut row = vec![b.to_string(), format!("{lo:.4}"), format!("{hi:.4}")];
        for (e, h) in events.iter().zip(&hists) {
            row.push(format!("{:.6}", h.mass[b]));
            csv_rows.push(vec![
                e.name.clone(),
                b.to_string(),
                format!("{lo}"),
                format!("{hi}"),
                h.counts[b].to_string(),
                format!("{:.6}", h.mass[b]),
            ]);
        }
        rows.push(row);
    }
    out.push_str(&aligned(&rows, "  "));

    if events.len() > 1 {
        out.push_str("overlap:\n");
        let mut rows = Vec::new();
        for i in 0..events.len() {
            for j in i + 1..events.len() {
                let o = envelope_overlap(&hists[i], &hists[j]).map_err(dyn_error)?;
                rows.push(vec![format!("{}/{}:", events[i].name, events[j].name), format!("{o:.6}")]);
            }
        }
        out.push_str(&aligned(&rows, "  "));
    }
    Ok(out)
}
