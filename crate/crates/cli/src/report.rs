use causeglue::gluing::BehaviorTable;
use causeglue::rational::{fmt_exact, int, to_f64};

/// Left-aligned columns separated by two spaces, trailing blanks trimmed.
pub fn aligned(rows: &[Vec<String>], indent: &str) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| {
            rows.iter()
                .filter_map(|r| r.get(c))
                .map(|s| s.chars().count())
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    for r in rows {
        let mut line = String::from(indent);
        for (c, cell) in r.iter().enumerate() {
            if c > 0 {
                line.push_str("  ");
            }
            line.push_str(cell);
            let pad = widths[c] - cell.chars().count();
            line.extend(std::iter::repeat_n(' ', pad));
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

pub fn join_or_dash(items: &[String]) -> String {
    if items.is_empty() {
        "-".into()
    } else {
        items.join(" ")
    }
}

/// Nonzero entries as `x ; a ; p  # float`, which the scenario loader reads back.
pub fn behavior_lines(table: &BehaviorTable, indent: &str) -> String {
    let s = table.scenario();
    let join = |v: Vec<usize>| v.iter().map(usize::to_string).collect::<Vec<_>>().join(" ");
    let zero = int(0);
    let mut out = String::new();
    for (e, q) in table.probabilities().iter().enumerate() {
        if *q == zero {
            continue;
        }
        let (x, a) = s.split_entry(e);
        out.push_str(&format!(
            "{indent}{} ; {} ; {}  # {:.6}\n",
            join(s.setting_tuple(x)),
            join(s.outcome_tuple(a)),
            fmt_exact(q),
            to_f64(q)
        ));
    }
    out
}
