use std::fmt::Write as _;

use mdp_core::{Deviation, RateRow};

use crate::config::fmt_num;

pub const RATE_CURVE_HEADER: &str = "t,hits,censored,p_hat,empirical_rate,theoretical_rate,ci_low,ci_high";

pub fn rate_curve_csv(rows: &[RateRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(RATE_CURVE_HEADER);
    out.push('\n');
    for row in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            fmt_num(row.t),
            row.hits,
            row.censored,
            fmt_num(row.p_hat),
            fmt_num(row.empirical_rate),
            fmt_num(row.theoretical_rate),
            fmt_num(row.ci_low),
            fmt_num(row.ci_high),
        );
    }
    out
}

pub fn deviations_csv(deviations: &[Deviation]) -> String {
    let mut out = String::from("replication,deviation,censored\n");
    for (i, d) in deviations.iter().enumerate() {
        match d {
            Deviation::Finite(v) => {
                let _ = writeln!(out, "{i},{},0", fmt_num(*v));
            }
            Deviation::Censored => {
                let _ = writeln!(out, "{i},inf,1");
            }
        }
    }
    out
}

/// Parses a knot file: one `time value` (or `time,value`) pair per line,
/// `#` comments allowed.
pub fn parse_path_file(text: &str) -> Result<Vec<(f64, f64)>, String> {
    let mut knots = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .collect();
        if fields.len() != 2 {
            return Err(format!("line {}: expected `time value`", lineno + 1));
        }
        let t: f64 = fields[0]
            .parse()
            .map_err(|_| format!("line {}: bad time `{}`", lineno + 1, fields[0]))?;
        let v: f64 = fields[1]
            .parse()
            .map_err(|_| format!("line {}: bad value `{}`", lineno + 1, fields[1]))?;
        knots.push((t, v));
    }
    Ok(knots)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let rows = [RateRow {
            t: 0.025,
            hits: 0,
            censored: 0,
            p_hat: 0.0,
            empirical_rate: f64::INFINITY,
            theoretical_rate: 0.00125,
            ci_low: 0.2,
            ci_high: f64::INFINITY,
        }];
        let csv = rate_curve_csv(&rows);
        assert_eq!(csv, format!("{RATE_CURVE_HEADER}\n0.025,0,0,0,inf,0.00125,0.2,inf\n"));
    }

    #[test]
    fn path_files() {
        let knots = parse_path_file("# knots\n0 0\n0.5, 1\n1 0.5 # end\n").unwrap();
        assert_eq!(knots, vec![(0.0, 0.0), (0.5, 1.0), (1.0, 0.5)]);
        assert!(parse_path_file("0 0 0\n").is_err());
        assert!(parse_path_file("0 x\n").is_err());
    }

    #[test]
    fn raw_deviations() {
        let csv = deviations_csv(&[Deviation::Finite(-0.5), Deviation::Censored]);
        assert_eq!(csv, "replication,deviation,censored\n0,-0.5,0\n1,inf,1\n");
    }
}
