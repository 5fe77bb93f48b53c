use std::collections::BTreeMap;
use std::io::Write;

use chrono::{DateTime, SecondsFormat};

use super::IoError;
use crate::metrics::MetricsReport;
use crate::timeline::TimelinePoint;

/// `2021-02-01T00:00:00Z` style UTC rendering of epoch seconds.
pub fn iso8601(t: i64) -> String {
    DateTime::from_timestamp(t, 0)
        .map(|d| d.to_rfc3339_opts(SecondsFormat::Secs, true))
        .unwrap_or_else(|| t.to_string())
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// One metrics row per target; targets without a report keep their selector
/// and size with the remaining cells empty.
pub fn write_report_rows<'a, W, I>(writer: W, k: usize, rows: I) -> Result<(), IoError>
where
    W: Write,
    I: IntoIterator<Item = (&'a str, usize, Option<&'a MetricsReport>)>,
{
    let header = MetricsReport::csv_header(k);
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(&header)?;
    for (selector, n, report) in rows {
        match report {
            Some(r) => w.write_record(r.csv_record())?,
            None => {
                let mut row = vec![selector.to_string(), n.to_string()];
                row.resize(header.len(), String::new());
                w.write_record(&row)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Plot-ready timeline: values at the right edge of each window.
pub fn write_timeline_csv<W: Write>(
    writer: W,
    k: usize,
    points: &[TimelinePoint],
    peaks: &[usize],
) -> Result<(), IoError> {
    let mut header: Vec<String> = ["window_end_iso8601", "n_interactions", "antagonism", "sai", "sai_lo", "sai_hi", "coh_norm"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend((0..k).map(|g| format!("coh_norm_g{g}")));
    header.push("div_norm".into());
    header.extend((0..k).map(|g| format!("div_norm_g{g}")));
    header.push("is_gap".into());
    header.push("is_peak".into());

    let mut w = csv::Writer::from_writer(writer);
    w.write_record(&header)?;
    for (i, p) in points.iter().enumerate() {
        let r = p.report();
        let coh = r.and_then(|r| r.cohesiveness);
        let div = r.and_then(|r| r.divisiveness);
        let mut row = vec![
            iso8601(p.end),
            p.n_interactions.to_string(),
            opt(p.outcome.as_ref().ok().map(|r| r.antagonism)),
            opt(r.map(|r| r.sai)),
            opt(r.map(|r| r.sai_ci95.0)),
            opt(r.map(|r| r.sai_ci95.1)),
            opt(coh.map(|m| m.normalized)),
        ];
        for g in 0..k {
            row.push(opt(coh.and_then(|_| r.map(|r| r.groups[g].coh_norm))));
        }
        row.push(opt(div.map(|m| m.normalized)));
        for g in 0..k {
            row.push(opt(div.and_then(|_| r.map(|r| r.groups[g].div_norm))));
        }
        row.push(p.is_gap().to_string());
        row.push(peaks.contains(&i).to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// `k,restart_index,best_frustration` for every annealed k.
pub fn write_restarts_csv<W: Write>(writer: W, restarts: &BTreeMap<usize, Vec<usize>>) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["k", "restart_index", "best_frustration"])?;
    for (k, best) in restarts {
        for (i, f) in best.iter().enumerate() {
            w.write_record([k.to_string(), i.to_string(), f.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}
