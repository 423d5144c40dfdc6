use std::io::{self, Write};

use super::TaskRecord;

pub const TRACE_HEADER: &str = "gen_time,local_done,edge_done,complete_time,interarrival";

fn field(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.9}")).unwrap_or_default()
}

/// Writes one comma-separated line per task; absent completions are empty.
pub fn write_trace<W: Write>(records: &[TaskRecord], mut out: W) -> io::Result<()> {
    writeln!(out, "{TRACE_HEADER}")?;
    for r in records {
        writeln!(
            out,
            "{:.9},{},{},{:.9},{:.9}",
            r.gen_time,
            field(r.local_done),
            field(r.edge_done),
            r.complete_time,
            r.interarrival
        )?;
    }
    Ok(())
}
