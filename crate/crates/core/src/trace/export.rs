use std::fmt::Write as _;
use std::str::FromStr;

use crate::environment::Action;
use crate::model::ChunkId;

use super::event::{ProcessEvent, Trace};
use super::ohrf::{cycle_of_events, OhrfState, PolicyCycle, Segment};
use super::TraceError;

pub const TSV_COLUMNS: [&str; 7] = [
    "time_ms",
    "event_kind",
    "chunk_or_slot",
    "ohrf_state",
    "cycle_index",
    "entropy_bits",
    "gamma",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Tsv,
    Svg,
}

impl FromStr for ExportFormat {
    type Err = TraceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "tsv" => Ok(ExportFormat::Tsv),
            "svg" => Ok(ExportFormat::Svg),
            _ => Err(TraceError::UnknownFormat(s.to_string())),
        }
    }
}

impl ExportFormat {
    pub fn extension(&self) -> &'static str {
        match self {
            ExportFormat::Tsv => "tsv",
            ExportFormat::Svg => "svg",
        }
    }
}

fn kind_and_target(action: &Action) -> (&'static str, String) {
    match *action {
        Action::FixateSource(c) => ("fixate_source", c.to_string()),
        Action::FixateTarget(s) => ("fixate_target", s.to_string()),
        Action::TypeChunk { chunk, slot } => ("type", format!("{chunk}@{slot}")),
        Action::Delete(s) => ("delete", s.to_string()),
        Action::Pause(ms) => ("pause", ms.to_string()),
        Action::Consult(r) => ("consult", r.to_string()),
    }
}

pub fn export_progression(
    trace: &Trace,
    segments: &[Segment],
    cycles: &[PolicyCycle],
    format: ExportFormat,
) -> Vec<u8> {
    match format {
        ExportFormat::Tsv => export_tsv(trace, segments, cycles).into_bytes(),
        ExportFormat::Svg => export_svg(trace, segments, cycles).into_bytes(),
    }
}

fn state_of_events(segments: &[Segment], events: usize) -> Vec<Option<OhrfState>> {
    let mut out = vec![None; events];
    for seg in segments {
        for &m in &seg.members {
            out[m] = Some(seg.state);
        }
    }
    out
}

fn opt_float(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

fn export_tsv(trace: &Trace, segments: &[Segment], cycles: &[PolicyCycle]) -> String {
    let states = state_of_events(segments, trace.events.len());
    let cycle_idx = cycle_of_events(segments, cycles, trace.events.len());
    let mut out = TSV_COLUMNS.join("\t");
    out.push('\n');
    for (i, e) in trace.events.iter().enumerate() {
        let (kind, target) = kind_and_target(&e.action);
        let state = states[i].map(|s| s.letter().to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            e.t_start,
            kind,
            target,
            state,
            cycle_idx[i],
            opt_float(e.belief_entropy),
            opt_float(e.gamma)
        );
    }
    out
}

/// Column names to read from an external log.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnMap {
    pub time: String,
    pub kind: String,
    pub target: String,
}

impl Default for ColumnMap {
    fn default() -> Self {
        Self {
            time: TSV_COLUMNS[0].to_string(),
            kind: TSV_COLUMNS[1].to_string(),
            target: TSV_COLUMNS[2].to_string(),
        }
    }
}

impl ColumnMap {
    /// Parses `time=col,kind=col,target=col`; omitted keys keep defaults.
    pub fn parse(spec: &str) -> Result<Self, TraceError> {
        let mut map = Self::default();
        for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| TraceError::BadColumnMap(part.to_string()))?;
            let slot = match key.trim() {
                "time" => &mut map.time,
                "kind" => &mut map.kind,
                "target" => &mut map.target,
                _ => return Err(TraceError::BadColumnMap(part.to_string())),
            };
            *slot = value.trim().to_string();
        }
        Ok(map)
    }
}

fn ingest_error(row: usize, reason: impl Into<String>) -> TraceError {
    TraceError::Ingest {
        row,
        reason: reason.into(),
    }
}

fn parse_action(kind: &str, target: &str, row: usize) -> Result<Action, TraceError> {
    let num = |s: &str| -> Result<u64, TraceError> {
        s.trim()
            .parse::<u64>()
            .map_err(|_| ingest_error(row, format!("bad target {s:?} for {kind}")))
    };
    let chunk = |s: &str| -> Result<ChunkId, TraceError> {
        let n = num(s)?;
        u8::try_from(n)
            .map(ChunkId)
            .map_err(|_| ingest_error(row, format!("chunk id {n} out of range")))
    };
    Ok(match kind.trim() {
        "fixate_source" => Action::FixateSource(chunk(target)?),
        "fixate_target" => Action::FixateTarget(num(target)? as usize),
        "type" => {
            let (c, s) = target
                .split_once('@')
                .ok_or_else(|| ingest_error(row, format!("type target {target:?} is not chunk@slot")))?;
            Action::TypeChunk {
                chunk: chunk(c)?,
                slot: num(s)? as usize,
            }
        }
        "delete" => Action::Delete(num(target)? as usize),
        "pause" => Action::Pause(num(target)?),
        "consult" => Action::Consult(
            u32::try_from(num(target)?).map_err(|_| ingest_error(row, "resource id out of range"))?,
        ),
        other => return Err(ingest_error(row, format!("unknown event kind {other:?}"))),
    })
}

/// Reads an event-level tab-separated log. Rows are numbered from 1 for
/// the header. An event ends where the next one starts, a pause lasts its
/// stated duration, and the final event has zero length otherwise.
pub fn ingest_tsv(bytes: &[u8], columns: &ColumnMap) -> Result<Trace, TraceError> {
    let text = std::str::from_utf8(bytes).map_err(|e| ingest_error(0, format!("not UTF-8: {e}")))?;
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let Some((_, header)) = lines.next() else {
        return Err(ingest_error(1, "missing header"));
    };
    let names: Vec<&str> = header.split('\t').map(str::trim).collect();
    let find = |name: &str| {
        names
            .iter()
            .position(|n| *n == name)
            .ok_or_else(|| TraceError::MissingColumn(name.to_string()))
    };
    let (ti, ki, gi) = (find(&columns.time)?, find(&columns.kind)?, find(&columns.target)?);

    let mut rows: Vec<(u64, Action)> = Vec::new();
    for (lineno, line) in lines {
        let row = lineno + 1;
        let cells: Vec<&str> = line.split('\t').collect();
        let cell = |i: usize| {
            cells
                .get(i)
                .copied()
                .ok_or_else(|| ingest_error(row, format!("expected at least {} cells", i + 1)))
        };
        let time_cell = cell(ti)?.trim();
        let time = time_cell
            .parse::<u64>()
            .or_else(|_| {
                time_cell
                    .parse::<f64>()
                    .ok()
                    .filter(|t| t.is_finite() && *t >= 0.0)
                    .map(|t| t.round() as u64)
                    .ok_or(())
            })
            .map_err(|_| ingest_error(row, format!("unparseable time {time_cell:?}")))?;
        if let Some(&(prev, _)) = rows.last() {
            if time < prev {
                return Err(ingest_error(row, format!("time {time} precedes {prev}")));
            }
        }
        rows.push((time, parse_action(cell(ki)?, cell(gi)?, row)?));
    }

    let mut events = Vec::with_capacity(rows.len());
    for (i, &(t, action)) in rows.iter().enumerate() {
        let next = rows.get(i + 1).map(|&(n, _)| n);
        let t_end = match action {
            Action::Pause(ms) => next.map_or(t + ms, |n| n.min(t + ms)),
            _ => next.unwrap_or(t),
        };
        events.push(ProcessEvent::bare(t, t_end, action));
    }
    Ok(Trace {
        complete: false,
        ..Trace::from_events(events)
    })
}

const SVG_WIDTH: f64 = 960.0;
const SVG_MARGIN: f64 = 60.0;
const ROW_HEIGHT: f64 = 24.0;

fn band_fill(state: OhrfState) -> &'static str {
    match state {
        OhrfState::O => "#dbe9f6",
        OhrfState::H => "#fbe3c2",
        OhrfState::R => "#f6d0d0",
        OhrfState::F => "#d7efd2",
    }
}

fn export_svg(trace: &Trace, segments: &[Segment], cycles: &[PolicyCycle]) -> String {
    let mut chunks: Vec<u8> = Vec::new();
    let mut slots: usize = 0;
    for e in &trace.events {
        match e.action {
            Action::FixateSource(c) | Action::TypeChunk { chunk: c, .. } => chunks.push(c.0),
            _ => {}
        }
        if let Action::TypeChunk { slot, .. } | Action::FixateTarget(slot) | Action::Delete(slot) = e.action {
            slots = slots.max(slot);
        }
    }
    chunks.sort_unstable();
    chunks.dedup();
    let rows = chunks.len().max(1);
    let plot_h = rows as f64 * ROW_HEIGHT;
    let height = plot_h + 2.0 * SVG_MARGIN;
    let t0 = trace.events.first().map_or(0, |e| e.t_start) as f64;
    let t1 = trace.events.iter().map(|e| e.t_end).max().unwrap_or(0) as f64;
    let span = (t1 - t0).max(1.0);
    let x = |t: u64| SVG_MARGIN + (t as f64 - t0) / span * (SVG_WIDTH - 2.0 * SVG_MARGIN);
    let y = |c: ChunkId| {
        let row = chunks.iter().position(|&k| k == c.0).unwrap_or(0);
        SVG_MARGIN + (row as f64 + 0.5) * ROW_HEIGHT
    };

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{SVG_WIDTH}" height="{height}" viewBox="0 0 {SVG_WIDTH} {height}">"#
    );
    let _ = writeln!(s, "<title>Progression graph</title>");
    let _ = writeln!(s, r#"<g class="bands">"#);
    let cycle_idx = {
        let mut v = vec![0; segments.len()];
        for (ci, c) in cycles.iter().enumerate() {
            for &si in &c.segments {
                v[si] = ci;
            }
        }
        v
    };
    for (i, seg) in segments.iter().enumerate() {
        let (x0, x1) = (x(seg.t_start), x(seg.t_end));
        let _ = writeln!(
            s,
            r#"<rect class="band band-{st}" data-cycle="{cy}" x="{x0:.2}" y="{top:.2}" width="{w:.2}" height="{plot_h:.2}" fill="{fill}"><title>{st} {a}-{b} ms</title></rect>"#,
            st = seg.state.letter(),
            cy = cycle_idx[i],
            top = SVG_MARGIN,
            w = (x1 - x0).max(0.5),
            fill = band_fill(seg.state),
            a = seg.t_start,
            b = seg.t_end,
        );
    }
    let _ = writeln!(s, "</g>");
    for (ci, c) in cycles.iter().enumerate() {
        if let Some(&first) = c.segments.first() {
            let _ = writeln!(
                s,
                r#"<text class="cycle" x="{:.2}" y="{:.2}" font-size="11">{} {}</text>"#,
                x(segments[first].t_start),
                SVG_MARGIN - 8.0,
                ci,
                c.label
            );
        }
    }
    for &c in &chunks {
        let _ = writeln!(
            s,
            r#"<text class="chunk-label" x="{:.2}" y="{:.2}" font-size="11" text-anchor="end">chunk {}</text>"#,
            SVG_MARGIN - 6.0,
            y(ChunkId(c)) + 4.0,
            c
        );
    }
    let _ = writeln!(s, r#"<g class="events">"#);
    for e in &trace.events {
        match e.action {
            Action::FixateSource(c) => {
                let _ = writeln!(
                    s,
                    r##"<circle class="fixation" cx="{:.2}" cy="{:.2}" r="4" fill="#2b6cb0"/>"##,
                    x(e.t_start),
                    y(c)
                );
            }
            Action::TypeChunk { chunk, slot } => {
                let _ = writeln!(
                    s,
                    r##"<rect class="keystroke" x="{:.2}" y="{:.2}" width="{:.2}" height="6" fill="#276749"><title>{}@{}</title></rect>"##,
                    x(e.t_start),
                    y(chunk) - 3.0,
                    (x(e.t_end) - x(e.t_start)).max(1.0),
                    chunk,
                    slot
                );
            }
            Action::Delete(slot) => {
                let _ = writeln!(
                    s,
                    r##"<line class="delete" x1="{0:.2}" y1="{1:.2}" x2="{0:.2}" y2="{2:.2}" stroke="#c53030" stroke-width="2"><title>delete {3}</title></line>"##,
                    x(e.t_start),
                    SVG_MARGIN,
                    SVG_MARGIN + plot_h,
                    slot
                );
            }
            _ => {}
        }
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(
        s,
        r#"<text class="axis" x="{:.2}" y="{:.2}" font-size="11">time (ms) {}-{}</text>"#,
        SVG_MARGIN,
        SVG_MARGIN + plot_h + 20.0,
        t0 as u64,
        t1 as u64
    );
    let _ = writeln!(s, "<desc>slots: {slots}</desc>");
    s.push_str("</svg>\n");
    s
}
