//! Trace files: one CSV row per tick, inner lists joined with `;`, the
//! world state as canonical JSON.

use std::collections::BTreeSet;
use std::fmt::Display;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::metrics::is_lack_tick;
use crate::mindfulness::classify_layer;
use crate::model::{
    canonical_json, Action, BodyInput, Ceta, FactorMap, FeelingTone, Intensity, MentalInput,
    MindState, Trace, TraceEntry, WorldState,
};

pub const CORE_COLUMNS: [&str; 9] = [
    "t", "pixels", "focus", "mental", "feeling", "factors", "menu", "selected", "world",
];

/// Optional derived columns appended after the core ones.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ExtraColumns {
    /// One `layer:<v>` column per tracked pixel value.
    pub track: Vec<u32>,
    /// Per-tick `pain` and `lack` columns.
    pub tick_columns: bool,
}

fn join<T: Display>(items: impl IntoIterator<Item = T>) -> String {
    items
        .into_iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(";")
}

fn format_err(e: csv::Error) -> Error {
    Error::TraceFormat(e.to_string())
}

pub fn core_fields(e: &TraceEntry) -> Vec<String> {
    let c = &e.ceta;
    vec![
        c.t.to_string(),
        join(&c.body.pixels),
        join(&c.body.focus),
        join(&c.mental.objects),
        c.mind.feeling.value().to_string(),
        join(
            c.mind
                .factors
                .iter()
                .map(|(k, v)| format!("{k}:{}", v.get())),
        ),
        join(&c.action.menu),
        join(&c.action.selected),
        canonical_json(&e.world),
    ]
}

pub fn write_trace_csv(tr: &Trace, extra: &ExtraColumns) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = CORE_COLUMNS.iter().map(|s| s.to_string()).collect();
    header.extend(extra.track.iter().map(|v| format!("layer:{v}")));
    if extra.tick_columns {
        header.extend(["pain".to_string(), "lack".to_string()]);
    }
    w.write_record(&header).map_err(format_err)?;
    for e in tr.entries() {
        let mut row = core_fields(e);
        for &v in &extra.track {
            // the last tick has no successor to decide its layer
            let layer = match classify_layer(tr, v, e.ceta.t) {
                Ok(Some(l)) => l.as_str().to_string(),
                Ok(None) => "none".to_string(),
                Err(Error::IndexOutOfTrace(_)) => String::new(),
                Err(err) => return Err(err),
            };
            row.push(layer);
        }
        if extra.tick_columns {
            row.push((-e.ceta.mind.feeling.value()).max(0).to_string());
            row.push(u8::from(is_lack_tick(&e.ceta)).to_string());
        }
        w.write_record(&row).map_err(format_err)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::TraceFormat(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::TraceFormat(e.to_string()))
}

fn split<T: FromStr>(field: &str, what: &str) -> Result<Vec<T>> {
    field
        .split(';')
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|_| Error::TraceFormat(format!("bad {what} `{s}`")))
        })
        .collect()
}

fn parse_factors(field: &str) -> Result<FactorMap> {
    field
        .split(';')
        .filter(|s| !s.is_empty())
        .map(|item| {
            let bad = || Error::TraceFormat(format!("bad factor `{item}`"));
            let (name, v) = item.rsplit_once(':').ok_or_else(bad)?;
            let v: f64 = v.parse().map_err(|_| bad())?;
            Ok((name.to_string(), Intensity::new(v).map_err(|_| bad())?))
        })
        .collect()
}

fn parse_row(row: &csv::StringRecord) -> Result<TraceEntry> {
    let f = |i: usize| row.get(i).unwrap_or("");
    let t: i64 = f(0)
        .parse()
        .map_err(|_| Error::TraceFormat(format!("bad tick `{}`", f(0))))?;
    let feeling: i8 = f(4)
        .parse()
        .map_err(|_| Error::TraceFormat(format!("bad feeling `{}`", f(4))))?;
    let pixels: Vec<u32> = split(f(1), "pixel")?;
    let focus: BTreeSet<usize> = split::<usize>(f(2), "focus index")?.into_iter().collect();
    let ceta = Ceta {
        t,
        body: BodyInput::new(pixels, focus)?,
        mental: MentalInput {
            objects: split(f(3), "mental object")?.into_iter().collect(),
        },
        mind: MindState::new(FeelingTone::from_value(feeling)?, parse_factors(f(5))?),
        action: Action::new(
            split::<String>(f(6), "action")?.into_iter().collect(),
            split::<String>(f(7), "action")?.into_iter().collect(),
        )?,
    };
    let world: WorldState = serde_json::from_str(f(8))
        .map_err(|e| Error::TraceFormat(format!("bad world state: {e}")))?;
    Ok(TraceEntry { ceta, world })
}

/// Parses the core columns of each row; derived columns are ignored.
/// A malformed row is reported with its tick, or its line if the tick
/// itself is unreadable.
pub fn read_trace_csv(text: &str) -> Result<Vec<TraceEntry>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().map_err(format_err)?.clone();
    if header.len() < CORE_COLUMNS.len() || header.iter().zip(CORE_COLUMNS).any(|(a, b)| a != b) {
        return Err(Error::TraceFormat(format!(
            "header must start with {}",
            CORE_COLUMNS.join(",")
        )));
    }
    let mut out = Vec::new();
    for (i, row) in r.records().enumerate() {
        let row = row.map_err(format_err)?;
        let entry = parse_row(&row).map_err(|e| match row.get(0).and_then(|t| t.parse().ok()) {
            Some(t) => e.at_tick(t),
            None => Error::TraceFormat(format!("row {}: {e}", i + 1)),
        })?;
        out.push(entry);
    }
    Ok(out)
}

/// Reads a whole trace, checking that ticks are contiguous.
pub fn read_trace(text: &str, scenario_id: &str, seed: u64) -> Result<Trace> {
    Trace::from_entries(scenario_id, seed, read_trace_csv(text)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{MentalObject, QuoteContent, QuotedObject};

    fn sample() -> Trace {
        let mut tr = Trace::new("s", 1, -1);
        let mut c = Ceta {
            t: -1,
            body: BodyInput::new(vec![3, 0, 7], [0, 2].into()).unwrap(),
            mental: MentalInput::default(),
            mind: MindState::default(),
            action: Action::new(["ab".into(), "z".into()].into(), ["z".into()].into()).unwrap(),
        };
        tr.push(c.clone(), WorldState::cells("grid", vec![1, -2]))
            .unwrap();
        c = c.successor();
        c.mind.feeling = FeelingTone::Unpleasant;
        c.mind.set("anger", Intensity::new(0.1 + 0.2).unwrap());
        c.mental.objects.insert(MentalObject::Quote(QuotedObject {
            source: -1,
            content: QuoteContent::Object(3),
        }));
        c.mental
            .objects
            .insert(MentalObject::Concept("self".into()));
        tr.push(c, WorldState::cells("grid", vec![0, 0])).unwrap();
        tr
    }

    #[test]
    fn round_trip_is_exact() {
        let tr = sample();
        let text = write_trace_csv(&tr, &ExtraColumns::default()).unwrap();
        assert_eq!(read_trace(&text, "s", 1).unwrap(), tr);
    }

    #[test]
    fn extra_columns_are_ignored_on_read() {
        let tr = sample();
        let extra = ExtraColumns {
            track: vec![3],
            tick_columns: true,
        };
        let text = write_trace_csv(&tr, &extra).unwrap();
        let header = text.lines().next().unwrap();
        assert!(header.ends_with("layer:3,pain,lack"));
        assert_eq!(read_trace(&text, "s", 1).unwrap(), tr);
        let last = text.lines().nth(2).unwrap();
        assert!(last.ends_with(",,1,0"), "{last}");
    }

    #[test]
    fn bad_rows_name_their_tick() {
        let text = write_trace_csv(&sample(), &ExtraColumns::default()).unwrap();
        let broken = text.replacen("\n0,", "\n0,x", 1);
        assert!(matches!(
            read_trace_csv(&broken),
            Err(Error::AtTick { tick: 0, .. })
        ));
        assert!(read_trace_csv("t,x\n").is_err());
    }
}
