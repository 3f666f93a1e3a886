//! Plain-text persistence of traces: one state file with a row per person per
//! day, and one contact file with a row per logged co-attendance.

use std::io::{Read, Write};
use std::path::Path;

use super::{Cell, ContactLog, EpidemicTrace, HealthState, PersonId};
use crate::{Error, Result};

pub const STATES_HEADER: [&str; 5] = ["day", "person_id", "state", "cell_row", "cell_col"];
pub const CONTACTS_HEADER: [&str; 3] = ["day", "person_a", "person_b"];

pub fn write_states<W: Write>(trace: &EpidemicTrace, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(STATES_HEADER)?;
    for day in 0..=trace.horizon() {
        let states = trace.states_on(day);
        let cells = trace.cells_on(day);
        for (k, (s, c)) in states.iter().zip(cells).enumerate() {
            w.write_record(&[
                day.to_string(),
                k.to_string(),
                s.code().to_string(),
                c.row.to_string(),
                c.col.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_contacts<W: Write>(trace: &EpidemicTrace, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CONTACTS_HEADER)?;
    for c in trace.contacts().iter() {
        w.write_record(&[c.day.to_string(), c.a.to_string(), c.b.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Write `states.csv` and `contacts.csv` into `dir`.
pub fn write_trace(trace: &EpidemicTrace, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Write {
        path: dir.to_path_buf(),
        source,
    })?;
    for (name, is_states) in [("states.csv", true), ("contacts.csv", false)] {
        let path = dir.join(name);
        let file = std::fs::File::create(&path).map_err(|source| Error::Write {
            path: path.clone(),
            source,
        })?;
        let buf = std::io::BufWriter::new(file);
        if is_states {
            write_states(trace, buf)?;
        } else {
            write_contacts(trace, buf)?;
        }
    }
    Ok(())
}

fn check_header(r: &mut csv::Reader<impl Read>, expect: &[&str]) -> Result<()> {
    let header = r.headers()?;
    if header.iter().ne(expect.iter().copied()) {
        return Err(Error::Parse(format!(
            "expected header {:?}, found {:?}",
            expect.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    Ok(())
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, line: u64) -> Result<T> {
    rec.get(i)
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Parse(format!("line {line}: bad field {i}")))
}

pub fn read_contacts<R: Read>(input: R) -> Result<ContactLog> {
    let mut r = csv::Reader::from_reader(input);
    check_header(&mut r, &CONTACTS_HEADER)?;
    let mut log = ContactLog::new();
    for rec in r.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        log.push(
            field(&rec, 0, line)?,
            PersonId(field(&rec, 1, line)?),
            PersonId(field(&rec, 2, line)?),
        );
    }
    Ok(log)
}

/// Read a trace back from its state and contact files.
pub fn read_trace<R1: Read, R2: Read>(states: R1, contacts: R2) -> Result<EpidemicTrace> {
    let mut r = csv::Reader::from_reader(states);
    check_header(&mut r, &STATES_HEADER)?;
    let mut state_days: Vec<Vec<HealthState>> = Vec::new();
    let mut cell_days: Vec<Vec<Cell>> = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let day: usize = field(&rec, 0, line)?;
        let person: usize = field(&rec, 1, line)?;
        let state = rec
            .get(2)
            .and_then(HealthState::from_code)
            .ok_or_else(|| Error::Parse(format!("line {line}: unknown state")))?;
        let cell = Cell {
            row: field(&rec, 3, line)?,
            col: field(&rec, 4, line)?,
        };
        if day == state_days.len() {
            state_days.push(Vec::new());
            cell_days.push(Vec::new());
        }
        if day + 1 != state_days.len() || person != state_days[day].len() {
            return Err(Error::Parse(format!(
                "line {line}: rows must be ordered by day then person"
            )));
        }
        state_days[day].push(state);
        cell_days[day].push(cell);
    }
    EpidemicTrace::from_parts(state_days, cell_days, read_contacts(contacts)?)
}
