//! Trace and event-log writers.
//!
//! Trace records are CSV lines with the fields
//! `step,agent,x,y,vx,vy,mode,group`, in that order, preceded by a header
//! line. Floats use Rust's shortest round-trip formatting, so equal states
//! give equal bytes. `group` is -1 for individual agents.
//!
//! The event log has one JSON object per line with the keys `step`, `kind`,
//! `group`, `members` and `area` (`[min_i, min_j, max_i, max_j]` or null).

use std::io::{self, Write};

use swarmnav_core::coordination::CoordEvent;
use swarmnav_core::sim::Observer;
use swarmnav_core::AgentState;

pub const TRACE_HEADER: &str = "step,agent,x,y,vx,vy,mode,group";

/// Writes trace records and events; remembers the first IO error.
pub struct TraceWriter<T: Write, E: Write> {
    trace: Option<T>,
    events: Option<E>,
    error: Option<io::Error>,
    records: u64,
}

impl<T: Write, E: Write> TraceWriter<T, E> {
    pub fn new(trace: Option<T>, events: Option<E>) -> Self {
        let mut w = TraceWriter {
            trace,
            events,
            error: None,
            records: 0,
        };
        if let Some(t) = w.trace.as_mut() {
            let r = writeln!(t, "{TRACE_HEADER}");
            w.keep(r);
        }
        w
    }

    fn keep(&mut self, r: io::Result<()>) {
        if let Err(e) = r {
            self.error.get_or_insert(e);
        }
    }

    pub fn records(&self) -> u64 {
        self.records
    }

    /// Flushes both sinks and reports the first error seen.
    pub fn finish(mut self) -> io::Result<(Option<T>, Option<E>)> {
        if let Some(t) = self.trace.as_mut() {
            let r = t.flush();
            self.keep(r);
        }
        if let Some(e) = self.events.as_mut() {
            let r = e.flush();
            self.keep(r);
        }
        match self.error {
            Some(e) => Err(e),
            None => Ok((self.trace, self.events)),
        }
    }
}

pub fn write_record(out: &mut impl Write, step: u64, a: &AgentState) -> io::Result<()> {
    let group = a.mode.group().map_or(-1, i64::from);
    writeln!(
        out,
        "{},{},{},{},{},{},{},{}",
        step,
        a.id,
        a.position.x,
        a.position.y,
        a.velocity.x,
        a.velocity.y,
        a.mode.tag(),
        group
    )
}

pub fn event_json(e: &CoordEvent) -> serde_json::Value {
    let area = e.area.map(|a| {
        [
            a.min_corner.i,
            a.min_corner.j,
            a.max_corner.i,
            a.max_corner.j,
        ]
    });
    serde_json::json!({
        "step": e.step,
        "kind": e.kind.tag(),
        "group": e.group,
        "members": e.members,
        "area": area,
    })
}

impl<T: Write, E: Write> Observer for TraceWriter<T, E> {
    fn on_step(&mut self, step: u64, agents: &[AgentState]) {
        if self.error.is_some() {
            return;
        }
        if let Some(t) = self.trace.as_mut() {
            let mut r = Ok(());
            for a in agents {
                r = write_record(t, step, a);
                if r.is_err() {
                    break;
                }
                self.records += 1;
            }
            self.keep(r);
        }
    }

    fn on_event(&mut self, event: &CoordEvent) {
        if let Some(e) = self.events.as_mut() {
            let r = writeln!(e, "{}", event_json(event));
            self.keep(r);
        }
    }
}
