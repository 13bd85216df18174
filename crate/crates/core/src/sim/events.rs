use std::io::Write;

use super::layout::LaneId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventKind {
    /// Vehicle entered the approach link.
    Arrive,
    /// Vehicle stopped at the back of the queue.
    Queue,
    Discharge,
}

impl EventKind {
    pub fn label(self) -> &'static str {
        match self {
            EventKind::Arrive => "arrive",
            EventKind::Queue => "queue",
            EventKind::Discharge => "discharge",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    pub tick: u64,
    pub lane: usize,
    pub kind: EventKind,
    pub vehicle_id: u64,
}

/// Writes `tick,lane,event,vehicle_id` rows.
pub fn write_events_csv<W: Write>(events: &[Event], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["tick", "lane", "event", "vehicle_id"])?;
    for e in events {
        w.write_record([
            e.tick.to_string(),
            LaneId::from_index(e.lane).label(),
            e.kind.label().to_string(),
            e.vehicle_id.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let events = vec![
            Event { tick: 3, lane: 0, kind: EventKind::Arrive, vehicle_id: 0 },
            Event { tick: 18, lane: 5, kind: EventKind::Discharge, vehicle_id: 0 },
        ];
        let mut buf = Vec::new();
        write_events_csv(&events, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "tick,lane,event,vehicle_id\n3,N0,arrive,0\n18,S1,discharge,0\n");
    }
}
