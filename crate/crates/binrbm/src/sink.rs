//! Trajectory writers.

use std::io::Write;

use binrbm_core::trainer::{TrajectoryRecord, TrajectorySink};

fn sink_err(e: impl std::fmt::Display) -> binrbm_core::Error {
    binrbm_core::Error::Sink(e.to_string())
}

/// CSV trajectory.
///
/// Columns are `step, kl_reg, lb, per_param_lb, data_term, model_term,
/// mp_nonconverged_count`, then `test_lb, test_per_param_lb` when a held-out
/// set is evaluated, then `q_0 … q_{P−1}, mean_q, raw_q_0 … raw_q_{P−1}` when
/// a planted model is registered. The layout is fixed by the first record.
/// Floats use the shortest representation that round-trips.
pub struct CsvTrajectory<W: Write> {
    out: csv::Writer<W>,
    layout: Option<(bool, usize)>,
}

impl<W: Write> CsvTrajectory<W> {
    pub fn new(out: W) -> Self {
        Self {
            out: csv::WriterBuilder::new().has_headers(false).from_writer(out),
            layout: None,
        }
    }

    pub fn into_inner(self) -> Result<W, binrbm_core::Error> {
        self.out.into_inner().map_err(|e| sink_err(e.error()))
    }

    fn header(held_out: bool, p: usize) -> Vec<String> {
        let mut h: Vec<String> = [
            "step",
            "kl_reg",
            "lb",
            "per_param_lb",
            "data_term",
            "model_term",
            "mp_nonconverged_count",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        if held_out {
            h.push("test_lb".into());
            h.push("test_per_param_lb".into());
        }
        if p > 0 {
            h.extend((0..p).map(|mu| format!("q_{mu}")));
            h.push("mean_q".into());
            h.extend((0..p).map(|mu| format!("raw_q_{mu}")));
        }
        h
    }
}

impl<W: Write> TrajectorySink for CsvTrajectory<W> {
    fn record(&mut self, rec: &TrajectoryRecord) -> binrbm_core::Result<()> {
        let layout = (rec.held_out.is_some(), rec.overlap.as_ref().map_or(0, |o| o.per_hidden_q.len()));
        match self.layout {
            None => {
                self.out.write_record(Self::header(layout.0, layout.1)).map_err(sink_err)?;
                self.layout = Some(layout);
            }
            Some(l) if l != layout => return Err(sink_err("trajectory record layout changed mid-run")),
            Some(_) => {}
        }
        let r = &rec.report;
        let mut row = vec![
            rec.step.to_string(),
            r.kl_reg.to_string(),
            r.lb.to_string(),
            r.per_param_lb.to_string(),
            r.data_term.to_string(),
            r.model_term.to_string(),
            (r.mp_nonconverged + rec.grad_mp_nonconverged).to_string(),
        ];
        if let Some(h) = &rec.held_out {
            row.push(h.lb.to_string());
            row.push(h.per_param_lb.to_string());
        }
        if let Some(o) = &rec.overlap {
            row.extend(o.per_hidden_q.iter().map(f64::to_string));
            row.push(o.mean_q.to_string());
            row.extend(o.raw_diagonal.iter().map(f64::to_string));
        }
        self.out.write_record(&row).map_err(sink_err)
    }

    fn finish(&mut self) -> binrbm_core::Result<()> {
        self.out.flush().map_err(sink_err)
    }
}

/// One JSON object per record.
pub struct JsonlTrajectory<W: Write> {
    out: W,
}

impl<W: Write> JsonlTrajectory<W> {
    pub fn new(out: W) -> Self {
        Self { out }
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

impl<W: Write> TrajectorySink for JsonlTrajectory<W> {
    fn record(&mut self, rec: &TrajectoryRecord) -> binrbm_core::Result<()> {
        serde_json::to_writer(&mut self.out, rec).map_err(sink_err)?;
        self.out.write_all(b"\n").map_err(sink_err)
    }

    fn finish(&mut self) -> binrbm_core::Result<()> {
        self.out.flush().map_err(sink_err)
    }
}

/// Forwards every record to each inner sink in order.
pub struct Tee<'a>(pub Vec<&'a mut dyn TrajectorySink>);

impl TrajectorySink for Tee<'_> {
    fn record(&mut self, rec: &TrajectoryRecord) -> binrbm_core::Result<()> {
        self.0.iter_mut().try_for_each(|s| s.record(rec))
    }

    fn finish(&mut self) -> binrbm_core::Result<()> {
        self.0.iter_mut().try_for_each(|s| s.finish())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use binrbm_core::trainer::LowerBoundReport;

    fn record(step: usize) -> TrajectoryRecord {
        TrajectoryRecord {
            step,
            report: LowerBoundReport {
                kl_reg: 0.5,
                data_term: 1.25,
                model_term: 3.0,
                lb: -2.25,
                per_param_lb: -0.1,
                mp_nonconverged: 1,
            },
            grad_mp_nonconverged: 2,
            held_out: None,
            overlap: None,
        }
    }

    #[test]
    fn csv_layout() {
        let mut sink = CsvTrajectory::new(Vec::new());
        sink.record(&record(0)).unwrap();
        sink.record(&record(5)).unwrap();
        let text = String::from_utf8(sink.into_inner().unwrap()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "step,kl_reg,lb,per_param_lb,data_term,model_term,mp_nonconverged_count");
        assert_eq!(lines[2], "5,0.5,-2.25,-0.1,1.25,3,3");
    }

    #[test]
    fn layout_change_is_an_error() {
        let mut sink = CsvTrajectory::new(Vec::new());
        sink.record(&record(0)).unwrap();
        let mut r = record(1);
        r.held_out = Some(LowerBoundReport::default());
        assert!(sink.record(&r).is_err());
    }

    #[test]
    fn jsonl_round_trip() {
        let mut sink = JsonlTrajectory::new(Vec::new());
        sink.record(&record(3)).unwrap();
        let text = String::from_utf8(sink.into_inner()).unwrap();
        let back: TrajectoryRecord = serde_json::from_str(text.trim_end()).unwrap();
        assert_eq!(back, record(3));
    }
}
