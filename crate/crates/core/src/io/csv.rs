//! Time series of port quantities and temperature extrema.

use std::io::Write;

use crate::coupled::CoupledState;
use crate::error::Result;

/// Header of the time-series file for ports `ks`.
pub fn header(ks: &[usize]) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    for k in ks {
        for part in ["re", "im", "abs"] {
            h.push(format!("V{k}_{part}"));
        }
    }
    h.extend(["P_diss", "theta_max", "theta_min"].map(String::from));
    h
}

/// Streams one row per state.
pub struct TimeSeriesWriter<W: Write> {
    inner: csv::Writer<W>,
    ks: Vec<usize>,
}

impl<W: Write> TimeSeriesWriter<W> {
    pub fn new(out: W, ks: &[usize]) -> Result<Self> {
        let mut inner = csv::Writer::from_writer(out);
        inner.write_record(header(ks))?;
        Ok(Self { inner, ks: ks.to_vec() })
    }

    pub fn write(&mut self, state: &CoupledState) -> Result<()> {
        let mut row = vec![state.t];
        for k in &self.ks {
            let v = state
                .ports
                .iter()
                .find(|p| p.k == *k)
                .map(|p| p.voltage)
                .unwrap_or_default();
            row.extend([v.re, v.im, v.norm()]);
        }
        row.extend([state.diagnostics.p_diss, state.theta_max(), state.theta_min()]);
        self.inner.write_record(row.iter().map(|x| format!("{x:.16e}")))?;
        self.inner.flush()?;
        Ok(())
    }

    pub fn into_inner(self) -> Result<W> {
        self.inner
            .into_inner()
            .map_err(|e| crate::error::Error::Io(e.into_error()))
    }
}
