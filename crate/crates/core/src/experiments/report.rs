//! Report containers shared by all experiments: per-trial records plus
//! aggregate curves, serialized to JSON (full) and CSV (curves only).

use crate::error::Result;
use serde::Serialize;
use std::io::Write;

/// One aggregate curve: a named statistic over labeled bins, with the
/// number of trials that fell into each bin.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Curve {
    pub name: String,
    pub bins: Vec<String>,
    pub values: Vec<f64>,
    pub counts: Vec<usize>,
}

impl Curve {
    pub fn total_count(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn value_for(&self, bin: &str) -> Option<f64> {
        self.bins
            .iter()
            .position(|b| b == bin)
            .map(|i| self.values[i])
    }

    pub fn count_for(&self, bin: &str) -> Option<usize> {
        self.bins
            .iter()
            .position(|b| b == bin)
            .map(|i| self.counts[i])
    }
}

/// Accumulates a mean per labeled bin.
pub struct BinnedMean {
    name: String,
    bins: Vec<String>,
    sums: Vec<f64>,
    counts: Vec<usize>,
}

impl BinnedMean {
    pub fn new(name: &str, bins: Vec<String>) -> BinnedMean {
        let n = bins.len();
        BinnedMean {
            name: name.to_string(),
            bins,
            sums: vec![0.0; n],
            counts: vec![0; n],
        }
    }

    pub fn add(&mut self, bin: usize, value: f64) {
        self.sums[bin] += value;
        self.counts[bin] += 1;
    }

    pub fn finish(self) -> Curve {
        let values = self
            .sums
            .iter()
            .zip(&self.counts)
            .map(|(s, &c)| if c == 0 { f64::NAN } else { s / c as f64 })
            .collect();
        Curve {
            name: self.name,
            bins: self.bins,
            values,
            counts: self.counts,
        }
    }
}

/// Write curves as CSV rows: curve,bin,value,count.
pub fn write_curves_csv<W: Write>(w: &mut W, curves: &[Curve]) -> Result<()> {
    writeln!(w, "curve,bin,value,count")?;
    for c in curves {
        for i in 0..c.bins.len() {
            writeln!(w, "{},{},{},{}", c.name, c.bins[i], c.values[i], c.counts[i])?;
        }
    }
    Ok(())
}

/// Anything the CLI can persist and summarize.
pub trait Report: Serialize {
    fn experiment(&self) -> &'static str;
    fn seed(&self) -> u64;
    fn curves(&self) -> &[Curve];
    fn summary_lines(&self) -> Vec<String>;

    fn to_json(&self) -> Result<String> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        Ok(text)
    }

    fn curves_csv(&self) -> Result<String> {
        let mut buf = Vec::new();
        write_curves_csv(&mut buf, self.curves())?;
        Ok(String::from_utf8(buf).expect("csv is utf-8"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binned_mean_counts_every_trial() {
        let mut b = BinnedMean::new("acc", vec!["a".into(), "b".into()]);
        b.add(0, 1.0);
        b.add(0, 0.0);
        b.add(1, 1.0);
        let c = b.finish();
        assert_eq!(c.total_count(), 3);
        assert_eq!(c.value_for("a"), Some(0.5));
        assert_eq!(c.count_for("b"), Some(1));
    }

    #[test]
    fn csv_layout() {
        let c = Curve {
            name: "acc".into(),
            bins: vec!["0".into()],
            values: vec![0.75],
            counts: vec![4],
        };
        let mut buf = Vec::new();
        write_curves_csv(&mut buf, &[c]).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "curve,bin,value,count\nacc,0,0.75,4\n"
        );
    }
}
