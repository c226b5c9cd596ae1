use super::EquilibriumRecord;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// A candidate location is reported as a point mass when its mass exceeds
/// this multiple of the average mass of the neighbouring bins.
pub const ATOM_RATIO: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HistogramField {
    ReportedXAbs,
    YAbs,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinSpec {
    pub lo: f64,
    pub width: f64,
    pub count: usize,
}

impl BinSpec {
    pub fn new(lo: f64, width: f64, count: usize) -> Result<Self> {
        if !(lo.is_finite() && width > 0.0 && width.is_finite() && count > 0) {
            return Err(Error::invalid("bins need a finite origin, positive width and at least one bin"));
        }
        Ok(BinSpec { lo, width, count })
    }

    pub fn hi(&self) -> f64 {
        self.lo + self.width * self.count as f64
    }

    fn index(&self, x: f64) -> Option<usize> {
        let k = ((x - self.lo) / self.width).floor();
        (k >= 0.0 && (k as usize) < self.count).then_some(k as usize)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bin {
    pub lo: f64,
    pub hi: f64,
    /// Fraction of all records in the bin.
    pub mass: f64,
    /// `mass / width`.
    pub density: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub location: f64,
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub field: HistogramField,
    pub n: usize,
    pub bins: Vec<Bin>,
    pub atoms: Vec<Atom>,
    /// Mass outside the bin range.
    pub outside: f64,
}

fn value(r: &EquilibriumRecord, field: HistogramField) -> f64 {
    match field {
        HistogramField::ReportedXAbs => r.reported_x.abs(),
        HistogramField::YAbs => r.y.abs(),
    }
}

fn at(x: f64, loc: f64) -> bool {
    (x - loc).abs() <= 1e-12 * loc.abs().max(1.0)
}

/// Density-normalised histogram of `field`, optionally restricted to
/// published records. Masses are fractions of the selected records.
/// Records sitting exactly on a location in `atom_candidates` are split out
/// as a point mass when that mass dominates the neighbouring bins.
pub fn histogram_export(
    records: &[EquilibriumRecord],
    bins: &BinSpec,
    field: HistogramField,
    published_only: bool,
    atom_candidates: &[f64],
) -> Result<Histogram> {
    let selected: Vec<f64> =
        records.iter().filter(|r| !published_only || r.published).map(|r| value(r, field)).collect();
    if selected.is_empty() {
        return Err(Error::domain("no records to histogram"));
    }
    let n = selected.len();
    let mut counts = vec![0usize; bins.count];
    let mut atom_counts = vec![0usize; atom_candidates.len()];
    let mut outside = 0usize;
    for &x in &selected {
        if let Some(j) = atom_candidates.iter().position(|&c| at(x, c)) {
            atom_counts[j] += 1;
            continue;
        }
        match bins.index(x) {
            Some(k) => counts[k] += 1,
            None => outside += 1,
        }
    }
    let mut atoms = Vec::new();
    for (j, &loc) in atom_candidates.iter().enumerate() {
        let c = atom_counts[j];
        if c == 0 {
            continue;
        }
        let keep = match bins.index(loc) {
            Some(k) => {
                let neighbours: Vec<usize> =
                    [k.checked_sub(1), Some(k), (k + 1 < bins.count).then_some(k + 1)].into_iter().flatten().collect();
                let avg = neighbours.iter().map(|&i| counts[i] as f64).sum::<f64>() / neighbours.len() as f64;
                c as f64 > ATOM_RATIO * avg
            }
            None => true,
        };
        if keep {
            atoms.push(Atom { location: loc, mass: c as f64 / n as f64 });
        } else {
            match bins.index(loc) {
                Some(k) => counts[k] += c,
                None => outside += c,
            }
        }
    }
    let bins_out = counts
        .iter()
        .enumerate()
        .map(|(k, &c)| {
            let lo = bins.lo + k as f64 * bins.width;
            let mass = c as f64 / n as f64;
            Bin { lo, hi: lo + bins.width, mass, density: mass / bins.width }
        })
        .collect();
    Ok(Histogram { field, n, bins: bins_out, atoms, outside: outside as f64 / n as f64 })
}
