//! Bundled example datasets, checksummed at load time.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Result, WleError};
use crate::models::Record;

struct Bundle {
    name: &'static str,
    n: usize,
    csv: &'static str,
    sha256: &'static str,
    provenance: &'static str,
}

const BUNDLES: &[Bundle] = &[
    Bundle {
        name: "drosophila",
        n: 34,
        csv: include_str!("../../data/drosophila.csv"),
        sha256: "5c1b7648553b19df67e8c512feeec6b088fcd55d2c75b68d34466700d89ac5bd",
        provenance: "recessive-lethal daughter counts, Woodruff et al. (1984) via Simpson (1987)",
    },
    Bundle {
        name: "newcomb",
        n: 66,
        csv: include_str!("../../data/newcomb.csv"),
        sha256: "6c2f7fe829cfdb197fc467070a576f7f598fce4b88ad13ab379f3e5d93c29ea9",
        provenance: "Newcomb 1882 speed-of-light passage times (Stigler 1977)",
    },
    Bundle {
        name: "rainfall",
        n: 31,
        csv: include_str!("../../data/rainfall.csv"),
        sha256: "73729ee581b1295715e944d387b54c350d320614f437110c16ed9b87077dff14",
        provenance: "reconstruction of Melbourne rain-day amounts (Staudte & Sheather 1990); see PROVENANCE.md",
    },
    Bundle {
        name: "lubischew",
        n: 43,
        csv: include_str!("../../data/lubischew.csv"),
        sha256: "848bc884cab8203c5eafc911b9e01150224286a3b105b83c286bd48bacd981fd",
        provenance: "Lubischew (1962) flea beetles; heptapotamica widths reconstructed, see PROVENANCE.md",
    },
    Bundle {
        name: "hertzsprung_russell",
        n: 47,
        csv: include_str!("../../data/hertzsprung_russell.csv"),
        sha256: "7af275a9588f4deff30ec069c425ee1a63a5a2f114bbb8468350e19cb88d8c8f",
        provenance: "star cluster CYG OB1 (Rousseeuw & Leroy 1987)",
    },
    Bundle {
        name: "animals",
        n: 28,
        csv: include_str!("../../data/animals.csv"),
        sha256: "9f444dc9015008392eacd1bc90385f1d40921870c41b469820118bee43efc6d0",
        provenance: "body and brain weights (Rousseeuw & Leroy 1987)",
    },
    Bundle {
        name: "voltage_drop",
        n: 41,
        csv: include_str!("../../data/voltage_drop.csv"),
        sha256: "514f701b5bc15a47abe8140514bee5e29a53d1a8f6678406220d326c920d3139",
        provenance: "battery voltage drop (Montgomery, Peck & Vining 2012)",
    },
];

pub fn dataset_names() -> Vec<&'static str> {
    BUNDLES.iter().map(|b| b.name).collect()
}

/// A parsed table. Non-numeric columns are kept as labels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub name: String,
    pub provenance: String,
    pub columns: Vec<String>,
    /// Row-major cells; label columns hold `NaN`.
    pub values: Vec<Vec<f64>>,
    pub labels: Vec<Vec<String>>,
}

impl Dataset {
    pub fn parse(name: &str, provenance: &str, csv_text: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(csv_text.as_bytes());
        let columns: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
        let mut values = Vec::new();
        let mut labels = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let mut row = Vec::with_capacity(columns.len());
            let mut lab = Vec::new();
            for cell in rec.iter() {
                match cell.trim().parse::<f64>() {
                    Ok(v) => row.push(v),
                    Err(_) => {
                        row.push(f64::NAN);
                        lab.push(cell.to_owned());
                    }
                }
            }
            values.push(row);
            labels.push(lab);
        }
        Ok(Dataset {
            name: name.to_owned(),
            provenance: provenance.to_owned(),
            columns,
            values,
            labels,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn index(&self, column: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c == column)
            .ok_or_else(|| WleError::NotFound(format!("column `{column}` in dataset `{}`", self.name)))
    }

    pub fn column(&self, column: &str) -> Result<Vec<f64>> {
        let j = self.index(column)?;
        let out: Vec<f64> = self.values.iter().map(|r| r[j]).collect();
        if out.iter().any(|v| v.is_nan()) {
            return Err(WleError::Parse(format!("column `{column}` is not numeric")));
        }
        Ok(out)
    }

    /// First numeric column.
    pub fn scalars(&self) -> Result<Vec<f64>> {
        let first = self
            .columns
            .iter()
            .find(|c| self.column(c).is_ok())
            .ok_or_else(|| WleError::Parse(format!("dataset `{}` has no numeric column", self.name)))?;
        self.column(first)
    }

    pub fn pairs(&self, a: &str, b: &str) -> Result<Vec<[f64; 2]>> {
        let (x, y) = (self.column(a)?, self.column(b)?);
        Ok(x.into_iter().zip(y).map(|(a, b)| [a, b]).collect())
    }

    pub fn records(&self, x: &str, y: &str) -> Result<Vec<Record>> {
        let (xs, ys) = (self.column(x)?, self.column(y)?);
        Ok(xs.into_iter().zip(ys).map(|(x, y)| Record::new(x, y)).collect())
    }

    /// Label column values (first non-numeric column).
    pub fn label_column(&self) -> Vec<String> {
        self.labels.iter().map(|l| l.first().cloned().unwrap_or_default()).collect()
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn load_dataset(name: &str) -> Result<Dataset> {
    let bundle = BUNDLES
        .iter()
        .find(|b| b.name == name)
        .ok_or_else(|| WleError::NotFound(format!("dataset `{name}`")))?;
    let actual = sha256_hex(bundle.csv.as_bytes());
    if actual != bundle.sha256 {
        return Err(WleError::Checksum {
            name: name.to_owned(),
            expected: bundle.sha256.to_owned(),
            actual,
        });
    }
    let ds = Dataset::parse(bundle.name, bundle.provenance, bundle.csv)?;
    if ds.len() != bundle.n {
        return Err(WleError::Parse(format!("dataset `{name}` has {} rows, expected {}", ds.len(), bundle.n)));
    }
    Ok(ds)
}

/// Verifies `bytes` against the pinned checksum of a bundled dataset.
pub fn verify_checksum(name: &str, bytes: &[u8]) -> Result<()> {
    let bundle = BUNDLES
        .iter()
        .find(|b| b.name == name)
        .ok_or_else(|| WleError::NotFound(format!("dataset `{name}`")))?;
    let actual = sha256_hex(bytes);
    if actual == bundle.sha256 {
        Ok(())
    } else {
        Err(WleError::Checksum {
            name: name.to_owned(),
            expected: bundle.sha256.to_owned(),
            actual,
        })
    }
}

/// ln brain weight (g) against ln body weight (kg).
pub fn animals_log_records() -> Result<Vec<Record>> {
    let ds = load_dataset("animals")?;
    Ok(ds
        .records("body_kg", "brain_g")?
        .into_iter()
        .map(|r| Record::new(r.x.ln(), r.y.ln()))
        .collect())
}

/// Angle observations of both species, concinna first.
pub fn lubischew_angles() -> Result<Vec<f64>> {
    load_dataset("lubischew")?.column("angle")
}

pub fn lubischew_pairs() -> Result<Vec<[f64; 2]>> {
    load_dataset("lubischew")?.pairs("width", "angle")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_bundle_loads() {
        for name in dataset_names() {
            load_dataset(name).unwrap();
        }
    }

    #[test]
    fn drosophila_counts() {
        let x = load_dataset("drosophila").unwrap().scalars().unwrap();
        let count = |v: f64| x.iter().filter(|&&y| y == v).count();
        assert_eq!((count(0.0), count(1.0), count(2.0), count(91.0)), (23, 7, 3, 1));
    }

    #[test]
    fn unknown_dataset() {
        assert!(matches!(load_dataset("unknown"), Err(WleError::NotFound(_))));
    }

    #[test]
    fn tampered_bytes_fail_checksum() {
        assert!(matches!(
            verify_checksum("drosophila", b"daughters\n0\n"),
            Err(WleError::Checksum { .. })
        ));
    }

    #[test]
    fn labels_kept() {
        let ds = load_dataset("lubischew").unwrap();
        let l = ds.label_column();
        assert_eq!(l.iter().filter(|s| *s == "concinna").count(), 21);
    }
}
