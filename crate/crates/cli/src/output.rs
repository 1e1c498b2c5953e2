use std::{fs::File, io::Write, path::Path};

use donor_drp::{Error, Result};

/// 17 significant digits, enough to round-trip any f64.
pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

pub struct Table {
    writer: csv::Writer<Box<dyn Write>>,
}

impl Table {
    pub fn create(path: Option<&Path>, header: &[String]) -> Result<Self> {
        let sink: Box<dyn Write> = match path {
            Some(p) => Box::new(
                File::create(p).map_err(|e| Error::Parameter(format!("{}: {e}", p.display())))?,
            ),
            None => Box::new(std::io::stdout().lock()),
        };
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(sink);
        writer.write_record(header).map_err(io_err)?;
        Ok(Self { writer })
    }

    pub fn row(&mut self, fields: &[String]) -> Result<()> {
        self.writer.write_record(fields).map_err(io_err)
    }

    pub fn finish(mut self) -> Result<()> {
        self.writer.flush().map_err(|e| io_err(e.into()))
    }
}

fn io_err(e: csv::Error) -> Error {
    // A closed pipe (`| head`) is not an error worth reporting.
    if let csv::ErrorKind::Io(io) = e.kind() {
        if io.kind() == std::io::ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
    }
    Error::Parameter(format!("writing CSV: {e}"))
}

/// A single value or an inclusive sweep `lo:hi:n`.
pub fn parse_sweep(text: &str) -> Result<Vec<f64>> {
    let bad = |why: &str| Error::Parameter(format!("`{text}`: {why}"));
    let parts: Vec<&str> = text.split(':').map(str::trim).collect();
    let num = |s: &str| s.parse::<f64>().map_err(|_| bad("not a number"));
    match parts.as_slice() {
        [x] => Ok(vec![num(x)?]),
        [lo, hi, n] => {
            let (lo, hi) = (num(lo)?, num(hi)?);
            let n: usize = n
                .parse()
                .map_err(|_| bad("point count must be an integer"))?;
            if n < 2 || !(lo < hi) {
                return Err(bad("need lo < hi and at least 2 points"));
            }
            Ok((0..n)
                .map(|k| {
                    if k + 1 == n {
                        hi
                    } else {
                        lo + (hi - lo) * k as f64 / (n - 1) as f64
                    }
                })
                .collect())
        }
        _ => Err(bad("expected a value or lo:hi:n")),
    }
}

/// An interval `lo:hi`.
pub fn parse_range(text: &str) -> Result<(f64, f64)> {
    let bad = || Error::Parameter(format!("`{text}`: expected lo:hi"));
    let (lo, hi) = text.split_once(':').ok_or_else(bad)?;
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    if !(lo < hi) {
        return Err(bad());
    }
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_has_seventeen_digits() {
        assert_eq!(float(0.1), "1.0000000000000001e-1");
        assert_eq!(float(1.0), "1.0000000000000000e0");
        let x = 0.210_742_219_294_834_1;
        assert_eq!(float(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn sweeps() {
        assert_eq!(parse_sweep("0.5").unwrap(), vec![0.5]);
        let s = parse_sweep("0:0.6:601").unwrap();
        assert_eq!(s.len(), 601);
        assert_eq!(s[600], 0.6);
        assert!(parse_sweep("1:0:5").is_err());
        assert!(parse_sweep("0:1").is_err());
        assert_eq!(parse_range("0.01:0.3").unwrap(), (0.01, 0.3));
        assert!(parse_range("0.3:0.01").is_err());
    }
}
