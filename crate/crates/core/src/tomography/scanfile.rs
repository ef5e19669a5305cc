//! Scan file format.
//!
//! ```text
//! # sideband-scan branch=blue eta=0.065 omega0_over_2pi_khz=150
//! time_us,p_g,shots
//! 0,1,100
//! 5,0.97,100
//! ```
//!
//! The first line carries the branch and the carrier parameters as
//! `key=value` pairs in any order. `shots` is 0 for noiseless values.

use std::io::{BufRead, BufReader, Read, Write};

use super::scan::{Branch, SidebandScan};
use crate::{Error, Result, TWO_PI};

pub const SCAN_HEADER_TAG: &str = "# sideband-scan";

pub fn write_scan<W: Write>(scan: &SidebandScan, out: W) -> Result<()> {
    let mut out = out;
    writeln!(
        out,
        "{SCAN_HEADER_TAG} branch={} eta={} omega0_over_2pi_khz={}",
        scan.branch.label(),
        scan.eta,
        scan.omega0 / TWO_PI / 1e3
    )?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["time_us", "p_g", "shots"])?;
    for (i, (t, p)) in scan.times.iter().zip(&scan.p_g).enumerate() {
        let shots = scan.shots.as_ref().map_or(0, |s| s[i]);
        w.write_record([format!("{}", t * 1e6), format!("{p}"), shots.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_scan<R: Read>(input: R) -> Result<SidebandScan> {
    let mut reader = BufReader::new(input);
    let mut header = String::new();
    reader.read_line(&mut header)?;
    let rest = header
        .trim_end()
        .strip_prefix(SCAN_HEADER_TAG)
        .ok_or_else(|| Error::invalid(format!("scan file must start with '{SCAN_HEADER_TAG}'")))?;
    let (mut branch, mut eta, mut omega0) = (None, None, None);
    for pair in rest.split_whitespace() {
        let (key, value) =
            pair.split_once('=').ok_or_else(|| Error::invalid(format!("malformed header field '{pair}'")))?;
        let number = || value.parse::<f64>().map_err(|_| Error::invalid(format!("bad number for {key}: '{value}'")));
        match key {
            "branch" => branch = Some(Branch::parse(value)?),
            "eta" => eta = Some(number()?),
            "omega0_over_2pi_khz" => omega0 = Some(number()? * 1e3 * TWO_PI),
            other => return Err(Error::invalid(format!("unknown header field '{other}'"))),
        }
    }
    let missing = |k: &str| Error::MissingColumn(format!("header field '{k}'"));
    let branch = branch.ok_or_else(|| missing("branch"))?;
    let eta = eta.ok_or_else(|| missing("eta"))?;
    let omega0 = omega0.ok_or_else(|| missing("omega0_over_2pi_khz"))?;

    let mut csv = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = csv.headers()?.clone();
    let column =
        |name: &str| headers.iter().position(|h| h == name).ok_or_else(|| Error::MissingColumn(name.to_string()));
    let (ct, cp, cs) = (column("time_us")?, column("p_g")?, column("shots")?);
    let (mut times, mut p_g, mut shots) = (Vec::new(), Vec::new(), Vec::new());
    for (line, record) in csv.records().enumerate() {
        let record = record?;
        let field = |c: usize| record.get(c).unwrap_or("");
        let bad = |what: &str| Error::invalid(format!("row {}: bad {what}", line + 1));
        times.push(field(ct).parse::<f64>().map_err(|_| bad("time_us"))? * 1e-6);
        p_g.push(field(cp).parse::<f64>().map_err(|_| bad("p_g"))?);
        shots.push(field(cs).parse::<u32>().map_err(|_| bad("shots"))?);
    }
    let shots = if shots.iter().all(|&s| s == 0) { None } else { Some(shots) };
    SidebandScan::new(branch, eta, omega0, times, p_g, shots)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tomography::{synthesize_scan, PhononDistribution};

    #[test]
    fn round_trip() {
        let d = PhononDistribution::new(vec![0.76, 0.01], vec![0.005, 0.225]).unwrap();
        let times: Vec<f64> = (0..20).map(|i| i as f64 * 5e-6).collect();
        let scan =
            synthesize_scan(&d, Branch::Red, 0.065, TWO_PI * 150e3, &times).unwrap().with_shot_noise(100, 3).unwrap();
        let mut buf = Vec::new();
        write_scan(&scan, &mut buf).unwrap();
        let back = read_scan(buf.as_slice()).unwrap();
        assert_eq!(back.branch, scan.branch);
        assert_eq!(back.shots, scan.shots);
        assert_eq!(back.p_g, scan.p_g);
        assert!((back.omega0 - scan.omega0).abs() < 1e-6);
        for (a, b) in back.times.iter().zip(&scan.times) {
            assert!((a - b).abs() < 1e-18);
        }
    }

    #[test]
    fn header_errors() {
        assert!(read_scan("time_us,p_g,shots\n0,1,0\n".as_bytes()).is_err());
        let no_eta = "# sideband-scan branch=red omega0_over_2pi_khz=150\ntime_us,p_g,shots\n0,1,0\n";
        assert!(matches!(read_scan(no_eta.as_bytes()), Err(Error::MissingColumn(_))));
        let mixed = "# sideband-scan branch=red eta=0.065 omega0_over_2pi_khz=150\ntime_us,p_g,shots\n0,1,0\n1,1,10\n";
        assert!(read_scan(mixed.as_bytes()).is_err());
        let no_col = "# sideband-scan branch=red eta=0.065 omega0_over_2pi_khz=150\ntime_us,shots\n0,0\n";
        assert!(matches!(read_scan(no_col.as_bytes()), Err(Error::MissingColumn(_))));
        let extra =
            "# sideband-scan branch=red eta=0.065 omega0_over_2pi_khz=150 colour=blue\ntime_us,p_g,shots\n0,1,0\n";
        assert!(read_scan(extra.as_bytes()).is_err());
    }
}
