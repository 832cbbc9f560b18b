//! CSV artifacts. Floats are written with 17 significant digits so every
//! value round-trips exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use emfield::analysis::VelocityProfile;
use emfield::{Vec3, WaveformSeries};

use crate::RunError;

pub const WAVEFORM_HEADER: &str =
    "r,t,Ex,Ey,Ez,term1x,term1y,term1z,term2x,term2y,term2z,term3x,term3y,term3z,representation";

pub const VELOCITY_HEADER: &str = "r_mid,t_star_lo,t_star_hi,v";

pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

fn push_vec(line: &mut String, v: &Vec3) {
    for x in v.iter() {
        line.push(',');
        line.push_str(&float(*x));
    }
}

/// Renders a series as CSV rows sorted by (r, t). Two-term representations
/// leave the third term as literal zeros.
pub fn waveform_csv(series: &WaveformSeries) -> String {
    let mut out = String::with_capacity(256 * series.samples().len() + 128);
    out.push_str(WAVEFORM_HEADER);
    out.push('\n');
    for (i, &r) in series.radii().iter().enumerate() {
        for (j, &t) in series.times().iter().enumerate() {
            let s = series.sample(i, j);
            let mut line = format!("{},{}", float(r), float(t));
            push_vec(&mut line, &s.total());
            for k in 0..3 {
                match s.terms().get(k) {
                    Some((_, v)) => push_vec(&mut line, v),
                    None => line.push_str(",0,0,0"),
                }
            }
            let _ = writeln!(out, "{line},{}", s.representation().name());
        }
    }
    out
}

pub fn velocity_csv(profile: &VelocityProfile) -> String {
    let mut out = String::from(VELOCITY_HEADER);
    out.push('\n');
    let (r, t) = (&profile.radii, &profile.arrival_times);
    for (i, v) in profile.local_velocity.iter().enumerate() {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            float(0.5 * (r[i] + r[i + 1])),
            float(t[i]),
            float(t[i + 1]),
            float(*v)
        );
    }
    out
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), RunError> {
    fs::write(path, contents).map_err(|source| RunError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use emfield::analysis::sample_with;
    use emfield::{ComponentSelector, FieldDecomposition, Ray, Representation, TermKind};

    fn series(rep: Representation, terms: &[TermKind]) -> WaveformSeries {
        let ray = Ray::new(Vec3::zeros(), Vec3::x()).unwrap();
        sample_with(&ray, &[1.5], &[0.25, 0.5], ComponentSelector::Magnitude, |obs| {
            let parts = terms.iter().map(|k| (*k, Vec3::new(obs.t, 0.1, -1.0 / 3.0))).collect();
            FieldDecomposition::new(rep, parts)
        })
        .unwrap()
    }

    #[test]
    fn one_radius_two_times_gives_three_lines() {
        let csv = waveform_csv(&series(Representation::Budko, &[TermKind::Near, TermKind::Intermediate, TermKind::Far]));
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], WAVEFORM_HEADER);
        assert!(lines[1].starts_with("1.5000000000000000e0,2.5000000000000000e-1,"));
        assert!(lines[1].ends_with(",budko"));
        assert!(lines.iter().all(|l| l.split(',').count() == 15));
    }

    #[test]
    fn two_term_runs_zero_fill_third_term() {
        let csv = waveform_csv(&series(Representation::Jefimenko, &[TermKind::Current, TermKind::Charge]));
        for line in csv.lines().skip(1) {
            let cols: Vec<_> = line.split(',').collect();
            assert_eq!(&cols[11..14], &["0", "0", "0"]);
            assert_eq!(cols[14], "jefimenko");
        }
    }

    #[test]
    fn floats_round_trip() {
        for x in [1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            assert_eq!(float(x).parse::<f64>().unwrap(), x);
        }
    }
}
