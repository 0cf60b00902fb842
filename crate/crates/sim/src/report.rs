//! CSV emission. Column sets and order are part of the interface.

use std::io::Write;

use csrx_core::sweep::SweepResult;
use csrx_core::PatternScore;

use crate::harness::PsdRow;

pub const SWEEP_COLUMNS: [&str; 6] = [
    "desired_freq_hz",
    "trials",
    "successes",
    "success_probability",
    "mean_snr_db",
    "mean_drop_fraction",
];

pub const LEADERBOARD_COLUMNS: [&str; 9] = [
    "candidate_id",
    "keep_count",
    "min_gap",
    "policy",
    "trials",
    "success_rate",
    "mean_snr_db",
    "worst_snr_db",
    "mean_drop_fraction",
];

pub const PSD_COLUMNS: [&str; 3] = ["freq_hz", "psd_db", "band_label"];

pub fn write_sweep<W: Write>(out: W, result: &SweepResult) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_COLUMNS)?;
    for r in &result.rows {
        w.write_record([
            r.desired_freq_hz.to_string(),
            r.trials.to_string(),
            r.successes.to_string(),
            r.success_probability.to_string(),
            r.mean_snr_db.to_string(),
            r.mean_drop_fraction.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_leaderboard<W: Write>(out: W, leaderboard: &[PatternScore]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(LEADERBOARD_COLUMNS)?;
    for s in leaderboard {
        w.write_record([
            s.candidate_id.to_string(),
            s.keep_count().to_string(),
            s.min_gap.to_string(),
            s.policy.mode.as_str().to_string(),
            s.trials.to_string(),
            s.success_rate.to_string(),
            s.mean_snr_db.to_string(),
            s.worst_snr_db.to_string(),
            s.mean_drop_fraction.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_psd<W: Write>(out: W, rows: &[PsdRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(PSD_COLUMNS)?;
    for r in rows {
        w.write_record([
            r.freq_hz.to_string(),
            r.psd_db.to_string(),
            r.band_label.as_str().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use csrx_core::sweep::SweepRow;

    #[test]
    fn sweep_header_and_row() {
        let result = SweepResult {
            rows: vec![SweepRow {
                desired_freq_hz: 5000.0,
                trials: 2,
                successes: 1,
                success_probability: 0.5,
                mean_snr_db: 150.25,
                mean_drop_fraction: 0.0,
            }],
        };
        let mut buf = Vec::new();
        write_sweep(&mut buf, &result).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "desired_freq_hz,trials,successes,success_probability,mean_snr_db,mean_drop_fraction\n\
             5000,2,1,0.5,150.25,0\n"
        );
    }
}
