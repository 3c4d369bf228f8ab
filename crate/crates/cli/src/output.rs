//! Trajectory CSV files and JSON reports.
//!
//! Columns: `n, gamma, tau`, then `x_<i>_<a>` player-major, then `realized_<i>`
//! (`-1` outside bandit runs), then `regret_<i>` holding the instantaneous summand
//! `max_a v_ia(x_n) - u_i(x_n)`, then `dist_<k>` for each tracked face.
//! Reals are written with 17 significant digits so that reading them back is lossless.

use std::fmt::Write as _;

use anyhow::{bail, Context, Result};

use rlgames_core::analysis::instantaneous_regret;
use rlgames_core::faces::Face;
use rlgames_core::game::Game;
use rlgames_core::learning::Trajectory;

pub fn header(n_actions: &[usize], n_faces: usize) -> Vec<String> {
    let mut h = vec!["n".to_string(), "gamma".into(), "tau".into()];
    for (i, &m) in n_actions.iter().enumerate() {
        h.extend((0..m).map(|a| format!("x_{i}_{a}")));
    }
    h.extend((0..n_actions.len()).map(|i| format!("realized_{i}")));
    h.extend((0..n_actions.len()).map(|i| format!("regret_{i}")));
    h.extend((0..n_faces).map(|k| format!("dist_{k}")));
    h
}

fn real(out: &mut String, v: f64) {
    write!(out, "{v:.16e}").expect("writing to a string");
}

pub fn trajectory_csv(traj: &Trajectory, game: &Game, faces: &[Face]) -> Result<String> {
    let mut out = header(traj.n_actions(), faces.len()).join(",");
    out.push('\n');
    for k in 0..traj.len() {
        write!(out, "{}", k + 1)?;
        out.push(',');
        real(&mut out, traj.gammas()[k]);
        out.push(',');
        real(&mut out, traj.taus()[k]);
        for &x in traj.profile(k) {
            out.push(',');
            real(&mut out, x);
        }
        for &r in traj.realized(k) {
            write!(out, ",{r}")?;
        }
        let x = traj.mixed_profile(k);
        for r in instantaneous_regret(game, &x)? {
            out.push(',');
            real(&mut out, r);
        }
        for f in faces {
            out.push(',');
            real(&mut out, rlgames_core::faces::distance_to_face(&x, f)?);
        }
        out.push('\n');
    }
    Ok(out)
}

/// A parsed trajectory CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl CsvTable {
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.split('\n');
        let header: Vec<String> = lines.next().context("empty CSV")?.split(',').map(str::to_string).collect();
        let mut rows = Vec::new();
        for (k, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let row: Vec<f64> = line
                .split(',')
                .map(|c| c.parse::<f64>().with_context(|| format!("row {}: bad number {c:?}", k + 1)))
                .collect::<Result<_>>()?;
            if row.len() != header.len() {
                bail!("row {} has {} fields, header has {}", k + 1, row.len(), header.len());
            }
            rows.push(row);
        }
        Ok(Self { header, rows })
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rlgames_core::builtin;
    use rlgames_core::learning::{run, FeedbackKind, Schedule};
    use rlgames_core::regularizer::Kernel;

    #[test]
    fn header_layout() {
        assert_eq!(
            header(&[2, 3], 1),
            ["n", "gamma", "tau", "x_0_0", "x_0_1", "x_1_0", "x_1_1", "x_1_2", "realized_0", "realized_1", "regret_0", "regret_1", "dist_0"]
        );
    }

    #[test]
    fn csv_round_trip_is_lossless() {
        let g = builtin::parity();
        let f = FeedbackKind::Bandit { exploration: Schedule::new(0.1, 0.15).unwrap() };
        let t = run(&g, Kernel::Entropic, &f, &Schedule::new(0.2, 0.5).unwrap(), 50, &vec![vec![0.3, -0.1]; 3], 9).unwrap();
        let face = Face::new(vec![vec![0], vec![0], vec![0]]).unwrap();
        let text = trajectory_csv(&t, &g, &[face]).unwrap();
        assert!(!text.contains('\r'));
        let table = CsvTable::parse(&text).unwrap();
        assert_eq!(table.rows.len(), 50);
        let x = table.column("x_1_0").unwrap();
        for (k, v) in x.iter().enumerate() {
            assert_eq!(v.to_bits(), t.profile(k)[2].to_bits());
        }
        assert_eq!(table.column("tau").unwrap(), t.taus());
        assert_eq!(table.column("realized_2").unwrap()[7], t.realized(7)[2] as f64);
    }
}
