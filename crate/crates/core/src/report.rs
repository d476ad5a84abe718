use num_rational::Ratio;
use serde::Serialize;

use crate::assembler::{Params, Solution};
use crate::graph::Instance;
use crate::oracle::ExactResult;
use crate::shortcuts::LpSolution;

/// One row of a run report, shared by every algorithm variant.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Report {
    pub instance_id: String,
    pub variant: String,
    pub alpha: String,
    pub beta: String,
    pub delta: String,
    pub provider: String,
    pub n: usize,
    pub m: usize,
    pub h: u64,
    pub weight: Option<u64>,
    pub opt_weight: Option<u64>,
    pub ratio: Option<f64>,
    pub max_root_distance: Option<u64>,
    /// `max_root_distance / h`.
    pub slack: Option<f64>,
    pub depth: usize,
    pub guesses_evaluated: u64,
    pub lcst_calls: u64,
    pub length_bound_ok: Option<bool>,
    pub wall_time_ms: f64,
    pub error: Option<String>,
}

pub fn ratio_str(r: Ratio<u64>) -> String {
    if *r.denom() == 1 {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl Report {
    fn base(id: &str, variant: &str, inst: &Instance) -> Self {
        Report { instance_id: id.to_string(), variant: variant.to_string(), n: inst.n, m: inst.edges.len(), h: inst.h, ..Default::default() }
    }

    pub fn main(id: &str, inst: &Instance, params: &Params, sol: &Solution) -> Self {
        Report {
            alpha: ratio_str(params.alpha),
            beta: ratio_str(params.beta),
            delta: ratio_str(params.delta),
            weight: Some(sol.weight),
            max_root_distance: Some(sol.max_root_distance),
            slack: Some(sol.max_root_distance as f64 / inst.h as f64),
            depth: sol.depth,
            guesses_evaluated: sol.stats.cells,
            lcst_calls: sol.stats.lcst_calls,
            length_bound_ok: Some(sol.within_length_bound(inst.h, params.beta)),
            wall_time_ms: sol.wall_time_ms,
            ..Self::base(id, "main", inst)
        }
    }

    pub fn lp(id: &str, inst: &Instance, provider: &str, sol: &LpSolution) -> Self {
        Report {
            beta: ratio_str(Ratio::new(sol.beta.0, sol.beta.1)),
            provider: provider.to_string(),
            weight: Some(sol.weight),
            max_root_distance: Some(sol.max_root_distance),
            slack: Some(sol.max_root_distance as f64 / inst.h as f64),
            depth: sol.depth,
            wall_time_ms: sol.wall_time_ms,
            ..Self::base(id, "lp-shortcuts", inst)
        }
    }

    pub fn exact(id: &str, inst: &Instance, r: &ExactResult, max_root_distance: Option<u64>, ms: f64) -> Self {
        Report {
            weight: r.weight,
            opt_weight: r.weight,
            ratio: r.weight.map(|_| 1.0),
            max_root_distance,
            slack: max_root_distance.map(|d| d as f64 / inst.h as f64),
            guesses_evaluated: r.examined,
            wall_time_ms: ms,
            ..Self::base(id, "exact", inst)
        }
    }

    pub fn failed(id: &str, variant: &str, inst: &Instance, err: String) -> Self {
        Report { error: Some(err), ..Self::base(id, variant, inst) }
    }

    /// Fills in the oracle optimum and the ratio to it.
    pub fn with_opt(mut self, opt: Option<u64>) -> Self {
        self.opt_weight = opt;
        self.ratio = match (self.weight, opt) {
            (Some(w), Some(o)) if o > 0 => Some(w as f64 / o as f64),
            (Some(0), Some(0)) => Some(1.0),
            _ => None,
        };
        self
    }
}

pub fn write_csv<W: std::io::Write>(rows: &[Report], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Edge, ProblemKind};

    #[test]
    fn ratio_against_opt() {
        let inst = Instance::new(ProblemKind::Lcmst, 2, vec![Edge::new(0, 1, 1, 1)], 0, 1);
        let mut r = Report::failed("x", "main", &inst, "e".into());
        r.weight = Some(6);
        assert_eq!(r.clone().with_opt(Some(4)).ratio, Some(1.5));
        r.weight = Some(0);
        assert_eq!(r.with_opt(Some(0)).ratio, Some(1.0));
    }

    #[test]
    fn csv_has_header_and_rows() {
        let inst = Instance::new(ProblemKind::Lcmst, 2, vec![Edge::new(0, 1, 1, 1)], 0, 1);
        let rows = vec![Report::failed("a", "main", &inst, "boom".into())];
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("instance_id,variant,alpha"));
        assert_eq!(text.lines().count(), 2);
    }
}
