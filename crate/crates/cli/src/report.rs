//! Tab-separated run reports and their aggregation.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context};

pub const HEADER: &str =
    "instance\tn\tm\tconflicts\tstatus\tnodes\tprunes\twall_ms\treduction\toutputs";

pub const AGGREGATE_HEADER: &str =
    "#aggregate\tn\tm\tcount\ttotal_s\tavg_s\tunsat\ttotal_conflicts\tavg_conflicts\ttimeouts\terrors";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum RunStatus {
    Sat,
    Unsat,
    Timeout,
    Error,
}

impl fmt::Display for RunStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RunStatus::Sat => "SAT",
            RunStatus::Unsat => "UNSAT",
            RunStatus::Timeout => "TIMEOUT",
            RunStatus::Error => "ERROR",
        })
    }
}

impl FromStr for RunStatus {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "SAT" => RunStatus::Sat,
            "UNSAT" => RunStatus::Unsat,
            "TIMEOUT" => RunStatus::Timeout,
            "ERROR" => RunStatus::Error,
            other => bail!("unknown status `{other}`"),
        })
    }
}

impl From<perphylo::Status> for RunStatus {
    fn from(s: perphylo::Status) -> Self {
        match s {
            perphylo::Status::Sat => RunStatus::Sat,
            perphylo::Status::Unsat => RunStatus::Unsat,
            perphylo::Status::Timeout => RunStatus::Timeout,
        }
    }
}

/// One solver run. `reduction` holds character labels; empty unless SAT.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub instance: String,
    pub n: usize,
    pub m: usize,
    pub conflicts: usize,
    pub status: RunStatus,
    pub nodes: u64,
    pub prunes: u64,
    pub wall_ms: f64,
    pub reduction: Vec<String>,
    pub outputs: Vec<String>,
}

impl RunReport {
    pub fn error(instance: &str) -> Self {
        Self {
            instance: instance.to_string(),
            n: 0,
            m: 0,
            conflicts: 0,
            status: RunStatus::Error,
            nodes: 0,
            prunes: 0,
            wall_ms: 0.0,
            reduction: Vec::new(),
            outputs: Vec::new(),
        }
    }
}

fn list(items: &[String]) -> String {
    if items.is_empty() {
        "-".to_string()
    } else {
        items.join(",")
    }
}

fn unlist(field: &str) -> Vec<String> {
    if field == "-" {
        Vec::new()
    } else {
        field.split(',').map(str::to_string).collect()
    }
}

impl fmt::Display for RunReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{:.3}\t{}\t{}",
            self.instance,
            self.n,
            self.m,
            self.conflicts,
            self.status,
            self.nodes,
            self.prunes,
            self.wall_ms,
            list(&self.reduction),
            list(&self.outputs)
        )
    }
}

impl FromStr for RunReport {
    type Err = anyhow::Error;

    fn from_str(line: &str) -> Result<Self, Self::Err> {
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 10 {
            bail!("expected 10 fields, found {}", f.len());
        }
        let num = |i: usize| -> anyhow::Result<u64> {
            f[i].parse()
                .with_context(|| format!("field {} `{}`", i + 1, f[i]))
        };
        let wall_ms: f64 = f[7].parse().context("wall_ms")?;
        if wall_ms.is_nan() || wall_ms < 0.0 {
            return Err(anyhow!("negative wall time {wall_ms}"));
        }
        Ok(Self {
            instance: f[0].to_string(),
            n: num(1)? as usize,
            m: num(2)? as usize,
            conflicts: num(3)? as usize,
            status: f[4].parse()?,
            nodes: num(5)?,
            prunes: num(6)?,
            wall_ms,
            reduction: unlist(f[8]),
            outputs: unlist(f[9]),
        })
    }
}

/// Parses a report, skipping the header, comments and aggregate rows.
pub fn parse_reports(text: &str) -> anyhow::Result<Vec<RunReport>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#') && *l != HEADER)
        .map(|(i, l)| l.parse().with_context(|| format!("report line {}", i + 1)))
        .collect()
}

/// Summary of the runs sharing one shape. Timeouts and errors are counted
/// but left out of every other field.
#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub n: usize,
    pub m: usize,
    pub count: usize,
    pub total_s: f64,
    pub unsat: usize,
    pub total_conflicts: usize,
    pub timeouts: usize,
    pub errors: usize,
}

impl Aggregate {
    pub fn avg_s(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.total_s / self.count as f64
        }
    }

    pub fn avg_conflicts(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.total_conflicts as f64 / self.count as f64
        }
    }
}

impl fmt::Display for Aggregate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "#aggregate\t{}\t{}\t{}\t{:.3}\t{:.3}\t{}\t{}\t{:.2}\t{}\t{}",
            self.n,
            self.m,
            self.count,
            self.total_s,
            self.avg_s(),
            self.unsat,
            self.total_conflicts,
            self.avg_conflicts(),
            self.timeouts,
            self.errors
        )
    }
}

/// Groups reports by `(n, m)`. Errors have no shape and form their own
/// `(0, 0)` group.
pub fn aggregate(reports: &[RunReport]) -> Vec<Aggregate> {
    let mut groups: BTreeMap<(usize, usize), Aggregate> = BTreeMap::new();
    for r in reports {
        let a = groups.entry((r.n, r.m)).or_insert(Aggregate {
            n: r.n,
            m: r.m,
            count: 0,
            total_s: 0.0,
            unsat: 0,
            total_conflicts: 0,
            timeouts: 0,
            errors: 0,
        });
        match r.status {
            RunStatus::Timeout => a.timeouts += 1,
            RunStatus::Error => a.errors += 1,
            RunStatus::Sat | RunStatus::Unsat => {
                a.count += 1;
                a.total_s += r.wall_ms / 1000.0;
                a.total_conflicts += r.conflicts;
                if r.status == RunStatus::Unsat {
                    a.unsat += 1;
                }
            }
        }
    }
    groups.into_values().collect()
}
