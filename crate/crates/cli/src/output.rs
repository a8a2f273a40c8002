//! CSV tables. Floats are written with 17 significant digits so that reading
//! them back gives the same `f64`.

use std::io::Write;

use secfusion::simulation::{ConsistencyReport, MseReport, OptimalityReport, RunRecord};
use secfusion::{ObservabilityReport, Vector};

pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Header plus rows, ready to be written.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: Vec<String>) -> Self {
        Self { header, rows: Vec::new() }
    }

    pub fn write<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&self.header)?;
        for r in &self.rows {
            out.write_record(r)?;
        }
        out.flush()?;
        Ok(())
    }
}

fn suffixed(prefix: &str, len: usize) -> Vec<String> {
    if len == 1 {
        vec![prefix.to_string()]
    } else {
        (1..=len).map(|c| format!("{prefix}_{c}")).collect()
    }
}

fn push_vec(row: &mut Vec<String>, v: &Vector) {
    row.extend(v.iter().map(|x| num(*x)));
}

pub fn run_table(rec: &RunRecord) -> Table {
    let n = rec.truth.first().map(|v| v.len()).unwrap_or(0);
    let mut header = vec!["k".to_string()];
    header.extend((1..=n).map(|c| format!("x_{c}")));
    header.extend((1..=n).map(|c| format!("fused_{c}")));
    for (i, id) in rec.weak_ids.iter().enumerate() {
        let p = rec.theta[i].first().map(|v| v.len()).unwrap_or(1);
        header.extend((1..=n).map(|c| format!("local_{id}_x_{c}")));
        header.extend(suffixed(&format!("theta_{id}"), p));
        header.extend(suffixed(&format!("theta_hat_{id}"), p));
        header.extend((1..=n).map(|c| format!("akf_{id}_x_{c}")));
        header.extend(suffixed(&format!("akf_theta_hat_{id}"), p));
        header.push(format!("trace_px_{id}"));
    }
    header.push("weight_sum_error".into());

    let mut t = Table::new(header);
    for k in 0..rec.len() {
        let mut row = vec![k.to_string()];
        push_vec(&mut row, &rec.truth[k]);
        push_vec(&mut row, &rec.fused[k]);
        for i in 0..rec.weak_ids.len() {
            push_vec(&mut row, &rec.local_x[i][k]);
            push_vec(&mut row, &rec.theta[i][k]);
            push_vec(&mut row, &rec.local_theta[i][k]);
            push_vec(&mut row, &rec.akf_x[i][k]);
            push_vec(&mut row, &rec.akf_theta[i][k]);
            row.push(num(rec.trace_p_x[i][k]));
        }
        row.push(num(rec.normalization_error[k]));
        t.rows.push(row);
    }
    t
}

/// `k, mse_fused, mse_local_i…, mse_theta_i…`, optionally followed by the
/// per-component fused curves.
pub fn mse_table(rep: &MseReport, components: bool) -> Table {
    let n = rep.fused_components.first().map(|v| v.len()).unwrap_or(0);
    let mut header = vec!["k".to_string(), "mse_fused".to_string()];
    header.extend(rep.weak_ids.iter().map(|i| format!("mse_local_{i}")));
    header.extend(rep.weak_ids.iter().map(|i| format!("mse_theta_{i}")));
    if components {
        header.extend((1..=n).map(|c| format!("mse_fused_x{c}")));
    }
    let mut t = Table::new(header);
    for k in 0..rep.len() {
        let mut row = vec![k.to_string(), num(rep.fused[k])];
        row.extend(rep.local.iter().map(|c| num(c[k])));
        row.extend(rep.theta.iter().map(|c| num(c[k])));
        if components {
            push_vec(&mut row, &rep.fused_components[k]);
        }
        t.rows.push(row);
    }
    t
}

/// Proposed local estimators against the augmented Kalman filter baseline.
pub fn compare_table(rep: &MseReport) -> Table {
    let mut header = vec!["k".to_string(), "mse_fused".to_string()];
    for i in &rep.weak_ids {
        header.push(format!("mse_proposed_{i}"));
        header.push(format!("mse_akf_{i}"));
    }
    for i in &rep.weak_ids {
        header.push(format!("mse_theta_proposed_{i}"));
        header.push(format!("mse_theta_akf_{i}"));
    }
    let mut t = Table::new(header);
    for k in 0..rep.len() {
        let mut row = vec![k.to_string(), num(rep.fused[k])];
        for i in 0..rep.weak_ids.len() {
            row.push(num(rep.local[i][k]));
            row.push(num(rep.akf[i][k]));
        }
        for i in 0..rep.weak_ids.len() {
            row.push(num(rep.theta[i][k]));
            row.push(num(rep.akf_theta[i][k]));
        }
        t.rows.push(row);
    }
    t
}

pub fn observability_table(reports: &[(usize, ObservabilityReport)]) -> Table {
    let mut t = Table::new(["sensor", "rank", "dim", "horizon", "full_rank"].map(String::from).to_vec());
    for (id, r) in reports {
        t.rows.push(vec![id.to_string(), r.rank.to_string(), r.dim.to_string(), r.horizon.to_string(), r.full_rank.to_string()]);
    }
    t
}

pub fn optimality_table(reports: &[OptimalityReport]) -> Table {
    let mut t = Table::new(["step", "sensor", "trials", "min_margin_x", "min_margin_phi", "pass"].map(String::from).to_vec());
    for r in reports {
        for (i, id) in r.weak_ids.iter().enumerate() {
            let pass = r.min_margin_x[i].min(r.min_margin_phi[i]) >= OptimalityReport::TOLERANCE;
            t.rows.push(vec![
                r.step.to_string(),
                id.to_string(),
                r.trials.to_string(),
                num(r.min_margin_x[i]),
                num(r.min_margin_phi[i]),
                pass.to_string(),
            ]);
        }
    }
    t
}

pub fn consistency_table(rep: &ConsistencyReport) -> Table {
    let mut t = Table::new(
        ["step", "sensor", "runs", "frobenius_rel_error", "trace_rel_error", "predicted_trace", "empirical_trace"]
            .map(String::from)
            .to_vec(),
    );
    for p in &rep.points {
        t.rows.push(vec![
            p.step.to_string(),
            p.sensor.to_string(),
            rep.runs.to_string(),
            num(p.frobenius_error()),
            num(p.trace_error()),
            num(p.predicted.trace()),
            num(p.empirical.trace()),
        ]);
    }
    t
}
