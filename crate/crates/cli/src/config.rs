//! Scenario files (TOML or JSON) with sections `system`, `sensors`,
//! `attacks`, `estimator` and `montecarlo`.
//!
//! A file may start from a built-in scenario (`scenario = "ieee4bus"`) and
//! override any section. Matrices are written as a scalar (times identity),
//! `{ diag = [..] }`, a list of rows, or `{ steps = [..] }` for per-step
//! sequences.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use secfusion::attack::AttackKind;
use secfusion::cross::CrossInit;
use secfusion::simulation::{builtin, WeakConfig, BUILTIN_NAMES};
use secfusion::{AttackSpec, Defense, Error, LocalInit, Mat, MatrixSeq, ScenarioConfig, SensorSpec, SystemModel, Vector};

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum MatrixSpec {
    Scalar(f64),
    Rows(Vec<Vec<f64>>),
    Diag { diag: Vec<f64> },
    Steps { steps: Vec<Vec<Vec<f64>>> },
}

fn rows_to_mat(rows: &[Vec<f64>], what: &str) -> Result<Mat, Error> {
    let r = rows.len();
    let c = rows.first().map(|x| x.len()).unwrap_or(0);
    if r == 0 || c == 0 {
        return Err(Error::Config(format!("{what}: empty matrix")));
    }
    if let Some(bad) = rows.iter().position(|x| x.len() != c) {
        return Err(Error::Config(format!("{what}: row {} has {} entries, expected {c}", bad + 1, rows[bad].len())));
    }
    Ok(Mat::from_fn(r, c, |i, j| rows[i][j]))
}

impl MatrixSpec {
    /// `dim` sizes a scalar or diagonal spec; full matrices carry their own shape.
    pub fn to_seq(&self, dim: Option<usize>, what: &str) -> Result<MatrixSeq, Error> {
        Ok(match self {
            MatrixSpec::Scalar(s) => MatrixSeq::Constant(Mat::identity(dim.unwrap_or(1), dim.unwrap_or(1)) * *s),
            MatrixSpec::Diag { diag } => MatrixSeq::Constant(Mat::from_diagonal(&Vector::from_vec(diag.clone()))),
            MatrixSpec::Rows(rows) => MatrixSeq::Constant(rows_to_mat(rows, what)?),
            MatrixSpec::Steps { steps } => MatrixSeq::PerStep(
                steps
                    .iter()
                    .enumerate()
                    .map(|(k, m)| rows_to_mat(m, &format!("{what} step {k}")))
                    .collect::<Result<_, _>>()?,
            ),
        })
    }

    pub fn to_mat(&self, dim: Option<usize>, what: &str) -> Result<Mat, Error> {
        match self.to_seq(dim, what)? {
            MatrixSeq::Constant(m) => Ok(m),
            MatrixSeq::PerStep(_) => Err(Error::Config(format!("{what}: per-step sequence not allowed here"))),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum VectorSpec {
    Scalar(f64),
    List(Vec<f64>),
}

impl VectorSpec {
    fn to_vector(&self) -> Vector {
        match self {
            VectorSpec::Scalar(s) => Vector::from_element(1, *s),
            VectorSpec::List(v) => Vector::from_vec(v.clone()),
        }
    }
}

/// Per-sensor values keyed by sensor id, or a list in weak-id order.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum PerSensor<T> {
    List(Vec<T>),
    Map(BTreeMap<String, T>),
}

impl<T: Clone> PerSensor<T> {
    fn resolve(&self, weak_ids: &[usize], what: &str) -> Result<Vec<(usize, T)>, Error> {
        match self {
            PerSensor::List(v) => {
                if v.len() != weak_ids.len() {
                    return Err(Error::Config(format!(
                        "estimator.{what}: {} values for {} weak sensors",
                        v.len(),
                        weak_ids.len()
                    )));
                }
                Ok(weak_ids.iter().copied().zip(v.iter().cloned()).collect())
            }
            PerSensor::Map(m) => m
                .iter()
                .map(|(k, v)| {
                    k.trim()
                        .parse::<usize>()
                        .map(|id| (id, v.clone()))
                        .map_err(|_| Error::Config(format!("estimator.{what}: key {k:?} is not a sensor id")))
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    #[serde(rename = "A")]
    pub a: Option<MatrixSpec>,
    #[serde(rename = "Q")]
    pub q: Option<MatrixSpec>,
    pub x0_mean: Option<Vec<f64>>,
    pub x0_cov: Option<MatrixSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorSection {
    pub id: usize,
    #[serde(rename = "C")]
    pub c: MatrixSpec,
    #[serde(rename = "R")]
    pub r: MatrixSpec,
    pub defense: Defense,
    /// Strong partners of a weak sensor.
    pub strong: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum AttackSection {
    Gaussian { sensor: usize, cov: MatrixSpec },
    Pulse { sensor: usize, start: usize, end: usize, value: VectorSpec },
    Constant { sensor: usize, value: VectorSpec },
    File { sensor: usize, path: PathBuf },
    None { sensor: usize },
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitSection {
    pub x_hat: Option<Vec<f64>>,
    pub phi_hat: Option<Vec<f64>>,
    pub p_x: Option<MatrixSpec>,
    pub p_phi: Option<MatrixSpec>,
    pub u: Option<MatrixSpec>,
    pub v: Option<MatrixSpec>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrossInitSection {
    pub p_x: Option<MatrixSpec>,
    pub p_phi: Option<MatrixSpec>,
    pub u: Option<MatrixSpec>,
    pub y: Option<MatrixSpec>,
    pub v: Option<MatrixSpec>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorSection {
    pub eta: Option<PerSensor<f64>>,
    pub eta_schedule: Option<PerSensor<Vec<f64>>>,
    pub strong: Option<PerSensor<Vec<usize>>>,
    pub q_theta: Option<f64>,
    pub baseline_p0: Option<MatrixSpec>,
    pub init: Option<BTreeMap<String, InitSection>>,
    /// Keyed `"i,j"` with `i < j`.
    pub cross_init: Option<BTreeMap<String, CrossInitSection>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonteCarloSection {
    pub runs: Option<usize>,
    pub seed: Option<u64>,
    pub horizon: Option<usize>,
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub scenario: Option<String>,
    pub name: Option<String>,
    pub system: Option<SystemSection>,
    pub sensors: Option<Vec<SensorSection>>,
    pub attacks: Option<Vec<AttackSection>>,
    pub estimator: Option<EstimatorSection>,
    pub montecarlo: Option<MonteCarloSection>,
}

impl ConfigFile {
    pub fn parse(text: &str, json: bool) -> Result<Self, Error> {
        if json {
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
        } else {
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
        }
    }
}

fn base_scenario(name: &str) -> Result<ScenarioConfig, Error> {
    builtin(name).ok_or_else(|| {
        Error::Config(format!("unknown built-in scenario {name:?} (known: {})", BUILTIN_NAMES.join(", ")))
    })
}

fn sensor_key(key: &str, what: &str) -> Result<usize, Error> {
    key.trim()
        .parse()
        .map_err(|_| Error::Config(format!("estimator.{what}: key {key:?} is not a sensor id")))
}

fn opt_mat(spec: &Option<MatrixSpec>, dim: usize, what: &str) -> Result<Option<Mat>, Error> {
    spec.as_ref().map(|m| m.to_mat(Some(dim), what)).transpose()
}

/// Builds a validated scenario from a parsed file. `dir` resolves relative
/// attack trace paths.
pub fn build_scenario(file: &ConfigFile, dir: &Path) -> Result<ScenarioConfig, Error> {
    let base = file.scenario.as_deref().map(base_scenario).transpose()?;

    let system = match (&file.system, &base) {
        (Some(s), base) => {
            let a = match (&s.a, base) {
                (Some(a), _) => a.to_seq(None, "system.A")?,
                (None, Some(b)) => b.system.a_seq().clone(),
                (None, None) => return Err(Error::Config("system.A is required".into())),
            };
            let n = a.shape().0;
            let q = match (&s.q, base) {
                (Some(q), _) => q.to_mat(Some(n), "system.Q")?,
                (None, Some(b)) => b.system.q().clone(),
                (None, None) => return Err(Error::Config("system.Q is required".into())),
            };
            SystemModel::new(a, q).map_err(|e| Error::Config(format!("system: {e}")))?
        }
        (None, Some(b)) => b.system.clone(),
        (None, None) => return Err(Error::Config("missing [system] section and no base scenario".into())),
    };
    let n = system.n();
    let sys_section = file.system.clone().unwrap_or_default();
    let x0_mean = match (&sys_section.x0_mean, &base) {
        (Some(v), _) => Vector::from_vec(v.clone()),
        (None, Some(b)) if b.system.n() == n => b.x0_mean.clone(),
        _ => Vector::zeros(n),
    };
    let x0_cov = match (&sys_section.x0_cov, &base) {
        (Some(m), _) => m.to_mat(Some(n), "system.x0_cov")?,
        (None, Some(b)) if b.system.n() == n => b.x0_cov.clone(),
        _ => Mat::identity(n, n),
    };

    let sensors_replaced = file.sensors.is_some();
    let (sensors, mut weak) = match (&file.sensors, &base) {
        (Some(list), _) => {
            let mut weak = BTreeMap::new();
            let sensors = list
                .iter()
                .map(|s| {
                    let c = s.c.to_seq(None, &format!("sensor {} C", s.id))?;
                    let p = c.shape().0;
                    let r = s.r.to_mat(Some(p), &format!("sensor {} R", s.id))?;
                    if let Some(strong) = &s.strong {
                        if s.defense != Defense::Weak {
                            return Err(Error::Config(format!("sensor {}: strong partners given for a strong sensor", s.id)));
                        }
                        weak.insert(s.id, WeakConfig { strong_ids: Some(strong.clone()), ..WeakConfig::default() });
                    }
                    SensorSpec::new(s.id, c, r, s.defense)
                })
                .collect::<Result<Vec<_>, _>>()?;
            (sensors, weak)
        }
        (None, Some(b)) => (b.sensors.clone(), b.weak.clone()),
        (None, None) => return Err(Error::Config("missing sensors list and no base scenario".into())),
    };

    let attacks = match (&file.attacks, &base) {
        (Some(list), _) => list.iter().map(|a| build_attack(a, dir, &sensors)).collect::<Result<Vec<_>, _>>()?,
        (None, Some(b)) if !sensors_replaced => b.attacks.clone(),
        _ => Vec::new(),
    };

    let mut cfg = ScenarioConfig {
        name: file
            .name
            .clone()
            .or_else(|| base.as_ref().map(|b| b.name.clone()))
            .unwrap_or_else(|| "custom".into()),
        system,
        x0_mean,
        x0_cov,
        sensors,
        weak: BTreeMap::new(),
        attacks,
        cross_init: base.as_ref().filter(|_| !sensors_replaced).map(|b| b.cross_init.clone()).unwrap_or_default(),
        baseline: base.as_ref().map(|b| b.baseline.clone()).unwrap_or_default(),
        horizon: base.as_ref().map(|b| b.horizon).unwrap_or(100),
        runs: base.as_ref().map(|b| b.runs).unwrap_or(500),
        seed: base.as_ref().map(|b| b.seed).unwrap_or(0),
        threads: None,
    };
    let weak_ids = cfg.weak_ids();

    if let Some(est) = &file.estimator {
        if let Some(strong) = &est.strong {
            for (id, s) in strong.resolve(&weak_ids, "strong")? {
                weak.entry(id).or_default().strong_ids = Some(s);
            }
        }
        if let Some(eta) = &est.eta {
            for (id, e) in eta.resolve(&weak_ids, "eta")? {
                weak.entry(id).or_default().eta = e;
            }
        }
        if let Some(sched) = &est.eta_schedule {
            for (id, s) in sched.resolve(&weak_ids, "eta_schedule")? {
                weak.entry(id).or_default().eta_schedule = Some(s);
            }
        }
        if let Some(q) = est.q_theta {
            cfg.baseline.q_theta = q;
        }
        if let Some(p0) = &est.baseline_p0 {
            cfg.baseline.p0 = Some(p0.to_mat(None, "estimator.baseline_p0")?);
        }
        for (key, init) in est.init.iter().flatten() {
            let id = sensor_key(key, "init")?;
            let p = cfg.sensor(id).map(|s| s.p()).unwrap_or(1);
            let what = |f: &str| format!("estimator.init.{id}.{f}");
            weak.entry(id).or_default().init = LocalInit {
                x_hat: init.x_hat.clone().map(Vector::from_vec),
                phi_hat: init.phi_hat.clone().map(Vector::from_vec),
                p_x: opt_mat(&init.p_x, n + p, &what("p_x"))?,
                p_phi: opt_mat(&init.p_phi, p, &what("p_phi"))?,
                u: init.u.as_ref().map(|m| m.to_mat(None, &what("u"))).transpose()?,
                v: opt_mat(&init.v, p, &what("v"))?,
            };
        }
        for (key, ci) in est.cross_init.iter().flatten() {
            let ids: Vec<usize> = key
                .split(',')
                .map(|t| sensor_key(t, "cross_init"))
                .collect::<Result<_, _>>()?;
            let [i, j] = ids[..] else {
                return Err(Error::Config(format!("estimator.cross_init: key {key:?} must be \"i,j\"")));
            };
            let what = |f: &str| format!("estimator.cross_init.{key}.{f}");
            let (pi, pj) = (cfg.sensor(i).map(|s| s.p()).unwrap_or(1), cfg.sensor(j).map(|s| s.p()).unwrap_or(1));
            let full = |m: &Option<MatrixSpec>, f: &str| m.as_ref().map(|m| m.to_mat(None, &what(f))).transpose();
            cfg.cross_init.insert(
                (i, j),
                CrossInit {
                    p_x: match &ci.p_x {
                        Some(MatrixSpec::Scalar(_)) if pi == pj => opt_mat(&ci.p_x, n + pi, &what("p_x"))?,
                        _ => full(&ci.p_x, "p_x")?,
                    },
                    p_phi: full(&ci.p_phi, "p_phi")?,
                    u: full(&ci.u, "u")?,
                    y: full(&ci.y, "y")?,
                    v: full(&ci.v, "v")?,
                },
            );
        }
    }
    cfg.weak = weak;

    if let Some(mc) = &file.montecarlo {
        if let Some(r) = mc.runs {
            cfg.runs = r;
        }
        if let Some(s) = mc.seed {
            cfg.seed = s;
        }
        if let Some(h) = mc.horizon {
            cfg.horizon = h;
        }
        cfg.threads = mc.threads.or(cfg.threads);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn build_attack(a: &AttackSection, dir: &Path, sensors: &[SensorSpec]) -> Result<AttackSpec, Error> {
    match a {
        AttackSection::Gaussian { sensor, cov } => {
            AttackSpec::gaussian(*sensor, cov.to_mat(None, &format!("attack on sensor {sensor}: cov"))?)
        }
        AttackSection::Pulse { sensor, start, end, value } => {
            AttackSpec::pulse(*sensor, *start, *end, value.to_vector())
        }
        AttackSection::Constant { sensor, value } => Ok(AttackSpec::constant(*sensor, value.to_vector())),
        AttackSection::File { sensor, path } => {
            let path = if path.is_relative() { dir.join(path) } else { path.clone() };
            AttackSpec::from_file(*sensor, path)
        }
        AttackSection::None { sensor } => {
            let p = sensors.iter().find(|s| s.id == *sensor).map(|s| s.p()).unwrap_or(1);
            Ok(AttackSpec::none(*sensor, p))
        }
    }
}

/// Resolves `--scenario`: a built-in name or a path to a `.toml`/`.json` file.
pub fn load_scenario(spec: &str) -> Result<ScenarioConfig, Error> {
    if let Some(cfg) = builtin(spec) {
        return Ok(cfg);
    }
    let path = Path::new(spec);
    if !path.exists() {
        return Err(Error::Config(format!(
            "{spec}: not a built-in scenario ({}) and no such file",
            BUILTIN_NAMES.join(", ")
        )));
    }
    parse_config(path)
}

pub fn parse_config(path: &Path) -> Result<ScenarioConfig, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let file = ConfigFile::parse(&text, json).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let dir = path.parent().unwrap_or(Path::new("."));
    build_scenario(&file, dir).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

fn fmt_list<T: std::fmt::Display>(v: impl IntoIterator<Item = T>) -> String {
    let items: Vec<String> = v.into_iter().map(|x| x.to_string()).collect();
    format!("[{}]", items.join(", "))
}

fn fmt_vec(v: &Vector) -> String {
    fmt_list(v.iter())
}

/// Human-readable listing of every effective setting.
pub fn describe(cfg: &ScenarioConfig) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "scenario: {}", cfg.name);
    let _ = writeln!(out, "state dimension: {}", cfg.system.n());
    let sensors: Vec<String> = cfg
        .sensors
        .iter()
        .map(|s| format!("{} ({})", s.id, if s.defense == Defense::Weak { "weak" } else { "strong" }))
        .collect();
    let _ = writeln!(out, "sensors: {}", sensors.join(", "));
    let assign: Vec<String> =
        cfg.weak_ids().iter().map(|&i| format!("{i} -> {}", fmt_list(cfg.strong_assignment(i)))).collect();
    let _ = writeln!(out, "strong assignment: {}", assign.join("; "));
    let attacks: Vec<String> = cfg
        .weak_ids()
        .iter()
        .map(|&i| {
            let desc = match cfg.attack(i).map(|a| &a.kind) {
                None | Some(AttackKind::None { .. }) => "none".to_string(),
                Some(AttackKind::Gaussian { cov, .. }) => format!("gaussian cov {}", fmt_list(cov.iter())),
                Some(AttackKind::Pulse { start, end, value }) => {
                    format!("pulse [{start}, {end}) value {}", fmt_vec(value))
                }
                Some(AttackKind::Constant { value }) => format!("constant {}", fmt_vec(value)),
                Some(AttackKind::File { path, .. }) => format!("file {}", path.display()),
            };
            format!("{i}: {desc}")
        })
        .collect();
    let _ = writeln!(out, "attacks: {}", attacks.join("; "));
    let _ = writeln!(out, "eta: {}", fmt_list(cfg.etas()));
    let _ = writeln!(out, "q_theta: {}", cfg.baseline.q_theta);
    let _ = writeln!(out, "horizon: {}", cfg.horizon);
    let _ = writeln!(out, "runs: {}", cfg.runs);
    let _ = writeln!(out, "seed: {}", cfg.seed);
    if let Some(t) = cfg.threads {
        let _ = writeln!(out, "threads: {t}");
    }
    out
}
