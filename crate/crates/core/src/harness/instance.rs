use crate::error::{Error, Result};
use crate::kserver::ServerConfig;
use crate::metric::{MetricSpace, TreeMetric, TreePoint, Vertex};
use crate::mts::{Task, TaskSystem};
use crate::parking::{adversarial_instance, ParkingInstance, Street};
use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Mts,
    Kserver,
    Parking,
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Mts => "mts",
            Self::Kserver => "kserver",
            Self::Parking => "parking",
        })
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mts" => Ok(Self::Mts),
            "kserver" | "k-server" => Ok(Self::Kserver),
            "parking" | "matching" => Ok(Self::Parking),
            other => Err(Error::config(
                "family",
                format!("unknown family `{other}` (mts|kserver|parking)"),
            )),
        }
    }
}

/// A fully explicit problem instance, as stored in instance and scenario files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Instance {
    Mts {
        matrix: Vec<Vec<f64>>,
        initial: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        traversal: Option<Vec<usize>>,
        tasks: Vec<Task>,
    },
    KserverLine {
        servers: Vec<f64>,
        requests: Vec<f64>,
    },
    /// Servers and requests sit on vertices of a weighted tree.
    KserverTree {
        vertices: usize,
        edges: Vec<(Vertex, Vertex, f64)>,
        servers: Vec<Vertex>,
        requests: Vec<Vertex>,
    },
    Parking {
        coords: Vec<f64>,
        slots: Vec<bool>,
        goals: Vec<Vertex>,
    },
}

impl Instance {
    pub fn family(&self) -> Family {
        match self {
            Self::Mts { .. } => Family::Mts,
            Self::KserverLine { .. } | Self::KserverTree { .. } => Family::Kserver,
            Self::Parking { .. } => Family::Parking,
        }
    }

    /// Number of online arrivals.
    pub fn arrivals(&self) -> usize {
        match self {
            Self::Mts { tasks, .. } => tasks.len(),
            Self::KserverLine { requests, .. } => requests.len(),
            Self::KserverTree { requests, .. } => requests.len(),
            Self::Parking { goals, .. } => goals.len(),
        }
    }

    pub fn task_system(&self) -> Result<(TaskSystem, &[Task])> {
        match self {
            Self::Mts {
                matrix,
                initial,
                traversal,
                tasks,
            } => {
                let d = MetricSpace::matrix(matrix.clone())?;
                let sys = match traversal {
                    Some(p) => TaskSystem::with_traversal(d, *initial, p.clone())?,
                    None => TaskSystem::new(d, *initial)?,
                };
                for t in tasks {
                    sys.check_task(t)?;
                }
                Ok((sys, tasks))
            }
            _ => Err(Error::input("not an MTS instance")),
        }
    }

    pub fn line_servers(&self) -> Result<(ServerConfig<f64>, &[f64])> {
        match self {
            Self::KserverLine { servers, requests } => {
                if requests.iter().any(|r| !r.is_finite()) {
                    return Err(Error::input("requests must be finite"));
                }
                Ok((ServerConfig::line(servers.clone())?, requests))
            }
            _ => Err(Error::input("not a line k-server instance")),
        }
    }

    pub fn tree_servers(&self) -> Result<(TreeMetric, ServerConfig<TreePoint>, Vec<TreePoint>)> {
        match self {
            Self::KserverTree {
                vertices,
                edges,
                servers,
                requests,
            } => {
                let tree = TreeMetric::new(*vertices, edges)?;
                for &v in servers.iter().chain(requests) {
                    if v >= *vertices {
                        return Err(Error::UnknownVertex(v));
                    }
                }
                let config = ServerConfig::new(servers.iter().map(|&v| TreePoint::at(v)).collect())?;
                Ok((tree, config, requests.iter().map(|&v| TreePoint::at(v)).collect()))
            }
            _ => Err(Error::input("not a tree k-server instance")),
        }
    }

    pub fn parking(&self) -> Result<ParkingInstance> {
        match self {
            Self::Parking { coords, slots, goals } => {
                ParkingInstance::new(Street::new(coords.clone(), slots.clone())?, goals.clone())
            }
            _ => Err(Error::input("not a parking instance")),
        }
    }

    fn from_parking(inst: &ParkingInstance) -> Self {
        let s = &inst.street;
        Self::Parking {
            coords: s.coords().to_vec(),
            slots: (0..s.len()).map(|v| s.is_slot(v)).collect(),
            goals: inst.goals.clone(),
        }
    }
}

/// Generator parameters, e.g. `n = 10`.
pub type Params = BTreeMap<String, f64>;

fn param(params: &Params, key: &str, default: f64) -> f64 {
    params.get(key).copied().unwrap_or(default)
}

fn count(params: &Params, key: &str, default: usize, lo: usize, hi: usize) -> Result<usize> {
    let x = param(params, key, default as f64);
    if x.fract() != 0.0 || x < lo as f64 || x > hi as f64 {
        return Err(Error::config(
            format!("instance.params.{key}"),
            format!("expected an integer in {lo}..={hi}, got {x}"),
        ));
    }
    Ok(x as usize)
}

fn positive(params: &Params, key: &str, default: f64) -> Result<f64> {
    let x = param(params, key, default);
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::config(
            format!("instance.params.{key}"),
            format!("expected a positive number, got {x}"),
        ));
    }
    Ok(x)
}

pub const GENERATORS: &[(Family, &str)] = &[
    (Family::Mts, "uniform"),
    (Family::Kserver, "line"),
    (Family::Kserver, "tree"),
    (Family::Parking, "weighted-line"),
    (Family::Parking, "adversarial"),
];

/// Shortest-path closure of a symmetric non-negative matrix.
pub fn metric_closure(mut w: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let m = w.len();
    for k in 0..m {
        for i in 0..m {
            for j in 0..m {
                let via = w[i][k] + w[k][j];
                if via < w[i][j] {
                    w[i][j] = via;
                }
            }
        }
    }
    w
}

/// Deterministic instance for `(family, name, params, seed)`.
pub fn generate(family: Family, name: &str, params: &Params, seed: u64) -> Result<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    generate_with(family, name, params, &mut rng)
}

pub fn generate_with<R: Rng + ?Sized>(family: Family, name: &str, params: &Params, rng: &mut R) -> Result<Instance> {
    if let Some(key) = params.keys().find(|k| !known_param(family, name, k)) {
        return Err(Error::config(
            format!("instance.params.{key}"),
            format!("not a parameter of {family}/{name}"),
        ));
    }
    match (family, name) {
        (Family::Mts, "uniform") => {
            let m = count(params, "m", 4, 1, 64)?;
            let n = count(params, "n", 10, 0, 100_000)?;
            let max_d = positive(params, "max_distance", 10.0)?;
            let max_t = positive(params, "max_task", 10.0)?;
            let mut w = vec![vec![0.0; m]; m];
            for i in 0..m {
                for j in i + 1..m {
                    let x = rng.gen_range(1.0..=max_d);
                    w[i][j] = x;
                    w[j][i] = x;
                }
            }
            let tasks = (0..n)
                .map(|_| (0..m).map(|_| rng.gen_range(0.0..=max_t)).collect())
                .collect();
            Ok(Instance::Mts {
                matrix: metric_closure(w),
                initial: 0,
                traversal: None,
                tasks,
            })
        }
        (Family::Kserver, "line") => {
            let k = count(params, "k", 2, 1, 16)?;
            let n = count(params, "n", 10, 0, 100_000)?;
            let span = count(params, "span", 100, 1, 1 << 30)?;
            if k > span + 1 {
                return Err(Error::config("instance.params.k", "more servers than integer points"));
            }
            let mut servers: Vec<f64> = rand::seq::index::sample(rng, span + 1, k)
                .into_iter()
                .map(|x| x as f64)
                .collect();
            servers.sort_by(f64::total_cmp);
            let requests = (0..n).map(|_| rng.gen_range(0..=span) as f64).collect();
            Ok(Instance::KserverLine { servers, requests })
        }
        (Family::Kserver, "tree") => {
            let v = count(params, "vertices", 8, 1, 10_000)?;
            let k = count(params, "k", 2, 1, v)?;
            let n = count(params, "n", 10, 0, 100_000)?;
            let max_w = count(params, "max_weight", 10, 1, 1 << 20)?;
            let edges = (1..v)
                .map(|i| (rng.gen_range(0..i), i, rng.gen_range(1..=max_w) as f64))
                .collect();
            let mut servers = rand::seq::index::sample(rng, v, k).into_vec();
            servers.sort_unstable();
            let requests = (0..n).map(|_| rng.gen_range(0..v)).collect();
            Ok(Instance::KserverTree {
                vertices: v,
                edges,
                servers,
                requests,
            })
        }
        (Family::Parking, "weighted-line") => {
            let slots = count(params, "slots", 10, 1, 100_000)?;
            let cars = count(params, "cars", slots, 0, slots)?;
            let max_w = positive(params, "max_weight", 10.0)?;
            let mut coords = vec![0.0];
            for _ in 1..slots {
                let last = *coords.last().unwrap();
                coords.push(last + rng.gen_range(1.0..=max_w.max(1.0)));
            }
            let mut goals: Vec<Vertex> = (0..cars).map(|_| rng.gen_range(0..slots)).collect();
            goals.shuffle(rng);
            Ok(Instance::Parking {
                slots: vec![true; slots],
                coords,
                goals,
            })
        }
        (Family::Parking, "adversarial") => {
            let n = count(params, "n", 10, 2, 60)?;
            let eps = positive(params, "eps", 1e-6)?;
            Ok(Instance::from_parking(&adversarial_instance(n, eps)?))
        }
        _ => Err(Error::config(
            "instance.generator",
            format!("unknown generator `{name}` for family {family}"),
        )),
    }
}

fn known_param(family: Family, name: &str, key: &str) -> bool {
    let keys: &[&str] = match (family, name) {
        (Family::Mts, "uniform") => &["m", "n", "max_distance", "max_task"],
        (Family::Kserver, "line") => &["k", "n", "span"],
        (Family::Kserver, "tree") => &["vertices", "k", "n", "max_weight"],
        (Family::Parking, "weighted-line") => &["slots", "cars", "max_weight"],
        (Family::Parking, "adversarial") => &["n", "eps"],
        _ => return true,
    };
    keys.contains(&key)
}

/// Parses `key=value` pairs as given on the command line.
pub fn parse_params<S: AsRef<str>>(args: &[S]) -> Result<Params> {
    let mut out = Params::new();
    for a in args {
        let a = a.as_ref();
        let (k, v) = a
            .split_once('=')
            .ok_or_else(|| Error::config(a, "expected key=value"))?;
        let x: f64 = v
            .trim()
            .parse()
            .map_err(|_| Error::config(k.trim(), format!("`{v}` is not a number")))?;
        out.insert(k.trim().to_string(), x);
    }
    Ok(out)
}
