//! "App invokes APIs" ecosystems: loading, validation, synthesis and
//! query derivation.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::str::FromStr;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type ApiId = u64;
pub type AppId = u64;

/// One web API with its category tags.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApiRecord {
    pub id: ApiId,
    pub name: String,
    pub keywords: BTreeSet<String>,
}

/// One app and the set of APIs it invokes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AppRecord {
    pub id: AppId,
    pub apis: BTreeSet<ApiId>,
}

/// The full corpus of apps and APIs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ecosystem {
    pub apis: Vec<ApiRecord>,
    pub apps: Vec<AppRecord>,
}

/// An ordered list of distinct, normalized query keywords.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Query {
    pub keywords: Vec<String>,
}

impl Query {
    /// Normalizes and validates the keywords: non-empty, no duplicates.
    pub fn new<I, S>(keywords: I) -> Result<Query>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut out = Vec::new();
        let mut seen = BTreeSet::new();
        for kw in keywords {
            let norm = normalize_keyword(kw.as_ref());
            if norm.is_empty() {
                return Err(Error::Parameter("empty query keyword".into()));
            }
            if !seen.insert(norm.clone()) {
                return Err(Error::Parameter(format!("duplicate query keyword {norm:?}")));
            }
            out.push(norm);
        }
        if out.is_empty() {
            return Err(Error::Parameter("query has no keywords".into()));
        }
        Ok(Query { keywords: out })
    }

    pub fn len(&self) -> usize {
        self.keywords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keywords.is_empty()
    }
}

/// Trim, lowercase, collapse internal whitespace to single spaces.
pub fn normalize_keyword(raw: &str) -> String {
    raw.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

/// Supported on-disk corpus formats.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CorpusFormat {
    AppApiCsv,
    EcosystemJson,
}

impl FromStr for CorpusFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "app-api-csv" => Ok(CorpusFormat::AppApiCsv),
            "ecosystem-json" => Ok(CorpusFormat::EcosystemJson),
            other => Err(Error::Parameter(format!("unknown corpus format {other:?}"))),
        }
    }
}

impl Ecosystem {
    /// Checks all structural invariants and normalizes keywords in place.
    pub fn validate(&mut self) -> Result<()> {
        if self.apps.is_empty() {
            return Err(Error::EmptyInput("ecosystem has no apps".into()));
        }
        let mut ids = BTreeSet::new();
        for api in &mut self.apis {
            if !ids.insert(api.id) {
                return Err(Error::Integrity(format!("duplicate API id {}", api.id)));
            }
            api.keywords = api.keywords.iter().map(|k| normalize_keyword(k)).collect();
            api.keywords.retain(|k| !k.is_empty());
            if api.keywords.is_empty() {
                return Err(Error::Integrity(format!("API {} has no keywords", api.id)));
            }
        }
        let mut app_ids = BTreeSet::new();
        for app in &self.apps {
            if !app_ids.insert(app.id) {
                return Err(Error::Integrity(format!("duplicate app id {}", app.id)));
            }
            if app.apis.is_empty() {
                return Err(Error::Integrity(format!("app {} invokes no APIs", app.id)));
            }
            for api in &app.apis {
                if !ids.contains(api) {
                    return Err(Error::Integrity(format!(
                        "app {} references unknown API id {}",
                        app.id, api
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn api(&self, id: ApiId) -> Option<&ApiRecord> {
        self.apis.iter().find(|a| a.id == id)
    }

    /// Serializes to the `ecosystem-json` format.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Loads and validates an ecosystem from `path` in the given format.
pub fn load_ecosystem(path: &Path, format: CorpusFormat) -> Result<Ecosystem> {
    let mut eco = match format {
        CorpusFormat::EcosystemJson => {
            let text = std::fs::read_to_string(path)?;
            serde_json::from_str::<Ecosystem>(&text)?
        }
        CorpusFormat::AppApiCsv => load_app_api_csv(path)?,
    };
    eco.validate()?;
    Ok(eco)
}

/// CSV layout: header `app_id,api_id,api_name,api_keywords`, one row per
/// (app, api) pair, keywords `;`-separated. A row may leave the name and
/// keyword cells empty to reference an API declared on another row.
fn load_app_api_csv(path: &Path) -> Result<Ecosystem> {
    let mut reader = csv::ReaderBuilder::new().flexible(false).from_path(path).map_err(csv_err)?;
    {
        let headers = reader.headers().map_err(csv_err)?;
        let expect = ["app_id", "api_id", "api_name", "api_keywords"];
        let got: Vec<&str> = headers.iter().collect();
        if got != expect {
            return Err(Error::Parse {
                line: 1,
                msg: format!("expected header {expect:?}, got {got:?}"),
            });
        }
    }

    let mut apis: BTreeMap<ApiId, ApiRecord> = BTreeMap::new();
    let mut referenced: BTreeSet<(ApiId, u64)> = BTreeSet::new();
    let mut apps: BTreeMap<AppId, BTreeSet<ApiId>> = BTreeMap::new();
    let mut app_order: Vec<AppId> = Vec::new();

    for record in reader.records() {
        let record = record.map_err(csv_err)?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let parse_u64 = |field: &str, what: &str| -> Result<u64> {
            field.trim().parse::<u64>().map_err(|_| Error::Parse {
                line,
                msg: format!("malformed {what} {field:?}"),
            })
        };
        let app_id = parse_u64(&record[0], "app_id")?;
        let api_id = parse_u64(&record[1], "api_id")?;
        let name = record[2].trim().to_string();
        let keywords: BTreeSet<String> = record[3]
            .split(';')
            .map(normalize_keyword)
            .filter(|k| !k.is_empty())
            .collect();

        if !keywords.is_empty() {
            let rec = ApiRecord { id: api_id, name: name.clone(), keywords: keywords.clone() };
            match apis.get(&api_id) {
                None => {
                    apis.insert(api_id, rec);
                }
                Some(prev) if *prev == rec => {}
                Some(_) => {
                    return Err(Error::Parse {
                        line,
                        msg: format!("conflicting declarations for API id {api_id}"),
                    });
                }
            }
        } else {
            referenced.insert((api_id, line));
        }

        let entry = apps.entry(app_id).or_insert_with(|| {
            app_order.push(app_id);
            BTreeSet::new()
        });
        if !entry.insert(api_id) {
            return Err(Error::Parse {
                line,
                msg: format!("duplicate API id {api_id} within app {app_id}"),
            });
        }
    }

    for (api_id, line) in &referenced {
        if !apis.contains_key(api_id) {
            return Err(Error::Integrity(format!(
                "row at line {line} references unknown API id {api_id}"
            )));
        }
    }

    Ok(Ecosystem {
        apis: apis.into_values().collect(),
        apps: app_order
            .into_iter()
            .map(|id| AppRecord { id, apis: apps[&id].clone() })
            .collect(),
    })
}

fn csv_err(e: csv::Error) -> Error {
    let line = match e.position() {
        Some(pos) => pos.line(),
        None => 0,
    };
    Error::Parse { line, msg: e.to_string() }
}

/// Parameters for the synthetic corpus generator.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GenParams {
    pub n_apis: usize,
    pub n_apps: usize,
    pub n_keywords: usize,
    /// Inclusive range of tags per API.
    pub keywords_per_api: (usize, usize),
    /// Inclusive range of APIs per app.
    pub apis_per_app: (usize, usize),
    /// Power-law exponent for API popularity; larger means stronger hubs.
    pub popularity_skew: f64,
    pub seed: u64,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            n_apis: 100,
            n_apps: 400,
            n_keywords: 30,
            keywords_per_api: (1, 3),
            apis_per_app: (2, 6),
            popularity_skew: 0.8,
            seed: 42,
        }
    }
}

/// Deterministically synthesizes an ecosystem with power-law API popularity.
pub fn gen_synthetic(params: &GenParams) -> Result<Ecosystem> {
    let p = params;
    if p.n_apis < 1 || p.n_apps < 1 || p.n_keywords < 1 {
        return Err(Error::Parameter("all counts must be >= 1".into()));
    }
    for (lo, hi, what) in [
        (p.keywords_per_api.0, p.keywords_per_api.1, "keywords_per_api"),
        (p.apis_per_app.0, p.apis_per_app.1, "apis_per_app"),
    ] {
        if lo < 1 || lo > hi {
            return Err(Error::Parameter(format!("empty range for {what}")));
        }
    }
    if p.apis_per_app.1 > p.n_apis {
        return Err(Error::Parameter("apis_per_app max exceeds n_apis".into()));
    }
    if p.keywords_per_api.1 > p.n_keywords {
        return Err(Error::Parameter("keywords_per_api max exceeds n_keywords".into()));
    }
    if !(p.popularity_skew > 0.0) {
        return Err(Error::Parameter("popularity_skew must be positive".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let vocab: Vec<String> = (0..p.n_keywords).map(|i| format!("kw{i}")).collect();

    let mut apis = Vec::with_capacity(p.n_apis);
    for i in 0..p.n_apis {
        let k = rng.gen_range(p.keywords_per_api.0..=p.keywords_per_api.1);
        let keywords: BTreeSet<String> = rand::seq::index::sample(&mut rng, p.n_keywords, k)
            .into_iter()
            .map(|j| vocab[j].clone())
            .collect();
        apis.push(ApiRecord { id: i as ApiId, name: format!("api{i}"), keywords });
    }

    // Popularity weight of API i is (i+1)^-skew; prefix sums drive a
    // weighted draw without replacement per app.
    let weights: Vec<f64> = (0..p.n_apis).map(|i| ((i + 1) as f64).powf(-p.popularity_skew)).collect();
    let mut prefix = Vec::with_capacity(p.n_apis);
    let mut acc = 0.0;
    for w in &weights {
        acc += w;
        prefix.push(acc);
    }
    let total = acc;

    let mut apps = Vec::with_capacity(p.n_apps);
    for a in 0..p.n_apps {
        let m = rng.gen_range(p.apis_per_app.0..=p.apis_per_app.1);
        let mut chosen = BTreeSet::new();
        while chosen.len() < m {
            let x = rng.gen_range(0.0..total);
            let idx = prefix.partition_point(|&s| s <= x).min(p.n_apis - 1);
            chosen.insert(idx as ApiId);
        }
        apps.push(AppRecord { id: a as AppId, apis: chosen });
    }

    let mut eco = Ecosystem { apis, apps };
    eco.validate()?;
    Ok(eco)
}

/// Per-app keyword-union queries paired with the app as ground truth.
///
/// Without an explicit filter, apps whose tag union has exactly two
/// keywords are skipped.
pub fn derive_queries(
    eco: &Ecosystem,
    r_filter: Option<(usize, usize)>,
) -> Vec<(Query, AppRecord)> {
    let by_id: BTreeMap<ApiId, &ApiRecord> = eco.apis.iter().map(|a| (a.id, a)).collect();
    let mut out = Vec::new();
    for app in &eco.apps {
        let union: BTreeSet<&String> = app
            .apis
            .iter()
            .filter_map(|id| by_id.get(id))
            .flat_map(|a| a.keywords.iter())
            .collect();
        let r = union.len();
        let keep = match r_filter {
            Some((lo, hi)) => r >= lo && r <= hi,
            None => r != 2,
        };
        if !keep || r == 0 {
            continue;
        }
        let query = Query { keywords: union.into_iter().cloned().collect() };
        out.push((query, app.clone()));
    }
    out
}
