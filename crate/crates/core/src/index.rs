//! Multi-table LSH index with early-stopping, instrumented queries.
//!
//! Each of the `L` tables keys points by the exact `K`-tuple of bucket indices of its
//! concatenated hash. A query walks the tables in order, scans the query's bucket in insertion
//! order and stops at the first point within `α·r`. Candidates are not deduplicated across
//! tables.
//!
//! Index file layout (little-endian):
//!
//! | field            | encoding                                                            |
//! |------------------|---------------------------------------------------------------------|
//! | magic            | `DLSX`                                                              |
//! | version          | `u32` (= 1)                                                         |
//! | family           | `u32` length + UTF-8 descriptor (`name=..;p=..;w=..;r=..;rho_model=..`) |
//! | plan             | `u32` length + UTF-8 mode, then `k, l` as `u64`, `alpha, beta, r, delta, mu, eta, m` as `f64`, `m_clamped` as `u8`, `k_real, p1, rho_alpha, predicted_cost` as `f64`, `n, n_beta` as `u64`, `dim` as `f64` |
//! | shape            | `n` as `u64`, `d` as `u32`                                          |
//! | hashes           | for each table, for each of `K` parts: `d` projection `f64`s then the offset |
//! | bucket directory | for each table: bucket count `u64`, then per bucket in ascending key order: `K` keys `i64`, member count `u32`, members `u32` |

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bounds::{PlanMode, PlanParams};
use crate::geometry::Dataset;
use crate::lsh_families::{ConcatenatedHash, HashFunction, UniformLshFamily};
use crate::{Error, Result};

type Table = HashMap<Box<[i64]>, Vec<u32>>;

#[derive(Debug, Clone)]
pub struct LshIndex {
    data: Arc<Dataset>,
    family: UniformLshFamily,
    plan: PlanParams,
    hashes: Vec<ConcatenatedHash>,
    tables: Vec<Table>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Outcome {
    Found { index: usize, distance: f64 },
    NotFound,
}

impl Outcome {
    pub fn is_found(&self) -> bool {
        matches!(self, Outcome::Found { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueryStats {
    pub rounds_executed: usize,
    /// Bucket entries scanned, summed over rounds (duplicates across tables count again).
    pub candidates_examined: u64,
    /// Scanned entries farther than `α·r`.
    pub far_candidates: u64,
    pub distance_computations: u64,
    pub hash_evaluations: u64,
    /// Wall-clock time spent computing bucket keys.
    pub hash_eval_seconds: f64,
    pub outcome: Outcome,
    /// Set when the candidate budget ran out before the tables did.
    pub truncated: bool,
}

impl QueryStats {
    /// Same as `==` but ignoring the wall-clock field.
    pub fn same_counts(&self, other: &QueryStats) -> bool {
        QueryStats { hash_eval_seconds: 0.0, ..*self } == QueryStats { hash_eval_seconds: 0.0, ..*other }
    }
}

/// Per-round detail of a traced query.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RoundTrace {
    pub bucket_size: usize,
    pub examined: usize,
    pub far: usize,
    /// Examined entries within `α·r`; at most one because the query stops there.
    pub near: usize,
}

fn check_plan(ds: &Dataset, plan: &PlanParams, family: &UniformLshFamily) -> Result<()> {
    if plan.k == 0 || plan.l == 0 {
        return Err(Error::InconsistentInputs(format!("plan has K = {}, L = {}", plan.k, plan.l)));
    }
    if plan.k > i32::MAX as usize || plan.l > u32::MAX as usize {
        return Err(Error::InconsistentInputs("plan is too large to build".into()));
    }
    if ds.metric() != family.metric() {
        return Err(Error::InconsistentInputs(format!(
            "dataset metric {} does not match family {}",
            ds.metric(),
            family.name()
        )));
    }
    if (plan.r - family.r()).abs() > 1e-12 * family.r() {
        return Err(Error::InconsistentInputs(format!(
            "plan radius {} differs from family radius {}",
            plan.r,
            family.r()
        )));
    }
    if plan.n != ds.len() as u64 {
        return Err(Error::InconsistentInputs(format!(
            "plan made for n = {}, dataset has {} points",
            plan.n,
            ds.len()
        )));
    }
    if ds.len() > u32::MAX as usize {
        return Err(Error::param("datasets above u32::MAX points are not supported"));
    }
    Ok(())
}

fn fill_table(ds: &Dataset, g: &ConcatenatedHash) -> Table {
    let mut table: Table = HashMap::new();
    let mut key = Vec::with_capacity(g.k());
    for (i, x) in ds.points().enumerate() {
        g.key_into(x, &mut key);
        table.entry(key.as_slice().into()).or_default().push(i as u32);
    }
    table
}

impl LshIndex {
    /// Samples `L·K` hashes and fills the tables. Table `t` draws its hashes from stream `t` of
    /// a ChaCha8 generator seeded with `seed`, so the result does not depend on thread count.
    pub fn build(data: Arc<Dataset>, plan: PlanParams, family: UniformLshFamily, seed: u64) -> Result<Self> {
        check_plan(&data, &plan, &family)?;
        let dim = data.dim();
        let built: Vec<(ConcatenatedHash, Table)> = (0..plan.l)
            .into_par_iter()
            .map(|t| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(t as u64);
                let g = ConcatenatedHash::sample_with(&family, dim, plan.k, &mut rng)?;
                let table = fill_table(&data, &g);
                Ok((g, table))
            })
            .collect::<Result<_>>()?;
        let (hashes, tables) = built.into_iter().unzip();
        Ok(LshIndex { data, family, plan, hashes, tables })
    }

    pub fn dataset(&self) -> &Arc<Dataset> {
        &self.data
    }

    pub fn family(&self) -> &UniformLshFamily {
        &self.family
    }

    pub fn plan(&self) -> &PlanParams {
        &self.plan
    }

    pub fn num_tables(&self) -> usize {
        self.tables.len()
    }

    pub fn hashes(&self) -> &[ConcatenatedHash] {
        &self.hashes
    }

    /// Members of the bucket with key `key` in table `t`, in insertion order.
    pub fn bucket(&self, t: usize, key: &[i64]) -> &[u32] {
        self.tables[t].get(key).map_or(&[], Vec::as_slice)
    }

    pub fn bucket_count(&self, t: usize) -> usize {
        self.tables[t].len()
    }

    /// Checks that every table holds each point exactly once under its own key arity.
    pub fn check_invariants(&self) -> Result<()> {
        if self.tables.len() != self.plan.l || self.hashes.len() != self.plan.l {
            return Err(Error::format("table count differs from plan L"));
        }
        let n = self.data.len();
        for (t, table) in self.tables.iter().enumerate() {
            let mut seen = vec![false; n];
            for (key, members) in table {
                if key.len() != self.plan.k || self.hashes[t].k() != self.plan.k {
                    return Err(Error::format(format!("table {t} has a key of arity {}", key.len())));
                }
                for &i in members {
                    let slot = seen
                        .get_mut(i as usize)
                        .ok_or_else(|| Error::format(format!("table {t} references point {i}")))?;
                    if std::mem::replace(slot, true) {
                        return Err(Error::format(format!("point {i} appears twice in table {t}")));
                    }
                }
            }
            if let Some(i) = seen.iter().position(|s| !s) {
                return Err(Error::format(format!("point {i} missing from table {t}")));
            }
        }
        Ok(())
    }

    pub fn query(&self, q: &[f64]) -> Result<QueryStats> {
        self.run(q, u64::MAX, None)
    }

    /// Like [`query`](Self::query) but gives up, reporting not found, after `max_candidates`
    /// bucket entries.
    pub fn query_with_budget(&self, q: &[f64], max_candidates: u64) -> Result<QueryStats> {
        if max_candidates == 0 {
            return Err(Error::param("candidate budget must be at least 1"));
        }
        self.run(q, max_candidates, None)
    }

    pub fn query_traced(&self, q: &[f64]) -> Result<(QueryStats, Vec<RoundTrace>)> {
        let mut trace = Vec::new();
        let stats = self.run(q, u64::MAX, Some(&mut trace))?;
        Ok((stats, trace))
    }

    /// For every table, the query's full bucket split into points within and beyond `α·r`,
    /// without early stopping. Returns `(bucket_size, far)` per table.
    pub fn bucket_census(&self, q: &[f64]) -> Result<Vec<(usize, usize)>> {
        self.data.check_query(q)?;
        let radius = self.plan.alpha * self.plan.r;
        let metric = self.data.metric();
        let mut key = Vec::with_capacity(self.plan.k);
        Ok(self
            .hashes
            .iter()
            .enumerate()
            .map(|(t, g)| {
                g.key_into(q, &mut key);
                let members = self.bucket(t, &key);
                let far = members
                    .iter()
                    .filter(|&&i| metric.dist(q, self.data.point(i as usize)) > radius)
                    .count();
                (members.len(), far)
            })
            .collect())
    }

    fn run(&self, q: &[f64], budget: u64, mut trace: Option<&mut Vec<RoundTrace>>) -> Result<QueryStats> {
        self.data.check_query(q)?;
        let radius = self.plan.alpha * self.plan.r;
        let metric = self.data.metric();
        let mut stats = QueryStats {
            rounds_executed: 0,
            candidates_examined: 0,
            far_candidates: 0,
            distance_computations: 0,
            hash_evaluations: 0,
            hash_eval_seconds: 0.0,
            outcome: Outcome::NotFound,
            truncated: false,
        };
        let mut key = Vec::with_capacity(self.plan.k);
        for (t, g) in self.hashes.iter().enumerate() {
            let started = Instant::now();
            g.key_into(q, &mut key);
            stats.hash_eval_seconds += started.elapsed().as_secs_f64();
            stats.hash_evaluations += g.k() as u64;
            stats.rounds_executed += 1;

            let members = self.bucket(t, &key);
            let mut round = RoundTrace { bucket_size: members.len(), examined: 0, far: 0, near: 0 };
            for &i in members {
                if stats.candidates_examined == budget {
                    stats.truncated = true;
                    break;
                }
                stats.candidates_examined += 1;
                stats.distance_computations += 1;
                round.examined += 1;
                let d = metric.dist(q, self.data.point(i as usize));
                if d <= radius {
                    round.near += 1;
                    stats.outcome = Outcome::Found { index: i as usize, distance: d };
                    break;
                }
                round.far += 1;
                stats.far_candidates += 1;
            }
            if let Some(trace) = trace.as_deref_mut() {
                trace.push(round);
            }
            if stats.outcome.is_found() || stats.truncated {
                break;
            }
        }
        Ok(stats)
    }

    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        write_str(&mut w, &self.family.to_record())?;
        write_plan(&mut w, &self.plan)?;
        w.write_all(&(self.data.len() as u64).to_le_bytes())?;
        w.write_all(&(self.data.dim() as u32).to_le_bytes())?;
        for g in &self.hashes {
            for h in &g.parts {
                for a in &h.projection {
                    w.write_all(&a.to_le_bytes())?;
                }
                w.write_all(&h.offset.to_le_bytes())?;
            }
        }
        for table in &self.tables {
            let mut keys: Vec<&Box<[i64]>> = table.keys().collect();
            keys.sort_unstable();
            w.write_all(&(keys.len() as u64).to_le_bytes())?;
            for key in keys {
                for part in key.iter() {
                    w.write_all(&part.to_le_bytes())?;
                }
                let members = &table[key];
                w.write_all(&(members.len() as u32).to_le_bytes())?;
                for i in members {
                    w.write_all(&i.to_le_bytes())?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Reads an index written by [`write`](Self::write) and attaches it to `data`, which must
    /// have the recorded shape and the family's metric.
    pub fn read<R: Read>(mut r: R, data: Arc<Dataset>) -> Result<Self> {
        let magic: [u8; 4] = take(&mut r, "magic")?;
        if &magic != MAGIC {
            return Err(Error::format(format!("bad magic bytes {magic:?}, expected \"DLSX\"")));
        }
        let version = u32::from_le_bytes(take(&mut r, "version")?);
        if version != VERSION {
            return Err(Error::format(format!("unsupported index format version {version}")));
        }
        let family = UniformLshFamily::from_record(&read_str(&mut r, "family")?)
            .map_err(|e| Error::format(format!("family descriptor: {e}")))?;
        let plan = read_plan(&mut r)?;
        let n = read_u64(&mut r, "n")? as usize;
        let dim = u32::from_le_bytes(take(&mut r, "d")?) as usize;
        if family.metric() != data.metric() {
            return Err(Error::InconsistentInputs(format!(
                "index family {} does not match dataset metric {}",
                family.name(),
                data.metric()
            )));
        }
        if n != data.len() || dim != data.dim() {
            return Err(Error::InconsistentInputs(format!(
                "index built for {n} points in {dim} dimensions, dataset has {} in {}",
                data.len(),
                data.dim()
            )));
        }
        check_plan(&data, &plan, &family).map_err(|e| Error::format(e.to_string()))?;

        let mut hashes = Vec::with_capacity(plan.l);
        for _ in 0..plan.l {
            let mut parts = Vec::with_capacity(plan.k);
            for _ in 0..plan.k {
                let projection = (0..dim).map(|_| read_f64(&mut r, "projection")).collect::<Result<Vec<_>>>()?;
                let offset = read_f64(&mut r, "offset")?;
                parts.push(HashFunction { projection, offset, width: family.width() });
            }
            hashes.push(ConcatenatedHash::new(parts)?);
        }
        let mut tables = Vec::with_capacity(plan.l);
        for _ in 0..plan.l {
            let buckets = read_u64(&mut r, "bucket count")?;
            if buckets > n as u64 {
                return Err(Error::format(format!("table lists {buckets} buckets for {n} points")));
            }
            let mut table: Table = HashMap::with_capacity(buckets as usize);
            for _ in 0..buckets {
                let key = (0..plan.k)
                    .map(|_| Ok(i64::from_le_bytes(take(&mut r, "bucket key")?)))
                    .collect::<Result<Box<[i64]>>>()?;
                let len = u32::from_le_bytes(take(&mut r, "bucket size")?) as usize;
                if len > n {
                    return Err(Error::format(format!("bucket of {len} points in a dataset of {n}")));
                }
                let members = (0..len)
                    .map(|_| Ok(u32::from_le_bytes(take(&mut r, "bucket member")?)))
                    .collect::<Result<Vec<u32>>>()?;
                if table.insert(key, members).is_some() {
                    return Err(Error::format("duplicate bucket key"));
                }
            }
            tables.push(table);
        }
        let mut rest = [0u8; 1];
        if r.read(&mut rest)? != 0 {
            return Err(Error::format("trailing bytes after bucket directory"));
        }
        let index = LshIndex { data, family, plan, hashes, tables };
        index.check_invariants()?;
        Ok(index)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write(BufWriter::new(File::create(path)?))
    }

    pub fn load(path: impl AsRef<Path>, data: Arc<Dataset>) -> Result<Self> {
        Self::read(BufReader::new(File::open(path)?), data)
    }
}

const MAGIC: &[u8; 4] = b"DLSX";
const VERSION: u32 = 1;

fn take<R: Read, const N: usize>(r: &mut R, what: &str) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => Error::format(format!("truncated index while reading {what}")),
        _ => Error::Io(e),
    })?;
    Ok(buf)
}

fn read_u64<R: Read>(r: &mut R, what: &str) -> Result<u64> {
    Ok(u64::from_le_bytes(take(r, what)?))
}

fn read_f64<R: Read>(r: &mut R, what: &str) -> Result<f64> {
    Ok(f64::from_le_bytes(take(r, what)?))
}

fn write_str<W: Write>(w: &mut W, s: &str) -> Result<()> {
    w.write_all(&(s.len() as u32).to_le_bytes())?;
    w.write_all(s.as_bytes())?;
    Ok(())
}

fn read_str<R: Read>(r: &mut R, what: &str) -> Result<String> {
    let len = u32::from_le_bytes(take(r, what)?) as usize;
    if len > 1 << 16 {
        return Err(Error::format(format!("{what} record of {len} bytes")));
    }
    let mut buf = vec![0u8; len];
    r.read_exact(&mut buf)
        .map_err(|_| Error::format(format!("truncated index while reading {what}")))?;
    String::from_utf8(buf).map_err(|_| Error::format(format!("{what} record is not UTF-8")))
}

fn write_plan<W: Write>(w: &mut W, p: &PlanParams) -> Result<()> {
    write_str(w, p.mode.as_str())?;
    w.write_all(&(p.k as u64).to_le_bytes())?;
    w.write_all(&(p.l as u64).to_le_bytes())?;
    for v in [p.alpha, p.beta, p.r, p.delta, p.mu, p.eta, p.m] {
        w.write_all(&v.to_le_bytes())?;
    }
    w.write_all(&[p.m_clamped as u8])?;
    for v in [p.k_real, p.p1, p.rho_alpha, p.predicted_cost] {
        w.write_all(&v.to_le_bytes())?;
    }
    w.write_all(&p.n.to_le_bytes())?;
    w.write_all(&p.n_beta.to_le_bytes())?;
    w.write_all(&p.dim.to_le_bytes())?;
    Ok(())
}

fn read_plan<R: Read>(r: &mut R) -> Result<PlanParams> {
    let mode: PlanMode = read_str(r, "plan mode")?
        .parse()
        .map_err(|e: Error| Error::format(e.to_string()))?;
    let k = read_u64(r, "K")? as usize;
    let l = read_u64(r, "L")? as usize;
    let mut f = [0.0; 7];
    for v in &mut f {
        *v = read_f64(r, "plan")?;
    }
    let [alpha, beta, radius, delta, mu, eta, m] = f;
    let m_clamped = match take::<_, 1>(r, "plan")?[0] {
        0 => false,
        1 => true,
        other => return Err(Error::format(format!("bad flag byte {other}"))),
    };
    let k_real = read_f64(r, "plan")?;
    let p1 = read_f64(r, "plan")?;
    let rho_alpha = read_f64(r, "plan")?;
    let predicted_cost = read_f64(r, "plan")?;
    let n = read_u64(r, "plan")?;
    let n_beta = read_u64(r, "plan")?;
    let dim = read_f64(r, "plan")?;
    Ok(PlanParams {
        mode,
        k,
        l,
        alpha,
        beta,
        r: radius,
        delta,
        mu,
        eta,
        m,
        m_clamped,
        k_real,
        p1,
        rho_alpha,
        predicted_cost,
        n,
        n_beta,
        dim,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::{plan_classical, PlanRequest};
    use crate::geometry::{generate, Generator, Metric};
    use crate::lsh_families::RhoModel;
    use rand::Rng;

    fn fixture(n: usize, d: usize, metric: Metric, seed: u64) -> (Arc<Dataset>, PlanParams, UniformLshFamily) {
        let ds = Arc::new(generate(&Generator::UniformCube { side: 10.0 }, n, d, metric, seed).unwrap());
        let family = UniformLshFamily::new(metric, 1.0, RhoModel::InverseS).unwrap();
        let req = PlanRequest { n: n as u64, n_beta: 0, dim: d as f64, alpha: 2.0, beta: 1.0, r: 1.0, delta: 0.1 };
        let plan = plan_classical(&req, &family).unwrap();
        (ds, plan, family)
    }

    #[test]
    fn tables_partition_points() {
        let (ds, plan, family) = fixture(300, 4, Metric::L2, 1);
        let idx = LshIndex::build(ds, plan, family, 7).unwrap();
        assert_eq!(idx.num_tables(), plan.l);
        idx.check_invariants().unwrap();
    }

    #[test]
    fn single_point_dataset() {
        let (ds, plan, family) = fixture(1, 3, Metric::L1, 2);
        let idx = LshIndex::build(ds, plan, family, 0).unwrap();
        for t in 0..idx.num_tables() {
            assert_eq!(idx.bucket_count(t), 1);
        }
    }

    #[test]
    fn dataset_points_find_themselves_in_round_one() {
        let (ds, plan, family) = fixture(200, 5, Metric::L2, 3);
        let idx = LshIndex::build(ds.clone(), plan, family, 11).unwrap();
        for i in 0..ds.len() {
            let s = idx.query(ds.point(i)).unwrap();
            assert_eq!(s.rounds_executed, 1);
            match s.outcome {
                Outcome::Found { distance, .. } => assert!(distance <= 2.0),
                Outcome::NotFound => panic!("point {i} not found"),
            }
        }
    }

    #[test]
    fn identical_builds_for_equal_seeds() {
        let (ds, plan, family) = fixture(150, 3, Metric::L1, 4);
        let a = LshIndex::build(ds.clone(), plan, family.clone(), 5).unwrap();
        let b = LshIndex::build(ds.clone(), plan, family.clone(), 5).unwrap();
        let c = LshIndex::build(ds, plan, family, 6).unwrap();
        assert_eq!(a.hashes, b.hashes);
        assert_eq!(a.tables, b.tables);
        assert_ne!(a.hashes, c.hashes);
    }

    #[test]
    fn far_query_is_never_found() {
        let (ds, plan, family) = fixture(200, 2, Metric::L2, 5);
        let idx = LshIndex::build(ds, plan, family, 1).unwrap();
        let s = idx.query(&[1000.0, 1000.0]).unwrap();
        assert_eq!(s.outcome, Outcome::NotFound);
        assert_eq!(s.rounds_executed, plan.l);
        assert_eq!(s.far_candidates, s.candidates_examined);
    }

    #[test]
    fn rejects_mismatches() {
        let (ds, plan, family) = fixture(50, 2, Metric::L2, 6);
        let l1 = UniformLshFamily::new(Metric::L1, 1.0, RhoModel::InverseS).unwrap();
        assert!(LshIndex::build(ds.clone(), plan, l1, 0).is_err());
        let idx = LshIndex::build(ds, plan, family, 0).unwrap();
        assert!(matches!(idx.query(&[1.0]), Err(Error::DimensionMismatch { .. })));
        assert!(idx.query_with_budget(&[1.0, 1.0], 0).is_err());
    }

    #[test]
    fn budget_behaviour() {
        let (ds, plan, family) = fixture(400, 3, Metric::L2, 7);
        let idx = LshIndex::build(ds.clone(), plan, family, 2).unwrap();
        let s = idx.query_with_budget(ds.point(17), 1).unwrap();
        assert!(s.outcome.is_found());
        assert_eq!(s.candidates_examined, 1);

        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let full = (ds.len() * plan.l) as u64;
        for _ in 0..50 {
            let q: Vec<f64> = (0..3).map(|_| rng.random::<f64>() * 12.0 - 1.0).collect();
            let a = idx.query(&q).unwrap();
            let b = idx.query_with_budget(&q, full).unwrap();
            assert!(a.same_counts(&b));
            assert!(!b.truncated);
            let c = idx.query_with_budget(&q, 3).unwrap();
            assert!(c.candidates_examined <= 3);
            if c.truncated {
                assert_eq!(c.outcome, Outcome::NotFound);
            }
        }
    }

    #[test]
    fn traces_match_stats() {
        let (ds, plan, family) = fixture(500, 2, Metric::L1, 8);
        let idx = LshIndex::build(ds, plan, family, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let q: Vec<f64> = (0..2).map(|_| rng.random::<f64>() * 10.0).collect();
            let (s, trace) = idx.query_traced(&q).unwrap();
            assert_eq!(trace.len(), s.rounds_executed);
            assert!(s.rounds_executed >= 1);
            assert!(s.far_candidates <= s.candidates_examined);
            assert_eq!(trace.iter().map(|t| t.far as u64).sum::<u64>(), s.far_candidates);
            assert_eq!(trace.iter().map(|t| t.examined as u64).sum::<u64>(), s.candidates_examined);
            assert!(trace.iter().all(|t| t.near <= 1 && t.examined <= t.bucket_size));
            let census = idx.bucket_census(&q).unwrap();
            for (t, round) in trace.iter().enumerate() {
                assert_eq!(census[t].0, round.bucket_size);
                assert!(round.far <= census[t].1);
            }
        }
    }

    #[test]
    fn round_trip_answers_identically() {
        let (ds, plan, family) = fixture(300, 3, Metric::L2, 9);
        let idx = LshIndex::build(ds.clone(), plan, family, 4).unwrap();
        let mut buf = Vec::new();
        idx.write(&mut buf).unwrap();
        let back = LshIndex::read(&buf[..], ds.clone()).unwrap();
        assert_eq!(back.plan, idx.plan);
        assert_eq!(back.hashes, idx.hashes);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let q: Vec<f64> = (0..3).map(|_| rng.random::<f64>() * 10.0).collect();
            assert!(idx.query(&q).unwrap().same_counts(&back.query(&q).unwrap()));
        }
        // stable bytes
        let mut again = Vec::new();
        back.write(&mut again).unwrap();
        assert_eq!(buf, again);
    }

    #[test]
    fn load_errors() {
        let (ds, plan, family) = fixture(60, 2, Metric::L2, 10);
        let idx = LshIndex::build(ds.clone(), plan, family, 4).unwrap();
        let mut buf = Vec::new();
        idx.write(&mut buf).unwrap();
        assert!(LshIndex::read(&buf[..buf.len() - 3], ds.clone()).is_err());
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(LshIndex::read(&bad[..], ds.clone()).is_err());
        let mut extra = buf.clone();
        extra.push(0);
        assert!(LshIndex::read(&extra[..], ds.clone()).is_err());
        let l1 = Arc::new((*ds).clone().with_metric(Metric::L1));
        assert!(matches!(LshIndex::read(&buf[..], l1), Err(Error::InconsistentInputs(_))));
    }

    #[test]
    fn save_and_load_file() {
        let (ds, plan, family) = fixture(80, 2, Metric::L1, 12);
        let idx = LshIndex::build(ds.clone(), plan, family, 4).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.dlsx");
        idx.save(&path).unwrap();
        let back = LshIndex::load(&path, ds).unwrap();
        assert_eq!(back.tables, idx.tables);
    }
}
