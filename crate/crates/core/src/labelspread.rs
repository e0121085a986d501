//! Label Spreading over the co-authorship graph.
//!
//! Nodes are author identifiers, edge weights count co-authored publications.
//! With `S = D^{-1/2} W D^{-1/2}` and one-hot seed labels `Y`, the soft labels
//! are the fixed point of
//!
//! ```text
//! F(t+1) = α S F(t) + (1 − α) Y,    F(0) = Y
//! ```
//!
//! whose limit is `F* = (1 − α)(I − α S)^{-1} Y`. [`spread`] runs the sparse
//! iteration; [`closed_form`] solves the dense system and exists to check it.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::Dataset;
use crate::model::{AuthorProfile, ClassLine, LsEvidence, RegistryRecord, Verdict};
use crate::taxonomy::{parse_rf, project, Granularity, TaxonomyTable};

/// Square sparse matrix in compressed-row form. Column indices are sorted within each row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds an `n × n` matrix, summing duplicate entries and dropping zeros.
    pub fn from_triplets(n: usize, triplets: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        let mut rows: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); n];
        for (i, j, v) in triplets {
            if i >= n || j >= n {
                return Err(Error::Shape(format!("entry ({i}, {j}) outside {n}x{n}")));
            }
            *rows[i].entry(j).or_insert(0.0) += v;
        }
        let mut indptr = Vec::with_capacity(n + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for row in rows {
            for (j, v) in row {
                if v != 0.0 {
                    indices.push(j);
                    values.push(v);
                }
            }
            indptr.push(indices.len());
        }
        Ok(CsrMatrix {
            n,
            indptr,
            indices,
            values,
        })
    }

    pub fn zeros(n: usize) -> Self {
        CsrMatrix {
            n,
            indptr: vec![0; n + 1],
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.indptr[i]..self.indptr[i + 1];
        self.indices[r.clone()]
            .iter()
            .copied()
            .zip(self.values[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.indptr[i]..self.indptr[i + 1];
        match self.indices[r.clone()].binary_search(&j) {
            Ok(k) => self.values[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).map(|(_, v)| v).sum()).collect()
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| self.row(i).all(|(j, v)| self.get(j, i) == v))
    }

    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= c);
        out
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                m[(i, j)] = v;
            }
        }
        m
    }

    /// `out = self · x` for a row-major `n × cols` dense `x`.
    fn mul_dense_into(&self, x: &[f64], cols: usize, out: &mut [f64]) {
        out.par_chunks_mut(cols.max(1)).enumerate().for_each(|(i, row_out)| {
            row_out.iter_mut().for_each(|v| *v = 0.0);
            for (j, s) in self.row(i) {
                let xr = &x[j * cols..(j + 1) * cols];
                for (o, xv) in row_out.iter_mut().zip(xr) {
                    *o += s * xv;
                }
            }
        });
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeWeighting {
    /// Number of distinct co-authored publications.
    #[default]
    Count,
    Binary,
}

#[derive(Debug, Clone)]
pub struct CoauthorGraph {
    pub nodes: Vec<String>,
    index: HashMap<String, usize>,
    pub weights: CsrMatrix,
}

impl CoauthorGraph {
    pub fn node_index(&self, auid: &str) -> Option<usize> {
        self.index.get(auid).copied()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Undirected edge list `(a, b, weight)` with `a < b` by node order.
    pub fn edges(&self) -> Vec<(&str, &str, f64)> {
        let mut out = Vec::with_capacity(self.weights.nnz() / 2);
        for i in 0..self.len() {
            for (j, w) in self.weights.row(i) {
                if i < j {
                    out.push((self.nodes[i].as_str(), self.nodes[j].as_str(), w));
                }
            }
        }
        out
    }
}

/// Builds the co-authorship graph. Publications are identified by `pub_id`
/// across profiles, so a paper listed by both co-authors counts once.
pub fn build_graph<'a>(
    profiles: impl IntoIterator<Item = &'a AuthorProfile>,
    weighting: EdgeWeighting,
) -> CoauthorGraph {
    let mut authors_of: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    let mut nodes: BTreeSet<&str> = BTreeSet::new();
    for p in profiles {
        nodes.insert(&p.auid);
        for publication in &p.publications {
            let set = authors_of.entry(&publication.pub_id).or_default();
            set.insert(&p.auid);
            for c in &publication.coauthor_auids {
                set.insert(c);
                nodes.insert(c);
            }
        }
    }
    let nodes: Vec<String> = nodes.into_iter().map(str::to_string).collect();
    let index: HashMap<String, usize> = nodes.iter().enumerate().map(|(i, a)| (a.clone(), i)).collect();
    let mut pair_counts: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    for authors in authors_of.values() {
        let ids: Vec<usize> = authors.iter().map(|a| index[*a]).collect();
        for (k, &a) in ids.iter().enumerate() {
            for &b in &ids[k + 1..] {
                *pair_counts.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
    }
    let triplets = pair_counts.into_iter().flat_map(|((a, b), c)| {
        let w = match weighting {
            EdgeWeighting::Count => c as f64,
            EdgeWeighting::Binary => 1.0,
        };
        [(a, b, w), (b, a, w)]
    });
    let weights = CsrMatrix::from_triplets(nodes.len(), triplets).expect("indices come from the node table");
    CoauthorGraph { nodes, index, weights }
}

/// `s_ij = w_ij / sqrt(d_i d_j)`; rows and columns of zero-degree nodes stay empty.
pub fn normalize(w: &CsrMatrix) -> CsrMatrix {
    let degrees = w.row_sums();
    let mut s = w.clone();
    for i in 0..s.n {
        for k in s.indptr[i]..s.indptr[i + 1] {
            let j = s.indices[k];
            let dd = degrees[i] * degrees[j];
            s.values[k] = if dd > 0.0 { s.values[k] / dd.sqrt() } else { 0.0 };
        }
    }
    s
}

/// One-hot seed labels, stored as one optional class index per node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedLabels {
    pub classes: Vec<String>,
    pub labels: Vec<Option<usize>>,
}

impl SeedLabels {
    pub fn new(classes: Vec<String>, labels: Vec<Option<usize>>) -> Result<Self> {
        if let Some(bad) = labels.iter().flatten().find(|&&c| c >= classes.len()) {
            return Err(Error::Shape(format!(
                "class index {bad} with {} classes",
                classes.len()
            )));
        }
        Ok(SeedLabels { classes, labels })
    }

    /// Labels graph nodes from `(auid, class_id)` assignments. Classes are sorted;
    /// a node seeded to several classes keeps the most frequent, ties going to
    /// the smallest class id. Assignments for auids outside the graph are ignored.
    pub fn from_assignments<'a>(
        graph: &CoauthorGraph,
        assignments: impl IntoIterator<Item = (&'a str, String)>,
    ) -> Self {
        let mut per_node: BTreeMap<usize, BTreeMap<String, usize>> = BTreeMap::new();
        for (auid, class) in assignments {
            match graph.node_index(auid) {
                Some(i) => *per_node.entry(i).or_default().entry(class).or_default() += 1,
                None => log::warn!("seed {auid} is not a graph node"),
            }
        }
        let classes: Vec<String> = per_node
            .values()
            .flat_map(|m| m.keys().cloned())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let class_index: HashMap<&str, usize> = classes.iter().enumerate().map(|(i, c)| (c.as_str(), i)).collect();
        let mut labels = vec![None; graph.len()];
        for (node, counts) in &per_node {
            if counts.len() > 1 {
                log::warn!(
                    "node {} seeded with conflicting classes {:?}",
                    graph.nodes[*node],
                    counts
                );
            }
            // BTreeMap iterates in class order, so max_by_key keeping the first max needs a reversed key.
            let best = counts
                .iter()
                .max_by(|a, b| a.1.cmp(b.1).then_with(|| b.0.cmp(a.0)))
                .map(|(c, _)| class_index[c.as_str()]);
            labels[*node] = best;
        }
        SeedLabels { classes, labels }
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let c = self.classes.len();
        let mut y = vec![0.0; self.n() * c];
        for (i, l) in self.labels.iter().enumerate() {
            if let Some(k) = l {
                y[i * c + k] = 1.0;
            }
        }
        y
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpreadParams {
    pub alpha: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SpreadParams {
    fn default() -> Self {
        SpreadParams {
            alpha: 0.2,
            tol: 0.001,
            max_iter: 30,
        }
    }
}

impl SpreadParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Param(format!("alpha must be in (0,1), got {}", self.alpha)));
        }
        // Written negated so that NaN is rejected too.
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(self.tol > 0.0) || self.max_iter == 0 {
            return Err(Error::Param("tol must be positive and max_iter at least 1".into()));
        }
        Ok(())
    }
}

/// Size of one update `F(t+1) − F(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepNorm {
    pub max_abs: f64,
    pub frobenius: f64,
}

#[derive(Debug, Clone)]
pub struct SoftLabels {
    pub classes: Vec<String>,
    n: usize,
    f: Vec<f64>,
    pub iterations_used: usize,
    pub converged: bool,
    pub trace: Vec<StepNorm>,
}

impl SoftLabels {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn row(&self, node: usize) -> &[f64] {
        let c = self.classes.len();
        &self.f[node * c..(node + 1) * c]
    }

    /// Row-major `n × C` values.
    pub fn values(&self) -> &[f64] {
        &self.f
    }
}

pub fn spread(s: &CsrMatrix, y: &SeedLabels, params: &SpreadParams) -> Result<SoftLabels> {
    params.validate()?;
    if s.n() != y.n() {
        return Err(Error::Shape(format!("S is {}x{}, Y has {} rows", s.n(), s.n(), y.n())));
    }
    let c = y.classes.len();
    let base: Vec<f64> = y.to_dense().into_iter().map(|v| (1.0 - params.alpha) * v).collect();
    let mut f = y.to_dense();
    let mut next = vec![0.0; f.len()];
    let mut trace = Vec::new();
    let mut converged = false;
    for _ in 0..params.max_iter {
        s.mul_dense_into(&f, c, &mut next);
        let mut max_abs = 0.0f64;
        let mut sq = 0.0;
        for ((nv, b), old) in next.iter_mut().zip(&base).zip(&f) {
            *nv = params.alpha * *nv + b;
            let d = *nv - old;
            max_abs = max_abs.max(d.abs());
            sq += d * d;
        }
        std::mem::swap(&mut f, &mut next);
        trace.push(StepNorm {
            max_abs,
            frobenius: sq.sqrt(),
        });
        if max_abs <= params.tol {
            converged = true;
            break;
        }
    }
    Ok(SoftLabels {
        classes: y.classes.clone(),
        n: y.n(),
        f,
        iterations_used: trace.len(),
        converged,
        trace,
    })
}

/// Default node cap for the dense solve.
pub const CLOSED_FORM_CAP: usize = 2000;

/// Dense `(1 − α)(I − αS)^{-1} Y`, row-major `n × C`.
pub fn closed_form(s: &CsrMatrix, y: &SeedLabels, alpha: f64, cap: usize) -> Result<Vec<f64>> {
    let n = s.n();
    if n > cap {
        return Err(Error::TooLarge { n, cap });
    }
    if n != y.n() {
        return Err(Error::Shape(format!("S is {n}x{n}, Y has {} rows", y.n())));
    }
    let c = y.classes.len();
    let m = DMatrix::<f64>::identity(n, n) - s.to_dense() * alpha;
    let rhs = DMatrix::from_row_slice(n, c, &y.to_dense()) * (1.0 - alpha);
    let x = m
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Shape("I - alpha S is singular".into()))?;
    let mut out = vec![0.0; n * c];
    for i in 0..n {
        for k in 0..c {
            out[i * c + k] = x[(i, k)];
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Inference {
    /// `None` when the node's row is all zero.
    pub class: Option<usize>,
    pub confidence: f64,
    pub tie: bool,
}

/// Argmax of a node's soft-label row; ties go to the smallest class index.
pub fn infer_class(soft: &SoftLabels, node: usize) -> Result<Inference> {
    if node >= soft.n() {
        return Err(Error::NodeNotFound(format!("#{node}")));
    }
    Ok(argmax(soft.row(node)))
}

fn argmax(row: &[f64]) -> Inference {
    let mut best: Option<usize> = None;
    let mut tie = false;
    for (k, &v) in row.iter().enumerate() {
        if v <= 0.0 {
            continue;
        }
        match best {
            None => best = Some(k),
            Some(b) if v > row[b] => {
                best = Some(k);
                tie = false;
            }
            Some(b) if v == row[b] => tie = true,
            _ => {}
        }
    }
    Inference {
        class: best,
        confidence: best.map_or(0.0, |b| row[b]),
        tie,
    }
}

/// A finished spread at one granularity, ready to classify candidates.
#[derive(Debug, Clone)]
pub struct LabelModel {
    pub level: Granularity,
    pub graph: CoauthorGraph,
    pub seeds: SeedLabels,
    pub soft: SoftLabels,
}

impl LabelModel {
    /// Builds the graph from every profile in the dataset, seeds it with the
    /// seed authors' classes at `level`, and spreads.
    pub fn build(
        dataset: &Dataset,
        level: Granularity,
        params: &SpreadParams,
        weighting: EdgeWeighting,
    ) -> Result<Self> {
        let graph = build_graph(dataset.profiles.values(), weighting);
        let mut assignments = Vec::with_capacity(dataset.seeds.len());
        for seed in &dataset.seeds {
            let ad = dataset.records.get(&seed.record_id).map(|r| r.ad.as_str());
            match project(&seed.rf, level, ad) {
                Ok(class) => assignments.push((seed.auid.as_str(), class)),
                Err(e) => log::warn!("seed {} skipped: {e}", seed.auid),
            }
        }
        let seeds = SeedLabels::from_assignments(&graph, assignments);
        let s = normalize(&graph.weights);
        let soft = spread(&s, &seeds, params)?;
        if !soft.converged {
            log::info!(
                "label spreading at {level} stopped after {} iterations without reaching tol {}",
                soft.iterations_used,
                params.tol
            );
        }
        Ok(LabelModel {
            level,
            graph,
            seeds,
            soft,
        })
    }

    pub fn infer(&self, auid: &str) -> Result<Inference> {
        let node = self
            .graph
            .node_index(auid)
            .ok_or_else(|| Error::NodeNotFound(auid.to_string()))?;
        infer_class(&self.soft, node)
    }

    pub fn class_id(&self, inference: &Inference) -> Option<&str> {
        inference.class.map(|k| self.soft.classes[k].as_str())
    }

    /// Evidence block describing the inferred class, with coarser levels
    /// derived by projection and labels looked up in `taxonomy`.
    pub fn evidence(&self, auid: &str, taxonomy: Option<&TaxonomyTable>) -> LsEvidence {
        let inference = self.infer(auid).unwrap_or(Inference {
            class: None,
            confidence: 0.0,
            tie: false,
        });
        let class_id = self.class_id(&inference).map(str::to_string);
        let mut ev = LsEvidence {
            level: self.level,
            class_id: class_id.clone(),
            confidence: inference.confidence,
            tie: inference.tie,
            field: None,
            group: None,
            area: None,
        };
        let Some(class) = class_id else { return ev };
        let label = |code: &str, level: Granularity| ClassLine {
            code: code.to_string(),
            label: taxonomy
                .and_then(|t| t.class_label(code, level))
                .unwrap_or(code)
                .to_string(),
        };
        let rf = match self.level {
            Granularity::AcademicDiscipline => {
                ev.field = Some(label(&class, Granularity::AcademicDiscipline));
                taxonomy.and_then(|t| t.ad_to_rf.get(&class).copied())
            }
            Granularity::RecruitmentField => {
                ev.field = Some(label(&class, Granularity::RecruitmentField));
                parse_rf(&class).ok()
            }
            Granularity::RecruitmentFieldGroup => {
                ev.group = Some(label(&class, Granularity::RecruitmentFieldGroup));
                ev.area = Some(label(&class[..2], Granularity::ScientificArea));
                None
            }
            Granularity::ScientificArea => {
                ev.area = Some(label(&class, Granularity::ScientificArea));
                None
            }
        };
        if let Some(rf) = rf {
            ev.group = Some(label(&rf.group_code(), Granularity::RecruitmentFieldGroup));
            ev.area = Some(label(&rf.area(), Granularity::ScientificArea));
        }
        ev
    }

    /// `yes` iff the author's inferred class equals the record's class at this level.
    pub fn classify(&self, record: &RegistryRecord, auid: &str) -> (Verdict, Option<Inference>) {
        ls_classify(record, auid, self)
    }
}

pub fn ls_classify(record: &RegistryRecord, auid: &str, model: &LabelModel) -> (Verdict, Option<Inference>) {
    let inference = match model.infer(auid) {
        Ok(i) => i,
        Err(e) => {
            log::warn!("record {}: {e}; abstaining", record.record_id);
            return (Verdict::Abstain, None);
        }
    };
    let Some(inferred) = model.class_id(&inference) else {
        return (Verdict::Abstain, Some(inference));
    };
    let expected = match project(&record.rf, model.level, Some(&record.ad)) {
        Ok(c) => c,
        Err(e) => {
            log::warn!("record {}: {e}; abstaining", record.record_id);
            return (Verdict::Abstain, Some(inference));
        }
    };
    (Verdict::from_bool(inferred == expected), Some(inference))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Publication;

    fn dense(m: &CsrMatrix) -> Vec<Vec<f64>> {
        (0..m.n()).map(|i| (0..m.n()).map(|j| m.get(i, j)).collect()).collect()
    }

    fn sym(n: usize, edges: &[(usize, usize, f64)]) -> CsrMatrix {
        CsrMatrix::from_triplets(n, edges.iter().flat_map(|&(a, b, w)| [(a, b, w), (b, a, w)])).unwrap()
    }

    fn publication(id: &str, coauthors: &[&str]) -> Publication {
        Publication {
            pub_id: id.into(),
            year: 2020,
            title: String::new(),
            keywords: vec![],
            abstract_text: None,
            references: vec![],
            coauthor_auids: coauthors.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn author(auid: &str, pubs: Vec<Publication>) -> AuthorProfile {
        AuthorProfile {
            auid: auid.into(),
            given_name: String::new(),
            surname: String::new(),
            initials: String::new(),
            full_name: String::new(),
            affiliations: vec![],
            publications: pubs,
        }
    }

    #[test]
    fn graph_counts_shared_papers() {
        let a = author(
            "a",
            vec![
                publication("p1", &["b"]),
                publication("p2", &["b"]),
                publication("p3", &["b", "a"]),
            ],
        );
        let c = author("c", vec![]);
        let g = build_graph([&a, &c], EdgeWeighting::Count);
        let (ia, ib, ic) = (
            g.node_index("a").unwrap(),
            g.node_index("b").unwrap(),
            g.node_index("c").unwrap(),
        );
        assert_eq!(g.weights.get(ia, ib), 3.0);
        assert_eq!(g.weights.get(ia, ia), 0.0);
        assert_eq!(g.weights.row(ic).count(), 0);
        assert!(g.weights.is_symmetric());
        let bin = build_graph([&a], EdgeWeighting::Binary);
        assert_eq!(bin.weights.get(0, 1), 1.0);
    }

    #[test]
    fn graph_dedups_shared_pub_ids() {
        let a = author("a", vec![publication("P", &["b"])]);
        let b = author("b", vec![publication("P", &["a"])]);
        let g = build_graph([&a, &b], EdgeWeighting::Count);
        assert_eq!(g.weights.get(0, 1), 1.0);
        assert_eq!(g.edges(), vec![("a", "b", 1.0)]);
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(
            dense(&normalize(&sym(2, &[(0, 1, 1.0)]))),
            vec![vec![0.0, 1.0], vec![1.0, 0.0]]
        );
        assert_eq!(
            dense(&normalize(&sym(2, &[(0, 1, 2.0)]))),
            vec![vec![0.0, 1.0], vec![1.0, 0.0]]
        );
        let tri = normalize(&sym(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]));
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(tri.get(i, j), if i == j { 0.0 } else { 0.5 });
            }
        }
        let iso = normalize(&sym(3, &[(0, 1, 1.0)]));
        assert_eq!(iso.row(2).count(), 0);
    }

    fn labels(classes: &[&str], l: Vec<Option<usize>>) -> SeedLabels {
        SeedLabels::new(classes.iter().map(|s| s.to_string()).collect(), l).unwrap()
    }

    #[test]
    fn isolated_labeled_node() {
        let s = CsrMatrix::zeros(2);
        let y = labels(&["A"], vec![Some(0), None]);
        let f = spread(&s, &y, &SpreadParams::default()).unwrap();
        assert!((f.row(0)[0] - 0.8).abs() < 1e-15);
        assert_eq!(f.row(1)[0], 0.0);
        // F(1) = 0.8 Y differs from F(0) = Y by 0.2, F(2) = F(1)
        assert_eq!(f.iterations_used, 2);
        assert!(f.converged);
    }

    #[test]
    fn all_zero_seeds() {
        let s = normalize(&sym(3, &[(0, 1, 1.0), (1, 2, 1.0)]));
        let y = labels(&["A", "B"], vec![None, None, None]);
        let f = spread(&s, &y, &SpreadParams::default()).unwrap();
        assert!(f.values().iter().all(|v| *v == 0.0));
        assert_eq!(f.iterations_used, 1);
        assert!(f.converged);
    }

    // Direct 2x2 solve of (I - 0.2 S) F = 0.8 Y with S = [[0,1],[1,0]], Y_A = [1,0]:
    // [[1,-0.2],[-0.2,1]]^{-1} = (1/0.96) [[1,0.2],[0.2,1]] -> F_A = (0.8/0.96) [1, 0.2].
    const TWO_NODE: [f64; 2] = [0.8 / 0.96, 0.8 * 0.2 / 0.96];

    #[test]
    fn two_node_path() {
        let s = normalize(&sym(2, &[(0, 1, 1.0)]));
        let y = labels(&["A", "B"], vec![Some(0), None]);
        let exact = closed_form(&s, &y, 0.2, 10).unwrap();
        assert!((exact[0] - TWO_NODE[0]).abs() < 1e-12);
        assert!((exact[2] - TWO_NODE[1]).abs() < 1e-12);
        assert!((exact[0] - 0.8333).abs() < 1e-4 && (exact[2] - 0.1667).abs() < 1e-4);
        let iter = spread(
            &s,
            &y,
            &SpreadParams {
                alpha: 0.2,
                tol: 1e-12,
                max_iter: 1000,
            },
        )
        .unwrap();
        assert!((iter.row(0)[0] - TWO_NODE[0]).abs() < 1e-10);
        assert!((iter.row(1)[0] - TWO_NODE[1]).abs() < 1e-10);
    }

    #[test]
    fn closed_form_of_empty_graph() {
        let s = CsrMatrix::zeros(3);
        let y = labels(&["A", "B"], vec![Some(1), None, Some(0)]);
        let f = closed_form(&s, &y, 0.2, 10).unwrap();
        let expect: Vec<f64> = y.to_dense().iter().map(|v| 0.8 * v).collect();
        assert_eq!(f, expect);
        assert!(matches!(
            closed_form(&s, &y, 0.2, 2),
            Err(Error::TooLarge { n: 3, cap: 2 })
        ));
    }

    #[test]
    fn closed_form_permutation() {
        let s = normalize(&sym(3, &[(0, 1, 2.0), (1, 2, 1.0)]));
        let y = labels(&["A", "B"], vec![Some(0), None, Some(1)]);
        let f = closed_form(&s, &y, 0.2, 10).unwrap();
        // reverse the node order
        let sp = normalize(&sym(3, &[(2, 1, 2.0), (1, 0, 1.0)]));
        let yp = labels(&["A", "B"], vec![Some(1), None, Some(0)]);
        let fp = closed_form(&sp, &yp, 0.2, 10).unwrap();
        for i in 0..3 {
            for k in 0..2 {
                assert!((f[i * 2 + k] - fp[(2 - i) * 2 + k]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn shape_mismatch() {
        let s = CsrMatrix::zeros(3);
        let y = labels(&["A"], vec![None, None]);
        assert!(matches!(spread(&s, &y, &SpreadParams::default()), Err(Error::Shape(_))));
        assert!(SeedLabels::new(vec!["A".into()], vec![Some(1)]).is_err());
    }

    #[test]
    fn argmax_rules() {
        let i = argmax(&[0.83, 0.02]);
        assert_eq!((i.class, i.tie), (Some(0), false));
        assert_eq!(i.confidence, 0.83);
        assert_eq!(argmax(&[0.0, 0.0]).class, None);
        let t = argmax(&[0.4, 0.4]);
        assert_eq!((t.class, t.tie), (Some(0), true));
        let t = argmax(&[0.1, 0.4, 0.4]);
        assert_eq!((t.class, t.tie), (Some(1), true));
    }

    #[test]
    fn infer_unknown_node() {
        let s = CsrMatrix::zeros(1);
        let f = spread(&s, &labels(&["A"], vec![Some(0)]), &SpreadParams::default()).unwrap();
        assert!(matches!(infer_class(&f, 5), Err(Error::NodeNotFound(_))));
    }

    #[test]
    fn conflicting_seed_labels() {
        let a = author("a", vec![publication("p", &["b"])]);
        let g = build_graph([&a], EdgeWeighting::Count);
        let y = SeedLabels::from_assignments(
            &g,
            vec![
                ("a", "09".to_string()),
                ("a", "01".to_string()),
                ("b", "09".into()),
                ("b", "09".into()),
                ("b", "01".into()),
            ],
        );
        assert_eq!(y.classes, vec!["01", "09"]);
        assert_eq!(y.labels, vec![Some(0), Some(1)]);
    }
}
