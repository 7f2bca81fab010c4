//! A stored population of preference structures, nearest-match retrieval
//! and simulated incremental elicitation.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::io::{Read, Write};
use std::sync::Arc;

use rayon::prelude::*;

use crate::complete::{MetricKind, DISTANCE_TOLERANCE};
use crate::error::{Error, Result};
use crate::estimate::{DistanceEstimate, EstimationConfig};
use crate::orders::{parse_weak_order, OrderBuilder, PartialPreferenceOrder, Relation, WeakOrder};
use crate::partial_metrics::avg_distance;
use crate::rng::derive_seed;
use crate::space::{same_space, OutcomeSpace};
use crate::utility::{induced_weak_order, UtilityVector};

/// A stored, fully specified preference structure.
#[derive(Debug, Clone, PartialEq)]
pub enum Case {
    Order(WeakOrder),
    Utility(UtilityVector),
}

impl Case {
    pub fn space(&self) -> &Arc<OutcomeSpace> {
        match self {
            Case::Order(o) => o.space(),
            Case::Utility(u) => u.space(),
        }
    }

    /// The order on outcomes the case expresses.
    pub fn order(&self) -> WeakOrder {
        match self {
            Case::Order(o) => o.clone(),
            Case::Utility(u) => induced_weak_order(u),
        }
    }

    fn tag(&self) -> &'static str {
        match self {
            Case::Order(_) => "order",
            Case::Utility(_) => "utility",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseBase {
    space: Arc<OutcomeSpace>,
    names: Vec<String>,
    cases: Vec<Case>,
    index: HashMap<String, usize>,
}

impl CaseBase {
    pub fn new(space: Arc<OutcomeSpace>) -> Self {
        Self {
            space,
            names: Vec::new(),
            cases: Vec::new(),
            index: HashMap::new(),
        }
    }

    pub fn space(&self) -> &Arc<OutcomeSpace> {
        &self.space
    }

    pub fn len(&self) -> usize {
        self.cases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cases.is_empty()
    }

    pub fn insert(&mut self, name: impl Into<String>, case: Case) -> Result<()> {
        let name = name.into();
        if name.is_empty() || name.contains('|') || name.trim() != name {
            return Err(Error::InvalidParameter(format!("bad case name {name:?}")));
        }
        same_space(&self.space, case.space())?;
        if self.index.contains_key(&name) {
            return Err(Error::DuplicateCase(name));
        }
        self.index.insert(name.clone(), self.cases.len());
        self.names.push(name);
        self.cases.push(case);
        Ok(())
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn cases(&self) -> &[Case] {
        &self.cases
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownCase(name.to_string()))
    }

    pub fn get(&self, name: &str) -> Result<&Case> {
        Ok(&self.cases[self.index_of(name)?])
    }

    /// Parses the text format: an `outcomes:` line, then one
    /// `name | order | …` or `name | utility | …` line per case. Lines
    /// starting with `#` and blank lines are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut base: Option<CaseBase> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let syntax = |message: String| Error::Syntax { line, message };
            let t = raw.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let Some(cb) = base.as_mut() else {
                let rest = t
                    .strip_prefix("outcomes:")
                    .ok_or_else(|| syntax("expected `outcomes: a, b, ...`".into()))?;
                let labels: Vec<&str> = rest.split(',').map(str::trim).collect();
                let space = OutcomeSpace::new(labels).map_err(|e| syntax(e.to_string()))?;
                base = Some(CaseBase::new(space));
                continue;
            };
            let parts: Vec<&str> = t.splitn(3, '|').map(str::trim).collect();
            if parts.len() != 3 {
                return Err(syntax("expected `name | kind | structure`".into()));
            }
            let case = match parts[1] {
                "order" => Case::Order(parse_weak_order(&cb.space, parts[2]).map_err(|e| syntax(e.to_string()))?),
                "utility" => {
                    let values = parts[2]
                        .split(',')
                        .map(|v| {
                            v.trim()
                                .parse::<f64>()
                                .map_err(|_| syntax(format!("bad utility value {:?}", v.trim())))
                        })
                        .collect::<Result<Vec<_>>>()?;
                    Case::Utility(UtilityVector::new(cb.space.clone(), values).map_err(|e| syntax(e.to_string()))?)
                }
                other => return Err(syntax(format!("unknown case kind {other:?}"))),
            };
            cb.insert(parts[0], case).map_err(|e| syntax(e.to_string()))?;
        }
        base.ok_or(Error::Syntax {
            line: 1,
            message: "missing `outcomes:` line".into(),
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("outcomes: {}\n", self.space.labels().join(", "));
        for (name, case) in self.names.iter().zip(&self.cases) {
            let body = match case {
                Case::Order(o) => o.to_string(),
                Case::Utility(u) => u.values().iter().map(f64::to_string).collect::<Vec<_>>().join(", "),
            };
            let _ = writeln!(out, "{name} | {} | {body}", case.tag());
        }
        out
    }
}

pub fn load_casebase(mut source: impl Read) -> Result<CaseBase> {
    let mut text = String::new();
    source.read_to_string(&mut text).map_err(|e| Error::Syntax {
        line: 0,
        message: e.to_string(),
    })?;
    CaseBase::parse(&text)
}

pub fn save_casebase(cb: &CaseBase, mut sink: impl Write) -> std::io::Result<()> {
    sink.write_all(cb.to_text().as_bytes())
}

/// What has been learned about the user so far.
#[derive(Debug, Clone)]
pub struct ElicitationState {
    builder: OrderBuilder,
    elicited: PartialPreferenceOrder,
    asked: BTreeSet<(usize, usize)>,
    query_count: usize,
    closest: Vec<usize>,
}

impl ElicitationState {
    /// A fresh state in which every case is a candidate.
    pub fn new(cb: &CaseBase) -> Self {
        let builder = OrderBuilder::new(cb.space().clone());
        Self {
            elicited: builder.finish(),
            builder,
            asked: BTreeSet::new(),
            query_count: 0,
            closest: (0..cb.len()).collect(),
        }
    }

    /// Starts from an already elicited order.
    pub fn with_order(cb: &CaseBase, order: &PartialPreferenceOrder) -> Result<Self> {
        same_space(cb.space(), order.space())?;
        let mut s = Self::new(cb);
        s.builder = OrderBuilder::from_order(order);
        s.elicited = order.clone();
        Ok(s)
    }

    pub fn elicited(&self) -> &PartialPreferenceOrder {
        &self.elicited
    }

    pub fn asked(&self) -> &BTreeSet<(usize, usize)> {
        &self.asked
    }

    pub fn query_count(&self) -> usize {
        self.query_count
    }

    /// Indices of the current closest cases, ascending.
    pub fn closest(&self) -> &[usize] {
        &self.closest
    }

    pub fn set_closest(&mut self, closest: Vec<usize>) {
        self.closest = closest;
    }

    pub fn is_entailed(&self, a: usize, b: usize) -> bool {
        self.builder.relation(a, b) != Relation::Incomparable
    }

    /// Records the answer to query `(a, b)` and closes the order.
    pub fn record(&mut self, a: usize, b: usize, answer: Relation) -> Result<()> {
        let key = (a.min(b), a.max(b));
        if a == b || self.asked.contains(&key) {
            return Err(Error::InvalidParameter(format!("pair ({a}, {b}) already asked")));
        }
        self.builder.add(a, b, answer).map_err(|e| Error::InconsistentAnswer(e.to_string()))?;
        self.asked.insert(key);
        self.query_count += 1;
        self.elicited = self.builder.finish();
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedCase {
    pub index: usize,
    pub name: String,
    pub estimate: DistanceEstimate,
}

/// Every case ranked by its average distance to the elicited order,
/// closest first. Case `i` is estimated under seed `derive_seed(seed, i)`.
pub fn nearest(
    state: &ElicitationState,
    cb: &CaseBase,
    kind: MetricKind,
    config: &EstimationConfig,
) -> Result<Vec<RankedCase>> {
    if cb.is_empty() {
        return Err(Error::EmptyCaseBase);
    }
    same_space(cb.space(), state.elicited.space())?;
    let mut ranked = cb
        .cases
        .par_iter()
        .enumerate()
        .map(|(i, case)| {
            let cfg = EstimationConfig {
                seed: derive_seed(config.seed, i as u64),
                ..config.clone()
            };
            let stored = case.order().to_partial();
            Ok(RankedCase {
                index: i,
                name: cb.names[i].clone(),
                estimate: avg_distance(&state.elicited, &stored, kind, &cfg)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    ranked.sort_by(|x, y| x.estimate.value.total_cmp(&y.estimate.value).then(x.index.cmp(&y.index)));
    Ok(ranked)
}

fn overlaps(a: &DistanceEstimate, b: &DistanceEstimate) -> bool {
    a.interval_low <= b.interval_high + DISTANCE_TOLERANCE && b.interval_low <= a.interval_high + DISTANCE_TOLERANCE
}

/// Candidates whose interval overlaps that of the best-ranked candidate,
/// ascending by case index. `ranked` comes from [`nearest`].
pub fn closest_set(ranked: &[RankedCase], candidates: &[usize]) -> Vec<usize> {
    let Some(best) = ranked.iter().find(|r| candidates.contains(&r.index)) else {
        return Vec::new();
    };
    let mut out: Vec<usize> = ranked
        .iter()
        .filter(|r| candidates.contains(&r.index) && overlaps(&r.estimate, &best.estimate))
        .map(|r| r.index)
        .collect();
    out.sort_unstable();
    out
}

/// The truthful user's answer to "how do `a` and `b` compare?".
pub fn simulated_answer(target: &WeakOrder, a: usize, b: usize) -> Relation {
    target.relation(a, b)
}

/// The unasked, unentailed pair whose answers split the closest set most
/// evenly: the score is the closest-set size minus the largest group of
/// cases giving the same answer. Ties go to the first pair in
/// lexicographic order.
pub fn select_query(state: &ElicitationState, cb: &CaseBase) -> Option<(usize, usize)> {
    let n = cb.space().len();
    let orders: Vec<WeakOrder> = state.closest.iter().map(|&i| cb.cases[i].order()).collect();
    let mut best: Option<((usize, usize), usize)> = None;
    for a in 0..n {
        for b in (a + 1)..n {
            if state.asked.contains(&(a, b)) || state.is_entailed(a, b) {
                continue;
            }
            let mut groups = [0usize; 3];
            for o in &orders {
                groups[match o.relation(a, b) {
                    Relation::Precedes => 0,
                    Relation::Succeeds => 1,
                    _ => 2,
                }] += 1;
            }
            let score = orders.len() - groups.iter().max().unwrap();
            if best.is_none_or(|(_, s)| score > s) {
                best = Some(((a, b), score));
            }
        }
    }
    best.map(|(pair, _)| pair)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionStep {
    pub query: (usize, usize),
    pub answer: Relation,
    /// Indexed by case.
    pub estimates: Vec<DistanceEstimate>,
    /// Closest cases after this step, ascending by index.
    pub closest: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionLog {
    pub space: Arc<OutcomeSpace>,
    pub case_names: Vec<String>,
    pub steps: Vec<SessionStep>,
    pub final_closest: Vec<String>,
}

impl SessionLog {
    /// Closest-set size before any query, then after each step.
    pub fn closest_sizes(&self) -> Vec<usize> {
        std::iter::once(self.case_names.len())
            .chain(self.steps.iter().map(|s| s.closest.len()))
            .collect()
    }

    pub fn csv_header(&self) -> String {
        let mut cols = vec!["step".to_string(), "query_a".into(), "query_b".into(), "answer".into()];
        for name in &self.case_names {
            cols.push(format!("{name}_value"));
            cols.push(format!("{name}_low"));
            cols.push(format!("{name}_high"));
        }
        for name in &self.case_names {
            cols.push(format!("{name}_closest"));
        }
        cols.join(",")
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.csv_header();
        out.push('\n');
        for (i, s) in self.steps.iter().enumerate() {
            let mut cols = vec![
                (i + 1).to_string(),
                self.space.label(s.query.0).to_string(),
                self.space.label(s.query.1).to_string(),
                s.answer.symbol().to_string(),
            ];
            for e in &s.estimates {
                cols.push(e.value.to_string());
                cols.push(e.interval_low.to_string());
                cols.push(e.interval_high.to_string());
            }
            for c in 0..self.case_names.len() {
                cols.push(u8::from(s.closest.contains(&c)).to_string());
            }
            out.push_str(&cols.join(","));
            out.push('\n');
        }
        out
    }
}

fn single_class(cb: &CaseBase, closest: &[usize]) -> bool {
    let mut orders = closest.iter().map(|&i| cb.cases[i].order());
    match orders.next() {
        Some(first) => orders.all(|o| o == first),
        None => true,
    }
}

/// Simulated elicitation against `target`.
///
/// Each step asks [`select_query`], records the truthful answer, ranks the
/// case base with [`nearest`] and keeps the closest cases among the previous
/// closest set, so the set never grows. The session ends when the budget is
/// spent, no query is left, or the closest set is a single class of cases
/// expressing the same order. Step `s` estimates under
/// `derive_seed(config.seed, s)`.
pub fn run_elicitation(
    target: &WeakOrder,
    cb: &CaseBase,
    budget: usize,
    kind: MetricKind,
    config: &EstimationConfig,
) -> Result<SessionLog> {
    if cb.is_empty() {
        return Err(Error::EmptyCaseBase);
    }
    same_space(cb.space(), target.space())?;
    config.validate()?;
    let mut state = ElicitationState::new(cb);
    let mut steps = Vec::new();
    while state.query_count < budget && !single_class(cb, &state.closest) {
        let Some((a, b)) = select_query(&state, cb) else {
            break;
        };
        let answer = simulated_answer(target, a, b);
        state.record(a, b, answer)?;
        let cfg = EstimationConfig {
            seed: derive_seed(config.seed, state.query_count as u64),
            ..config.clone()
        };
        let ranked = nearest(&state, cb, kind, &cfg)?;
        let closest = closest_set(&ranked, &state.closest);
        let mut estimates = vec![None; cb.len()];
        for r in ranked {
            estimates[r.index] = Some(r.estimate);
        }
        steps.push(SessionStep {
            query: (a, b),
            answer,
            estimates: estimates.into_iter().map(Option::unwrap).collect(),
            closest: closest.clone(),
        });
        state.closest = closest;
    }
    Ok(SessionLog {
        space: cb.space().clone(),
        case_names: cb.names.clone(),
        steps,
        final_closest: state.closest.iter().map(|&i| cb.names[i].clone()).collect(),
    })
}

/// Completes `elicited` with the retrieved order's relations. Elicited
/// relations are kept; every other pair, in ascending lexicographic order,
/// takes the retrieved relation when that stays consistent, and is left
/// incomparable otherwise.
pub fn merge_default(retrieved: &WeakOrder, elicited: &PartialPreferenceOrder) -> Result<PartialPreferenceOrder> {
    same_space(retrieved.space(), elicited.space())?;
    let n = elicited.space().len();
    let mut builder = OrderBuilder::from_order(elicited);
    for a in 0..n {
        for b in (a + 1)..n {
            if elicited.relation(a, b) != Relation::Incomparable {
                continue;
            }
            // a rejected insert leaves the builder unchanged
            let _ = builder.add(a, b, retrieved.relation(a, b));
        }
    }
    Ok(builder.finish())
}
