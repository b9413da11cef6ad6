//! Content knowledge base.
//!
//! A knowledge base is a tree of topics, concepts and sections plus a
//! question bank and per-method presentation assets. It is loaded once from
//! a JSON document, validated in full, and never mutated afterwards, so a
//! single instance can be shared (behind an `Arc`) by any number of sessions.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// How a concept is presented to the learner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EducationMethod {
    Film,
    DynamicView,
    Game,
    Puzzle,
    /// Plain text. Every concept must carry a text asset.
    Text,
}

impl EducationMethod {
    pub const ALL: [EducationMethod; 5] = [
        EducationMethod::Film,
        EducationMethod::DynamicView,
        EducationMethod::Game,
        EducationMethod::Puzzle,
        EducationMethod::Text,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EducationMethod::Film => "film",
            EducationMethod::DynamicView => "dynamic_view",
            EducationMethod::Game => "game",
            EducationMethod::Puzzle => "puzzle",
            EducationMethod::Text => "text",
        }
    }
}

impl fmt::Display for EducationMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Difficulty {
    Easy,
    Medium,
    Hard,
}

impl Difficulty {
    pub const ALL: [Difficulty; 3] = [Difficulty::Easy, Difficulty::Medium, Difficulty::Hard];

    pub fn as_str(self) -> &'static str {
        match self {
            Difficulty::Easy => "easy",
            Difficulty::Medium => "medium",
            Difficulty::Hard => "hard",
        }
    }
}

impl fmt::Display for Difficulty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A single-correct multiple choice question.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Question {
    pub id: String,
    pub concept_id: String,
    pub section_id: String,
    pub difficulty: Difficulty,
    /// Score points awarded when answered correctly.
    pub weight: u32,
    pub body: String,
    pub choices: Vec<String>,
    pub correct_index: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Section {
    pub id: String,
    pub title: String,
    /// Per-method score weight of this section.
    pub importance: BTreeMap<EducationMethod, u32>,
}

/// The smallest teachable unit; the grain of the pre-test / learn / post-test loop.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Concept {
    pub id: String,
    pub title: String,
    pub sections: Vec<Section>,
    #[serde(default)]
    pub prerequisites: Vec<String>,
    /// Opaque asset references (URLs, file names) keyed by method.
    pub assets: BTreeMap<EducationMethod, String>,
}

impl Concept {
    pub fn section(&self, id: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.id == id)
    }

    pub fn has_asset(&self, method: EducationMethod) -> bool {
        self.assets.contains_key(&method)
    }

    /// Every method named in any section's importance table.
    fn importance_methods(&self) -> BTreeSet<EducationMethod> {
        self.sections
            .iter()
            .flat_map(|s| s.importance.keys().copied())
            .collect()
    }

    /// The section carrying the highest importance.
    ///
    /// Load-time validation guarantees the maximum is unique and the same
    /// for every method, so the answer does not depend on which method is
    /// inspected.
    pub fn most_important_section(&self) -> &Section {
        match self.importance_methods().into_iter().next() {
            Some(method) => {
                let mut best = &self.sections[0];
                for section in &self.sections[1..] {
                    if importance_of(section, method) > importance_of(best, method) {
                        best = section;
                    }
                }
                best
            }
            None => &self.sections[0],
        }
    }
}

fn importance_of(section: &Section, method: EducationMethod) -> u32 {
    section.importance.get(&method).copied().unwrap_or(0)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Topic {
    pub id: String,
    pub title: String,
    pub concept_ids: Vec<String>,
}

/// On-disk layout of a knowledge base file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KbDocument {
    pub topics: Vec<Topic>,
    pub concepts: Vec<Concept>,
    pub questions: Vec<Question>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    InvalidId,
    DuplicateId,
    DanglingReference,
    CyclicPrerequisites,
    MissingDifficultyCoverage,
    InconsistentImportance,
    ImportanceTie,
    MissingImportance,
    MissingTextAsset,
    EmptyCollection,
    OrphanConcept,
    InvalidQuestion,
}

/// One validation failure, located by a JSON path into the source document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub path: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Error)]
pub enum KbError {
    #[error("failed to read knowledge base: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed knowledge base document: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("knowledge base is invalid ({} violation(s)); first: {}", .0.len(), .0[0])]
    Validation(Vec<Violation>),
}

impl KbError {
    pub fn violations(&self) -> &[Violation] {
        match self {
            KbError::Validation(v) => v,
            _ => &[],
        }
    }

    pub fn has_violation(&self, kind: ViolationKind) -> bool {
        self.violations().iter().any(|v| v.kind == kind)
    }
}

/// Validated, immutable content knowledge base.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnowledgeBase {
    topics: Vec<Topic>,
    concepts: BTreeMap<String, Concept>,
    questions: BTreeMap<String, Question>,
    curriculum: Vec<String>,
    questions_by_concept: BTreeMap<String, Vec<String>>,
    topic_of: BTreeMap<String, usize>,
}

/// Parses and validates a knowledge base from a byte stream.
pub fn load_knowledge_base<R: Read>(source: R) -> Result<KnowledgeBase, KbError> {
    KnowledgeBase::from_reader(source)
}

impl KnowledgeBase {
    pub fn from_reader<R: Read>(mut source: R) -> Result<Self, KbError> {
        let mut buf = Vec::new();
        source.read_to_end(&mut buf)?;
        let doc: KbDocument = serde_json::from_slice(&buf)?;
        Self::from_document(doc)
    }

    pub fn from_json_str(json: &str) -> Result<Self, KbError> {
        let doc: KbDocument = serde_json::from_str(json)?;
        Self::from_document(doc)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, KbError> {
        let file = std::fs::File::open(path)?;
        Self::from_reader(std::io::BufReader::new(file))
    }

    pub fn from_document(doc: KbDocument) -> Result<Self, KbError> {
        let violations = validate(&doc);
        if !violations.is_empty() {
            return Err(KbError::Validation(violations));
        }

        let mut topic_of = BTreeMap::new();
        for (ti, topic) in doc.topics.iter().enumerate() {
            for cid in &topic.concept_ids {
                topic_of.insert(cid.clone(), ti);
            }
        }
        let concepts: BTreeMap<String, Concept> = doc
            .concepts
            .into_iter()
            .map(|c| (c.id.clone(), c))
            .collect();
        let mut questions_by_concept: BTreeMap<String, Vec<String>> =
            concepts.keys().map(|k| (k.clone(), Vec::new())).collect();
        for q in &doc.questions {
            questions_by_concept
                .get_mut(&q.concept_id)
                .expect("validated reference")
                .push(q.id.clone());
        }
        for ids in questions_by_concept.values_mut() {
            ids.sort();
        }
        let questions = doc
            .questions
            .into_iter()
            .map(|q| (q.id.clone(), q))
            .collect();
        let curriculum =
            curriculum_order(&doc.topics, &concepts).expect("acyclic prerequisites were validated");

        Ok(KnowledgeBase {
            topics: doc.topics,
            concepts,
            questions,
            curriculum,
            questions_by_concept,
            topic_of,
        })
    }

    /// Document form; concepts and questions are emitted in id order.
    pub fn to_document(&self) -> KbDocument {
        KbDocument {
            topics: self.topics.clone(),
            concepts: self.concepts.values().cloned().collect(),
            questions: self.questions.values().cloned().collect(),
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("document is serializable")
    }

    pub fn topics(&self) -> &[Topic] {
        &self.topics
    }

    pub fn topic(&self, id: &str) -> Option<&Topic> {
        self.topics.iter().find(|t| t.id == id)
    }

    pub fn concepts(&self) -> impl Iterator<Item = &Concept> {
        self.concepts.values()
    }

    pub fn concept(&self, id: &str) -> Option<&Concept> {
        self.concepts.get(id)
    }

    pub fn concept_count(&self) -> usize {
        self.concepts.len()
    }

    pub fn question(&self, id: &str) -> Option<&Question> {
        self.questions.get(id)
    }

    pub fn questions(&self) -> impl Iterator<Item = &Question> {
        self.questions.values()
    }

    /// Questions of one concept, in id order.
    pub fn questions_for<'a>(
        &'a self,
        concept_id: &str,
    ) -> impl Iterator<Item = &'a Question> + 'a {
        self.questions_by_concept
            .get(concept_id)
            .map(|ids| ids.as_slice())
            .unwrap_or(&[])
            .iter()
            .map(move |id| &self.questions[id])
    }

    pub fn topic_of(&self, concept_id: &str) -> Option<&Topic> {
        self.topic_of.get(concept_id).map(|&i| &self.topics[i])
    }

    /// Curriculum order: topic order, then position within the topic,
    /// refined so every concept follows all of its prerequisites.
    pub fn curriculum_order(&self) -> &[String] {
        &self.curriculum
    }
}

/// Returns the section id with maximal importance in `concept`.
pub fn most_important_section(concept: &Concept) -> &str {
    &concept.most_important_section().id
}

fn is_valid_id(id: &str) -> bool {
    !id.is_empty()
        && id
            .bytes()
            .all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'_' || b == b'-')
}

struct Collector(Vec<Violation>);

impl Collector {
    fn push(&mut self, kind: ViolationKind, path: impl Into<String>, message: impl Into<String>) {
        self.0.push(Violation {
            kind,
            path: path.into(),
            message: message.into(),
        });
    }

    fn check_id(&mut self, id: &str, path: String) {
        if !is_valid_id(id) {
            self.push(
                ViolationKind::InvalidId,
                path,
                format!("id {id:?} must be non-empty and match [a-z0-9_-]+"),
            );
        }
    }
}

fn validate(doc: &KbDocument) -> Vec<Violation> {
    let mut out = Collector(Vec::new());

    if doc.topics.is_empty() {
        out.push(
            ViolationKind::EmptyCollection,
            "$.topics",
            "at least one topic is required",
        );
    }

    // Ids and duplicates.
    let mut topic_ids = HashSet::new();
    for (i, t) in doc.topics.iter().enumerate() {
        out.check_id(&t.id, format!("$.topics[{i}].id"));
        if !topic_ids.insert(t.id.as_str()) {
            out.push(
                ViolationKind::DuplicateId,
                format!("$.topics[{i}].id"),
                format!("duplicate topic id {:?}", t.id),
            );
        }
    }
    let mut concept_index: HashMap<&str, usize> = HashMap::new();
    let mut section_owner: HashMap<&str, &str> = HashMap::new();
    for (ci, c) in doc.concepts.iter().enumerate() {
        out.check_id(&c.id, format!("$.concepts[{ci}].id"));
        if concept_index.insert(c.id.as_str(), ci).is_some() {
            out.push(
                ViolationKind::DuplicateId,
                format!("$.concepts[{ci}].id"),
                format!("duplicate concept id {:?}", c.id),
            );
        }
        for (si, s) in c.sections.iter().enumerate() {
            let path = format!("$.concepts[{ci}].sections[{si}].id");
            out.check_id(&s.id, path.clone());
            if section_owner.insert(s.id.as_str(), c.id.as_str()).is_some() {
                out.push(
                    ViolationKind::DuplicateId,
                    path,
                    format!("duplicate section id {:?}", s.id),
                );
            }
        }
    }
    let mut question_ids = HashSet::new();
    for (qi, q) in doc.questions.iter().enumerate() {
        out.check_id(&q.id, format!("$.questions[{qi}].id"));
        if !question_ids.insert(q.id.as_str()) {
            out.push(
                ViolationKind::DuplicateId,
                format!("$.questions[{qi}].id"),
                format!("duplicate question id {:?}", q.id),
            );
        }
    }

    // Topics.
    let mut owning_topic: HashMap<&str, &str> = HashMap::new();
    for (ti, t) in doc.topics.iter().enumerate() {
        if t.concept_ids.is_empty() {
            out.push(
                ViolationKind::EmptyCollection,
                format!("$.topics[{ti}].concept_ids"),
                "a topic needs at least one concept",
            );
        }
        for (k, cid) in t.concept_ids.iter().enumerate() {
            let path = format!("$.topics[{ti}].concept_ids[{k}]");
            if !concept_index.contains_key(cid.as_str()) {
                out.push(
                    ViolationKind::DanglingReference,
                    path,
                    format!("unknown concept {cid:?}"),
                );
            } else if let Some(prev) = owning_topic.insert(cid.as_str(), t.id.as_str()) {
                out.push(
                    ViolationKind::DuplicateId,
                    path,
                    format!("concept {cid:?} already belongs to topic {prev:?}"),
                );
            }
        }
    }

    // Concepts.
    let mut dangling_prereq = false;
    for (ci, c) in doc.concepts.iter().enumerate() {
        let base = format!("$.concepts[{ci}]");
        if !owning_topic.contains_key(c.id.as_str()) {
            out.push(
                ViolationKind::OrphanConcept,
                format!("{base}.id"),
                format!("concept {:?} is not listed by any topic", c.id),
            );
        }
        if c.sections.is_empty() {
            out.push(
                ViolationKind::EmptyCollection,
                format!("{base}.sections"),
                "a concept needs at least one section",
            );
        }
        if !c.assets.contains_key(&EducationMethod::Text) {
            out.push(
                ViolationKind::MissingTextAsset,
                format!("{base}.assets"),
                "every concept must provide a `text` asset",
            );
        }
        for (pi, p) in c.prerequisites.iter().enumerate() {
            let path = format!("{base}.prerequisites[{pi}]");
            if p == &c.id {
                out.push(
                    ViolationKind::CyclicPrerequisites,
                    path,
                    format!("concept {:?} lists itself as a prerequisite", c.id),
                );
                dangling_prereq = true;
            } else if !concept_index.contains_key(p.as_str()) {
                out.push(
                    ViolationKind::DanglingReference,
                    path,
                    format!("unknown prerequisite {p:?}"),
                );
                dangling_prereq = true;
            }
        }
        for (si, s) in c.sections.iter().enumerate() {
            for method in c.assets.keys() {
                if !s.importance.contains_key(method) {
                    out.push(
                        ViolationKind::MissingImportance,
                        format!("{base}.sections[{si}].importance"),
                        format!("no importance for asset method `{method}`"),
                    );
                }
            }
            for (method, &w) in &s.importance {
                if w == 0 {
                    out.push(
                        ViolationKind::MissingImportance,
                        format!("{base}.sections[{si}].importance.{method}"),
                        "importance must be a positive integer",
                    );
                }
            }
        }
        check_importance_argmax(c, &base, &mut out);
    }

    // Questions.
    let mut coverage: HashSet<(&str, Difficulty)> = HashSet::new();
    for (qi, q) in doc.questions.iter().enumerate() {
        let base = format!("$.questions[{qi}]");
        match concept_index.get(q.concept_id.as_str()) {
            None => out.push(
                ViolationKind::DanglingReference,
                format!("{base}.concept_id"),
                format!("unknown concept {:?}", q.concept_id),
            ),
            Some(_) => match section_owner.get(q.section_id.as_str()) {
                Some(owner) if *owner == q.concept_id => {
                    coverage.insert((q.section_id.as_str(), q.difficulty));
                }
                Some(owner) => out.push(
                    ViolationKind::DanglingReference,
                    format!("{base}.section_id"),
                    format!(
                        "section {:?} belongs to concept {owner:?}, not {:?}",
                        q.section_id, q.concept_id
                    ),
                ),
                None => out.push(
                    ViolationKind::DanglingReference,
                    format!("{base}.section_id"),
                    format!("unknown section {:?}", q.section_id),
                ),
            },
        }
        if q.weight == 0 {
            out.push(
                ViolationKind::InvalidQuestion,
                format!("{base}.weight"),
                "weight must be at least 1",
            );
        }
        if q.choices.len() < 2 {
            out.push(
                ViolationKind::InvalidQuestion,
                format!("{base}.choices"),
                "at least two choices are required",
            );
        }
        if q.correct_index >= q.choices.len() {
            out.push(
                ViolationKind::InvalidQuestion,
                format!("{base}.correct_index"),
                format!(
                    "correct_index {} is out of range for {} choices",
                    q.correct_index,
                    q.choices.len()
                ),
            );
        }
    }
    for (ci, c) in doc.concepts.iter().enumerate() {
        for (si, s) in c.sections.iter().enumerate() {
            for d in Difficulty::ALL {
                if !coverage.contains(&(s.id.as_str(), d)) {
                    out.push(
                        ViolationKind::MissingDifficultyCoverage,
                        format!("$.concepts[{ci}].sections[{si}]"),
                        format!("section {:?} has no `{d}` question", s.id),
                    );
                }
            }
        }
    }

    // Prerequisite cycles; only meaningful once every reference resolves.
    if !dangling_prereq {
        let by_id: BTreeMap<String, Concept> = doc
            .concepts
            .iter()
            .map(|c| (c.id.clone(), c.clone()))
            .collect();
        if let Err(cycle) = curriculum_order(&doc.topics, &by_id) {
            out.push(
                ViolationKind::CyclicPrerequisites,
                "$.concepts",
                format!("prerequisite cycle among {}", cycle.join(", ")),
            );
        }
    }

    out.0
}

fn check_importance_argmax(c: &Concept, base: &str, out: &mut Collector) {
    if c.sections.len() < 2 {
        return;
    }
    let mut winners: BTreeMap<EducationMethod, &str> = BTreeMap::new();
    for method in c.importance_methods() {
        let max = c
            .sections
            .iter()
            .map(|s| importance_of(s, method))
            .max()
            .unwrap_or(0);
        let top: Vec<&str> = c
            .sections
            .iter()
            .filter(|s| importance_of(s, method) == max)
            .map(|s| s.id.as_str())
            .collect();
        if top.len() > 1 {
            out.push(
                ViolationKind::ImportanceTie,
                format!("{base}.sections"),
                format!(
                    "sections {} tie for the highest `{method}` importance",
                    top.join(", ")
                ),
            );
        } else {
            winners.insert(method, top[0]);
        }
    }
    let distinct: BTreeSet<&str> = winners.values().copied().collect();
    if distinct.len() > 1 {
        let detail: Vec<String> = winners.iter().map(|(m, s)| format!("{m}→{s}")).collect();
        out.push(
            ViolationKind::InconsistentImportance,
            format!("{base}.sections"),
            format!(
                "the most important section differs by method ({})",
                detail.join(", ")
            ),
        );
    }
}

/// Kahn's algorithm; among ready concepts the earliest curriculum position
/// wins. Concepts not listed in any topic sort after all listed ones, by id.
/// On a cycle, returns the ids that could not be ordered.
fn curriculum_order(
    topics: &[Topic],
    concepts: &BTreeMap<String, Concept>,
) -> Result<Vec<String>, Vec<String>> {
    let mut position: HashMap<&str, (usize, usize)> = HashMap::new();
    for (ti, t) in topics.iter().enumerate() {
        for (k, cid) in t.concept_ids.iter().enumerate() {
            position.entry(cid.as_str()).or_insert((ti, k));
        }
    }
    let key = |id: &str| -> ((usize, usize), String) {
        (
            position.get(id).copied().unwrap_or((usize::MAX, 0)),
            id.to_string(),
        )
    };

    let mut indegree: HashMap<&str, usize> = HashMap::new();
    let mut dependents: HashMap<&str, Vec<&str>> = HashMap::new();
    for c in concepts.values() {
        let prereqs: BTreeSet<&str> = c
            .prerequisites
            .iter()
            .map(String::as_str)
            .filter(|p| concepts.contains_key(*p))
            .collect();
        indegree.insert(c.id.as_str(), prereqs.len());
        for p in prereqs {
            dependents.entry(p).or_default().push(c.id.as_str());
        }
    }

    let mut ready: BTreeSet<((usize, usize), String)> = indegree
        .iter()
        .filter(|(_, &d)| d == 0)
        .map(|(id, _)| key(id))
        .collect();
    let mut order = Vec::with_capacity(concepts.len());
    while let Some(next) = ready.pop_first() {
        let id = next.1;
        if let Some(deps) = dependents.get(id.as_str()) {
            for dep in deps {
                let d = indegree.get_mut(dep).expect("known concept");
                *d -= 1;
                if *d == 0 {
                    ready.insert(key(dep));
                }
            }
        }
        order.push(id);
    }

    if order.len() == concepts.len() {
        Ok(order)
    } else {
        let placed: HashSet<&str> = order.iter().map(String::as_str).collect();
        Err(concepts
            .keys()
            .filter(|id| !placed.contains(id.as_str()))
            .cloned()
            .collect())
    }
}
