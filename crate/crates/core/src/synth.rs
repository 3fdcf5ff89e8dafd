//! Seeded synthetic corpora: one emerging theme spread over a minority of
//! sources, nine background topics, a citation graph that mostly stays inside
//! a topic, and ground-truth relatedness labels.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Corpus, DocType, DocumentRecord, SourceRecord, SourceType};
use crate::participation::{Relatedness, RelatednessLabels};

pub const THEME_CORE: &str = "e-learning";

/// Spellings of the core concept; every thematic document carries one.
const CORE_FORMS: [(&str, f64); 3] = [("e-learning", 0.7), ("elearning", 0.2), ("electronic learning", 0.1)];

const THEME_TERMS: [&str; 24] = [
    "online learning",
    "blended learning",
    "b-learning",
    "mobile learning",
    "m-learning",
    "moodle",
    "learning management system",
    "lms",
    "mooc",
    "massive open online courses",
    "virtual learning environment",
    "vle",
    "personal learning environment",
    "distance education",
    "ict",
    "information and communications technologies",
    "collaborative learning",
    "higher education",
    "student engagement",
    "e-assessment",
    "educational technology",
    "web 2.0",
    "learning analytics",
    "instructional design",
];

const THEME_CATEGORIES: [(&str, f64); 4] = [
    ("Education", 0.8),
    ("Computer Science", 0.5),
    ("Social Sciences", 0.3),
    ("Documentation", 0.2),
];

struct Topic {
    terms: [&'static str; 8],
    categories: [&'static str; 3],
}

const TOPICS: [Topic; 9] = [
    Topic {
        terms: ["graphene", "nanotubes", "thin films", "spectroscopy", "band gap", "semiconductor", "doping", "crystal growth"],
        categories: ["Materials Science", "Physics", "Chemistry"],
    },
    Topic {
        terms: ["protein folding", "gene expression", "cell signaling", "genome", "rna", "enzyme kinetics", "mutation", "proteomics"],
        categories: ["Biochemistry", "Genetics", "Medicine"],
    },
    Topic {
        terms: ["neural networks", "deep learning", "image classification", "reinforcement learning", "optimization", "feature extraction", "support vector machines", "clustering"],
        categories: ["Computer Science", "Mathematics", "Engineering"],
    },
    Topic {
        terms: ["monetary policy", "inflation", "labor markets", "game theory", "auction", "trade", "fiscal policy", "econometrics"],
        categories: ["Economics", "Social Sciences", "Business"],
    },
    Topic {
        terms: ["climate change", "carbon cycle", "precipitation", "remote sensing", "soil moisture", "biodiversity", "land use", "ecosystems"],
        categories: ["Earth Sciences", "Environmental Science", "Agriculture"],
    },
    Topic {
        terms: ["hypertension", "diabetes", "clinical trial", "cohort study", "cardiology", "obesity", "risk factors", "mortality"],
        categories: ["Medicine", "Nursing", "Health Professions"],
    },
    Topic {
        terms: ["turbulence", "heat transfer", "combustion", "finite element", "fluid dynamics", "vibration", "fatigue", "composites"],
        categories: ["Engineering", "Physics", "Energy"],
    },
    Topic {
        terms: ["linguistics", "discourse", "literacy", "translation", "bilingualism", "phonology", "pragmatics", "corpus analysis"],
        categories: ["Arts and Humanities", "Social Sciences", "Psychology"],
    },
    Topic {
        terms: ["software engineering", "databases", "cloud computing", "distributed systems", "security", "web services", "networks", "compilers"],
        categories: ["Computer Science", "Engineering", "Decision Sciences"],
    },
];

const FILLER: [&str; 12] = [
    "analysis", "framework", "evidence", "approach", "study", "model", "results", "review", "impact", "case", "design", "evaluation",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthParams {
    pub documents: usize,
    pub sources: usize,
    /// Share of sources devoted to the theme.
    pub theme_share: f64,
    /// Share of background sources that still publish a good amount on the
    /// theme; they are labeled unrelated.
    pub borderline_share: f64,
    pub seed: u64,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            documents: 5000,
            sources: 500,
            theme_share: 0.12,
            borderline_share: 0.06,
            seed: 7,
        }
    }
}

pub struct SynthCorpus {
    pub corpus: Corpus,
    pub categories: BTreeMap<String, Vec<String>>,
    pub labels: RelatednessLabels,
}

#[derive(Clone, Copy, PartialEq)]
enum Kind {
    Theme,
    Borderline,
    Background,
}

struct SourcePlan {
    id: String,
    kind: Kind,
    topic: usize,
    p_theme: f64,
    source_type: SourceType,
}

fn pick_weighted<'a>(rng: &mut ChaCha8Rng, items: &[(&'a str, f64)]) -> &'a str {
    let total: f64 = items.iter().map(|x| x.1).sum();
    let mut r = rng.gen_range(0.0..total);
    for &(s, w) in items {
        if r < w {
            return s;
        }
        r -= w;
    }
    items[items.len() - 1].0
}

pub fn generate(params: &SynthParams) -> SynthCorpus {
    assert!(params.sources >= 1 && params.documents >= params.sources, "need at least one document per source");
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let n_theme = ((params.sources as f64 * params.theme_share).round() as usize).max(1);
    let n_border = (params.sources as f64 * params.borderline_share).round() as usize;

    let mut plans = Vec::with_capacity(params.sources);
    for s in 0..params.sources {
        let kind = if s < n_theme {
            Kind::Theme
        } else if s < n_theme + n_border {
            Kind::Borderline
        } else {
            Kind::Background
        };
        let p_theme = match kind {
            Kind::Theme if rng.gen_bool(0.3) => 1.0,
            Kind::Theme => rng.gen_range(0.3..1.0),
            Kind::Borderline => rng.gen_range(0.15..0.5),
            Kind::Background if rng.gen_bool(0.3) => rng.gen_range(0.0..0.1),
            Kind::Background => 0.0,
        };
        plans.push(SourcePlan {
            id: String::new(),
            kind,
            topic: rng.gen_range(0..TOPICS.len()),
            p_theme,
            source_type: if rng.gen_bool(0.2) { SourceType::Proceeding } else { SourceType::Journal },
        });
    }
    // ids carry no hint of the kind
    plans.shuffle(&mut rng);
    for (k, p) in plans.iter_mut().enumerate() {
        p.id = format!("S{k:04}");
    }

    let mut categories = BTreeMap::new();
    let mut labels = BTreeMap::new();
    let mut sources = Vec::with_capacity(plans.len());
    for p in &plans {
        let mut cats: Vec<String> = match p.kind {
            Kind::Theme => THEME_CATEGORIES
                .iter()
                .filter(|(_, pr)| rng.gen_bool(*pr))
                .map(|(c, _)| c.to_string())
                .collect(),
            _ => TOPICS[p.topic]
                .categories
                .iter()
                .filter(|_| rng.gen_bool(0.6))
                .map(|c| c.to_string())
                .collect(),
        };
        if cats.is_empty() {
            cats.push(match p.kind {
                Kind::Theme => "Education".to_string(),
                _ => TOPICS[p.topic].categories[0].to_string(),
            });
        }
        cats.sort();
        categories.insert(p.id.clone(), cats.clone());
        let label = if p.kind == Kind::Theme { Relatedness::Related } else { Relatedness::Unrelated };
        labels.insert(p.id.clone(), label);
        let title = match p.kind {
            Kind::Theme => format!("Journal of {} {}", title_case(THEME_TERMS[rng.gen_range(0..THEME_TERMS.len())]), p.id),
            _ => format!("Annals of {} {}", title_case(TOPICS[p.topic].terms[0]), p.id),
        };
        sources.push(SourceRecord {
            source_id: p.id.clone(),
            title,
            source_type: p.source_type,
            categories: cats,
        });
    }

    // Heavy-tailed source sizes, every source at least one document.
    let size_weight: Vec<f64> = (0..plans.len()).map(|r| 1.0 / ((r + 1) as f64).powf(0.6)).collect();
    let mut order: Vec<usize> = (0..plans.len()).collect();
    order.shuffle(&mut rng);
    let mut weight = vec![0.0; plans.len()];
    for (r, &s) in order.iter().enumerate() {
        weight[s] = size_weight[r];
    }
    let total_w: f64 = weight.iter().sum();
    let mut doc_source: Vec<usize> = (0..plans.len()).collect();
    for _ in plans.len()..params.documents {
        let mut x = rng.gen_range(0.0..total_w);
        let mut pick = plans.len() - 1;
        for (s, &w) in weight.iter().enumerate() {
            if x < w {
                pick = s;
                break;
            }
            x -= w;
        }
        doc_source.push(pick);
    }
    doc_source.shuffle(&mut rng);

    let n = params.documents;
    // topic index TOPICS.len() stands for the theme
    let mut by_topic: Vec<Vec<usize>> = vec![Vec::new(); TOPICS.len() + 1];
    let mut all_refs: Vec<Vec<usize>> = Vec::with_capacity(n);
    let mut docs = Vec::with_capacity(n);
    for (i, &s) in doc_source.iter().enumerate() {
        let plan = &plans[s];
        let thematic = plan.p_theme > 0.0 && rng.gen_bool(plan.p_theme);
        let topic = if thematic { TOPICS.len() } else { plan.topic };
        let mut keywords: Vec<String> = Vec::new();
        if thematic {
            keywords.push(pick_weighted(&mut rng, &CORE_FORMS).to_string());
            let k = rng.gen_range(2..=4);
            for t in THEME_TERMS.choose_multiple(&mut rng, k) {
                keywords.push(t.to_string());
            }
        } else {
            let k = rng.gen_range(2..=5);
            for t in TOPICS[topic].terms.choose_multiple(&mut rng, k) {
                keywords.push(t.to_string());
            }
        }
        let filler = |rng: &mut ChaCha8Rng| FILLER[rng.gen_range(0..FILLER.len())];
        let title = format!("{} of {} in {}", title_case(filler(&mut rng)), keywords[0], keywords[1]);
        let abstract_text = format!(
            "This {} reports {} on {} and {}. The {} suggests links with {}.",
            filler(&mut rng),
            filler(&mut rng),
            keywords[keywords.len() - 1],
            keywords[1],
            filler(&mut rng),
            keywords[keywords.len() / 2],
        );
        let split = rng.gen_range(1..=keywords.len());
        let index_keywords = keywords.split_off(split);

        let mut refs = Vec::new();
        if i > 0 {
            for _ in 0..rng.gen_range(0..=8) {
                let pool = &by_topic[topic];
                let j = if !pool.is_empty() && rng.gen_bool(0.8) {
                    pool[rng.gen_range(0..pool.len())]
                } else {
                    rng.gen_range(0..i)
                };
                if !refs.contains(&j) {
                    refs.push(j);
                }
            }
            refs.sort_unstable();
        }
        let mut references: Vec<String> = refs.iter().map(|&j| format!("D{j:06}")).collect();
        if rng.gen_bool(0.2) {
            references.push(format!("Unindexed report {} ({})", rng.gen_range(0..500), 1990 + rng.gen_range(0..20)));
        }
        all_refs.push(refs);
        by_topic[topic].push(i);

        let doc_type = match (plan.source_type, rng.gen_range(0..100)) {
            (SourceType::Proceeding, 0..=89) => DocType::ConferencePaper,
            (SourceType::Proceeding, _) => DocType::ConferenceReview,
            (_, 0..=84) => DocType::Article,
            (_, 85..=94) => DocType::Review,
            _ => DocType::Other,
        };
        docs.push(DocumentRecord {
            doc_id: format!("D{i:06}"),
            source_id: plan.id.clone(),
            title,
            abstract_text,
            author_keywords: keywords,
            index_keywords,
            doc_type,
            year: 2008 + (i * 8 / n) as i32,
            language: if rng.gen_bool(0.95) { "English".into() } else { "Spanish".into() },
            references,
            citation_count: 0,
        });
    }
    let mut cited = vec![0u64; n];
    for refs in &all_refs {
        for &j in refs {
            cited[j] += 1;
        }
    }
    for (d, c) in docs.iter_mut().zip(cited) {
        d.citation_count = c;
    }

    SynthCorpus {
        corpus: Corpus::from_parts(docs, sources).expect("generated corpus is consistent"),
        categories,
        labels: RelatednessLabels(labels),
    }
}

fn title_case(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}
