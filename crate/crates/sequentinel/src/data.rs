//! Vocabulary handling, corpus files, filtering, splitting, and a
//! synthetic corpus generator.
//!
//! Corpus files are UTF-8, one JSON record per line:
//!
//! ```text
//! {"id":"f-000017","label":1,"events":["createfile","virtualalloc",...]}
//! ```
//!
//! Vocabulary files list one event name per line; the line number is the
//! token id, and the `<UNK>` and `<PAD>` entries come last. Event names
//! absent from the vocabulary encode to the UNK id.
//!
//! The generator plants an ordered (not necessarily consecutive) motif of
//! events into malicious sequences, on top of a shared background
//! distribution. Benign sequences draw from the same background but are
//! constrained never to contain the motif as an ordered subsequence, while
//! still containing its events individually, so no single event gives the
//! label away.

use crate::error::{Error, Result};
use crate::rng::{self, Domain};
use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, HashSet};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

pub const UNK_NAME: &str = "<UNK>";
pub const PAD_NAME: &str = "<PAD>";

/// Minimum events per sequence; shorter files are discarded.
pub const MIN_SEQUENCE_EVENTS: usize = 50;

/// Number of distinct high-level events in the default vocabulary.
pub const DEFAULT_EVENT_COUNT: usize = 156;

// ── vocabulary ──────────────────────────────────────────────────────────

/// Bijection between event names and token ids, with reserved UNK and PAD
/// entries at the end.
#[derive(Clone, Debug, PartialEq)]
pub struct Vocabulary {
    names: Vec<String>,
    index: HashMap<String, u32>,
    unk: u32,
    pad: u32,
}

impl Vocabulary {
    /// Builds a vocabulary from event names; UNK and PAD are appended.
    pub fn new(event_names: Vec<String>) -> Result<Self> {
        if event_names.is_empty() {
            return Err(Error::Vocab("vocabulary needs at least one event".into()));
        }
        let mut names = event_names;
        for n in &names {
            if n == UNK_NAME || n == PAD_NAME {
                return Err(Error::Vocab(format!("'{n}' is a reserved entry")));
            }
            if n.is_empty() {
                return Err(Error::Vocab("empty event name".into()));
            }
        }
        names.push(UNK_NAME.to_string());
        names.push(PAD_NAME.to_string());
        Self::from_full_names(names)
    }

    /// Rebuilds a vocabulary from a full name list whose last two entries
    /// are the UNK and PAD names.
    pub fn from_full_names(names: Vec<String>) -> Result<Self> {
        if names.len() < 3 {
            return Err(Error::Vocab(
                "vocabulary needs at least one event plus UNK and PAD".into(),
            ));
        }
        let mut index = HashMap::with_capacity(names.len());
        for (i, n) in names.iter().enumerate() {
            if index.insert(n.clone(), i as u32).is_some() {
                return Err(Error::Vocab(format!("duplicate event name '{n}'")));
            }
        }
        let unk = (names.len() - 2) as u32;
        let pad = (names.len() - 1) as u32;
        Ok(Vocabulary {
            names,
            index,
            unk,
            pad,
        })
    }

    /// The default synthetic vocabulary: the event names published for
    /// this kind of emulation log plus generated filler names, 156 events
    /// in total.
    pub fn synthetic(event_count: usize) -> Self {
        let known = [
            "createfile",
            "virtualalloc",
            "getmodulehandle",
            "getmodulefilename",
        ];
        let mut names: Vec<String> = known
            .iter()
            .take(event_count)
            .map(|s| s.to_string())
            .collect();
        for i in names.len()..event_count {
            names.push(format!("event_{i:03}"));
        }
        Vocabulary::new(names).expect("synthetic vocabulary is well-formed")
    }

    /// Token id for a name, falling back to UNK.
    pub fn encode(&self, name: &str) -> u32 {
        self.index.get(name).copied().unwrap_or(self.unk)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn name(&self, id: u32) -> Option<&str> {
        self.names.get(id as usize).map(|s| s.as_str())
    }

    /// Total size including UNK and PAD.
    pub fn size(&self) -> usize {
        self.names.len()
    }

    /// Number of real events (size minus UNK and PAD).
    pub fn event_count(&self) -> usize {
        self.names.len() - 2
    }

    pub fn unk_id(&self) -> u32 {
        self.unk
    }

    pub fn pad_id(&self) -> u32 {
        self.pad
    }

    pub fn full_names(&self) -> &[String] {
        &self.names
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = String::new();
        for n in &self.names {
            text.push_str(n);
            text.push('\n');
        }
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let names: Vec<String> = text.lines().map(|l| l.to_string()).collect();
        Self::from_full_names(names)
    }
}

// ── labeled sequences ───────────────────────────────────────────────────

/// One encoded event sequence with its binary label.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledSequence {
    pub id: String,
    /// `true` means malicious.
    pub label: bool,
    pub events: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
struct RawRecord {
    id: String,
    label: u8,
    events: Vec<String>,
}

/// Reads a line-delimited corpus, encoding event names through the
/// vocabulary (unknown names become UNK). Event order is preserved.
pub fn load_corpus(path: &Path, vocab: &Vocabulary) -> Result<Vec<LabeledSequence>> {
    let file = std::fs::File::open(path)?;
    let reader = BufReader::new(file);
    let mut out = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawRecord = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: lineno + 1,
            msg: e.to_string(),
        })?;
        if raw.label > 1 {
            return Err(Error::Schema(format!(
                "line {}: label must be 0 or 1, got {}",
                lineno + 1,
                raw.label
            )));
        }
        if raw.events.is_empty() {
            return Err(Error::Schema(format!(
                "line {}: empty events array",
                lineno + 1
            )));
        }
        let events = raw.events.iter().map(|e| vocab.encode(e)).collect();
        out.push(LabeledSequence {
            id: raw.id,
            label: raw.label == 1,
            events,
        });
    }
    Ok(out)
}

/// Writes a corpus in the line-delimited record format, decoding ids back
/// to event names. Loading the result reproduces the input exactly.
pub fn save_corpus(path: &Path, seqs: &[LabeledSequence], vocab: &Vocabulary) -> Result<()> {
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    for seq in seqs {
        let events: Result<Vec<String>> = seq
            .events
            .iter()
            .map(|&id| {
                vocab
                    .name(id)
                    .map(|s| s.to_string())
                    .ok_or_else(|| Error::Vocab(format!("token id {id} has no name")))
            })
            .collect();
        let raw = RawRecord {
            id: seq.id.clone(),
            label: seq.label as u8,
            events: events?,
        };
        serde_json::to_writer(&mut file, &raw)?;
        file.write_all(b"\n")?;
    }
    Ok(())
}

// ── filtering ───────────────────────────────────────────────────────────

/// Applies the corpus selection rules, in order: keep a single instance
/// per distinct event sequence, drop sequences that occur with both
/// labels, drop sequences shorter than [`MIN_SEQUENCE_EVENTS`].
pub fn filter_corpus(seqs: Vec<LabeledSequence>) -> Vec<LabeledSequence> {
    let mut label_sets: HashMap<&[u32], (bool, bool)> = HashMap::new();
    for s in &seqs {
        let entry = label_sets.entry(&s.events).or_insert((false, false));
        if s.label {
            entry.1 = true;
        } else {
            entry.0 = true;
        }
    }
    let conflicted: HashSet<Vec<u32>> = label_sets
        .iter()
        .filter(|(_, &(benign, malicious))| benign && malicious)
        .map(|(events, _)| events.to_vec())
        .collect();

    let mut seen: HashSet<Vec<u32>> = HashSet::new();
    let mut out = Vec::new();
    for s in seqs {
        if !seen.insert(s.events.clone()) {
            continue;
        }
        if conflicted.contains(&s.events) {
            continue;
        }
        if s.events.len() < MIN_SEQUENCE_EVENTS {
            continue;
        }
        out.push(s);
    }
    out
}

// ── splitting ───────────────────────────────────────────────────────────

/// Train/validation/test partition of a corpus.
#[derive(Clone, Debug)]
pub struct CorpusSplit {
    pub train: Vec<LabeledSequence>,
    pub validation: Vec<LabeledSequence>,
    pub test: Vec<LabeledSequence>,
    pub ratios: [f64; 3],
}

/// Rounded split sizes for `n` items; test takes the remainder.
pub fn split_sizes(n: usize, ratios: [f64; 3]) -> (usize, usize, usize) {
    let n_train = (n as f64 * ratios[0]).round() as usize;
    let n_val = (n as f64 * ratios[1]).round() as usize;
    let n_train = n_train.min(n);
    let n_val = n_val.min(n - n_train);
    (n_train, n_val, n - n_train - n_val)
}

/// Seeded shuffle followed by a contiguous partition.
pub fn split_corpus(
    mut seqs: Vec<LabeledSequence>,
    ratios: [f64; 3],
    seed: u64,
) -> Result<CorpusSplit> {
    if ratios.iter().any(|&r| r < 0.0) {
        return Err(Error::Config("split ratios must be non-negative".into()));
    }
    let sum: f64 = ratios.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::Config(format!(
            "split ratios must sum to 1, got {sum}"
        )));
    }
    use rand::seq::SliceRandom;
    let mut rng = rng::stream(seed, Domain::Split);
    seqs.shuffle(&mut rng);
    let (n_train, n_val, _) = split_sizes(seqs.len(), ratios);
    let test = seqs.split_off(n_train + n_val);
    let validation = seqs.split_off(n_train);
    Ok(CorpusSplit {
        train: seqs,
        validation,
        test,
        ratios,
    })
}

// ── batching ────────────────────────────────────────────────────────────

/// Optional head-first truncation plus the (post-truncation) lengths,
/// which downstream masking needs.
pub fn encode_batch(
    seqs: &[LabeledSequence],
    max_len: Option<usize>,
) -> (Vec<Vec<u32>>, Vec<usize>) {
    let mut tokens = Vec::with_capacity(seqs.len());
    let mut lengths = Vec::with_capacity(seqs.len());
    for s in seqs {
        let keep = match max_len {
            Some(m) => s.events.len().min(m),
            None => s.events.len(),
        };
        tokens.push(s.events[..keep].to_vec());
        lengths.push(keep);
    }
    (tokens, lengths)
}

// ── synthetic generation ────────────────────────────────────────────────

/// Where the planted motif lands inside a malicious sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Placement {
    /// Within the opening stretch of the sequence.
    Early,
    /// At or after `len - (k + k * max_gap)`, so the motif sits at the
    /// very end of the sequence.
    Late,
    /// Uniformly anywhere the motif fits.
    Uniform,
}

impl std::str::FromStr for Placement {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "early" => Ok(Placement::Early),
            "late" => Ok(Placement::Late),
            "uniform" => Ok(Placement::Uniform),
            other => Err(Error::Config(format!("unknown placement '{other}'"))),
        }
    }
}

/// An ordered motif of events with a uniform gap distribution between
/// consecutive motif events.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MotifSpec {
    pub motif: Vec<u32>,
    pub min_gap: usize,
    pub max_gap: usize,
    pub placement: Placement,
}

impl MotifSpec {
    pub fn validate(&self, event_count: usize) -> Result<()> {
        if self.motif.is_empty() {
            return Err(Error::Config("motif must have at least one event".into()));
        }
        if self.min_gap > self.max_gap {
            return Err(Error::Config(format!(
                "min_gap {} exceeds max_gap {}",
                self.min_gap, self.max_gap
            )));
        }
        if let Some(&bad) = self.motif.iter().find(|&&e| e as usize >= event_count) {
            return Err(Error::Config(format!(
                "motif event {bad} outside the {event_count} real events"
            )));
        }
        Ok(())
    }

    /// Upper bound on the planted span, `k + k * max_gap`.
    pub fn budget(&self) -> usize {
        self.motif.len() + self.motif.len() * self.max_gap
    }
}

/// Background event distribution shared by both classes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Background {
    /// Heavy-tailed, weight `1/(id + 1)`; low ids dominate like real API
    /// logs do.
    Zipf,
    Uniform,
}

impl std::str::FromStr for Background {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "zipf" => Ok(Background::Zipf),
            "uniform" => Ok(Background::Uniform),
            other => Err(Error::Config(format!("unknown background '{other}'"))),
        }
    }
}

/// Full recipe for one synthetic corpus.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub n: usize,
    pub malware_fraction: f64,
    pub min_len: usize,
    pub max_len: usize,
    pub motif: MotifSpec,
    pub background: Background,
    pub seed: u64,
}

impl GeneratorConfig {
    pub fn validate(&self, event_count: usize) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Config("n must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.malware_fraction) {
            return Err(Error::Config(format!(
                "malware_fraction must lie in [0, 1], got {}",
                self.malware_fraction
            )));
        }
        if self.min_len < MIN_SEQUENCE_EVENTS {
            return Err(Error::Config(format!(
                "min_len must be at least {MIN_SEQUENCE_EVENTS} to survive corpus filtering"
            )));
        }
        if self.min_len > self.max_len {
            return Err(Error::Config(format!(
                "min_len {} exceeds max_len {}",
                self.min_len, self.max_len
            )));
        }
        self.motif.validate(event_count)
    }
}

struct BackgroundSampler {
    dist: WeightedIndex<f64>,
}

impl BackgroundSampler {
    fn new(kind: Background, event_count: usize) -> Self {
        let weights: Vec<f64> = match kind {
            Background::Zipf => (0..event_count).map(|i| 1.0 / (i + 1) as f64).collect(),
            Background::Uniform => vec![1.0; event_count],
        };
        BackgroundSampler {
            dist: WeightedIndex::new(weights).expect("positive weights"),
        }
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> u32 {
        self.dist.sample(rng) as u32
    }
}

/// True when `motif` occurs in `events` as an ordered, not necessarily
/// consecutive, subsequence. The greedy scan is exact for this question.
pub fn contains_ordered_motif(events: &[u32], motif: &[u32]) -> bool {
    let mut state = 0;
    for &e in events {
        if e == motif[state] {
            state += 1;
            if state == motif.len() {
                return true;
            }
        }
    }
    false
}

/// Background events, redrawing any event that would complete the motif as
/// an ordered subsequence. Motif events still occur, just never in full
/// order. Benign sequences are exactly this; malicious ones overwrite the
/// planted positions afterwards, so their first full-order occurrence is
/// the planted one.
fn constrained_background<R: Rng>(
    rng: &mut R,
    len: usize,
    motif: &[u32],
    bg: &BackgroundSampler,
) -> Vec<u32> {
    let k = motif.len();
    let mut state = 0usize;
    let mut events = Vec::with_capacity(len);
    for _ in 0..len {
        let mut e = bg.draw(rng);
        while state == k - 1 && e == motif[k - 1] {
            e = bg.draw(rng);
        }
        if state < k - 1 && e == motif[state] {
            state += 1;
        }
        events.push(e);
    }
    events
}

/// Malicious draw: constrained background everywhere, then the motif
/// written over it at gap-separated positions. Returns the planted
/// positions as well.
fn malicious_events<R: Rng>(
    rng: &mut R,
    spec: &MotifSpec,
    min_len: usize,
    max_len: usize,
    bg: &BackgroundSampler,
) -> Result<(Vec<u32>, Vec<usize>)> {
    let k = spec.motif.len();
    for _attempt in 0..100 {
        let len = rng.gen_range(min_len..=max_len);
        let gaps: Vec<usize> = (0..k.saturating_sub(1))
            .map(|_| rng.gen_range(spec.min_gap..=spec.max_gap))
            .collect();
        let span = k + gaps.iter().sum::<usize>();
        if span > len {
            continue;
        }
        let hi = len - span;
        let start = match spec.placement {
            Placement::Uniform => rng.gen_range(0..=hi),
            Placement::Late => {
                let lo = len.saturating_sub(spec.budget()).min(hi);
                rng.gen_range(lo..=hi)
            }
            Placement::Early => {
                let cap = spec.budget().min(hi);
                rng.gen_range(0..=cap)
            }
        };
        let mut events = constrained_background(rng, len, &spec.motif, bg);
        let mut positions = Vec::with_capacity(k);
        let mut pos = start;
        for (i, &m) in spec.motif.iter().enumerate() {
            events[pos] = m;
            positions.push(pos);
            if i + 1 < k {
                pos += 1 + gaps[i];
            }
        }
        return Ok((events, positions));
    }
    Err(Error::Contract(format!(
        "motif span never fit a drawn length in [{min_len}, {max_len}] after 100 attempts"
    )))
}

/// Generates a labeled corpus. Exactly `round(n * malware_fraction)`
/// records are malicious, assigned to seeded-random positions; each record
/// then draws from its own RNG sub-stream, so generation is reproducible
/// and order-stable under any evaluation order.
pub fn generate_synthetic_corpus(
    gc: &GeneratorConfig,
    vocab: &Vocabulary,
) -> Result<Vec<LabeledSequence>> {
    Ok(generate_with_positions(gc, vocab)?
        .into_iter()
        .map(|(seq, _)| seq)
        .collect())
}

/// As [`generate_synthetic_corpus`], additionally reporting the planted
/// motif positions of each malicious record (`None` for benign ones).
pub fn generate_with_positions(
    gc: &GeneratorConfig,
    vocab: &Vocabulary,
) -> Result<Vec<(LabeledSequence, Option<Vec<usize>>)>> {
    gc.validate(vocab.event_count())?;
    let bg = BackgroundSampler::new(gc.background, vocab.event_count());

    let n_mal = (gc.n as f64 * gc.malware_fraction).round() as usize;
    let mut labels = vec![false; gc.n];
    labels[..n_mal.min(gc.n)].fill(true);
    use rand::seq::SliceRandom;
    labels.shuffle(&mut rng::stream(gc.seed, Domain::Data));

    let mut out = Vec::with_capacity(gc.n);
    for (i, &label) in labels.iter().enumerate() {
        let mut rng = rng::indexed_stream(gc.seed, Domain::Data, (i + 1) as u64);
        let id = format!("synth-{i:06}");
        if label {
            let (events, positions) =
                malicious_events(&mut rng, &gc.motif, gc.min_len, gc.max_len, &bg)?;
            out.push((
                LabeledSequence {
                    id,
                    label: true,
                    events,
                },
                Some(positions),
            ));
        } else {
            let len = rng.gen_range(gc.min_len..=gc.max_len);
            let events = constrained_background(&mut rng, len, &gc.motif.motif, &bg);
            out.push((
                LabeledSequence {
                    id,
                    label: false,
                    events,
                },
                None,
            ));
        }
    }
    Ok(out)
}

/// Default motif over the tail of the Zipf background: three rare events
/// in a fixed order with small gaps.
pub fn default_motif(vocab: &Vocabulary, placement: Placement) -> MotifSpec {
    let e = vocab.event_count() as u32;
    MotifSpec {
        motif: vec![e - 3, e - 2, e - 1],
        min_gap: 0,
        max_gap: 2,
        placement,
    }
}
