//! Descriptive sentences, mission instructions, ablation texts and a
//! word-level vocabulary.
//!
//! Each described pair becomes one sentence of the form
//! `"<color> tiles are <property> ."`. Sentence order is shuffled per
//! episode so position carries no information.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::TileProperty;
use crate::grid::Color;
use crate::level::{DynamicsMap, Mission};
use crate::{rng, Error};

pub const PAD: &str = "<pad>";
pub const UNKNOWN: &str = "<unk>";

const TEMPLATE_WORDS: [&str; 3] = ["tiles", "are", "."];
const INSTRUCTION_WORDS: [&str; 8] = ["go", "to", "the", "put", "next", "ball", "box", "key"];

/// Fixed dictionary of words unrelated to the task, one per descriptive word.
pub const IRRELEVANT_WORDS: [&str; 16] = [
    "apple", "river", "window", "music", "paper", "cloud", "garden", "pencil", "silver", "morning",
    "candle", "forest", "button", "letter", "bridge", "coffee",
];

/// Every word a descriptive sentence can contain.
pub fn description_words() -> Vec<&'static str> {
    let mut words: Vec<&'static str> = Color::ALL.iter().map(|c| c.name()).collect();
    words.extend(TileProperty::DYNAMIC.iter().map(|p| p.word()));
    words.extend(TEMPLATE_WORDS);
    words
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TextMode {
    #[default]
    Descriptive,
    Lorem,
    Random,
    Shuffled,
}

impl TextMode {
    pub fn name(self) -> &'static str {
        match self {
            TextMode::Descriptive => "descriptive",
            TextMode::Lorem => "lorem",
            TextMode::Random => "random",
            TextMode::Shuffled => "shuffled",
        }
    }
}

impl fmt::Display for TextMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TextMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "descriptive" => Ok(TextMode::Descriptive),
            "lorem" => Ok(TextMode::Lorem),
            "random" => Ok(TextMode::Random),
            "shuffled" => Ok(TextMode::Shuffled),
            other => Err(Error::Parse(format!("unknown text mode '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DescriptionSet {
    pub sentences: Vec<String>,
    /// Pairs in use this episode that no sentence describes.
    pub omitted: Vec<(Color, TileProperty)>,
}

pub fn sentence(color: Color, property: TileProperty) -> String {
    format!("{} tiles are {} .", color.name(), property.word())
}

/// One sentence per placed color in random order; partial mode drops one
/// uniformly chosen pair.
pub fn describe(dynamics: &DynamicsMap, partial: bool, rng_seed: u64) -> DescriptionSet {
    let mut rng = rng::stream(rng_seed, "describe");
    let mut pairs = dynamics.pairs();
    pairs.shuffle(&mut rng);
    let mut omitted = Vec::new();
    if partial && !pairs.is_empty() {
        let i = rng.random_range(0..pairs.len());
        omitted.push(pairs.remove(i));
    }
    DescriptionSet {
        sentences: pairs.iter().map(|(c, p)| sentence(*c, *p)).collect(),
        omitted,
    }
}

/// The mission in Baby-Language.
pub fn instruction(mission: &Mission) -> String {
    match mission {
        Mission::GoTo { target } => format!("go to the {target}"),
        Mission::PutNext { moved, fixed } => format!("put the {moved} next to the {fixed}"),
    }
}

fn lorem_word(rng: &mut ChaCha8Rng) -> String {
    const ONSETS: [&str; 12] = ["l", "m", "n", "p", "r", "s", "t", "v", "d", "c", "qu", "f"];
    const VOWELS: [&str; 6] = ["a", "e", "i", "o", "u", "ae"];
    const CODAS: [&str; 5] = ["", "m", "s", "t", "r"];
    let syllables = rng.random_range(2..=3);
    let mut word = String::new();
    for _ in 0..syllables {
        word.push_str(ONSETS.choose(rng).unwrap());
        word.push_str(VOWELS.choose(rng).unwrap());
    }
    word.push_str(CODAS.choose(rng).unwrap());
    word
}

/// Ablation texts with the same sentence count and lengths as the true
/// description set.
pub fn ablation_text(mode: TextMode, dynamics: &DynamicsMap, rng_seed: u64) -> DescriptionSet {
    let truth = describe(dynamics, false, rng_seed);
    let mut rng = rng::stream(rng_seed, &format!("ablation/{mode}"));
    let lengths: Vec<usize> = truth.sentences.iter().map(|s| s.split_whitespace().count()).collect();
    let sentences = match mode {
        TextMode::Descriptive => truth.sentences,
        TextMode::Lorem => {
            let known = Vocabulary::standard();
            lengths
                .iter()
                .map(|&n| {
                    (0..n)
                        .map(|_| loop {
                            let w = lorem_word(&mut rng);
                            if !known.contains(&w) {
                                break w;
                            }
                        })
                        .collect::<Vec<_>>()
                        .join(" ")
                })
                .collect()
        }
        TextMode::Random => lengths
            .iter()
            .map(|&n| {
                (0..n)
                    .map(|_| *IRRELEVANT_WORDS.choose(&mut rng).unwrap())
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .collect(),
        TextMode::Shuffled => shuffle_words(&truth.sentences, &lengths, &mut rng),
    };
    DescriptionSet {
        sentences,
        omitted: Vec::new(),
    }
}

/// Permutes all words across the set and re-chunks them into sentences of
/// the original lengths, retrying until the sentence multiset changes.
fn shuffle_words(sentences: &[String], lengths: &[usize], rng: &mut ChaCha8Rng) -> Vec<String> {
    let mut words: Vec<&str> = sentences.iter().flat_map(|s| s.split_whitespace()).collect();
    let mut original: Vec<&String> = sentences.iter().collect();
    original.sort();
    if words.is_empty() {
        return Vec::new();
    }
    loop {
        words.shuffle(rng);
        let mut out = Vec::with_capacity(lengths.len());
        let mut rest = &words[..];
        for &n in lengths {
            let (head, tail) = rest.split_at(n);
            out.push(head.join(" "));
            rest = tail;
        }
        let mut sorted: Vec<&String> = out.iter().collect();
        sorted.sort();
        if sorted != original {
            return out;
        }
    }
}

/// Reconstructs the color-to-property mapping from descriptive sentences.
/// Fails on any sentence that does not follow the template or on
/// contradicting sentences.
pub fn parse_descriptions(sentences: &[String]) -> Result<BTreeMap<Color, TileProperty>, Error> {
    let mut mapping = BTreeMap::new();
    for s in sentences {
        let words: Vec<String> = s.split_whitespace().map(|w| w.to_lowercase()).collect();
        let parsed = match words.as_slice() {
            [c, t, a, p, dot] if t == "tiles" && a == "are" && dot == "." => {
                Color::from_name(c).zip(TileProperty::from_word(p))
            }
            _ => None,
        };
        let (color, property) =
            parsed.ok_or_else(|| Error::Parse(format!("not a description: '{s}'")))?;
        if let Some(prev) = mapping.insert(color, property) {
            if prev != property {
                return Err(Error::Parse(format!("conflicting descriptions for {color}")));
            }
        }
    }
    Ok(mapping)
}

/// Dense token ids; 0 is padding and 1 is the unknown token.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    ids: HashMap<String, u32>,
}

impl Vocabulary {
    pub fn from_tokens<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut vocab = Vocabulary {
            tokens: Vec::new(),
            ids: HashMap::new(),
        };
        for t in [PAD.to_string(), UNKNOWN.to_string()]
            .into_iter()
            .chain(tokens.into_iter().map(Into::into))
        {
            if !vocab.ids.contains_key(&t) {
                vocab.ids.insert(t.clone(), vocab.tokens.len() as u32);
                vocab.tokens.push(t);
            }
        }
        vocab
    }

    /// Descriptive words, instruction words and the irrelevant dictionary.
    pub fn standard() -> Self {
        Vocabulary::from_tokens(
            description_words()
                .into_iter()
                .chain(INSTRUCTION_WORDS)
                .chain(IRRELEVANT_WORDS),
        )
    }

    pub fn pad_id(&self) -> u32 {
        0
    }

    pub fn unknown_id(&self) -> u32 {
        1
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.ids.contains_key(token)
    }

    pub fn id(&self, token: &str) -> u32 {
        self.ids.get(token).copied().unwrap_or(self.unknown_id())
    }

    pub fn token(&self, id: u32) -> Option<&str> {
        self.tokens.get(id as usize).map(String::as_str)
    }

    /// Token-per-line text; the line index is the id.
    pub fn to_text(&self) -> String {
        let mut out = self.tokens.join("\n");
        out.push('\n');
        out
    }

    pub fn from_text(text: &str) -> Result<Self, Error> {
        let lines: Vec<&str> = text.lines().filter(|l| !l.is_empty()).collect();
        if lines.len() < 2 || lines[0] != PAD || lines[1] != UNKNOWN {
            return Err(Error::Parse(format!(
                "vocabulary must start with {PAD} and {UNKNOWN}"
            )));
        }
        Ok(Vocabulary::from_tokens(lines[2..].iter().copied()))
    }

    pub fn load(path: &Path) -> Result<Self, Error> {
        Vocabulary::from_text(&std::fs::read_to_string(path)?)
    }
}

/// Whitespace tokenization with lowercasing; unknown words map to the
/// unknown id.
pub fn tokenize(sentence: &str, vocab: &Vocabulary) -> Vec<u32> {
    sentence
        .split_whitespace()
        .map(|w| vocab.id(&w.to_lowercase()))
        .collect()
}

pub fn detokenize(ids: &[u32], vocab: &Vocabulary) -> String {
    ids.iter()
        .map(|&id| vocab.token(id).unwrap_or(UNKNOWN))
        .collect::<Vec<_>>()
        .join(" ")
}
