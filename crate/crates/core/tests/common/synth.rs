//! Synthetic stand-in for a large English corpus and the SSA name files.
//!
//! The generated language has a small set of real gendered word pairs,
//! invented given names tied to a gender through pronoun sentences, and
//! invented professions spread over two semantic fields. Professions
//! co-occur with names of their stereotyped gender most of the time and
//! with their field vocabulary always, so gender information in the
//! profession vectors arrives mostly through names.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use embias::lexicon::{SemBiasInstance, SemBiasTag};
use embias::{PairLexicon, ProfessionSet, SemBiasSet, Stereotype};
use rand::distr::weighted::WeightedIndex;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Zipf};

pub const GENDER_PAIRS: &[(&str, &str)] = &[
    ("he", "she"),
    ("him", "her"),
    ("his", "hers"),
    ("man", "woman"),
    ("men", "women"),
    ("boy", "girl"),
    ("father", "mother"),
    ("son", "daughter"),
    ("brother", "sister"),
    ("king", "queen"),
    ("husband", "wife"),
    ("uncle", "aunt"),
    ("nephew", "niece"),
    ("gentleman", "lady"),
    ("male", "female"),
    ("boys", "girls"),
];

/// Gendered pairs that mostly occur without any gender cue nearby.
pub const WEAK_PAIRS: &[(&str, &str)] = &[
    ("groom", "bride"),
    ("monk", "nun"),
    ("prince", "princess"),
    ("duke", "duchess"),
    ("lord", "dame"),
    ("steward", "stewardess"),
    ("waiter", "waitress"),
    ("actor", "actress"),
];

/// Knobs of the generated language.
#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub names_per_gender: usize,
    pub professions_per_gender: usize,
    pub fields: usize,
    pub field_words: usize,
    pub filler_words: usize,
    /// Probability that a profession sentence uses a name of the stereotyped gender.
    pub stereotype_rate: f64,
    /// Probability that the rare direct profession/pronoun sentence is stereotypical.
    pub direct_rate: f64,
    /// Probability that a weakly gendered word appears next to a matching pronoun.
    pub weak_cue_rate: f64,
    /// Relative frequencies of the sentence kinds, in the order: named
    /// professional, named person with pronouns, gendered words, profession
    /// in its field, direct profession/pronoun, filler, weakly gendered word.
    pub mix: [f64; 7],
    /// Mean number of filler tokens between two sentences.
    pub gap: usize,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            names_per_gender: 20,
            professions_per_gender: 20,
            fields: 4,
            field_words: 30,
            filler_words: 5000,
            stereotype_rate: 0.85,
            direct_rate: 0.6,
            mix: [0.45, 0.2, 0.15, 0.05, 0.05, 0.1, 0.05],
            weak_cue_rate: 0.1,
            gap: 20,
            seed: 2024,
        }
    }
}

/// The vocabulary of the synthetic language plus its evaluation lists.
#[derive(Debug, Clone)]
pub struct SynthWorld {
    pub config: SynthConfig,
    pub male_names: Vec<String>,
    pub female_names: Vec<String>,
    /// Names that exist in the birth records but are too rare to be masked.
    pub rare_names: Vec<String>,
    pub professions: Vec<(String, Stereotype, usize)>,
    /// Words specific to each profession, parallel to `professions`.
    pub profession_words: Vec<Vec<String>>,
    pub field_words: Vec<Vec<String>>,
    pub filler: Vec<String>,
}

fn syllable_word(rng: &mut ChaCha8Rng, syllables: usize, taken: &mut HashSet<String>) -> String {
    const ONSETS: &[&str] = &[
        "b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "br", "gr", "st", "tr",
    ];
    const VOWELS: &[&str] = &["a", "e", "i", "o", "u", "ai", "ou"];
    const CODAS: &[&str] = &["", "", "n", "r", "s", "l", "x"];
    loop {
        let mut w = String::new();
        for _ in 0..syllables {
            w.push_str(ONSETS.choose(rng).unwrap());
            w.push_str(VOWELS.choose(rng).unwrap());
        }
        w.push_str(CODAS.choose(rng).unwrap());
        let clash = GENDER_PAIRS.iter().chain(WEAK_PAIRS).any(|(m, f)| *m == w || *f == w);
        if !clash && taken.insert(w.clone()) {
            return w;
        }
    }
}

impl SynthWorld {
    pub fn new(config: SynthConfig) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut taken = HashSet::new();
        let mut words = |n: usize, syl: usize, rng: &mut ChaCha8Rng| -> Vec<String> {
            (0..n).map(|_| syllable_word(rng, syl, &mut taken)).collect()
        };
        let male_names = words(config.names_per_gender, 3, &mut rng);
        let female_names = words(config.names_per_gender, 3, &mut rng);
        let rare_names = words(10, 3, &mut rng);
        let field_words = (0..config.fields)
            .map(|_| words(config.field_words, 2, &mut rng))
            .collect();
        let filler = words(config.filler_words, 2, &mut rng);
        let mut professions = Vec::new();
        let mut profession_words = Vec::new();
        for stereo in [Stereotype::Male, Stereotype::Female] {
            let toks = words(config.professions_per_gender, 4, &mut rng);
            for (i, t) in toks.into_iter().enumerate() {
                professions.push((t, stereo, i % config.fields));
                profession_words.push(words(4, 2, &mut rng));
            }
        }
        SynthWorld {
            config,
            male_names,
            female_names,
            rare_names,
            professions,
            profession_words,
            field_words,
            filler,
        }
    }

    pub fn pair_lexicon(&self) -> PairLexicon {
        PairLexicon::new(
            GENDER_PAIRS
                .iter()
                .chain(WEAK_PAIRS)
                .map(|(m, f)| (m.to_string(), f.to_string()))
                .collect(),
        )
        .unwrap()
    }

    /// The ten most frequent pairs, used to estimate the gender direction.
    pub fn definitional_pairs(&self) -> PairLexicon {
        PairLexicon::new(
            GENDER_PAIRS[..10]
                .iter()
                .map(|(m, f)| (m.to_string(), f.to_string()))
                .collect(),
        )
        .unwrap()
    }

    pub fn profession_set(&self) -> ProfessionSet {
        ProfessionSet::new(self.professions.iter().map(|(t, s, _)| (t.clone(), *s)).collect()).unwrap()
    }

    fn of(&self, stereo: Stereotype) -> Vec<&str> {
        self.professions
            .iter()
            .filter(|(_, s, _)| *s == stereo)
            .map(|(t, _, _)| t.as_str())
            .collect()
    }

    /// One instance per definitional pair: the pair itself, a
    /// male/female-stereotyped profession pair, and two unrelated pairs.
    pub fn sembias_set(&self) -> SemBiasSet {
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed ^ 0x5e3b);
        let males = self.of(Stereotype::Male);
        let females = self.of(Stereotype::Female);
        let mut instances = Vec::new();
        for (i, (m, f)) in GENDER_PAIRS.iter().chain(WEAK_PAIRS).enumerate() {
            for j in 0..2 {
                let k = (2 * i + j) % males.len();
                let field = &self.field_words[i % self.field_words.len()];
                let a = field.choose_multiple(&mut rng, 2).collect::<Vec<_>>();
                let b = self.filler[..200].choose_multiple(&mut rng, 2).collect::<Vec<_>>();
                instances.push(
                    SemBiasInstance::new([
                        (m.to_string(), f.to_string(), SemBiasTag::Definition),
                        (males[k].to_string(), females[k].to_string(), SemBiasTag::Stereotype),
                        (a[0].clone(), a[1].clone(), SemBiasTag::None),
                        (b[0].clone(), b[1].clone(), SemBiasTag::None),
                    ])
                    .unwrap(),
                );
            }
        }
        SemBiasSet::new(instances)
    }

    /// Per-year birth records `Name,Sex,Count`. Every corpus name totals
    /// well above 10000 across the years; the rare names stay below it.
    pub fn write_ssa_dir(&self, dir: &Path) -> std::io::Result<()> {
        fs::create_dir_all(dir)?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed ^ 0x55a);
        for year in 1990..1995 {
            let mut body = String::new();
            for (names, sex) in [(&self.male_names, "M"), (&self.female_names, "F")] {
                for n in names.iter() {
                    let count: u32 = rng.random_range(2100..9000);
                    writeln!(body, "{},{},{}", capitalize(n), sex, count).unwrap();
                }
            }
            for n in &self.rare_names {
                let count: u32 = rng.random_range(5..1900);
                writeln!(body, "{},F,{}", capitalize(n), count).unwrap();
            }
            fs::write(dir.join(format!("yob{year}.txt")), body)?;
        }
        fs::write(dir.join("NationalReadMe.pdf"), b"not a data file")?;
        Ok(())
    }

    /// Generates whitespace-separated text of roughly `target_bytes` bytes.
    pub fn generate(&self, target_bytes: usize, seed: u64) -> String {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let zipf = Zipf::new(self.filler.len() as f64, 1.0).unwrap();
        // Later pairs are rarer, so their vectors are noisier.
        let pair_freq = WeightedIndex::new((0..GENDER_PAIRS.len()).map(|i| 1.0 / (i as f64 + 1.0).powf(1.5))).unwrap();
        let c = &self.config;
        let mut out = String::with_capacity(target_bytes + 256);
        let mut sent: Vec<&str> = Vec::with_capacity(16);
        let total: f64 = c.mix.iter().sum();
        let mut cut = [0.0; 7];
        let mut acc = 0.0;
        for (k, w) in c.mix.iter().enumerate() {
            acc += w / total;
            cut[k] = acc;
        }

        while out.len() < target_bytes {
            sent.clear();
            for _ in 0..rng.random_range(0..=2 * c.gap) {
                sent.push(self.filler[zipf.sample(&mut rng) as usize - 1].as_str());
            }
            let filler = |rng: &mut ChaCha8Rng| self.filler[zipf.sample(rng) as usize - 1].as_str();
            let male = rng.random_bool(0.5);
            let (names, idx) = if male {
                (&self.male_names, 0)
            } else {
                (&self.female_names, 1)
            };
            let gendered = |rng: &mut ChaCha8Rng| {
                let (m, f) = GENDER_PAIRS[pair_freq.sample(rng)];
                if idx == 0 {
                    m
                } else {
                    f
                }
            };
            let roll: f64 = rng.random();
            if roll < cut[0] {
                // A named person holding a profession.
                let half = self.professions.len() / 2;
                let i = if rng.random_bool(0.5) {
                    rng.random_range(0..half)
                } else {
                    half + rng.random_range(0..half)
                };
                let (prof, stereo, _) = &self.professions[i];
                let stereo_male = *stereo == Stereotype::Male;
                let name_male = if rng.random_bool(c.stereotype_rate) {
                    stereo_male
                } else {
                    !stereo_male
                };
                let names = if name_male {
                    &self.male_names
                } else {
                    &self.female_names
                };
                sent.push(names.choose(&mut rng).unwrap());
                sent.push(filler(&mut rng));
                sent.push(prof);
                sent.push(self.profession_words[i].choose(&mut rng).unwrap());
                sent.push(filler(&mut rng));
            } else if roll < cut[1] {
                // A name next to pronouns and kinship words of its gender.
                sent.push(names.choose(&mut rng).unwrap());
                sent.push(filler(&mut rng));
                sent.push(if idx == 0 { "he" } else { "she" });
                sent.push(gendered(&mut rng));
                sent.push(filler(&mut rng));
            } else if roll < cut[2] {
                // Gendered words keeping company with each other.
                for _ in 0..3 {
                    sent.push(gendered(&mut rng));
                    sent.push(filler(&mut rng));
                }
            } else if roll < cut[3] {
                // A profession in its field, with no person attached.
                let i = rng.random_range(0..self.professions.len());
                let (prof, _, field) = &self.professions[i];
                let fw = &self.field_words[*field];
                sent.push(fw.choose(&mut rng).unwrap());
                sent.push(prof);
                sent.push(self.profession_words[i].choose(&mut rng).unwrap());
                sent.push(filler(&mut rng));
                sent.push(fw.choose(&mut rng).unwrap());
            } else if roll < cut[4] {
                // Rare direct link between a profession and a pronoun.
                let (prof, stereo, _) = self.professions.choose(&mut rng).unwrap();
                let stereo_male = *stereo == Stereotype::Male;
                let pron_male = if rng.random_bool(c.direct_rate) {
                    stereo_male
                } else {
                    !stereo_male
                };
                sent.push(prof);
                sent.push(filler(&mut rng));
                sent.push(if pron_male { "he" } else { "she" });
            } else if roll < cut[5] {
                for _ in 0..6 {
                    sent.push(filler(&mut rng));
                }
            } else {
                let (m, f) = *WEAK_PAIRS.choose(&mut rng).unwrap();
                sent.push(if idx == 0 { m } else { f });
                sent.push(filler(&mut rng));
                if rng.random_bool(c.weak_cue_rate) {
                    sent.push(if idx == 0 { "he" } else { "she" });
                } else {
                    sent.push(filler(&mut rng));
                }
            }
            for w in &sent {
                out.push_str(w);
                out.push(' ');
            }
            out.push('\n');
        }
        out
    }
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}
