use embias::linalg::cosine;
use embias::trainer::{train, train_with_report, GenderClass, GenderLabeling, TrainingConfig};
use embias::{Embeddings, PairLexicon, TokenStream, Vocabulary};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn topic_words(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

/// Alternating runs of two disjoint sublanguages.
fn two_topic_corpus(seed: u64, runs: usize) -> (TokenStream, Vec<String>, Vec<String>) {
    // Large enough that frequent-word subsampling keeps most tokens.
    let a = topic_words("alpha", 300);
    let b = topic_words("beta", 300);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut toks = Vec::new();
    for r in 0..runs {
        let pool = if r % 2 == 0 { &a } else { &b };
        for _ in 0..200 {
            toks.push(pool.choose(&mut rng).unwrap().clone());
        }
    }
    (TokenStream::from_tokens(toks), a, b)
}

fn small_config(seed: u64) -> TrainingConfig {
    TrainingConfig {
        dim: 16,
        epochs: 5,
        min_count: 1,
        seed,
        ..TrainingConfig::default()
    }
}

#[test]
fn topics_separate_after_training() {
    let (corpus, a, b) = two_topic_corpus(3, 1500);
    let vocab = Vocabulary::build(&corpus, 1).unwrap();
    let model = train(&corpus, &vocab, &GenderLabeling::neutral(&vocab), &small_config(11)).unwrap();
    let emb = model.embeddings();
    let sim = |x: &str, y: &str| cosine(emb.vector(x).unwrap(), emb.vector(y).unwrap());

    let mut min_within = f64::INFINITY;
    let mut max_cross = f64::NEG_INFINITY;
    for group in [&a, &b] {
        for (i, x) in group.iter().enumerate() {
            for y in &group[i + 1..] {
                min_within = min_within.min(sim(x, y));
            }
        }
    }
    for x in &a {
        for y in &b {
            max_cross = max_cross.max(sim(x, y));
        }
    }
    assert!(min_within > max_cross, "within {min_within} cross {max_cross}");
}

fn gendered_corpus(seed: u64) -> (TokenStream, PairLexicon) {
    let lex = PairLexicon::parse("he she\nman woman\nking queen").unwrap();
    let male = ["he", "man", "king", "beard", "sir"];
    let female = ["she", "woman", "queen", "gown", "madam"];
    let neutral = topic_words("w", 30);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut toks = Vec::new();
    for _ in 0..6000 {
        let side: &[&str] = if rng.random_bool(0.5) { &male } else { &female };
        for _ in 0..3 {
            toks.push(side.choose(&mut rng).unwrap().to_string());
            toks.push(neutral.choose(&mut rng).unwrap().clone());
        }
    }
    (TokenStream::from_tokens(toks), lex)
}

#[test]
fn gender_head_separates_he_and_she() {
    let (corpus, lex) = gendered_corpus(5);
    let vocab = Vocabulary::build(&corpus, 1).unwrap();
    let labeling = GenderLabeling::from_lexicon(&vocab, &lex);
    let cfg = TrainingConfig {
        ege_enabled: true,
        ..small_config(2)
    };
    let model = train(&corpus, &vocab, &labeling, &cfg).unwrap();
    assert_eq!(model.ege_predict(vocab.index("he").unwrap()), GenderClass::Male);
    assert_eq!(model.ege_predict(vocab.index("she").unwrap()), GenderClass::Female);
    assert!(model.is_finite());
}

#[test]
fn disabled_gender_head_is_plain_cbow() {
    let (corpus, lex) = gendered_corpus(8);
    let vocab = Vocabulary::build(&corpus, 1).unwrap();
    let cfg = small_config(4);
    let plain = train(&corpus, &vocab, &GenderLabeling::neutral(&vocab), &cfg).unwrap();
    let labeled = train(&corpus, &vocab, &GenderLabeling::from_lexicon(&vocab, &lex), &cfg).unwrap();
    assert_eq!(plain.input, labeled.input);
    assert_eq!(plain.output, labeled.output);

    let with_head = train(
        &corpus,
        &vocab,
        &GenderLabeling::from_lexicon(&vocab, &lex),
        &TrainingConfig {
            ege_enabled: true,
            ..cfg
        },
    )
    .unwrap();
    assert_eq!(with_head.input.dim(), plain.input.dim());
    assert_eq!(with_head.vocab, plain.vocab);
}

#[test]
fn epoch_loss_decreases_for_most_seeds() {
    let (corpus, _, _) = two_topic_corpus(9, 800);
    let vocab = Vocabulary::build(&corpus, 1).unwrap();
    let mut ok = 0;
    for seed in [1, 2, 3] {
        let (_, report) =
            train_with_report(&corpus, &vocab, &GenderLabeling::neutral(&vocab), &small_config(seed)).unwrap();
        let ema = &report.epoch_ema_loss;
        if ema.windows(2).all(|w| w[1] <= w[0]) {
            ok += 1;
        }
        assert!(report.epoch_mean_loss.iter().all(|l| l.is_finite() && *l >= 0.0));
    }
    assert!(ok >= 2, "only {ok} of 3 seeds had non-increasing epoch loss");
}

#[test]
fn exported_vectors_round_trip_through_text() {
    let (corpus, _, _) = two_topic_corpus(1, 50);
    let vocab = Vocabulary::build(&corpus, 1).unwrap();
    let model = train(&corpus, &vocab, &GenderLabeling::neutral(&vocab), &small_config(1)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("a.txt");
    let second = dir.path().join("b.txt");
    model.embeddings().save(&first).unwrap();
    Embeddings::load(&first).unwrap().save(&second).unwrap();
    assert_eq!(std::fs::read(&first).unwrap(), std::fs::read(&second).unwrap());
}
