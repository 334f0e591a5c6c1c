use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use embias::bias_eval::{
    cluster_accuracy, direct_bias, neighbors, pca_project, proximity_bias_with, sembias_eval, weat_with,
    PermutationMode, ProximityRule, WeatOptions,
};
use embias::hard_debias::{gender_direction, hard_debias, lexicon_tokens};
use embias::lexicon::{default_name_exclusions, load_word_list};
use embias::trainer::train_with_report;
use embias::{
    Embeddings, GenderLabeling, NameSet, PairLexicon, ProfessionSet, SemBiasSet, TokenStream, Vocabulary, WeatSpec,
};
use log::info;
use toml::Value;

use crate::args::*;
use crate::config::{load_config, resolved};
use crate::error::{CliError, Result};
use crate::manifest::RunManifest;

/// Writes `text` to `out` with its manifest, or to stdout when no path is given.
fn emit(out: Option<&Path>, text: &str, manifest: &mut RunManifest) -> Result<()> {
    match out {
        Some(path) => {
            fs::write(path, text).map_err(|e| CliError::io(path, e))?;
            manifest.write_for(path)?;
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn load_embeddings(path: &Path, manifest: &mut RunManifest) -> Result<Embeddings> {
    manifest.input("emb", path)?;
    Ok(Embeddings::load(path)?)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn prep(a: PrepArgs) -> Result<()> {
    let mut m = RunManifest::new("prep", 0);
    m.input("input", &a.input)?;
    let mut stream = TokenStream::from_file(&a.input);

    let names = if let Some(path) = &a.mask_names {
        m.input("mask_names", path)?;
        Some(NameSet::load(path)?)
    } else if let Some(dir) = &a.ssa_dir {
        let pairs = match &a.gender_pairs {
            Some(p) => {
                m.input("gender_pairs", p)?;
                Some(PairLexicon::load(p)?)
            }
            None => None,
        };
        let professions = match &a.professions {
            Some(p) => {
                m.input("professions", p)?;
                Some(ProfessionSet::load(p)?)
            }
            None => None,
        };
        let stoplist = match &a.stoplist {
            Some(p) => {
                m.input("stoplist", p)?;
                load_word_list(p)?
            }
            None => Vec::new(),
        };
        for file in ssa_files(dir)? {
            let role = format!("ssa.{}", file.file_name().unwrap().to_string_lossy());
            m.input(&role, &file)?;
        }
        let exclusions = default_name_exclusions(pairs.as_ref(), professions.as_ref(), stoplist);
        let set = NameSet::build(dir, a.name_threshold, exclusions)?;
        m.set("name_threshold", a.name_threshold);
        if let Some(out) = &a.names_out {
            fs::write(out, set.to_text()).map_err(|e| CliError::io(out, e))?;
            let mut nm = m.clone();
            nm.write_for(out)?;
        }
        Some(set)
    } else {
        None
    };
    if let Some(names) = &names {
        info!("masking {} names", names.len());
        stream = stream.mask_names(names, &a.mask_token);
        m.set("mask_token", &a.mask_token).set("masked_names", names.len());
    }
    if let Some(path) = &a.merge {
        m.input("merge", path)?;
        stream = stream.merge_gender_pairs(&PairLexicon::load(path)?);
    }
    m.set("tokens_per_line", a.tokens_per_line);
    let n = stream.write_to(&a.out, a.tokens_per_line)?;
    info!("wrote {n} tokens");
    m.write_for(&a.out)?;
    Ok(())
}

fn ssa_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| CliError::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name().and_then(|n| n.to_str()).is_some_and(|n| {
                n.strip_prefix("yob")
                    .and_then(|r| r.strip_suffix(".txt"))
                    .is_some_and(|y| y.len() == 4 && y.bytes().all(|b| b.is_ascii_digit()))
            })
        })
        .collect();
    out.sort();
    Ok(out)
}

fn train_overrides(a: &TrainArgs) -> Vec<(&'static str, Value)> {
    let mut o = Vec::new();
    let ints = [
        ("dim", a.dim),
        ("window", a.window),
        ("epochs", a.epochs),
        ("batch", a.batch),
        ("negatives", a.negatives),
        ("min_count", a.min_count),
        ("seed", a.seed),
        ("threads", a.threads),
    ];
    for (k, v) in ints {
        if let Some(v) = v {
            o.push((k, Value::Integer(v)));
        }
    }
    let floats = [
        ("learning_rate", a.learning_rate),
        ("subsample_t", a.subsample_t),
        ("ege_lambda", a.ege_lambda),
    ];
    for (k, v) in floats {
        if let Some(v) = v {
            o.push((k, Value::Float(v)));
        }
    }
    // Boolean switches only ever turn a setting on.
    if a.ege {
        o.push(("ege_enabled", Value::Boolean(true)));
    }
    if a.ege_class_weighting {
        o.push(("ege_class_weighting", Value::Boolean(true)));
    }
    o
}

pub fn train(a: TrainArgs) -> Result<()> {
    let cfg = load_config(a.config.as_deref(), &train_overrides(&a))?;
    let mut m = RunManifest::new("train", cfg.seed);
    m.resolved_config = resolved(&cfg);
    m.set("deterministic", cfg.threads == 1);
    m.input("corpus", &a.corpus)?;

    let corpus = TokenStream::from_file(&a.corpus);
    let vocab = Vocabulary::build(&corpus, cfg.min_count)?;
    info!(
        "vocabulary of {} words over {} tokens",
        vocab.len(),
        vocab.total_tokens()
    );
    let labeling = match (&a.pairs, cfg.ege_enabled) {
        (Some(p), true) => {
            m.input("pairs", p)?;
            GenderLabeling::from_lexicon(&vocab, &PairLexicon::load(p)?)
        }
        (None, true) => return Err(CliError::Usage("the gender head needs --pairs".into())),
        (_, false) => GenderLabeling::neutral(&vocab),
    };
    let (model, report) = train_with_report(&corpus, &vocab, &labeling, &cfg)?;
    for (e, loss) in report.epoch_mean_loss.iter().enumerate() {
        info!("epoch {} mean loss {loss:.6}", e + 1);
    }
    model.embeddings().save(&a.out)?;
    m.write_for(&a.out)?;
    Ok(())
}

pub fn debias(a: DebiasArgs) -> Result<()> {
    let mut m = RunManifest::new("debias", 0);
    let emb = load_embeddings(&a.emb, &mut m)?;
    m.input("pairs", &a.pairs)?;
    let defs = PairLexicon::load(&a.pairs)?;
    let eq = match &a.equalize {
        Some(p) => {
            m.input("equalize", p)?;
            PairLexicon::load(p)?
        }
        None => defs.clone(),
    };
    let mut exclude = lexicon_tokens([&defs, &eq]);
    if let Some(p) = &a.exclude {
        m.input("exclude", p)?;
        exclude.extend(load_word_list(p)?);
    }
    let g = gender_direction(&emb, &defs)?;
    let out = hard_debias(&emb, &g, &exclude, &eq)?;
    out.embeddings.save(&a.out)?;
    m.write_for(&a.out)?;
    println!("neutralized={}", out.neutralized.len());
    println!("excluded={}", emb.len() - out.neutralized.len() - out.skipped.len());
    println!("skipped={}", out.skipped.len());
    Ok(())
}

pub fn eval_cluster(a: ClusterArgs) -> Result<()> {
    if a.runs == 0 {
        return Err(CliError::Usage("--runs must be at least 1".into()));
    }
    let mut m = RunManifest::new("eval-cluster", a.seed);
    let emb = load_embeddings(&a.emb, &mut m)?;
    m.input("professions", &a.professions)?;
    m.set("runs", a.runs);
    let prof = ProfessionSet::load(&a.professions)?;
    let r = cluster_accuracy(&emb, &prof, a.runs, a.seed)?;

    let text = format!(
        "mean_accuracy={}\nstd_dev={}\nruns={}\nwords={}\ndropped={}\n",
        r.mean_accuracy,
        r.std_dev,
        r.runs,
        r.words.len(),
        r.dropped.len()
    );
    print!("{text}");
    if let Some(out) = &a.out {
        emit(Some(out), &text, &mut m.clone())?;
    }
    if let Some(out) = &a.runs_csv {
        let mut csv = String::from("seed,accuracy\n");
        for run in &r.per_run {
            writeln!(csv, "{},{}", run.seed, run.accuracy).unwrap();
        }
        emit(Some(out), &csv, &mut m)?;
    }
    Ok(())
}

pub fn eval_sembias(a: SemBiasArgs) -> Result<()> {
    let mut m = RunManifest::new("eval-sembias", 0);
    let emb = load_embeddings(&a.emb, &mut m)?;
    m.input("sembias", &a.sembias)?;
    m.set("he", &a.he).set("she", &a.she);
    let set = SemBiasSet::load(&a.sembias)?;
    let r = sembias_eval(&emb, &set, (&a.he, &a.she))?;
    let text = format!(
        "definition={}\nstereotype={}\nnone={}\nevaluated={}\nskipped={}\n",
        r.definition, r.stereotype, r.none, r.evaluated, r.skipped
    );
    report(a.out.as_deref(), &text, &mut m)
}

/// Key=value reports always go to stdout and additionally to `out`.
fn report(out: Option<&Path>, text: &str, m: &mut RunManifest) -> Result<()> {
    if out.is_some() {
        print!("{text}");
    }
    emit(out, text, m)
}

pub fn eval_weat(a: WeatArgs) -> Result<()> {
    let mut m = RunManifest::new("eval-weat", a.seed);
    let emb = load_embeddings(&a.emb, &mut m)?;
    m.input("spec", &a.spec)?;
    let spec = WeatSpec::load(&a.spec)?;
    let force_mode = match a.mode {
        WeatMode::Auto => None,
        WeatMode::Exact => Some(PermutationMode::Exact),
        WeatMode::MonteCarlo => Some(PermutationMode::MonteCarlo { samples: a.samples }),
    };
    let mode_name = format!("{:?}", a.mode).to_lowercase();
    m.set("samples", a.samples).set("mode", &mode_name);
    let r = weat_with(
        &emb,
        &spec,
        &WeatOptions {
            samples: a.samples,
            seed: a.seed,
            force_mode,
        },
    )?;
    let used = match r.mode {
        PermutationMode::Exact => "exact".to_string(),
        PermutationMode::MonteCarlo { samples } => format!("monte_carlo({samples})"),
    };
    let text = format!(
        "name={}\neffect_size={}\np_value={}\nstatistic={}\npermutation={used}\n",
        spec.name, r.effect_size, r.p_value, r.statistic
    );
    report(a.out.as_deref(), &text, &mut m)
}

fn query_words(q: &WordsArgs, m: &mut RunManifest) -> Result<Vec<String>> {
    let mut words: Vec<String> = q.words.iter().map(|w| embias::lexicon::normalize(w)).collect();
    if let Some(p) = &q.words_file {
        m.input("words", p)?;
        words.extend(load_word_list(p)?);
    }
    if words.is_empty() {
        return Err(CliError::Usage("give at least one --word or a --words-file".into()));
    }
    m.set("query", words.join(" "));
    Ok(words)
}

pub fn eval_neighbors(a: NeighborArgs) -> Result<()> {
    let mut m = RunManifest::new("eval-neighbors", 0);
    let emb = load_embeddings(&a.emb, &mut m)?;
    m.input("pairs", &a.pairs)?;
    let words = query_words(&a.query, &mut m)?;
    m.set("k", a.k);
    let g = gender_direction(&emb, &PairLexicon::load(&a.pairs)?)?;
    let mut csv = String::from("query,rank,word,cosine,bias_by_projection\n");
    for q in &words {
        for row in neighbors(&emb, q, a.k, &g)? {
            writeln!(
                csv,
                "{},{},{},{},{}",
                csv_field(q),
                row.rank,
                csv_field(&row.word),
                row.cosine,
                row.bias_by_projection
            )
            .unwrap();
        }
    }
    emit(a.out.as_deref(), &csv, &mut m)
}

pub fn eval_proximity(a: ProximityArgs) -> Result<()> {
    if a.k == 0 || a.tau.is_nan() || a.tau <= 0.0 {
        return Err(CliError::Usage("--k must be at least 1 and --tau positive".into()));
    }
    let mut m = RunManifest::new("eval-proximity", 0);
    let emb = load_embeddings(&a.emb, &mut m)?;
    m.input("pairs", &a.pairs)?;
    let words = query_words(&a.query, &mut m)?;
    let rule = if a.indirect {
        ProximityRule::IndirectBias
    } else {
        ProximityRule::DirectBias
    };
    m.set("k", a.k)
        .set("tau", a.tau)
        .set("rule", if a.indirect { "indirect" } else { "direct" });
    let g = gender_direction(&emb, &PairLexicon::load(&a.pairs)?)?;
    let mut csv = String::from("word,direct_bias,proximity_bias\n");
    for w in &words {
        let direct = direct_bias(&emb, &g, w)?;
        let prox = proximity_bias_with(&emb, &g, w, a.k, a.tau, rule)?;
        writeln!(csv, "{},{direct},{prox}", csv_field(w)).unwrap();
    }
    emit(a.out.as_deref(), &csv, &mut m)
}

pub fn export_projection(a: ProjectionArgs) -> Result<()> {
    let mut m = RunManifest::new("export-projection", 0);
    let emb = load_embeddings(&a.emb, &mut m)?;
    let labeled: Vec<(String, &str)> = match (&a.professions, &a.words_file) {
        (Some(p), _) => {
            m.input("professions", p)?;
            ProfessionSet::load(p)?
                .entries()
                .iter()
                .map(|(w, s)| (w.clone(), s.code()))
                .collect()
        }
        (None, Some(p)) => {
            m.input("words", p)?;
            load_word_list(p)?.into_iter().map(|w| (w, "")).collect()
        }
        (None, None) => return Err(CliError::Usage("give --professions or --words-file".into())),
    };
    let words: Vec<&str> = labeled.iter().map(|(w, _)| w.as_str()).collect();
    let proj = pca_project(&emb, &words)?;
    if !proj.missing.is_empty() {
        info!("{} words not in the embedding", proj.missing.len());
    }
    info!("component variances {} {}", proj.variances[0], proj.variances[1]);
    let label_of = |w: &str| labeled.iter().find(|(x, _)| x == w).map_or("", |(_, l)| *l);
    let mut csv = String::from("word,x,y,label\n");
    for p in &proj.points {
        writeln!(csv, "{},{},{},{}", csv_field(&p.word), p.x, p.y, label_of(&p.word)).unwrap();
    }
    emit(a.out.as_deref(), &csv, &mut m)
}
