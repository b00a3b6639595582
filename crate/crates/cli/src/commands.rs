use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use log::{info, warn};
use psyprofile::analysis::{
    feature_trait_matrix, group_compare, pca_2d, trait_stats, trait_trait_matrix, tsne, write_group_cdfs,
    write_group_means, write_trait_stats,
};
use psyprofile::bundled;
use psyprofile::corpus::{filter_spam, load_users, write_removal_report, write_users, LoadOptions, QuestionnaireKey};
use psyprofile::emotion::{
    parse_emotion_corpus, parse_semeval_ec, train_emotion_classifier, AffectLexicon, EmojiMap, EmotionClassifier,
    EmotionResources, LabeledText,
};
use psyprofile::pipeline::{
    evaluate, label_columns, learning_curve, predict, read_prepared, train, write_learning_curve, write_model_report,
    write_predictions, write_prediction_csv, write_prepared, write_trait_report, FeatureConfig, FeaturePipeline,
    PreparedUser, Preprocessor, Route, RouteMap, TrainedModel,
};
use psyprofile::synth::{generate, SynthSpec};
use psyprofile::textprep::{parse_tagged_corpus, train_tagger, Stopwords, TaggerModel};
use psyprofile::TraitProfile;

use crate::config::{stream, Config, CorpusFormat, EmbedMethod};
use crate::error::{Class, CliError, Result};
use crate::Command;

pub const USERS: &str = "users.jsonl";
pub const CORPUS: &str = "corpus.jsonl";
pub const PREPARED: &str = "prepared.jsonl";
pub const EMOTION_MODEL: &str = "emotion_model.json";
pub const MODEL: &str = "model.json";

pub fn run(command: &Command, config: &Config, seed_flag: Option<u64>) -> Result<()> {
    let out = &config.paths.out_dir;
    match command {
        Command::Synth { spec } => synth(config, spec.as_deref(), seed_flag),
        Command::Ingest { input } => ingest(config, &input_or(input, out, USERS)),
        Command::TrainEmotion { corpus } => train_emotion(config, corpus.as_deref()),
        Command::Featurize { input, emotion_model } => {
            featurize(config, &input_or(input, out, CORPUS), emotion_model.as_deref())
        }
        Command::Train { input } => train_model(config, &input_or(input, out, PREPARED)),
        Command::Evaluate { input, baseline_only } => {
            evaluate_models(config, &input_or(input, out, PREPARED), *baseline_only)
        }
        Command::Predict { input, model } => {
            predict_users(config, &input_or(input, out, PREPARED), &input_or(model, out, MODEL))
        }
        Command::Analyze { input, groups } => analyze(config, &input_or(input, out, PREPARED), groups.as_deref()),
        Command::Embed { input, groups, method } => {
            embed(config, &input_or(input, out, PREPARED), groups.as_deref(), method.unwrap_or(config.analysis.method))
        }
        Command::LearningCurve { input } => learning(config, &input_or(input, out, PREPARED)),
    }
}

fn input_or(flag: &Option<PathBuf>, out: &Path, default: &str) -> PathBuf {
    flag.clone().unwrap_or_else(|| out.join(default))
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| CliError::io(path, e))
}

/// Writes `name` under the output directory through `f`.
fn emit<F>(config: &Config, name: &str, f: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<File>) -> Result<()>,
{
    let dir = &config.paths.out_dir;
    std::fs::create_dir_all(dir).map_err(|e| CliError::new(Class::Other, format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    let file = File::create(&path).map_err(|e| CliError::new(Class::Other, format!("{}: {e}", path.display())))?;
    let mut w = BufWriter::new(file);
    f(&mut w)?;
    w.flush().map_err(|e| CliError::new(Class::Other, format!("{}: {e}", path.display())))?;
    info!("wrote {}", path.display());
    Ok(())
}

fn io_err(e: std::io::Error) -> CliError {
    CliError::new(Class::Other, e.to_string())
}

fn load_spec(name: &str) -> Result<SynthSpec> {
    match name {
        "default" => Ok(SynthSpec::bundled_default()),
        "strong" => Ok(SynthSpec::bundled_strong()),
        path => Ok(SynthSpec::from_json(&read(Path::new(path))?)?),
    }
}

fn synth(config: &Config, spec: Option<&str>, seed_flag: Option<u64>) -> Result<()> {
    let mut spec = load_spec(spec.unwrap_or(&config.synth.spec))?;
    if let Some(seed) = seed_flag {
        spec.seed = seed;
    }
    let users = generate(&spec)?;
    info!("generated {} users", users.len());
    emit(config, USERS, |w| write_users(w, &users).map_err(io_err))
}

fn questionnaire_key(config: &Config) -> Result<QuestionnaireKey> {
    match &config.paths.questionnaire_key {
        Some(p) => Ok(QuestionnaireKey::from_csv_reader(open(p)?)?),
        None => Ok(bundled::questionnaire_key()),
    }
}

fn ingest(config: &Config, input: &Path) -> Result<()> {
    if !input.exists() {
        return Err(CliError::missing(input));
    }
    let opts = LoadOptions { key: Some(questionnaire_key(config)?), as_of: config.corpus.as_of };
    let loaded = load_users(input, &opts)?;
    for d in &loaded.diagnostics {
        warn!("{}:{}: {}", input.display(), d.line, d.message);
    }
    let (kept, removals) = filter_spam(&loaded.users, &config.spam_policy());
    info!("kept {} of {} users, {} removals", kept.len(), loaded.users.len(), removals.len());
    emit(config, CORPUS, |w| write_users(w, &kept).map_err(io_err))?;
    emit(config, "removals.csv", |w| Ok(write_removal_report(w, &removals)?))?;
    emit(config, "diagnostics.csv", |w| {
        let mut c = csv::Writer::from_writer(w);
        c.write_record(["line", "rejected", "message"])?;
        for d in &loaded.diagnostics {
            c.write_record([d.line.to_string(), d.rejected.to_string(), d.message.clone()])?;
        }
        c.flush().map_err(io_err)
    })
}

fn stopwords(config: &Config) -> Result<Stopwords> {
    match &config.paths.stopwords {
        Some(p) => Stopwords::from_reader(open(p)?).map_err(|e| CliError::io(p, e)),
        None => Ok(Stopwords::default_english()),
    }
}

fn resources(config: &Config) -> Result<EmotionResources> {
    let lexicon = match &config.paths.lexicon {
        Some(p) => {
            let (lex, diags) = AffectLexicon::parse(open(p)?).map_err(|e| CliError::io(p, e))?;
            for d in diags {
                warn!("{}:{}: {}", p.display(), d.line, d.message);
            }
            lex
        }
        None => bundled::lexicon(),
    };
    let emoji = match &config.paths.emoji_map {
        Some(p) => {
            let (map, diags) = EmojiMap::parse(open(p)?).map_err(|e| CliError::io(p, e))?;
            for d in diags {
                warn!("{}:{}: {}", p.display(), d.line, d.message);
            }
            map
        }
        None => bundled::emoji_map(),
    };
    Ok(EmotionResources::new(&lexicon, emoji, stopwords(config)?))
}

fn emotion_corpus(config: &Config, path: Option<&Path>) -> Result<Vec<LabeledText>> {
    match path.or(config.paths.emotion_corpus.as_deref()) {
        Some(p) => Ok(match config.emotion.corpus_format {
            CorpusFormat::Flags => parse_emotion_corpus(open(p)?)?,
            CorpusFormat::Semeval => parse_semeval_ec(open(p)?)?,
        }),
        None => Ok(bundled::emotion_corpus()),
    }
}

fn train_emotion(config: &Config, corpus: Option<&Path>) -> Result<()> {
    if let Some(p) = corpus {
        if !p.exists() {
            return Err(CliError::missing(p));
        }
    }
    let texts = emotion_corpus(config, corpus)?;
    let (clf, report) = train_emotion_classifier(&texts, &resources(config)?, &config.classifier_config())?;
    match report.precision {
        Some(p) => info!("held-out micro precision {p:.4} on {} texts", report.n_test),
        None => warn!("no held-out positives predicted"),
    }
    emit(config, EMOTION_MODEL, |w| w.write_all(clf.to_json().as_bytes()).map_err(io_err))?;
    emit(config, "emotion_report.json", |w| {
        serde_json::to_writer_pretty(&mut *w, &report)?;
        w.write_all(b"\n").map_err(io_err)
    })
}

fn tagger(config: &Config) -> Result<TaggerModel> {
    if let Some(p) = &config.paths.tagger_model {
        return Ok(TaggerModel::from_json(&read(p)?)?);
    }
    if let Some(p) = &config.paths.tagger_corpus {
        let corpus = parse_tagged_corpus(open(p)?)?;
        let (model, report) = train_tagger(&corpus, &config.tagger_config())?;
        if let Some(acc) = report.heldout_accuracy {
            info!("tagger held-out accuracy {acc:.4}");
        }
        return Ok(model);
    }
    Ok(TaggerModel::rule_based())
}

fn featurize(config: &Config, input: &Path, emotion_model: Option<&Path>) -> Result<()> {
    if !input.exists() {
        return Err(CliError::missing(input));
    }
    let res = resources(config)?;
    let emotion = match emotion_model.or(config.paths.emotion_model.as_deref()) {
        Some(p) => EmotionClassifier::from_json(&read(p)?)?,
        None => train_emotion_classifier(&emotion_corpus(config, None)?, &res, &config.classifier_config())?.0,
    };
    let pre = Preprocessor {
        stopwords: stopwords(config)?,
        tagger: tagger(config)?,
        fallback: config.fallback(),
        emotion,
        resources: res,
    };
    let loaded = load_users(input, &LoadOptions { key: Some(questionnaire_key(config)?), as_of: config.corpus.as_of })?;
    for d in &loaded.diagnostics {
        warn!("{}:{}: {}", input.display(), d.line, d.message);
    }
    let prepared = pre.prepare(&loaded.users)?;
    info!("prepared {} users", prepared.len());
    emit(config, PREPARED, |w| write_prepared(w, &prepared).map_err(io_err))
}

fn prepared(path: &Path) -> Result<Vec<PreparedUser>> {
    let users = read_prepared(open(path)?)?;
    if users.is_empty() {
        return Err(CliError::data(format!("{} holds no users", path.display())));
    }
    Ok(users)
}

fn train_model(config: &Config, input: &Path) -> Result<()> {
    let users = prepared(input)?;
    let model = train(&users, &config.features, &config.model_config(), config.stage_seed(stream::TRAIN))?;
    info!("trained {} chains on {} users", model.holistic.chains.len(), users.len());
    emit(config, MODEL, |w| w.write_all(model.to_json().as_bytes()).map_err(io_err))
}

fn evaluate_models(config: &Config, input: &Path, baseline_only: bool) -> Result<()> {
    let users = prepared(input)?;
    let mut eval_config = config.eval_config(stream::EVALUATE);
    eval_config.baseline_only |= baseline_only;
    let eval = evaluate(&users, &eval_config)?;
    match eval.mean_holistic_rmse() {
        Some(hm) => info!(
            "mean rmse: holistic {hm:.4}, independent {:.4}, baseline {:.4}",
            eval.mean_independent_rmse().unwrap_or(f64::NAN),
            eval.mean_baseline_rmse()
        ),
        None => info!("mean rmse: baseline {:.4}", eval.mean_baseline_rmse()),
    }
    emit(config, "trait_report.csv", |w| Ok(write_trait_report(w, &eval)?))?;
    emit(config, "model_report.csv", |w| Ok(write_model_report(w, &eval)?))?;
    emit(config, "oof_predictions.csv", |w| Ok(write_predictions(w, &eval)?))
}

fn predict_users(config: &Config, input: &Path, model_path: &Path) -> Result<()> {
    let model = TrainedModel::from_json(&read(model_path)?)?;
    model.check_layout(&config.features)?;
    let users = prepared(input)?;
    let preds = predict(&model, &users)?;
    emit(config, "predictions.csv", |w| Ok(write_prediction_csv(w, &preds)?))
}

fn labels(users: &[PreparedUser]) -> Result<Vec<TraitProfile>> {
    users
        .iter()
        .map(|u| u.label.ok_or_else(|| CliError::data(format!("user `{}` has no trait label", u.handle))))
        .collect()
}

/// Reads `user,group`; the header row is optional.
fn read_groups(path: &Path) -> Result<BTreeMap<String, String>> {
    let mut r = csv::ReaderBuilder::new().has_headers(false).from_reader(open(path)?);
    let mut out = BTreeMap::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        if rec.len() != 2 {
            return Err(CliError::data(format!("{} line {}: expected user,group", path.display(), i + 1)));
        }
        if i == 0 && &rec[0] == "user" && &rec[1] == "group" {
            continue;
        }
        out.insert(rec[0].to_string(), rec[1].to_string());
    }
    Ok(out)
}

fn analyze(config: &Config, input: &Path, groups: Option<&Path>) -> Result<()> {
    let users = prepared(input)?;
    let profiles = labels(&users)?;
    let stats = trait_stats(&profiles)?;
    emit(config, "trait_stats.csv", |w| Ok(write_trait_stats(w, &stats)?))?;
    let traits = trait_trait_matrix(&profiles)?;
    emit(config, "trait_correlations.csv", |w| Ok(traits.write_wide(w)?))?;

    let refs: Vec<&PreparedUser> = users.iter().collect();
    let y = label_columns(&refs)?;
    let features = FeatureConfig { routes: RouteMap::uniform(Route::All), ..config.features.clone() };
    let pipeline = FeaturePipeline::fit(&refs, &y, &features)?;
    let matrix = pipeline.to_matrix(&pipeline.transform(&refs), &refs)?;
    let report = feature_trait_matrix(&matrix, &profiles)?;
    emit(config, "feature_correlations.csv", |w| Ok(report.write_long(w)?))?;

    if let Some(path) = groups {
        let assignment = read_groups(path)?;
        let names: Vec<&String> = assignment.values().collect::<std::collections::BTreeSet<_>>().into_iter().collect();
        if names.len() != 2 {
            return Err(CliError::data(format!("{} must name exactly two groups, found {}", path.display(), names.len())));
        }
        let pick = |g: &String| -> Vec<TraitProfile> {
            users.iter().zip(&profiles).filter(|(u, _)| assignment.get(&u.handle) == Some(g)).map(|(_, p)| *p).collect()
        };
        let cmp = group_compare(&pick(names[0]), &pick(names[1]))?;
        info!("group a = {}, group b = {}", names[0], names[1]);
        emit(config, "group_means.csv", |w| Ok(write_group_means(w, &cmp)?))?;
        emit(config, "group_cdfs.csv", |w| Ok(write_group_cdfs(w, &cmp)?))?;
    }
    Ok(())
}

fn embed(config: &Config, input: &Path, groups: Option<&Path>, method: EmbedMethod) -> Result<()> {
    let users = prepared(input)?;
    let points: Vec<Vec<f64>> = labels(&users)?.iter().map(|p| p.values().to_vec()).collect();
    let mut embedding = match method {
        EmbedMethod::Tsne => tsne(&points, &config.tsne_config())?,
        EmbedMethod::Pca => pca_2d(&points)?,
    };
    if let Some(path) = groups {
        let assignment = read_groups(path)?;
        embedding.labels = users.iter().map(|u| assignment.get(&u.handle).cloned().unwrap_or_default()).collect();
    }
    if let Some(kl) = embedding.final_kl() {
        info!("final KL {kl:.6}");
    }
    let ids: Vec<String> = users.iter().map(|u| u.handle.clone()).collect();
    emit(config, "embedding.csv", |w| Ok(embedding.write_csv(w, &ids)?))?;
    if !embedding.kl_history.is_empty() {
        emit(config, "embedding_kl.csv", |w| {
            let mut c = csv::Writer::from_writer(w);
            c.write_record(["iteration", "kl"])?;
            for (i, kl) in embedding.kl_history.iter().enumerate() {
                c.write_record([(i + 1).to_string(), format!("{kl:.9}")])?;
            }
            c.flush().map_err(io_err)
        })?;
    }
    Ok(())
}

fn learning(config: &Config, input: &Path) -> Result<()> {
    let users = prepared(input)?;
    let lc = &config.learning_curve;
    let points = learning_curve(&users, &lc.fractions, lc.test_fraction, &config.eval_config(stream::LEARNING_CURVE))?;
    for p in &points {
        info!("{:.0}% ({} users): rmse {:.4}", p.fraction * 100.0, p.n_train, p.rmse);
    }
    emit(config, "learning_curve.csv", |w| Ok(write_learning_curve(w, &points)?))
}
