use std::collections::HashSet;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use aggrodetect::corpus::{parse_chan_thread, parse_jsonl, to_jsonl, RawMessage};
use aggrodetect::embedding::{load_text, save_text, train_sgns_with_progress, EpochStats};
use aggrodetect::features::{suggest_seeds, SeedSet};
use aggrodetect::pipeline::{
    apply_phrases, base_token_docs, learn_phrase_model, load_corpus, load_stopwords, run_classify, run_evaluate,
    run_train, write_report, Bundle, EvalReport, PipelineConfig, Progress, EMBEDDING_FILE, PHRASES_FILE,
    REPORT_JSON_FILE,
};
use aggrodetect::{Error, Result};

#[derive(Parser)]
#[command(name = "aggrodetect", version, about = "Verbal aggression detection for imageboard messages")]
struct Cli {
    /// Pipeline config (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads; 1 makes every stage deterministic.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Replaces the embedding, forest and split seeds.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; overrides the config's.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convert thread dumps or JSONL files into canonical JSONL.
    Ingest {
        /// Input files: thread JSON (`{"posts": [...]}`) or JSONL.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Output file name inside the output directory.
        #[arg(long, default_value = "ingested.jsonl")]
        name: String,
    },
    /// Learn the phrase model from the corpus.
    Phrases,
    /// Train the word embedding from the corpus.
    TrainEmbed,
    /// Train the full bundle.
    Train,
    /// Evaluate the bundle on the held-out split.
    Evaluate,
    /// Classify JSONL messages; reads standard input when no file is given.
    Classify { input: Option<PathBuf> },
    /// Suggest seed candidates by clustering the embedding.
    SuggestSeeds {
        #[arg(long, default_value_t = 8)]
        k: usize,
        #[arg(long, default_value_t = 20)]
        n: usize,
        #[arg(long, default_value_t = 100)]
        max_iter: usize,
    },
    /// Print the table of a saved evaluation report.
    Report {
        /// Report JSON; defaults to the one in the output directory.
        path: Option<PathBuf>,
    },
}

fn load_config(cli: &Cli) -> Result<PipelineConfig> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::Config("--config is required".into()))?;
    if !path.exists() {
        return Err(Error::MissingPath {
            field: "--config".into(),
            path: path.clone(),
        });
    }
    let mut cfg = PipelineConfig::load(path)?;
    if let Some(w) = cli.workers {
        cfg.workers = w;
    }
    if let Some(s) = cli.seed {
        cfg.override_seed(s);
    }
    if let Some(o) = &cli.out {
        cfg.output_dir = o.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn print_epoch(s: &EpochStats) {
    eprintln!("epoch={} loss={:.6} lr={:.6}", s.epoch, s.mean_loss, s.lr);
}

fn create_out(cfg: &PipelineConfig) -> Result<&Path> {
    std::fs::create_dir_all(&cfg.output_dir).map_err(|e| io_err(&cfg.output_dir, e))?;
    Ok(&cfg.output_dir)
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source: e,
    }
}

fn read_messages(path: &Path) -> Result<Vec<RawMessage>> {
    let bytes = std::fs::read(path).map_err(|e| io_err(path, e))?;
    let is_thread = serde_json::from_slice::<serde_json::Value>(&bytes)
        .map(|v| v.get("posts").is_some())
        .unwrap_or(false);
    if is_thread {
        return parse_chan_thread(&bytes);
    }
    let parsed = parse_jsonl(BufReader::new(bytes.as_slice()))?;
    for s in &parsed.skipped {
        eprintln!("skip {}:{}: {}", path.display(), s.line, s.reason);
    }
    Ok(parsed.messages)
}

fn ingest(cfg: &PipelineConfig, inputs: &[PathBuf], name: &str) -> Result<()> {
    let mut all = Vec::new();
    let mut ids = HashSet::new();
    for p in inputs {
        for mut m in read_messages(p)? {
            if m.board.is_empty() {
                m.board = cfg.board.clone().unwrap_or_default();
            }
            if !ids.insert(m.id.clone()) {
                return Err(Error::DuplicateId(m.id));
            }
            all.push(m);
        }
    }
    let path = create_out(cfg)?.join(name);
    let f = std::fs::File::create(&path).map_err(|e| io_err(&path, e))?;
    to_jsonl(BufWriter::new(f), &all).map_err(|e| io_err(&path, e))?;
    eprintln!("wrote {} messages to {}", all.len(), path.display());
    Ok(())
}

fn corpus_tokens(cfg: &PipelineConfig) -> Result<Vec<Vec<String>>> {
    let stoplist = load_stopwords(cfg)?;
    let (corpus, skipped) = load_corpus(cfg)?;
    if skipped > 0 {
        eprintln!("skipped {skipped} malformed corpus lines");
    }
    let texts: Vec<&str> = corpus.iter().map(|m| m.text.as_str()).collect();
    base_token_docs(&texts, cfg.language, &stoplist, cfg.workers)
}

fn run(cli: Cli) -> Result<()> {
    let cfg = load_config(&cli)?;
    match &cli.command {
        Command::Ingest { inputs, name } => ingest(&cfg, inputs, name),
        Command::Phrases => {
            let base = corpus_tokens(&cfg)?;
            let model = learn_phrase_model(&base, &cfg.phrases)?;
            let path = create_out(&cfg)?.join(PHRASES_FILE);
            std::fs::write(&path, model.to_json()).map_err(|e| io_err(&path, e))?;
            for (a, b) in model.phrases() {
                println!("{a}_{b}");
            }
            Ok(())
        }
        Command::TrainEmbed => {
            let base = corpus_tokens(&cfg)?;
            let phrases = learn_phrase_model(&base, &cfg.phrases)?;
            let docs = apply_phrases(&base, &phrases, cfg.workers)?;
            let (model, _) = train_sgns_with_progress(&docs, &cfg.effective_embedding(), print_epoch)?;
            let out = create_out(&cfg)?;
            save_text(&model, &out.join(EMBEDDING_FILE))?;
            std::fs::write(out.join(PHRASES_FILE), phrases.to_json()).map_err(|e| io_err(out, e))?;
            eprintln!("vocabulary {} x {}", model.len(), model.dim());
            Ok(())
        }
        Command::Train => {
            let manifest = run_train(&cfg, |p| match p {
                Progress::Stage(s) => eprintln!("stage={s}"),
                Progress::Epoch(s) => print_epoch(&s),
            })?;
            println!("{}", serde_json::to_string_pretty(&manifest).expect("manifest serializes"));
            Ok(())
        }
        Command::Evaluate => {
            let bundle = Bundle::load(&cfg.output_dir)?;
            let report = run_evaluate(&cfg, &bundle)?;
            write_report(&report, &cfg.output_dir)?;
            print!("{}", report.to_table());
            Ok(())
        }
        Command::Classify { input } => {
            let bundle = Bundle::load(&cfg.output_dir)?;
            let stdout = std::io::stdout();
            let out = BufWriter::new(stdout.lock());
            let skipped = match input {
                Some(p) => {
                    let f = std::fs::File::open(p).map_err(|e| io_err(p, e))?;
                    run_classify(&bundle, BufReader::new(f), out)?
                }
                None => run_classify(&bundle, std::io::stdin().lock(), out)?,
            };
            for s in &skipped {
                eprintln!("skip line {}: {}", s.line, s.reason);
            }
            Ok(())
        }
        Command::SuggestSeeds { k, n, max_iter } => {
            let model = load_text(&cfg.output_dir.join(EMBEDDING_FILE))?;
            cfg.require("seed_path")?;
            let seeds = SeedSet::load(cfg.language, &cfg.seed_path)?;
            let out = std::io::stdout();
            let mut out = out.lock();
            for t in suggest_seeds(&model, *k, seeds.seeds(), *n, *max_iter, cfg.embedding.rng_seed)? {
                writeln!(out, "{t}").map_err(|e| io_err(Path::new("<stdout>"), e))?;
            }
            Ok(())
        }
        Command::Report { path } => {
            let path = path.clone().unwrap_or_else(|| cfg.output_dir.join(REPORT_JSON_FILE));
            let text = std::fs::read_to_string(&path).map_err(|e| io_err(&path, e))?;
            let report: EvalReport =
                serde_json::from_str(&text).map_err(|e| Error::format(e.line(), format!("report: {e}")))?;
            print!("{}", report.to_table());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

