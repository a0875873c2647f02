//! `mwem`: differentially private synthetic data from horizontally
//! partitioned categorical data, computed by three parties over secret shares.

pub mod report;

use std::net::{SocketAddr, TcpListener};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

use mwem_mpc::data::{aggregate_shares, build_local_histogram, load_csv, sample_synthetic, share_histogram, write_csv, Record, Schema, ShareFile};
use mwem_mpc::dp::PlainNoise;
use mwem_mpc::eval::{tv_distance, workload_error, LogisticRegression, LrParams};
use mwem_mpc::mwem::{gen_workload, run_mwem, Averaging, CentralBackend, Histogram, HistogramDomain, LinearQuery, MwemConfig, MwemOutput};
use mwem_mpc::par::Exec;
use mwem_mpc::session::{establish, serve, with_local_cluster, ClusterOptions, Coordinator};
use mwem_mpc::sharing::{PartyConfig, PartyId, RandomSource, RepShare};
use mwem_mpc::transport::{resolve, TcpOptions, TcpTransport};
use mwem_mpc::{Error, FixedPointCodec, Result};

use report::Report;

#[derive(Parser, Debug)]
#[command(name = "mwem", version, about = "Private synthetic data with three-party secret sharing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one computing party until the coordinator finishes.
    Party(PartyArgs),
    /// Turn a holder's CSV into one share file per computing party.
    Share(ShareArgs),
    /// Run MWEM and write synthetic records plus a report.
    Synthesize(SynthArgs),
    /// Score a synthetic CSV against the real data.
    Evaluate(EvalArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Mode {
    Central,
    Mpc,
}

#[derive(Args, Debug)]
struct TapeArg {
    /// Deterministic randomness tape (test builds only; voids privacy).
    #[cfg(feature = "pinned-tape")]
    #[arg(long, value_name = "PATH")]
    pinned_tape: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PartyArgs {
    #[arg(long)]
    id: u8,
    /// Address to accept connections on; defaults to this party's entry in --peers.
    #[arg(long)]
    listen: Option<String>,
    /// Listen addresses of parties 0, 1 and 2.
    #[arg(long, value_delimiter = ',', required = true)]
    peers: Vec<String>,
    /// Share files addressed to this party, one per holder.
    #[arg(long, value_delimiter = ',', required = true)]
    input: Vec<PathBuf>,
    #[arg(long, default_value_t = 16)]
    frac_bits: u32,
    /// Seed for this party's private randomness (default: OS entropy).
    #[arg(long)]
    seed: Option<u64>,
    /// Seconds to wait for peers.
    #[arg(long, default_value_t = 30)]
    timeout: u64,
    #[command(flatten)]
    tape: TapeArg,
}

#[derive(Args, Debug)]
struct ShareArgs {
    #[arg(long)]
    schema: PathBuf,
    /// The holder's local records.
    #[arg(long)]
    input: PathBuf,
    /// Output directory for the three share files.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    holder: u64,
    #[arg(long, default_value_t = 16)]
    frac_bits: u32,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[arg(long, value_enum, default_value_t = Mode::Central)]
    mode: Mode,
    #[arg(long)]
    schema: PathBuf,
    /// Real records. Required except for mpc mode against remote parties.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Party addresses; mpc mode coordinates remote parties when given,
    /// otherwise it runs the three parties in-process.
    #[arg(long, value_delimiter = ',')]
    peers: Vec<String>,
    /// Public record count, needed with --peers.
    #[arg(long)]
    records: Option<usize>,
    #[arg(long)]
    epsilon: f64,
    #[arg(long, default_value_t = 10)]
    iterations: usize,
    #[arg(long, default_value_t = 400)]
    queries: usize,
    /// Seeds the workload, the noise and the sampler. Without it the noise
    /// comes from the OS and the workload uses seed 0.
    #[arg(long)]
    seed: Option<u64>,
    /// Synthetic CSV output.
    #[arg(long)]
    out: PathBuf,
    /// Report file (default: stdout).
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, default_value_t = 16)]
    frac_bits: u32,
    /// Average A_0..A_{T-1} instead of A_1..A_T.
    #[arg(long)]
    literal_average: bool,
    /// Split the input round-robin among this many holders (in-process mpc).
    #[arg(long, default_value_t = 1)]
    holders: usize,
    #[arg(long, default_value_t = 30)]
    timeout: u64,
    #[command(flatten)]
    tape: TapeArg,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long)]
    schema: PathBuf,
    /// Real records.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    synthetic: PathBuf,
    #[arg(long, default_value_t = 400)]
    queries: usize,
    /// Workload seed; must match the one used to synthesize.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Parses the command line, runs the subcommand and maps errors to exit codes.
pub fn run() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let r = match cli.command {
        Command::Party(a) => cmd_party(a),
        Command::Share(a) => cmd_share(a),
        Command::Synthesize(a) => cmd_synthesize(a),
        Command::Evaluate(a) => cmd_evaluate(a),
    };
    match r {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mwem: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

/// Independent sub-seed for one use of the master seed.
fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.next_u64()
}

const STREAM_WORKLOAD: u64 = 1;
const STREAM_NOISE: u64 = 2;
const STREAM_SHARES: u64 = 3;
const STREAM_PARTIES: u64 = 4;
const STREAM_SAMPLE: u64 = 5;

fn os_seed() -> u64 {
    rand::rng().next_u64()
}

fn codec(frac_bits: u32) -> Result<FixedPointCodec> {
    FixedPointCodec::new(frac_bits)
}

fn resolve_peers(peers: &[String]) -> Result<Vec<SocketAddr>> {
    if peers.len() != 3 {
        return Err(Error::Argument(format!("--peers needs three addresses, got {}", peers.len())));
    }
    peers.iter().map(|p| resolve(p)).collect()
}

#[cfg(feature = "pinned-tape")]
fn load_tape(t: &TapeArg) -> Result<Option<mwem_mpc::tape::Tape>> {
    t.pinned_tape.as_deref().map(mwem_mpc::tape::Tape::load).transpose()
}

fn randomness(_t: &TapeArg) -> Result<RandomSource> {
    #[cfg(feature = "pinned-tape")]
    if let Some(tape) = load_tape(_t)? {
        warn!("pinned randomness tape in use: outputs are not private");
        return Ok(RandomSource::Tape(tape));
    }
    Ok(RandomSource::Joint)
}

fn plain_noise(_t: &TapeArg, codec: &FixedPointCodec, seed: u64) -> Result<PlainNoise> {
    #[cfg(feature = "pinned-tape")]
    if let Some(tape) = load_tape(_t)? {
        warn!("pinned randomness tape in use: outputs are not private");
        return Ok(PlainNoise::Tape { tape, frac_bits: codec.frac_bits() });
    }
    let _ = codec;
    Ok(PlainNoise::Rng(ChaCha12Rng::seed_from_u64(seed)))
}

fn tape_in_use(_t: &TapeArg) -> bool {
    #[cfg(feature = "pinned-tape")]
    if _t.pinned_tape.is_some() {
        return true;
    }
    false
}

fn cmd_party(a: PartyArgs) -> Result<()> {
    let id = PartyId::new(a.id)?;
    let codec = codec(a.frac_bits)?;
    let peers = resolve_peers(&a.peers)?;
    let mut files = Vec::with_capacity(a.input.len());
    for p in &a.input {
        let f = ShareFile::read(p)?;
        if f.party != id {
            return Err(Error::Format(format!("{} holds shares for party {}, this is party {id}", p.display(), f.party)));
        }
        if f.frac_bits != codec.frac_bits() {
            return Err(Error::Format(format!("{} was written with {} fractional bits, party runs with {}", p.display(), f.frac_bits, codec.frac_bits())));
        }
        files.push(f);
    }
    let histogram = aggregate_shares(&files)?;

    let listen = match &a.listen {
        Some(l) => resolve(l)?,
        None => peers[id.index()],
    };
    let listener = TcpListener::bind(listen).map_err(|e| Error::Communication(format!("cannot listen on {listen}: {e}")))?;
    let opts = TcpOptions { connect_timeout: Duration::from_secs(a.timeout) };
    let transport = TcpTransport::party(id.raw(), listener, &peers, true, &opts)?;
    let config = PartyConfig { codec, local_seed: a.seed.unwrap_or_else(os_seed), randomness: randomness(&a.tape)? };
    let mut party = establish(id, transport, config)?;
    info!("party {id}: session established, {} cells from {} holder(s)", histogram.len(), files.len());
    let summary = serve(&mut party, &histogram, Exec::default())?;
    info!(
        "party {id}: done after {} selections, {} measurements; sent {} elements in {} messages",
        summary.selections, summary.measurements, summary.stats.elements_sent, summary.stats.messages_sent
    );
    Ok(())
}

fn cmd_share(a: ShareArgs) -> Result<()> {
    let codec = codec(a.frac_bits)?;
    let schema = Schema::load(&a.schema)?;
    let domain = schema.domain()?;
    let rows = load_csv(&a.input, &schema)?;
    let h = build_local_histogram(&rows, &domain)?;
    let mut rng = match a.seed {
        Some(s) => ChaCha12Rng::seed_from_u64(derive_seed(s, STREAM_SHARES)),
        None => ChaCha12Rng::from_os_rng(),
    };
    std::fs::create_dir_all(&a.out).map_err(|e| Error::Data(format!("cannot create {}: {e}", a.out.display())))?;
    for f in share_histogram(&h, &codec, a.holder, &mut rng) {
        let path = a.out.join(share_file_name(a.holder, f.party));
        f.write(&path)?;
        println!("{}", path.display());
    }
    info!("holder {}: {} records over {} cells", a.holder, rows.len(), domain.size());
    Ok(())
}

fn share_file_name(holder: u64, party: PartyId) -> String {
    format!("holder{holder}-party{party}.shr")
}

fn cmd_synthesize(a: SynthArgs) -> Result<()> {
    let codec = codec(a.frac_bits)?;
    let mut config = MwemConfig::new(a.epsilon, a.iterations)?;
    if a.literal_average {
        config.averaging = Averaging::Literal;
    }
    if a.queries == 0 {
        return Err(Error::Argument("--queries must be positive".into()));
    }
    if a.holders == 0 {
        return Err(Error::Argument("--holders must be positive".into()));
    }
    let remote = !a.peers.is_empty();
    if remote && a.mode == Mode::Central {
        return Err(Error::Argument("--peers only applies to --mode mpc".into()));
    }
    let schema = Schema::load(&a.schema)?;
    let domain = schema.domain()?;
    let workload_seed = a.seed.unwrap_or(0);
    let workload = gen_workload(&domain, a.queries, derive_seed(workload_seed, STREAM_WORKLOAD))?;

    let real: Option<(Vec<Record>, Histogram)> = match &a.input {
        Some(p) => {
            let rows = load_csv(p, &schema)?;
            let h = build_local_histogram(&rows, &domain)?;
            Some((rows, h))
        }
        None if remote => None,
        None => return Err(Error::Argument("--input is required unless coordinating remote parties".into())),
    };
    let n = match (a.records, &real) {
        (Some(n), _) => n,
        (None, Some((rows, _))) => rows.len(),
        (None, None) => return Err(Error::Argument("--records is required with --peers".into())),
    };
    if n == 0 {
        return Err(Error::Data("no records".into()));
    }

    let clock = Instant::now();
    let out = match (a.mode, &real) {
        (Mode::Central, Some((_, h))) => {
            let noise = plain_noise(&a.tape, &codec, a.seed.map_or_else(os_seed, |s| derive_seed(s, STREAM_NOISE)))?;
            let mut backend = CentralBackend::new(&workload, h, noise, config.exec)?;
            run_mwem(&config, n as f64, &workload, &mut backend)?
        }
        (Mode::Mpc, _) if remote => {
            let peers = resolve_peers(&a.peers)?;
            let opts = TcpOptions { connect_timeout: Duration::from_secs(a.timeout) };
            let transport = TcpTransport::coordinator(&peers, &opts)?;
            let mut coord = Coordinator::connect(transport, codec, domain.size())?;
            coord.load_workload(&workload)?;
            let out = run_mwem(&config, n as f64, &workload, &mut coord)?;
            coord.shutdown()?;
            out
        }
        (Mode::Mpc, Some((rows, _))) => run_local_cluster(&a, &config, codec, &domain, &workload, rows, n)?,
        (_, None) => unreachable!("input checked above"),
    };
    let total = clock.elapsed();

    let sample_seed = a.seed.map_or_else(os_seed, |s| derive_seed(s, STREAM_SAMPLE));
    let synthetic = sample_synthetic(&out.distribution, &domain, n, sample_seed)?;
    write_csv(&a.out, &schema, &synthetic)?;

    let mut report = Report::default();
    report.set("mode", format!("{:?}", a.mode).to_lowercase());
    report.set("transport", if remote { "tcp" } else if a.mode == Mode::Mpc { "in-process" } else { "none" });
    report.set("epsilon", a.epsilon);
    report.set("iterations", a.iterations);
    report.set("queries", a.queries);
    report.set("records", n);
    report.set("cells", domain.size());
    report.set("frac_bits", codec.frac_bits());
    report.set("averaging", if a.literal_average { "literal" } else { "updated" });
    report.set("workload_seed", workload_seed);
    report.set("seed", a.seed.map_or("os".to_string(), |s| s.to_string()));
    if tape_in_use(&a.tape) {
        report.set("pinned_tape", "yes");
    }
    for (i, it) in out.iterations.iter().enumerate() {
        report.set(format!("iteration.{}.index", i + 1), it.index);
        report.set(format!("iteration.{}.measurement", i + 1), format!("{:.9}", it.measurement));
    }
    if let Some((rows, h)) = &real {
        add_metrics(&mut report, &schema, &workload, h, rows, out.distribution.weights(), &synthetic, n)?;
    }
    add_timings(&mut report, &out, total);
    report.emit(a.report.as_deref())
}

fn run_local_cluster(
    a: &SynthArgs,
    config: &MwemConfig,
    codec: FixedPointCodec,
    domain: &HistogramDomain,
    workload: &[LinearQuery],
    rows: &[Record],
    n: usize,
) -> Result<MwemOutput> {
    // each holder shares its own rows; the parties add the files up
    let mut share_rng = match a.seed {
        Some(s) => ChaCha12Rng::seed_from_u64(derive_seed(s, STREAM_SHARES)),
        None => ChaCha12Rng::from_os_rng(),
    };
    let mut per_party: [Vec<ShareFile>; 3] = Default::default();
    for holder in 0..a.holders {
        let mine: Vec<Record> = rows.iter().skip(holder).step_by(a.holders).cloned().collect();
        let h = build_local_histogram(&mine, domain)?;
        for f in share_histogram(&h, &codec, holder as u64, &mut share_rng) {
            per_party[f.party.index()].push(f);
        }
    }
    let shares: [Vec<RepShare>; 3] = [
        aggregate_shares(&per_party[0])?,
        aggregate_shares(&per_party[1])?,
        aggregate_shares(&per_party[2])?,
    ];
    let mut opts = match a.seed {
        Some(s) => ClusterOptions::seeded(codec, derive_seed(s, STREAM_PARTIES)),
        None => ClusterOptions::fresh(codec),
    };
    opts.randomness = randomness(&a.tape)?;
    opts.exec = config.exec;
    let (out, summaries) = with_local_cluster(shares, &opts, |c| {
        c.load_workload(workload)?;
        run_mwem(config, n as f64, workload, c)
    })?;
    for (id, s) in summaries.iter().enumerate() {
        info!("party {id}: sent {} elements in {} messages, {} values opened", s.stats.elements_sent, s.stats.messages_sent, s.open_log.len());
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn add_metrics(
    report: &mut Report,
    schema: &Schema,
    workload: &[LinearQuery],
    real: &Histogram,
    real_rows: &[Record],
    synth_weights: &[f64],
    synth_rows: &[Record],
    n: usize,
) -> Result<()> {
    let exec = Exec::default();
    let real_f = real.as_f64();
    let err = workload_error(&real_f, synth_weights, workload, n as f64, exec)?;
    let uniform = vec![n as f64 / real.len() as f64; real.len()];
    let base = workload_error(&real_f, &uniform, workload, n as f64, exec)?;
    report.metric("workload_error_max", err.max);
    report.metric("workload_error_avg", err.avg);
    report.metric("uniform_error_max", base.max);
    report.metric("uniform_error_avg", base.avg);
    let total = n as f64;
    let p: Vec<f64> = real_f.iter().map(|c| c / total).collect();
    let q: Vec<f64> = synth_weights.iter().map(|c| c / total).collect();
    report.metric("tv_distance", tv_distance(&p, &q)?);
    if schema.label().is_some() {
        match LogisticRegression::train(schema, synth_rows, &LrParams::default(), exec).and_then(|m| m.auc(real_rows)) {
            Ok(auc) => report.metric("auc", auc),
            Err(e) => warn!("AUC not reported: {e}"),
        }
    }
    Ok(())
}

fn add_timings(report: &mut Report, out: &MwemOutput, total: Duration) {
    report.timing("answers_ms", out.timings.answers);
    report.timing("select_ms", out.timings.select);
    report.timing("measure_ms", out.timings.measure);
    report.timing("update_ms", out.timings.update);
    report.timing("total_ms", total);
}

fn cmd_evaluate(a: EvalArgs) -> Result<()> {
    let schema = Schema::load(&a.schema)?;
    let domain = schema.domain()?;
    let real = load_csv(&a.input, &schema)?;
    let synth = load_csv(&a.synthetic, &schema)?;
    if real.is_empty() {
        return Err(Error::Data(format!("{} has no records", a.input.display())));
    }
    if a.queries == 0 {
        return Err(Error::Argument("--queries must be positive".into()));
    }
    let workload = gen_workload(&domain, a.queries, derive_seed(a.seed, STREAM_WORKLOAD))?;
    let h_real = build_local_histogram(&real, &domain)?;
    let h_synth = build_local_histogram(&synth, &domain)?;
    // compare at the real data's scale
    let scale = real.len() as f64 / synth.len().max(1) as f64;
    let synth_weights: Vec<f64> = h_synth.as_f64().iter().map(|c| c * scale).collect();

    let mut report = Report::default();
    report.set("records", real.len());
    report.set("synthetic_records", synth.len());
    report.set("cells", domain.size());
    report.set("queries", a.queries);
    report.set("workload_seed", a.seed);
    add_metrics(&mut report, &schema, &workload, &h_real, &real, &synth_weights, &synth, real.len())?;
    report.emit(a.out.as_deref())
}

