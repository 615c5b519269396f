use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rrs::analysis::{bench_host, fig2_csv, fig3_csv, fig4_csv, table5_text, CostParams};
use rrs::authority::{SearchStrategy, TrcState};
use rrs::group::{G1Point, Scalar, G1_LEN, SCALAR_LEN};
use rrs::scheme::{sign, trace, verify, Ring, RingSignature, VehicleKeyPair};
use rrs::sim::{run_simulation, SimConfig};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const KEY_FILE_VERSION: u8 = 0x01;

#[derive(Parser)]
#[command(name = "rrs", about = "Revocable ring signatures for vehicular messaging")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SearchArg {
    Linear,
    Binary,
}

impl From<SearchArg> for SearchStrategy {
    fn from(s: SearchArg) -> Self {
        match s {
            SearchArg::Linear => SearchStrategy::Linear,
            SearchArg::Binary => SearchStrategy::Binary,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate an authority keypair: state snapshot, private key, public key.
    Keygen {
        #[arg(long, default_value = "trc.snapshot")]
        snapshot: PathBuf,
        #[arg(long, default_value = "trc.key")]
        key: PathBuf,
        #[arg(long = "pub", default_value = "trc.pub")]
        public: PathBuf,
        /// Deterministic seed; the RRS_SEED env var takes precedence.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Register a vehicle identity and derive its keypair.
    Register {
        #[arg(long, default_value = "trc.snapshot")]
        snapshot: PathBuf,
        #[arg(long, default_value = "trc.key")]
        key: PathBuf,
        #[arg(long)]
        rid: String,
        /// Output path for the vehicle key file.
        #[arg(long)]
        out: PathBuf,
        /// Optional output path for the bare public key.
        #[arg(long = "pub")]
        public: Option<PathBuf>,
    },
    /// Sign a message under a ring.
    Sign {
        /// Vehicle key file of the signer.
        #[arg(long)]
        key: PathBuf,
        /// Ring file; alternatively build one from --member public keys.
        #[arg(long)]
        ring: Option<PathBuf>,
        /// Public key files forming the ring (the signer's key is added
        /// automatically). Repeatable.
        #[arg(long = "member")]
        members: Vec<PathBuf>,
        #[arg(long = "trc-pub")]
        trc_pub: PathBuf,
        #[arg(long)]
        message: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Write the canonical ring actually signed under.
        #[arg(long = "ring-out")]
        ring_out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Verify a ring signature; exits 0 when valid, 1 otherwise.
    Verify {
        #[arg(long)]
        ring: PathBuf,
        #[arg(long = "trc-pub")]
        trc_pub: PathBuf,
        #[arg(long)]
        message: PathBuf,
        #[arg(long)]
        sig: PathBuf,
    },
    /// Trace a valid signature to its signer and registered identity.
    Trace {
        #[arg(long, default_value = "trc.snapshot")]
        snapshot: PathBuf,
        #[arg(long, default_value = "trc.key")]
        key: PathBuf,
        #[arg(long)]
        ring: PathBuf,
        #[arg(long)]
        message: PathBuf,
        #[arg(long)]
        sig: PathBuf,
        #[arg(long, value_enum, default_value = "binary")]
        search: SearchArg,
    },
    /// Revoke a registered key and emit the revocation broadcast.
    Revoke {
        #[arg(long, default_value = "trc.snapshot")]
        snapshot: PathBuf,
        #[arg(long, default_value = "trc.key")]
        key: PathBuf,
        /// Public key file of the vehicle to revoke.
        #[arg(long = "pub")]
        public: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the deterministic fleet simulation.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Directory for summary.csv, samples.csv, events.log, timings.txt;
        /// without it the summary goes to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit the analytical cost curves as CSV.
    Curves {
        #[arg(long)]
        figure: u8,
        /// Ring size for the group-membership comparison curve (figure 3).
        #[arg(long, default_value_t = 10)]
        n: u64,
    },
    /// Print the tracing-complexity table.
    Complexity {
        #[arg(long)]
        table5: bool,
    },
    /// Measure host primitive timings and audit verification op counts.
    Bench {
        #[arg(long, default_value_t = 32)]
        iters: usize,
        #[arg(long)]
        audit: bool,
    },
}

fn effective_seed(flag: Option<u64>) -> Result<Option<u64>, String> {
    if let Ok(v) = std::env::var("RRS_SEED") {
        return v
            .parse::<u64>()
            .map(Some)
            .map_err(|_| format!("RRS_SEED must be a u64, got {v:?}"));
    }
    Ok(flag)
}

fn make_rng(flag: Option<u64>) -> Result<ChaCha20Rng, String> {
    Ok(match effective_seed(flag)? {
        Some(seed) => ChaCha20Rng::seed_from_u64(seed),
        None => ChaCha20Rng::from_entropy(),
    })
}

fn read(path: &Path) -> Result<Vec<u8>, String> {
    fs::read(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), String> {
    fs::write(path, bytes).map_err(|e| format!("{}: {e}", path.display()))
}

fn load_trc(snapshot: &Path, key: &Path) -> Result<TrcState, String> {
    TrcState::from_snapshot(&read(snapshot)?, &read(key)?)
        .map_err(|e| format!("loading authority state: {e}"))
}

fn load_vehicle_key(path: &Path) -> Result<VehicleKeyPair, String> {
    let bytes = read(path)?;
    if bytes.len() != 1 + SCALAR_LEN + G1_LEN || bytes[0] != KEY_FILE_VERSION {
        return Err(format!("{}: not a vehicle key file", path.display()));
    }
    let x = Scalar::decode(&bytes[1..1 + SCALAR_LEN]).map_err(|e| e.to_string())?;
    let y = G1Point::decode(&bytes[1 + SCALAR_LEN..]).map_err(|e| e.to_string())?;
    if G1Point::generator().mul(&x) != y {
        return Err(format!("{}: key file is inconsistent", path.display()));
    }
    Ok(VehicleKeyPair { x, y })
}

fn vehicle_key_bytes(kp: &VehicleKeyPair) -> Vec<u8> {
    let mut out = vec![KEY_FILE_VERSION];
    out.extend_from_slice(&kp.x.encode());
    out.extend_from_slice(&kp.y.encode());
    out
}

fn load_point(path: &Path) -> Result<G1Point, String> {
    G1Point::decode(&read(path)?).map_err(|e| format!("{}: {e}", path.display()))
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::Keygen {
            snapshot,
            key,
            public,
            seed,
        } => {
            let mut rng = make_rng(seed)?;
            let trc = TrcState::new(&mut rng);
            write(&snapshot, &trc.snapshot())?;
            write(&key, &trc.private_key_bytes())?;
            write(&public, &trc.keypair.y_trc.encode())?;
            println!("authority key written: y_trc = {}", hex_prefix(&trc.keypair.y_trc));
        }
        Command::Register {
            snapshot,
            key,
            rid,
            out,
            public,
        } => {
            let mut trc = load_trc(&snapshot, &key)?;
            let kp = trc
                .register_vehicle(rid.as_bytes())
                .map_err(|e| e.to_string())?;
            write(&out, &vehicle_key_bytes(&kp))?;
            if let Some(p) = public {
                write(&p, &kp.y.encode())?;
            }
            write(&snapshot, &trc.snapshot())?;
            println!("registered {rid}: y = {}", hex_prefix(&kp.y));
        }
        Command::Sign {
            key,
            ring,
            members,
            trc_pub,
            message,
            out,
            ring_out,
            seed,
        } => {
            let kp = load_vehicle_key(&key)?;
            let ring = match (ring, members.is_empty()) {
                (Some(path), true) => Ring::decode(&read(&path)?).map_err(|e| e.to_string())?,
                (None, false) => {
                    let mut pts = vec![kp.y];
                    for m in &members {
                        pts.push(load_point(m)?);
                    }
                    Ring::new(pts).map_err(|e| e.to_string())?
                }
                _ => return Err("pass exactly one of --ring or --member…".into()),
            };
            let index = ring
                .position(&kp.y)
                .ok_or("signer key is not a ring member")?;
            let y_trc = load_point(&trc_pub)?;
            let msg = read(&message)?;
            let mut rng = make_rng(seed)?;
            let sig =
                sign(&ring, &kp, index, &y_trc, &msg, &mut rng).map_err(|e| e.to_string())?;
            write(&out, &sig.encode())?;
            if let Some(p) = ring_out {
                write(&p, &ring.encode())?;
            }
            println!("signed under a ring of {}", ring.len());
        }
        Command::Verify {
            ring,
            trc_pub,
            message,
            sig,
        } => {
            let ring = Ring::decode(&read(&ring)?).map_err(|e| e.to_string())?;
            let y_trc = load_point(&trc_pub)?;
            let msg = read(&message)?;
            let sig = RingSignature::decode(&read(&sig)?).map_err(|e| e.to_string())?;
            return Ok(match verify(&ring, &y_trc, &msg, &sig) {
                Ok(true) => {
                    println!("valid");
                    ExitCode::SUCCESS
                }
                _ => {
                    println!("invalid");
                    ExitCode::FAILURE
                }
            });
        }
        Command::Trace {
            snapshot,
            key,
            ring,
            message,
            sig,
            search,
        } => {
            let trc = load_trc(&snapshot, &key)?;
            let ring = Ring::decode(&read(&ring)?).map_err(|e| e.to_string())?;
            let msg = read(&message)?;
            let sig = RingSignature::decode(&read(&sig)?).map_err(|e| e.to_string())?;
            let index =
                trace(&sig, &ring, &trc.keypair.x_trc, &msg).map_err(|e| e.to_string())?;
            let y = ring.members()[index];
            match trc.lookup_identity(&y, search.into()) {
                Some(rid) => println!(
                    "signer index {index}, y = {}, RID = {}",
                    hex_prefix(&y),
                    String::from_utf8_lossy(rid)
                ),
                None => println!(
                    "signer index {index}, y = {} (not registered here)",
                    hex_prefix(&y)
                ),
            }
        }
        Command::Revoke {
            snapshot,
            key,
            public,
            out,
        } => {
            let mut trc = load_trc(&snapshot, &key)?;
            let y = load_point(&public)?;
            let broadcast = trc.revoke(&y).map_err(|e| e.to_string())?;
            write(&out, &broadcast.encode())?;
            write(&snapshot, &trc.snapshot())?;
            println!(
                "revoked {} at epoch {}",
                String::from_utf8_lossy(&broadcast.rid),
                broadcast.epoch
            );
        }
        Command::Simulate { config, out } => {
            let text =
                fs::read_to_string(&config).map_err(|e| format!("{}: {e}", config.display()))?;
            let mut cfg = SimConfig::parse(&text).map_err(|e| e.to_string())?;
            if let Some(seed) = effective_seed(None)? {
                cfg.seed = seed;
            }
            let report = run_simulation(&cfg).map_err(|e| e.to_string())?;
            match out {
                Some(dir) => {
                    fs::create_dir_all(&dir).map_err(|e| format!("{}: {e}", dir.display()))?;
                    write(&dir.join("summary.csv"), report.summary().as_bytes())?;
                    write(&dir.join("samples.csv"), report.samples_csv().as_bytes())?;
                    write(
                        &dir.join("events.log"),
                        (report.event_log.join("\n") + "\n").as_bytes(),
                    )?;
                    // Wall-clock timings are non-deterministic; they live
                    // outside the canonical report files.
                    write(
                        &dir.join("timings.txt"),
                        format!(
                            "wall_sign_us,{:.1}\nwall_verify_us,{:.1}\n",
                            report.wall_sign_us, report.wall_verify_us
                        )
                        .as_bytes(),
                    )?;
                    println!("report written to {}", dir.display());
                }
                None => print!("{}", report.summary()),
            }
        }
        Command::Curves { figure, n } => {
            let params = CostParams::reference();
            match figure {
                2 => print!("{}", fig2_csv(&params)),
                3 => print!("{}", fig3_csv(&params, n)),
                4 => print!("{}", fig4_csv(&params)),
                other => return Err(format!("no figure {other}; expected 2, 3, or 4")),
            }
        }
        Command::Complexity { table5 } => {
            if !table5 {
                return Err("pass --table5".into());
            }
            print!("{}", table5_text(&CostParams::reference()));
        }
        Command::Bench { iters, audit } => {
            let ns: &[usize] = if audit { &[1, 5, 10, 20] } else { &[10] };
            print!("{}", bench_host(iters, ns).render());
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn hex_prefix(p: &G1Point) -> String {
    let enc = p.encode();
    format!("{}…", hex::encode(&enc[..8]))
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
