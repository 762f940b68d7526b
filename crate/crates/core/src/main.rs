use std::fs;
use std::io::{self, BufRead, IsTerminal, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::{Arc, Mutex};

use clap::{Args, Parser, Subcommand};
use rust_decimal::Decimal;

use egg::bank::{
    audit, display_check, scheme_by_name, BankStore, Check, DisplayOptions, Identity, NameBook, Preferences, PublicKey, Validity,
};
use egg::cache::Cache;
use egg::net::{client_execute, encode_op, NetLink, ProxyOp, Rolodex, Server, ServerConfig};
use egg::shell::{delta, load_plugins, Runtime, Session};

#[derive(Parser)]
#[command(name = "egg", version, about = "Caches, the egg shell, egg currency and cache servers")]
struct Cli {
    /// Home directory; `~` is built from it. Defaults to $EGG_HOME, then the current directory.
    #[arg(long, global = true)]
    home: Option<PathBuf>,
    /// Rolodex file. Defaults to <home>/.egg/rolodex when present.
    #[arg(long, global = true)]
    rolodex: Option<PathBuf>,
    /// Directory of plug-ins, one subdirectory with a plugin.toml each.
    #[arg(long, global = true)]
    plugins: Option<PathBuf>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Interactive shell.
    Repl,
    /// Execute a file line by line.
    Run { script: PathBuf },
    /// Execute one line and print the result.
    Eval { line: String },
    /// Print the cache a hatch file describes.
    Hatch { file: PathBuf },
    /// Serve a cache to paying clients.
    Serve(ServeArgs),
    /// Send the value of an expression to a server for execution.
    Call(CallArgs),
    /// Manage a bank.
    Bank(BankArgs),
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, default_value_t = 33366)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    bind: String,
    /// Identity file of the server's bank.
    #[arg(long)]
    key: PathBuf,
    /// Preference table deciding whose currency is accepted.
    #[arg(long)]
    prefs: PathBuf,
    /// Hatch file whose cache is exported.
    #[arg(long)]
    root: PathBuf,
    /// Bank directory to record earnings in.
    #[arg(long)]
    bank: Option<PathBuf>,
}

#[derive(Args)]
struct CallArgs {
    #[arg(long)]
    host: String,
    #[arg(long)]
    port: u16,
    /// The server: a rolodex name or a public key in hex.
    #[arg(long)]
    server: String,
    /// Bank directory paying for the call.
    #[arg(long)]
    wallet: PathBuf,
    #[arg(long, default_value = "1.0")]
    fee: Decimal,
    /// Apply one operation to the exported cache instead: root, join,
    /// meet, select, deep, put or eval. EXPR is the operand (a datum for
    /// select and deep, a shell line for eval).
    #[arg(long)]
    op: Option<String>,
    /// Shell expression whose value is sent.
    #[arg(default_value = "")]
    expr: String,
}

#[derive(Args)]
struct BankArgs {
    /// Bank directory. Defaults to <home>/.egg/bank.
    #[arg(long)]
    dir: Option<PathBuf>,
    /// Show start dates in check displays.
    #[arg(long)]
    dates: bool,
    #[command(subcommand)]
    op: BankOp,
}

#[derive(Subcommand)]
enum BankOp {
    /// Create a bank with a new key pair.
    Init {
        #[arg(long)]
        name: String,
        #[arg(long, default_value = "ed25519")]
        scheme: String,
    },
    /// Print the bank's public key.
    Key,
    /// Issue new currency.
    Mint {
        amount: Decimal,
        #[arg(long)]
        to: Option<String>,
        #[arg(long, default_value_t = 365)]
        days: i64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Give a whole check away.
    Give {
        tracking: String,
        #[arg(long)]
        to: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pay part of a check; the change stays in the vault.
    Pay {
        tracking: String,
        amount: Decimal,
        #[arg(long)]
        to: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Accept a check (file containing hex).
    Deposit { file: PathBuf },
    /// Cash a payment and return it towards its minter.
    Cash {
        tracking: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the vault and receipts.
    List,
    /// Look for copied or forged checks in the vault, receipts and files.
    Audit { files: Vec<PathBuf> },
    /// Install a preference table.
    Prefs { file: PathBuf },
}

fn home_dir(cli: &Cli) -> PathBuf {
    cli.home
        .clone()
        .or_else(|| std::env::var_os("EGG_HOME").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

fn runtime(cli: &Cli) -> Result<Arc<Runtime>, String> {
    let mut rt = Runtime::standard();
    if let Some(dir) = &cli.plugins {
        load_plugins(&mut rt, dir).map_err(|e| e.to_string())?;
    }
    Ok(Arc::new(rt))
}

fn rolodex(cli: &Cli) -> Result<Rolodex, String> {
    match &cli.rolodex {
        Some(p) => Rolodex::load(p).map_err(|e| e.to_string()),
        None => {
            let p = home_dir(cli).join(".egg").join("rolodex");
            if p.exists() {
                Rolodex::load(&p).map_err(|e| e.to_string())
            } else {
                Ok(Rolodex::new())
            }
        }
    }
}

fn session(cli: &Cli) -> Result<Session, String> {
    let rt = runtime(cli)?;
    let mut s = Session::with_home(rt, &home_dir(cli));
    rolodex(cli)?.install(&mut s);
    let wallet = home_dir(cli).join(".egg").join("bank");
    if let Ok(bank) = BankStore::new(&wallet).open() {
        let names = rolodex(cli)?.name_book();
        s.set_remote(Box::new(NetLink { wallet: Arc::new(Mutex::new(bank)), names, fee: Decimal::ONE }));
    }
    Ok(s)
}

fn print_result(s: &Session, c: &Cache) {
    let text = s.render(c);
    if !text.is_empty() {
        println!("{text}");
    }
}

fn repl(mut s: Session) -> ExitCode {
    let stdin = io::stdin();
    let interactive = stdin.is_terminal();
    let mut pending = String::new();
    loop {
        if interactive {
            print!("{}", if pending.is_empty() { "egg> " } else { "...> " });
            let _ = io::stdout().flush();
        }
        let mut line = String::new();
        match stdin.lock().read_line(&mut line) {
            Ok(0) | Err(_) => break,
            Ok(_) => {}
        }
        let line = line.trim_end_matches(['\n', '\r']);
        if let Some(head) = line.strip_suffix('\\') {
            pending.push_str(head);
            continue;
        }
        pending.push_str(line);
        let text = std::mem::take(&mut pending);
        match s.execute_line(&text) {
            Ok(c) => print_result(&s, &c),
            Err(e) => eprintln!("{e}"),
        }
    }
    ExitCode::SUCCESS
}

fn resolve_key(book: &Rolodex, who: &str) -> Result<PublicKey, String> {
    book.key_of(who).map_or_else(|| who.parse().map_err(|_| format!("{who}: not in the rolodex and not a key")), Ok)
}

fn emit_check(c: &Check, out: &Option<PathBuf>) -> Result<(), String> {
    match out {
        Some(p) => fs::write(p, c.to_hex() + "\n").map_err(|e| format!("{}: {e}", p.display())),
        None => {
            println!("{}", c.to_hex());
            Ok(())
        }
    }
}

fn read_check(path: &Path) -> Result<Check, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    Check::from_hex(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn bank_cmd(cli: &Cli, args: &BankArgs) -> Result<(), String> {
    let dir = args.dir.clone().unwrap_or_else(|| home_dir(cli).join(".egg").join("bank"));
    let store = BankStore::new(&dir);
    let book = rolodex(cli)?;
    if let BankOp::Init { name, scheme } = &args.op {
        let scheme = scheme_by_name(scheme).ok_or_else(|| format!("unknown scheme {scheme}"))?;
        let bank = store.init(&Identity::generate(name, scheme)).map_err(|e| e.to_string())?;
        println!("{}", bank.public_key());
        return Ok(());
    }
    let mut bank = store.open().map_err(|e| e.to_string())?;
    let mut names: NameBook = book.name_book();
    names.insert(bank.public_key(), &bank.identity().name);
    let opts = if args.dates { DisplayOptions::default() } else { DisplayOptions::without_date() };
    let err = |e: egg::bank::BankError| e.to_string();
    match &args.op {
        BankOp::Init { .. } => unreachable!(),
        BankOp::Key => println!("{}", bank.public_key()),
        BankOp::Mint { amount, to, days, out } => {
            let to = match to {
                Some(t) => resolve_key(&book, t)?,
                None => bank.public_key(),
            };
            let c = bank.mint(*amount, Some(Validity::from_start(bank.now(), *days)), to).map_err(err)?;
            eprintln!("{}", display_check(&c, &names, &opts));
            if to != bank.public_key() {
                emit_check(&c, out)?;
            }
        }
        BankOp::Give { tracking, to, out } => {
            let c = bank.transfer_gift(tracking, resolve_key(&book, to)?).map_err(err)?;
            eprintln!("{}", display_check(&c, &names, &opts));
            emit_check(&c, out)?;
        }
        BankOp::Pay { tracking, amount, to, out } => {
            let (p, change) = bank.pay(tracking, *amount, resolve_key(&book, to)?).map_err(err)?;
            eprintln!("{}", display_check(&p, &names, &opts));
            if let Some(ch) = change {
                eprintln!("change {} {}", ch.tracking(), display_check(&ch, &names, &opts));
            }
            emit_check(&p, out)?;
        }
        BankOp::Deposit { file } => {
            let t = bank.deposit(read_check(file)?).map_err(err)?;
            println!("{t}");
        }
        BankOp::Cash { tracking, out } => {
            let c = bank.cash_and_return(tracking).map_err(err)?;
            eprintln!("{}", display_check(&c, &names, &opts));
            emit_check(&c, out)?;
        }
        BankOp::List => {
            for c in bank.vault() {
                println!("{} {}", c.tracking(), display_check(c, &names, &opts));
            }
            for c in bank.receipts() {
                println!("receipt {} {}", c.tracking(), display_check(c, &names, &opts));
            }
        }
        BankOp::Audit { files } => {
            let extra: Vec<Check> = files.iter().map(|f| read_check(f)).collect::<Result<_, _>>()?;
            let report = audit(bank.vault().chain(bank.receipts()).chain(&extra));
            for f in &report.findings {
                println!("{f:?}");
            }
            if !report.is_clean() {
                return Err(format!("{} finding(s)", report.findings.len()));
            }
            println!("clean");
        }
        BankOp::Prefs { file } => {
            let text = fs::read_to_string(file).map_err(|e| format!("{}: {e}", file.display()))?;
            Preferences::parse(&text).map_err(|e| e.to_string())?;
            fs::write(store.prefs_path(), text).map_err(|e| e.to_string())?;
        }
    }
    store.save(&bank).map_err(|e| e.to_string())
}

fn serve(cli: &Cli, args: &ServeArgs) -> Result<(), String> {
    let rt = runtime(cli)?;
    let identity = egg::bank::load_identity(&args.key).map_err(|e| e.to_string())?;
    let prefs = Preferences::parse(&fs::read_to_string(&args.prefs).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    if prefs.is_empty() {
        eprintln!("egg serve: the preference table is empty; every payment will be refused");
    }
    let store = args.bank.as_ref().map(BankStore::new);
    let mut bank = match &store {
        Some(s) if s.exists() => s.open().map_err(|e| e.to_string())?,
        Some(s) => s.init(&identity).map_err(|e| e.to_string())?,
        None => egg::bank::Bank::new(identity.clone()),
    };
    if bank.public_key() != identity.public {
        return Err("--bank belongs to a different key".into());
    }
    bank.set_preferences(prefs);
    let book = rolodex(cli)?;
    let mut s = Session::sandboxed(rt.clone());
    book.install(&mut s);
    let hatch = s.load_hatch_file(&args.root).map_err(|e| e.to_string())?;
    drop(s);
    let root = Cache::singleton(hatch.datum, hatch.contents);
    let mut cfg = ServerConfig::new(rt, bank, book.name_book(), root);
    cfg.store = store;
    let server = Server::bind((args.bind.as_str(), args.port), cfg).map_err(|e| e.to_string())?;
    eprintln!("egg serve: listening on {} as {}", server.local_addr().map_err(|e| e.to_string())?, identity.public);
    server.run();
    Ok(())
}

fn call_op(s: &mut Session, op: &str, operand: &str) -> Result<ProxyOp, String> {
    let u = &s.runtime().universe.clone();
    let mut cache = || s.execute_line(operand).map_err(|e| e.to_string());
    Ok(match op {
        "root" => ProxyOp::Root,
        "join" => ProxyOp::Join(cache()?),
        "meet" => ProxyOp::Meet(cache()?),
        "put" => ProxyOp::Put(cache()?),
        "select" => ProxyOp::Select(delta(u, operand).map_err(|e| e.to_string())?),
        "deep" => ProxyOp::DeepSelect(delta(u, operand).map_err(|e| e.to_string())?),
        "eval" => ProxyOp::Eval(operand.to_owned()),
        other => return Err(format!("unknown operation {other}")),
    })
}

fn call(cli: &Cli, args: &CallArgs) -> Result<ExitCode, String> {
    let book = rolodex(cli)?;
    let server = resolve_key(&book, &args.server)?;
    let store = BankStore::new(&args.wallet);
    let mut wallet = store.open().map_err(|e| e.to_string())?;
    let mut s = session(cli)?;
    let x = match &args.op {
        None => s.execute_line(&args.expr).map_err(|e| e.to_string())?,
        Some(op) => {
            let op = call_op(&mut s, op, &args.expr)?;
            encode_op(&s.runtime().universe, &op)
        }
    };
    let u = &s.runtime().universe;
    let addr = u
        .datum([("host", args.host.as_str()), ("port", args.port.to_string().as_str()), ("person", args.server.as_str())])
        .map_err(|e| e.to_string())?;
    let payment = wallet.mint_payment(args.fee, server).map_err(|e| e.to_string())?;
    let scheme = wallet.identity().scheme().clone();
    let outcome = client_execute(u, scheme.as_ref(), &addr, &x, &payment);
    let code = match outcome {
        Ok((receipt, result)) => {
            let mut names = book.name_book();
            names.insert(wallet.public_key(), &wallet.identity().name);
            eprintln!("receipt {}", display_check(&receipt, &names, &DisplayOptions::without_date()));
            wallet.deposit(receipt).map_err(|e| e.to_string())?;
            print_result(&s, &result);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("egg call: {e}");
            print_result(&s, &e.to_cache(u));
            ExitCode::from(e.status() as u8)
        }
    };
    store.save(&wallet).map_err(|e| e.to_string())?;
    Ok(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Cmd::Repl => session(&cli).map(repl),
        Cmd::Run { script } => session(&cli).map(|mut s| {
            let report = s.run_script(script);
            for (_, c) in &report.outputs {
                print_result(&s, c);
            }
            for f in &report.failures {
                eprintln!("{f}");
            }
            ExitCode::from(report.status() as u8)
        }),
        Cmd::Eval { line } => session(&cli).and_then(|mut s| {
            let c = s.execute_line(line).map_err(|e| e.to_string())?;
            print_result(&s, &c);
            Ok(ExitCode::SUCCESS)
        }),
        Cmd::Hatch { file } => session(&cli).and_then(|mut s| {
            let h = s.load_hatch_file(file)?;
            println!("{}", egg::shell::render_display(&s.runtime().universe, &h.contents, &h.fields));
            Ok(ExitCode::SUCCESS)
        }),
        Cmd::Serve(args) => serve(&cli, args).map(|()| ExitCode::SUCCESS),
        Cmd::Call(args) => call(&cli, args),
        Cmd::Bank(args) => bank_cmd(&cli, args).map(|()| ExitCode::SUCCESS),
    };
    outcome.unwrap_or_else(|e| {
        eprintln!("egg: {e}");
        ExitCode::FAILURE
    })
}
