use std::io::{IsTerminal, Read};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};

use cubes::exercises::{builtin_exercises, find_exercise, grade, load_exercise_dir, Exercise, Verdict};
use cubes::frame::CubeFrame;
use cubes::io::{self, Format};
use cubes::lang::normalize_source;
use cubes::render::{render_frame, RenderMode, RenderOptions};
use cubes::repl::{self, Repl};
use cubes::service::{self, AppState, ServiceConfig, ServiceError};
use cubes::wire::Diagnostic;
use cubes::{eval_pipeline, fixtures, parse_pipeline};

const EXIT_INCORRECT: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_EVAL: u8 = 3;
const EXIT_IO: u8 = 4;
const EXIT_BIND: u8 = 5;

#[derive(Parser)]
#[command(name = "cubes", version, about = "Data wrangling with cube-grid data sets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Format {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    #[value(alias = "ascii_cubes", alias = "cubes")]
    AsciiCubes,
    Table,
}

#[derive(clap::Args)]
struct Display {
    /// How to draw frames.
    #[arg(long, value_enum, default_value = "ascii-cubes")]
    mode: ModeArg,
    /// Letters instead of coloured glyphs.
    #[arg(long)]
    no_color: bool,
    #[arg(long, default_value_t = 80)]
    width: usize,
}

impl Display {
    fn options(&self) -> RenderOptions {
        RenderOptions {
            mode: match self.mode {
                ModeArg::AsciiCubes => RenderMode::AsciiCubes,
                ModeArg::Table => RenderMode::Table,
            },
            color: !self.no_color && std::io::stdout().is_terminal(),
            width: self.width,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Interactive pipeline prompt.
    Repl {
        /// CSV or JSON frame; the classroom kit if omitted.
        #[arg(long)]
        data: Option<PathBuf>,
        #[command(flatten)]
        display: Display,
        #[arg(long, env = "EXERCISE_DIR")]
        exercise_dir: Option<PathBuf>,
    },
    /// Run a pipeline script over a data file.
    Run {
        /// Script file (`-` for stdin): a full `data |> ...` pipeline or one stage per line.
        script: PathBuf,
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Output format; defaults to the --out extension, else CSV.
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
    },
    /// Draw a frame.
    Render {
        #[arg(long)]
        data: Option<PathBuf>,
        #[command(flatten)]
        display: Display,
    },
    /// Start the workbench service.
    Serve {
        #[arg(long, env = "LISTEN_ADDR", default_value = "127.0.0.1:7878")]
        listen: String,
        #[arg(long, env = "SESSION_TTL_SECS", default_value_t = 4 * 60 * 60)]
        session_ttl_secs: u64,
        #[arg(long, env = "INSTRUCTOR_TOKEN", hide_env_values = true)]
        instructor_token: Option<String>,
        #[arg(long, env = "FIXTURE_DIR")]
        fixture_dir: Option<PathBuf>,
        #[arg(long, env = "EXERCISE_DIR")]
        exercise_dir: Option<PathBuf>,
        #[arg(long, env = "CORS_ORIGIN", default_value = "*")]
        cors_origin: String,
    },
    /// List or check exercises.
    Exercises {
        #[command(subcommand)]
        action: ExerciseAction,
        #[arg(long, env = "EXERCISE_DIR", global = true)]
        exercise_dir: Option<PathBuf>,
    },
    /// Print a built-in fixture.
    Fixture {
        #[arg(default_value = "figure1")]
        id: String,
        #[arg(long, value_enum, default_value = "csv")]
        format: FormatArg,
    },
}

#[derive(Subcommand)]
enum ExerciseAction {
    List,
    /// Grade an answer file. Exit status 0 means correct.
    Check {
        id: String,
        #[arg(long)]
        answer: PathBuf,
        /// Print the full report as JSON.
        #[arg(long)]
        json: bool,
    },
}

fn fail(code: u8, message: impl std::fmt::Display) -> ExitCode {
    eprintln!("cubes: {message}");
    ExitCode::from(code)
}

fn load_data(path: Option<&Path>) -> Result<CubeFrame, ExitCode> {
    match path {
        None => Ok(fixtures::figure1()),
        Some(p) => io::load(p).map_err(|e| fail(EXIT_IO, e)),
    }
}

fn read_text(path: &Path) -> Result<String, ExitCode> {
    let result = if path == Path::new("-") {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map(|_| s)
    } else {
        std::fs::read_to_string(path)
    };
    result.map_err(|e| fail(EXIT_IO, format!("{}: {e}", path.display())))
}

fn exercise_bank(dir: Option<&Path>) -> Result<Vec<Exercise>, ExitCode> {
    let mut bank = builtin_exercises();
    if let Some(dir) = dir {
        for ex in load_exercise_dir(dir).map_err(|e| fail(EXIT_IO, e))? {
            bank.retain(|e| e.id != ex.id);
            bank.push(ex);
        }
    }
    Ok(bank)
}

fn cmd_run(script: &Path, data: Option<&Path>, out: Option<&Path>, format: Option<FormatArg>) -> ExitCode {
    let (frame, text) = match (load_data(data), read_text(script)) {
        (Ok(f), Ok(t)) => (f, t),
        (Err(code), _) | (_, Err(code)) => return code,
    };
    let source = normalize_source(&text);
    let pipeline = match parse_pipeline(&source) {
        Ok(p) => p,
        Err(e) => {
            eprint!("{}", Diagnostic::from(&e).render(&source));
            return ExitCode::from(EXIT_PARSE);
        }
    };
    let result = match eval_pipeline(&frame, &pipeline) {
        Ok((result, _)) => result,
        Err(e) => {
            eprint!("{}", Diagnostic::from(&e).render(&source));
            return ExitCode::from(EXIT_EVAL);
        }
    };
    let format = format
        .map(Format::from)
        .or(out.map(Format::from_path))
        .unwrap_or(Format::Csv);
    match out {
        Some(path) => match io::save(&result, path, format) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => fail(EXIT_IO, e),
        },
        None => {
            print!("{}", io::render(&result, format));
            ExitCode::SUCCESS
        }
    }
}

fn cmd_serve(config: ServiceConfig) -> ExitCode {
    tracing_subscriber::fmt().with_target(false).with_writer(std::io::stderr).init();
    let runtime = match tokio::runtime::Runtime::new() {
        Ok(rt) => rt,
        Err(e) => return fail(EXIT_IO, e),
    };
    runtime.block_on(async move {
        let listen = config.listen.clone();
        let state = match AppState::new(config) {
            Ok(s) => Arc::new(s),
            Err(e) => return fail(EXIT_IO, e),
        };
        let listener = match service::bind(&listen).await {
            Ok(l) => l,
            Err(e) => return fail(EXIT_BIND, e),
        };
        let local = listener.local_addr().map(|a| a.to_string()).unwrap_or(listen);
        tracing::info!("listening on http://{local}");
        match service::serve(listener, state, service::shutdown_signal()).await {
            Ok(()) => ExitCode::SUCCESS,
            Err(e @ ServiceError::Bind { .. }) => fail(EXIT_BIND, e),
            Err(e) => fail(EXIT_IO, e),
        }
    })
}

fn run(cli: Cli) -> Result<ExitCode, ExitCode> {
    Ok(match cli.command {
        Command::Repl {
            data,
            display,
            exercise_dir,
        } => {
            let frame = load_data(data.as_deref())?;
            let bank = exercise_bank(exercise_dir.as_deref())?;
            let mut session = Repl::new(frame, bank, display.options());
            if std::io::stdin().is_terminal() {
                println!("cubes: type :help for commands, :quit to leave");
            }
            let stdin = std::io::stdin();
            repl::run(&mut session, stdin.lock(), std::io::stdout()).map_err(|e| fail(EXIT_IO, e))?;
            ExitCode::SUCCESS
        }
        Command::Run {
            script,
            data,
            out,
            format,
        } => cmd_run(&script, data.as_deref(), out.as_deref(), format),
        Command::Render { data, display } => {
            let frame = load_data(data.as_deref())?;
            match render_frame(&frame, &display.options()) {
                Ok(text) => {
                    print!("{text}");
                    ExitCode::SUCCESS
                }
                Err(e) => fail(EXIT_IO, e),
            }
        }
        Command::Serve {
            listen,
            session_ttl_secs,
            instructor_token,
            fixture_dir,
            exercise_dir,
            cors_origin,
        } => cmd_serve(ServiceConfig {
            listen,
            session_ttl: Duration::from_secs(session_ttl_secs),
            instructor_token: instructor_token.filter(|t| !t.is_empty()),
            fixture_dir,
            exercise_dir,
            cors_origin,
        }),
        Command::Exercises {
            action,
            exercise_dir,
        } => {
            let bank = exercise_bank(exercise_dir.as_deref())?;
            match action {
                ExerciseAction::List => {
                    for ex in &bank {
                        println!("{:<22} {:<22} {}", ex.id, ex.expected.mode(), ex.prompt);
                    }
                    ExitCode::SUCCESS
                }
                ExerciseAction::Check { id, answer, json } => {
                    let Some(ex) = find_exercise(&bank, &id) else {
                        return Err(fail(EXIT_IO, format!("no exercise `{id}`")));
                    };
                    let text = read_text(&answer)?;
                    let report = grade(ex, text.trim_end());
                    if json {
                        println!("{}", serde_json::to_string_pretty(&report).expect("reports serialize"));
                    } else {
                        println!("{}", report.summary_line());
                        if let Some(e) = &report.error {
                            print!("{}", e.render(text.trim_end()));
                        }
                        for hit in &report.triggered_pitfalls {
                            println!("hint: {}", hit.message);
                        }
                    }
                    match report.verdict {
                        Verdict::Correct => ExitCode::SUCCESS,
                        Verdict::Incorrect => ExitCode::from(EXIT_INCORRECT),
                        Verdict::ParseError => ExitCode::from(EXIT_PARSE),
                    }
                }
            }
        }
        Command::Fixture { id, format } => match fixtures::by_id(&id) {
            Some(f) => {
                print!("{}", io::render(&f, format.into()));
                ExitCode::SUCCESS
            }
            None => fail(EXIT_IO, format!("no fixture `{id}`")),
        },
    })
}

fn main() -> ExitCode {
    run(Cli::parse()).unwrap_or_else(|code| code)
}
