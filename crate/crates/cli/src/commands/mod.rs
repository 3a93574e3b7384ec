pub mod calibrate;
pub mod measure;
pub mod protocol;
pub mod warranty;

use crate::args::{Cli, Command, ProtocolCommand};
use crate::error::CliResult;
use crate::inputs::InputLog;
use crate::report::ReportEnvelope;

/// Name of a command as it appears in reports.
pub fn command_name(command: &Command) -> &'static str {
    match command {
        Command::Test(_) => "test",
        Command::Calibrate(_) => "calibrate",
        Command::Protocol(ProtocolCommand::Run(_)) => "protocol run",
        Command::Warranty(_) => "warranty",
        Command::Measure(_) => "measure",
        Command::Combine(_) => "combine",
    }
}

/// Runs one command and wraps its payload in a report. The digest covers
/// the parsed arguments, the seed and every file read, but not `--out`.
pub fn dispatch(cli: &Cli) -> CliResult<ReportEnvelope> {
    let mut inputs = InputLog::default();
    inputs.record("arguments", format!("{:?}", cli.command).as_bytes());
    inputs.record("seed", cli.seed.to_string().as_bytes());
    let name = command_name(&cli.command);
    match &cli.command {
        Command::Test(a) => {
            let p = test::run(a, &mut inputs)?;
            ReportEnvelope::new(name, inputs.digest(), &p)
        }
        Command::Calibrate(a) => {
            let p = calibrate::run(a, &mut inputs)?;
            ReportEnvelope::new(name, inputs.digest(), &p)
        }
        Command::Protocol(ProtocolCommand::Run(a)) => {
            let p = protocol::run(a, cli.seed, &mut inputs)?;
            ReportEnvelope::new(name, inputs.digest(), &p)
        }
        Command::Warranty(a) => {
            let p = warranty::run(a, &mut inputs)?;
            ReportEnvelope::new(name, inputs.digest(), &p)
        }
        Command::Measure(a) => {
            let p = measure::run(a, &mut inputs)?;
            ReportEnvelope::new(name, inputs.digest(), &p)
        }
        Command::Combine(a) => {
            let p = measure::combine(a, &mut inputs)?;
            ReportEnvelope::new(name, inputs.digest(), &p)
        }
    }
}
