use std::io::{self, Write};
use std::process::ExitCode;

fn main() -> ExitCode {
    let env_cap = std::env::var(lipcap::DEPTH_CAP_ENV).ok();
    let stdout = io::stdout();
    let mut out = io::BufWriter::new(stdout.lock());
    let status = lipcap::run(std::env::args_os(), env_cap.as_deref(), &mut out, &mut io::stderr());
    let _ = out.flush();
    ExitCode::from(status as u8)
}
