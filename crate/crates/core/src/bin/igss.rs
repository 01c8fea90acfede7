use std::process::ExitCode;

use igss::cli::{main_with, EXIT_INTERNAL};

fn main() -> ExitCode {
    let code = std::panic::catch_unwind(|| {
        let (mut out, mut err) = (std::io::stdout().lock(), std::io::stderr().lock());
        main_with(std::env::args_os(), &mut out, &mut err)
    })
    .unwrap_or(EXIT_INTERNAL);
    ExitCode::from(code as u8)
}
