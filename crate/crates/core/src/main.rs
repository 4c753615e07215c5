use std::io::Write;

fn main() {
    let (code, text) = ordsys::cli::run(std::env::args_os());
    if code == ordsys::cli::EXIT_USAGE {
        eprint!("{text}");
    } else {
        print!("{text}");
        let _ = std::io::stdout().flush();
    }
    std::process::exit(code);
}
