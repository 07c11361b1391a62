use std::io::Write;

fn main() {
    let env = std::env::vars().collect();
    let out = proppkit::cli::run(std::env::args_os(), &env);
    print!("{}", out.stdout);
    eprint!("{}", out.stderr);
    std::io::stdout().flush().ok();
    std::process::exit(out.code);
}
