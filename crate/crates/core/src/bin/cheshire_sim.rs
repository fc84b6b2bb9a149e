fn main() {
    let code = cheshire_core::cli::run(std::env::args_os(), &mut std::io::stdout().lock());
    std::process::exit(code);
}
