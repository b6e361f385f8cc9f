fn main() {
    let code = qcrib::cli::run(std::env::args_os(), &mut std::io::stdout().lock());
    std::process::exit(code);
}
