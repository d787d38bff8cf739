fn main() {
    std::process::exit(ctxmt::cli::run(std::env::args_os()));
}
