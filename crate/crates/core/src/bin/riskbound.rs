fn main() {
    std::process::exit(riskbound::cli::run(std::env::args_os()));
}
