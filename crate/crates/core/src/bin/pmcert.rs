fn main() {
    std::process::exit(pmcert::cli::run(std::env::args_os()));
}
