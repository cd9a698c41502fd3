fn main() {
    std::process::exit(bivsurv::cli::run(std::env::args_os()));
}
