fn main() {
    std::process::exit(muhs_core::cli::run(std::env::args_os()));
}
