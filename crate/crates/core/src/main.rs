fn main() {
    std::process::exit(plateau_lab::cli::run(std::env::args_os()));
}
