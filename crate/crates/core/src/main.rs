fn main() {
    env_logger::init();
    std::process::exit(stark::cli::run(std::env::args_os()));
}
