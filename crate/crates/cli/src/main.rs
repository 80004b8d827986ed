fn main() {
    std::process::exit(wavefuse_cli::run(std::env::args_os()));
}
