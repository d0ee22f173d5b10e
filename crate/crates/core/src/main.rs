fn main() {
    std::process::exit(numprobe::report::cli::run(std::env::args_os()));
}
