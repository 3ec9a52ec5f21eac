fn main() {
    std::process::exit(eventwarp::cli::run(std::env::args_os()));
}
