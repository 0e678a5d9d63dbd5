fn main() {
    std::process::exit(metric_ramsey::run(std::env::args_os()));
}
