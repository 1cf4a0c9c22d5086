fn main() {
    std::process::exit(vdp::run(std::env::args_os()));
}
