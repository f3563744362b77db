fn main() {
    std::process::exit(inpaint_lab::run(std::env::args_os()));
}
