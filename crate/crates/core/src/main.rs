fn main() {
    let code = rll_synth::cli::run(std::env::args_os());
    std::process::exit(code);
}
