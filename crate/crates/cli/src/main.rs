fn main() {
    std::process::exit(glyph_cli::run(std::env::args_os()));
}
