fn main() {
    std::process::exit(pxshrink::cli::dispatch(std::env::args_os()));
}
