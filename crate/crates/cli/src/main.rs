fn main() {
    std::process::exit(blowcert::dispatch(std::env::args_os()));
}
