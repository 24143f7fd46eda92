use std::process::exit;

fn main() {
    exit(rgcache_cli::run_cli(std::env::args_os()));
}
