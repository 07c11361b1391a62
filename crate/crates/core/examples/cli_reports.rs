//! Driving the command-line interface in-process.

use std::collections::HashMap;

fn main() {
    let data = concat!(env!("CARGO_MANIFEST_DIR"), "/data");
    let env = HashMap::new();
    for args in [
        vec!["registry"],
        vec!["mine", &format!("{data}/plots/emotional.seq")],
        vec!["-o", "csv", "stats", &format!("{data}/passages.jsonl")],
        vec!["mine", &format!("{data}/plots/daily_life.seq"), "--support", "0.95", "--max-alt", "1"],
    ] {
        let mut argv = vec!["proppkit".to_string()];
        argv.extend(args.iter().map(|s| s.to_string()));
        let out = proppkit::cli::run(argv, &env);
        println!("$ proppkit {}  (exit {})", args.join(" "), out.code);
        print!("{}", out.stdout.lines().filter(|l| !l.starts_with('#')).take(8).map(|l| format!("{l}\n")).collect::<String>());
        print!("{}", out.stderr);
        println!();
    }
}
