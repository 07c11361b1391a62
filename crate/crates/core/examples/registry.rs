//! The 34-function registry, its revised and new entries, and the legacy list.

use proppkit::taxonomy::{all_functions, legacy_functions, lookup, parse_symbol, FunctionStatus};

fn main() {
    for f in all_functions() {
        let mark = match f.status {
            FunctionStatus::Original => ' ',
            FunctionStatus::Revised => '*',
            FunctionStatus::New => '+',
        };
        println!("{mark} {:<3} {:<22} {}", f.symbol.token(), f.name, f.description);
    }

    let changed = all_functions().iter().filter(|f| f.status != FunctionStatus::Original).count();
    println!("\n{} functions, {changed} revised or new, {} in the legacy list", all_functions().len(), legacy_functions().len());

    let lo = parse_symbol("Lo").expect("Lo is registered");
    println!("Lo -> {} ({:?})", lookup(lo).name, lookup(lo).status);
    println!("Xy -> {:?}", parse_symbol("Xy").unwrap_err());
}
