use fcgroup_cli::check::selftest;

fn main() {
    let outcomes = selftest(&[]);
    for o in &outcomes {
        println!("{}", o.line());
    }
    let failed: Vec<u32> = outcomes
        .iter()
        .filter(|o| !o.passed)
        .map(|o| o.id)
        .collect();
    println!(
        "acceptance: {} of {} criteria pass",
        outcomes.len() - failed.len(),
        outcomes.len()
    );
    if outcomes.len() != 14 || !failed.is_empty() {
        eprintln!("failing criteria: {failed:?}");
        std::process::exit(1);
    }
}
