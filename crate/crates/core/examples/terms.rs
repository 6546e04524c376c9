// Parsing, canonical printing and the total order on ground terms.

use aspui::term::{parse_term, Term};

pub fn run_example() -> anyhow::Result<()> {
    let t = parse_term("assign( alexander , (1,1) )")?;
    println!("canonical: {t}");
    println!("signature: {}", t.signature().expect("function term"));
    assert_eq!(t.to_string(), "assign(alexander,(1,1))");

    let label = parse_term(r#""Table \"one\"""#)?;
    println!("string {label} unquotes to {}", label.unquoted());

    let mut terms: Vec<Term> = ["f(b)", "\"x\"", "c", "-3", "(1,2)", "f(a)", "10"]
        .iter()
        .map(|s| parse_term(s))
        .collect::<Result<_, _>>()?;
    terms.sort();
    let sorted: Vec<String> = terms.iter().map(|t| t.to_string()).collect();
    println!("sorted: {}", sorted.join(" "));
    assert_eq!(sorted.first().map(String::as_str), Some("-3"));

    match parse_term("assign(P,S)") {
        Ok(t) => anyhow::bail!("variables are not ground, yet parsed {t}"),
        Err(e) => println!("rejected non-ground input: {e}"),
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run_example()
}
