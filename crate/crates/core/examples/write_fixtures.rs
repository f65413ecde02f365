//! Writes the named construction configs as JSON files into a directory.
//!
//! `cargo run --example write_fixtures -- fixtures`

use bratteli_split::fixtures;

fn main() -> std::io::Result<()> {
    let dir = std::env::args().nth(1).unwrap_or_else(|| "fixtures".into());
    std::fs::create_dir_all(&dir)?;
    for name in ["zhalf", "fibonacci"] {
        let cfg = fixtures::construction_by_name(name).expect("named fixture");
        let text = serde_json::to_string_pretty(&cfg).expect("configs serialize");
        std::fs::write(format!("{dir}/{name}.json"), text + "\n")?;
    }
    Ok(())
}
