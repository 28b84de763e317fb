//! Regenerates the bundled geo fixtures:
//!
//!     cargo run -p vago-core --example geo_fixtures -- crates/core/fixtures/geo 0

use std::{env, fs, path::PathBuf, process::ExitCode};

use vago_core::experiments::{generate_geo_fixtures, geo_targets, GeoWorld};

fn main() -> ExitCode {
    let mut args = env::args().skip(1);
    let Some(dir) = args.next().map(PathBuf::from) else {
        eprintln!("usage: geo_fixtures DIR [SEED]");
        return ExitCode::from(2);
    };
    let seed = match args.next().map(|s| s.parse::<u64>()) {
        None => 0,
        Some(Ok(s)) => s,
        Some(Err(e)) => {
            eprintln!("bad seed: {e}");
            return ExitCode::from(2);
        }
    };
    let fixtures = generate_geo_fixtures(&GeoWorld::default(), seed);
    if let Err(e) = fs::create_dir_all(&dir) {
        eprintln!("{}: {e}", dir.display());
        return ExitCode::FAILURE;
    }
    for f in &fixtures {
        let path = dir.join(format!("{}.json", f.city));
        let json = serde_json::to_string_pretty(f).expect("fixtures serialize") + "\n";
        if let Err(e) = fs::write(&path, json) {
            eprintln!("{}: {e}", path.display());
            return ExitCode::FAILURE;
        }
    }
    let t = geo_targets(&fixtures);
    println!(
        "{} fixtures, seed {seed}: C target {:.2} (mean {:.2}, std {:.2}), D target {:.0} (mean {:.0}, std {:.0})",
        fixtures.len(), t.c, t.c_mean, t.c_std, t.d, t.d_mean, t.d_std
    );
    ExitCode::SUCCESS
}
