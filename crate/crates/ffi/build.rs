//! Regenerates `include/pairembed.h` from the crate's public surface.
//!
//! The generated header is committed so C users do not need the Rust
//! toolchain; a failed regeneration (e.g. no cbindgen available) keeps the
//! committed copy and only warns.

use std::path::PathBuf;

fn main() {
    let crate_dir = PathBuf::from(std::env::var("CARGO_MANIFEST_DIR").unwrap());
    let header = crate_dir.join("include").join("pairembed.h");
    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=cbindgen.toml");

    match cbindgen::generate(&crate_dir) {
        Ok(bindings) => {
            bindings.write_to_file(&header);
        }
        Err(err) => {
            println!("cargo:warning=cbindgen failed, keeping committed header: {err}");
        }
    }
}
