use std::env;
use std::path::PathBuf;

fn main() {
    let crate_dir = PathBuf::from(env::var("CARGO_MANIFEST_DIR").unwrap());
    let header = crate_dir.join("include").join("rotolab.h");

    let config = cbindgen::Config {
        language: cbindgen::Language::C,
        header: Some("/* C interface for the rotolab library. */".into()),
        include_guard: Some("ROTOLAB_H".into()),
        cpp_compat: true,
        documentation: true,
        ..Default::default()
    };

    match cbindgen::Builder::new()
        .with_crate(&crate_dir)
        .with_config(config)
        .generate()
    {
        Ok(bindings) => {
            bindings.write_to_file(header);
        }
        // header generation must not break `cargo check` in tooling that
        // parses the crate without full macro expansion
        Err(e) => println!("cargo:warning=failed to generate rotolab.h: {e}"),
    }
    println!("cargo:rerun-if-changed=src/lib.rs");
}
