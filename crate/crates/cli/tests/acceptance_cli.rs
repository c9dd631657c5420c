//! Acceptance criterion 8: matrix and plot commands produce byte-identical
//! outputs regardless of the worker thread count, plus well-formedness of
//! the SVGs they write.

use std::path::Path;
use std::process::Command;

fn run(args: &[&str], dir: &Path) {
    let out = Command::new(env!("CARGO_BIN_EXE_vivi"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs");
    assert!(
        out.status.success(),
        "vivi {args:?}\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn criterion_8_thread_count_determinism() {
    let result = (|| -> Result<(), String> {
        let dir = tempfile::tempdir().unwrap();
        let d = dir.path();
        run(&["simulate", "--n", "300", "--p", "6", "--seed", "21", "--out", "data.csv"], d);
        run(
            &["fit", "--data", "data.csv", "--response", "y", "--model", "forest", "--trees",
              "40", "--seed", "22", "--out", "model.json"],
            d,
        );
        for threads in ["1", "8"] {
            run(
                &["vivi", "--model", "model.json", "--data", "data.csv", "--response", "y",
                  "--importance", "permutation", "--n-perm", "2", "--sample", "40", "--seed",
                  "23", "--threads", threads, "--out", &format!("matrix_t{threads}")],
                d,
            );
            run(
                &["plot", "--kind", "heatmap", "--matrix", &format!("matrix_t{threads}.json"),
                  "--out", &format!("heat_t{threads}")],
                d,
            );
            run(
                &["plot", "--kind", "zpdp", "--matrix", &format!("matrix_t{threads}.json"),
                  "--model", "model.json", "--data", "data.csv", "--response", "y",
                  "--threshold", "0.05", "--grid", "6", "--out", &format!("zig_t{threads}")],
                d,
            );
        }
        for file in ["matrix", "heat", "zig"] {
            for ext in ["json", "csv", "svg"] {
                let one = d.join(format!("{file}_t1.{ext}"));
                let eight = d.join(format!("{file}_t8.{ext}"));
                if !one.exists() {
                    continue; // not every prefix writes every extension
                }
                let a = std::fs::read(&one).map_err(|e| e.to_string())?;
                let b = std::fs::read(&eight).map_err(|e| e.to_string())?;
                if a != b {
                    return Err(format!("{file}.{ext} differs between --threads 1 and 8"));
                }
            }
        }
        // Same command run twice is also byte-identical.
        run(
            &["plot", "--kind", "heatmap", "--matrix", "matrix_t1.json", "--out", "heat_again"],
            d,
        );
        let a = std::fs::read(d.join("heat_t1.svg")).map_err(|e| e.to_string())?;
        let b = std::fs::read(d.join("heat_again.svg")).map_err(|e| e.to_string())?;
        if a != b {
            return Err("re-running the same plot command changed the SVG".into());
        }
        for svg in ["heat_t1.svg", "zig_t1.svg"] {
            let text = std::fs::read_to_string(d.join(svg)).map_err(|e| e.to_string())?;
            roxmltree::Document::parse(&text)
                .map_err(|e| format!("{svg} is not well-formed XML: {e}"))?;
        }
        Ok(())
    })();
    match result {
        Ok(()) => println!("ACCEPTANCE 8 thread-count-determinism: PASS"),
        Err(msg) => {
            println!("ACCEPTANCE 8 thread-count-determinism: FAIL - {msg}");
            panic!("criterion 8 failed: {msg}");
        }
    }
}
