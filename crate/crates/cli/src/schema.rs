//! Input schemas printed by `--schema`.

const DAG: &str = r#"DAG document (unknown fields are rejected; rationals are "p", "p/q" or decimals):
{"vertices": [{"id": "a", "mass": "2"}, ...],
 "edges": [{"src": "a", "dst": "b", "c": "1"}, ...]}
"c" is the flow constant of the edge and defaults to "1"."#;

const LATTICE: &str = r#"Lattice document (covers suffice; the order is closed transitively on load):
{"elements": ["e0", "e1", ...], "leq": [["e0", "e1"], ...]}"#;

const X: &str = r#"Class weights, one positive rational per interval class (--x):
{"class_weights": {"0": "3/2", "1": "1", ...}}"#;

const Z: &str = r#"Polarization, one (re, im) pair per interval class (--z):
{"class_z": {"0": ["1", "1"], ...}}"#;

const QUIVER: &str = r#"Quiver representation document (matrix entries are (re, im) decimal strings,
dim(dst) rows by dim(src) columns; theta defaults to "0" and must satisfy Σ theta·dim = 0):
{"vertices": [{"id": "1", "dim": 1, "mass": "1", "theta": "0"}, ...],
 "arrows": [{"src": "1", "dst": "2", "matrix": [[["0.7071", "0"]]]}, ...]}"#;

const TABLE: &str = r#"Trajectory CSV as written by `itlog simulate`: lines starting with '#' are
skipped; the header is "t" followed by one column per block eigenvalue, named
"h[id]" (dimension one) or "h[id]_k"."#;

const RESULT: &str = "Any JSON result or CSV trajectory written by itlog; it is recomputed from the\nembedded input and options and compared field by field.";

pub fn schema(command: &str) -> String {
    let parts: Vec<&str> = match command {
        "grade-dag" => vec![DAG],
        "hn" => vec![LATTICE, Z],
        "weight" | "iterate" => vec![DAG, "or", LATTICE, X],
        "simulate" | "asymptotic" => vec![DAG, "or", QUIVER],
        "fit" => vec![TABLE, "Optional --model: DAG or quiver document.", DAG],
        _ => vec![RESULT],
    };
    format!("{}\n", parts.join("\n\n"))
}
