use fqc_cli::config::RunConfig;
use serde_json::Value;

fn schema() -> Value {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../schema/config.schema.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

fn same(a: &Value, b: &Value) -> bool {
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => x.as_f64() == y.as_f64(),
        (Value::Array(x), Value::Array(y)) => x.len() == y.len() && x.iter().zip(y).all(|(p, q)| same(p, q)),
        _ => a == b,
    }
}

#[test]
fn schema_matches_config() {
    let s = schema();
    let defaults = serde_json::to_value(RunConfig::default()).unwrap();
    let sections = s["properties"].as_object().unwrap();
    let mut names: Vec<&String> = sections.keys().collect();
    let mut expected: Vec<&String> = defaults.as_object().unwrap().keys().collect();
    names.sort();
    expected.sort();
    assert_eq!(names, expected);
    for (name, sec) in sections {
        assert_eq!(sec["additionalProperties"], false, "{name}");
        let props = sec["properties"].as_object().unwrap();
        let dflt = defaults[name].as_object().unwrap();
        let mut a: Vec<&String> = props.keys().collect();
        let mut b: Vec<&String> = dflt.keys().collect();
        a.sort();
        b.sort();
        assert_eq!(a, b, "section {name}");
        for (field, p) in props {
            if let Some(d) = p.get("default") {
                assert!(same(d, &dflt[field]), "{name}.{field}: schema {d} vs {}", dflt[field]);
            }
        }
    }
}

#[test]
fn example_config_parses() {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../schema/example.json")).unwrap();
    let c = RunConfig::parse(&text).unwrap();
    assert_eq!(c.measures.psf_tol, 1e-3);
}
