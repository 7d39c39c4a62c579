//! Rendered prompts carry the reference instruction wording verbatim.

use std::path::Path;

use bench_core::prompting::{Bindings, TemplateId, TemplateSet, PLACEHOLDERS};

const SOURCE: &str = "int main() { return 0; }";
const SPEC: &str = "1. RETURN 0";
const TARGET_CODE: &str = "def main(:\n    return 0";
const ERRORS: &str = "SyntaxError: invalid syntax";

fn bindings() -> Bindings {
    Bindings::new()
        .with("source_code", SOURCE)
        .with("source_language", "C++")
        .with("target_language", "Python")
        .with("pseudocode_content", SPEC)
        .with("target_code", TARGET_CODE)
        .with("err_context", ERRORS)
}

/// (template, text that must appear verbatim, in order)
fn expectations() -> Vec<(TemplateId, Vec<String>)> {
    let tail =
        "Print only the Python code and end with the comment \"End of Code\". Do not give any other explanation.";
    let generate = "The above pseudocode was generated from C++. Generate functionally correct and similar Python code using the pseudocode.";
    vec![
        (
            TemplateId::SpecGen,
            vec![
                SOURCE.to_string(),
                "Give pseudocode for the above C++ code so that the C++ code is reproducible from the pseudocode. Do not give any other explanation except for the pseudocode.".to_string(),
            ],
        ),
        (
            TemplateId::TranslateSpecOnly,
            vec![SPEC.to_string(), generate.to_string(), tail.to_string()],
        ),
        (
            TemplateId::TranslateSpecPlusSource,
            vec![
                SOURCE.to_string(),
                "This is a C++ code.".to_string(),
                SPEC.to_string(),
                generate.to_string(),
                tail.to_string(),
            ],
        ),
        (
            TemplateId::RepairCompile,
            vec![
                TARGET_CODE.to_string(),
                "Above Python has compilation errors. Error Info from Compiler is given below:".to_string(),
                ERRORS.to_string(),
                "Fix the error and print only the Python code and end with the comment \"End of Code\". Do not give any other explanation.".to_string(),
            ],
        ),
    ]
}

fn check_set(name: &str, set: &TemplateSet) -> Result<usize, String> {
    let b = bindings();
    let mut checked = 0;
    for (id, pieces) in expectations() {
        let text = set.render(id, &b).map_err(|e| format!("{name} {id:?}: {e}"))?;
        let mut from = 0;
        for piece in pieces {
            match text[from..].find(&piece) {
                Some(at) => from += at + piece.len(),
                None => return Err(format!("{name} {id:?}: missing or out of order: {piece:?}\n{text}")),
            }
            checked += 1;
        }
        if let Some(p) = PLACEHOLDERS.iter().find(|p| text.contains(&format!("{{{p}}}"))) {
            return Err(format!("{name} {id:?}: residual placeholder {p}"));
        }
    }
    Ok(checked)
}

pub fn check() -> Result<String, String> {
    let builtin = check_set("builtin", &TemplateSet::builtin())?;
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/templates");
    let shipped = TemplateSet::load_dir(&dir).map_err(|e| e.to_string())?;
    check_set("templates/", &shipped)?;
    Ok(format!(
        "{builtin} verbatim fragments across spec-gen, spec-only, spec+source and repair prompts (built-in and shipped files)"
    ))
}
