use std::fmt::Write as _;
use std::path::Path;

use blinkwatch_core::cascade::Detection;
use serde_json::json;

use crate::config::RunConfig;
use crate::error::Result;
use crate::io::{load_cascade, read_pgm, write_atomic};
use crate::pipeline::{analyze, Analysis, Models};

fn rect_line(label: &str, d: &Detection) -> String {
    let (cx, cy) = d.center();
    format!(
        "{label} x={} y={} w={} h={} center=({cx:.1}, {cy:.1}) score={:.4}\n",
        d.rect.x, d.rect.y, d.rect.w, d.rect.h, d.score
    )
}

pub fn render(a: &Analysis) -> String {
    let Some(face) = &a.face else {
        return "no face\n".into();
    };
    let mut s = rect_line("face", face);
    for (label, eye) in [("left_eye", &a.left_eye), ("right_eye", &a.right_eye)] {
        match eye {
            Some(d) => s.push_str(&rect_line(label, d)),
            None => {
                let _ = writeln!(s, "{label} none");
            }
        }
    }
    match a.pitch_deg {
        Some(p) => {
            let _ = writeln!(s, "pitch_deg {p:.4}");
        }
        None => s.push_str("pitch_deg none\n"),
    }
    s
}

pub fn run(image: &Path, cfg: &RunConfig) -> Result<()> {
    let models = Models {
        face: load_cascade(cfg.face_model()?)?,
        eye: load_cascade(cfg.eye_model()?)?,
    };
    let img = read_pgm(image)?;
    let analysis = analyze(&models, cfg, &img)?;
    print!("{}{}", cfg.echo_commented(), render(&analysis));
    if let Some(out) = &cfg.out {
        let doc = json!({
            "config": cfg,
            "image": image,
            "result": analysis,
        });
        let text = serde_json::to_string_pretty(&doc).expect("report serializes") + "\n";
        write_atomic(out, text.as_bytes())?;
    }
    Ok(())
}
