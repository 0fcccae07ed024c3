//! Generates a condition-tagged mini-dataset, runs the builtin estimator on
//! every sequence, and prints the per-condition evaluation table.
//!
//!     cargo run --release --example synthetic_dataset

use std::collections::BTreeMap;

use panoflow::backend::BuiltinMatcher;
use panoflow::cfe::{cyclic_estimate, CfeMode};
use panoflow::flow::{epe, read_flo, EvalReport};
use panoflow::spherical::{convert_to_360, RotationSpec};
use panoflow::synthetic::{
    gen_dataset, DatasetManifest, SceneSpec, TextureKind, WeatherCondition,
};

fn main() -> panoflow::Result<()> {
    let manifest = DatasetManifest {
        width: 128,
        scenes: vec![SceneSpec {
            texture: TextureKind::ProceduralNoise,
            seed: 5,
        }],
        rotations: vec![RotationSpec::new(12.0, 3.0, 0.0)],
        conditions: vec![
            WeatherCondition::Sunny,
            WeatherCondition::Cloud,
            WeatherCondition::Fog,
            WeatherCondition::Rain,
        ],
    };
    let root = std::env::temp_dir().join("panoflow-example-dataset");
    let sequences = gen_dataset(&manifest, &root)?;
    println!("generated {} sequences under {}", sequences.len(), root.display());

    let matcher = BuiltinMatcher::new();
    let mut per_condition = BTreeMap::new();
    for seq in &sequences {
        let i1 = panoflow::flow::load_png(seq.dir.join("frame_0001.png"))?;
        let i2 = panoflow::flow::load_png(seq.dir.join("frame_0002.png"))?;
        let gt = convert_to_360(&read_flo(seq.dir.join("flow_0001.flo"))?)?;
        let pred = cyclic_estimate(&matcher, &i1, &i2, CfeMode::Default)?;
        let stats = epe(&pred, &gt, None)?;
        per_condition.insert(seq.condition.name().to_string(), stats);
    }
    print!("{}", EvalReport::from_conditions(per_condition)?.to_text_table());
    Ok(())
}
