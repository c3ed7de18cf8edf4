#![allow(dead_code)]

use std::io::Write;
use std::path::{Path, PathBuf};

use aisclass::config::RunConfig;
use aisclass::pipeline;
use aisclass::synth::{self, SynthConfig, SynthData};

/// Stage files of one synthetic run through split.
pub struct SynthRun {
    pub dir: tempfile::TempDir,
    pub raw: Vec<PathBuf>,
    pub data: SynthData,
    pub cfg: RunConfig,
}

impl SynthRun {
    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    pub fn cleaned(&self) -> PathBuf {
        self.path("cleaned.csv")
    }
    pub fn trajectories(&self) -> PathBuf {
        self.path("trajectories.csv")
    }
    pub fn features(&self) -> PathBuf {
        self.path("features.csv")
    }
    pub fn split(&self) -> PathBuf {
        self.path("split.json")
    }
}

/// Generates the default synthetic fleet and runs clean, segment,
/// featurize and split with `cfg`.
pub fn synth_run(cfg: RunConfig) -> SynthRun {
    let dir = tempfile::tempdir().expect("tempdir");
    let scfg = SynthConfig::default();
    let data = synth::generate(&scfg);
    let raw = synth::write_days(&data, &scfg, &dir.path().join("raw")).expect("write raw days");
    let run = SynthRun { dir, raw, data, cfg };
    pipeline::cmd_clean(&run.raw, &run.cleaned(), None, &run.cfg).expect("clean");
    pipeline::cmd_segment(&run.cleaned(), &run.trajectories(), None, &run.cfg).expect("segment");
    pipeline::cmd_featurize(&run.trajectories(), &run.features(), None, &run.cfg).expect("featurize");
    pipeline::cmd_split(&run.features(), &run.split(), &run.cfg).expect("split");
    run
}

/// Writes straight to stderr so the line shows even when test output is
/// captured.
pub fn report(line: &str) {
    let _ = writeln!(std::io::stderr(), "{line}");
}

pub fn exists(p: &Path) -> bool {
    p.exists()
}
