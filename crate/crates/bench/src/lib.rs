//! Shared fixtures for the benchmarks.

use jingleprint::corpus::{generate, Corpus, CorpusSpec};
use jingleprint::{
    sign_segment, Catalogue, CatalogueEntry, DescriptorParams, FrameSource, Thresholds, Weights,
};

/// Small seeded corpus: 4 jingles over 2 streams of 600 frames at 64x48.
pub fn small_corpus() -> Corpus {
    generate(&CorpusSpec {
        jingles: 4,
        streams: 2,
        frames_per_stream: 600,
        plants_per_jingle: 1,
        seed: 7,
        ..CorpusSpec::default()
    })
    .expect("valid corpus spec")
}

/// Every jingle signed from its first frame with the default parameters.
pub fn catalogue_for(corpus: &Corpus) -> Catalogue {
    let mut cat = Catalogue::new();
    for j in &corpus.jingles {
        let mut src = FrameSource::from_frames(j.frames.clone());
        let vsig = sign_segment(&mut src, 0, 5, 12, &DescriptorParams::default())
            .expect("jingle long enough to sign");
        let entry = CatalogueEntry::new(
            &j.id,
            "bench",
            vsig,
            Weights::default(),
            Thresholds::default(),
        )
        .expect("valid entry");
        cat.add(entry).expect("unique ids");
    }
    cat
}
