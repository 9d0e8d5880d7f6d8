//! Lexicon directories and corpus files on disk.

use std::fs;

use sentev::corpus::{load_corpus, write_corpus};
use sentev::featurize::{extract_features, load_lexicons, FeatureGroup};
use sentev::syngen::{generate_corpus, write_synthetic, SynSpec};
use sentev::Error;

#[test]
fn verbs_and_synonyms() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("verbs.txt"), "# verbs\nattack\nKill\n\n").unwrap();
    fs::write(dir.path().join("synonyms.tsv"), "kill\tslay\n").unwrap();
    let lex = load_lexicons(dir.path()).unwrap();
    let verbs: Vec<&str> = lex.verbs.iter().map(String::as_str).collect();
    assert_eq!(verbs, ["attack", "kill", "slay"]);
    assert!(lex.keyphrases.is_empty());
}

#[test]
fn sentiment_and_cues() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("sentiment.tsv"), "horrible\t-4\ngreat\t3\n").unwrap();
    fs::write(dir.path().join("rhetorical.tsv"), "on the other hand\tcontrast\n").unwrap();
    fs::write(dir.path().join("negations.txt"), "not\n").unwrap();
    let lex = load_lexicons(dir.path()).unwrap();
    assert_eq!(lex.sentiment_lexicon["horrible"], -4);
    assert_eq!(lex.rhetorical_cues.len(), 1);
}

#[test]
fn bad_sentiment_strength_names_its_line() {
    for bad in ["0", "6", "-9"] {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("sentiment.tsv"), format!("good\t2\nodd\t{bad}\n")).unwrap();
        match load_lexicons(dir.path()) {
            Err(Error::Record { line, .. }) => assert_eq!(line, 2),
            other => panic!("strength {bad}: {other:?}"),
        }
    }
}

#[test]
fn missing_directory_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    assert!(load_lexicons(&dir.path().join("nope")).is_err());
    assert_eq!(load_lexicons(dir.path()).unwrap(), Default::default());
}

#[test]
fn synthetic_corpus_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let spec = SynSpec::with_labels(10, &[("A", 0.4), ("B", 0.3)], 0.1);
    let corpus = generate_corpus(&spec, 3).unwrap();
    let path = dir.path().join("c.jsonl");
    write_corpus(&corpus, &path).unwrap();
    assert_eq!(load_corpus(&path).unwrap(), corpus);
}

#[test]
fn generated_lexicons_drive_the_features() {
    let dir = tempfile::tempdir().unwrap();
    let spec = SynSpec::with_labels(30, &[("A", 0.5)], 0.0);
    let corpus = write_synthetic(&spec, 1, dir.path()).unwrap();
    let lex = load_lexicons(&dir.path().join("lexicons")).unwrap();
    assert_eq!(lex, spec.lexicons());
    let groups = [FeatureGroup::BaseLexical].into_iter().collect();
    for s in corpus.sentences() {
        let f = extract_features(s, &lex, &groups);
        let triggers: f64 = f.counts.iter().filter(|(k, _)| k.starts_with("V:a-trig")).map(|(_, v)| v).sum();
        assert_eq!(triggers > 0.0, s.is_event());
    }
}

#[test]
fn corpus_errors_name_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.jsonl");
    fs::write(
        &path,
        "{\"doc_id\":\"d\",\"sentence_id\":\"1\",\"source_id\":\"x\",\"date\":\"2003-01-01\",\"tokens\":[\"a\"],\"labels\":[]}\n\
         {\"doc_id\":\"d\",\"sentence_id\":\"2\",\"source_id\":\"x\",\"date\":\"2003-13-01\",\"tokens\":[\"a\"],\"labels\":[]}\n",
    )
    .unwrap();
    match load_corpus(&path) {
        Err(Error::Record { line, field, .. }) => {
            assert_eq!(line, 2);
            assert_eq!(field, "date");
        }
        other => panic!("{other:?}"),
    }
}
