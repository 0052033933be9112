//! End-to-end realization of one UD sentence: features are converted to
//! morphological tags, lemmas are reinflected, and the resulting word bag is
//! ordered with the language model.
//!
//! Failures never lose a sentence. A token whose prediction is unusable
//! keeps its lemma; a sentence with malformed features skips reinflection;
//! a sentence that cannot be ordered at all is emitted as its lemmas in id
//! order.

use crate::conllu::{Token, UdSentence};
use crate::lm::NGramModel;
use crate::morphmap::{convert, MappingTable};
use crate::order::{realize_order, Method, OrderConfig};
use crate::reinflect::Seq2SeqModel;

/// Shared, read-only models for realizing sentences.
#[derive(Clone, Copy)]
pub struct Realizer<'m> {
    pub lm: &'m NGramModel,
    /// Without a reinflector, lemmas are used as surface forms.
    pub reinflector: Option<&'m Seq2SeqModel>,
    pub table: &'m MappingTable,
    pub order: &'m OrderConfig,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SentenceRealization {
    pub sent_id: String,
    pub text: String,
    /// Surface forms in token-id order, before ordering.
    pub forms: Vec<String>,
    /// `None` when the sentence fell back to its lemmas.
    pub method: Option<Method>,
    pub lm_score: Option<f64>,
    pub warnings: Vec<String>,
}

impl SentenceRealization {
    pub fn fell_back(&self) -> bool {
        self.method.is_none()
    }
}

/// Lemmas joined with spaces in id order.
pub fn lemma_fallback(sentence: &UdSentence) -> String {
    sentence
        .tokens_by_id()
        .iter()
        .map(|t| t.lemma.as_str())
        .collect::<Vec<_>>()
        .join(" ")
}

impl Realizer<'_> {
    fn inflect_token(&self, token: &Token, warnings: &mut Vec<String>) -> String {
        let Some(model) = self.reinflector else {
            return token.lemma.clone();
        };
        if token.upos == "PUNCT" {
            return token.lemma.clone();
        }
        let conv = convert(&token.upos, &token.feats, self.table);
        match model.predict(&token.lemma, &conv.tag) {
            Ok(form) if !form.is_empty() && !form.contains(char::is_whitespace) => form,
            Ok(form) => {
                warnings.push(format!(
                    "token {}: unusable prediction {:?} for {:?}, keeping lemma",
                    token.id, form, token.lemma
                ));
                token.lemma.clone()
            }
            Err(e) => {
                warnings.push(format!("token {}: {}, keeping lemma", token.id, e));
                token.lemma.clone()
            }
        }
    }

    /// Surface forms in id order.
    pub fn inflect(&self, sentence: &UdSentence) -> (Vec<String>, Vec<String>) {
        let mut warnings = Vec::new();
        let tokens = sentence.tokens_by_id();
        if let Some(bad) = tokens.iter().find(|t| t.has_malformed_feats()) {
            warnings.push(format!(
                "token {} has malformed features; realizing from raw lemmas",
                bad.id
            ));
            return (tokens.iter().map(|t| t.lemma.clone()).collect(), warnings);
        }
        let forms = tokens.iter().map(|t| self.inflect_token(t, &mut warnings)).collect();
        (forms, warnings)
    }

    pub fn realize(&self, sentence: &UdSentence) -> SentenceRealization {
        let (forms, mut warnings) = self.inflect(sentence);
        let words: Vec<&str> = forms.iter().flat_map(|f| f.split_whitespace()).collect();
        match realize_order(&words, self.lm, self.order) {
            Ok(r) => {
                warnings.extend(r.ordering.diagnostics.iter().map(|d| d.to_string()));
                SentenceRealization {
                    sent_id: sentence.sent_id.clone(),
                    text: r.text,
                    forms,
                    method: Some(r.ordering.method),
                    lm_score: Some(r.ordering.lm_score.total),
                    warnings,
                }
            }
            Err(e) => {
                warnings.push(format!("ordering failed ({}); emitting lemmas", e));
                SentenceRealization {
                    sent_id: sentence.sent_id.clone(),
                    text: lemma_fallback(sentence),
                    forms,
                    method: None,
                    lm_score: None,
                    warnings,
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conllu::parse_conllu;
    use crate::lm::{build_vocab, train_lm};
    use crate::reinflect::synth::english_morphology;
    use crate::reinflect::{train, ModelConfig, TrainConfig};

    fn lm() -> NGramModel {
        let c = ["the boy reads a book", "the boys read books", "a girl walked home"];
        train_lm(&c, 3, &build_vocab(&c)).unwrap()
    }

    fn sentence(block: &str) -> UdSentence {
        parse_conllu(block).value.sentences.remove(0)
    }

    fn realizer<'m>(lm: &'m NGramModel, table: &'m MappingTable, cfg: &'m OrderConfig) -> Realizer<'m> {
        Realizer {
            lm,
            reinflector: None,
            table,
            order: cfg,
        }
    }

    #[test]
    fn one_token_sentence() {
        let (m, t, c) = (lm(), MappingTable::english(), OrderConfig::default());
        let s = sentence("1\tgo\tgo\tVERB\t_\t_\t0\troot\t_\t_\n");
        let r = realizer(&m, &t, &c).realize(&s);
        assert_eq!(r.text, "Go .");
        assert_eq!(r.method, Some(Method::Exhaustive));
    }

    #[test]
    fn punctuation_only_falls_back_to_lemmas() {
        let (m, t, c) = (lm(), MappingTable::english(), OrderConfig::default());
        let s = sentence("1\t!\t!\tPUNCT\t_\t_\t2\tpunct\t_\t_\n2\t?\t?\tPUNCT\t_\t_\t0\troot\t_\t_\n");
        let r = realizer(&m, &t, &c).realize(&s);
        assert!(r.fell_back());
        assert_eq!(r.text, "! ?");
    }

    #[test]
    fn malformed_features_use_lemmas() {
        let (m, t, c) = (lm(), MappingTable::english(), OrderConfig::default());
        let split = english_morphology(60, 0.0, 3);
        let cfg = ModelConfig {
            hidden: 8,
            embed_dim: 4,
            ..ModelConfig::default()
        };
        let model = Seq2SeqModel::for_data(&split.train, cfg, 1);
        let model = train(
            model,
            &split.train,
            &TrainConfig {
                epochs: 1,
                ..TrainConfig::default()
            },
        )
        .unwrap()
        .model;
        let s = sentence(
            "1\tboy\tboy\tNOUN\t_\tNumber|Case=Nom\t2\tnsubj\t_\t_\n2\tread\tread\tVERB\t_\tTense=Past\t0\troot\t_\t_\n",
        );
        let r = Realizer {
            reinflector: Some(&model),
            ..realizer(&m, &t, &c)
        }
        .realize(&s);
        assert_eq!(r.forms, ["boy", "read"]);
        assert!(r.warnings.iter().any(|w| w.contains("malformed")));
    }

    #[test]
    fn without_reinflector_forms_are_lemmas() {
        let (m, t, c) = (lm(), MappingTable::english(), OrderConfig::default());
        let s = sentence(
            "1\tbook\tbook\tNOUN\t_\tNumber=Sing\t3\tobj\t_\t_\n2\tboy\tboy\tNOUN\t_\t_\t3\tnsubj\t_\t_\n3\tread\tread\tVERB\t_\t_\t0\troot\t_\t_\n",
        );
        let r = realizer(&m, &t, &c).realize(&s);
        assert_eq!(r.forms, ["book", "boy", "read"]);
        let mut out: Vec<String> = crate::text::lower_tokens(r.text.trim_end_matches(" ."));
        out.sort();
        assert_eq!(out, ["book", "boy", "read"]);
    }
}
