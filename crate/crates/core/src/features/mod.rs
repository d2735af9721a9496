//! Comment featurization, training-fold vocabularies and sparse vectors.

mod extract;
mod tokenize;
mod vocab;

pub use extract::{
    combine_context, extract_features, featurize_snippet, is_real_valued, FeatureBag, FeatureSet,
    Frame, FrameArg, SidecarAnnotation, SidecarIndex, SidecarToken, SnippetFeatures,
    CONTEXT_PREFIX, SENTIMENT_FEATURES,
};
pub use tokenize::{tokenize, tokenize_with, Token, DEFAULT_EMOTICONS};
pub use vocab::{build_vocabulary, build_vocabulary_with, vectorize, SparseVector, Vocabulary};
