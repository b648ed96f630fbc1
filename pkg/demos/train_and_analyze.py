"""Train a small classifier on a toy graded corpus, then report on a new text."""

import numpy as np

from keystage.ann import MlpTopology, TrainConfig, evaluate, init_model, train
from keystage.features import FEATURE_COUNT, extract_features
from keystage.lexicons import default_resource_dir, default_resources
from keystage.pipeline import analyze_text
from keystage.stages import KEY_STAGES
from keystage.textseg import segment_text

# Four texts of clearly rising difficulty stand in for a graded corpus.
BASE = {
    "KS2": "The dog ran to the park. He saw a ball. It was red. He was happy. "
           "The sun was warm. They played all day.",
    "KS3": "Although the morning was cold, Sarah decided to explore the ancient "
           "castle, because its crumbling towers suggested forgotten stories.",
    "KS4": "The protagonist's predicament illustrates a profound moral ambiguity; "
           "his choices, however questionable, reveal the corrosive pressure of "
           "poverty upon principle.",
    "KS5": "Notwithstanding its ostensibly conventional narrative architecture, "
           "the novel interrogates epistemological certainty itself, its "
           "unreliable narration dramatising the irreducible subjectivity of "
           "perception.",
}

resources = default_resources()
texts, labels = [], []
for label, stage in enumerate(KEY_STAGES):
    for i in range(8):
        texts.append(BASE[stage] + f" Note {i} repeats the tale once more.")
        labels.append(label)

X = np.array([extract_features(segment_text(t), resources).values for t in texts])
y = np.array(labels)

# last two variants of each stage held out for validation
train_idx = [i for i in range(len(y)) if i % 8 < 6]
val_idx = [i for i in range(len(y)) if i % 8 >= 6]

model, history = train(
    init_model(MlpTopology(FEATURE_COUNT, (32,), len(KEY_STAGES)), seed=0),
    X[train_idx], y[train_idx], X[val_idx], y[val_idx],
    TrainConfig(learning_rate=0.05, patience=10, max_epochs=80, seed=0),
)
metrics = evaluate(model, X[val_idx], y[val_idx])
print(f"stopped at epoch {history.best_epoch}; "
      f"validation accuracy {metrics.accuracy:.2f}, macro F1 {metrics.f1:.2f}\n")

# now report on an unseen excerpt, chunked to a small budget
excerpt = (default_resource_dir() / "demo" / "looking-glass.txt").read_text("utf-8")
outcome = analyze_text(excerpt, model, resources, token_budget=80)
report = outcome.report

shares = ", ".join(f"{k} {v:.0%}" for k, v in report.distribution.items())
print(f"chunk distribution: {shares}")
print(f"overall difficulty score {report.overall_score:.2f} ({report.reading_age.text})")
print(f"chunks analysed: {len(outcome.chunks)}")
print(f"most complex chunk starts: {report.most_complex.text[:60]!r}")
words = ", ".join(w for w, _ in report.top_vocabulary[:8])
print(f"top vocabulary ({report.vocabulary_mode} mode): {words}")
