"""Late fusion on a task where each modality carries half the label.

Class labels are two bits: the linguistic features encode one bit and the
embeddings the other, so either branch alone tops out near 50% accuracy
while the fused head can recover everything.
"""

from pathlib import Path

import numpy as np

from keystage.ann import MlpTopology, TrainConfig, evaluate, init_model, macro_f1, train
from keystage.evalstats import paired_t_test, pareto_front, read_results_csv
from keystage.fusion import forward_fused, from_linguistic, train_fused


def make_split(n_per_class, seed, feat_dim=6, emb_dim=8, noise=0.3):
    rng = np.random.default_rng(seed)
    labels = np.repeat(np.arange(4), n_per_class)
    rng.shuffle(labels)
    X = rng.normal(0.0, noise, size=(len(labels), feat_dim))
    X[:, 0] += 3.0 * (labels & 1)
    E = rng.normal(0.0, noise, size=(len(labels), emb_dim))
    E[:, 0] += 3.0 * (labels >> 1)
    return X, E, labels


X_train, E_train, y_train = make_split(60, seed=10)
X_val, E_val, y_val = make_split(20, seed=11)
X_test, E_test, y_test = make_split(25, seed=12)
config = TrainConfig(learning_rate=0.05, patience=20, max_epochs=150, seed=0)

features_only, _ = train(
    init_model(MlpTopology(6, (32,), 4), seed=1),
    X_train, y_train, X_val, y_val, config,
)
embeddings_only, _ = train(
    init_model(MlpTopology(8, (32,), 4), seed=1),
    E_train, y_train, E_val, y_val, config,
)
print(f"features only   macro F1 {evaluate(features_only, X_test, y_test).f1:.3f}")
print(f"embeddings only macro F1 {evaluate(embeddings_only, E_test, y_test).f1:.3f}")

fused, _ = train_fused(
    from_linguistic(init_model(MlpTopology(6, (32,), 4), seed=1), 8),
    X_train, E_train, y_train, X_val, E_val, y_val, config,
)
fused_preds = np.argmax(forward_fused(fused, X_test, E_test), axis=1)
print(f"fused           macro F1 {macro_f1(y_test, fused_preds):.3f}")

# The same comparison machinery works on saved evaluation tables: here the
# bundled benchmark CSV from the test fixtures, fused rows named "X + ANN".
fixtures = Path(__file__).parent.parent / "tests" / "fixtures"
rows = read_results_csv(fixtures / "benchmark_results.csv")
fused_rows = [r for r in rows if "+" in r.name]
unimodal_rows = [r for r in rows if "+" not in r.name]

front = pareto_front(rows)
print("\npareto front (max F1, min inference time):")
for row in front:
    print(f"  {row.name:20s} f1 {row.f1:.3f}  {row.inference_time_s * 1000:.0f} ms")

test = paired_t_test(
    [r.accuracy for r in fused_rows], [r.accuracy for r in unimodal_rows]
)
print(f"\npaired t-test on accuracy: t = {test.t_statistic:.2f}, p = {test.p_value:.2e}")
