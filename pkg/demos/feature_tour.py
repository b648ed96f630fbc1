"""Walk one public-domain excerpt through segmentation and feature extraction."""

from keystage.curriculum import count_curriculum_features, load_curriculum_lexicon
from keystage.features import extract_features
from keystage.lexicons import default_resource_dir, default_resources, tag_pos
from keystage.textseg import segment_text

text = (default_resource_dir() / "demo" / "christmas-carol.txt").read_text("utf-8")
print(text[:120] + "...\n")

# segmentation first: every later number is computed from these tokens
seg = segment_text(text)
words = sum(1 for t in seg.tokens if t.is_word)
print(f"tokens {len(seg.tokens)}, words {words}, "
      f"sentences {seg.sentence_count}, paragraphs {seg.paragraph_count}\n")

resources = default_resources()
vector = extract_features(seg, resources)
print(f"feature vector: {len(vector.values)} values (schema v{vector.schema_version})")
for name, value in zip(vector.schema, vector.values):
    if name.startswith(("readability.", "diversity.")):
        print(f"  {name:26s} {value:10.3f}")

# curriculum evidence: which stage-marker patterns the excerpt contains
counts = count_curriculum_features(
    seg, tag_pos(seg), load_curriculum_lexicon(), resources.gazetteers
)
print("\ncurriculum features found:")
for name, count in counts.as_flat_dict().items():
    if count:
        print(f"  {name:32s} {count}")
