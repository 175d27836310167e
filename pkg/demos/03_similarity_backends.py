"""The three similarity backend kinds and the ensemble that combines them.

Run from the repo root:  python3 demos/03_similarity_backends.py
"""

import numpy as np

from eventframes.similarity import (
    EmbeddingBackend,
    LexicalBackend,
    LexiconBackend,
    SimilarityEnsemble,
)

lexical = LexicalBackend()
print("lexical (token/bigram Dice):")
for a, b in [("die", "die"), ("die", "died"), ("ab", "cd"),
             ("terrorist attacks killed", "terrorist attacks continued")]:
    print(f"  sim({a!r}, {b!r}) = {lexical.score(a, b):.3f}")
print()

lexicon = LexiconBackend([["die", "decease", "perish"], ["dead", "victim"]])
print("lexicon (synonym sets, lexical fallthrough):")
for a, b in [("die", "decease"), ("dead", "victim"), ("die", "victim")]:
    print(f"  sim({a!r}, {b!r}) = {lexicon.score(a, b):.3f}")
print()

embedding = EmbeddingBackend(
    {
        "attack": np.array([1.0, 0.2, 0.0]),
        "assault": np.array([0.9, 0.3, 0.1]),
        "wedding": np.array([-0.2, 0.9, 0.4]),
    }
)
print("embedding (cosine mapped to [0, 1]):")
for a, b in [("attack", "assault"), ("attack", "wedding"), ("attack", "unknownword")]:
    print(f"  sim({a!r}, {b!r}) = {embedding.score(a, b):.3f}")
print(f"  vector misses that fell back to lexical: {embedding.fallback_count}")
print()

ensemble = SimilarityEnsemble(backends=[lexical, lexicon], weights=[0.3, 0.7])
print("ensemble (convex combination):")
print(f"  sim('die', 'decease') = {ensemble.sim('die', 'decease'):.3f}")
print()

print("slot-set similarity (soft best-match average):")
attack_slots = {"attacker", "victim", "weapon"}
decease_slots = {"agent", "dead", "instrument"}
print(f"  sim_slotsets({sorted(attack_slots)}, {sorted(attack_slots)}) = "
      f"{ensemble.sim_slotsets(attack_slots, attack_slots):.3f}")
print(f"  sim_slotsets({sorted(attack_slots)}, {sorted(decease_slots)}) = "
      f"{ensemble.sim_slotsets(attack_slots, decease_slots):.3f}")
print(f"  sim_slotsets({sorted(attack_slots)}, []) = {ensemble.sim_slotsets(attack_slots, set()):.3f}")
