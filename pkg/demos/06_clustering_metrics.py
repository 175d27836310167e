"""External clustering metrics: ARI, NMI, BCubed, and the top-k harness.

Run from the repo root:  python3 demos/06_clustering_metrics.py
"""

from eventframes.evaluation import (
    ari,
    bcubed,
    mention_harness,
    metrics_table,
    nmi,
    score_partition,
    top_k_types,
)

gold = ["attack", "attack", "attack", "elect", "elect", "marry"]

print("perfect prediction (labels may differ, grouping is what counts):")
print(metrics_table(score_partition(gold, [9, 9, 9, 4, 4, 7])))
print()

print("one attack mention confused with elect:")
confused = [9, 9, 4, 4, 4, 7]
print(metrics_table(score_partition(gold, confused)))
print()

print("everything in one cluster:")
lumped = [0, 0, 0, 0, 0, 0]
print(f"  ARI    = {ari(gold, lumped):+.4f}")
print(f"  NMI    = {nmi(gold, lumped):.4f}")
print(f"  BCubed = {bcubed(gold, lumped)}")
print()

mentions = [
    ("m1", "attack"), ("m2", "attack"), ("m3", "attack"),
    ("m4", "elect"), ("m5", "elect"),
    ("m6", "marry"),
]
print("gold types ranked by mention count:", top_k_types(mentions, k=15))
predicted = {"m1": 0, "m2": 0, "m3": 0, "m4": 1, "m5": 1, "m6": 2}
print("harness restricted to the 2 most frequent types:")
print(metrics_table(mention_harness(mentions, predicted, k=2)))
