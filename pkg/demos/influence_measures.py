"""
Cosine similarity vs the quantized influence measure
====================================================

Two scores for "does this reference track this query": cosine is bounded
by 1 no matter how much evidence piles up, while the quantized influence
measure grows with the square of the partition sizes.
"""

import numpy as np

from qimrag import (
    cosine_similarity,
    iscore_general,
    normalized_iscore,
    qim,
    quantize,
)

rng = np.random.default_rng(7)

# a query signal and a noisy echo of it
x = rng.random(200)
y = x + 0.15 * rng.random(200)

print("cosine(x, y)           =", round(cosine_similarity(x, y), 6))
print("qim(x, y, q=16)        =", round(qim(x, y, 16), 6))

# an unrelated reference scores near zero influence
z = rng.random(200)
print("qim(x, unrelated, q=16) =", round(qim(x, z, 16), 6))

# replication: repeat every element 3 times. Cosine stays put (bounded
# by 1, any drift is float summation noise); influence multiplies by 9.
x3, y3 = np.repeat(x, 3), np.repeat(y, 3)
print()
print("after repeating each element 3x")
print("  cosine drift :", abs(cosine_similarity(x3, y3) - cosine_similarity(x, y)))
print("  qim ratio    :", round(qim(x3, y3, 16) / qim(x, y, 16), 6))

# the influence measure decomposes into the general i-score over the
# occupied bins, divided by (occupied count * sigma of y)
part = quantize(x, 16)
iscore = iscore_general(part.labels, y)
sigma = float(np.std(y))
print()
print("occupied bins:", len(part.occupied))
print("decomposed   :", iscore / (len(part.occupied) * sigma))
print("qim directly :", qim(x, y, 16))
print("normalized i-score:", round(normalized_iscore(part.labels, y), 6))
