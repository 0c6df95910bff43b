import itertools
import math
import os

import numpy as np

# precodes and their systematization are expensive at k = 10^4; cache them
os.environ.setdefault("RAPTORLAB_CACHE_DIR",
                      os.path.expanduser("~/.cache/raptorlab"))

from raptorlab.codec import LtGraph  # noqa: E402


def random_tree_graph(k, rng, extra_degree_ones=True):
    """Bipartite tree: every new output symbol links one known input with
    fresh ones, so the factor graph stays cycle-free."""
    edges, offsets = [], [0]
    known = [0]
    fresh = list(range(1, k))
    rng.shuffle(fresh)
    while fresh:
        d = int(min(1 + rng.integers(1, 4), len(fresh) + 1))
        anchor = known[int(rng.integers(len(known)))]
        new = [fresh.pop() for _ in range(d - 1)]
        edges.extend([anchor] + new)
        offsets.append(len(edges))
        known.extend(new)
    if extra_degree_ones:
        for v in range(k):
            edges.append(v)
            offsets.append(len(edges))
    return LtGraph(k, len(offsets) - 1, np.asarray(edges, np.int32),
                   np.asarray(offsets, np.int64), 0)


def exact_marginals(graph, llrs):
    """Posterior LLRs by brute force over all 2^k input configurations."""
    k = graph.k_prime
    cfgs = np.array(list(itertools.product([0, 1], repeat=k)), dtype=np.uint8)
    logw = np.empty(len(cfgs))
    for idx, cfg in enumerate(cfgs):
        out = np.bitwise_xor.reduceat(cfg[graph.edges], graph.offsets[:-1])
        logw[idx] = float(np.sum((1 - 2 * out.astype(float)) * llrs / 2.0))
    w = np.exp(logw - logw.max())
    post = np.empty(k)
    for i in range(k):
        post[i] = math.log(w[cfgs[:, i] == 0].sum() / w[cfgs[:, i] == 1].sum())
    return post
