"""Random inputs shared by the tests."""
from fractions import Fraction
from math import gcd

from qhplanes.birational import OUTER, SPROUTING, SUBDIVISIONAL, BlowupStep, ElementaryTransformation, Flow, elementary_transform
from qhplanes.graph import Vertex, WeightedGraph


def random_tree(rng, n, weights=(-6, 1), genus_rate=0.0):
    verts = []
    edges = []
    for i in range(n):
        g = 1 if rng.random() < genus_rate else 0
        verts.append(Vertex(i, rng.randint(*weights), g))
        if i:
            edges.append((rng.randrange(i), i))
    return WeightedGraph(verts, edges)


def random_history(rng, length):
    """Blowup history of a fiber grown from the 0-curve ``0``; ids are 1, 2, ..."""
    steps = [BlowupStep(SPROUTING, 0, 1)]
    verts = [0, 1]
    edges = [(0, 1)]
    for k in range(2, length + 1):
        if edges and rng.random() < 0.5:
            u, v = rng.choice(edges)
            steps.append(BlowupStep(SUBDIVISIONAL, (u, v), k))
            edges.remove((u, v))
            edges += [(u, k), (k, v)]
        else:
            v = rng.choice(verts)
            steps.append(BlowupStep(SPROUTING, v, k))
            edges.append((v, k))
        verts.append(k)
    return steps


def random_affine_fiber_spec(rng, length):
    """History of a fiber meeting the section ``Dh``; the first step blows up ``Dh . 0``."""
    steps = [BlowupStep(SUBDIVISIONAL, ("Dh", 0), 1)]
    verts = [0, 1]
    edges = [(0, 1)]
    attach = 1
    for k in range(2, length + 1):
        r = rng.random()
        if r < 0.2:
            steps.append(BlowupStep(SUBDIVISIONAL, ("Dh", attach), k))
            edges.append((attach, k))
            attach = k
        elif r < 0.55:
            u, v = rng.choice(edges)
            steps.append(BlowupStep(SUBDIVISIONAL, (u, v), k))
            edges.remove((u, v))
            edges += [(u, k), (k, v)]
        else:
            v = rng.choice(verts)
            steps.append(BlowupStep(SPROUTING, v, k))
            edges.append((v, k))
        verts.append(k)
    return steps


def fractions_with_denominator_at_most(p_max):
    return [Fraction(q, p) for p in range(2, p_max + 1) for q in range(1, p) if gcd(p, q) == 1]


def random_flow(rng, g, max_len):
    steps = []
    for _ in range(rng.randint(0, max_len)):
        zeros = [v for v in g if g.weight(v) == 0 and g.genus(v) == 0 and g.degree(v) <= 2]
        if not zeros:
            break
        z = rng.choice(zeros)
        nb = list(g.neighbors(z))
        if len(set(nb)) != len(nb):
            break
        options = nb + ([OUTER] if len(nb) <= 1 else [])
        t = ElementaryTransformation(z, rng.choice(options))
        g = elementary_transform(g, t)
        steps.append(t)
    return Flow(steps), g
