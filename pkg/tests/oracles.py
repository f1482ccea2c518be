"""Independent reference implementations used as test oracles.

These are written with plain Python loops and no imports from the package,
so they can't share a bug with the code under test.
"""

import itertools
import math


def step_strength(iterations, n, s_init, r, delta):
    """Strength of one episode after ``iterations`` round-robin passes, stepped one activation at a time."""
    s = s_init
    for _ in range(iterations):
        for _ in range(n - 1):
            s = s - s * delta
        s = s + r * (1 - s)
    return s


def brute_terminal(n, r, delta, tol=1e-15, cap=10**6):
    """Fixed point of the round-robin recurrence by plain iteration."""
    s = 1.0
    for _ in range(cap):
        nxt = step_strength(1, n, s, r, delta)
        if abs(nxt - s) < tol:
            return nxt
        s = nxt
    return s


def buffered_code(seq, size, i_w=1.0, b_w=0.4):
    code = [0.0] * size
    for j in seq:
        code = [b_w * c for c in code]
        code[j] += i_w
    return code


def brute_decode(code, alphabet, max_len, i_w=1.0, b_w=0.4, tol=1e-9):
    """All sequences (no immediate repeats) whose buffered code matches ``code``."""
    hits = []
    for L in range(1, max_len + 1):
        for seq in itertools.product(range(alphabet), repeat=L):
            if any(a == b for a, b in zip(seq, seq[1:])):
                continue
            c = buffered_code(seq, len(code), i_w, b_w)
            if all(abs(x - y) <= tol for x, y in zip(c, code)):
                hits.append(list(seq))
    return hits


def fuzzy_choice(x, w, alpha):
    num = sum(min(a, b) for a, b in zip(x, w))
    return num / (alpha + sum(w))


def delta_init(s_init, r):
    return math.log(s_init * (1 - r) / (s_init - r))
