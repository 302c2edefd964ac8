"""Independent brute-force helpers and cached corpus runs shared by the tests.

The brute-force functions here use plain itertools so they do not share
code with the numpy oracle inside the package.
"""

import itertools
from pathlib import Path

from pqecheck.cnf import Clause, Cnf
from pqecheck.fc import FcConfig, fc_prove
from pqecheck.gen import corpus_models
from pqecheck.oracle import check_property_bf, exact_diameter, reach_bfs
from pqecheck.pp import PpConfig, run_pp
from pqecheck.pqe import PqeProblem

CORPUS_DIR = Path(__file__).resolve().parents[1] / "src" / "pqecheck" / "corpus"


def holds(c, a):
    return any(a[abs(l)] == (l > 0) for l in c)


def sat_by(f, a):
    return all(holds(c, a) for c in f)


def assignments(vars_):
    vars_ = sorted(vars_)
    for bits in itertools.product((False, True), repeat=len(vars_)):
        yield dict(zip(vars_, bits))


def brute_sat(f, nvars):
    for a in assignments(range(1, nvars + 1)):
        if sat_by(f, a):
            return a
    return None


def brute_exists(f, free, point):
    """Whether some extension of ``point`` (over ``free``) satisfies f."""
    rest = sorted(set(range(1, max(f.num_vars, max(free, default=0)) + 1)) - set(free))
    for ext in assignments(rest):
        a = dict(point)
        a.update(ext)
        if sat_by(f, a):
            return True
    return False


def random_cnf(rng, nvars, nclauses, max_len=4):
    out = []
    for _ in range(nclauses):
        width = rng.randint(1, min(max_len, nvars))
        vs = rng.sample(range(1, nvars + 1), width)
        out.append(Clause(v if rng.random() < 0.5 else -v for v in vs))
    return Cnf(out, nvars)


def random_pqe(rng, max_vars=14, max_clauses=30):
    """Random problem with |V + W| <= max_vars and at most max_clauses clauses.

    The clause count scales with the variable count so that B is usually
    satisfiable and A is redundant in roughly half the cases.
    """
    n = rng.randint(min(4, max_vars), max_vars)
    nw = rng.randint(1, n - 1)
    w = rng.sample(range(1, n + 1), nw)
    total = rng.randint(2, max(2, min(max_clauses, 2 * n)))
    na = rng.randint(1, min(4, total - 1))
    f = random_cnf(rng, n, total, 4)
    a = Cnf(f.clauses[:na], n)
    b = Cnf(f.clauses[na:], n)
    free = set(range(1, n + 1)) - set(w)
    return PqeProblem(a, b, frozenset(w), frozenset(free))


class CorpusCache:
    """Corpus models with oracle answers and PP/FC runs, each computed once."""

    def __init__(self):
        self.models = corpus_models()
        self._pp = {}
        self._fc = {}
        self._oracle = {}

    @property
    def names(self):
        return list(self.models)

    def oracle(self, name):
        if name not in self._oracle:
            ts = self.models[name]
            self._oracle[name] = (check_property_bf(ts), exact_diameter(ts), reach_bfs(ts))
        return self._oracle[name]

    def pp(self, name):
        if name not in self._pp:
            self._pp[name] = run_pp(self.models[name], PpConfig(debug=True))
        return self._pp[name]

    def fc(self, name, multi_state=False):
        key = (name, multi_state)
        if key not in self._fc:
            self._fc[key] = fc_prove(self.models[name], FcConfig(multi_state=multi_state))
        return self._fc[key]


CRITERIA = {}


def report(n, ok, detail):
    """Record and print the one-line outcome of acceptance criterion n."""
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} ({detail})"
    CRITERIA[n] = line
    print(line)
    return ok
