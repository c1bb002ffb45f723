"""Synthetic HR-style benchmark data.

Generates a mixed-type employee table (gender, age, race, department,
position, performance, competencies, ...) from a population of latent
employee archetypes. Pay level follows an archetype score with a planted
advantage for the privileged group (male and aged <= 40), and a handful of
unprivileged-dominated archetypes carry row-level label noise. The result is
a table whose original representation is moderately accurate but measurably
unfair, while the similarity-mapped representations recover both accuracy
and parity -- the regime the pipeline is designed to exercise.
"""

from __future__ import annotations

import numpy as np

from .dataset import ColumnSchema, GroupCondition, GroupSpec, TabularDataset

DEFAULT_GROUP_SPEC = GroupSpec((
    GroupCondition("Gender", "eq", "male"),
    GroupCondition("Age", "le", 40),
))

PAY_LEVELS = ("low", "mid", "high")

_CATS = {
    "Gender": (("male", "female"), (0.56, 0.44)),
    "Race": (("white", "black", "asian", "hispanic", "other"),
             (0.55, 0.15, 0.12, 0.12, 0.06)),
    "HispanicLatino": (("yes", "no"), (0.14, 0.86)),
    "MaritalDesc": (("single", "married", "divorced", "widowed"),
                    (0.42, 0.4, 0.14, 0.04)),
    "Department": (("production", "it", "sales", "admin", "executive"),
                   (0.45, 0.2, 0.15, 0.12, 0.08)),
    "Position": (("technician", "engineer", "analyst", "coordinator",
                  "specialist", "manager", "director", "accountant"),
                 (0.24, 0.16, 0.13, 0.12, 0.12, 0.11, 0.05, 0.07)),
    "PerformanceScore": (("needs_improvement", "meets", "exceeds", "exceptional"),
                         (0.12, 0.58, 0.22, 0.08)),
}
_DEPT_EFFECT = {"production": 0.0, "it": 0.9, "sales": 0.5, "admin": 0.3,
                "executive": 1.6}
_POS_EFFECT = {"technician": 0.0, "engineer": 1.0, "analyst": 0.7,
               "coordinator": 0.35, "specialist": 0.55, "manager": 1.3,
               "director": 1.9, "accountant": 0.8}
_PERF_EFFECT = {"needs_improvement": -0.5, "meets": 0.0, "exceeds": 0.5,
                "exceptional": 1.0}

# archetype-population shape
_N_ARCHETYPES = 40
_N_TRAITS = 8
_SCORE_NOISE = 1.5        # archetype-level score noise
_CUT_MARGIN = 0.3         # resample archetype noise this close to a cut
_CUT_QUANTILES = (0.5, 0.8)  # pay-level cut points on the archetype score
_ADDITIVE_WEIGHT = 0.3    # weight of the dept/position/performance effects
_PRIV_BIAS = 1.2          # score advantage of the privileged group
_TRAIT_NOISE = 36.0       # row-level competency noise (std dev)
_CAT_CORRUPT = 0.34       # chance a row redraws a categorical cell
_N_MIXED = 6              # unprivileged archetypes with rowwise labels
_MIXED_WEIGHT = 2.6       # sampling weight of the mixed archetypes
_MIXED_P_HIGH = (0.62, 0.2)  # P(high) alternating across mixed archetypes
_TIGHT = 0.3              # noise shrink for tight (well-separated) clusters
_N_ADJACENT = 2           # privileged mid archetypes moved next to a
                          # privileged high archetype at a short offset
_ADJACENT_OFFSET = 12.0   # trait-center offset within an adjacent pair
_ADJACENT_WEIGHT = 1.5    # sampling weight of adjacent-pair archetypes


def synthetic_cv(n=301, seed=3, missing_rate=0.0) -> TabularDataset:
    """Synthetic curriculum-vitae table with a planted pay bias.

    Rows are drawn from latent employee archetypes; pay level follows the
    archetype score (privileged archetypes get a fixed score advantage) with
    rowwise label noise inside a few unprivileged archetypes.
    ``missing_rate`` blanks that fraction of feature cells (never the target).
    """
    rng = np.random.default_rng(seed)        # population structure
    rng2 = np.random.default_rng(seed + 1)   # row-level noise
    traitnames = [f"Competency{chr(65 + i)}" for i in range(_N_TRAITS)]

    def draw_cat(name, r):
        levels, p = _CATS[name]
        return str(r.choice(levels, p=p))

    arch = []
    for _ in range(_N_ARCHETYPES):
        a = {name: draw_cat(name, rng) for name in _CATS}
        a["Age"] = float(rng.integers(24, 59))
        a["WorkExperience"] = float(np.clip(rng.normal(8, 5), 0, 30).round(1))
        a["_centers"] = rng.uniform(5, 95, size=_N_TRAITS)
        a["_u"] = rng.normal(0, _SCORE_NOISE)
        arch.append(a)

    def archetype_score(a):
        priv = (a["Gender"] == "male") and (a["Age"] <= 40)
        additive = (_DEPT_EFFECT[a["Department"]] + _POS_EFFECT[a["Position"]]
                    + _PERF_EFFECT[a["PerformanceScore"]])
        return _ADDITIVE_WEIGHT * additive + _PRIV_BIAS * priv + a["_u"]

    scores = np.array([archetype_score(a) for a in arch])
    cuts = np.quantile(scores, list(_CUT_QUANTILES))
    for k in range(_N_ARCHETYPES):
        # keep archetypes clear of the pay-level cuts so clusters are
        # label-pure unless we deliberately mix them below
        tries = 0
        while (min(abs(scores[k] - cuts[0]), abs(scores[k] - cuts[1])) < _CUT_MARGIN
               and tries < 300):
            arch[k]["_u"] = rng.normal(0, _SCORE_NOISE)
            scores[k] = archetype_score(arch[k])
            tries += 1
    labels = np.array(np.where(scores > cuts[1], "high",
                               np.where(scores > cuts[0], "mid", "low")),
                      dtype=object)

    def is_priv(k):
        return arch[k]["Gender"] == "male" and arch[k]["Age"] <= 40

    # mixed-label clusters: unprivileged-dominated archetypes whose rows get
    # labels drawn rowwise, so axis-split models err on the minority label
    weights = np.ones(_N_ARCHETYPES)
    mixed_p = {}
    candidates = [k for k in range(_N_ARCHETYPES) if labels[k] != "mid"]
    rng.shuffle(candidates)
    for t in range(_N_MIXED):
        k = candidates.pop()
        arch[k]["Gender"] = "female"
        mixed_p[k] = _MIXED_P_HIGH[t % 2]
        weights[k] = _MIXED_WEIGHT

    # adjacent pairs: a privileged mid archetype placed a short offset from a
    # privileged high archetype with the same profile; separable as sampled,
    # but points interpolated between the two clusters are ambiguous
    adjacent = set()
    priv_highs = [k for k in range(_N_ARCHETYPES)
                  if labels[k] == "high" and is_priv(k) and k not in mixed_p]
    priv_mids = [k for k in range(_N_ARCHETYPES)
                 if labels[k] == "mid" and is_priv(k) and k not in mixed_p]
    rng.shuffle(priv_highs)
    rng.shuffle(priv_mids)
    for _ in range(min(_N_ADJACENT, len(priv_highs), len(priv_mids))):
        h, m = priv_highs.pop(), priv_mids.pop()
        for name in _CATS:
            arch[m][name] = arch[h][name]
        arch[m]["Age"] = arch[h]["Age"]
        arch[m]["WorkExperience"] = arch[h]["WorkExperience"]
        arch[m]["_centers"] = arch[h]["_centers"] + rng.normal(
            0, _ADJACENT_OFFSET, size=_N_TRAITS)
        weights[h] = weights[m] = _ADJACENT_WEIGHT
        adjacent.update((h, m))
    pk = weights / weights.sum()

    catnames = list(_CATS)
    featnames = (["Gender", "Age"] + [c for c in catnames if c != "Gender"]
                 + traitnames + ["WorkExperience"])
    rows = []
    for _ in range(n):
        k = int(rng.choice(_N_ARCHETYPES, p=pk))
        a = arch[k]
        priv = is_priv(k)
        tight = ((k in mixed_p and mixed_p[k] > 0.5)
                 or (priv and labels[k] == "high" and k not in mixed_p)
                 or k in adjacent)
        trait_sd = _TRAIT_NOISE * (_TIGHT if tight else 1.0)
        corrupt = _CAT_CORRUPT * (_TIGHT if tight else 1.0)
        r = []
        for name in featnames:
            if name == "Gender":
                r.append(a[name])
            elif name == "Age":
                r.append(float(np.clip(a["Age"] + rng2.normal(0, 2), 22, 60).round(0)))
            elif name == "WorkExperience":
                r.append(float(np.clip(a["WorkExperience"] + rng2.normal(0, 1.0),
                                       0, 30).round(1)))
            elif name in _CATS:
                r.append(draw_cat(name, rng2) if rng2.uniform() < corrupt else a[name])
            else:
                j = traitnames.index(name)
                r.append(float(np.clip(a["_centers"][j] + rng2.normal(0, trait_sd),
                                       0, 100).round(1)))
        if k in mixed_p:
            r.append("high" if rng.uniform() < mixed_p[k] else "low")
        else:
            r.append(str(labels[k]))
        rows.append(r)

    columns = ([ColumnSchema("Gender", "categorical", sensitive=True),
                ColumnSchema("Age", "numeric", sensitive=True)]
               + [ColumnSchema(c, "categorical",
                               sensitive=(c in ("Race", "HispanicLatino")))
                  for c in catnames if c != "Gender"]
               + [ColumnSchema(t, "numeric") for t in traitnames]
               + [ColumnSchema("WorkExperience", "numeric"),
                  ColumnSchema("PayLevel", "categorical")])

    if missing_rate > 0:
        n_feat = len(columns) - 1
        for i in range(n):
            for j in range(n_feat):
                if rng2.uniform() < missing_rate:
                    rows[i][j] = None
        # every row must keep at least one observed feature
        for i in range(n):
            if all(rows[i][j] is None for j in range(n_feat)):
                rows[i][0] = "female"

    ds = TabularDataset(columns=tuple(columns),
                        rows=tuple(tuple(r) for r in rows),
                        target="PayLevel")
    return ds.with_rows(ds.rows)  # recompute numeric observed ranges
