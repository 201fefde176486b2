"""Case reports: the JSON record for one verdict, CSV tables for batches and
PNG figures of the derived slope bounds."""

import csv
import io
import json
import os
import time
from collections import Counter
from dataclasses import asdict, dataclass, field

from . import __version__
from .independence import (ALL_RULES, DEPENDENT, INDEPENDENT, UNKNOWN, DependenceWitness,
                           check_dependence, verdict)
from .parameters import classify_range
from .series import multiset_str, parse_multiset

SCHEMA = "troprank-report/1"
CSV_FIELDS = ["case", "r", "s", "rho", "m", "g", "d", "range", "size", "verdict",
              "expected", "flag", "seconds"]


@dataclass
class CaseReport:
    case: dict
    parameters: dict
    range: str
    size: int
    verdict: str
    certificate: list = field(default_factory=list)
    certificate_status: str = ""
    witness: dict = None
    profile: dict = None
    seconds: float = 0.0
    rule_stats: dict = field(default_factory=dict)
    seed: int = 0
    engine: str = __version__
    schema: str = SCHEMA

    @property
    def expected(self):
        return self.case.get("expected", INDEPENDENT)

    @property
    def flagged(self):
        return self.verdict != self.expected

    def to_json(self):
        return asdict(self)

    def dumps(self):
        return json.dumps(self.to_json(), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, data):
        if data.get("schema") != SCHEMA:
            raise ValueError(f"unsupported report schema {data.get('schema')!r}")
        return cls(**data)

    def stable(self):
        """Report content without wall-clock timing, for reproducibility checks."""
        out = self.to_json()
        out.pop("seconds")
        return out

    def row(self):
        p = self.parameters
        return {"case": self.case["name"], "r": p["r"], "s": p["s"], "rho": p["rho"],
                "m": p["m"], "g": p["g"], "d": p["d"], "range": self.range, "size": self.size,
                "verdict": self.verdict, "expected": self.expected,
                "flag": "!" if self.flagged else "", "seconds": f"{self.seconds:.3f}"}

    def witness_revalidates(self, series):
        if self.witness is None:
            return False
        b = DependenceWitness.from_json(self.witness).b
        A = case_A(self)
        ok, _ = check_dependence(A, b, series)
        return ok


def run_case(case, seed=0, rules=ALL_RULES, budget=200, terse=False, G=None):
    """Full pipeline for one ``CaseSpec``; returns ``(report, series)``."""
    start = time.perf_counter()
    G, series = case.build(seed, G)
    v = verdict(list(case.A), series, rules, budget)
    seconds = time.perf_counter() - start
    steps = v.certificate.steps if v.certificate else []
    stats = dict(sorted(Counter(st["rule"] for st in steps).items()))
    if terse:
        steps = [st for st in steps if st.get("contradiction")] or steps[-1:]
    p = case.parameters
    rc = classify_range(p)
    meta = case.sidecar()
    meta["A"] = [multiset_str(I) for I in case.A]
    meta["tableau"] = case.tableau.to_text()
    meta["long_bridges"] = sorted(G.long_bridges)
    rep = CaseReport(
        case=meta,
        parameters=p.as_dict(),
        range=rc.kind,
        size=len(case.A),
        verdict=v.kind,
        certificate=steps,
        certificate_status=v.certificate.status if v.certificate else "",
        witness=v.witness.to_json() if v.witness else None,
        profile=v.to_json()["profile"],
        seconds=round(seconds, 6),
        rule_stats=stats,
        seed=seed,
    )
    return rep, series


def case_A(report):
    return [parse_multiset(x) for x in report.case["A"]]


def exit_code(reports):
    """0 if every verdict matches expectation, 3 if an expected independence
    came back dependent, 2 otherwise."""
    code = 0
    for rep in reports:
        if rep.verdict == rep.expected:
            continue
        if rep.verdict == DEPENDENT and rep.expected == INDEPENDENT:
            return 3
        code = 2
    return code


def table_text(reports):
    cols = ["case", "r", "s", "rho", "m", "g", "range", "size", "verdict", "seconds", "flag"]
    rows = [[str(rep.row()[c]) for c in cols] for rep in reports]
    widths = [max([len(c)] + [len(row[i]) for row in rows]) for i, c in enumerate(cols)]
    out = ["  ".join(c.ljust(w) for c, w in zip(cols, widths))]
    out += ["  ".join(x.ljust(w) for x, w in zip(row, widths)) for row in rows]
    return "\n".join(line.rstrip() for line in out) + "\n"


def csv_text(reports):
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
    writer.writeheader()
    for rep in reports:
        writer.writerow(rep.row())
    return buf.getvalue()


def bound_profile(report):
    """Tightest recorded ``(upper, lower)`` bound per bridge index."""
    g = report.parameters["g"]
    upper = [None] * (g + 1)
    lower = [None] * (g + 1)
    for st in report.certificate:
        if "op" not in st:
            continue
        k, v = st["k"], st["value"]
        if st["op"] == "<=":
            upper[k] = v if upper[k] is None else min(upper[k], v)
        else:
            lower[k] = v if lower[k] is None else max(lower[k], v)
    return upper, lower


def plot_bounds(report, path):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    upper, lower = bound_profile(report)
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ks = [k for k, v in enumerate(upper) if v is not None]
    ax.plot(ks, [upper[k] for k in ks], "v", color="tab:red", label="upper bound")
    ks = [k for k, v in enumerate(lower) if v is not None]
    ax.plot(ks, [lower[k] for k in ks], "^", color="tab:blue", label="lower bound")
    if report.profile and report.profile.get("sigma"):
        sig = report.profile["sigma"]
        ax.plot(range(len(sig)), sig, "-", color="gray", label="surviving profile")
    ax.set_xlabel("bridge k")
    ax.set_ylabel("slope of the minimum at u_k")
    ax.set_title(f"{report.case['name']}: {report.verdict}")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)


def plot_summary(reports, path):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    colours = {INDEPENDENT: "tab:green", UNKNOWN: "tab:orange", DEPENDENT: "tab:red"}
    fig, ax = plt.subplots(figsize=(7, 0.35 * max(len(reports), 1) + 1.2))
    names = [rep.case["name"] for rep in reports]
    ax.barh(range(len(reports)), [max(rep.seconds, 1e-4) for rep in reports],
            color=[colours.get(rep.verdict, "gray") for rep in reports])
    ax.set_yticks(range(len(reports)))
    ax.set_yticklabels(names, fontsize=7)
    ax.invert_yaxis()
    ax.set_xscale("log")
    ax.set_xlabel("seconds")
    handles = [plt.Rectangle((0, 0), 1, 1, color=c) for c in colours.values()]
    ax.legend(handles, list(colours), fontsize=7, loc="lower right")
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)


def write_outputs(reports, outdir, figures=True):
    """Write ``report.json``, ``report.csv`` and PNG figures into ``outdir``."""
    os.makedirs(outdir, exist_ok=True)
    paths = {}
    paths["json"] = os.path.join(outdir, "report.json")
    with open(paths["json"], "w", encoding="utf-8") as fh:
        json.dump({"schema": SCHEMA, "engine": __version__,
                   "cases": [rep.to_json() for rep in reports]}, fh, indent=2, sort_keys=True)
    paths["csv"] = os.path.join(outdir, "report.csv")
    with open(paths["csv"], "w", encoding="utf-8", newline="") as fh:
        fh.write(csv_text(reports))
    if figures:
        paths["figures"] = []
        if reports:
            fig = os.path.join(outdir, "summary.png")
            plot_summary(reports, fig)
            paths["figures"].append(fig)
        for rep in reports:
            fig = os.path.join(outdir, f"bounds-{rep.case['name'].replace('/', '_')}.png")
            plot_bounds(rep, fig)
            paths["figures"].append(fig)
    return paths
