"""Stand-alone re-verification of realizability certificates.

Uses only the standard library and the certificate's own numbers:

    python tests/certificate_checker.py cert.json [more.json ...]

Exit status 0 when every certificate checks out, 1 otherwise.
"""

import json
import sys
from fractions import Fraction as F


def alpha(n, b):
    return n + b * n / F(1 + n * n)


def beta(n, b):
    return F(2 * (1 + n * n)) / b


def eigen(n, b):
    return 3 * (1 + 4 * n * n) * beta(n, b), (1 + b) * (1 + n * n) * beta(2 * n, b)


def check(cert):
    try:
        return _check(cert)
    except (KeyError, TypeError, ValueError, ZeroDivisionError):
        return False


def _check(cert):
    b, w = F(cert["b"]), cert["witness"]
    kind = w["kind"]
    if cert["verdict"] == "realizable":
        return kind == "normalized-symbol" and b == 2 and all(
            F(a) == 1 + n * n for n, a in w["table"]) and all(
            eigen(n, b)[0] == eigen(n, b)[1] for n in range(0, 9))
    for e in w.get("census", []):
        p, k, m = e["p"], e["k"], e["m"]
        if alpha(p, b) != p + k or m != p + k or F(e["alpha_m"]) != alpha(m, b):
            return False
    # no integral alpha_p is possible for |p| > |b|
    lim = int(abs(b)) + 1 if b else 0
    census = {e["p"] for e in w.get("census", [])}
    if b and census != {p for p in range(-lim, lim + 1) if p and alpha(p, b).denominator == 1}:
        return False
    if kind == "resonance-failure":
        return b == 0 and F(w["alpha_n"]) == w["n"]
    if kind == "eigenrelation-failure" or kind == "integrality-census":
        e = w if kind == "eigenrelation-failure" else w["eigenrelation"]
        lhs, rhs = eigen(e["n"], b)
        ok = lhs == F(e["lhs"]) and rhs == F(e["rhs"]) and lhs != rhs
        # every census entry must be ruled out by alpha_m != p
        return ok and all(F(x["alpha_m"]) != x["p"] for x in w["census"])
    if kind == "gamma-contradiction":
        p = w["p"]
        fin = [F(v) for v in w["final_coefficient"]]
        lhs1, rhs1 = w["lhs_one_coefficient"], w["rhs_one_coefficient"]
        return (b == -2 * (1 + p * p) and w["k"] == -2 * p and w["l"] == -2
                and beta(p, b) == F(w["beta_p"]) == -1 and alpha(p, b) == -p
                and fin == [0, p] and [F(v) for v in lhs1["gamma"]] == [0, p]
                and all(F(v) == 0 for v in lhs1["1"]) and set(rhs1) == {"1"}
                and all(F(v) == 0 for v in rhs1["1"]))
    return False


def main(paths):
    ok = True
    for path in paths:
        with open(path) as fh:
            good = check(json.load(fh))
        print(f"{path}: {'ok' if good else 'INVALID'}")
        ok &= good
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
