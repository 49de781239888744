"""Print rp(n), the asymptotic performance and the buff/pipe crossover per buffer.

Compares every computed value against the closed forms
rp_fifo = 2n, rp_pipe = 2n + N + 1, rp_buff = 4n.
"""
import argparse

from pafas.casestudy import GENERATORS
from pafas.performance import asymptotic_performance, check_response, reduce_rts, response_performance
from pafas.semantics import build_rts

CLOSED = {"fifo": lambda N, n: 2 * n, "pipe": lambda N, n: 2 * n + N + 1, "buff": lambda N, n: 4 * n}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-N", type=int, default=4)
    ap.add_argument("--max-n", type=int, default=6)
    args = ap.parse_args()
    ns = range(1, args.max_n + 1)
    mismatches = 0
    for N in range(1, args.max_N + 1):
        rp = {}
        for kind, gen in GENERATORS.items():
            rts = build_rts(gen(N))
            check_response(rts)
            rrts = reduce_rts(rts)
            rp[kind] = [response_performance(rrts, n).value for n in ns]
            a = asymptotic_performance(rrts).value
            ok = all(v == CLOSED[kind](N, n) for v, n in zip(rp[kind], ns))
            mismatches += not ok
            print(f"N={N} {kind:4s} a={a!s:3s} rp={rp[kind]} {'ok' if ok else 'MISMATCH'}")
        faster = [n for n, b, p in zip(ns, rp["buff"], rp["pipe"]) if b <= p]
        print(f"N={N} buff no slower than pipe for n in {faster} (expected n <= {(N + 1) // 2})")
    raise SystemExit(1 if mismatches else 0)


if __name__ == "__main__":
    main()
