"""Regenerate corpus/: buffer instances plus two small hand-written programs."""
import argparse
from pathlib import Path

from pafas.casestudy import KINDS, gen_source

EXTRA = {
    "quickstart.pafas": "# one lazy and one urgent branch leading to the same state\nP = a.0 + _b.0;\nmain P\n",
    "hidden_loop.pafas": (
        "# the hidden action becomes urgent after one time step and fires as tau,\n"
        "# so time keeps passing without any in or out: a catastrophic cycle\n"
        "main (rec x. a.x) / {a}\n"
    ),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=Path(__file__).resolve().parent.parent / "corpus", type=Path)
    ap.add_argument("--max-n", type=int, default=4)
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    for kind in KINDS:
        for N in range(1, args.max_n + 1):
            (args.out / f"{kind}_{N}.pafas").write_text(gen_source(kind, N), encoding="utf-8")
    for name, text in EXTRA.items():
        (args.out / name).write_text(text, encoding="utf-8")
    print(f"wrote {len(KINDS) * args.max_n + len(EXTRA)} files to {args.out}")


if __name__ == "__main__":
    main()
