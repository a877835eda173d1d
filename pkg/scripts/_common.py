"""Shared argument handling for the experiment scripts."""
import argparse
import os

from risrank.cli import write_atomic


def parser(description, realizations=1000):
    p = argparse.ArgumentParser(description=description)
    p.add_argument("--realizations", type=int, default=realizations)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="CSV path (default: results/<script>.csv)")
    return p


def save(args, default_name, text):
    out = args.out or os.path.join("results", default_name)
    os.makedirs(os.path.dirname(os.path.abspath(out)), exist_ok=True)
    write_atomic(out, text)
    print(f"wrote {out}")


def table(records, value="mean_se"):
    schemes = list(dict.fromkeys(r.scheme for r in records))
    xs = list(dict.fromkeys(r.sweep_value for r in records))
    print(f"{records[0].sweep_var:>8s} " + " ".join(f"{s:>9s}" for s in schemes))
    for x in xs:
        row = {r.scheme: getattr(r, value) for r in records if r.sweep_value == x}
        print(f"{x:8g} " + " ".join(f"{row[s]:9.4f}" for s in schemes))
