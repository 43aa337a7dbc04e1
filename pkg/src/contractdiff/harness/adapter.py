"""Protocol v1 adapter around a builtin profile.

    python3 -m contractdiff.harness.adapter --profile reference
"""
from __future__ import annotations

import argparse

from ..vm.backends import PROFILES, make_backend
from ..vm.gas import load_schedule
from .protocol import serve


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--profile", choices=PROFILES, default="reference")
    ap.add_argument("--gas-schedule", help="JSON gas schedule replacing the reference one")
    args = ap.parse_args(argv)
    backend = make_backend(args.profile, schedule=load_schedule(args.gas_schedule))

    def run(bytecode, calldata, gas_limit, step_limit):
        return backend.run(bytecode, calldata, gas_limit, step_limit)

    return serve(run)


if __name__ == "__main__":
    raise SystemExit(main())
