#!/usr/bin/env python3
"""Throughput comparison of the two simulation kernels.

Runs the same seeded synth+decode workload through the pure-numpy
backend and the compiled one, and prints per-trial times and the
speedup.  The two backends are bit-identical by contract (the test
suite enforces it); this script is only about speed.

Usage: python3 scripts/benchmark_backends.py [n_trials]
"""

import sys
import time

import numpy as np

from gazemark._kernel import pure

try:
    from gazemark._kernel import native
except ImportError:
    native = None

from gazemark.engine import SessionConfig, Technique
from gazemark.geometry import LayoutParams
from gazemark.menu import build_menu
from gazemark.synth import Expertise, NoiseProfile, plan_scanpath, synthesize


def workload(n_trials):
    """(config, plan, expertise) cases cycled over n_trials."""
    cases = []
    for technique, breadth, target in (
        (Technique.LATTICE, 4, (0, 1, 2)),
        (Technique.BORDER_PIE, 6, (2, 3, 4)),
    ):
        menu = build_menu(breadth, 3, label_seed=1)
        config = SessionConfig(
            technique=technique, menu=menu, params=LayoutParams(radius=10.0)
        )
        for expertise in (Expertise.EXPERIENCED, Expertise.NOVICE):
            cases.append((config, target, expertise))
    return [cases[i % len(cases)] for i in range(n_trials)]


def run(impl, trials, noise):
    synth_s = 0.0
    decode_s = 0.0
    n_samples = 0
    for i, (config, target, expertise) in enumerate(trials):
        ss = np.random.SeedSequence([4242, i])
        plan_ss, synth_ss = ss.spawn(2)
        plan = plan_scanpath(
            config, target, expertise, rng=np.random.default_rng(plan_ss)
        )
        t0 = time.perf_counter()
        stream = synthesize(plan, noise, rng=np.random.default_rng(synth_ss), backend=impl)
        t1 = time.perf_counter()
        impl.decode_trial(stream.t, stream.x, stream.y, stream.valid, config)
        t2 = time.perf_counter()
        synth_s += t1 - t0
        decode_s += t2 - t1
        n_samples += len(stream.t)
    return synth_s, decode_s, n_samples


def main():
    n_trials = int(sys.argv[1]) if len(sys.argv) > 1 else 2000
    noise = NoiseProfile()
    trials = workload(n_trials)

    backends = [("pure", pure)]
    if native is not None:
        backends.append(("native", native))
    else:
        print("compiled kernel not built; benchmarking pure only")

    results = {}
    for name, impl in backends:
        run(impl, trials[: min(50, n_trials)], noise)  # warm up
        synth_s, decode_s, n_samples = run(impl, trials, noise)
        results[name] = (synth_s, decode_s)
        print(
            f"{name:>7}: synth {1e6 * synth_s / n_trials:8.1f} us/trial   "
            f"decode {1e6 * decode_s / n_trials:8.1f} us/trial   "
            f"({n_samples} samples total)"
        )

    if "native" in results:
        ps, pd = results["pure"]
        ns, nd = results["native"]
        print(
            f"speedup: synth {ps / ns:4.1f}x   decode {pd / nd:4.1f}x   "
            f"end-to-end {(ps + pd) / (ns + nd):4.1f}x"
        )


if __name__ == "__main__":
    main()
